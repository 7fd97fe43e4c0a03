//! Exact maximum-likelihood decoding over the full hypergraph.
//!
//! Keys pack `(β, γ)` as `γ | β << 2`. Both decoders include hyperedges in
//! the hypergraph's canonical order with the same arithmetic, so the online
//! decoder's surviving entries are bit-identical to the offline ones.

use std::io::Write;

use rustc_hash::FxHashMap;

use crate::bits::Bits;
use crate::error::{Error, Result};
use crate::hypergraph::{DecodingHypergraph, Hyperedge};

pub const OFFLINE_MAX_EVENTS: usize = 26;
pub const ONLINE_MAX_ROUNDS: usize = 10;

fn label_bits(l: [bool; 2]) -> u128 {
    l[0] as u128 | (l[1] as u128) << 1
}

fn mask_of(h: &Hyperedge) -> u128 {
    h.events.iter().fold(label_bits(h.logical_label), |m, &e| m | 1u128 << (e + 2))
}

fn beta_key(beta: &Bits) -> u128 {
    beta.ones().fold(0u128, |k, e| k | 1u128 << (e + 2))
}

/// Ties go to the lexicographically smallest γ = (b0, b1).
fn argmax(probs: [f64; 4]) -> Result<[bool; 2]> {
    let mut best: Option<(usize, f64)> = None;
    for g in [0b00, 0b10, 0b01, 0b11] {
        let p = probs[g];
        if p > 0.0 && best.is_none_or(|(_, b)| p > b) {
            best = Some((g, p));
        }
    }
    best.map(|(g, _)| [g & 1 == 1, g & 2 == 2]).ok_or(Error::ImpossibleSyndrome)
}

/// Sparse joint distribution over packed `(β, γ)` keys.
#[derive(Debug, Clone)]
pub struct JointDistribution {
    pub entries: FxHashMap<u128, f64>,
    incorporated: Vec<bool>,
    /// Events `< frozen_prefix` have been conditioned on.
    pub frozen_prefix: usize,
}

impl JointDistribution {
    pub fn new(num_hyperedges: usize) -> Self {
        let mut entries = FxHashMap::default();
        entries.insert(0, 1.0);
        JointDistribution { entries, incorporated: vec![false; num_hyperedges], frozen_prefix: 0 }
    }

    pub fn total(&self) -> f64 {
        self.entries.values().sum()
    }

    pub fn get(&self, beta: &Bits, gamma: [bool; 2]) -> f64 {
        self.entries.get(&(beta_key(beta) | label_bits(gamma))).copied().unwrap_or(0.0)
    }

    /// `Pr[βγ] ← (1−p) Pr[βγ] + p Pr[(β⊕β_h)(γ⊕γ_h)]`.
    pub fn include_hyperedge(&mut self, idx: usize, h: &Hyperedge) -> Result<()> {
        if self.incorporated[idx] {
            return Err(Error::DoubleInclusion(idx));
        }
        if let Some(&e) = h.events.iter().find(|&&e| e < self.frozen_prefix) {
            return Err(Error::FrozenPrefix(idx, e));
        }
        self.incorporated[idx] = true;
        self.apply(mask_of(h), h.probability);
        Ok(())
    }

    fn apply(&mut self, m: u128, p: f64) {
        let q = 1.0 - p;
        let mut next: FxHashMap<u128, f64> =
            FxHashMap::with_capacity_and_hasher(self.entries.len() * 2, Default::default());
        for (&k, &a) in &self.entries {
            let b = self.entries.get(&(k ^ m)).copied().unwrap_or(0.0);
            next.insert(k, q * a + p * b);
            if !self.entries.contains_key(&(k ^ m)) {
                next.insert(k ^ m, q * 0.0 + p * a);
            }
        }
        self.entries = next;
    }

    /// Keeps entries whose bit for `event` equals `value`.
    pub fn condition(&mut self, event: usize, value: bool) {
        let bit = 1u128 << (event + 2);
        self.entries.retain(|k, _| (k & bit != 0) == value);
        self.frozen_prefix = self.frozen_prefix.max(event + 1);
    }
}

/// Hyperedge inclusion order: canonical, which groups edges by their
/// smallest event. Edges without events carry no information and are skipped.
fn ordered_edges(hg: &DecodingHypergraph) -> Vec<usize> {
    (0..hg.hyperedges.len()).filter(|&i| !hg.hyperedges[i].events.is_empty()).collect()
}

/// Dense full distribution, built once and shared across shots.
#[derive(Debug, Clone)]
pub struct OfflineMld {
    pub num_events: usize,
    probs: Vec<f64>,
}

impl OfflineMld {
    pub fn build(hg: &DecodingHypergraph) -> Result<Self> {
        OfflineMld::build_with(hg, |_, _| {})
    }

    /// `after(i, dist)` runs after each inclusion; used by conservation tests.
    pub fn build_with(hg: &DecodingHypergraph, mut after: impl FnMut(usize, &[f64])) -> Result<Self> {
        let n = hg.num_events();
        if n > OFFLINE_MAX_EVENTS {
            return Err(Error::Config(format!(
                "offline decoding needs {n} events, cap is {OFFLINE_MAX_EVENTS}; use the online decoder"
            )));
        }
        let mut probs = vec![0.0; 1usize << (n + 2)];
        probs[0] = 1.0;
        for i in ordered_edges(hg) {
            let h = &hg.hyperedges[i];
            include_dense(&mut probs, mask_of(h) as usize, h.probability);
            after(i, &probs);
        }
        Ok(OfflineMld { num_events: n, probs })
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    pub fn decode(&self, beta: &Bits) -> Result<[bool; 2]> {
        if beta.len() != self.num_events {
            return Err(Error::Length { expected: self.num_events, got: beta.len() });
        }
        let base = beta_key(beta) as usize;
        argmax([self.probs[base], self.probs[base | 1], self.probs[base | 2], self.probs[base | 3]])
    }

    /// Little-endian dump: entry count, then `(key: u64, probability: f64)`
    /// for every non-zero entry in key order.
    pub fn dump(&self, w: &mut impl Write) -> std::io::Result<()> {
        let nz: Vec<(u64, f64)> =
            self.probs.iter().enumerate().filter(|(_, &p)| p != 0.0).map(|(k, &p)| (k as u64, p)).collect();
        w.write_all(&(nz.len() as u64).to_le_bytes())?;
        for (k, p) in nz {
            w.write_all(&k.to_le_bytes())?;
            w.write_all(&p.to_le_bytes())?;
        }
        Ok(())
    }
}

fn include_dense(probs: &mut [f64], m: usize, p: f64) {
    let q = 1.0 - p;
    let hb = usize::BITS as usize - 1 - m.leading_zeros() as usize;
    let chunk = 1usize << (hb + 1);
    let half = 1usize << hb;
    let body = |c: &mut [f64]| {
        for lo in 0..half {
            let hi = lo ^ m;
            let (a, b) = (c[lo], c[hi]);
            c[lo] = q * a + p * b;
            c[hi] = q * b + p * a;
        }
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        if probs.len() / chunk >= 8 {
            probs.par_chunks_mut(chunk).for_each(body);
            return;
        }
    }
    probs.chunks_mut(chunk).for_each(body);
}

/// Streaming decoder: events are folded in chronologically and the
/// distribution is truncated to the observed value after each one.
#[derive(Debug, Clone)]
pub struct OnlineMld {
    pub num_events: usize,
    /// Hyperedge indices to include before conditioning on each event.
    groups: Vec<Vec<usize>>,
    masks: Vec<u128>,
    probs: Vec<f64>,
    pub prefix_cache_depth: usize,
}

/// Per-worker memo of distributions after the first `prefix_cache_depth`
/// events, keyed by those events' observed bits.
#[derive(Debug, Default)]
pub struct PrefixCache {
    map: FxHashMap<u128, FxHashMap<u128, f64>>,
    pub hits: u64,
    pub max_support: usize,
}

const PREFIX_CACHE_CAP: usize = 1 << 14;

/// Default memo depth for a given number of rounds.
pub fn default_prefix_depth(rounds: usize) -> usize {
    if rounds >= 4 {
        21
    } else {
        15
    }
}

impl OnlineMld {
    pub fn new(hg: &DecodingHypergraph, rounds: usize, prefix_cache_depth: usize) -> Result<Self> {
        if rounds > ONLINE_MAX_ROUNDS {
            return Err(Error::Config(format!("online decoding is capped at {ONLINE_MAX_ROUNDS} rounds")));
        }
        let n = hg.num_events();
        if n + 2 > 128 {
            return Err(Error::Config(format!("{n} events exceed the packed key width")));
        }
        let mut groups = vec![Vec::new(); n];
        for i in ordered_edges(hg) {
            groups[hg.hyperedges[i].events[0]].push(i);
        }
        Ok(OnlineMld {
            num_events: n,
            groups,
            masks: hg.hyperedges.iter().map(mask_of).collect(),
            probs: hg.hyperedges.iter().map(|h| h.probability).collect(),
            prefix_cache_depth: prefix_cache_depth.min(n),
        })
    }

    pub fn decode(&self, beta: &Bits, cache: &mut PrefixCache) -> Result<[bool; 2]> {
        if beta.len() != self.num_events {
            return Err(Error::Length { expected: self.num_events, got: beta.len() });
        }
        let depth = self.prefix_cache_depth;
        let prefix = beta.ones().take_while(|&e| e < depth).fold(0u128, |k, e| k | 1u128 << e);
        let mut dist = JointDistribution::new(self.masks.len());
        let mut start = 0;
        if depth > 0 {
            if let Some(d) = cache.map.get(&prefix) {
                dist.entries = d.clone();
                dist.frozen_prefix = depth;
                start = depth;
                cache.hits += 1;
            }
        }
        for j in start..self.num_events {
            for &i in &self.groups[j] {
                dist.apply(self.masks[i], self.probs[i]);
            }
            cache.max_support = cache.max_support.max(dist.entries.len());
            dist.condition(j, beta.get(j));
            if dist.entries.is_empty() {
                return Err(Error::ImpossibleSyndrome);
            }
            if j + 1 == depth && cache.map.len() < PREFIX_CACHE_CAP {
                cache.map.insert(prefix, dist.entries.clone());
            }
        }
        let base = beta_key(beta);
        let p = |g: u128| dist.entries.get(&(base | g)).copied().unwrap_or(0.0);
        argmax([p(0), p(1), p(2), p(3)])
    }
}
