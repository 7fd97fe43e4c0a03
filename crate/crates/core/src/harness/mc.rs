//! Monte Carlo memory experiments.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bits::Bits;
use crate::circuit::ScheduledCircuit;
use crate::code::{memory_experiment, State};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::frame::FaultTable;
use crate::hypergraph::{fault_signatures, hypergraph_from_signatures, DecodingHypergraph, EventMap, FaultSignature, Merge};
use crate::matching::{MatchingGraph, Weighting};
use crate::mld::{default_prefix_depth, OfflineMld, OnlineMld, PrefixCache};
use crate::noise::{NoiseParams, Sampler};
use crate::tableau::{simulate_symbolic, ProductState, SymbolicRun};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecoderKind {
    MatchingUniform,
    MatchingAnalytic,
    MldOffline,
    MldOnline,
}

impl DecoderKind {
    pub const ALL: [DecoderKind; 4] =
        [DecoderKind::MatchingUniform, DecoderKind::MatchingAnalytic, DecoderKind::MldOffline, DecoderKind::MldOnline];

    pub fn name(self) -> &'static str {
        match self {
            DecoderKind::MatchingUniform => "matching-uniform",
            DecoderKind::MatchingAnalytic => "matching-analytic",
            DecoderKind::MldOffline => "mld-offline",
            DecoderKind::MldOnline => "mld-online",
        }
    }
}

impl fmt::Display for DecoderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DecoderKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        DecoderKind::ALL
            .into_iter()
            .find(|d| d.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown decoder `{s}`")))
    }
}

/// Fixed 64-bit mixer (splitmix64 finalizer).
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of shot `i`; independent of how shots are scheduled.
pub fn shot_seed(base: u64, i: u64) -> u64 {
    mix64(base ^ mix64(i))
}

/// Everything about one (state, rounds) memory experiment that does not
/// depend on the noise rates.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub state: State,
    pub rounds: usize,
    pub circuit: ScheduledCircuit,
    pub run: SymbolicRun,
    pub map: EventMap,
    pub table: FaultTable,
    /// Signatures of every fault option, with probabilities for uniform
    /// unit-less rates; see `hypergraph`.
    signatures: Vec<FaultSignature>,
}

impl Experiment {
    pub fn new(state: State, rounds: usize, exec: Exec) -> Result<Self> {
        Experiment::with_options(state, rounds, true, exec)
    }

    pub fn with_options(state: State, rounds: usize, deflag: bool, exec: Exec) -> Result<Self> {
        let circuit = memory_experiment(state, rounds);
        let run = simulate_symbolic(&circuit, &vec![ProductState::Zero; circuit.num_qubits])?;
        let map = EventMap::with_run(&circuit, &run, deflag)?;
        if map.logical_constant != state.eigenvalue_bit() {
            return Err(Error::Internal("error-free logical readout disagrees with the prepared state".into()));
        }
        let table = FaultTable::new(&circuit, exec)?;
        let signatures = fault_signatures(&map, &table, &NoiseParams::uniform(0.5)?, exec)?;
        Ok(Experiment { state, rounds, circuit, run, map, table, signatures })
    }

    /// Decoding hypergraph for the given rates.
    pub fn hypergraph(&self, params: &NoiseParams, mode: Merge) -> DecodingHypergraph {
        let sigs: Vec<FaultSignature> = self
            .signatures
            .iter()
            .filter(|s| params.get(s.fault.kind) > 0.0)
            .map(|s| {
                let mut s = s.clone();
                let n = self.table.num_options(s.fault.location) as f64;
                s.fault.probability = params.get(s.fault.kind) / n;
                s
            })
            .collect();
        hypergraph_from_signatures(&self.map, &sigs, mode)
    }

    /// Samples shot `i` of a run seeded with `base_seed`.
    pub fn sample_shot(&self, sampler: &Sampler, base_seed: u64, i: u64, picks: &mut Vec<(usize, usize)>) -> ShotRecord {
        let seed = shot_seed(base_seed, i);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let words = (0..self.run.num_vars.div_ceil(64)).map(|_| rng.gen::<u64>()).collect();
        let assignment = Bits::from_words(self.run.num_vars, words);
        let mut raw = Bits::zeros(self.circuit.num_measurements());
        for (m, o) in self.run.outcomes.iter().enumerate() {
            if o.eval(&assignment) {
                raw.set(m, true);
            }
        }
        sampler.sample(&mut rng, picks);
        for &(l, o) in picks.iter() {
            raw.xor_with(self.table.flips(l, o));
        }
        let (beta, logical) = self.map.events_from_shot(&raw).expect("record length matches");
        ShotRecord {
            shot_id: i,
            seed,
            beta,
            final_logical_bit: logical,
            true_label: self.map.label(logical ^ self.map.logical_constant),
        }
    }

    pub fn decoder(&self, kind: DecoderKind, prior: &NoiseParams, prefix_cache_depth: Option<usize>) -> Result<Decoder> {
        self.decoder_with(kind, prior, prefix_cache_depth, Merge::Exact)
    }

    pub fn decoder_with(
        &self,
        kind: DecoderKind,
        prior: &NoiseParams,
        prefix_cache_depth: Option<usize>,
        merge: Merge,
    ) -> Result<Decoder> {
        let hg = self.hypergraph(prior, merge);
        Decoder::new(kind, &hg, self.map.basis, self.rounds, prefix_cache_depth)
    }

    /// Failure if the corrected readout differs from the prepared eigenvalue.
    pub fn is_failure(&self, shot: &ShotRecord, correction: [bool; 2]) -> bool {
        shot.final_logical_bit ^ correction[self.map.label_bit()] != self.state.eigenvalue_bit()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShotRecord {
    pub shot_id: u64,
    pub seed: u64,
    pub beta: Bits,
    pub final_logical_bit: bool,
    pub true_label: [bool; 2],
}

#[derive(Debug, Clone)]
pub enum Decoder {
    Matching(MatchingGraph),
    Offline(OfflineMld),
    Online(OnlineMld),
}

impl Decoder {
    pub fn new(
        kind: DecoderKind,
        hg: &DecodingHypergraph,
        basis: crate::code::Basis,
        rounds: usize,
        prefix_cache_depth: Option<usize>,
    ) -> Result<Self> {
        Ok(match kind {
            DecoderKind::MatchingUniform => Decoder::Matching(MatchingGraph::build(hg, basis, Weighting::Uniform)?),
            DecoderKind::MatchingAnalytic => Decoder::Matching(MatchingGraph::build(hg, basis, Weighting::Analytic)?),
            DecoderKind::MldOffline => Decoder::Offline(OfflineMld::build(hg)?),
            DecoderKind::MldOnline => Decoder::Online(OnlineMld::new(
                hg,
                rounds,
                prefix_cache_depth.unwrap_or_else(|| default_prefix_depth(rounds)),
            )?),
        })
    }

    pub fn decode(&self, beta: &Bits, cache: &mut PrefixCache) -> Result<[bool; 2]> {
        match self {
            Decoder::Matching(g) => g.decode(beta),
            Decoder::Offline(m) => m.decode(beta),
            Decoder::Online(m) => m.decode(beta, cache),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub state: State,
    pub rounds: usize,
    pub shots: u64,
    pub decoder: DecoderKind,
    pub failures: u64,
    pub p_fail: f64,
    pub std_err: f64,
}

impl ExperimentResult {
    pub fn new(state: State, rounds: usize, decoder: DecoderKind, shots: u64, failures: u64) -> Self {
        let p = if shots == 0 { 0.0 } else { failures as f64 / shots as f64 };
        let se = if shots == 0 { 0.0 } else { (p * (1.0 - p) / shots as f64).sqrt() };
        ExperimentResult { state, rounds, shots, decoder, failures, p_fail: p, std_err: se }
    }
}

/// Samples shots and returns each one's failure flag under every decoder.
pub fn run_decoders(
    exp: &Experiment,
    noise: &NoiseParams,
    decoders: &[&Decoder],
    shots: u64,
    seed: u64,
    exec: Exec,
) -> Result<Vec<u64>> {
    let sampler = Sampler::new(&exp.circuit, noise);
    let per_shot = exec.map_init(
        shots as usize,
        || (PrefixCache::default(), Vec::new()),
        |(cache, picks), i| -> Result<Vec<bool>> {
            let shot = exp.sample_shot(&sampler, seed, i as u64, picks);
            decoders
                .iter()
                .map(|d| Ok(exp.is_failure(&shot, d.decode(&shot.beta, cache)?)))
                .collect()
        },
    );
    let mut failures = vec![0u64; decoders.len()];
    for r in per_shot {
        for (f, fail) in failures.iter_mut().zip(r?) {
            *f += fail as u64;
        }
    }
    Ok(failures)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    pub exec: Exec,
    pub deflag: bool,
    pub prefix_cache_depth: Option<usize>,
    pub merge: Merge,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { exec: Exec::default(), deflag: true, prefix_cache_depth: None, merge: Merge::Exact }
    }
}

/// One experiment with the decoder prior equal to the true noise.
pub fn run_memory_mc(
    state: State,
    rounds: usize,
    params: &NoiseParams,
    decoder: DecoderKind,
    shots: u64,
    seed: u64,
) -> Result<ExperimentResult> {
    run_memory_mc_with(state, rounds, params, params, decoder, shots, seed, RunOptions::default())
}

#[allow(clippy::too_many_arguments)]
pub fn run_memory_mc_with(
    state: State,
    rounds: usize,
    noise: &NoiseParams,
    prior: &NoiseParams,
    decoder: DecoderKind,
    shots: u64,
    seed: u64,
    opts: RunOptions,
) -> Result<ExperimentResult> {
    if decoder == DecoderKind::MldOnline && rounds > crate::mld::ONLINE_MAX_ROUNDS {
        return Err(Error::Config(format!("online decoding is capped at {} rounds", crate::mld::ONLINE_MAX_ROUNDS)));
    }
    let exp = Experiment::with_options(state, rounds, opts.deflag, opts.exec)?;
    let d = exp.decoder_with(decoder, prior, opts.prefix_cache_depth, opts.merge)?;
    let failures = run_decoders(&exp, noise, &[&d], shots, seed, opts.exec)?[0];
    Ok(ExperimentResult::new(state, rounds, decoder, shots, failures))
}

/// Pre-sampled shots, for decoding repeatedly with different priors.
pub fn sample_corpus(exp: &Experiment, noise: &NoiseParams, shots: u64, seed: u64, exec: Exec) -> Vec<ShotRecord> {
    let sampler = Sampler::new(&exp.circuit, noise);
    exec.map_init(shots as usize, Vec::new, |picks, i| exp.sample_shot(&sampler, seed, i as u64, picks))
}

pub fn corpus_failures(exp: &Experiment, decoder: &Decoder, corpus: &[ShotRecord], exec: Exec) -> Result<u64> {
    let r = exec.map_init(corpus.len(), PrefixCache::default, |cache, i| {
        let s = &corpus[i];
        decoder.decode(&s.beta, cache).map(|g| exp.is_failure(s, g) as u64)
    });
    r.into_iter().sum()
}

/// CSV: `shot_id, seed, b0 .. b{n-1}, final_logical_bit`.
pub fn write_corpus_csv<W: std::io::Write>(w: W, corpus: &[ShotRecord], num_events: usize) -> Result<()> {
    let io = |e: csv::Error| Error::Config(format!("corpus csv: {e}"));
    let mut wr = csv::Writer::from_writer(w);
    let mut header = vec!["shot_id".to_string(), "seed".to_string()];
    header.extend((0..num_events).map(|i| format!("b{i}")));
    header.push("final_logical_bit".into());
    wr.write_record(&header).map_err(io)?;
    for s in corpus {
        let mut row = vec![s.shot_id.to_string(), s.seed.to_string()];
        row.extend((0..num_events).map(|i| (s.beta.get(i) as u8).to_string()));
        row.push((s.final_logical_bit as u8).to_string());
        wr.write_record(&row).map_err(io)?;
    }
    wr.flush().map_err(|e| Error::Config(format!("corpus csv: {e}")))?;
    Ok(())
}

pub fn read_corpus_csv<R: std::io::Read>(r: R) -> Result<Vec<ShotRecord>> {
    let bad = |m: String| Error::Config(format!("corpus csv: {m}"));
    let mut rd = csv::Reader::from_reader(r);
    let n = rd.headers().map_err(|e| bad(e.to_string()))?.len();
    if n < 3 {
        return Err(bad("too few columns".into()));
    }
    let mut out = Vec::new();
    for rec in rd.records() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let num = |i: usize| rec[i].trim().parse::<u64>().map_err(|e| bad(format!("row field {i}: {e}")));
        let bit = |i: usize| match rec[i].trim() {
            "0" => Ok(false),
            "1" => Ok(true),
            v => Err(bad(format!("bit `{v}`"))),
        };
        let bools = (2..n - 1).map(bit).collect::<Result<Vec<_>>>()?;
        out.push(ShotRecord {
            shot_id: num(0)?,
            seed: num(1)?,
            beta: Bits::from_bools(&bools),
            final_logical_bit: bit(n - 1)?,
            true_label: [false; 2],
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decoder_names() {
        for d in DecoderKind::ALL {
            assert_eq!(d.name().parse::<DecoderKind>().unwrap(), d);
        }
        assert!("bp".parse::<DecoderKind>().is_err());
    }

    #[test]
    fn zero_noise_never_fails() {
        for d in DecoderKind::ALL {
            let r = run_memory_mc(State::Minus, 1, &NoiseParams::zero(), d, 200, 3).unwrap();
            assert_eq!(r.failures, 0);
        }
    }

    #[test]
    fn fixed_seed_is_reproducible() {
        let p = NoiseParams::uniform(0.01).unwrap();
        let a = run_memory_mc(State::Zero, 2, &p, DecoderKind::MatchingAnalytic, 2000, 11).unwrap();
        let b = run_memory_mc(State::Zero, 2, &p, DecoderKind::MatchingAnalytic, 2000, 11).unwrap();
        assert_eq!(a, b);
        let opts = RunOptions { exec: Exec::Sequential, ..RunOptions::default() };
        let c = run_memory_mc_with(State::Zero, 2, &p, &p, DecoderKind::MatchingAnalytic, 2000, 11, opts).unwrap();
        assert_eq!(a, c);
    }

    #[test]
    fn corpus_csv_roundtrip() {
        let exp = Experiment::new(State::Zero, 1, Exec::Sequential).unwrap();
        let c = sample_corpus(&exp, &NoiseParams::uniform(0.02).unwrap(), 50, 5, Exec::Sequential);
        let mut buf = Vec::new();
        write_corpus_csv(&mut buf, &c, exp.map.num_events()).unwrap();
        let back = read_corpus_csv(buf.as_slice()).unwrap();
        assert_eq!(back.len(), 50);
        for (a, b) in c.iter().zip(&back) {
            assert_eq!((a.shot_id, a.seed, &a.beta, a.final_logical_bit), (b.shot_id, b.seed, &b.beta, b.final_logical_bit));
        }
    }
}
