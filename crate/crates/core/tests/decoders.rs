use std::collections::HashMap;

use heavyhex::code::Basis;
use heavyhex::exec::Exec;
use heavyhex::harness::mc::Experiment;
use heavyhex::hypergraph::{DecodingHypergraph, ErrorSensitiveEvent, EventKind, Hyperedge, Merge};
use heavyhex::matching::{max_weight_matching, MatchingGraph, Weighting};
use heavyhex::mld::{default_prefix_depth, JointDistribution, OfflineMld, OnlineMld, PrefixCache};
use heavyhex::noise::NoiseParams;
use heavyhex::{Bits, State};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Best (cardinality, weight) over all matchings, by exhaustive search.
fn brute_matching(n: usize, edges: &[(usize, usize, i64)], used: &mut Vec<bool>, start: usize) -> (usize, i64) {
    let Some(i) = (start..n).find(|&i| !used[i]) else { return (0, 0) };
    used[i] = true;
    let mut best = brute_matching(n, edges, used, i + 1);
    for &(a, b, w) in edges {
        let j = if a == i { b } else if b == i { a } else { continue };
        if used[j] {
            continue;
        }
        used[j] = true;
        let (c, s) = brute_matching(n, edges, used, i + 1);
        best = best.max((c + 1, s + w));
        used[j] = false;
    }
    used[i] = false;
    best
}

fn graph() -> impl Strategy<Value = (usize, Vec<(usize, usize, i64)>)> {
    (2usize..9).prop_flat_map(|n| {
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
        (Just(n), prop::sample::subsequence(pairs.clone(), 0..=pairs.len()), prop::collection::vec(1i64..50, pairs.len()))
            .prop_map(|(n, sel, ws)| (n, sel.into_iter().zip(ws).map(|((a, b), w)| (a, b, w)).collect()))
    })
}

fn toy_hypergraph(n: usize, edges: Vec<(Vec<usize>, f64, [bool; 2])>) -> DecodingHypergraph {
    let events = (0..n)
        .map(|id| ErrorSensitiveEvent {
            id,
            kind: EventKind::StabilizerDiff,
            basis: Basis::Z,
            stabilizer_index: Some(id),
            round: 1,
            source_measurements: vec![],
            constant: false,
        })
        .collect();
    let mut hyperedges: Vec<Hyperedge> = edges
        .into_iter()
        .map(|(events, probability, logical_label)| Hyperedge { events, probability, logical_label, fault_witnesses: vec![] })
        .collect();
    hyperedges.sort_by_key(|h| h.events[0]);
    DecodingHypergraph { events, hyperedges, k: 1 }
}

fn hyperedges(n: usize) -> impl Strategy<Value = Vec<(Vec<usize>, f64, [bool; 2])>> {
    let edge = (prop::sample::subsequence((0..n).collect::<Vec<_>>(), 1..=n.min(4)), 0.001f64..0.3, any::<[bool; 2]>());
    prop::collection::vec(edge, 1..11)
}

/// Exact joint distribution over (β, γ) by enumerating every subset of
/// hyperedges.
fn brute_joint(hg: &DecodingHypergraph) -> HashMap<(Vec<bool>, [bool; 2]), f64> {
    let m = hg.hyperedges.len();
    let n = hg.num_events();
    let mut out = HashMap::new();
    for s in 0u32..1 << m {
        let mut beta = vec![false; n];
        let mut g = [false; 2];
        let mut p = 1.0;
        for (i, h) in hg.hyperedges.iter().enumerate() {
            if s >> i & 1 == 1 {
                p *= h.probability;
                for &e in &h.events {
                    beta[e] ^= true;
                }
                g[0] ^= h.logical_label[0];
                g[1] ^= h.logical_label[1];
            } else {
                p *= 1.0 - h.probability;
            }
        }
        *out.entry((beta, g)).or_default() += p;
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn blossom_matches_brute_force((n, edges) in graph()) {
        let mate = max_weight_matching(n, &edges, true);
        let mut card = 0;
        let mut weight = 0;
        for (a, m) in mate.iter().enumerate() {
            if let Some(b) = *m {
                prop_assert_eq!(mate[b], Some(a));
                if a < b {
                    card += 1;
                    weight += edges.iter().find(|e| (e.0, e.1) == (a, b) || (e.0, e.1) == (b, a)).unwrap().2;
                }
            }
        }
        prop_assert_eq!((card, weight), brute_matching(n, &edges, &mut vec![false; n], 0));
    }

    #[test]
    fn mld_matches_brute_force((n, edges) in (1usize..6).prop_flat_map(|n| (Just(n), hyperedges(n)))) {
        let hg = toy_hypergraph(n, edges);
        let joint = brute_joint(&hg);
        let off = OfflineMld::build(&hg).unwrap();
        let on = OnlineMld::new(&hg, 1, 0).unwrap();
        let mut sparse = JointDistribution::new(hg.hyperedges.len());
        for (i, h) in hg.hyperedges.iter().enumerate() {
            sparse.include_hyperedge(i, h).unwrap();
            prop_assert!((sparse.total() - 1.0).abs() < 1e-12);
        }
        let mut cache = PrefixCache::default();
        for b in 0u32..1 << n {
            let beta: Vec<bool> = (0..n).map(|i| b >> i & 1 == 1).collect();
            let bits = Bits::from_bools(&beta);
            let probs: Vec<f64> = [[false, false], [true, false], [false, true], [true, true]]
                .iter()
                .map(|g| joint.get(&(beta.clone(), *g)).copied().unwrap_or(0.0))
                .collect();
            for (k, g) in [[false, false], [true, false], [false, true], [true, true]].iter().enumerate() {
                let dense = off.probabilities()[(b as usize) << 2 | k];
                prop_assert!((dense - probs[k]).abs() < 1e-12);
                prop_assert!((sparse.get(&bits, *g) - probs[k]).abs() < 1e-12);
            }
            let best = probs.iter().cloned().fold(0.0, f64::max);
            match off.decode(&bits) {
                Ok(g) => {
                    let k = g[0] as usize | (g[1] as usize) << 1;
                    prop_assert!(probs[k] >= best * (1.0 - 1e-12));
                    prop_assert_eq!(on.decode(&bits, &mut cache).unwrap(), g);
                }
                Err(_) => {
                    prop_assert_eq!(best, 0.0);
                    prop_assert!(on.decode(&bits, &mut cache).is_err());
                }
            }
        }
    }
}

fn min_pairing(g: &MatchingGraph, hl: &[usize]) -> f64 {
    let Some((&first, rest)) = hl.split_first() else { return 0.0 };
    let mut best = g.distance(first, g.boundary()) + min_pairing(g, rest);
    for k in 0..rest.len() {
        let mut others = rest.to_vec();
        let partner = others.remove(k);
        best = best.min(g.distance(first, partner) + min_pairing(g, &others));
    }
    best
}

#[test]
fn matching_is_minimum_weight() {
    let prior = NoiseParams::decoder_prior();
    for state in [State::Zero, State::Plus] {
        let exp = Experiment::new(state, 2, Exec::default()).unwrap();
        let hg = exp.hypergraph(&prior, Merge::Exact);
        for method in [Weighting::Uniform, Weighting::Analytic] {
            let g = MatchingGraph::build(&hg, exp.map.basis, method).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(11);
            for _ in 0..400 {
                let mut beta = Bits::zeros(hg.num_events());
                for &node in &g.nodes {
                    beta.set(node, rng.gen_bool(0.2));
                }
                let pairs = g.match_pairs(&beta).unwrap();
                let w = g.matching_weight(&pairs);
                let hl = g.highlighted(&beta);
                assert!((w - min_pairing(&g, &hl)).abs() < 1e-6 * (1.0 + w), "{state} {method:?}");
                let mut covered: Vec<usize> = pairs.iter().flat_map(|&(a, b)| [a, b]).filter(|&v| v != g.boundary()).collect();
                covered.sort();
                assert_eq!(covered, hl);
                assert_eq!(g.decode(&beta).unwrap(), g.decode_by_qubits(&beta).unwrap());
            }
        }
    }
}

#[test]
fn prefix_cache_does_not_change_decisions() {
    let noise = NoiseParams::uniform(0.01).unwrap();
    assert_eq!(default_prefix_depth(4), 21);
    assert_eq!(default_prefix_depth(2), 15);
    let exp = Experiment::new(State::Zero, 4, Exec::default()).unwrap();
    let hg = exp.hypergraph(&noise, Merge::Exact);
    let plain = OnlineMld::new(&hg, 4, 0).unwrap();
    let cached = OnlineMld::new(&hg, 4, default_prefix_depth(4)).unwrap();
    assert_eq!(cached.prefix_cache_depth, 21);
    let sampler = heavyhex::noise::Sampler::new(&exp.circuit, &noise);
    let (mut c0, mut c1) = (PrefixCache::default(), PrefixCache::default());
    let mut picks = Vec::new();
    for i in 0..300 {
        let s = exp.sample_shot(&sampler, 5, i, &mut picks);
        assert_eq!(plain.decode(&s.beta, &mut c0).ok(), cached.decode(&s.beta, &mut c1).ok());
    }
    assert!(c1.hits > 0);
    assert!(c0.max_support > 0);
}
