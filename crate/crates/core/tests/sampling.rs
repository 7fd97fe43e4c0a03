use heavyhex::circuit::Kind;
use heavyhex::exec::Exec;
use heavyhex::harness::mc::{corpus_failures, run_decoders, sample_corpus, DecoderKind, Experiment};
use heavyhex::harness::optimize::{optimize_decoder_priors, OptimizeOptions};
use heavyhex::mld::PrefixCache;
use heavyhex::noise::{fault_options, locations, NoiseParams, Sampler};
use heavyhex::{memory_experiment, State};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn sampler_frequencies() {
    let c = memory_experiment(State::Zero, 1);
    let mut params = NoiseParams::uniform(0.002).unwrap();
    params.set(Kind::Measure, 0.01).unwrap();
    let locs = locations(&c);
    let sampler = Sampler::new(&c, &params);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let shots = 1_000_000u64;
    let mut hits = vec![0u64; Kind::ALL.len()];
    let mut cx_options = [0u64; 15];
    let mut picks = Vec::new();
    for _ in 0..shots {
        sampler.sample(&mut rng, &mut picks);
        for &(l, o) in &picks {
            hits[locs[l].kind.index()] += 1;
            assert!(o < fault_options(&locs[l]).len());
            if locs[l].kind == Kind::Cx {
                cx_options[o] += 1;
            }
        }
    }
    for k in Kind::ALL {
        let n = locs.iter().filter(|l| l.kind == k).count() as f64;
        let mean = n * params.get(k) * shots as f64;
        let sd = (mean * (1.0 - params.get(k))).sqrt();
        let got = hits[k.index()] as f64;
        assert!((got - mean).abs() <= 5.0 * sd.max(1.0), "{k}: {got} vs {mean}");
    }
    let total: u64 = cx_options.iter().sum();
    let e = total as f64 / 15.0;
    let chi2: f64 = cx_options.iter().map(|&c| (c as f64 - e).powi(2) / e).sum();
    // 14 degrees of freedom; the 99.9% quantile is 36.1.
    assert!(chi2 < 36.1, "chi2 {chi2}");
}

/// Exhaustive single and pair enumeration brackets the sampled failure rate:
/// it misses only shots with three or more faults.
#[test]
fn sampling_agrees_with_enumeration() {
    let noise = NoiseParams::uniform(3e-4).unwrap();
    let exp = Experiment::new(State::Zero, 1, Exec::default()).unwrap();
    let d = exp.decoder(DecoderKind::MatchingAnalytic, &noise, None).unwrap();
    let locs = &exp.table.locations;
    let p_loc: Vec<f64> = locs.iter().map(|l| noise.get(l.kind)).collect();
    let none: f64 = p_loc.iter().map(|p| 1.0 - p).product();
    let b = exp.map.label_bit();
    let fails = |flips: &heavyhex::Bits| {
        let (beta, flip) = exp.map.events_from_flips(flips);
        d.decode(&beta, &mut PrefixCache::default()).map_or(true, |g| g[b] != flip)
    };
    let opts: Vec<(usize, usize, f64)> = (0..locs.len())
        .flat_map(|l| {
            let n = exp.table.num_options(l);
            let w = p_loc[l] / n as f64 / (1.0 - p_loc[l]);
            (0..n).map(move |o| (l, o, w))
        })
        .collect();
    let rows = Exec::default().map(opts.len(), |i| {
        let (l, o, w) = opts[i];
        let mut acc = if fails(exp.table.flips(l, o)) { w } else { 0.0 };
        for &(l2, o2, w2) in &opts[i + 1..] {
            if l2 == l {
                continue;
            }
            let mut f = exp.table.flips(l, o).clone();
            f.xor_with(exp.table.flips(l2, o2));
            if fails(&f) {
                acc += w * w2;
            }
        }
        acc
    });
    let enumerated = none * rows.iter().sum::<f64>();
    // Probability of at least three faulty locations, by the Poisson-binomial tail.
    let mut dist = vec![1.0, 0.0, 0.0];
    for &p in &p_loc {
        dist = vec![dist[0] * (1.0 - p), dist[1] * (1.0 - p) + dist[0] * p, dist[2] * (1.0 - p) + dist[1] * p];
    }
    let tail = 1.0 - dist.iter().sum::<f64>();

    let shots = 1_000_000u64;
    let f = run_decoders(&exp, &noise, &[&d], shots, 31, Exec::default()).unwrap()[0] as f64 / shots as f64;
    let sigma = (f.max(enumerated) / shots as f64).sqrt();
    assert!(f >= enumerated - 3.0 * sigma, "sampled {f} vs enumerated {enumerated}");
    assert!(f <= enumerated + tail + 3.0 * sigma, "sampled {f} vs enumerated {enumerated} + {tail}");
}

#[test]
fn decoders_see_identical_shots() {
    let noise = NoiseParams::uniform(0.01).unwrap();
    let exp = Experiment::new(State::Plus, 2, Exec::default()).unwrap();
    let a = sample_corpus(&exp, &noise, 500, 8, Exec::default());
    let b = sample_corpus(&exp, &noise, 500, 8, Exec::Sequential);
    assert_eq!(a, b);
    let kinds = [DecoderKind::MatchingUniform, DecoderKind::MatchingAnalytic, DecoderKind::MldOffline, DecoderKind::MldOnline];
    let decoders: Vec<_> = kinds.iter().map(|&k| exp.decoder(k, &noise, None).unwrap()).collect();
    let refs: Vec<_> = decoders.iter().collect();
    let joint = run_decoders(&exp, &noise, &refs, 500, 8, Exec::default()).unwrap();
    for (d, j) in decoders.iter().zip(joint) {
        assert_eq!(corpus_failures(&exp, d, &a, Exec::default()).unwrap(), j);
    }
}

#[test]
fn decoder_ordering_in_both_bases() {
    let noise = NoiseParams::average_model();
    for state in [State::Zero, State::Plus] {
        let shots = 40_000u64;
        let exp = Experiment::new(state, 2, Exec::default()).unwrap();
        let kinds = [DecoderKind::MldOnline, DecoderKind::MatchingAnalytic, DecoderKind::MatchingUniform];
        let decoders: Vec<_> = kinds.iter().map(|&k| exp.decoder(k, &noise, None).unwrap()).collect();
        let refs: Vec<_> = decoders.iter().collect();
        let f = run_decoders(&exp, &noise, &refs, shots, 77, Exec::default()).unwrap();
        let slack = |a: u64| 2.0 * (a as f64).sqrt();
        assert!(f[0] as f64 <= f[1] as f64 + slack(f[1]), "|{state}> {f:?}");
        assert!(f[1] as f64 <= f[2] as f64 + slack(f[2]), "|{state}> {f:?}");
    }
}

#[test]
fn optimizer_moves_toward_truth() {
    let mut truth = NoiseParams::decoder_prior();
    truth.set(Kind::Cx, 0.02).unwrap();
    let exp = Experiment::new(State::Zero, 2, Exec::default()).unwrap();
    let corpus = sample_corpus(&exp, &truth, 20_000, 3, Exec::default());
    let mut initial = truth;
    initial.set(Kind::Cx, 0.005).unwrap();
    let opts = OptimizeOptions {
        frozen: Kind::ALL.into_iter().filter(|&k| k != Kind::Cx).collect(),
        ..OptimizeOptions::default()
    };
    let r = optimize_decoder_priors(&exp, &corpus, &initial, &opts).unwrap();
    assert!(r.objective < r.initial_objective, "{r:?}");
    assert!(r.params.get(Kind::Cx) > 0.005);
    for k in Kind::ALL.into_iter().filter(|&k| k != Kind::Cx) {
        assert_eq!(r.params.get(k), initial.get(k));
    }

    let at_truth = optimize_decoder_priors(&exp, &corpus, &truth, &opts).unwrap();
    assert!(at_truth.objective <= at_truth.initial_objective);

    let mut bad = OptimizeOptions::default();
    bad.bounds.insert(Kind::Cx, (0.03, 0.1));
    assert!(optimize_decoder_priors(&exp, &corpus, &truth, &bad).is_err());
}
