//! Decoder prior tuning against a fixed shot corpus.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::circuit::Kind;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::noise::NoiseParams;

use super::mc::{corpus_failures, DecoderKind, Experiment, ShotRecord};

/// Kinds pinned at zero in the reference prior.
pub fn default_frozen() -> BTreeSet<Kind> {
    [Kind::S, Kind::Z, Kind::Initialize].into_iter().collect()
}

#[derive(Debug, Clone)]
pub struct OptimizeOptions {
    pub decoder: DecoderKind,
    /// Per-kind `(lo, hi)`; kinds absent here use `default_bounds`.
    pub bounds: BTreeMap<Kind, (f64, f64)>,
    pub default_bounds: (f64, f64),
    pub frozen: BTreeSet<Kind>,
    /// Initial multiplicative step.
    pub step: f64,
    pub min_step: f64,
    pub max_evaluations: usize,
    pub exec: Exec,
}

impl Default for OptimizeOptions {
    fn default() -> Self {
        OptimizeOptions {
            decoder: DecoderKind::MatchingAnalytic,
            bounds: BTreeMap::new(),
            default_bounds: (1e-6, 0.5),
            frozen: default_frozen(),
            step: 4.0,
            min_step: 1.05,
            max_evaluations: 200,
            exec: Exec::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OptimizeResult {
    pub params: NoiseParams,
    pub objective: f64,
    pub initial_objective: f64,
    pub evaluations: usize,
}

/// Compass search in log-rate space over the unfrozen, nonzero kinds. The
/// objective is the decoded failure fraction on `corpus`.
pub fn optimize_decoder_priors(
    exp: &Experiment,
    corpus: &[ShotRecord],
    initial: &NoiseParams,
    opts: &OptimizeOptions,
) -> Result<OptimizeResult> {
    if corpus.is_empty() {
        return Err(Error::Config("empty shot corpus".into()));
    }
    let bound = |k: Kind| opts.bounds.get(&k).copied().unwrap_or(opts.default_bounds);
    let free: Vec<Kind> = Kind::ALL
        .into_iter()
        .filter(|k| !opts.frozen.contains(k) && initial.get(*k) > 0.0)
        .collect();
    for &k in &free {
        let (lo, hi) = bound(k);
        let v = initial.get(k);
        if !(lo > 0.0 && lo <= hi && hi <= 0.5) {
            return Err(Error::Config(format!("bad bounds for {k}: [{lo}, {hi}]")));
        }
        if v < lo || v > hi {
            return Err(Error::Config(format!("initial {k} = {v} outside [{lo}, {hi}]")));
        }
    }

    let objective = |p: &NoiseParams| -> Result<f64> {
        let d = exp.decoder(opts.decoder, p, None)?;
        Ok(corpus_failures(exp, &d, corpus, opts.exec)? as f64 / corpus.len() as f64)
    };

    let mut best = *initial;
    let initial_objective = objective(&best)?;
    let mut evaluations = 1usize;
    let mut best_obj = initial_objective;
    let mut step = opts.step;
    'outer: while step >= opts.min_step {
        let mut improved = false;
        for &k in &free {
            let (lo, hi) = bound(k);
            for factor in [step, 1.0 / step] {
                let v = (best.get(k) * factor).clamp(lo, hi);
                if v == best.get(k) {
                    continue;
                }
                if evaluations >= opts.max_evaluations {
                    break 'outer;
                }
                let mut cand = best;
                cand.set(k, v)?;
                let o = objective(&cand)?;
                evaluations += 1;
                if o < best_obj {
                    best = cand;
                    best_obj = o;
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            step = step.sqrt();
        }
    }
    Ok(OptimizeResult { params: best, objective: best_obj, initial_objective, evaluations })
}
