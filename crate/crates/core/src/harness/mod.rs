//! Monte Carlo memory experiments, curve fits and prior optimization.

pub mod fit;
pub mod mc;
pub mod optimize;

pub use fit::{fit_error_per_round, fit_leakage, FitPoint, FitResult, LeakageFit};
pub use mc::{
    run_memory_mc, run_memory_mc_with, sample_corpus, Decoder, DecoderKind, Experiment, ExperimentResult, RunOptions,
    ShotRecord,
};
pub use optimize::{optimize_decoder_priors, OptimizeOptions, OptimizeResult};
