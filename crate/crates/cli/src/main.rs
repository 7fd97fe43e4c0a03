use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use heavyhex::code::{memory_experiment_with, Schedule};
use heavyhex::harness::mc::{read_corpus_csv, sample_corpus, write_corpus_csv};
use heavyhex::harness::optimize::default_frozen;
use heavyhex::harness::{
    fit_error_per_round, fit_leakage, optimize_decoder_priors, run_memory_mc_with, DecoderKind, Experiment,
    ExperimentResult, FitPoint, OptimizeOptions, RunOptions,
};
use heavyhex::hypergraph::Merge;
use heavyhex::matching::first_order_edge_polynomials;
use heavyhex::matching::tables::{compare, reference};
use heavyhex::{Basis, Exec, Kind, NoiseParams, State};

#[derive(Parser)]
#[command(name = "heavyhex", version, about = "Heavy-hexagon code decoding pipeline")]
struct Cli {
    /// Worker threads; defaults to the number of cores.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write the decoding hypergraph as JSON.
    BuildHypergraph {
        #[command(flatten)]
        circuit: CircuitArgs,
        #[arg(long, default_value_t = 2)]
        rounds: usize,
        #[arg(long)]
        noise: Option<PathBuf>,
        #[arg(long)]
        first_order: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare first-order edge probabilities with the embedded reference tables.
    VerifyEdges {
        /// Schedule JSON replacing the built-in one.
        #[arg(long)]
        schedule: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Monte Carlo memory experiment; writes an ExperimentResult JSON array.
    Run {
        #[command(flatten)]
        circuit: CircuitArgs,
        #[arg(long, value_delimiter = ',', default_value = "2")]
        rounds: Vec<usize>,
        #[arg(long, default_value = "matching-analytic")]
        decoder: DecoderKind,
        #[arg(long, default_value_t = 10_000)]
        shots: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// True noise; defaults to the reference decoder prior.
        #[arg(long)]
        noise: Option<PathBuf>,
        /// Decoder prior; defaults to the true noise.
        #[arg(long)]
        prior: Option<PathBuf>,
        #[arg(long)]
        first_order: bool,
        #[arg(long)]
        prefix_cache: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Sample a shot corpus CSV.
    Sample {
        #[command(flatten)]
        circuit: CircuitArgs,
        #[arg(long, default_value_t = 2)]
        rounds: usize,
        #[arg(long, default_value_t = 10_000)]
        shots: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        noise: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit the per-round decay to ExperimentResult JSON, or leakage to an (m, p) CSV.
    Fit {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        leakage: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Tune decoder priors against a shot corpus.
    Optimize {
        #[command(flatten)]
        circuit: CircuitArgs,
        #[arg(long, default_value_t = 2)]
        rounds: usize,
        #[arg(long)]
        corpus: PathBuf,
        /// Initial prior; defaults to the reference decoder prior.
        #[arg(long)]
        noise: Option<PathBuf>,
        #[arg(long, default_value = "matching-analytic")]
        decoder: DecoderKind,
        /// Kinds held fixed, comma separated.
        #[arg(long, value_delimiter = ',')]
        freeze: Option<Vec<Kind>>,
        #[arg(long, default_value_t = 200)]
        max_evaluations: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct CircuitArgs {
    #[arg(long, default_value = "0")]
    state: State,
    #[arg(long)]
    no_deflag: bool,
}

#[derive(Debug)]
struct ConfigError(String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn config(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

/// Library errors that stem from bad input are configuration errors.
fn lib(e: heavyhex::Error) -> anyhow::Error {
    match e {
        heavyhex::Error::Config(_) | heavyhex::Error::BadState(_) | heavyhex::Error::Domain(_) => config(e.to_string()),
        e => e.into(),
    }
}

fn read_input(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).map_err(|e| config(format!("cannot read {}: {e}", path.display())))
}

fn load_noise(path: Option<&Path>) -> anyhow::Result<NoiseParams> {
    match path {
        None => Ok(NoiseParams::decoder_prior()),
        Some(p) => NoiseParams::from_json(&read_input(p)?).map_err(|e| config(format!("{}: {e}", p.display()))),
    }
}

fn write_output(path: &Path, bytes: &[u8]) -> anyhow::Result<()> {
    let mut f = fs::File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    f.write_all(bytes)?;
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    write_output(path, s.as_bytes())
}

fn experiment(c: &CircuitArgs, rounds: usize) -> anyhow::Result<Experiment> {
    Experiment::with_options(c.state, rounds, !c.no_deflag, Exec::default()).map_err(lib)
}

#[derive(Serialize)]
struct FitOutput {
    #[serde(rename = "A")]
    a: f64,
    epsilon: f64,
    tau: f64,
    cov: [[f64; 2]; 2],
}

fn run(cli: Cli) -> anyhow::Result<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(config("--threads must be positive"));
        }
        #[cfg(feature = "parallel")]
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    match cli.cmd {
        Cmd::BuildHypergraph { circuit, rounds, noise, first_order, out } => {
            let params = load_noise(noise.as_deref())?;
            let exp = experiment(&circuit, rounds)?;
            let hg = exp.hypergraph(&params, if first_order { Merge::FirstOrder } else { Merge::Exact });
            let mut s = hg.to_json();
            s.push('\n');
            write_output(&out, s.as_bytes())
        }
        Cmd::VerifyEdges { schedule, out } => {
            let sched = match schedule {
                None => Schedule::default(),
                Some(p) => serde_json::from_str(&read_input(&p)?)
                    .map_err(|e| config(format!("{}: {e}", p.display())))?,
            };
            let mut wr = csv::Writer::from_writer(Vec::new());
            wr.write_record(["basis", "a", "b", "expected", "computed", "status"])?;
            let mut failures = 0;
            for (state, basis) in [(State::Zero, Basis::Z), (State::Plus, Basis::X)] {
                let got = first_order_edge_polynomials(&memory_experiment_with(&sched, state, 2), basis).map_err(lib)?;
                for c in compare(&got, &reference(basis)) {
                    let poly = |e: &Option<heavyhex::matching::EdgePolynomial>| e.as_ref().map_or(String::new(), |e| e.polynomial());
                    failures += !c.pass() as usize;
                    wr.write_record([
                        &format!("{basis:?}"),
                        &c.endpoints[0],
                        &c.endpoints[1],
                        &poly(&c.expected),
                        &poly(&c.got),
                        &(if c.pass() { "PASS" } else { "FAIL" }).to_string(),
                    ])?;
                }
            }
            write_output(&out, &wr.into_inner()?)?;
            if failures > 0 {
                anyhow::bail!("{failures} edge rows differ from the reference tables");
            }
            Ok(())
        }
        Cmd::Run { circuit, rounds, decoder, shots, seed, noise, prior, first_order, prefix_cache, out } => {
            if shots == 0 {
                return Err(config("--shots must be positive"));
            }
            let noise = load_noise(noise.as_deref())?;
            let prior = match prior {
                Some(p) => load_noise(Some(&p))?,
                None => noise,
            };
            let opts = RunOptions {
                exec: Exec::default(),
                deflag: !circuit.no_deflag,
                prefix_cache_depth: prefix_cache,
                merge: if first_order { Merge::FirstOrder } else { Merge::Exact },
            };
            let results = rounds
                .iter()
                .map(|&r| run_memory_mc_with(circuit.state, r, &noise, &prior, decoder, shots, seed, opts).map_err(lib))
                .collect::<anyhow::Result<Vec<ExperimentResult>>>()?;
            write_json(&out, &results)
        }
        Cmd::Sample { circuit, rounds, shots, seed, noise, out } => {
            if shots == 0 {
                return Err(config("--shots must be positive"));
            }
            let noise = load_noise(noise.as_deref())?;
            let exp = experiment(&circuit, rounds)?;
            let corpus = sample_corpus(&exp, &noise, shots, seed, Exec::default());
            let mut buf = Vec::new();
            write_corpus_csv(&mut buf, &corpus, exp.map.num_events())?;
            write_output(&out, &buf)
        }
        Cmd::Fit { input, leakage, out } => {
            let text = read_input(&input)?;
            if leakage {
                let mut rd = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
                let mut pts = Vec::new();
                for rec in rd.records() {
                    let rec = rec.map_err(|e| config(format!("{}: {e}", input.display())))?;
                    let num = |i: usize| -> anyhow::Result<f64> {
                        rec.get(i)
                            .and_then(|v| v.trim().parse().ok())
                            .ok_or_else(|| config(format!("{}: bad number in column {i}", input.display())))
                    };
                    pts.push((num(0)?, num(1)?));
                }
                return write_json(&out, &fit_leakage(&pts)?);
            }
            let results: Vec<ExperimentResult> =
                serde_json::from_str(&text).map_err(|e| config(format!("{}: {e}", input.display())))?;
            let pts: Vec<FitPoint> = results
                .iter()
                .map(|r| FitPoint { r: r.rounds as f64, p_fail: r.p_fail, std_err: r.std_err })
                .collect();
            let f = fit_error_per_round(&pts)?;
            write_json(&out, &FitOutput { a: f.a, epsilon: f.epsilon, tau: f.tau, cov: f.cov })
        }
        Cmd::Optimize { circuit, rounds, corpus, noise, decoder, freeze, max_evaluations, out } => {
            let initial = load_noise(noise.as_deref())?;
            let exp = experiment(&circuit, rounds)?;
            let text = read_input(&corpus)?;
            let shots = read_corpus_csv(text.as_bytes()).map_err(lib)?;
            if shots.first().is_some_and(|s| s.beta.len() != exp.map.num_events()) {
                return Err(config(format!(
                    "corpus has {} event columns, the circuit has {}",
                    shots[0].beta.len(),
                    exp.map.num_events()
                )));
            }
            let opts = OptimizeOptions {
                decoder,
                frozen: freeze.map_or_else(default_frozen, |k| k.into_iter().collect()),
                max_evaluations,
                ..OptimizeOptions::default()
            };
            let res = optimize_decoder_priors(&exp, &shots, &initial, &opts).map_err(lib)?;
            write_json(&out, &res)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(if e.is::<ConfigError>() { 2 } else { 1 })
        }
    }
}
