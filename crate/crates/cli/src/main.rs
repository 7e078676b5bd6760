//! Command-line front end: seeded model generation, sampling, parameter and
//! structure learning, oracle evaluation, sample-size calculators, and
//! config-driven experiment runs.
//!
//! Exit codes: 0 on success, 2 for validation and usage errors, 3 when a
//! strict-mode estimate hits an unobserved event, 4 when a query would need
//! to enumerate a joint larger than the oracle cap.

mod experiment;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use fglearn_core::error::FgError;
use fglearn_core::generate::{generate_model, GraphFamily};
use fglearn_core::io::{
    fmt_f64, parse_model_file, parse_samples, write_blanket_report, write_factor_graph,
    write_learned_model, write_samples, ModelFile,
};
use fglearn_core::model::{markov_blanket_of, scope_closure, Assignment, FactorGraph};
use fglearn_core::oracle::{normalized_symmetric_kl, symmetric_kl, JointTable};
use fglearn_core::params::{learn_parameters, parameter_sample_bound, ClipConfig};
use fglearn_core::sampling::{exact_sample, gibbs_sample, Dataset};
use fglearn_core::structure::{learn_structure, structure_sample_bound};
use fglearn_core::Result;

#[derive(Parser)]
#[command(name = "fglearn", version, about = "Factor-graph learning toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Family {
    Chain,
    Grid,
    Star,
    Random,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Sampler {
    Exact,
    Gibbs,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Mode {
    Strict,
    Clipped,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Metric {
    SymKl,
    NormalizedSymKl,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a seeded model and write it in the factor-graph format.
    GenModel {
        #[arg(long, value_enum)]
        family: Family,
        #[arg(long)]
        n: usize,
        /// Cardinalities are drawn uniformly from 2..=this value.
        #[arg(long, default_value_t = 2)]
        max_cardinality: u32,
        /// Factor entries are log-uniform in [1, strength].
        #[arg(long)]
        strength: f64,
        #[arg(long)]
        seed: u64,
        /// Largest scope size (random family only).
        #[arg(long)]
        max_scope: Option<usize>,
        /// Largest number of factors a variable may join (random family only).
        #[arg(long)]
        max_degree: Option<usize>,
        /// Number of factors to place (random family only).
        #[arg(long)]
        factor_count: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Draw samples from a model file and write them as CSV.
    Sample {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Sampler::Exact)]
        sampler: Sampler,
        /// Sweeps discarded before the first kept sample (gibbs only).
        #[arg(long, default_value_t = 100)]
        burn_in: usize,
        /// Sweeps between kept samples (gibbs only).
        #[arg(long, default_value_t = 1)]
        thinning: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Estimate canonical factors for a known structure from samples.
    LearnParams {
        /// Model file whose factor scopes define the structure.
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        /// Comma-separated baseline values, one per variable (default all 0).
        #[arg(long)]
        baseline: Option<String>,
        #[arg(long, value_enum, default_value_t = Mode::Clipped)]
        mode: Mode,
        /// Positivity floor parameter for clipped mode.
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Learn scopes and factors from samples alone.
    LearnStruct {
        #[arg(long)]
        data: PathBuf,
        /// Largest candidate scope size.
        #[arg(long)]
        k: u32,
        /// Largest candidate blanket size.
        #[arg(long)]
        b: u32,
        /// Accuracy target; entries within epsilon/2^(k+2) of zero are dropped.
        #[arg(long)]
        epsilon: f64,
        #[arg(long)]
        baseline: Option<String>,
        #[arg(long, value_enum, default_value_t = Mode::Clipped)]
        mode: Mode,
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long)]
        out: PathBuf,
        /// Also write every scope's chosen blanket and achieved entropy.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Divergence between two model files, via exact enumeration.
    Eval {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, value_enum, default_value_t = Metric::SymKl)]
        metric: Metric,
    },
    /// Sample sizes sufficient for the stated learning guarantees.
    Bound {
        #[command(subcommand)]
        which: BoundCommand,
    },
    /// Run a config-driven experiment and write a result table.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum BoundCommand {
    /// Parameter learning: reach total KL J*epsilon with probability 1-delta.
    Params {
        #[arg(long)]
        epsilon: f64,
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        k: u32,
        #[arg(long)]
        b: u32,
        #[arg(long)]
        gamma: f64,
        /// Factor count of the structure.
        #[arg(long)]
        j: u64,
        /// Largest variable cardinality.
        #[arg(long)]
        v: u32,
    },
    /// Structure learning: recover scopes and reach the same KL target.
    Struct {
        #[arg(long)]
        epsilon: f64,
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        k: u32,
        #[arg(long)]
        b: u32,
        #[arg(long)]
        gamma: f64,
        #[arg(long)]
        v: u32,
        /// Number of variables.
        #[arg(long)]
        n: u32,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                FgError::ZeroCount { .. } => 3,
                FgError::CapExceeded { .. } => 4,
                _ => 2,
            })
        }
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::GenModel {
            family,
            n,
            max_cardinality,
            strength,
            seed,
            max_scope,
            max_degree,
            factor_count,
            out,
        } => {
            let family = build_family(family, max_scope, max_degree, factor_count)?;
            let graph = generate_model(&family, n, max_cardinality, strength, seed)?;
            write_file(&out, &write_factor_graph(&graph))
        }
        Command::Sample { model, m, seed, sampler, burn_in, thinning, out } => {
            let graph = read_graph(&model)?;
            let data = match sampler {
                Sampler::Exact => {
                    let joint = JointTable::from_graph(&graph)?;
                    exact_sample(&joint, m, seed)?
                }
                Sampler::Gibbs => gibbs_sample(&graph, m, burn_in, thinning, seed)?,
            };
            write_file(&out, &write_samples(&data))
        }
        Command::LearnParams { model, data, baseline, mode, gamma, out } => {
            let scopes = match parse_model_file(&read_file(&model)?)? {
                ModelFile::Graph(g) => g.scopes(),
                ModelFile::Learned(m) => m.scopes(),
            };
            let data = read_data(&data)?;
            let baseline = parse_baseline(baseline.as_deref(), data.variables().len())?;
            let clip = clip_for_structure(mode, gamma, &scopes)?;
            let model = learn_parameters(&scopes, &data, &baseline, &clip)?;
            write_file(&out, &write_learned_model(&model))
        }
        Command::LearnStruct { data, k, b, epsilon, baseline, mode, gamma, out, report } => {
            let data = read_data(&data)?;
            let baseline = parse_baseline(baseline.as_deref(), data.variables().len())?;
            let clip = build_clip(mode, gamma, k, b)?;
            let result = learn_structure(&data, k, b, &baseline, epsilon, &clip)?;
            if let Some(report_path) = report {
                write_file(&report_path, &write_blanket_report(&result.choices))?;
            }
            write_file(&out, &write_learned_model(&result.model))
        }
        Command::Eval { a, b, metric } => {
            let ja = JointTable::from_graph(&read_graph(&a)?)?;
            let jb = JointTable::from_graph(&read_graph(&b)?)?;
            let value = match metric {
                Metric::SymKl => symmetric_kl(&ja, &jb)?,
                Metric::NormalizedSymKl => normalized_symmetric_kl(&ja, &jb)?,
            };
            println!("{}", fmt_f64(value));
            Ok(())
        }
        Command::Bound { which } => {
            let value = match which {
                BoundCommand::Params { epsilon, delta, k, b, gamma, j, v } => {
                    parameter_sample_bound(epsilon, delta, k, b, gamma, j, v)?
                }
                BoundCommand::Struct { epsilon, delta, k, b, gamma, v, n } => {
                    structure_sample_bound(epsilon, delta, k, b, gamma, v, n)?
                }
            };
            println!("{value}");
            Ok(())
        }
        Command::Run { config, out } => {
            let config = experiment::ExperimentConfig::parse(&read_file(&config)?)?;
            let rows = experiment::run_experiment(&config)?;
            write_file(&out, &experiment::write_rows(&rows))
        }
    }
}

fn build_family(
    family: Family,
    max_scope: Option<usize>,
    max_degree: Option<usize>,
    factor_count: Option<usize>,
) -> Result<GraphFamily> {
    let random_args = [max_scope, max_degree, factor_count];
    if family != Family::Random && random_args.iter().any(Option::is_some) {
        return Err(FgError::InvalidParameter(
            "--max-scope, --max-degree and --factor-count apply to the random family only".into(),
        ));
    }
    Ok(match family {
        Family::Chain => GraphFamily::Chain,
        Family::Grid => GraphFamily::Grid,
        Family::Star => GraphFamily::Star,
        Family::Random => {
            let [max_scope, max_degree, factor_count] = random_args.map(|arg| {
                arg.ok_or_else(|| {
                    FgError::InvalidParameter(
                        "the random family needs --max-scope, --max-degree and --factor-count"
                            .into(),
                    )
                })
            });
            GraphFamily::Random {
                max_scope: max_scope?,
                max_degree: max_degree?,
                factor_count: factor_count?,
            }
        }
    })
}

/// Clip setup for a given structure: the floor exponent comes from the
/// largest scope and the largest Markov blanket the learner will condition
/// on, which are properties of the structure rather than user knobs.
fn clip_for_structure(mode: Mode, gamma: Option<f64>, scopes: &[Vec<u32>]) -> Result<ClipConfig> {
    let k = scopes.iter().map(Vec::len).max().unwrap_or(1).max(1) as u32;
    let b = scope_closure(scopes)?
        .iter()
        .map(|d| markov_blanket_of(scopes, d).len())
        .max()
        .unwrap_or(0) as u32;
    build_clip(mode, gamma, k, b)
}

fn build_clip(mode: Mode, gamma: Option<f64>, k: u32, b: u32) -> Result<ClipConfig> {
    match (mode, gamma) {
        (Mode::Strict, None) => Ok(ClipConfig::strict()),
        (Mode::Strict, Some(_)) => Err(FgError::InvalidParameter(
            "--gamma only applies to clipped mode".into(),
        )),
        (Mode::Clipped, Some(gamma)) => ClipConfig::clipped(gamma, k, b),
        (Mode::Clipped, None) => Err(FgError::InvalidParameter(
            "clipped mode needs --gamma".into(),
        )),
    }
}

fn parse_baseline(arg: Option<&str>, n: usize) -> Result<Assignment> {
    let values = match arg {
        None => vec![0; n],
        Some(text) => text
            .split(',')
            .map(|tok| {
                tok.trim().parse::<u32>().map_err(|_| {
                    FgError::InvalidParameter(format!("bad baseline value {tok:?}"))
                })
            })
            .collect::<Result<Vec<u32>>>()?,
    };
    if values.len() != n {
        return Err(FgError::InvalidParameter(format!(
            "baseline has {} values for {n} variables",
            values.len()
        )));
    }
    Ok(Assignment::full(values))
}

fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path)
        .map_err(|e| FgError::InvalidParameter(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, content: &str) -> Result<()> {
    fs::write(path, content)
        .map_err(|e| FgError::InvalidParameter(format!("{}: {e}", path.display())))
}

fn read_graph(path: &Path) -> Result<FactorGraph> {
    match parse_model_file(&read_file(path)?)? {
        ModelFile::Graph(g) => Ok(g),
        ModelFile::Learned(m) => m.to_factor_graph(),
    }
}

fn read_data(path: &Path) -> Result<Dataset> {
    parse_samples(&read_file(path)?)
}
