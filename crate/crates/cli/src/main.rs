mod report;
mod verify;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use mmot::search::{
    export_histogram, run_search, write_failure_log, Distribution, ExportOutcome, GeneratorConfig, HistogramFormat,
    SearchOptions, Tolerances, DEFAULT_BINS,
};
use mmot::measures::load_instance;
use mmot::{Convention, Instance, MmotError, Rational, SimplexConfig};
use serde::Serialize;
use serde_json::Value;

use report::{barycenter_report, monge_report, solve_report, two_point_report};

#[derive(Debug, Parser)]
#[command(name = "mmot", version, about = "Discrete multi-marginal optimal transport and Monge-gap search")]
struct Cli {
    /// Print every float at full precision instead of 6 significant digits.
    #[arg(long, global = true)]
    full_precision: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ConventionArg {
    /// Sum over unordered pairs.
    Pairwise,
    /// Sum over ordered pairs (twice `pairwise`).
    Ordered,
    /// Negative squared norm of the sum.
    Negsum,
}

impl From<ConventionArg> for Convention {
    fn from(c: ConventionArg) -> Self {
        match c {
            ConventionArg::Pairwise => Convention::PairwiseUnordered,
            ConventionArg::Ordered => Convention::PairwiseOrdered,
            ConventionArg::Negsum => Convention::NegSquaredSum,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum DistArg {
    Gaussian,
    Uniform,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve the LP, enumerate Monge maps and classify the instance.
    Solve {
        instance: PathBuf,
        /// Solve in exact rational arithmetic.
        #[arg(long)]
        exact: bool,
        #[arg(long, value_enum, default_value = "pairwise")]
        convention: ConventionArg,
        /// Also extract the barycenter from the optimal plan.
        #[arg(long)]
        with_barycenter: bool,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Enumerate all Monge assignments and report the cheapest.
    Monge {
        instance: PathBuf,
        #[arg(long)]
        exact: bool,
        #[arg(long, value_enum, default_value = "pairwise")]
        convention: ConventionArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Extract the barycenter and cross-check it against the LP value.
    Barycenter {
        instance: PathBuf,
        #[arg(long)]
        exact: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Closed-form Monge solution for two-atom marginals.
    TwoPoint {
        instance: PathBuf,
        #[arg(long)]
        exact: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Random search for instances whose LP optimum is not a Monge map.
    Search {
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long = "N", default_value_t = 3)]
        n_marginals: usize,
        #[arg(long, default_value_t = 3)]
        m: usize,
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long, value_enum, default_value = "gaussian")]
        dist: DistArg,
        /// Gaussian standard deviation or uniform half-width.
        #[arg(long, default_value_t = 3.0)]
        sigma: f64,
        /// Absolute classification tolerance.
        #[arg(long, default_value_t = 1e-7)]
        tol: f64,
        /// Relative classification tolerance.
        #[arg(long, default_value_t = 1e-9)]
        rel_tol: f64,
        /// Confirm every failure in exact arithmetic.
        #[arg(long)]
        exact_audit: bool,
        /// Histogram output; `.svg` gives a chart, anything else CSV.
        #[arg(long)]
        hist_out: Vec<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_BINS)]
        bins: usize,
        /// JSON-lines log of every failure.
        #[arg(long)]
        failures_out: Option<PathBuf>,
        /// Worker threads; defaults to MMOT_THREADS, then all cores.
        #[arg(long, env = "MMOT_THREADS")]
        threads: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-derive the published three-marginal counterexample.
    VerifyPaperExample {
        /// Check this instance instead of the embedded fixture.
        #[arg(long, hide = true)]
        instance: Option<PathBuf>,
    },
}

/// Exit status for a failed command.
enum Failure {
    Input(String),
    Solver(String),
    Checks,
}

impl From<MmotError> for Failure {
    fn from(e: MmotError) -> Self {
        if e.is_input_error() {
            Failure::Input(e.to_string())
        } else {
            Failure::Solver(e.to_string())
        }
    }
}

fn round_sig(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.5e}").parse().unwrap_or(x)
}

/// Rounds every float to 6 significant digits, except plan weights.
fn round_floats(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(r) = n.as_f64().map(round_sig).and_then(serde_json::Number::from_f64) {
                *n = r;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_floats),
        Value::Object(map) => {
            for (key, item) in map.iter_mut() {
                if key != "weight" {
                    round_floats(item);
                }
            }
        }
        _ => {}
    }
}

fn emit<S: Serialize>(report: &S, full_precision: bool, out: Option<&Path>) -> Result<(), Failure> {
    let mut value = serde_json::to_value(report).map_err(MmotError::from)?;
    if !full_precision {
        round_floats(&mut value);
    }
    let mut text = serde_json::to_string_pretty(&value).map_err(MmotError::from)?;
    text.push('\n');
    match out {
        Some(path) => std::fs::write(path, text).map_err(MmotError::from)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn load(path: &Path) -> Result<Instance, Failure> {
    load_instance(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn run(cli: Cli) -> Result<(), Failure> {
    let fp = cli.full_precision;
    let config = SimplexConfig::default();
    match cli.command {
        Command::Solve {
            instance,
            exact,
            convention,
            with_barycenter,
            out,
        } => {
            let inst = load(&instance)?;
            let report = if exact {
                solve_report::<Rational>(&inst, convention.into(), with_barycenter, &config)?
            } else {
                solve_report::<f64>(&inst, convention.into(), with_barycenter, &config)?
            };
            emit(&report, fp, out.as_deref())
        }
        Command::Monge {
            instance,
            exact,
            convention,
            out,
        } => {
            let inst = load(&instance)?;
            if exact {
                emit(&monge_report::<Rational>(&inst, convention.into())?, fp, out.as_deref())
            } else {
                emit(&monge_report::<f64>(&inst, convention.into())?, fp, out.as_deref())
            }
        }
        Command::Barycenter { instance, exact, out } => {
            let inst = load(&instance)?;
            if exact {
                emit(&barycenter_report::<Rational>(&inst, &config)?, fp, out.as_deref())
            } else {
                emit(&barycenter_report::<f64>(&inst, &config)?, fp, out.as_deref())
            }
        }
        Command::TwoPoint { instance, exact, out } => {
            let inst = load(&instance)?;
            if exact {
                emit(&two_point_report::<Rational>(&inst, &config)?, fp, out.as_deref())
            } else {
                emit(&two_point_report::<f64>(&inst, &config)?, fp, out.as_deref())
            }
        }
        Command::Search {
            trials,
            seed,
            n_marginals,
            m,
            d,
            dist,
            sigma,
            tol,
            rel_tol,
            exact_audit,
            hist_out,
            bins,
            failures_out,
            threads,
            out,
        } => {
            let distribution = match dist {
                DistArg::Gaussian => Distribution::IsotropicGaussian { sigma },
                DistArg::Uniform => Distribution::UniformCube { halfwidth: sigma },
            };
            let generator = GeneratorConfig {
                n_marginals,
                m,
                d,
                distribution,
                master_seed: seed,
            };
            let tolerances = Tolerances {
                abs_tol: tol,
                rel_tol,
                exact_audit,
            };
            if !(tol >= 0.0 && rel_tol >= 0.0) {
                return Err(Failure::Input("tolerances must be non-negative".into()));
            }
            let options = SearchOptions {
                threads,
                bins,
                simplex: config,
            };
            let outcome = run_search(&generator, trials, &tolerances, &options)?;
            for path in &hist_out {
                let format = HistogramFormat::from_path(path);
                if export_histogram(&outcome.summary.histogram, format, path)? == ExportOutcome::WrittenEmpty {
                    eprintln!("no failures found; {} holds an empty histogram", path.display());
                }
            }
            if let Some(path) = &failures_out {
                write_failure_log(path, &outcome.failures)?;
            }
            for e in &outcome.errors {
                eprintln!("trial {} ({}): {}", e.trial_index, e.instance_digest, e.message);
            }
            emit(&outcome.summary, fp, out.as_deref())?;
            if outcome.errors.is_empty() {
                Ok(())
            } else {
                Err(Failure::Solver(format!("{} trials failed to solve", outcome.errors.len())))
            }
        }
        Command::VerifyPaperExample { instance } => {
            let inst = match instance {
                Some(path) => load(&path)?,
                None => mmot::fixtures::example_one(),
            };
            let checks = verify::run_checks(&inst)?;
            for c in &checks {
                println!("[{}] {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            if checks.iter().all(|c| c.passed) {
                Ok(())
            } else {
                Err(Failure::Checks)
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Solver(msg)) => {
            eprintln!("solver error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Checks) => {
            eprintln!("verification failed");
            ExitCode::from(1)
        }
    }
}
