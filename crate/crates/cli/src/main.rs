use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use dro_cli::experiment::{run_experiment, write_tables, ExperimentSpec};
use dro_cli::{load_observation, Problem};
use dro_core::ambiguity::{corner_distances, SampleSet};
use dro_core::dcopf::{generate_samples, load_system};
use dro_core::forward::{assemble, solve_forward_with};
use dro_core::inverse::recover;
use dro_core::{Engine, Error, RecoveryConfig, Tolerances};

/// Forward and inverse Wasserstein DRO for chance-constrained LPs.
///
/// Every global flag can also be set through an environment variable with the
/// DRO_ prefix (DRO_TOL, DRO_EPS_BAR, DRO_ENGINE, DRO_JOBS, DRO_SEED).
#[derive(Parser, Debug)]
#[command(name = "dro", version)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Primal feasibility tolerance.
    #[arg(long, global = true, env = "DRO_TOL", default_value_t = 1e-8, value_parser = positive)]
    tol: f64,
    /// Upper end of the radius search.
    #[arg(long, global = true, env = "DRO_EPS_BAR", default_value_t = 100.0, value_parser = positive)]
    eps_bar: f64,
    #[arg(long, global = true, env = "DRO_ENGINE", value_enum, default_value_t = EngineArg::Bisection)]
    engine: EngineArg,
    /// Worker threads for grid points (default: logical cores).
    #[arg(long, global = true, env = "DRO_JOBS")]
    jobs: Option<usize>,
    #[arg(long, global = true, env = "DRO_SEED", default_value_t = 42)]
    seed: u64,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum EngineArg {
    Bisection,
    Milp,
    Both,
}

impl From<EngineArg> for Engine {
    fn from(e: EngineArg) -> Self {
        match e {
            EngineArg::Bisection => Engine::Bisection,
            EngineArg::Milp => Engine::KktMilp,
            EngineArg::Both => Engine::Both,
        }
    }
}

#[derive(Args, Debug)]
struct ProblemArgs {
    /// Power system JSON.
    #[arg(long)]
    system: Option<PathBuf>,
    /// Chance-constrained LP JSON.
    #[arg(long, conflicts_with = "system")]
    model: Option<PathBuf>,
    /// Sample CSV; generated from the system with --seed when omitted.
    #[arg(long)]
    samples: Option<PathBuf>,
    #[arg(long, default_value_t = 100)]
    n_samples: usize,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve the robust program at one radius.
    Forward {
        #[command(flatten)]
        problem: ProblemArgs,
        #[arg(long, value_parser = nonnegative, allow_hyphen_values = true)]
        eps: f64,
        #[arg(long, default_value = "forward.json")]
        out: PathBuf,
    },
    /// Recover the radius behind an observed decision.
    Inverse {
        #[command(flatten)]
        problem: ProblemArgs,
        /// JSON with `x0`, or a forward solution.
        #[arg(long)]
        observation: PathBuf,
        #[arg(long, default_value = "report.json")]
        out: PathBuf,
    },
    /// Run the radius, line-limit and sample-size tables.
    Experiment {
        /// Spec JSON; defaults apply to missing keys.
        #[arg(long)]
        spec: Option<PathBuf>,
        /// Overrides the spec's system.
        #[arg(long)]
        system: Option<PathBuf>,
        #[arg(long, default_value = "tables")]
        out_dir: PathBuf,
    },
    /// Print ε^max and both corner distances of a sample file.
    Epsmax {
        #[arg(long)]
        samples: PathBuf,
    },
    /// Draw line-limit perturbations for a power system.
    GenSamples {
        #[arg(long)]
        system: PathBuf,
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

fn positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        _ => Err(format!("expected a positive number, got `{s}`")),
    }
}

fn nonnegative(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v >= 0.0 && v.is_finite() => Ok(v),
        _ => Err(format!("expected a nonnegative number, got `{s}`")),
    }
}

impl Global {
    fn recovery(&self) -> RecoveryConfig {
        RecoveryConfig {
            epsilon_bar: self.eps_bar,
            engine: self.engine.into(),
            tolerances: Tolerances { feasibility: self.tol, ..Tolerances::default() },
            ..RecoveryConfig::default()
        }
    }
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(value)? + "\n")
        .with_context(|| format!("writing {}", path.display()))
}

fn run(cli: Cli) -> Result<u8> {
    if let Some(jobs) = cli.global.jobs {
        rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build_global()?;
    }
    let g = &cli.global;
    match cli.cmd {
        Command::Forward { problem, eps, out } => {
            let p = Problem::resolve(problem.system.as_deref(), problem.model.as_deref())?;
            let samples = p.samples(problem.samples.as_deref(), problem.n_samples, g.seed)?;
            let t = Instant::now();
            let tol = Tolerances { feasibility: g.tol, ..Tolerances::default() };
            let sol = solve_forward_with(&assemble(&p.model, &samples, eps)?, &tol)?;
            write_json(&out, &sol)?;
            println!("objective {}", sol.objective);
            println!("cvar_binding {}", sol.cvar_binding);
            println!("time {:.3}s", t.elapsed().as_secs_f64());
            Ok(0)
        }
        Command::Inverse { problem, observation, out } => {
            let p = Problem::resolve(problem.system.as_deref(), problem.model.as_deref())?;
            let samples = p.samples(problem.samples.as_deref(), problem.n_samples, g.seed)?;
            let x0 = load_observation(&observation)?;
            match recover(&p.model, &samples, &x0, &g.recovery()) {
                Ok(report) => {
                    write_json(&out, &report)?;
                    println!("epsilon_star {}", report.epsilon_star);
                    println!("failed {}", report.failed);
                    Ok(if report.failed { 2 } else { 0 })
                }
                Err(Error::NotRationalizable { epsilon_bar }) => {
                    let body = serde_json::json!({ "status": "not_rationalizable", "epsilon_bar": epsilon_bar });
                    write_json(&out, &body)?;
                    eprintln!("observation is not optimal for any radius in [0, {epsilon_bar}]");
                    Ok(3)
                }
                Err(e) => Err(e.into()),
            }
        }
        Command::Experiment { spec, system, out_dir } => {
            let mut s: ExperimentSpec = match &spec {
                Some(p) => serde_json::from_str(&std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?)
                    .with_context(|| format!("parsing {}", p.display()))?,
                None => ExperimentSpec { seed: g.seed, recovery: g.recovery(), ..ExperimentSpec::default() },
            };
            if let Some(sys) = system {
                s.system = sys;
            }
            let tables = run_experiment(&s)?;
            write_tables(&out_dir, &tables)?;
            println!("epsilon_max {}", tables.epsilon_max);
            match tables.scarce_breakpoint {
                Some(n) => println!("scarce-sample failure from n_samples = {n}"),
                None => println!("no scarce-sample failure found"),
            }
            Ok(0)
        }
        Command::Epsmax { samples } => {
            let s = SampleSet::load(&samples).with_context(|| format!("loading {}", samples.display()))?;
            let c = corner_distances(&s);
            println!("epsilon_max {}", c.max());
            println!("to_upper {}", c.to_upper);
            println!("to_lower {}", c.to_lower);
            Ok(0)
        }
        Command::GenSamples { system, n, out } => {
            if n == 0 {
                bail!("--n must be at least 1");
            }
            let sys = load_system(&system).with_context(|| format!("loading {}", system.display()))?;
            generate_samples(&sys, n, g.seed)?.save(&out)?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
