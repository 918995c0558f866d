use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use clipshift::harness::experiment::{
    figure1_preset, run_experiment, sweep_configs, RunConfig, SweepAxis, FIGURE1_LAMBDAS,
};
use clipshift::harness::output::write_experiment;
use clipshift::harness::verify::{clip_bound_matrix, distributed_variance_ratio, prox_checks};
use clipshift::params::{schedule_for, ConstantSet, Theorem, TheoryInputs};
use clipshift::trace::Metric;

#[derive(Parser)]
#[command(name = "clipshift", version, about = "Clipped proximal stochastic methods with learned shifts")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment from a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Run the built-in ball-quadratic comparison for one or all clipping levels.
    Figure1 {
        /// One of 0.1, 0.01, 0.001; all three when omitted.
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        steps: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Run a grid over one axis, sharing seeds across cells.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum)]
        axis: Axis,
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Monte-Carlo check of the clipping bounds and the prox properties.
    Verify {
        #[arg(long, default_value_t = 100_000)]
        n_samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Print a theory schedule as JSON.
    Params(ParamsArgs),
}

#[derive(Args)]
struct Common {
    /// Output root; files go to <out>/<run-name>/.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    svg: bool,
    /// Dotted-key override, e.g. `plan.trials=5`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Axis {
    Lambda,
    N,
    Alpha,
}

#[derive(Clone, Copy, ValueEnum)]
enum TheoremArg {
    Star,
    SgdShiftQsc,
    SgdShiftConvex,
    Sstm,
    RestartedSstm,
    SgdaMonotone,
    SgdaQsm,
    SegMonotone,
    SegQsm,
}

#[derive(Clone, Copy, ValueEnum)]
enum ConstantsArg {
    Explicit,
    Unit,
}

#[derive(Args)]
struct ParamsArgs {
    #[arg(long, value_enum)]
    theorem: TheoremArg,
    #[arg(long = "L", alias = "l")]
    l: f64,
    #[arg(long, default_value_t = 0.0)]
    mu: f64,
    #[arg(long)]
    ell: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    sigma: f64,
    #[arg(long, default_value_t = 2.0)]
    alpha: f64,
    #[arg(long, default_value_t = 1)]
    n: usize,
    #[arg(long = "K", alias = "k")]
    k: usize,
    #[arg(long, default_value_t = 0.1)]
    beta: f64,
    #[arg(long = "R", alias = "r", default_value_t = 0.0)]
    r: f64,
    /// Explicit V (or M for SSTM).
    #[arg(long = "V", alias = "v")]
    v: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    zeta_star: f64,
    #[arg(long)]
    shift_err: Option<f64>,
    #[arg(long, value_enum, default_value = "explicit")]
    constants: ConstantsArg,
    #[arg(long)]
    epsilon_target: Option<f64>,
}

fn common_sets(common: &Common) -> Vec<String> {
    let mut sets = common.sets.clone();
    if let Some(seed) = common.seed {
        sets.push(format!("plan.root_seed={seed}"));
    }
    if let Some(t) = common.threads {
        sets.push(format!("plan.threads={t}"));
    }
    sets
}

fn load(path: &Path, common: &Common) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(RunConfig::from_json(&text, &common_sets(common))?)
}

fn execute(cfg: &RunConfig, common: &Common) -> Result<clipshift::harness::ExperimentResult> {
    let result = run_experiment(cfg)?;
    let dir = common.out.join(&cfg.name);
    let files = write_experiment(&result, cfg, &dir, common.svg)?;
    for f in files {
        println!("wrote {}", f.display());
    }
    Ok(result)
}

fn summarize(result: &clipshift::harness::ExperimentResult, metric: Metric) {
    for s in &result.solvers {
        if let Some(c) = result.curve(&s.label, metric, 0.5) {
            println!("  {:<16} final median {} = {:.6e}", s.label, metric.name(), c.last());
        }
    }
}

fn cmd_figure1(lambda: Option<f64>, trials: Option<usize>, steps: Option<usize>, common: &Common) -> Result<()> {
    let lambdas: Vec<f64> = match lambda {
        Some(l) => vec![l],
        None => FIGURE1_LAMBDAS.to_vec(),
    };
    for l in lambdas {
        let mut cfg = figure1_preset(l)?;
        if let Some(t) = trials {
            cfg.plan.trials = t;
        }
        if let Some(k) = steps {
            cfg.plan.steps = k;
        }
        let cfg = cfg.with_overrides(&common_sets(common))?;
        println!("figure1 lambda={l}");
        let result = execute(&cfg, common)?;
        summarize(&result, Metric::SqDist);
    }
    Ok(())
}

fn cmd_verify(n_samples: usize, seed: u64) -> Result<bool> {
    let mut ok = true;
    for cell in clip_bound_matrix(n_samples, seed)? {
        let r = &cell.report;
        let worst_bias = r.repetitions.iter().map(|x| x.bias).fold(0.0, f64::max);
        let worst_var = r.repetitions.iter().map(|x| x.variance).fold(0.0, f64::max);
        println!(
            "{} {:<32} sigma={:.4} bias={:.3e}<={:.3e} var={:.3e}<={:.3e}",
            if r.pass { "PASS" } else { "FAIL" },
            cell.name,
            r.sigma,
            worst_bias,
            r.bias_bound,
            worst_var,
            r.variance_bound
        );
        ok &= r.pass;
    }
    let ratio = distributed_variance_ratio(n_samples, 4, seed)?;
    let in_band = (0.15..=0.35).contains(&ratio.ratio);
    println!(
        "{} distributed variance ratio n=4: {:.4} (band [0.15, 0.35])",
        if in_band { "PASS" } else { "FAIL" },
        ratio.ratio
    );
    ok &= in_band;
    for c in prox_checks(seed) {
        println!(
            "{} prox {:<15} {:<18} worst={:.3e}",
            if c.pass { "PASS" } else { "FAIL" },
            c.variant,
            c.property,
            c.worst
        );
        ok &= c.pass;
    }
    Ok(ok)
}

fn cmd_params(a: &ParamsArgs) -> Result<()> {
    let theorem = match a.theorem {
        TheoremArg::Star => Theorem::Star,
        TheoremArg::SgdShiftQsc => Theorem::SgdShiftQsc,
        TheoremArg::SgdShiftConvex => Theorem::SgdShiftConvex,
        TheoremArg::Sstm => Theorem::Sstm,
        TheoremArg::RestartedSstm => Theorem::RestartedSstm,
        TheoremArg::SgdaMonotone => Theorem::SgdaMonotone,
        TheoremArg::SgdaQsm => Theorem::SgdaQsm,
        TheoremArg::SegMonotone => Theorem::SegMonotone,
        TheoremArg::SegQsm => Theorem::SegQsm,
    };
    let inputs = TheoryInputs {
        l: a.l,
        mu: a.mu,
        ell: a.ell,
        sigma: a.sigma,
        alpha: a.alpha,
        n: a.n,
        k: a.k,
        beta: a.beta,
        r: a.r,
        v: a.v,
        zeta_star: a.zeta_star,
        shift_err: a.shift_err,
        constants: match a.constants {
            ConstantsArg::Explicit => ConstantSet::Explicit,
            ConstantsArg::Unit => ConstantSet::Unit,
        },
    };
    let schedule = schedule_for(theorem, &inputs, a.epsilon_target)?;
    println!("{}", serde_json::to_string_pretty(&schedule)?);
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Run { config, common } => load(config, common).and_then(|cfg| {
            let result = execute(&cfg, common)?;
            summarize(&result, cfg.plan.metrics[0]);
            Ok(true)
        }),
        Command::Figure1 { lambda, trials, steps, common } => cmd_figure1(*lambda, *trials, *steps, common).map(|_| true),
        Command::Sweep { config, axis, values, common } => load(config, common).and_then(|base| {
            let axis = match axis {
                Axis::Lambda => SweepAxis::Lambda,
                Axis::N => SweepAxis::N,
                Axis::Alpha => SweepAxis::Alpha,
            };
            if values.is_empty() {
                bail!("no sweep values given");
            }
            for cfg in sweep_configs(&base, axis, values)? {
                println!("{}", cfg.name);
                let result = execute(&cfg, common)?;
                summarize(&result, cfg.plan.metrics[0]);
            }
            Ok(true)
        }),
        Command::Verify { n_samples, seed } => cmd_verify(*n_samples, *seed),
        Command::Params(a) => cmd_params(a).map(|_| true),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("verification failed");
            ExitCode::FAILURE
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
