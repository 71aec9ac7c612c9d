use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use cgm_select::{run_trials, Coarseness, Distribution, KPolicy, TrialSpec};
use cgm_select_cli::output::{write_bound_report, write_records};
use cgm_select_cli::scaling::{scaling_table, write_table, Sweep};
use cgm_select_cli::{run, Algorithm, CliError, ExperimentSpec, Format};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "cgm-select",
    version,
    about = "Coarse grained parallel selection experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run seeded trials and emit one oracle-checked record per trial.
    Run(RunArgs),
    /// Sweep p or n and emit a scaling table.
    Scale(ScaleArgs),
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long)]
    algorithm: Algorithm,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    p: Option<usize>,
    /// `<int>`, `mid` or `rand`, optionally written `k=...`.
    #[arg(long, default_value = "mid")]
    k: KPolicy,
    /// uniform01 | permutation | support:<c> | adversarial-duplicates | sorted-blocks
    #[arg(long)]
    distribution: Option<Distribution>,
    #[arg(long, default_value_t = 0.75)]
    d: f64,
    #[arg(long, default_value_t = 3)]
    small_c: usize,
    #[arg(long, default_value_t = 1.0)]
    termination_factor: f64,
    #[arg(long, default_value_t = 1)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "csv")]
    format: Format,
    /// Per-value gathers and a second broadcast in finite-support.
    #[arg(long)]
    faithful_loop: bool,
    /// Move uniform data outside the interval estimate.
    #[arg(long)]
    force_fallback: bool,
    /// strict-p-squared | saukas-song | none (default depends on the algorithm)
    #[arg(long, value_parser = parse_coarseness)]
    coarseness: Option<Coarseness>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    experiment: ExperimentArgs,
    /// Append a Monte Carlo bound report (uniform only).
    #[arg(long)]
    stats: bool,
}

#[derive(Args)]
struct ScaleArgs {
    #[command(flatten)]
    experiment: ExperimentArgs,
    /// Comma-separated processor counts.
    #[arg(long, value_delimiter = ',', conflicts_with = "sweep_n")]
    sweep_p: Vec<usize>,
    /// Comma-separated problem sizes.
    #[arg(long, value_delimiter = ',')]
    sweep_n: Vec<usize>,
}

fn parse_coarseness(s: &str) -> Result<Coarseness, String> {
    match s {
        "strict-p-squared" => Ok(Coarseness::StrictPSquared),
        "saukas-song" => Ok(Coarseness::SaukasSongP2LogP),
        "none" => Ok(Coarseness::None),
        _ => Err(format!("unknown coarseness {s:?}")),
    }
}

impl ExperimentArgs {
    fn spec(&self, n: usize, p: usize) -> ExperimentSpec {
        let mut spec = ExperimentSpec::new(self.algorithm, n, p);
        spec.k = self.k;
        if let Some(dist) = self.distribution {
            spec.distribution = dist;
        }
        spec.d = self.d;
        spec.small_c = self.small_c;
        spec.termination_factor = self.termination_factor;
        spec.trials = self.trials;
        spec.seed = self.seed;
        spec.format = self.format;
        spec.faithful_loop = self.faithful_loop;
        spec.force_fallback = self.force_fallback;
        if let Some(c) = self.coarseness {
            spec.coarseness = c;
        }
        spec
    }

    fn output(&self) -> Result<Box<dyn Write>, CliError> {
        Ok(match &self.out {
            Some(path) => Box::new(BufWriter::new(File::create(path)?)),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        })
    }
}

fn cmd_run(args: &RunArgs) -> Result<(), CliError> {
    let ex = &args.experiment;
    let (Some(n), Some(p)) = (ex.n, ex.p) else {
        return Err(CliError::Usage("run needs --n and --p".into()));
    };
    let spec = ex.spec(n, p);
    spec.validate()?;
    if args.stats && spec.algorithm != Algorithm::Uniform {
        return Err(CliError::Usage("--stats only applies to uniform".into()));
    }
    let records = run(&spec)?;
    let report = if args.stats {
        let trial_spec = TrialSpec {
            n,
            p,
            k_policy: spec.k,
            params: spec.uniform_params(),
            trials: spec.trials,
            base_seed: spec.seed,
        };
        Some(run_trials(&trial_spec)?.1)
    } else {
        None
    };

    let mut out = ex.output()?;
    write_records(&mut out, &records, spec.format)?;
    if let Some(report) = &report {
        write_bound_report(&mut out, report, spec.format)?;
    }
    out.flush()?;

    let bad: Vec<_> = records.iter().filter(|r| !r.matched).collect();
    for r in &bad {
        eprintln!(
            "mismatch: trial {} k {} result {} oracle {}",
            r.trial, r.k, r.result, r.oracle
        );
    }
    if !bad.is_empty() {
        return Err(CliError::Mismatch { count: bad.len() });
    }
    Ok(())
}

fn cmd_scale(args: &ScaleArgs) -> Result<(), CliError> {
    let ex = &args.experiment;
    let (sweep, n, p) = match (args.sweep_p.is_empty(), args.sweep_n.is_empty()) {
        (false, true) => (
            Sweep::P {
                values: args.sweep_p.clone(),
                n: ex.n,
            },
            ex.n.unwrap_or(1),
            args.sweep_p[0],
        ),
        (true, false) => {
            let p =
                ex.p.ok_or_else(|| CliError::Usage("--sweep-n needs --p".into()))?;
            (Sweep::N(args.sweep_n.clone()), args.sweep_n[0], p)
        }
        _ => {
            return Err(CliError::Usage(
                "give exactly one of --sweep-p, --sweep-n".into(),
            ))
        }
    };
    let base = ex.spec(n, p);
    let rows = scaling_table(&base, &sweep)?;
    let mut out = ex.output()?;
    write_table(&mut out, &rows)?;
    out.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Scale(args) => cmd_scale(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("cgm-select: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
