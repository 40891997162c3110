use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ringsense_cli::{load_config, run, validate, CliError, Command, Status};

#[derive(Parser)]
#[command(
    name = "ringsense",
    version,
    about = "Noise spectra and sensitivity of a ring-condensate cavity sensor"
)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Single-tone output spectrum with channel split.
    Spectrum(RunArgs),
    /// Two-tone backaction-evading spectrum.
    BaeSpectrum(RunArgs),
    /// Sensitivity zeta(omega), its optimum and the squeezing enhancement.
    Sensitivity(RunArgs),
    /// Noise budget against drive power with SQL references.
    Budget(RunArgs),
    /// Steady-state branch counts along a power or linewidth axis.
    Bistability(RunArgs),
    /// Working point(s) of the configured scheme.
    SteadyState(RunArgs),
    /// Spectrum over homodyne angle and frequency.
    AngleScan(RunArgs),
    /// Run the invariant suite; optionally parse previously written CSVs.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct Common {
    /// TOML file applied on top of the preset.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = "paper-defaults", value_parser = ["paper-defaults"])]
    preset: String,
    /// Worker threads (default: config value, else all cores).
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: Common,
    /// Output root; each run goes to `<out>/<command>-<hash>/`.
    #[arg(long, default_value = "runs")]
    out: PathBuf,
    /// Recompute points that already exist on disk.
    #[arg(long)]
    force: bool,
}

#[derive(Args)]
struct ValidateArgs {
    #[command(flatten)]
    common: Common,
    /// Directory whose CSV files are parsed and checked.
    #[arg(long)]
    check: Option<PathBuf>,
}

fn init_pool(jobs: Option<usize>) {
    if let Some(n) = jobs {
        // fails only if a pool already exists, which is harmless here
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
}

fn execute(cli: Cli) -> Result<bool, CliError> {
    let (cmd, args) = match cli.command {
        Sub::Spectrum(a) => (Command::Spectrum, a),
        Sub::BaeSpectrum(a) => (Command::BaeSpectrum, a),
        Sub::Sensitivity(a) => (Command::Sensitivity, a),
        Sub::Budget(a) => (Command::Budget, a),
        Sub::Bistability(a) => (Command::Bistability, a),
        Sub::SteadyState(a) => (Command::SteadyState, a),
        Sub::AngleScan(a) => (Command::AngleScan, a),
        Sub::Validate(v) => {
            let cfg = load_config(v.common.config.as_deref(), &v.common.preset)?;
            init_pool(v.common.jobs.or(cfg.jobs));
            let mut checks = validate::run_checks(&cfg);
            if let Some(dir) = &v.check {
                checks.extend(validate::check_outputs(dir));
            }
            for c in &checks {
                let mark = if c.passed { "PASS" } else { "FAIL" };
                eprintln!("{mark} {} {}", c.name, c.detail);
            }
            let ok = checks.iter().all(|c| c.passed);
            println!("{}", serde_json::json!({ "passed": ok, "checks": checks }));
            return Ok(ok);
        }
    };
    let cfg = load_config(args.common.config.as_deref(), &args.common.preset)?;
    init_pool(args.common.jobs.or(cfg.jobs));
    let outcome = run(cmd, &cfg, &args.out, args.force)?;
    let failed = outcome.failed();
    let skipped = outcome
        .records
        .iter()
        .filter(|r| r.status == Status::BistableSkipped)
        .count();
    eprintln!(
        "{}: {} points ({} computed, {} reused, {} bistable-skipped, {} failed)",
        outcome.dir.display(),
        outcome.records.len(),
        outcome.computed.len(),
        outcome.reused.len(),
        skipped,
        failed.len()
    );
    println!("{}", outcome.dir.display());
    if !failed.is_empty() {
        let errors: Vec<_> = outcome
            .records
            .iter()
            .filter(|r| r.status == Status::Failed)
            .map(|r| serde_json::json!({ "index": r.index, "summary": r.summary }))
            .collect();
        eprintln!(
            "{}",
            serde_json::json!({ "error": "solver", "failed_points": errors })
        );
        return Ok(false);
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("{}", e.report());
            ExitCode::from(1)
        }
    }
}
