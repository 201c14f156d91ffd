use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use spectral_renorm::harness::{emit_plotdata, run_experiment, write_report, ExperimentConfig, ExperimentKind, HarnessError};

/// Run a spectral-renormalization experiment and write its report.
///
/// Exit status: 0 when every check passes, 1 on a failing check or numerical
/// failure, 2 when the configuration is invalid. The log level is read from
/// SPECTRAL_RENORM_LOG (default `warn`).
#[derive(Parser)]
#[command(name = "spectral-renorm", version)]
struct Cli {
    #[command(subcommand)]
    kind: Kind,
}

#[derive(Subcommand)]
#[command(rename_all = "snake_case")]
enum Kind {
    /// Monodromy data: connectivity, genus, points over infinity.
    ValidateCovering(Common),
    /// Rational renormalization iterates and their moments.
    RenormIterate(Common),
    /// Polynomial renormalization branches and their residuals.
    RenormPoly(Common),
    /// Default instances of every kind plus cross-module identities.
    VerifyIdentities(Common),
    /// CMV construction, entry formulas and the Schur flow.
    Cmv(Common),
    /// Transfer-operator duality, sampling and tree eigen-measures.
    Measure(Common),
    /// Empirical Lipschitz ratios of renormalization and Darboux maps.
    Lipschitz(Common),
}

#[derive(Args)]
struct Common {
    /// JSON config `{kind?, parameters?, seed?, output_dir?}`; defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the seed in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (overrides `output_dir`; default `reports`).
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Kind {
    fn split(self) -> (ExperimentKind, Common) {
        match self {
            Kind::ValidateCovering(c) => (ExperimentKind::ValidateCovering, c),
            Kind::RenormIterate(c) => (ExperimentKind::RenormIterate, c),
            Kind::RenormPoly(c) => (ExperimentKind::RenormPoly, c),
            Kind::VerifyIdentities(c) => (ExperimentKind::VerifyIdentities, c),
            Kind::Cmv(c) => (ExperimentKind::Cmv, c),
            Kind::Measure(c) => (ExperimentKind::Measure, c),
            Kind::Lipschitz(c) => (ExperimentKind::Lipschitz, c),
        }
    }
}

fn execute(kind: ExperimentKind, args: Common) -> Result<bool, HarnessError> {
    let mut cfg = match &args.config {
        Some(path) => ExperimentConfig::from_file(path, Some(kind))?,
        None => ExperimentConfig::new(kind),
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    let out = args.out.or(cfg.output_dir.clone()).unwrap_or_else(|| PathBuf::from("reports"));
    let run = run_experiment(&cfg)?;
    for check in &run.report.checks {
        println!("{check}");
    }
    for path in write_report(&run, &out)?.into_iter().chain(emit_plotdata(&run, &out)?) {
        log::info!("wrote {}", path.display());
    }
    println!("report: {}", out.join(format!("report-{}.json", run.stem())).display());
    let failing: Vec<&str> = run.report.failing().map(|c| c.name.as_str()).collect();
    if !failing.is_empty() {
        eprintln!("failing checks: {}", failing.join(", "));
    }
    Ok(failing.is_empty())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("SPECTRAL_RENORM_LOG", "warn")).init();
    let (kind, args) = Cli::parse().kind.split();
    match execute(kind, args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
