use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use intrinsic_arrow::config::{parse_config, ExperimentConfig, ExperimentKind, OutputFormat};
use intrinsic_arrow::emit::emit;
use intrinsic_arrow::runner::{run_experiment, run_with_threads, ResultRecord};

const EXIT_INVALID: u8 = 1;
const EXIT_VERIFY_FAILED: u8 = 2;

/// Time-arrow inference experiments.
#[derive(Debug, Parser)]
#[command(name = "intrinsic-arrow", version = intrinsic_arrow::VERSION)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML experiment config; its `kind` must match the subcommand.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Master seed.
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,

    /// Number of samples (paths, draws or trials per point).
    #[arg(long, global = true, value_name = "N")]
    samples: Option<usize>,

    /// Output file.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_name = "csv|json")]
    format: Option<String>,

    /// Worker threads; results are identical for any count.
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Driven Langevin paths, forward and reverse arms.
    Langevin,
    /// Two-snapshot multinomial ensemble.
    Classical,
    /// Typical-subspace measurement on a tensor-power state.
    Quantum,
    /// Empirical against closed-form fidelity over a ΔI grid.
    FidelityCurve,
    /// Run the acceptance checks.
    Verify,
}

impl Command {
    fn kind(self) -> ExperimentKind {
        match self {
            Self::Langevin => ExperimentKind::Langevin,
            Self::Classical => ExperimentKind::Classical,
            Self::Quantum => ExperimentKind::Quantum,
            Self::FidelityCurve => ExperimentKind::FidelityCurve,
            Self::Verify => ExperimentKind::Verify,
        }
    }
}

fn resolve(cli: &Cli) -> Result<ExperimentConfig, String> {
    let kind = cli.command.kind();
    let mut config = match &cli.config {
        Some(path) => {
            let text =
                std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
            let c = parse_config(&text).map_err(|e| format!("{}: {e}", path.display()))?;
            if c.kind != kind {
                return Err(format!(
                    "{}: config kind {:?} does not match subcommand {:?}",
                    path.display(),
                    c.kind.as_str(),
                    kind.as_str()
                ));
            }
            c
        }
        None => ExperimentConfig::default_for(kind),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(n) = cli.samples {
        config.set_samples(n).map_err(|e| e.to_string())?;
    }
    if let Some(f) = &cli.format {
        config.set_format(f.parse::<OutputFormat>().map_err(|e| e.to_string())?);
    }
    if let Some(out) = &cli.out {
        config.set_output(out.clone());
    }
    if cli.threads == Some(0) {
        return Err("--threads must be positive".into());
    }
    Ok(config)
}

fn report(record: &ResultRecord) {
    for m in &record.summary {
        let mut line = format!("{} = {}", m.name, m.value);
        if let Some(se) = m.std_error {
            line += &format!(" +- {se}");
        }
        if let Some(r) = m.reference {
            line += &format!(" (reference {r})");
        }
        if let Some(p) = m.passed {
            line += if p { " [PASS]" } else { " [FAIL]" };
        }
        if let Some(d) = &m.detail {
            line += &format!(": {d}");
        }
        println!("{line}");
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_INVALID)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let config = match resolve(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_INVALID);
        }
    };
    let result = match cli.threads {
        Some(n) => run_with_threads(&config, n),
        None => run_experiment(&config),
    };
    let record = match result {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_INVALID);
        }
    };
    report(&record);
    match emit(&record, &config.output, config.format) {
        Ok(files) => {
            for f in files {
                eprintln!("wrote {}", f.display());
            }
        }
        Err(e) => {
            eprintln!("error: writing {}: {e}", config.output.display());
            return ExitCode::from(EXIT_INVALID);
        }
    }
    if config.kind == ExperimentKind::Verify && !record.passed() {
        return ExitCode::from(EXIT_VERIFY_FAILED);
    }
    ExitCode::SUCCESS
}
