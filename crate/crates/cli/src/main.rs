use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sonolab_cli::{commands, CliError, RunConfig};

#[derive(Parser)]
#[command(
    name = "sonolab",
    version,
    about = "Sonorant spectral moments, vowel formant contours and their statistics"
)]
struct Cli {
    /// Config file (TOML with dotted keys). Falls back to $SONOLAB_CONFIG.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override a config key, e.g. --set spectrum.window_ms=25. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,
    /// Output directory (run.output_dir).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Extract features from every recording in a manifest.
    Analyze {
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
    /// Mean and SD tables per cell.
    Summarize {
        features: PathBuf,
        /// Also write per-DV mean and 95% CI files under plot/.
        #[arg(long)]
        emit_plot_data: bool,
    },
    /// Factorial least-squares model per dependent variable.
    Model {
        features: PathBuf,
        /// Dependent variable (column name or label); repeatable. Default: all.
        #[arg(long)]
        dv: Vec<String>,
    },
    /// Pairwise Welch contrasts with Holm correction.
    Contrasts {
        features: PathBuf,
        #[arg(long)]
        dv: Vec<String>,
    },
    /// Logistic-regression variety classifier with k-fold cross-validation.
    Classify {
        features: PathBuf,
        #[arg(long)]
        folds: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Write a synthetic demo corpus with truth files and a manifest.
    Synth {
        #[arg(long)]
        speakers: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        max_tokens: Option<usize>,
    },
    /// Check a features table and/or a manifest.
    Validate {
        features: Option<PathBuf>,
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<i32, CliError> {
    let mut sets = cli.overrides.clone();
    // path flags become quoted TOML strings
    let path_set =
        |key: &str, p: &PathBuf| format!("{key}={}", toml::Value::String(p.display().to_string()));
    sets.extend(cli.out.as_ref().map(|p| path_set("run.output_dir", p)));
    match &cli.command {
        Command::Analyze { manifest } => {
            sets.extend(manifest.as_ref().map(|p| path_set("run.manifest", p)))
        }
        Command::Classify { folds, seed, .. } => {
            sets.extend(folds.map(|k| format!("classify.folds={k}")));
            sets.extend(seed.map(|s| format!("run.seed={s}")));
        }
        Command::Synth { speakers, seed, .. } => {
            sets.extend(speakers.map(|k| format!("synth.speakers_per_variety={k}")));
            sets.extend(seed.map(|s| format!("run.seed={s}")));
        }
        _ => {}
    }
    if let Command::Validate { features, manifest } = &cli.command {
        if let Some(p) = &cli.config {
            RunConfig::load(Some(p), &sets)?;
        }
        return commands::cmd_validate(features.as_deref(), manifest.as_deref());
    }
    let cfg = RunConfig::load(cli.config.as_deref(), &sets)?;
    match &cli.command {
        Command::Analyze { .. } => commands::cmd_analyze(&cfg),
        Command::Summarize {
            features,
            emit_plot_data,
        } => commands::cmd_summarize(features, &cfg, *emit_plot_data),
        Command::Model { features, dv } => commands::cmd_model(features, &cfg, dv),
        Command::Contrasts { features, dv } => commands::cmd_contrasts(features, &cfg, dv),
        Command::Classify { features, .. } => commands::cmd_classify(features, &cfg),
        Command::Synth { max_tokens, .. } => commands::cmd_synth(&cfg, *max_tokens),
        Command::Validate { .. } => unreachable!("handled above"),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("sonolab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
