use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use roadwarn::classifiers::ModelKind;
use roadwarn::commands::{self, EvalMode, Settings, DEFAULT_SEED};
use roadwarn::features::FeatureSet;
use roadwarn::{Error, Result};

#[derive(Parser, Debug)]
#[command(name = "roadwarn", version, about = "Roadside vehicle sound classification and pedestrian warnings")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// TOML with optional [framing] [mfcc] [lpc] [band] [classifier] [plan] tables
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, default_value = "all", value_parser = parse_feature_set)]
    feature_set: FeatureSet,
    #[arg(long, global = true, default_value = "mlp", value_parser = parse_model)]
    model: ModelKind,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate the seeded 210-clip corpus and its manifest
    Synth {
        #[arg(long)]
        out: PathBuf,
    },
    /// Write one feature row per frame of every corpus clip
    Extract {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train a classifier on a feature CSV
    Train {
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Cross-validate, compare feature sets, or score a saved model
    Eval {
        #[arg(long)]
        features: PathBuf,
        #[arg(long, conflicts_with = "compare")]
        model_in: Option<PathBuf>,
        /// Every classifier on every feature set
        #[arg(long)]
        compare: bool,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Classify one recording and report the pass-by
    Detect {
        #[arg(long)]
        wav: PathBuf,
        #[arg(long)]
        model_in: PathBuf,
    },
    /// Replay a VEHICLE/PED script against an in-process warning service
    Simulate {
        #[arg(long)]
        script: PathBuf,
        #[arg(long)]
        plan: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Run the warning service
    #[command(alias = "warnd")]
    Serve {
        #[arg(long)]
        plan: Option<PathBuf>,
        #[arg(long, default_value = "127.0.0.1:7878")]
        listen: String,
    },
}

fn parse_feature_set(s: &str) -> std::result::Result<FeatureSet, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_model(s: &str) -> std::result::Result<ModelKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn run(cli: Cli) -> Result<()> {
    let c = &cli.common;
    let settings = match &c.config {
        Some(p) => Settings::load(p)?,
        None => Settings::default(),
    };
    let spec = settings.model_spec(c.model, c.feature_set, c.seed);
    match cli.command {
        Command::Synth { out } => {
            let rows = commands::cmd_synth(&out, c.seed, &settings)?;
            println!("wrote {} clips to {}", rows.len(), out.display());
        }
        Command::Extract { corpus, out } => {
            let table = commands::cmd_extract(&corpus, &out, &settings)?;
            println!("wrote {} rows x {} features to {}", table.rows.len(), table.names.len(), out.display());
        }
        Command::Train { features, out } => {
            commands::cmd_train(&features, &out, &spec, &settings)?;
            println!("wrote {} model to {}", spec.kind.as_str(), out.display());
        }
        Command::Eval { features, model_in, compare, report } => {
            let mode = match (model_in, compare) {
                (Some(p), _) => EvalMode::Saved(p),
                (None, true) => EvalMode::Compare(spec),
                (None, false) => EvalMode::CrossValidate(spec),
            };
            let r = commands::cmd_eval(&features, &mode, c.seed, report.as_deref(), &settings)?;
            print!("{r}");
        }
        Command::Detect { wav, model_in } => {
            let result = commands::cmd_detect(&wav, &model_in, &settings)?;
            for line in commands::detection_lines(&result) {
                println!("{line}");
            }
        }
        Command::Simulate { script, plan, report } => {
            let r = commands::cmd_simulate(&script, plan.as_deref(), report.as_deref(), &settings)?;
            print!("{r}");
        }
        Command::Serve { plan, listen } => {
            let server = commands::cmd_serve(plan.as_deref(), &listen, &settings)?;
            eprintln!("listening on {}", server.local_addr());
            server.join();
        }
    }
    Ok(())
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
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_data_error() { 2 } else { 1 })
        }
    }
}
