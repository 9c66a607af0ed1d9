use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lung_distortion::classify::ModelKind;
use lung_distortion::pipeline::{self, FeatureTable, RunConfig, Task};
use lung_distortion::Result;

#[derive(Parser)]
#[command(
    name = "lungdist",
    version,
    about = "Lung sound classification from spectrogram flattening distortion"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Flat `key = value` run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
    /// Overrides the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads, 0 for all cores.
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct TableArgs {
    /// Feature CSV; defaults to `<out-dir>/features.csv`.
    #[arg(long)]
    features: Option<PathBuf>,
    /// `multiclass` or `binary:<class>`.
    #[arg(long, default_value = "multiclass")]
    task: Task,
}

#[derive(Subcommand)]
enum Command {
    /// Extract the 88-feature table from a manifest of WAV files.
    Extract {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        manifest: PathBuf,
    },
    /// Split, grid-search, fit and evaluate models.
    Train {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        table: TableArgs,
        /// Model kinds, comma separated.
        #[arg(long, value_delimiter = ',', default_value = "lr,knn,rf,adaboost")]
        model: Vec<ModelKind>,
    },
    /// Score a saved model JSON on a feature CSV.
    Eval {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        features: Option<PathBuf>,
        /// Model JSON written by `train`.
        #[arg(long)]
        model: PathBuf,
    },
    /// Test accuracy against the number of selected features.
    FeatureCurve {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        table: TableArgs,
        #[arg(long, default_value = "rf")]
        model: ModelKind,
    },
    /// Random-forest feature ranking on the training split.
    Rank {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        table: TableArgs,
    },
}

fn load_config(common: &Common) -> Result<RunConfig> {
    let mut config = match &common.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = common.seed {
        config.seed = s;
    }
    if let Some(w) = common.workers {
        config.workers = w;
    }
    config.validate()?;
    std::fs::create_dir_all(&common.out_dir)?;
    std::fs::write(common.out_dir.join("run_config.txt"), config.to_text())?;
    Ok(config)
}

fn load_table(path: Option<&PathBuf>, out_dir: &Path, config: &RunConfig) -> Result<FeatureTable> {
    let path = path
        .cloned()
        .unwrap_or_else(|| out_dir.join("features.csv"));
    let (table, hash) = FeatureTable::read_csv(&path)?;
    if hash.as_deref().is_some_and(|h| h != config.hash()) {
        log::warn!(
            "{} was extracted under a different run config",
            path.display()
        );
    }
    Ok(table)
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Extract { common, manifest } => {
            let config = load_config(&common)?;
            let manifest = pipeline::ingest_manifest(&manifest, &config)?;
            let outcome = pipeline::extract(&manifest, &config)?;
            let path = pipeline::write_extract_outputs(&common.out_dir, &outcome, &config)?;
            println!("{} rows -> {}", outcome.table.rows.len(), path.display());
            if outcome.failures.is_empty() {
                Ok(ExitCode::SUCCESS)
            } else {
                eprintln!("{} recordings failed", outcome.failures.len());
                Ok(ExitCode::from(1))
            }
        }
        Command::Train {
            common,
            table,
            model,
        } => {
            let config = load_config(&common)?;
            let data = load_table(table.features.as_ref(), &common.out_dir, &config)?;
            let outcome = pipeline::train_and_evaluate(&data, &table.task, &model, &config)?;
            pipeline::write_train_outputs(&common.out_dir, &outcome, &config)?;
            for r in &outcome.results {
                let m = &r.report;
                println!(
                    "{:<9} accuracy {:.4}  recall {:.4}  jaccard {:.4}  auroc {}",
                    r.model.kind.to_string(),
                    m.accuracy,
                    m.recall,
                    m.jaccard,
                    m.auroc.map_or("-".into(), |a| format!("{a:.4}"))
                );
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Eval {
            common,
            features,
            model,
        } => {
            let config = load_config(&common)?;
            let data = load_table(features.as_ref(), &common.out_dir, &config)?;
            let (file, report) = pipeline::evaluate_saved(&model, &data)?;
            let path = pipeline::write_eval_output(&common.out_dir, &file, &report, &config)?;
            println!("accuracy {:.4} -> {}", report.accuracy, path.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::FeatureCurve {
            common,
            table,
            model,
        } => {
            let config = load_config(&common)?;
            let data = load_table(table.features.as_ref(), &common.out_dir, &config)?;
            let curve = pipeline::feature_curve(&data, &table.task, model, &config)?;
            let path = pipeline::write_feature_curve(
                &common.out_dir,
                &table.task,
                model,
                &curve,
                &config,
            )?;
            println!("{} points -> {}", curve.len(), path.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Rank { common, table } => {
            let config = load_config(&common)?;
            let data = load_table(table.features.as_ref(), &common.out_dir, &config)?;
            let ranking = pipeline::rank(&data, &table.task, &config, &common.out_dir)?;
            for (name, v) in ranking.iter().take(10) {
                println!("{name:<20} {v:.6}");
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
