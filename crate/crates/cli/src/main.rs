use clap::{Args, Parser, Subcommand};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use synbuild_cli::commands::{run_export_obj, run_sample_for_review, run_stats, run_validate};
use synbuild_cli::{run_generate, PipelineConfig};
use synbuild_core::records::ObjStream;
use synbuild_core::stats::DEFAULT_BUCKET_EDGES;

const OUT_ENV: &str = "SYNBUILD_OUT";
const DEFAULT_OUT: &str = "synbuild_out";

#[derive(Parser)]
#[command(name = "synbuild", version, about = "Procedural building wireframes with interior layouts")]
struct Cli {
    #[command(flatten)]
    opts: Overrides,
    #[command(subcommand)]
    command: Command,
}

/// Config file and the keys that can be overridden from the command line.
#[derive(Args)]
struct Overrides {
    /// TOML config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Global seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Number of exteriors to generate.
    #[arg(long, global = true)]
    exteriors: Option<usize>,
    /// Worker threads.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Output root (falls back to the config, then $SYNBUILD_OUT).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    permutation_cap: Option<usize>,
    #[arg(long, global = true)]
    candidates_per_floor: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate buildings into the output root.
    Generate,
    /// Check every record under the output root.
    Validate,
    /// Dataset statistics as JSON on stdout.
    Stats {
        /// Also write per-building counts as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Write an OBJ for every record.
    ExportObj {
        /// Destination directory; defaults to next to each record.
        #[arg(long)]
        dest: Option<PathBuf>,
        /// Streams to include (building, window, door, roof).
        #[arg(long, value_delimiter = ',')]
        streams: Vec<String>,
    },
    /// Copy a seeded random sample of records for manual review.
    SampleForReview {
        #[arg(long, short)]
        n: usize,
        #[arg(long)]
        dest: PathBuf,
        /// Sampling seed; defaults to the global seed.
        #[arg(long)]
        sample_seed: Option<u64>,
    },
}

enum Failure {
    Config(String),
    Run(anyhow::Error),
    Invalid,
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Run(e)
    }
}

fn load_config(o: &Overrides) -> Result<PipelineConfig, Failure> {
    let mut cfg = match &o.config {
        Some(p) => PipelineConfig::load(p).map_err(|e| Failure::Config(e.to_string()))?,
        None => PipelineConfig::default(),
    };
    if let Some(v) = o.seed {
        cfg.global_seed = v;
    }
    if let Some(v) = o.exteriors {
        cfg.exterior_count = v;
    }
    if let Some(v) = o.workers {
        cfg.worker_count = v;
    }
    if let Some(v) = o.permutation_cap {
        cfg.permutation_cap = v;
    }
    if let Some(v) = o.candidates_per_floor {
        cfg.candidates_per_floor = v;
    }
    if let Some(v) = &o.out {
        cfg.output_root = Some(v.clone());
    } else if cfg.output_root.is_none() {
        cfg.output_root = Some(std::env::var_os(OUT_ENV).map_or_else(|| PathBuf::from(DEFAULT_OUT), PathBuf::from));
    }
    cfg.validate().map_err(|e| Failure::Config(e.to_string()))?;
    Ok(cfg)
}

fn print_json<T: serde::Serialize>(v: &T) -> anyhow::Result<()> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    let cfg = load_config(&cli.opts)?;
    let root: &Path = cfg.output_root.as_deref().expect("output root is resolved");
    match cli.command {
        Command::Generate => {
            let report = run_generate(&cfg, root)?;
            print_json(&serde_json::json!({
                "exteriors_attempted": report.exteriors_attempted,
                "exteriors_retained": report.exteriors_retained,
                "exterior_retention": report.exterior_retention(),
                "candidates_attempted": report.candidates_attempted,
                "candidates_retained": report.candidates_retained,
                "candidate_retention": report.candidate_retention(),
                "candidate_rejections": report.candidate_rejections,
                "buildings_emitted": report.buildings_emitted,
                "building_rejections": report.building_rejections,
            }))?;
            if report.exteriors_retained == 0 {
                eprintln!("no exterior was retained");
                return Err(Failure::Invalid);
            }
        }
        Command::Validate => {
            let summary = run_validate(root)?;
            for v in &summary.verdicts {
                println!("{}", serde_json::to_string(v).map_err(anyhow::Error::from)?);
            }
            if summary.records == 0 {
                eprintln!("no records found under {}", root.display());
                return Err(Failure::Invalid);
            }
            eprintln!("{} of {} records passed", summary.records - summary.failed, summary.records);
            if !summary.passed() {
                return Err(Failure::Invalid);
            }
        }
        Command::Stats { csv } => {
            let s = run_stats(root, &DEFAULT_BUCKET_EDGES)?;
            if let Some(p) = csv {
                std::fs::write(&p, s.buildings_csv()).map_err(anyhow::Error::from)?;
            }
            print_json(&s)?;
        }
        Command::ExportObj { dest, streams } => {
            let streams = if streams.is_empty() {
                ObjStream::ALL.to_vec()
            } else {
                streams
                    .iter()
                    .map(|s| ObjStream::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| Failure::Config(format!("unknown stream `{s}`"))))
                    .collect::<Result<_, _>>()?
            };
            let written = run_export_obj(root, dest.as_deref(), &streams)?;
            eprintln!("wrote {} OBJ files", written.len());
        }
        Command::SampleForReview { n, dest, sample_seed } => {
            let bundle = run_sample_for_review(root, &dest, n, sample_seed.unwrap_or(cfg.global_seed))?;
            eprintln!("sampled {} records into {}", bundle.records.len(), dest.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Run(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Invalid) => ExitCode::from(1),
    }
}
