use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ssc::app::dataset::{parse_label_text, write_csv, write_labels, write_raw};
use ssc::app::{
    run_baseline, run_model, sweep, sweep_table, synth, train_ensemble, DataFormat, Dataset, Footprint, Model,
    PipelineConfig,
};
use ssc::evaluation::score;
use ssc::snapshot::write_snapshot;
use ssc::{ErrorKind, Result, SscError};

#[derive(Parser)]
#[command(name = "ssc", version, about = "Snapshot spectral clustering")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train the snapshot autoencoder and write one encoder file per cycle.
    Train(RunArgs),
    /// Full pipeline; `--metrics` switches to the random-metric variant.
    Cluster(RunArgs),
    /// One of the comparison models.
    Baseline {
        #[arg(long, value_parser = parse_baseline)]
        model: Model,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Repeat the pipeline once per value of one configuration key.
    Sweep {
        /// Configuration key, e.g. `sparsity`.
        #[arg(long)]
        param: String,
        /// Semicolon separated values (commas are reserved for list keys).
        #[arg(long, value_delimiter = ';')]
        values: Vec<String>,
        #[arg(long, default_value = "ssc")]
        model: Model,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Score a labels file against ground truth.
    Evaluate {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        truth: PathBuf,
    },
    /// Write a seeded synthetic dataset and its labels.
    Synth(SynthArgs),
    /// Affinity memory footprint against the dense equivalent.
    Info {
        #[arg(long, default_value_t = 70_000)]
        n: usize,
        #[arg(long, default_value_t = 350)]
        landmarks: usize,
        #[arg(long, default_value_t = 3)]
        sparsity: usize,
        #[arg(long, default_value_t = 1)]
        m: usize,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// mnist, mnist-lr0.003, mnist-lr0.03 or cifar10; applied before `--config`.
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    dataset: Option<PathBuf>,
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    labels: Option<PathBuf>,
    #[arg(long)]
    m: Option<String>,
    #[arg(long)]
    cycle_length: Option<String>,
    #[arg(long)]
    alpha0: Option<String>,
    #[arg(long)]
    encoding_size: Option<String>,
    #[arg(long)]
    landmarks: Option<String>,
    #[arg(long)]
    sparsity: Option<String>,
    #[arg(long)]
    metric: Option<String>,
    #[arg(long)]
    metrics: Option<String>,
    #[arg(long)]
    k: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    repeats: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Extra `key=value` overrides for any configuration key.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl RunArgs {
    fn config(&self) -> Result<PipelineConfig> {
        let mut cfg = match &self.preset {
            Some(p) => PipelineConfig::preset(p)?,
            None => PipelineConfig::default(),
        };
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path)
                .map_err(|e| SscError::Config(format!("cannot read {}: {e}", path.display())))?;
            cfg.apply_text(&text)?;
        }
        let path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string());
        let overrides = [
            ("dataset", path(&self.dataset)),
            ("format", self.format.clone()),
            ("labels", path(&self.labels)),
            ("ensemble_size", self.m.clone()),
            ("cycle_length", self.cycle_length.clone()),
            ("alpha0", self.alpha0.clone()),
            ("encoding_size", self.encoding_size.clone()),
            ("landmarks", self.landmarks.clone()),
            ("sparsity", self.sparsity.clone()),
            ("metric", self.metric.clone()),
            ("metrics", self.metrics.clone()),
            ("k", self.k.clone()),
            ("seed", self.seed.clone()),
            ("repeats", self.repeats.clone()),
            ("out", path(&self.out)),
        ];
        for (key, value) in overrides {
            if let Some(v) = value {
                cfg.set(key, &v)?;
            }
        }
        for kv in &self.set {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| SscError::Config(format!("--set expects KEY=VALUE, got `{kv}`")))?;
            cfg.set(k.trim(), v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn parse_baseline(s: &str) -> std::result::Result<Model, String> {
    let m: Model = s.parse().map_err(|e: SscError| e.to_string())?;
    if Model::BASELINES.contains(&m) {
        Ok(m)
    } else {
        Err(format!("`{s}` is not one of kmeans, dae_kmeans, lsc, dae_lsc"))
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SynthKind {
    Blobs,
    Moons,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, value_enum, default_value = "blobs")]
    kind: SynthKind,
    #[arg(long, default_value_t = 600)]
    n: usize,
    #[arg(long, default_value_t = 10)]
    dims: usize,
    #[arg(long, default_value_t = 3)]
    k: usize,
    /// Per-coordinate standard deviation (blobs) or jitter (moons).
    #[arg(long, default_value_t = 0.3)]
    sigma: f64,
    /// Distance between blob centres.
    #[arg(long, default_value_t = 5.0)]
    separation: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "csv")]
    format: String,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    labels_out: Option<PathBuf>,
}

fn load(cfg: &PipelineConfig) -> Result<Dataset> {
    let path = cfg
        .dataset
        .as_ref()
        .ok_or_else(|| SscError::Config("no dataset given (--dataset or `dataset =` in the config)".into()))?;
    let data = Dataset::load(path, cfg.format, cfg.labels.as_deref())?;
    log::info!("loaded {} rows x {} columns from {}", data.x.rows(), data.x.cols(), path.display());
    Ok(data)
}

fn out_dir(cfg: &PipelineConfig, fallback: &str) -> PathBuf {
    cfg.out.clone().unwrap_or_else(|| PathBuf::from(fallback))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn print_scores(report: &ssc::evaluation::EvaluationReport) {
    match (report.mean, report.std) {
        (Some(m), Some(s)) => println!(
            "nmi {:.4} ± {:.4}  ari {:.4} ± {:.4}  acc {:.4} ± {:.4}  ({} repeats)",
            m.nmi, s.nmi, m.ari, s.ari, m.acc, s.acc, report.repeats
        ),
        _ => println!("{} repeats, no ground truth given", report.repeats),
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Train(args) => {
            let cfg = args.config()?;
            let data = load(&cfg)?;
            let (snapshots, _) = train_ensemble(&cfg, &data.x)?;
            let dir = out_dir(&cfg, "ssc-snapshots");
            std::fs::create_dir_all(&dir)?;
            let provenance = serde_json::json!({ "config_fingerprint": cfg.fingerprint() }).to_string();
            for s in &snapshots {
                let path = dir.join(format!("snapshot_{}.sscw", s.cycle_index));
                write_snapshot(create(&path)?, s, &provenance)?;
                println!("{} (train loss {:.6})", path.display(), s.train_loss);
            }
        }
        Command::Cluster(args) => {
            let cfg = args.config()?;
            let data = load(&cfg)?;
            let model = if cfg.metrics.is_some() { Model::SscRm } else { Model::Ssc };
            let mut out = run_model(model, &cfg, &data)?;
            let dir = out_dir(&cfg, "ssc-out");
            out.persist(&dir)?;
            print_scores(&out.report);
            println!("wrote {}", dir.display());
        }
        Command::Baseline { model, run } => {
            let cfg = run.config()?;
            let data = load(&cfg)?;
            let mut out = run_baseline(model, &cfg, &data)?;
            let dir = out_dir(&cfg, &format!("ssc-{model}"));
            out.persist(&dir)?;
            print_scores(&out.report);
            println!("wrote {}", dir.display());
        }
        Command::Sweep { param, values, model, run } => {
            let cfg = run.config()?;
            let data = load(&cfg)?;
            let points = sweep(&cfg, model, &param, &values, &data)?;
            print!("{}", sweep_table(&param, &points));
            if let Some(dir) = &cfg.out {
                std::fs::create_dir_all(dir)?;
                let records: Vec<_> = points.iter().map(|p| &p.record).collect();
                let json = serde_json::to_string_pretty(&records).expect("records are plain data");
                std::fs::write(dir.join("sweep.json"), json)?;
            }
        }
        Command::Evaluate { pred, truth } => {
            let read = |p: &Path| {
                std::fs::read_to_string(p)
                    .map_err(|e| SscError::Data(format!("cannot read {}: {e}", p.display())))
                    .and_then(|t| parse_label_text(&t))
            };
            let (nmi, ari, acc) = score(&read(&pred)?, &read(&truth)?)?;
            println!("{}", serde_json::json!({ "nmi": nmi, "ari": ari, "acc": acc }));
        }
        Command::Synth(a) => {
            let data = match a.kind {
                SynthKind::Blobs => synth::blobs(a.n, a.dims, a.k, a.sigma, a.separation, a.seed)?,
                SynthKind::Moons => synth::two_moons(a.n, a.sigma, a.seed)?,
            };
            match a.format.parse::<DataFormat>()? {
                DataFormat::Csv => write_csv(create(&a.out)?, &data.x)?,
                DataFormat::RawF32 => write_raw(create(&a.out)?, &data.x)?,
                DataFormat::Idx => return Err(SscError::Config("synth writes csv or rawf32".into())),
            }
            if let (Some(path), Some(labels)) = (&a.labels_out, &data.labels) {
                write_labels(create(path)?, labels)?;
            }
            println!("{} rows x {} columns -> {}", data.x.rows(), data.x.cols(), a.out.display());
        }
        Command::Info { n, landmarks, sparsity, m } => {
            print!("{}", Footprint::new(n, landmarks, sparsity, m).render());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e.kind() {
                ErrorKind::Config => 2,
                ErrorKind::Data | ErrorKind::Io => 3,
                ErrorKind::Numerical => 4,
            })
        }
    }
}
