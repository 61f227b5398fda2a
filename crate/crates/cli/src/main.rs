//! `s3rnet`: generate synthetic data, train, evaluate, benchmark noise and
//! run the energy/CKA analyses. Every command echoes its merged config and
//! stamps the config hash into each file it writes.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use s3rnet::config::RunConfig;
use s3rnet::data::{augment, generate_dataset, load_dataset, save_dataset, DatasetManifest, FusionSample, HsiCube};
use s3rnet::metrics::{
    bicubic_baseline, branch_cka_matrix, energy_distribution, evaluate, noise_bench, reports_to_csv,
    MetricsReport, QualityMetrics, ReportContext,
};
use s3rnet::model::{load_checkpoint, InitScheme, ModelConfig, S3RNet};
use s3rnet::train::{fit, load_training_checkpoint, FitOptions};
use s3rnet::{parallel, Error, Result};

#[derive(Parser)]
#[command(name = "s3rnet", version, about = "Hyperspectral pansharpening runs")]
struct Cli {
    /// JSON run config with optional sections {model, train, data, run}.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed; overrides run.seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Worker threads for per-scene evaluation.
    #[arg(long, global = true, env = "S3RNET_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic dataset of aligned (Y, X_h, X_m) triples.
    Generate(DataArgs),
    /// Train a network; writes train_log.csv and checkpoints.
    Train(TrainArgs),
    /// Score a checkpoint on a dataset.
    Eval(EvalArgs),
    /// Score a checkpoint with Gaussian noise added to X_h.
    BenchNoise {
        #[command(flatten)]
        eval: EvalArgs,
        /// Comma-separated SNR levels in dB; `inf` is the clean row.
        #[arg(long, default_value = "inf,35,15")]
        snr: String,
    },
    /// Channel energy of the fused features, or cross-layer CKA.
    Analyze {
        kind: AnalysisKind,
        #[command(flatten)]
        eval: EvalArgs,
        /// Probe crops used for CKA.
        #[arg(long, default_value_t = 8)]
        probes: usize,
        /// HR side of each CKA probe crop; defaults to half the scene.
        #[arg(long)]
        crop: Option<usize>,
    },
    /// Score bicubic upsampling of X_h, a model-free reference.
    Baseline {
        #[arg(long)]
        dataset: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum AnalysisKind {
    Energy,
    Cka,
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    /// Default widths and depths.
    Desk,
    /// Cf = 16, one DFAB per group.
    Toy,
}

#[derive(Clone, Copy, ValueEnum)]
enum InitArg {
    Kaiming,
    ZeroResidual,
}

#[derive(Args, Default)]
struct DataArgs {
    #[arg(long)]
    scenes: Option<usize>,
    /// HR side length.
    #[arg(long)]
    size: Option<usize>,
    #[arg(long)]
    bands: Option<usize>,
    #[arg(long)]
    msi_bands: Option<usize>,
    #[arg(long)]
    scale: Option<usize>,
    #[arg(long)]
    endmembers: Option<usize>,
}

#[derive(Args)]
struct TrainArgs {
    /// Train on a dataset directory instead of generating scenes in memory.
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// Validation dataset; defaults to the training scenes.
    #[arg(long)]
    val_dataset: Option<PathBuf>,
    #[arg(long, value_enum)]
    preset: Option<Preset>,
    #[arg(long, value_enum)]
    init: Option<InitArg>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    sam_weight: Option<f64>,
    #[arg(long)]
    checkpoint_interval: Option<usize>,
    #[arg(long)]
    eval_interval: Option<usize>,
    #[arg(long)]
    crop_size: Option<usize>,
    #[arg(long)]
    no_augment: bool,
    /// Continue from a training checkpoint (its train section wins).
    #[arg(long)]
    resume: Option<PathBuf>,
    #[command(flatten)]
    data: DataArgs,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    checkpoint: PathBuf,
    #[arg(long)]
    dataset: PathBuf,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::Usage(_) => 2,
        Error::Io(_) | Error::Json(_) | Error::Format { .. } => 3,
        Error::Dimension(_) | Error::NonFinite { .. } | Error::Diverged { .. } => 4,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    cfg.set_seed(cli.seed.unwrap_or(cfg.run.seed));
    if cli.threads.is_some() {
        cfg.run.threads = cli.threads;
    }
    if cfg.run.threads == Some(0) {
        return Err(Error::Config("threads must be at least 1".into()));
    }
    parallel::set_threads(cfg.run.threads.unwrap_or(1));
    fs::create_dir_all(&cli.out)
        .map_err(|e| Error::Config(format!("cannot create output directory {}: {e}", cli.out.display())))?;
    let out = cli.out.as_path();
    match cli.command {
        Command::Generate(data) => generate(cfg, &data, out),
        Command::Train(args) => train(cfg, args, out),
        Command::Eval(args) => eval(cfg, &args, out),
        Command::BenchNoise { eval, snr } => bench(cfg, &eval, &snr, out),
        Command::Analyze { kind, eval, probes, crop } => analyze(cfg, kind, &eval, probes, crop, out),
        Command::Baseline { dataset } => baseline(cfg, &dataset, out),
    }
}

fn apply_data(cfg: &mut RunConfig, a: &DataArgs) {
    let d = &mut cfg.data;
    d.scenes = a.scenes.unwrap_or(d.scenes);
    d.size = a.size.unwrap_or(d.size);
    d.bands = a.bands.unwrap_or(d.bands);
    d.msi_bands = a.msi_bands.unwrap_or(d.msi_bands);
    d.scale = a.scale.unwrap_or(d.scale);
    d.endmembers = a.endmembers.unwrap_or(d.endmembers);
    // the network follows the data's band counts and ratio
    cfg.model.bands = d.bands;
    cfg.model.msi_bands = d.msi_bands;
    cfg.model.scale = d.scale;
}

/// Write `<command>_config.json` and return the hash.
fn echo(cfg: &RunConfig, out: &Path, command: &str) -> Result<String> {
    let echo = cfg.echo();
    fs::write(out.join(format!("{command}_config.json")), serde_json::to_string_pretty(&echo)?)?;
    log::info!("{command}: config hash {}", echo.config_hash);
    Ok(echo.config_hash)
}

fn write_csv(path: &Path, hash: &str, body: &str) -> Result<()> {
    fs::write(path, format!("# config_hash={hash}\n{body}"))?;
    Ok(())
}

fn generate(mut cfg: RunConfig, data: &DataArgs, out: &Path) -> Result<()> {
    apply_data(&mut cfg, data);
    cfg.data.validate()?;
    let hash = echo(&cfg, out, "generate")?;
    let scenes = generate_dataset(&cfg.data)?;
    let manifest = save_dataset(out, &cfg.data, &scenes, &hash)?;
    println!("wrote {} scenes to {} (config {hash})", manifest.scenes.len(), out.display());
    Ok(())
}

/// Scenes of a dataset directory, plus its recorded spec when present.
fn read_dataset(dir: &Path) -> Result<(Vec<FusionSample>, Option<DatasetManifest>)> {
    let scenes = load_dataset(dir)?.into_iter().map(|s| s.sample).collect();
    let path = dir.join("manifest.json");
    let manifest = if path.exists() { Some(serde_json::from_slice(&fs::read(path)?)?) } else { None };
    Ok((scenes, manifest))
}

fn train(mut cfg: RunConfig, a: TrainArgs, out: &Path) -> Result<()> {
    apply_data(&mut cfg, &a.data);
    let mut train_set = Vec::new();
    if let Some(dir) = &a.dataset {
        let (scenes, manifest) = read_dataset(dir)?;
        if let Some(m) = manifest {
            let seed = cfg.run.seed;
            cfg.data = m.spec;
            cfg.data.seed = seed;
            apply_data(&mut cfg, &DataArgs::default());
        }
        train_set = scenes;
    }
    if let Some(p) = a.preset {
        let (b, m, s) = (cfg.model.bands, cfg.model.msi_bands, cfg.model.scale);
        cfg.model = match p {
            Preset::Desk => ModelConfig { bands: b, msi_bands: m, scale: s, ..ModelConfig::default() },
            Preset::Toy => ModelConfig::toy(b, m, s),
        };
    }
    if let Some(i) = a.init {
        cfg.run.init = match i {
            InitArg::Kaiming => InitScheme::Kaiming,
            InitArg::ZeroResidual => InitScheme::ZeroResidual,
        };
    }
    let t = &mut cfg.train;
    t.epochs = a.epochs.unwrap_or(t.epochs);
    t.batch_size = a.batch_size.unwrap_or(t.batch_size);
    t.lr0 = a.lr.unwrap_or(t.lr0);
    t.sam_weight = a.sam_weight.unwrap_or(t.sam_weight);
    t.checkpoint_interval = a.checkpoint_interval.unwrap_or(t.checkpoint_interval);
    t.eval_interval = a.eval_interval.unwrap_or(t.eval_interval);
    if a.crop_size.is_some() {
        t.crop_size = a.crop_size;
    }
    if a.no_augment {
        t.augment = false;
    }

    let (mut model, resume) = match &a.resume {
        Some(path) => {
            let r = load_training_checkpoint(path)?;
            cfg.model = r.model.config().clone();
            let seed = r.train.seed;
            cfg.train = r.train;
            cfg.set_seed(seed);
            (r.model, Some(r.state))
        }
        None => (S3RNet::new(cfg.model.clone(), cfg.run.init, cfg.run.seed)?, None),
    };
    cfg.validate()?;
    let hash = echo(&cfg, out, "train")?;
    if a.dataset.is_none() {
        train_set = generate_dataset(&cfg.data)?.into_iter().map(|s| s.sample).collect();
    }
    let val_set = match &a.val_dataset {
        Some(dir) => read_dataset(dir)?.0,
        None => train_set.clone(),
    };
    eprintln!(
        "training {} parameters on {} scenes for {} epochs (config {hash})",
        model.param_count(),
        train_set.len(),
        cfg.train.epochs
    );
    let opts = FitOptions { out_dir: Some(out.to_path_buf()), resume, config_hash: hash, stop_before_epoch: None };
    let report = fit(&mut model, &train_set, &val_set, &cfg.train, opts)?;
    if let Some(last) = report.epochs.last() {
        let psnr = last.val_psnr.map_or("-".to_string(), |p| format!("{p:.3} dB"));
        println!("epoch {} loss {:.6} val psnr {psnr}", last.epoch, last.train_loss);
    }
    Ok(())
}

/// Load checkpoint and dataset; the echoed config reflects both.
fn load_eval(cfg: &mut RunConfig, a: &EvalArgs) -> Result<(S3RNet<f32>, Vec<FusionSample>)> {
    let model = load_checkpoint(&a.checkpoint)?.to_model()?;
    let (scenes, manifest) = read_dataset(&a.dataset)?;
    cfg.model = model.config().clone();
    if let Some(m) = manifest {
        let seed = cfg.run.seed;
        cfg.data = m.spec;
        cfg.data.seed = seed;
    }
    Ok((model, scenes))
}

fn context(cfg: &RunConfig, hash: &str, msi_bands: usize) -> ReportContext {
    ReportContext { config_hash: hash.to_string(), seed: cfg.run.seed, snr_db: None, msi_bands }
}

fn print_scores(label: &str, scores: &[QualityMetrics]) {
    for (i, m) in scores.iter().enumerate() {
        eprintln!("{label} scene {i}: psnr {:.3} dB sam {:.4} deg rmse {:.6} ergas {:.4}", m.psnr_db, m.sam_deg, m.rmse, m.ergas);
    }
}

fn eval(mut cfg: RunConfig, a: &EvalArgs, out: &Path) -> Result<()> {
    let (model, scenes) = load_eval(&mut cfg, a)?;
    let hash = echo(&cfg, out, "eval")?;
    let scores = evaluate(&model, &scenes)?;
    print_scores("eval", &scores);
    let report = MetricsReport {
        metrics: QualityMetrics::mean(&scores).ok_or_else(|| Error::Usage("dataset is empty".into()))?,
        context: context(&cfg, &hash, model.config().msi_bands),
    };
    let csv = reports_to_csv(std::slice::from_ref(&report));
    write_csv(&out.join("eval.csv"), &hash, &csv)?;
    print!("{csv}");
    Ok(())
}

fn parse_snrs(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|s| match s.trim() {
            "inf" | "clean" => Ok(f64::INFINITY),
            v => v.parse::<f64>().map_err(|_| Error::Config(format!("bad SNR level {v:?}"))),
        })
        .collect()
}

fn bench(mut cfg: RunConfig, a: &EvalArgs, snr: &str, out: &Path) -> Result<()> {
    let snrs = parse_snrs(snr)?;
    let (model, scenes) = load_eval(&mut cfg, a)?;
    let hash = echo(&cfg, out, "bench_noise")?;
    let rows = noise_bench(&model, &scenes, &snrs, cfg.run.seed, &hash)?;
    let csv = reports_to_csv(&rows);
    write_csv(&out.join("bench_noise.csv"), &hash, &csv)?;
    print!("{csv}");
    Ok(())
}

fn analyze(
    mut cfg: RunConfig,
    kind: AnalysisKind,
    a: &EvalArgs,
    probes: usize,
    crop: Option<usize>,
    out: &Path,
) -> Result<()> {
    let (model, scenes) = load_eval(&mut cfg, a)?;
    match kind {
        AnalysisKind::Energy => {
            let hash = echo(&cfg, out, "analyze_energy")?;
            let xh = HsiCube::stack::<f32>(&scenes.iter().map(|s| &s.xh).collect::<Vec<_>>())?;
            let xm = HsiCube::stack::<f32>(&scenes.iter().map(|s| &s.xm).collect::<Vec<_>>())?;
            let dump = model.infer_with_activations(&xh, &xm)?;
            let d = energy_distribution(&dump.fused)?;
            write_csv(&out.join("energy.csv"), &hash, &d.to_csv())?;
            let summary = serde_json::json!({
                "config_hash": hash,
                "layer": "fused",
                "channels": d.energies.len(),
                "top_25_mass": d.top_mass(0.25),
                "gini": d.gini,
                "uniform_fallback": d.uniform_fallback,
            });
            fs::write(out.join("energy_summary.json"), serde_json::to_string_pretty(&summary)?)?;
            println!("top-25% mass {:.4}, gini {:.4}", d.top_mass(0.25), d.gini);
        }
        AnalysisKind::Cka => {
            let hash = echo(&cfg, out, "analyze_cka")?;
            if probes < 2 {
                return Err(Error::Config("CKA needs at least 2 probes".into()));
            }
            let side = scenes.first().map_or(0, |s| s.y.height());
            let scale = model.config().scale;
            let crop = crop.unwrap_or((side / 2 / scale).max(1) * scale);
            let inputs = (0..probes)
                .map(|i| augment(&scenes[i % scenes.len()], Some(crop), s3rnet::seed::mix_seed(cfg.run.seed, i as u64)))
                .collect::<Result<Vec<_>>>()?;
            let m = branch_cka_matrix(&model, &inputs)?;
            write_csv(&out.join("cka.csv"), &hash, &m.to_csv())?;
            let summary = serde_json::json!({
                "config_hash": hash,
                "probes": probes,
                "crop": crop,
                "cross_branch_mean": m.cross_group_mean(),
            });
            fs::write(out.join("cka_summary.json"), serde_json::to_string_pretty(&summary)?)?;
            println!("cross-branch mean CKA {:.4}", m.cross_group_mean());
        }
    }
    Ok(())
}

fn baseline(mut cfg: RunConfig, dataset: &Path, out: &Path) -> Result<()> {
    let (scenes, manifest) = read_dataset(dataset)?;
    if let Some(m) = manifest {
        let seed = cfg.run.seed;
        cfg.data = m.spec;
        cfg.data.seed = seed;
    }
    let hash = echo(&cfg, out, "baseline")?;
    let scores = scenes
        .iter()
        .map(|s| {
            let ratio = s.scale()?;
            QualityMetrics::compute(&bicubic_baseline(&s.xh, ratio)?, &s.y, ratio)
        })
        .collect::<Result<Vec<_>>>()?;
    print_scores("bicubic", &scores);
    let msi_bands = scenes.first().map_or(0, |s| s.xm.bands());
    let report = MetricsReport {
        metrics: QualityMetrics::mean(&scores).ok_or_else(|| Error::Usage("dataset is empty".into()))?,
        context: context(&cfg, &hash, msi_bands),
    };
    let csv = reports_to_csv(std::slice::from_ref(&report));
    write_csv(&out.join("baseline.csv"), &hash, &csv)?;
    print!("{csv}");
    Ok(())
}
