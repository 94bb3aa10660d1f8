//! Command-line surface for the molecular generation pipeline.
//!
//! One binary, five subcommands: `prepare` ingests a SMILES file into the
//! binary cache, `train` fits the configured model, `generate` samples
//! molecules from a checkpoint, `evaluate` scores generated sets against
//! the training data and emits the report files, and `props` computes
//! logP/MR for a SMILES list. A JSON config file carries everything worth
//! reproducing; command-line flags override individual values.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric abort.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use mgcvae_core::cvae::{
    load_checkpoint, save_checkpoint, train, write_loss_csv, CvaeError, CvaeModel, ModelConfig,
};
use mgcvae_core::dataset::{ingest, Dataset, DatasetError, DatasetManifest, IngestConfig};
use mgcvae_core::evalkit::{
    condition_table, emit_report, histogram, metrics, morgan_fp, pca2, ConditionTable, EvalError,
    Histogram, MetricsResult, ReportInputs,
};
use mgcvae_core::molgraph::{GraphSchema, MolGraph};
use mgcvae_core::numcore::Matrix;
use mgcvae_core::props::{crippen_logp, crippen_mr, ConditionVector, ContributionTable};
use mgcvae_core::smiles::{parse_smiles, write_smiles};

/// Everything a pipeline run needs, as one reusable JSON document.
/// Relative paths resolve against the working directory.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RunConfig {
    schema: GraphSchema,
    /// Raw input: one SMILES per line, optional precomputed logP/MR columns.
    input: PathBuf,
    cache: PathBuf,
    manifest: PathBuf,
    split_seed: u64,
    skip_malformed_lines: bool,
    model_kind: ModelKind,
    latent_dim: usize,
    encoder_widths: Vec<usize>,
    decoder_widths: Vec<usize>,
    batch_size: usize,
    epochs: usize,
    lr: f64,
    kl_warmup_epochs: f64,
    train_seed: u64,
    checkpoint: PathBuf,
    loss_csv: PathBuf,
    /// Generation grid of (logP bin, MR bin) pairs, in report row order.
    grid: Vec<(i64, i64)>,
    n_per_condition: usize,
    generate_seed: u64,
    out_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> RunConfig {
        let model = ModelConfig::default();
        RunConfig {
            schema: GraphSchema::default(),
            input: "data/input.smi".into(),
            cache: "data/cache.mgcd".into(),
            manifest: "data/manifest.json".into(),
            split_seed: 1,
            skip_malformed_lines: false,
            model_kind: ModelKind::Mgcvae,
            latent_dim: model.latent_dim,
            encoder_widths: model.encoder_widths,
            decoder_widths: model.decoder_widths,
            batch_size: model.batch_size,
            epochs: model.epochs,
            lr: model.lr,
            kl_warmup_epochs: model.kl_warmup_epochs,
            train_seed: model.seed,
            checkpoint: "out/model.mgcv".into(),
            loss_csv: "out/loss.csv".into(),
            grid: Vec::new(),
            n_per_condition: 1000,
            generate_seed: 1,
            out_dir: "out".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
enum ModelKind {
    /// Unconditional model.
    Mgvae,
    /// Property-conditioned model.
    Mgcvae,
}

impl RunConfig {
    fn load(path: &Path) -> Result<RunConfig, AppError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| AppError::Data(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| AppError::Data(format!("bad config {}: {e}", path.display())))
    }

    fn model_config(&self) -> ModelConfig {
        ModelConfig {
            latent_dim: self.latent_dim,
            encoder_widths: self.encoder_widths.clone(),
            decoder_widths: self.decoder_widths.clone(),
            condition_dim: match self.model_kind {
                ModelKind::Mgvae => 0,
                ModelKind::Mgcvae => ConditionVector::LEN,
            },
            batch_size: self.batch_size,
            epochs: self.epochs,
            lr: self.lr,
            kl_warmup_epochs: self.kl_warmup_epochs,
            seed: self.train_seed,
            schema: self.schema,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "mgcvae",
    version,
    about = "Graph-based molecular generation: prepare data, train, sample, evaluate"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Ingest a SMILES file into the binary cache and write the manifest.
    Prepare {
        /// Input file; defaults to the config's `input` path.
        input: Option<PathBuf>,
        #[command(flatten)]
        config: ConfigArg,
        /// Override the config's split seed.
        #[arg(long)]
        split_seed: Option<u64>,
    },
    /// Train the configured model on the prepared cache.
    Train {
        #[command(flatten)]
        config: ConfigArg,
        /// Override the config's model kind.
        #[arg(long, value_enum)]
        kind: Option<ModelKind>,
        /// Override the config's epoch count.
        #[arg(long)]
        epochs: Option<usize>,
        /// Override the config's training seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the config's checkpoint path.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// Override the config's loss CSV path.
        #[arg(long)]
        loss_csv: Option<PathBuf>,
    },
    /// Sample molecules from a checkpoint into a tab-separated file.
    Generate {
        /// Checkpoint to sample from.
        #[arg(short = 'm', long)]
        model: PathBuf,
        /// Target logP bin (required for a conditional checkpoint).
        #[arg(long)]
        logp: Option<i64>,
        /// Target MR bin (required for a conditional checkpoint).
        #[arg(long)]
        mr: Option<i64>,
        /// Molecules to sample.
        #[arg(short = 'n', long, default_value_t = 100)]
        count: usize,
        /// Sampling seed.
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Output file (single-condition mode). Default: generated.tsv
        #[arg(short, long)]
        out: Option<PathBuf>,
        /// Config file; enables grid mode (one file per configured pair).
        #[arg(short, long)]
        config: Option<PathBuf>,
    },
    /// Score generated sample files against the training set and emit the
    /// report files.
    Evaluate {
        #[command(flatten)]
        config: ConfigArg,
        /// Directory of .tsv files produced by `generate`.
        #[arg(long)]
        generated: PathBuf,
        /// Training cache for novelty and the dataset sources; defaults to
        /// the config's `cache` path.
        #[arg(long)]
        train_cache: Option<PathBuf>,
        /// Report directory; defaults to the config's `out_dir`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compute logP and MR for each SMILES in a file (TSV on stdout).
    Props {
        /// Input file: one SMILES per line.
        input: PathBuf,
    },
}

#[derive(Args)]
struct ConfigArg {
    /// JSON run configuration.
    #[arg(short, long)]
    config: PathBuf,
}

#[derive(Debug)]
enum AppError {
    Usage(String),
    Data(String),
    Numeric(String),
}

impl AppError {
    fn report(&self) -> (i32, &str) {
        match self {
            AppError::Usage(m) => (1, m),
            AppError::Data(m) => (2, m),
            AppError::Numeric(m) => (3, m),
        }
    }
}

impl From<CvaeError> for AppError {
    fn from(e: CvaeError) -> AppError {
        match e {
            CvaeError::Training { .. } | CvaeError::Num(_) => AppError::Numeric(e.to_string()),
            other => AppError::Data(other.to_string()),
        }
    }
}

impl From<DatasetError> for AppError {
    fn from(e: DatasetError) -> AppError {
        AppError::Data(e.to_string())
    }
}

impl From<EvalError> for AppError {
    fn from(e: EvalError) -> AppError {
        AppError::Data(e.to_string())
    }
}

impl From<std::io::Error> for AppError {
    fn from(e: std::io::Error) -> AppError {
        AppError::Data(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let (code, message) = e.report();
            eprintln!("error: {message}");
            ExitCode::from(code as u8)
        }
    }
}

fn run(cmd: Cmd) -> Result<(), AppError> {
    match cmd {
        Cmd::Prepare {
            input,
            config,
            split_seed,
        } => cmd_prepare(input, &config.config, split_seed),
        Cmd::Train {
            config,
            kind,
            epochs,
            seed,
            checkpoint,
            loss_csv,
        } => cmd_train(&config.config, kind, epochs, seed, checkpoint, loss_csv),
        Cmd::Generate {
            model,
            logp,
            mr,
            count,
            seed,
            out,
            config,
        } => cmd_generate(&model, logp, mr, count, seed, out, config.as_deref()),
        Cmd::Evaluate {
            config,
            generated,
            train_cache,
            out,
        } => cmd_evaluate(&config.config, &generated, train_cache, out),
        Cmd::Props { input } => cmd_props(&input),
    }
}

fn ensure_parent(path: &Path) -> Result<(), AppError> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    Ok(())
}

fn cmd_prepare(
    input: Option<PathBuf>,
    config: &Path,
    split_seed: Option<u64>,
) -> Result<(), AppError> {
    let cfg = RunConfig::load(config)?;
    let input = input.unwrap_or_else(|| cfg.input.clone());
    ensure_parent(&cfg.cache)?;
    ensure_parent(&cfg.manifest)?;
    let ingest_cfg = IngestConfig {
        cache_path: cfg.cache.clone(),
        manifest_path: cfg.manifest.clone(),
        schema: cfg.schema,
        split_seed: split_seed.unwrap_or(cfg.split_seed),
        skip_malformed_lines: cfg.skip_malformed_lines,
    };
    let manifest = ingest(&input, &ingest_cfg)?;
    println!(
        "accepted {} of {} molecules ({} train / {} test) -> {}",
        manifest.counts.accepted,
        manifest.counts.total,
        manifest.train.len(),
        manifest.test.len(),
        cfg.cache.display()
    );
    for (reason, count) in &manifest.counts.rejected {
        println!("  rejected {count} ({reason})");
    }
    Ok(())
}

fn cmd_train(
    config: &Path,
    kind: Option<ModelKind>,
    epochs: Option<usize>,
    seed: Option<u64>,
    checkpoint: Option<PathBuf>,
    loss_csv: Option<PathBuf>,
) -> Result<(), AppError> {
    let mut cfg = RunConfig::load(config)?;
    if let Some(kind) = kind {
        cfg.model_kind = kind;
    }
    if let Some(epochs) = epochs {
        cfg.epochs = epochs;
    }
    if let Some(seed) = seed {
        cfg.train_seed = seed;
    }
    let checkpoint_path = checkpoint.unwrap_or_else(|| cfg.checkpoint.clone());
    let loss_path = loss_csv.unwrap_or_else(|| cfg.loss_csv.clone());

    let ds = Dataset::open(&cfg.cache)?;
    let manifest = DatasetManifest::load(&cfg.manifest)?;
    let (ckpt, log) = train(&cfg.model_config(), &ds, &manifest)?;
    ensure_parent(&checkpoint_path)?;
    ensure_parent(&loss_path)?;
    save_checkpoint(&ckpt, &checkpoint_path)?;
    write_loss_csv(&loss_path, &log)?;
    if let Some(last) = log.last() {
        println!(
            "trained {} epochs on {} records: recon {:.3} kl {:.3} -> {}",
            log.len(),
            manifest.train.len(),
            last.recon,
            last.kl,
            checkpoint_path.display()
        );
    }
    Ok(())
}

/// One generated sample file: canonical SMILES, computed properties, and
/// the requested condition bins (`-` for the unconditional model).
fn write_samples(
    path: &Path,
    graphs: &[MolGraph],
    condition: Option<(i64, i64)>,
    table: &ContributionTable,
) -> Result<(), AppError> {
    let mut out = String::new();
    for g in graphs {
        let smiles = write_smiles(g).expect("sampled graphs are valid");
        let logp = crippen_logp(g, table);
        let mr = crippen_mr(g, table);
        match condition {
            Some((c1, c2)) => {
                let _ = writeln!(out, "{smiles}\t{logp}\t{mr}\t{c1}\t{c2}");
            }
            None => {
                let _ = writeln!(out, "{smiles}\t{logp}\t{mr}\t-\t-");
            }
        }
    }
    ensure_parent(path)?;
    std::fs::write(path, out)?;
    Ok(())
}

fn condition_for(c1: i64, c2: i64) -> Result<ConditionVector, AppError> {
    if !(-6..=5).contains(&c1) {
        return Err(AppError::Usage(format!("--logp must be in -6..=5, got {c1}")));
    }
    if !(10..=90).contains(&c2) || c2 % 10 != 0 {
        return Err(AppError::Usage(format!(
            "--mr must be one of 10, 20, ..., 90, got {c2}"
        )));
    }
    Ok(ConditionVector::from_bins(c1 as i32, c2 as i32))
}

fn cmd_generate(
    model_path: &Path,
    logp: Option<i64>,
    mr: Option<i64>,
    count: usize,
    seed: u64,
    out: Option<PathBuf>,
    config: Option<&Path>,
) -> Result<(), AppError> {
    let ckpt = load_checkpoint(model_path)?;
    let model = CvaeModel::from_checkpoint(&ckpt)?;
    let conditional = model.config().conditional();
    let table = ContributionTable::builtin();

    if !conditional && (logp.is_some() || mr.is_some()) {
        eprintln!("warning: checkpoint is unconditional; ignoring --logp/--mr");
    }

    // Grid mode: a config with a non-empty grid and no explicit condition.
    if let Some(cfg_path) = config {
        let cfg = RunConfig::load(cfg_path)?;
        if logp.is_none() && mr.is_none() && !cfg.grid.is_empty() {
            std::fs::create_dir_all(&cfg.out_dir)?;
            if !conditional {
                eprintln!("warning: checkpoint is unconditional; generating one baseline set");
                let graphs = model.sample(None, cfg.n_per_condition, cfg.generate_seed)?;
                let path = cfg.out_dir.join("gen_baseline.tsv");
                write_samples(&path, &graphs, None, table)?;
                println!("wrote {} molecules -> {}", graphs.len(), path.display());
                return Ok(());
            }
            for (idx, &(c1, c2)) in cfg.grid.iter().enumerate() {
                let cv = condition_for(c1, c2)?;
                let graphs = model.sample(
                    Some(&cv),
                    cfg.n_per_condition,
                    cfg.generate_seed.wrapping_add(idx as u64),
                )?;
                let path = cfg.out_dir.join(format!("gen_logp{c1}_mr{c2}.tsv"));
                write_samples(&path, &graphs, Some((c1, c2)), table)?;
                println!("wrote {} molecules -> {}", graphs.len(), path.display());
            }
            return Ok(());
        }
    }

    let out = out.unwrap_or_else(|| "generated.tsv".into());
    let graphs = if conditional {
        let (Some(c1), Some(c2)) = (logp, mr) else {
            return Err(AppError::Usage(
                "conditional checkpoint needs both --logp and --mr (or a config grid)".into(),
            ));
        };
        let cv = condition_for(c1, c2)?;
        model.sample(Some(&cv), count, seed)?
    } else {
        model.sample(None, count, seed)?
    };
    let condition = if conditional {
        Some((logp.unwrap(), mr.unwrap()))
    } else {
        None
    };
    write_samples(&out, &graphs, condition, table)?;
    println!("wrote {} molecules -> {}", graphs.len(), out.display());
    Ok(())
}

/// Parsed contents of one generated-samples directory.
#[derive(Default)]
struct GeneratedSets {
    baseline: Vec<(MolGraph, f64, f64)>,
    conditioned: BTreeMap<(i64, i64), Vec<(MolGraph, f64, f64)>>,
}

fn read_generated(dir: &Path) -> Result<GeneratedSets, AppError> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)?
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|x| x == "tsv"))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(AppError::Data(format!(
            "no .tsv sample files in {}",
            dir.display()
        )));
    }
    let mut sets = GeneratedSets::default();
    for file in &files {
        let text = std::fs::read_to_string(file)?;
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            let fail = |what: &str| {
                AppError::Data(format!(
                    "{}:{}: {what} in {line:?}",
                    file.display(),
                    i + 1
                ))
            };
            if fields.len() != 5 {
                return Err(fail("expected 5 tab-separated fields"));
            }
            let g = parse_smiles(fields[0]).map_err(|_| fail("unparseable SMILES"))?;
            let logp: f64 = fields[1].parse().map_err(|_| fail("bad logP"))?;
            let mr: f64 = fields[2].parse().map_err(|_| fail("bad MR"))?;
            if fields[3] == "-" && fields[4] == "-" {
                sets.baseline.push((g, logp, mr));
            } else {
                let c1: i64 = fields[3].parse().map_err(|_| fail("bad condition"))?;
                let c2: i64 = fields[4].parse().map_err(|_| fail("bad condition"))?;
                sets.conditioned.entry((c1, c2)).or_default().push((g, logp, mr));
            }
        }
    }
    Ok(sets)
}

/// Deterministic pick of at most `cap` indices, evenly strided.
fn stride_sample(n: usize, cap: usize) -> Vec<usize> {
    if n <= cap {
        return (0..n).collect();
    }
    (0..cap).map(|i| i * n / cap).collect()
}

fn fingerprint_rows(graphs: &[&MolGraph], cap: usize) -> Vec<Vec<f64>> {
    stride_sample(graphs.len(), cap)
        .into_iter()
        .map(|i| morgan_fp(graphs[i], 2, 1024).to_dense())
        .collect()
}

fn cmd_evaluate(
    config: &Path,
    generated: &Path,
    train_cache: Option<PathBuf>,
    out: Option<PathBuf>,
) -> Result<(), AppError> {
    let cfg = RunConfig::load(config)?;
    let cache_path = train_cache.unwrap_or_else(|| cfg.cache.clone());
    let out_dir = out.unwrap_or_else(|| cfg.out_dir.clone());
    let ds = Dataset::open(&cache_path)?;
    let sets = read_generated(generated)?;

    let training: HashSet<String> = (0..ds.len()).map(|i| ds.smiles(i).to_string()).collect();

    let mut metric_rows: Vec<(String, MetricsResult)> = Vec::new();
    let baseline_graphs: Vec<&MolGraph> = sets.baseline.iter().map(|(g, _, _)| g).collect();
    let cond_graphs: Vec<&MolGraph> = sets
        .conditioned
        .values()
        .flatten()
        .map(|(g, _, _)| g)
        .collect();
    if !sets.baseline.is_empty() {
        let graphs: Vec<MolGraph> = baseline_graphs.iter().map(|g| (*g).clone()).collect();
        metric_rows.push(("mgvae".into(), metrics(&graphs, &training)?));
    }
    if !cond_graphs.is_empty() {
        let graphs: Vec<MolGraph> = cond_graphs.iter().map(|g| (*g).clone()).collect();
        metric_rows.push(("mgcvae".into(), metrics(&graphs, &training)?));
    }

    // Table rows in report order: MR outer, logP inner.
    let table = if sets.baseline.is_empty() || sets.conditioned.is_empty() {
        ConditionTable::default()
    } else {
        let mut pairs: Vec<(i64, i64)> = sets.conditioned.keys().copied().collect();
        pairs.sort_by_key(|&(c1, c2)| (c2, c1));
        let per_pair: Vec<((i64, i64), Vec<(f64, f64)>)> = pairs
            .iter()
            .map(|&key| {
                let props = sets.conditioned[&key]
                    .iter()
                    .map(|&(_, lp, mr)| (lp, mr))
                    .collect();
                (key, props)
            })
            .collect();
        let baseline_props: Vec<(f64, f64)> =
            sets.baseline.iter().map(|&(_, lp, mr)| (lp, mr)).collect();
        condition_table(&per_pair, &baseline_props)?
    };

    // Pooled-fit PCA over fingerprints, projected back per source.
    const PCA_CAP: usize = 2000;
    let dataset_idx = stride_sample(ds.len(), PCA_CAP);
    let dataset_graphs: Vec<MolGraph> = dataset_idx
        .iter()
        .map(|&i| parse_smiles(ds.smiles(i)).expect("cached SMILES reparse"))
        .collect();
    let mut sources: Vec<(String, Vec<Vec<f64>>)> = Vec::new();
    sources.push((
        "dataset".into(),
        dataset_graphs
            .iter()
            .map(|g| morgan_fp(g, 2, 1024).to_dense())
            .collect(),
    ));
    if !baseline_graphs.is_empty() {
        sources.push(("mgvae".into(), fingerprint_rows(&baseline_graphs, PCA_CAP)));
    }
    if !cond_graphs.is_empty() {
        sources.push(("mgcvae".into(), fingerprint_rows(&cond_graphs, PCA_CAP)));
    }
    let total_rows: usize = sources.iter().map(|(_, rows)| rows.len()).sum();
    let mut pooled = Matrix::zeros(total_rows, 1024);
    let mut at = 0usize;
    let mut spans: Vec<(String, usize, usize)> = Vec::new();
    for (label, rows) in &sources {
        for row in rows {
            pooled.row_mut(at).copy_from_slice(row);
            at += 1;
        }
        spans.push((label.clone(), at - rows.len(), at));
    }
    let pca = pca2(&pooled)?;
    let projections: Vec<(String, Matrix)> = spans
        .iter()
        .map(|(label, lo, hi)| {
            let mut m = Matrix::zeros(hi - lo, 2);
            for (r, src) in (*lo..*hi).enumerate() {
                m.set(r, 0, pca.projection.at(src, 0));
                m.set(r, 1, pca.projection.at(src, 1));
            }
            (label.clone(), m)
        })
        .collect();

    // Property histograms per source; the dataset side uses the full cache.
    let mut histograms: Vec<Histogram> = Vec::new();
    let dataset_props: Vec<(f64, f64)> = (0..ds.len()).map(|i| ds.properties(i)).collect();
    histograms.push(histogram("dataset", &dataset_props));
    if !sets.baseline.is_empty() {
        let props: Vec<(f64, f64)> = sets.baseline.iter().map(|&(_, lp, mr)| (lp, mr)).collect();
        histograms.push(histogram("mgvae", &props));
    }
    if !cond_graphs.is_empty() {
        let props: Vec<(f64, f64)> = sets
            .conditioned
            .values()
            .flatten()
            .map(|&(_, lp, mr)| (lp, mr))
            .collect();
        histograms.push(histogram("mgcvae", &props));
    }

    emit_report(
        &ReportInputs {
            metrics: &metric_rows,
            table: &table,
            projections: &projections,
            histograms: &histograms,
        },
        &out_dir,
    )?;
    println!(
        "evaluated {} baseline + {} conditioned molecules -> {}",
        sets.baseline.len(),
        cond_graphs.len(),
        out_dir.display()
    );
    Ok(())
}

fn cmd_props(input: &Path) -> Result<(), AppError> {
    let text = std::fs::read_to_string(input)
        .map_err(|e| AppError::Data(format!("cannot read {}: {e}", input.display())))?;
    let table = ContributionTable::builtin();
    let mut out = String::new();
    for (i, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let smiles = trimmed.split('\t').next().unwrap();
        let g = parse_smiles(smiles).map_err(|e| {
            AppError::Data(format!("{}:{}: {e}", input.display(), i + 1))
        })?;
        let _ = writeln!(
            out,
            "{smiles}\t{}\t{}",
            crippen_logp(&g, table),
            crippen_mr(&g, table)
        );
    }
    print!("{out}");
    Ok(())
}
