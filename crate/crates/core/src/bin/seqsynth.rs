//! `seqsynth` command-line tool.
//!
//! Every subcommand writes its outputs plus a `<output>.manifest` file. A
//! manifest (or any `key=value` file) can be passed back with `--config`;
//! explicit flags override values from the file.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use seqsynth::corpus::{
    horizontal_split, load_clickstreams, load_clickstreams_with_vocab, make_folds, vertical_split, ClickstreamSet,
    LengthDistribution, StartDistribution, Vocabulary,
};
use seqsynth::fidelity::matrix_fidelity;
use seqsynth::format::sig6;
use seqsynth::generator::{generate_set_with_workers, MbrwConfig, MemoryDistribution};
use seqsynth::manifest::{config_args, RunManifest};
use seqsynth::recsys::{run_utility_experiment, MetricSet, ModelKind, UtilityConfig};
use seqsynth::seqgraph::{
    build_cvs, build_ds, k_anonymity_filter, load_cvs, load_ds, load_matrix, CountingMode, MatrixKind,
    SparseCountMatrix,
};

#[derive(Parser)]
#[command(name = "seqsynth", version, about = "Synthetic clickstreams from memory biased random walks")]
#[command(args_override_self = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build DS and CVS count matrices from a clickstream corpus.
    Stats(StatsArgs),
    /// Drop matrix entries below k (k-anonymity filtering).
    Filter(FilterArgs),
    /// Generate synthetic clickstreams from DS/CVS matrices.
    Generate(GenerateArgs),
    /// Top-z rank correlation between a real matrix and synthetic data.
    Fidelity(FidelityArgs),
    /// Cross-validated recommender comparison of real, synthetic and random training data.
    Utility(UtilityArgs),
    /// Horizontal/vertical corpus splits and fold plans.
    Split(SplitArgs),
}

#[derive(Args)]
struct Common {
    /// key=value file (or a previous run's manifest) presetting flags.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    #[value(name = "per_stream", alias = "per-stream")]
    PerStream,
    #[value(name = "per_occurrence", alias = "per-occurrence")]
    PerOccurrence,
}

impl From<ModeArg> for CountingMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::PerStream => CountingMode::PerStream,
            ModeArg::PerOccurrence => CountingMode::PerOccurrence,
        }
    }
}

#[derive(Args)]
struct StatsArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    corpus: PathBuf,
    /// Output prefix; writes PREFIX.ds.tsv, PREFIX.cvs.tsv and PREFIX.vocab.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "per_stream")]
    mode: ModeArg,
}

#[derive(Args)]
struct FilterArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    matrix: PathBuf,
    /// Entries with count below k are removed.
    #[arg(long)]
    k: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    /// m = 5, Geometric(0.1) lengths, K = 20000.
    Videolectures,
}

#[derive(Args)]
struct GenerateArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    ds: PathBuf,
    #[arg(long)]
    cvs: PathBuf,
    #[arg(long)]
    vocab: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum)]
    preset: Option<Preset>,
    /// Real corpus supplying empirical start items and lengths.
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// const:M or normal:MEAN,STD [default: normal:3,2]
    #[arg(long)]
    memory: Option<String>,
    /// const:L, geometric:P, poisson:L, negbin:R,P, normal:MEAN,STD, empirical:LEN=W,... or `empirical` (needs --corpus)
    #[arg(long)]
    length: Option<String>,
    #[arg(long)]
    epsilon: Option<f64>,
    /// Number of streams K.
    #[arg(long = "stream-count", alias = "count")]
    stream_count: Option<usize>,
    /// uniform, empirical (needs --corpus) or item:LABEL
    #[arg(long)]
    start: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, env = "SEQSYNTH_WORKERS")]
    workers: Option<usize>,
}

#[derive(Args)]
struct FidelityArgs {
    #[command(flatten)]
    common: Common,
    /// Real DS or CVS matrix.
    #[arg(long)]
    real: PathBuf,
    /// Synthetic corpus; its matrix is built with the real matrix's kind and mode.
    #[arg(long, conflicts_with = "syn_matrix", required_unless_present = "syn_matrix")]
    syn_corpus: Option<PathBuf>,
    #[arg(long)]
    syn_matrix: Option<PathBuf>,
    /// Vocabulary of the real matrix (required with --syn-corpus).
    #[arg(long)]
    vocab: Option<PathBuf>,
    #[arg(long, default_value_t = 100)]
    z: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct UtilityArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 10)]
    folds: usize,
    /// Fraction of each test stream used as the query prefix.
    #[arg(long, default_value_t = 0.5)]
    prefix: f64,
    #[arg(long, default_value_t = 15)]
    knn_k: usize,
    #[arg(long, default_value = "normal:3,2")]
    memory: String,
    #[arg(long, default_value_t = 0.0001)]
    epsilon: f64,
    #[arg(long, default_value_t = 1.0)]
    rnd_epsilon: f64,
    #[arg(long, default_value_t = 10)]
    top_n: usize,
    #[arg(long, default_value_t = 10)]
    ndcg_cutoff: usize,
    #[arg(long, value_enum, default_value = "per_stream")]
    mode: ModeArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, env = "SEQSYNTH_WORKERS")]
    workers: Option<usize>,
}

#[derive(Args)]
struct SplitArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    corpus: PathBuf,
    /// Output prefix.
    #[arg(long)]
    out: PathBuf,
    /// Test fraction of a horizontal split (PREFIX.train.txt, PREFIX.test.txt).
    #[arg(long)]
    horizontal: Option<f64>,
    /// Prefix fraction of a vertical split (PREFIX.query.txt, PREFIX.holdout.txt).
    /// Applied to the test set when combined with --horizontal.
    #[arg(long)]
    vertical: Option<f64>,
    /// Also write a fold plan with this many folds (PREFIX.folds.tsv).
    #[arg(long)]
    folds: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

/// Files written by one command; removed again unless the command succeeds.
struct Outputs {
    written: Vec<PathBuf>,
    committed: bool,
}

impl Outputs {
    fn new() -> Self {
        Outputs { written: Vec::new(), committed: false }
    }

    fn write(&mut self, path: &Path, contents: &str) -> Result<()> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        }
        let tmp = tmp_path(path);
        fs::write(&tmp, contents).with_context(|| format!("writing {}", path.display()))?;
        fs::rename(&tmp, path).with_context(|| format!("writing {}", path.display()))?;
        self.written.push(path.to_path_buf());
        Ok(())
    }

    fn finish(mut self, manifest_for: &Path, mut manifest: RunManifest, started: Instant) -> Result<()> {
        manifest.set("run.duration_ms", started.elapsed().as_millis());
        let path = with_suffix(manifest_for, ".manifest");
        self.write(&path, &manifest.to_text())?;
        self.committed = true;
        Ok(())
    }
}

impl Drop for Outputs {
    fn drop(&mut self) {
        if !self.committed {
            for p in &self.written {
                let _ = fs::remove_file(p);
            }
        }
    }
}

fn tmp_path(path: &Path) -> PathBuf {
    with_suffix(path, &format!(".tmp{}", std::process::id()))
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s: OsString = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn flag_path(p: &Path) -> String {
    p.display().to_string()
}

fn worker_pool(workers: Option<usize>) -> Result<rayon::ThreadPool> {
    let n = workers
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
        .max(1);
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build()
        .map_err(|e| anyhow!("cannot start worker pool: {e}"))
}

fn cmd_stats(args: StatsArgs, argv: &str) -> Result<()> {
    let started = Instant::now();
    let corpus = load_clickstreams(&args.corpus)?;
    let mode = CountingMode::from(args.mode);
    let ds = build_ds(&corpus, mode)?;
    let cvs = build_cvs(&corpus, mode)?;

    let ds_path = with_suffix(&args.out, ".ds.tsv");
    let cvs_path = with_suffix(&args.out, ".cvs.tsv");
    let vocab_path = with_suffix(&args.out, ".vocab");
    let mut out = Outputs::new();
    out.write(&ds_path, &ds.to_tsv())?;
    out.write(&cvs_path, &cvs.to_tsv())?;
    out.write(&vocab_path, &vocab_text(corpus.vocab()))?;

    let mut m = RunManifest::new("stats");
    m.set("run.argv", argv);
    m.flag("corpus", flag_path(&args.corpus));
    m.flag("out", flag_path(&args.out));
    m.flag("mode", mode);
    m.input("corpus", &args.corpus)?;
    m.stat("streams", corpus.len());
    m.stat("items", corpus.item_count());
    m.stat("ds_nnz", ds.nnz());
    m.stat("cvs_nnz", cvs.nnz());
    out.finish(&args.out, m, started)?;

    println!(
        "{} streams, {} items; DS {} entries -> {}; CVS {} entries -> {}",
        corpus.len(),
        corpus.item_count(),
        ds.nnz(),
        ds_path.display(),
        cvs.nnz(),
        cvs_path.display()
    );
    Ok(())
}

fn vocab_text(vocab: &Vocabulary) -> String {
    vocab.labels().iter().map(|l| format!("{l}\n")).collect()
}

fn cmd_filter(args: FilterArgs, argv: &str) -> Result<()> {
    let started = Instant::now();
    if args.k == 0 {
        bail!("--k must be >= 1");
    }
    let matrix = load_matrix(&args.matrix)?;
    let filtered = k_anonymity_filter(&matrix, args.k);
    let mut out = Outputs::new();
    out.write(&args.out, &filtered.to_tsv())?;

    let mut m = RunManifest::new("filter");
    m.set("run.argv", argv);
    m.flag("matrix", flag_path(&args.matrix));
    m.flag("k", args.k);
    m.flag("out", flag_path(&args.out));
    m.input("matrix", &args.matrix)?;
    m.set("matrix.kind", matrix.kind());
    m.set("matrix.mode", matrix.mode());
    m.stat("entries_in", matrix.nnz());
    m.stat("entries_out", filtered.nnz());
    out.finish(&args.out, m, started)?;

    println!(
        "kept {} of {} entries with count >= {} -> {}",
        filtered.nnz(),
        matrix.nnz(),
        args.k,
        args.out.display()
    );
    Ok(())
}

fn cmd_generate(args: GenerateArgs, argv: &str) -> Result<()> {
    let started = Instant::now();
    let ds = load_ds(&args.ds)?;
    let cvs = load_cvs(&args.cvs)?;
    let vocab = Arc::new(Vocabulary::load(&args.vocab)?);
    let n = vocab.len();
    if ds.n() != n || cvs.n() != n {
        bail!("vocabulary has {n} labels but DS has {} and CVS {} items", ds.n(), cvs.n());
    }
    let corpus: Option<ClickstreamSet> = args
        .corpus
        .as_ref()
        .map(|p| load_clickstreams_with_vocab(p, &vocab))
        .transpose()?;

    let preset = args.preset.map(|Preset::Videolectures| {
        (MemoryDistribution::Constant(5), LengthDistribution::Geometric { p: 0.1 }, 20_000usize)
    });
    let memory = match &args.memory {
        Some(s) => s.parse()?,
        None => preset.as_ref().map_or(MemoryDistribution::RoundedGaussian { mean: 3.0, std: 2.0 }, |p| p.0),
    };
    let (length, length_flag) = match (&args.length, &preset, &corpus) {
        (Some(s), _, _) if s == "empirical" => {
            let c = corpus.as_ref().context("--length empirical needs --corpus")?;
            (c.empirical_lengths()?, "empirical".to_string())
        }
        (Some(s), _, _) => {
            let d: LengthDistribution = s.parse()?;
            let flag = d.to_string();
            (d, flag)
        }
        (None, Some(p), _) => (p.1.clone(), p.1.to_string()),
        (None, None, Some(c)) => (c.empirical_lengths()?, "empirical".to_string()),
        (None, None, None) => {
            let d = LengthDistribution::RoundedGaussian { mean: 9.0, std: 2.0 };
            let flag = d.to_string();
            (d, flag)
        }
    };
    let stream_count = args
        .stream_count
        .or(preset.as_ref().map(|p| p.2))
        .or(corpus.as_ref().map(ClickstreamSet::len))
        .unwrap_or(10_000);
    let start_flag = args
        .start
        .clone()
        .unwrap_or_else(|| if corpus.is_some() { "empirical" } else { "uniform" }.to_string());
    let start = match start_flag.as_str() {
        "uniform" => StartDistribution::uniform(n)?,
        "empirical" => corpus.as_ref().context("--start empirical needs --corpus")?.empirical_starts()?,
        other => match other.strip_prefix("item:") {
            Some(label) => StartDistribution::point(
                vocab.id(label).ok_or_else(|| anyhow!("unknown start item `{label}`"))?,
                n,
            )?,
            None => bail!("--start must be uniform, empirical or item:LABEL, got `{other}`"),
        },
    };
    let config = MbrwConfig {
        memory,
        length,
        epsilon: args.epsilon.unwrap_or(1e-4),
        stream_count,
        start,
        seed: args.seed,
    };
    let pool = worker_pool(args.workers)?;
    let workers = pool.current_num_threads();
    let output = generate_set_with_workers(&ds, &cvs, &vocab, &config, workers)?;

    let mut out = Outputs::new();
    out.write(&args.out, &output.set.to_text())?;

    let mut m = RunManifest::new("generate");
    m.set("run.argv", argv);
    m.flag("ds", flag_path(&args.ds));
    m.flag("cvs", flag_path(&args.cvs));
    m.flag("vocab", flag_path(&args.vocab));
    m.flag("out", flag_path(&args.out));
    if let Some(c) = &args.corpus {
        m.flag("corpus", flag_path(c));
    }
    m.flag("memory", config.memory);
    m.flag("length", &length_flag);
    m.flag("epsilon", config.epsilon);
    m.flag("stream_count", config.stream_count);
    m.flag("start", &start_flag);
    m.flag("seed", config.seed);
    m.input("ds", &args.ds)?;
    m.input("cvs", &args.cvs)?;
    m.input("vocab", &args.vocab)?;
    if let Some(c) = &args.corpus {
        m.input("corpus", c)?;
    }
    m.set("matrix.mode", ds.mode());
    m.set("run.workers", workers);
    m.stat("dead_end_fallbacks", output.stats.dead_end_fallbacks);
    m.stat("zero_memory_walks", output.stats.zero_memory_walks);
    m.stat("memory_zero_possible", config.memory.allows_zero());
    m.stat("items_emitted", output.stats.items_emitted);
    out.finish(&args.out, m, started)?;

    println!(
        "generated {} streams ({} items, {} dead-end jumps) -> {}",
        output.set.len(),
        output.stats.items_emitted,
        output.stats.dead_end_fallbacks,
        args.out.display()
    );
    Ok(())
}

fn cmd_fidelity(args: FidelityArgs, argv: &str) -> Result<()> {
    let started = Instant::now();
    let real = load_matrix(&args.real)?;
    let syn: SparseCountMatrix = match (&args.syn_corpus, &args.syn_matrix) {
        (Some(corpus), None) => {
            let vocab_path = args.vocab.as_ref().context("--syn-corpus needs --vocab")?;
            let vocab = Arc::new(Vocabulary::load(vocab_path)?);
            let set = load_clickstreams_with_vocab(corpus, &vocab)?;
            match real.kind() {
                MatrixKind::Ds => build_ds(&set, real.mode())?.into_inner(),
                MatrixKind::Cvs => build_cvs(&set, real.mode())?.into_inner(),
            }
        }
        (None, Some(path)) => {
            let m = load_matrix(path)?;
            if m.kind() != real.kind() {
                bail!("real matrix is {} but synthetic matrix is {}", real.kind(), m.kind());
            }
            m
        }
        _ => bail!("give exactly one of --syn-corpus or --syn-matrix"),
    };
    let report = matrix_fidelity(&real, &syn, args.z)?;
    let mut out = Outputs::new();
    out.write(&args.out, &report.to_tsv())?;

    let mut m = RunManifest::new("fidelity");
    m.set("run.argv", argv);
    m.flag("real", flag_path(&args.real));
    if let Some(p) = &args.syn_corpus {
        m.flag("syn_corpus", flag_path(p));
        m.input("syn_corpus", p)?;
    }
    if let Some(p) = &args.syn_matrix {
        m.flag("syn_matrix", flag_path(p));
        m.input("syn_matrix", p)?;
    }
    if let Some(p) = &args.vocab {
        m.flag("vocab", flag_path(p));
        m.input("vocab", p)?;
    }
    m.flag("z", args.z);
    m.flag("out", flag_path(&args.out));
    m.input("real", &args.real)?;
    m.set("matrix.kind", real.kind());
    m.set("matrix.mode", real.mode());
    m.stat("avg", report.avg);
    m.stat("std", report.std);
    m.stat("skipped", report.skipped);
    out.finish(&args.out, m, started)?;

    println!(
        "{} z={}: avg={} std={} ({} rows, {} skipped)",
        real.kind(),
        args.z,
        sig6(report.avg),
        sig6(report.std),
        report.evaluated(),
        report.skipped
    );
    Ok(())
}

fn cmd_utility(args: UtilityArgs, argv: &str) -> Result<()> {
    let started = Instant::now();
    let corpus = load_clickstreams(&args.corpus)?;
    let cfg = UtilityConfig {
        folds: args.folds,
        knn_k: args.knn_k,
        prefix_fraction: args.prefix,
        memory: args.memory.parse()?,
        epsilon: args.epsilon,
        rnd_epsilon: args.rnd_epsilon,
        seed: args.seed,
        mode: args.mode.into(),
        top_n: args.top_n,
        ndcg_cutoff: args.ndcg_cutoff,
    };
    let pool = worker_pool(args.workers)?;
    let report = pool.install(|| run_utility_experiment(&corpus, &cfg))?;
    let mut out = Outputs::new();
    out.write(&args.out, &report.to_tsv())?;

    let mut m = RunManifest::new("utility");
    m.set("run.argv", argv);
    m.flag("corpus", flag_path(&args.corpus));
    m.flag("out", flag_path(&args.out));
    m.flag("folds", cfg.folds);
    m.flag("prefix", cfg.prefix_fraction);
    m.flag("knn_k", cfg.knn_k);
    m.flag("memory", cfg.memory);
    m.flag("epsilon", cfg.epsilon);
    m.flag("rnd_epsilon", cfg.rnd_epsilon);
    m.flag("top_n", cfg.top_n);
    m.flag("ndcg_cutoff", cfg.ndcg_cutoff);
    m.flag("mode", cfg.mode);
    m.flag("seed", cfg.seed);
    m.input("corpus", &args.corpus)?;
    m.set("run.workers", pool.current_num_threads());
    m.stat("excluded_short_streams", report.excluded_short());
    m.stat(
        "dead_end_fallbacks",
        report.folds.iter().map(|f| f.dead_end_fallbacks).sum::<u64>(),
    );
    out.finish(&args.out, m, started)?;

    for kind in ModelKind::ALL {
        let (mean, std) = (report.mean(kind), report.std(kind));
        let cells: Vec<String> = MetricSet::NAMES
            .iter()
            .enumerate()
            .map(|(k, name)| format!("{name}={}±{}", sig6(mean.values()[k]), sig6(std.values()[k])))
            .collect();
        println!("{kind:<4} {}", cells.join("  "));
    }
    let folds = report.folds.len();
    for (k, name) in MetricSet::NAMES.iter().enumerate() {
        println!(
            "{name}: syn beats rnd in {}/{folds} folds, real beats syn in {}/{folds} folds",
            report.wins(k, ModelKind::Syn, ModelKind::Rnd),
            report.wins(k, ModelKind::Real, ModelKind::Syn)
        );
    }
    Ok(())
}

fn cmd_split(args: SplitArgs, argv: &str) -> Result<()> {
    let started = Instant::now();
    if args.horizontal.is_none() && args.vertical.is_none() && args.folds.is_none() {
        bail!("give at least one of --horizontal, --vertical or --folds");
    }
    let corpus = load_clickstreams(&args.corpus)?;
    let mut out = Outputs::new();
    let mut m = RunManifest::new("split");
    m.set("run.argv", argv);
    m.flag("corpus", flag_path(&args.corpus));
    m.flag("out", flag_path(&args.out));
    m.flag("seed", args.seed);
    m.input("corpus", &args.corpus)?;

    let mut to_vertical = corpus.clone();
    if let Some(fraction) = args.horizontal {
        let (train, test) = horizontal_split(&corpus, fraction, args.seed)?;
        out.write(&with_suffix(&args.out, ".train.txt"), &train.to_text())?;
        out.write(&with_suffix(&args.out, ".test.txt"), &test.to_text())?;
        m.flag("horizontal", fraction);
        m.stat("train_streams", train.len());
        m.stat("test_streams", test.len());
        println!("horizontal: {} train, {} test", train.len(), test.len());
        to_vertical = test;
    }
    if let Some(fraction) = args.vertical {
        let (query, holdout) = vertical_split(&to_vertical, fraction)?;
        out.write(&with_suffix(&args.out, ".query.txt"), &query.to_text())?;
        out.write(&with_suffix(&args.out, ".holdout.txt"), &holdout.to_text())?;
        m.flag("vertical", fraction);
        println!("vertical: {} query/holdout pairs", query.len());
    }
    if let Some(folds) = args.folds {
        let plan = make_folds(&corpus, folds, args.seed)?;
        out.write(&with_suffix(&args.out, ".folds.tsv"), &plan.to_tsv())?;
        m.flag("folds", folds);
        println!("folds: {:?}", plan.fold_sizes());
    }
    out.finish(&args.out, m, started)
}

/// Splices flags from `--config FILE` in front of the explicit flags, so
/// explicit flags win.
fn expand_config(argv: Vec<String>) -> Result<Vec<String>> {
    let Some(pos) = argv.iter().position(|a| a == "--config" || a.starts_with("--config=")) else {
        return Ok(argv);
    };
    let path = match argv[pos].strip_prefix("--config=") {
        Some(p) => PathBuf::from(p),
        None => PathBuf::from(argv.get(pos + 1).context("--config needs a file")?),
    };
    splice(argv, &path)
}

fn splice(argv: Vec<String>, path: &Path) -> Result<Vec<String>> {
    let sub = argv.get(1).context("missing subcommand")?.clone();
    let preset = config_args(path, &sub)?;
    let mut out = vec![argv[0].clone(), sub];
    out.extend(preset);
    out.extend(argv[2..].iter().cloned());
    Ok(out)
}

fn run() -> Result<()> {
    let argv: Vec<String> = std::env::args().collect();
    let joined = argv[1..].join(" ");
    let argv = expand_config(argv)?;
    let cli = Cli::try_parse_from(&argv).unwrap_or_else(|e| e.exit());
    match cli.command {
        Command::Stats(a) => cmd_stats(a, &joined),
        Command::Filter(a) => cmd_filter(a, &joined),
        Command::Generate(a) => cmd_generate(a, &joined),
        Command::Fidelity(a) => cmd_fidelity(a, &joined),
        Command::Utility(a) => cmd_utility(a, &joined),
        Command::Split(a) => cmd_split(a, &joined),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            // library errors already embed their source; skip repeated causes
            let mut msg = e.to_string();
            for cause in e.chain().skip(1) {
                let c = cause.to_string();
                if !msg.contains(&c) {
                    msg = format!("{msg}: {c}");
                }
            }
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}
