use std::collections::HashSet;
use std::fmt;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;

use super::knn::ItemKnn;
use super::metrics::{average_precision, ndcg, precision_at};
use super::{Recommender, RecommenderTrainer};
use crate::corpus::{make_folds, vertical_split, ClickstreamSet, FoldPlan, ItemId};
use crate::error::{Error, Result};
use crate::format::sig6;
use crate::generator::{generate_set, MbrwConfig, MemoryDistribution};
use crate::rng::split_seed;
use crate::seqgraph::{build_cvs, build_ds, CountingMode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    /// Trained on the real training streams.
    Real,
    /// Trained on MBRW output generated from the training streams.
    Syn,
    /// Trained on pure random-jump output.
    Rnd,
}

impl ModelKind {
    pub const ALL: [ModelKind; 3] = [ModelKind::Real, ModelKind::Syn, ModelKind::Rnd];
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::Real => "real",
            ModelKind::Syn => "syn",
            ModelKind::Rnd => "rnd",
        })
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "real" => Ok(ModelKind::Real),
            "syn" => Ok(ModelKind::Syn),
            "rnd" => Ok(ModelKind::Rnd),
            _ => Err(Error::invalid(format!("unknown model `{s}`"))),
        }
    }
}

/// MAP, NDCG and precision@10 averaged over test users.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MetricSet {
    pub map: f64,
    pub ndcg: f64,
    pub p10: f64,
}

impl MetricSet {
    pub const NAMES: [&'static str; 3] = ["map", "ndcg", "p10"];

    pub fn values(&self) -> [f64; 3] {
        [self.map, self.ndcg, self.p10]
    }

    fn from_values(v: [f64; 3]) -> Self {
        MetricSet { map: v[0], ndcg: v[1], p10: v[2] }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UtilityConfig {
    pub folds: usize,
    pub knn_k: usize,
    pub prefix_fraction: f64,
    pub memory: MemoryDistribution,
    pub epsilon: f64,
    /// Jump probability of the random baseline.
    pub rnd_epsilon: f64,
    pub seed: u64,
    pub mode: CountingMode,
    /// Length of each recommendation list.
    pub top_n: usize,
    pub ndcg_cutoff: usize,
}

impl Default for UtilityConfig {
    fn default() -> Self {
        UtilityConfig {
            folds: 10,
            knn_k: 15,
            prefix_fraction: 0.5,
            memory: MemoryDistribution::RoundedGaussian { mean: 3.0, std: 2.0 },
            epsilon: 1e-4,
            rnd_epsilon: 1.0,
            seed: 0,
            mode: CountingMode::PerStream,
            top_n: 10,
            ndcg_cutoff: 10,
        }
    }
}

/// Everything one fold trains and evaluates on.
#[derive(Debug, Clone)]
pub struct FoldSets {
    pub fold: usize,
    pub train: ClickstreamSet,
    pub syn: ClickstreamSet,
    pub rnd: ClickstreamSet,
    pub query: ClickstreamSet,
    pub holdout: ClickstreamSet,
    /// Test streams shorter than 2 items, dropped before the vertical split.
    pub excluded_short: usize,
    pub dead_end_fallbacks: u64,
}

impl FoldSets {
    pub fn training_set(&self, kind: ModelKind) -> &ClickstreamSet {
        match kind {
            ModelKind::Real => &self.train,
            ModelKind::Syn => &self.syn,
            ModelKind::Rnd => &self.rnd,
        }
    }
}

/// Builds the training sets and query/holdout split of one fold.
///
/// The synthetic sets have `|train|` streams with lengths and start items
/// drawn from the training streams' empirical distributions. Only the
/// training streams feed DS/CVS.
pub fn build_fold_sets(corpus: &ClickstreamSet, plan: &FoldPlan, fold: usize, cfg: &UtilityConfig) -> Result<FoldSets> {
    let train = corpus.subset(&plan.train_indices(fold));
    let test = corpus.subset(&plan.test_indices(fold));
    let eligible: Vec<usize> = (0..test.len()).filter(|&i| test.streams()[i].len() >= 2).collect();
    let excluded_short = test.len() - eligible.len();
    if eligible.is_empty() {
        return Err(Error::invalid(format!("fold {fold} has no test stream with at least 2 items")));
    }
    let (query, holdout) = vertical_split(&test.subset(&eligible), cfg.prefix_fraction)?;

    let ds = build_ds(&train, cfg.mode)?;
    let cvs = build_cvs(&train, cfg.mode)?;
    let fold_seed = split_seed(cfg.seed, fold as u64);
    let base = MbrwConfig {
        memory: cfg.memory,
        length: train.empirical_lengths()?,
        epsilon: cfg.epsilon,
        stream_count: train.len(),
        start: train.empirical_starts()?,
        seed: split_seed(fold_seed, 0),
    };
    let syn = generate_set(&ds, &cvs, train.vocab(), &base)?;
    let rnd_cfg = MbrwConfig {
        epsilon: cfg.rnd_epsilon,
        seed: split_seed(fold_seed, 1),
        ..base
    };
    let rnd = generate_set(&ds, &cvs, train.vocab(), &rnd_cfg)?;

    Ok(FoldSets {
        fold,
        train,
        syn: syn.set,
        rnd: rnd.set,
        query,
        holdout,
        excluded_short,
        dead_end_fallbacks: syn.stats.dead_end_fallbacks,
    })
}

/// Mean metrics of `model` over the query/holdout pairs.
pub fn evaluate<M: Recommender>(model: &M, query: &ClickstreamSet, holdout: &ClickstreamSet, cfg: &UtilityConfig) -> Result<MetricSet> {
    let per_user = query
        .streams()
        .par_iter()
        .zip(holdout.streams().par_iter())
        .map(|(q, h)| {
            let relevant: HashSet<ItemId> = h.items().iter().copied().collect();
            let rec = model.recommend(q.items(), cfg.top_n);
            Ok([
                average_precision(&rec, &relevant)?,
                ndcg(&rec, &relevant, cfg.ndcg_cutoff)?,
                precision_at(&rec, &relevant, 10)?,
            ])
        })
        .collect::<Result<Vec<[f64; 3]>>>()?;
    let n = per_user.len() as f64;
    let mut sums = [0.0; 3];
    for v in &per_user {
        for k in 0..3 {
            sums[k] += v[k];
        }
    }
    Ok(MetricSet::from_values(sums.map(|s| s / n)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct FoldResult {
    pub fold: usize,
    pub real: MetricSet,
    pub syn: MetricSet,
    pub rnd: MetricSet,
    pub users: usize,
    pub excluded_short: usize,
    pub dead_end_fallbacks: u64,
}

impl FoldResult {
    pub fn metrics(&self, kind: ModelKind) -> MetricSet {
        match kind {
            ModelKind::Real => self.real,
            ModelKind::Syn => self.syn,
            ModelKind::Rnd => self.rnd,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UtilityReport {
    pub config: UtilityConfig,
    pub folds: Vec<FoldResult>,
}

impl UtilityReport {
    pub fn mean(&self, kind: ModelKind) -> MetricSet {
        let n = self.folds.len() as f64;
        let mut sums = [0.0; 3];
        for f in &self.folds {
            for (s, v) in sums.iter_mut().zip(f.metrics(kind).values()) {
                *s += v;
            }
        }
        MetricSet::from_values(sums.map(|s| s / n))
    }

    /// Population standard deviation across folds.
    pub fn std(&self, kind: ModelKind) -> MetricSet {
        let mean = self.mean(kind).values();
        let n = self.folds.len() as f64;
        let mut sums = [0.0; 3];
        for f in &self.folds {
            for (k, v) in f.metrics(kind).values().iter().enumerate() {
                sums[k] += (v - mean[k]) * (v - mean[k]);
            }
        }
        MetricSet::from_values(sums.map(|s| (s / n).sqrt()))
    }

    /// Folds where `a` scores strictly higher than `b` on metric index `metric` (0 map, 1 ndcg, 2 p10).
    pub fn wins(&self, metric: usize, a: ModelKind, b: ModelKind) -> usize {
        self.folds
            .iter()
            .filter(|f| f.metrics(a).values()[metric] > f.metrics(b).values()[metric])
            .count()
    }

    pub fn excluded_short(&self) -> usize {
        self.folds.iter().map(|f| f.excluded_short).sum()
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from("fold\tmodel\tmap\tndcg\tp10\n");
        for f in &self.folds {
            for kind in ModelKind::ALL {
                let m = f.metrics(kind);
                let _ = writeln!(out, "{}\t{kind}\t{}\t{}\t{}", f.fold, sig6(m.map), sig6(m.ndcg), sig6(m.p10));
            }
        }
        for kind in ModelKind::ALL {
            let (mean, std) = (self.mean(kind), self.std(kind));
            let _ = write!(out, "# summary model={kind}");
            for (k, name) in MetricSet::NAMES.iter().enumerate() {
                let _ = write!(out, " {name}_mean={} {name}_std={}", sig6(mean.values()[k]), sig6(std.values()[k]));
            }
            out.push('\n');
        }
        let c = &self.config;
        let _ = writeln!(
            out,
            "# folds={} knn_k={} similarity=cosine top_n={} ndcg_cutoff={} map_normalization=relevant_count prefix_fraction={} excluded_short_streams={}",
            self.folds.len(),
            c.knn_k,
            c.top_n,
            c.ndcg_cutoff,
            c.prefix_fraction,
            self.excluded_short()
        );
        out
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_tsv()).map_err(|e| Error::io(path, e))
    }

    /// Reads the per-fold rows of a report file as `(fold, model, metrics)`.
    pub fn parse_rows(text: &str, source: impl AsRef<Path>) -> Result<Vec<(usize, ModelKind, MetricSet)>> {
        let path = source.as_ref();
        let mut rows = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            if line.starts_with('#') || line.is_empty() || line.starts_with("fold\t") {
                continue;
            }
            let bad = || Error::parse(path, lineno + 1, "expected fold, model, map, ndcg, p10");
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 5 {
                return Err(bad());
            }
            let fold = fields[0].parse().map_err(|_| bad())?;
            let model = fields[1].parse().map_err(|_| bad())?;
            let mut v = [0.0; 3];
            for k in 0..3 {
                v[k] = fields[2 + k].parse().map_err(|_| bad())?;
            }
            rows.push((fold, model, MetricSet::from_values(v)));
        }
        Ok(rows)
    }
}

/// Cross-validated Real/Syn/Rnd comparison with a custom recommender.
pub fn run_utility_experiment_with<T: RecommenderTrainer>(
    corpus: &ClickstreamSet,
    cfg: &UtilityConfig,
    trainer: &T,
) -> Result<UtilityReport> {
    if !(0.0..=1.0).contains(&cfg.epsilon) || !(0.0..=1.0).contains(&cfg.rnd_epsilon) {
        return Err(Error::invalid("epsilon values must lie in [0, 1]"));
    }
    if cfg.top_n == 0 || cfg.ndcg_cutoff == 0 {
        return Err(Error::invalid("top_n and ndcg_cutoff must be >= 1"));
    }
    cfg.memory.validate()?;
    let plan = make_folds(corpus, cfg.folds, cfg.seed)?;
    let folds = (0..cfg.folds)
        .into_par_iter()
        .map(|fold| {
            let sets = build_fold_sets(corpus, &plan, fold, cfg)?;
            let mut metrics = [MetricSet::default(); 3];
            for (slot, kind) in metrics.iter_mut().zip(ModelKind::ALL) {
                let model = trainer.train(sets.training_set(kind))?;
                *slot = evaluate(&model, &sets.query, &sets.holdout, cfg)?;
            }
            Ok(FoldResult {
                fold,
                real: metrics[0],
                syn: metrics[1],
                rnd: metrics[2],
                users: sets.query.len(),
                excluded_short: sets.excluded_short,
                dead_end_fallbacks: sets.dead_end_fallbacks,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(UtilityReport { config: cfg.clone(), folds })
}

/// Cross-validated Real/Syn/Rnd comparison with item KNN (`cfg.knn_k` neighbors).
pub fn run_utility_experiment(corpus: &ClickstreamSet, cfg: &UtilityConfig) -> Result<UtilityReport> {
    run_utility_experiment_with(corpus, cfg, &ItemKnn { k: cfg.knn_k })
}
