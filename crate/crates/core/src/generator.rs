//! Memory biased random walk (MBRW) with random jumps.
//!
//! From the current item `c` with the `m` items before it `w_1..w_m` (most
//! recent first), candidate `j` gets weight
//!
//! ```text
//! DS[j, c] * CVS[j, w_1] * ... * CVS[j, w_m]
//! ```
//!
//! normalized over all candidates. With probability `epsilon` the walker
//! instead jumps to a uniformly random item, and it always jumps when every
//! candidate weight is zero.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::Rng as _;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::corpus::dist::{clamp_count, parse_params};
use crate::corpus::{Clickstream, ClickstreamSet, ItemId, LengthDistribution, StartDistribution, Vocabulary};
use crate::error::{Error, Result};
use crate::rng::{rng_from_seed, split_seed, Rng};
use crate::seqgraph::{CvsMatrix, DsMatrix};

/// Distribution of the memory length `m`, clamped to >= 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MemoryDistribution {
    Constant(u32),
    RoundedGaussian { mean: f64, std: f64 },
}

impl MemoryDistribution {
    pub fn validate(&self) -> Result<()> {
        match *self {
            MemoryDistribution::Constant(_) => Ok(()),
            MemoryDistribution::RoundedGaussian { mean, std } => {
                if mean.is_finite() && std.is_finite() && std >= 0.0 {
                    Ok(())
                } else {
                    Err(Error::invalid(format!("invalid memory distribution `{self}`")))
                }
            }
        }
    }

    pub fn sample<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        match *self {
            MemoryDistribution::Constant(m) => m,
            MemoryDistribution::RoundedGaussian { mean, std } => {
                clamp_count(Normal::new(mean, std).expect("validated").sample(rng).round(), 0)
            }
        }
    }

    /// True if a zero memory (plain first-order chain) can be drawn.
    pub fn allows_zero(&self) -> bool {
        match *self {
            MemoryDistribution::Constant(m) => m == 0,
            MemoryDistribution::RoundedGaussian { mean, std } => std > 0.0 || mean < 0.5,
        }
    }
}

impl fmt::Display for MemoryDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MemoryDistribution::Constant(m) => write!(f, "const:{m}"),
            MemoryDistribution::RoundedGaussian { mean, std } => write!(f, "normal:{mean},{std}"),
        }
    }
}

impl FromStr for MemoryDistribution {
    type Err = Error;

    /// `const:m` or `normal:mean,std`.
    fn from_str(s: &str) -> Result<Self> {
        let (kind, params) = s
            .split_once(':')
            .ok_or_else(|| Error::invalid(format!("memory distribution `{s}` is missing `kind:`")))?;
        let dist = match kind {
            "const" => MemoryDistribution::Constant(
                params
                    .trim()
                    .parse()
                    .map_err(|_| Error::invalid(format!("bad constant memory `{params}`")))?,
            ),
            "normal" => {
                let v = parse_params(params, 2, kind)?;
                MemoryDistribution::RoundedGaussian { mean: v[0], std: v[1] }
            }
            other => return Err(Error::invalid(format!("unknown memory distribution `{other}`"))),
        };
        dist.validate()?;
        Ok(dist)
    }
}

/// Every knob of a generation run.
#[derive(Debug, Clone, PartialEq)]
pub struct MbrwConfig {
    pub memory: MemoryDistribution,
    pub length: LengthDistribution,
    /// Probability of a uniform random jump at each hop.
    pub epsilon: f64,
    /// Number of clickstreams to generate (K).
    pub stream_count: usize,
    pub start: StartDistribution,
    pub seed: u64,
}

impl MbrwConfig {
    pub fn validate(&self, n: usize) -> Result<()> {
        if !(0.0..=1.0).contains(&self.epsilon) {
            return Err(Error::invalid(format!("epsilon must lie in [0, 1], got {}", self.epsilon)));
        }
        if self.stream_count == 0 {
            return Err(Error::invalid("stream count must be >= 1"));
        }
        if self.start.item_count() != n {
            return Err(Error::DimensionMismatch(format!(
                "start distribution covers {} items, matrices have {n}",
                self.start.item_count()
            )));
        }
        self.memory.validate()?;
        self.length.validate()
    }
}

/// A probability vector over all items.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionDistribution {
    probs: Vec<f64>,
}

impl TransitionDistribution {
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn probability(&self, item: ItemId) -> f64 {
        self.probs[item as usize]
    }

    pub fn uniform(n: usize) -> Self {
        TransitionDistribution { probs: vec![1.0 / n as f64; n] }
    }

    pub fn total_variation(&self, other: &TransitionDistribution) -> f64 {
        0.5 * self
            .probs
            .iter()
            .zip(&other.probs)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
    }
}

/// Result of evaluating the walk kernel at one state.
#[derive(Debug, Clone, PartialEq)]
pub enum KernelOutcome {
    Distribution(TransitionDistribution),
    /// Every candidate has zero weight.
    Degenerate,
}

fn check_dims(ds: &DsMatrix, cvs: &CvsMatrix) -> Result<()> {
    if ds.n() != cvs.n() {
        return Err(Error::DimensionMismatch(format!(
            "DS has {} items, CVS has {}",
            ds.n(),
            cvs.n()
        )));
    }
    if ds.n() == 0 {
        return Err(Error::invalid("matrices have no items"));
    }
    Ok(())
}

/// Sparse kernel evaluation shared by sampling and inspection.
struct Kernel<'a> {
    ds: &'a DsMatrix,
    cvs: &'a CvsMatrix,
    candidates: Vec<ItemId>,
    weights: Vec<f64>,
}

impl<'a> Kernel<'a> {
    fn new(ds: &'a DsMatrix, cvs: &'a CvsMatrix) -> Self {
        Kernel { ds, cvs, candidates: Vec::new(), weights: Vec::new() }
    }

    /// Fills `candidates`/`weights` with unnormalized (rescaled) weights.
    /// Returns false on a dead end.
    fn evaluate(&mut self, history: &[ItemId], memory: u32) -> bool {
        let current = history[history.len() - 1];
        let (rows, counts) = self.ds.column(current);
        self.candidates.clear();
        self.weights.clear();
        let Some(&max_ds) = counts.iter().max() else {
            return false;
        };
        self.candidates.extend_from_slice(rows);
        self.weights.extend(counts.iter().map(|&c| c as f64 / max_ds as f64));

        let window = (memory as usize).min(history.len() - 1);
        for back in 0..window {
            let w = history[history.len() - 2 - back];
            let mut max = 0.0f64;
            for (j, weight) in self.candidates.iter().zip(self.weights.iter_mut()) {
                if *weight > 0.0 {
                    *weight *= self.cvs.get(*j, w) as f64;
                    max = max.max(*weight);
                }
            }
            if max <= 0.0 {
                return false;
            }
            // common rescaling keeps long products away from overflow
            for weight in &mut self.weights {
                *weight /= max;
            }
        }
        true
    }

    fn sample<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> ItemId {
        let total: f64 = self.weights.iter().sum();
        let mut u = rng.random::<f64>() * total;
        let mut last_positive = 0;
        for (i, &w) in self.weights.iter().enumerate() {
            if w > 0.0 {
                if u < w {
                    return self.candidates[i];
                }
                u -= w;
                last_positive = i;
            }
        }
        self.candidates[last_positive]
    }
}

/// Next-item distribution of the walk before epsilon mixing.
///
/// The window is the `min(m, len(history) - 1)` items preceding the last one,
/// so early hops reduce to the first-order DS chain.
pub fn mbrw_kernel(ds: &DsMatrix, cvs: &CvsMatrix, history: &[ItemId], memory: u32) -> Result<KernelOutcome> {
    check_dims(ds, cvs)?;
    if history.is_empty() {
        return Err(Error::invalid("history must be nonempty"));
    }
    let n = ds.n();
    if let Some(&bad) = history.iter().find(|&&id| id as usize >= n) {
        return Err(Error::ItemOutOfRange { id: bad as usize, n });
    }
    let mut kernel = Kernel::new(ds, cvs);
    if !kernel.evaluate(history, memory) {
        return Ok(KernelOutcome::Degenerate);
    }
    let total: f64 = kernel.weights.iter().sum();
    let mut probs = vec![0.0; n];
    for (&j, &w) in kernel.candidates.iter().zip(&kernel.weights) {
        probs[j as usize] = w / total;
    }
    Ok(KernelOutcome::Distribution(TransitionDistribution { probs }))
}

/// `(1 - epsilon) * P + epsilon * Uniform(n)`; a degenerate kernel gives `Uniform(n)`.
pub fn mix_epsilon(kernel: KernelOutcome, epsilon: f64, n: usize) -> Result<TransitionDistribution> {
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::invalid(format!("epsilon must lie in [0, 1], got {epsilon}")));
    }
    match kernel {
        KernelOutcome::Degenerate => Ok(TransitionDistribution::uniform(n)),
        KernelOutcome::Distribution(p) => {
            if p.probs.len() != n {
                return Err(Error::DimensionMismatch(format!(
                    "distribution over {} items, expected {n}",
                    p.probs.len()
                )));
            }
            let jump = epsilon / n as f64;
            let probs = p.probs.iter().map(|&x| (1.0 - epsilon) * x + jump).collect();
            Ok(TransitionDistribution { probs })
        }
    }
}

/// Counters gathered while generating.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct GenerationStats {
    /// Hops where the kernel had no positive candidate and a uniform jump was forced.
    pub dead_end_fallbacks: u64,
    /// Walks that drew memory length zero.
    pub zero_memory_walks: u64,
    pub items_emitted: u64,
}

impl GenerationStats {
    fn merge(mut self, other: GenerationStats) -> GenerationStats {
        self.dead_end_fallbacks += other.dead_end_fallbacks;
        self.zero_memory_walks += other.zero_memory_walks;
        self.items_emitted += other.items_emitted;
        self
    }
}

fn walk(ds: &DsMatrix, cvs: &CvsMatrix, config: &MbrwConfig, walk_seed: u64) -> (Vec<ItemId>, GenerationStats) {
    let n = ds.n();
    let mut rng: Rng = rng_from_seed(walk_seed);
    let memory = config.memory.sample(&mut rng);
    let length = config.length.sample(&mut rng) as usize;
    let mut history = Vec::with_capacity(length);
    history.push(config.start.sample(&mut rng));

    let mut stats = GenerationStats {
        zero_memory_walks: u64::from(memory == 0),
        ..Default::default()
    };
    let mut kernel = Kernel::new(ds, cvs);
    for _ in 1..length {
        let jump = config.epsilon > 0.0 && rng.random::<f64>() < config.epsilon;
        let next = if jump {
            rng.random_range(0..n) as ItemId
        } else if kernel.evaluate(&history, memory) {
            kernel.sample(&mut rng)
        } else {
            stats.dead_end_fallbacks += 1;
            rng.random_range(0..n) as ItemId
        };
        history.push(next);
    }
    stats.items_emitted = history.len() as u64;
    (history, stats)
}

/// One synthetic clickstream, fully determined by `walk_seed`.
pub fn generate_clickstream(ds: &DsMatrix, cvs: &CvsMatrix, config: &MbrwConfig, walk_seed: u64) -> Result<Clickstream> {
    check_dims(ds, cvs)?;
    config.validate(ds.n())?;
    Clickstream::new(walk(ds, cvs, config, walk_seed).0)
}

/// Synthetic set plus generation counters.
#[derive(Debug, Clone)]
pub struct GenerationOutput {
    pub set: ClickstreamSet,
    pub stats: GenerationStats,
}

/// Generates `config.stream_count` clickstreams on the current rayon pool.
///
/// Stream `i` uses `split_seed(config.seed, i)`, so the output does not
/// depend on the number of worker threads.
pub fn generate_set(
    ds: &DsMatrix,
    cvs: &CvsMatrix,
    vocab: &Arc<Vocabulary>,
    config: &MbrwConfig,
) -> Result<GenerationOutput> {
    check_dims(ds, cvs)?;
    config.validate(ds.n())?;
    if vocab.len() != ds.n() {
        return Err(Error::DimensionMismatch(format!(
            "vocabulary has {} labels, matrices have {} items",
            vocab.len(),
            ds.n()
        )));
    }
    let results: Vec<(Vec<ItemId>, GenerationStats)> = (0..config.stream_count as u64)
        .into_par_iter()
        .map(|i| walk(ds, cvs, config, split_seed(config.seed, i)))
        .collect();
    let mut stats = GenerationStats::default();
    let mut streams = Vec::with_capacity(results.len());
    for (items, s) in results {
        stats = stats.merge(s);
        streams.push(Clickstream::new(items)?);
    }
    Ok(GenerationOutput { set: ClickstreamSet::new(Arc::clone(vocab), streams)?, stats })
}

/// [`generate_set`] on a dedicated pool of `workers` threads.
pub fn generate_set_with_workers(
    ds: &DsMatrix,
    cvs: &CvsMatrix,
    vocab: &Arc<Vocabulary>,
    config: &MbrwConfig,
    workers: usize,
) -> Result<GenerationOutput> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::invalid(format!("cannot start worker pool: {e}")))?;
    pool.install(|| generate_set(ds, cvs, vocab, config))
}
