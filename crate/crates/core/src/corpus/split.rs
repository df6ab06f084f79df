use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;

use super::{Clickstream, ClickstreamSet};
use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

fn check_fraction(fraction: f64, what: &str) -> Result<()> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::invalid(format!("{what} must lie in (0, 1), got {fraction}")));
    }
    Ok(())
}

/// Splits streams into disjoint train and test sets.
///
/// The test set holds `round(test_fraction * |set|)` streams chosen by a
/// seeded shuffle. Both outputs keep the original relative order.
pub fn horizontal_split(
    set: &ClickstreamSet,
    test_fraction: f64,
    seed: u64,
) -> Result<(ClickstreamSet, ClickstreamSet)> {
    check_fraction(test_fraction, "test fraction")?;
    let n = set.len();
    let test_size = (test_fraction * n as f64).round() as usize;
    if test_size == 0 || test_size >= n {
        return Err(Error::invalid(format!(
            "test fraction {test_fraction} on {n} streams leaves an empty train or test set"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng_from_seed(seed));
    let mut in_test = vec![false; n];
    for &i in &order[..test_size] {
        in_test[i] = true;
    }
    let (test, train): (Vec<usize>, Vec<usize>) = (0..n).partition(|&i| in_test[i]);
    Ok((set.subset(&train), set.subset(&test)))
}

/// Splits every stream into a query prefix and a holdout suffix.
///
/// The prefix holds `max(1, floor(prefix_fraction * len))` items.
pub fn vertical_split(
    set: &ClickstreamSet,
    prefix_fraction: f64,
) -> Result<(ClickstreamSet, ClickstreamSet)> {
    check_fraction(prefix_fraction, "prefix fraction")?;
    let mut query = Vec::with_capacity(set.len());
    let mut holdout = Vec::with_capacity(set.len());
    for (i, stream) in set.streams().iter().enumerate() {
        let len = stream.len();
        if len < 2 {
            return Err(Error::invalid(format!(
                "stream {i} has length {len}; vertical split needs at least 2 items"
            )));
        }
        let cut = prefix_cut(len, prefix_fraction);
        let items = stream.items();
        query.push(Clickstream { items: items[..cut].to_vec() });
        holdout.push(Clickstream { items: items[cut..].to_vec() });
    }
    Ok((set.with_streams(query), set.with_streams(holdout)))
}

pub(crate) fn prefix_cut(len: usize, prefix_fraction: f64) -> usize {
    ((prefix_fraction * len as f64).floor() as usize).clamp(1, len - 1)
}

/// Assignment of streams to cross-validation folds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldPlan {
    fold_count: usize,
    assignment: Vec<usize>,
    seed: u64,
}

impl FoldPlan {
    pub fn fold_count(&self) -> usize {
        self.fold_count
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Fold id of every stream, indexed by stream position.
    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    /// Streams in `fold`, ascending.
    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignment.len())
            .filter(|&i| self.assignment[i] == fold)
            .collect()
    }

    /// Streams outside `fold`, ascending.
    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignment.len())
            .filter(|&i| self.assignment[i] != fold)
            .collect()
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.fold_count];
        for &f in &self.assignment {
            sizes[f] += 1;
        }
        sizes
    }

    pub fn to_tsv(&self) -> String {
        let mut out = format!("# folds={} seed={}\nstream_index\tfold_id\n", self.fold_count, self.seed);
        for (i, f) in self.assignment.iter().enumerate() {
            let _ = writeln!(out, "{i}\t{f}");
        }
        out
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_tsv()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut seed = 0;
        let mut pairs = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let bad = |m: &str| Error::parse(path, lineno + 1, m.to_string());
            if let Some(comment) = line.strip_prefix('#') {
                for kv in comment.split_whitespace() {
                    if let Some(v) = kv.strip_prefix("seed=") {
                        seed = v.parse().map_err(|_| bad("bad seed"))?;
                    }
                }
                continue;
            }
            if line.is_empty() || line == "stream_index\tfold_id" {
                continue;
            }
            let (i, f) = line.split_once('\t').ok_or_else(|| bad("expected two columns"))?;
            let i: usize = i.parse().map_err(|_| bad("bad stream index"))?;
            let f: usize = f.parse().map_err(|_| bad("bad fold id"))?;
            pairs.push((i, f));
        }
        pairs.sort_unstable();
        if pairs.iter().enumerate().any(|(pos, &(i, _))| pos != i) {
            return Err(Error::parse(path, 0, "stream indices must be exactly 0..n without repeats"));
        }
        let assignment: Vec<usize> = pairs.into_iter().map(|(_, f)| f).collect();
        let fold_count = assignment.iter().max().map_or(0, |m| m + 1);
        if fold_count < 2 {
            return Err(Error::parse(path, 0, "a fold plan needs at least two folds"));
        }
        Ok(FoldPlan { fold_count, assignment, seed })
    }
}

/// Balanced random partition of stream indices into `fold_count` folds.
pub fn make_folds(set: &ClickstreamSet, fold_count: usize, seed: u64) -> Result<FoldPlan> {
    let n = set.len();
    if fold_count < 2 || fold_count > n {
        return Err(Error::invalid(format!(
            "fold count {fold_count} must lie in [2, {n}]"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng_from_seed(seed));
    let mut assignment = vec![0; n];
    for (pos, &i) in order.iter().enumerate() {
        assignment[i] = pos % fold_count;
    }
    Ok(FoldPlan { fold_count, assignment, seed })
}
