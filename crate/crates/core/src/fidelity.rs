//! Statistical fidelity of synthetic data: per-row top-z Spearman rank
//! correlation between a real and a synthetic count matrix.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;

use crate::corpus::ItemId;
use crate::error::{Error, Result};
use crate::format::sig6;
use crate::seqgraph::SparseCountMatrix;

/// Average (fractional) ranks, 1-based; tied values share the mean rank.
pub fn average_ranks(xs: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut ranks = vec![0.0; xs.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && xs[order[j]] == xs[order[i]] {
            j += 1;
        }
        // positions i..j (0-based) share ranks i+1..=j
        let rank = (i + j + 1) as f64 / 2.0;
        for &k in &order[i..j] {
            ranks[k] = rank;
        }
        i = j;
    }
    ranks
}

fn pearson(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Spearman rank correlation with average ranks for ties.
///
/// Returns `Ok(None)` when either input is constant.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Result<Option<f64>> {
    if xs.len() != ys.len() {
        return Err(Error::DimensionMismatch(format!("{} vs {} values", xs.len(), ys.len())));
    }
    if xs.len() < 2 {
        return Err(Error::invalid("spearman needs at least two values"));
    }
    Ok(pearson(&average_ranks(xs), &average_ranks(ys)))
}

fn lookup(row: &[(ItemId, u64)], col: ItemId) -> u64 {
    row.binary_search_by_key(&col, |&(c, _)| c).map_or(0, |i| row[i].1)
}

/// Correlation of `syn_row` with `real_row` over the `z` largest entries of
/// `real_row` (ties by ascending column). Rows are `(col, count)` lists
/// sorted by column; absent entries read as zero.
pub fn row_top_z_correlation(
    real_row: &[(ItemId, u64)],
    syn_row: &[(ItemId, u64)],
    z: usize,
) -> Result<Option<f64>> {
    if z < 2 {
        return Err(Error::invalid(format!("z must be >= 2, got {z}")));
    }
    let mut top: Vec<(ItemId, u64)> = real_row.iter().copied().filter(|&(_, v)| v > 0).collect();
    top.sort_unstable_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    top.truncate(z);
    if top.len() < 2 {
        return Ok(None);
    }
    let real: Vec<f64> = top.iter().map(|&(_, v)| v as f64).collect();
    let syn: Vec<f64> = top.iter().map(|&(c, _)| lookup(syn_row, c) as f64).collect();
    spearman(&real, &syn)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FidelityReport {
    pub z: usize,
    /// Coefficient per row id; `None` marks a skipped row.
    pub per_row: Vec<Option<f64>>,
    /// Mean over non-skipped rows (NaN if every row was skipped).
    pub avg: f64,
    /// Population standard deviation over non-skipped rows.
    pub std: f64,
    pub skipped: usize,
}

impl FidelityReport {
    pub fn from_rows(z: usize, per_row: Vec<Option<f64>>) -> Self {
        let values: Vec<f64> = per_row.iter().flatten().copied().collect();
        let skipped = per_row.len() - values.len();
        let (avg, std) = if values.is_empty() {
            (f64::NAN, f64::NAN)
        } else {
            let n = values.len() as f64;
            let avg = values.iter().sum::<f64>() / n;
            let var = values.iter().map(|v| (v - avg) * (v - avg)).sum::<f64>() / n;
            (avg, var.sqrt())
        };
        FidelityReport { z, per_row, avg, std, skipped }
    }

    pub fn evaluated(&self) -> usize {
        self.per_row.len() - self.skipped
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from("row\tr\n");
        for (row, r) in self.per_row.iter().enumerate() {
            match r {
                Some(v) => writeln!(out, "{row}\t{}", sig6(*v)),
                None => writeln!(out, "{row}\tskipped"),
            }
            .expect("writing to a String");
        }
        let _ = writeln!(
            out,
            "# z={}, avg={}, std={}, skipped={}",
            self.z,
            sig6(self.avg),
            sig6(self.std),
            self.skipped
        );
        out
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_tsv()).map_err(|e| Error::io(path, e))
    }

    /// Reads a report back; aggregates come from the trailing comment.
    pub fn parse_tsv(text: &str, source: impl AsRef<Path>) -> Result<Self> {
        let path = source.as_ref();
        let mut per_row = Vec::new();
        let mut summary: Option<(usize, f64, f64, usize)> = None;
        for (lineno, line) in text.lines().enumerate() {
            let bad = |m: &str| Error::parse(path, lineno + 1, m.to_string());
            if let Some(comment) = line.strip_prefix('#') {
                let mut z = None;
                let mut avg = None;
                let mut std = None;
                let mut skipped = None;
                for kv in comment.split(',') {
                    match kv.trim().split_once('=') {
                        Some(("z", v)) => z = v.parse().ok(),
                        Some(("avg", v)) => avg = v.parse().ok(),
                        Some(("std", v)) => std = v.parse().ok(),
                        Some(("skipped", v)) => skipped = v.parse().ok(),
                        _ => {}
                    }
                }
                match (z, avg, std, skipped) {
                    (Some(z), Some(a), Some(s), Some(k)) => summary = Some((z, a, s, k)),
                    _ => return Err(bad("malformed summary comment")),
                }
                continue;
            }
            if line.is_empty() || line == "row\tr" {
                continue;
            }
            let (row, r) = line.split_once('\t').ok_or_else(|| bad("expected two columns"))?;
            let row: usize = row.parse().map_err(|_| bad("bad row id"))?;
            if row != per_row.len() {
                return Err(bad("rows must be listed in order"));
            }
            per_row.push(match r {
                "skipped" => None,
                v => Some(v.parse().map_err(|_| bad("bad coefficient"))?),
            });
        }
        let (z, avg, std, skipped) =
            summary.ok_or_else(|| Error::parse(path, 0, "missing summary comment"))?;
        Ok(FidelityReport { z, per_row, avg, std, skipped })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_tsv(&text, path)
    }
}

/// Top-z correlation of every row pair of `real` and `syn`.
pub fn matrix_fidelity(real: &SparseCountMatrix, syn: &SparseCountMatrix, z: usize) -> Result<FidelityReport> {
    if real.n() != syn.n() {
        return Err(Error::DimensionMismatch(format!(
            "real matrix has {} items, synthetic has {}",
            real.n(),
            syn.n()
        )));
    }
    if z < 2 {
        return Err(Error::invalid(format!("z must be >= 2, got {z}")));
    }
    let real_rows = real.rows();
    let syn_rows = syn.rows();
    let per_row = real_rows
        .par_iter()
        .zip(syn_rows.par_iter())
        .map(|(r, s)| row_top_z_correlation(r, s, z))
        .collect::<Result<Vec<_>>>()?;
    Ok(FidelityReport::from_rows(z, per_row))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seqgraph::{CountingMode, MatrixKind};
    use proptest::prelude::*;

    fn rho(xs: &[f64], ys: &[f64]) -> f64 {
        spearman(xs, ys).unwrap().unwrap()
    }

    #[test]
    fn spearman_basic_cases() {
        assert!((rho(&[5.0, 3.0, 1.0], &[10.0, 6.0, 2.0]) - 1.0).abs() < 1e-15);
        assert!((rho(&[3.0, 2.0, 1.0], &[1.0, 2.0, 3.0]) + 1.0).abs() < 1e-15);
        // d^2 = (0,1,1,0): 1 - 6*2/(4*15)
        assert!((rho(&[1.0, 2.0, 3.0, 4.0], &[1.0, 3.0, 2.0, 4.0]) - 0.8).abs() < 1e-12);
    }

    #[test]
    fn spearman_ties_and_degenerate_inputs() {
        assert_eq!(average_ranks(&[10.0, 20.0, 10.0, 30.0]), vec![1.5, 3.0, 1.5, 4.0]);
        // ranks x = (1.5, 1.5, 3), y = (1, 2, 3): 1.5 / sqrt(1.5 * 2)
        let r = rho(&[1.0, 1.0, 2.0], &[1.0, 2.0, 3.0]);
        assert!((r - 3f64.sqrt() / 2.0).abs() < 1e-12, "{r}");
        assert_eq!(spearman(&[2.0, 2.0], &[1.0, 3.0]).unwrap(), None);
        assert!(spearman(&[1.0], &[1.0]).is_err());
        assert!(spearman(&[1.0, 2.0], &[1.0]).is_err());
    }

    #[test]
    fn top_z_selection() {
        let real = [(0, 2), (1, 4), (2, 6)];
        let syn = [(0, 4), (1, 8), (2, 12)];
        assert!((row_top_z_correlation(&real, &syn, 100).unwrap().unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(row_top_z_correlation(&[(3, 5)], &syn, 100).unwrap(), None);
        // c1:9 c2:5 c3:1, z=2 keeps c1, c2; synthetic reversed
        let real = [(1, 9), (2, 5), (3, 1)];
        let syn = [(1, 1), (2, 7)];
        assert!((row_top_z_correlation(&real, &syn, 2).unwrap().unwrap() + 1.0).abs() < 1e-15);
        assert!(row_top_z_correlation(&real, &syn, 1).is_err());
    }

    fn matrix(n: usize, t: &[(u32, u32, u64)]) -> SparseCountMatrix {
        SparseCountMatrix::from_triplets(n, MatrixKind::Ds, CountingMode::PerStream, t.iter().copied()).unwrap()
    }

    #[test]
    fn identity_and_scaling() {
        let m = matrix(3, &[(0, 0, 3), (0, 1, 1), (0, 2, 2), (1, 0, 5), (1, 2, 4), (2, 1, 7)]);
        let rep = matrix_fidelity(&m, &m, 100).unwrap();
        assert_eq!((rep.avg, rep.std, rep.skipped), (1.0, 0.0, 1));
        let scaled = matrix(3, &[(0, 0, 9), (0, 1, 3), (0, 2, 6), (1, 0, 10), (1, 2, 8), (2, 1, 70)]);
        assert_eq!(matrix_fidelity(&m, &scaled, 100).unwrap().avg, 1.0);
        assert!(matrix_fidelity(&m, &matrix(4, &[]), 100).is_err());
    }

    #[test]
    fn report_file_round_trip() {
        let rep = FidelityReport::from_rows(100, vec![Some(1.0), None, Some(-0.5), Some(0.25)]);
        assert_eq!(rep.skipped, 1);
        let text = rep.to_tsv();
        assert!(text.ends_with("# z=100, avg=0.250000, std=0.612372, skipped=1\n"), "{text}");
        let back = FidelityReport::parse_tsv(&text, "r.tsv").unwrap();
        assert_eq!(back.per_row, rep.per_row);
        assert_eq!(back.skipped, 1);
        assert!((back.avg - rep.avg).abs() < 1e-6);
    }

    fn row() -> impl Strategy<Value = Vec<(u32, u64)>> {
        proptest::collection::btree_map(0u32..40, 1u64..20, 0..25).prop_map(|m| m.into_iter().collect())
    }

    proptest! {
        #[test]
        fn spearman_symmetric_and_rank_invariant(xs in proptest::collection::vec(-50i32..50, 2..30), seed in proptest::collection::vec(-50i32..50, 30)) {
            let xs: Vec<f64> = xs.into_iter().map(f64::from).collect();
            let ys: Vec<f64> = seed[..xs.len()].iter().map(|&v| f64::from(v)).collect();
            let a = spearman(&xs, &ys).unwrap();
            let b = spearman(&ys, &xs).unwrap();
            prop_assert_eq!(a.is_some(), b.is_some());
            if let (Some(a), Some(b)) = (a, b) {
                prop_assert!((a - b).abs() < 1e-12);
                prop_assert!((-1.0..=1.0).contains(&a));
                let warped: Vec<f64> = xs.iter().map(|x| (x / 10.0).exp() + 3.0).collect();
                let c = spearman(&warped, &ys).unwrap().unwrap();
                prop_assert!((a - c).abs() < 1e-12);
            }
        }

        #[test]
        fn row_depends_only_on_selected_columns(real in row(), syn in row(), noise in 1u64..50, z in 2usize..10) {
            let mut top: Vec<_> = real.clone();
            top.sort_unstable_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
            top.truncate(z);
            let selected: std::collections::HashSet<u32> = top.iter().map(|&(c, _)| c).collect();
            // perturb synthetic entries outside the selected set
            let mut other: std::collections::BTreeMap<u32, u64> = syn.iter().copied().collect();
            for c in 0..40u32 {
                if !selected.contains(&c) {
                    other.insert(c, noise + u64::from(c));
                }
            }
            let other: Vec<_> = other.into_iter().collect();
            prop_assert_eq!(row_top_z_correlation(&real, &syn, z).unwrap(), row_top_z_correlation(&real, &other, z).unwrap());
        }

        #[test]
        fn aggregates_recompute(rows in proptest::collection::vec(proptest::option::of(-1.0f64..=1.0), 1..50)) {
            let rep = FidelityReport::from_rows(10, rows);
            let again = FidelityReport::from_rows(10, rep.per_row.clone());
            if rep.evaluated() > 0 {
                prop_assert!((rep.avg - again.avg).abs() < 1e-12);
                prop_assert!((rep.std - again.std).abs() < 1e-12);
            }
        }
    }
}
