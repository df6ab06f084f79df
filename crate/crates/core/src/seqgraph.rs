//! Direct Sequence (DS) and Common View Score (CVS) count matrices.
//!
//! `DS[next, current]` counts how often `next` immediately follows
//! `current`; column `c` therefore lists the successors of item `c`.
//! `CVS[m, n]` counts how often `m` and `n` share a clickstream; it is
//! symmetric with a zero diagonal.
//!
//! Matrices are stored column-compressed with cached column sums, so a walk
//! can enumerate the successors of the current item without touching the
//! rest of the matrix.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::fmt::Write as _;
use std::fs;
use std::ops::Deref;
use std::path::Path;
use std::str::FromStr;

use crate::corpus::{ClickstreamSet, ItemId};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MatrixKind {
    Ds,
    Cvs,
}

impl fmt::Display for MatrixKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MatrixKind::Ds => "DS",
            MatrixKind::Cvs => "CVS",
        })
    }
}

impl FromStr for MatrixKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "DS" | "ds" => Ok(MatrixKind::Ds),
            "CVS" | "cvs" => Ok(MatrixKind::Cvs),
            _ => Err(Error::invalid(format!("unknown matrix kind `{s}`"))),
        }
    }
}

/// How repeated events inside one clickstream are counted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum CountingMode {
    /// Each stream contributes at most 1 to any entry.
    #[default]
    PerStream,
    /// Every adjacency (DS) or occurrence pair (CVS) counts.
    PerOccurrence,
}

impl fmt::Display for CountingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CountingMode::PerStream => "per_stream",
            CountingMode::PerOccurrence => "per_occurrence",
        })
    }
}

impl FromStr for CountingMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "per_stream" | "per-stream" => Ok(CountingMode::PerStream),
            "per_occurrence" | "per-occurrence" => Ok(CountingMode::PerOccurrence),
            _ => Err(Error::invalid(format!("unknown counting mode `{s}`"))),
        }
    }
}

/// N x N matrix of positive integer counts in compressed-column form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseCountMatrix {
    n: usize,
    kind: MatrixKind,
    mode: CountingMode,
    col_ptr: Vec<usize>,
    row_idx: Vec<ItemId>,
    counts: Vec<u64>,
    col_sums: Vec<u64>,
}

impl SparseCountMatrix {
    /// Builds from `(row, col, count)` triplets. Duplicates, out-of-range
    /// indices and zero counts are rejected.
    pub fn from_triplets<I>(n: usize, kind: MatrixKind, mode: CountingMode, triplets: I) -> Result<Self>
    where
        I: IntoIterator<Item = (ItemId, ItemId, u64)>,
    {
        let mut map = HashMap::new();
        for (r, c, count) in triplets {
            for id in [r, c] {
                if id as usize >= n {
                    return Err(Error::ItemOutOfRange { id: id as usize, n });
                }
            }
            if count == 0 {
                return Err(Error::invalid(format!("zero count at ({r}, {c})")));
            }
            if map.insert((r, c), count).is_some() {
                return Err(Error::invalid(format!("duplicate entry ({r}, {c})")));
            }
        }
        Ok(Self::from_map(n, kind, mode, map))
    }

    fn from_map(n: usize, kind: MatrixKind, mode: CountingMode, map: HashMap<(ItemId, ItemId), u64>) -> Self {
        let mut entries: Vec<((ItemId, ItemId), u64)> =
            map.into_iter().filter(|&(_, v)| v > 0).collect();
        entries.sort_unstable_by_key(|&((r, c), _)| (c, r));
        Self::from_sorted(n, kind, mode, entries)
    }

    /// `entries` must be sorted by (col, row) and free of zeros.
    fn from_sorted(n: usize, kind: MatrixKind, mode: CountingMode, entries: Vec<((ItemId, ItemId), u64)>) -> Self {
        let mut col_ptr = vec![0usize; n + 1];
        let mut col_sums = vec![0u64; n];
        let mut row_idx = Vec::with_capacity(entries.len());
        let mut counts = Vec::with_capacity(entries.len());
        for ((r, c), v) in entries {
            col_ptr[c as usize + 1] += 1;
            col_sums[c as usize] += v;
            row_idx.push(r);
            counts.push(v);
        }
        for c in 0..n {
            col_ptr[c + 1] += col_ptr[c];
        }
        SparseCountMatrix { n, kind, mode, col_ptr, row_idx, counts, col_sums }
    }

    pub fn empty(n: usize, kind: MatrixKind, mode: CountingMode) -> Self {
        Self::from_sorted(n, kind, mode, Vec::new())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> MatrixKind {
        self.kind
    }

    pub fn mode(&self) -> CountingMode {
        self.mode
    }

    /// Number of stored (nonzero) entries.
    pub fn nnz(&self) -> usize {
        self.counts.len()
    }

    /// Nonzero rows of column `col` with their counts, rows ascending.
    pub fn column(&self, col: ItemId) -> (&[ItemId], &[u64]) {
        let span = self.col_ptr[col as usize]..self.col_ptr[col as usize + 1];
        (&self.row_idx[span.clone()], &self.counts[span])
    }

    pub fn col_sum(&self, col: ItemId) -> u64 {
        self.col_sums[col as usize]
    }

    pub fn get(&self, row: ItemId, col: ItemId) -> u64 {
        let (rows, counts) = self.column(col);
        rows.binary_search(&row).map_or(0, |i| counts[i])
    }

    /// All entries as `(row, col, count)`, column-major.
    pub fn entries(&self) -> impl Iterator<Item = (ItemId, ItemId, u64)> + '_ {
        (0..self.n).flat_map(move |c| {
            let (rows, counts) = self.column(c as ItemId);
            rows.iter().zip(counts).map(move |(&r, &v)| (r, c as ItemId, v))
        })
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn max_count(&self) -> u64 {
        self.counts.iter().copied().max().unwrap_or(0)
    }

    pub fn transpose(&self) -> Self {
        let entries: HashMap<(ItemId, ItemId), u64> =
            self.entries().map(|(r, c, v)| ((c, r), v)).collect();
        Self::from_map(self.n, self.kind, self.mode, entries)
    }

    /// Row-major view: `rows()[r]` lists `(col, count)` for row `r`, cols ascending.
    pub fn rows(&self) -> Vec<Vec<(ItemId, u64)>> {
        let mut rows = vec![Vec::new(); self.n];
        for (r, c, v) in self.entries() {
            rows[r as usize].push((c, v));
        }
        rows
    }

    pub fn is_symmetric(&self) -> bool {
        self.entries().all(|(r, c, v)| self.get(c, r) == v)
    }

    pub fn to_tsv(&self) -> String {
        let mut out = format!("# kind={} mode={} n={}\nrow\tcol\tcount\n", self.kind, self.mode, self.n);
        // column-major order; CVS keeps only the upper triangle
        for (r, c, v) in self.entries() {
            if self.kind == MatrixKind::Cvs && r > c {
                continue;
            }
            let _ = writeln!(out, "{r}\t{c}\t{v}");
        }
        out
    }

    pub fn parse_tsv(text: &str, source: impl AsRef<Path>) -> Result<Self> {
        let path = source.as_ref();
        let mut header: Option<(MatrixKind, CountingMode, usize)> = None;
        let mut triplets = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.strip_suffix('\r').unwrap_or(line);
            let bad = |m: String| Error::parse(path, lineno + 1, m);
            if let Some(comment) = line.strip_prefix('#') {
                if header.is_none() {
                    header = Some(parse_header(comment).map_err(|e| bad(e.to_string()))?);
                }
                continue;
            }
            if line.is_empty() || line == "row\tcol\tcount" {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 3 {
                return Err(bad(format!("expected 3 tab-separated fields, got {}", fields.len())));
            }
            let r: ItemId = fields[0].parse().map_err(|_| bad(format!("bad row `{}`", fields[0])))?;
            let c: ItemId = fields[1].parse().map_err(|_| bad(format!("bad col `{}`", fields[1])))?;
            let v: i128 = fields[2].parse().map_err(|_| bad(format!("bad count `{}`", fields[2])))?;
            if v <= 0 || v > u64::MAX as i128 {
                return Err(bad(format!("count must be positive, got {v}")));
            }
            triplets.push((lineno + 1, r, c, v as u64));
        }
        let (kind, mode, n) =
            header.ok_or_else(|| Error::parse(path, 1, "missing `# kind=... mode=... n=...` header"))?;

        let mut map: HashMap<(ItemId, ItemId), u64> = HashMap::with_capacity(triplets.len() * 2);
        let mut seen = HashSet::with_capacity(triplets.len());
        for (lineno, r, c, v) in triplets {
            let bad = |m: String| Error::parse(path, lineno, m);
            for id in [r, c] {
                if id as usize >= n {
                    return Err(bad(format!("index {id} out of range for n={n}")));
                }
            }
            if !seen.insert((r, c)) {
                return Err(bad(format!("duplicate triplet ({r}, {c})")));
            }
            match kind {
                MatrixKind::Ds => {
                    map.insert((r, c), v);
                }
                MatrixKind::Cvs => {
                    if r == c {
                        return Err(bad(format!("CVS diagonal entry ({r}, {r})")));
                    }
                    // mirrored entry may be present if the file stores both triangles
                    if let Some(&prev) = map.get(&(r, c)) {
                        if prev != v {
                            return Err(bad(format!("asymmetric CVS entries at ({r}, {c})")));
                        }
                    }
                    map.insert((r, c), v);
                    map.insert((c, r), v);
                }
            }
        }
        Ok(Self::from_map(n, kind, mode, map))
    }
}

fn parse_header(comment: &str) -> Result<(MatrixKind, CountingMode, usize)> {
    let mut kind = None;
    let mut mode = None;
    let mut n = None;
    for kv in comment.split_whitespace() {
        match kv.split_once('=') {
            Some(("kind", v)) => kind = Some(v.parse()?),
            Some(("mode", v)) => mode = Some(v.parse()?),
            Some(("n", v)) => {
                n = Some(v.parse().map_err(|_| Error::invalid(format!("bad n `{v}`")))?)
            }
            _ => {}
        }
    }
    match (kind, mode, n) {
        (Some(k), Some(m), Some(n)) => Ok((k, m, n)),
        _ => Err(Error::invalid("header must carry kind=, mode= and n=")),
    }
}

/// DS matrix: `DS[next, current]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DsMatrix(SparseCountMatrix);

/// CVS matrix: symmetric, zero diagonal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CvsMatrix(SparseCountMatrix);

impl Deref for DsMatrix {
    type Target = SparseCountMatrix;
    fn deref(&self) -> &SparseCountMatrix {
        &self.0
    }
}

impl Deref for CvsMatrix {
    type Target = SparseCountMatrix;
    fn deref(&self) -> &SparseCountMatrix {
        &self.0
    }
}

impl DsMatrix {
    pub fn into_inner(self) -> SparseCountMatrix {
        self.0
    }

    pub fn filter(&self, k: u64) -> DsMatrix {
        DsMatrix(k_anonymity_filter(&self.0, k))
    }
}

impl CvsMatrix {
    pub fn into_inner(self) -> SparseCountMatrix {
        self.0
    }

    pub fn filter(&self, k: u64) -> CvsMatrix {
        CvsMatrix(k_anonymity_filter(&self.0, k))
    }
}

impl TryFrom<SparseCountMatrix> for DsMatrix {
    type Error = Error;

    fn try_from(m: SparseCountMatrix) -> Result<Self> {
        if m.kind != MatrixKind::Ds {
            return Err(Error::invalid(format!("expected a DS matrix, got {}", m.kind)));
        }
        Ok(DsMatrix(m))
    }
}

impl TryFrom<SparseCountMatrix> for CvsMatrix {
    type Error = Error;

    fn try_from(m: SparseCountMatrix) -> Result<Self> {
        if m.kind != MatrixKind::Cvs {
            return Err(Error::invalid(format!("expected a CVS matrix, got {}", m.kind)));
        }
        if m.entries().any(|(r, c, _)| r == c) || !m.is_symmetric() {
            return Err(Error::invalid("CVS matrix must be symmetric with a zero diagonal"));
        }
        Ok(CvsMatrix(m))
    }
}

pub fn build_ds(set: &ClickstreamSet, mode: CountingMode) -> Result<DsMatrix> {
    if set.is_empty() {
        return Err(Error::invalid("empty clickstream set"));
    }
    let mut map: HashMap<(ItemId, ItemId), u64> = HashMap::new();
    let mut seen = HashSet::new();
    for stream in set.streams() {
        seen.clear();
        for pair in stream.items().windows(2) {
            let key = (pair[1], pair[0]);
            if mode == CountingMode::PerOccurrence || seen.insert(key) {
                *map.entry(key).or_default() += 1;
            }
        }
    }
    Ok(DsMatrix(SparseCountMatrix::from_map(set.item_count(), MatrixKind::Ds, mode, map)))
}

pub fn build_cvs(set: &ClickstreamSet, mode: CountingMode) -> Result<CvsMatrix> {
    if set.is_empty() {
        return Err(Error::invalid("empty clickstream set"));
    }
    let mut map: HashMap<(ItemId, ItemId), u64> = HashMap::new();
    let mut occurrences: Vec<(ItemId, u64)> = Vec::new();
    for stream in set.streams() {
        let mut items = stream.items().to_vec();
        items.sort_unstable();
        occurrences.clear();
        for id in items {
            match occurrences.last_mut() {
                Some((last, c)) if *last == id => *c += 1,
                _ => occurrences.push((id, 1)),
            }
        }
        for (i, &(a, ca)) in occurrences.iter().enumerate() {
            for &(b, cb) in &occurrences[i + 1..] {
                let w = match mode {
                    CountingMode::PerStream => 1,
                    CountingMode::PerOccurrence => ca * cb,
                };
                *map.entry((a, b)).or_default() += w;
                *map.entry((b, a)).or_default() += w;
            }
        }
    }
    Ok(CvsMatrix(SparseCountMatrix::from_map(set.item_count(), MatrixKind::Cvs, mode, map)))
}

/// Drops every entry with count below `k`. `k <= 1` is the identity.
pub fn k_anonymity_filter(matrix: &SparseCountMatrix, k: u64) -> SparseCountMatrix {
    let entries = matrix
        .entries()
        .filter(|&(_, _, v)| v >= k)
        .map(|(r, c, v)| ((r, c), v))
        .collect();
    SparseCountMatrix::from_sorted(matrix.n, matrix.kind, matrix.mode, entries)
}

pub fn save_matrix(matrix: &SparseCountMatrix, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, matrix.to_tsv()).map_err(|e| Error::io(path, e))
}

pub fn load_matrix(path: impl AsRef<Path>) -> Result<SparseCountMatrix> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    SparseCountMatrix::parse_tsv(&text, path)
}

pub fn load_ds(path: impl AsRef<Path>) -> Result<DsMatrix> {
    load_matrix(path)?.try_into()
}

pub fn load_cvs(path: impl AsRef<Path>) -> Result<CvsMatrix> {
    load_matrix(path)?.try_into()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{parse_clickstreams, Vocabulary};
    use proptest::prelude::*;
    use std::sync::Arc;

    fn corpus(text: &str) -> ClickstreamSet {
        parse_clickstreams(text, "t").unwrap()
    }

    fn id(set: &ClickstreamSet, label: &str) -> ItemId {
        set.vocab().id(label).unwrap()
    }

    #[test]
    fn ds_per_stream_hand_counts() {
        let set = corpus("a b c\nb c\na b\n");
        let ds = build_ds(&set, CountingMode::PerStream).unwrap();
        let (a, b, c) = (id(&set, "a"), id(&set, "b"), id(&set, "c"));
        assert_eq!(ds.get(b, a), 2);
        assert_eq!(ds.get(c, b), 2);
        assert_eq!(ds.nnz(), 2);
        assert_eq!(ds.col_sum(a), 2);
    }

    #[test]
    fn ds_modes_differ_on_repeats() {
        let set = corpus("a b a b\n");
        let (a, b) = (id(&set, "a"), id(&set, "b"));
        let per_stream = build_ds(&set, CountingMode::PerStream).unwrap();
        let per_occ = build_ds(&set, CountingMode::PerOccurrence).unwrap();
        assert_eq!(per_stream.get(b, a), 1);
        assert_eq!(per_occ.get(b, a), 2);
        assert_eq!(per_occ.get(a, b), 1);
    }

    #[test]
    fn ds_of_singleton_is_empty() {
        let ds = build_ds(&corpus("a\n"), CountingMode::PerStream).unwrap();
        assert_eq!(ds.nnz(), 0);
    }

    #[test]
    fn ds_diagonal_only_from_self_follow() {
        let set = corpus("a a b\n");
        let ds = build_ds(&set, CountingMode::PerStream).unwrap();
        assert_eq!(ds.get(0, 0), 1);
    }

    #[test]
    fn cvs_per_stream_hand_counts() {
        let set = corpus("a b c\nb c\n");
        let cvs = build_cvs(&set, CountingMode::PerStream).unwrap();
        let (a, b, c) = (id(&set, "a"), id(&set, "b"), id(&set, "c"));
        assert_eq!(cvs.get(a, b), 1);
        assert_eq!(cvs.get(a, c), 1);
        assert_eq!(cvs.get(b, c), 2);
        assert_eq!(cvs.get(c, b), 2);
    }

    #[test]
    fn cvs_uses_set_semantics_and_zero_diagonal() {
        let set = corpus("a a b\n");
        let cvs = build_cvs(&set, CountingMode::PerStream).unwrap();
        assert_eq!(cvs.get(0, 1), 1);
        assert_eq!(cvs.get(0, 0), 0);
        let occ = build_cvs(&set, CountingMode::PerOccurrence).unwrap();
        assert_eq!(occ.get(0, 1), 2);
        assert_eq!(occ.get(0, 0), 0);
    }

    #[test]
    fn filter_thresholds() {
        let m = SparseCountMatrix::from_triplets(
            3,
            MatrixKind::Ds,
            CountingMode::PerStream,
            [(0, 1, 1), (1, 2, 4), (2, 0, 5)],
        )
        .unwrap();
        let f = k_anonymity_filter(&m, 5);
        assert_eq!(f.entries().collect::<Vec<_>>(), vec![(2, 0, 5)]);
        assert_eq!(f.col_sum(0), 5);
        assert_eq!(f.col_sum(2), 0);
        assert_eq!(k_anonymity_filter(&m, 1), m);
    }

    #[test]
    fn triplet_validation() {
        let kind = MatrixKind::Ds;
        let mode = CountingMode::PerStream;
        assert!(SparseCountMatrix::from_triplets(2, kind, mode, [(0, 1, 0)]).is_err());
        assert!(SparseCountMatrix::from_triplets(2, kind, mode, [(0, 2, 1)]).is_err());
        assert!(SparseCountMatrix::from_triplets(2, kind, mode, [(0, 1, 1), (0, 1, 2)]).is_err());
    }

    #[test]
    fn file_round_trip_and_errors() {
        let dir = tempfile::tempdir().unwrap();
        let set = corpus("a b c a\nb c\nc a b b\n");
        let ds = build_ds(&set, CountingMode::PerOccurrence).unwrap();
        let cvs = build_cvs(&set, CountingMode::PerStream).unwrap();
        let p = dir.path().join("ds.tsv");
        save_matrix(&ds, &p).unwrap();
        assert_eq!(load_ds(&p).unwrap(), ds);
        let p = dir.path().join("cvs.tsv");
        save_matrix(&cvs, &p).unwrap();
        let text = fs::read_to_string(&p).unwrap();
        assert!(text.starts_with("# kind=CVS mode=per_stream n=3\nrow\tcol\tcount\n"));
        assert_eq!(load_cvs(&p).unwrap(), cvs);

        let parse = |t: &str| SparseCountMatrix::parse_tsv(t, "x");
        let head = "# kind=DS mode=per_stream n=2\nrow\tcol\tcount\n";
        assert!(parse(&format!("{head}0\t1\t0\n")).is_err());
        assert!(parse(&format!("{head}0\t1\t-3\n")).is_err());
        assert!(parse(&format!("{head}0\t2\t1\n")).is_err());
        assert!(parse(&format!("{head}0\t1\t1\n0\t1\t1\n")).is_err());
        assert!(parse("row\tcol\tcount\n0\t1\t1\n").is_err());
        match parse(&format!("{head}0\t1\t1\n1\tx\t1\n")) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn cvs_upper_triangle_is_mirrored() {
        let text = "# kind=CVS mode=per_stream n=3\nrow\tcol\tcount\n0\t1\t2\n1\t2\t5\n";
        let m: CvsMatrix = SparseCountMatrix::parse_tsv(text, "x").unwrap().try_into().unwrap();
        assert_eq!(m.get(1, 0), 2);
        assert_eq!(m.get(0, 1), 2);
        assert_eq!(m.get(2, 1), 5);
        assert_eq!(m.col_sum(1), 7);
        // both triangles present and consistent is accepted too
        let full = "# kind=CVS mode=per_stream n=2\nrow\tcol\tcount\n0\t1\t2\n1\t0\t2\n";
        assert!(SparseCountMatrix::parse_tsv(full, "x").is_ok());
        let skew = "# kind=CVS mode=per_stream n=2\nrow\tcol\tcount\n0\t1\t2\n1\t0\t3\n";
        assert!(SparseCountMatrix::parse_tsv(skew, "x").is_err());
    }

    fn random_corpus() -> impl Strategy<Value = ClickstreamSet> {
        (1usize..8).prop_flat_map(|n| {
            proptest::collection::vec(proptest::collection::vec(0..n as u32, 1..9), 1..12).prop_map(
                move |streams| {
                    let vocab = Arc::new(Vocabulary::numbered(n).unwrap());
                    ClickstreamSet::from_ids(vocab, streams).unwrap()
                },
            )
        })
    }

    fn random_matrix() -> impl Strategy<Value = SparseCountMatrix> {
        (1usize..10).prop_flat_map(|n| {
            proptest::collection::btree_map((0..n as u32, 0..n as u32), 1u64..60, 0..40).prop_map(
                move |m| {
                    SparseCountMatrix::from_triplets(
                        n,
                        MatrixKind::Ds,
                        CountingMode::PerStream,
                        m.into_iter().map(|((r, c), v)| (r, c, v)),
                    )
                    .unwrap()
                },
            )
        })
    }

    proptest! {
        #[test]
        fn ds_invariants(set in random_corpus()) {
            let occ = build_ds(&set, CountingMode::PerOccurrence).unwrap();
            let expected: usize = set.streams().iter().map(|s| s.len() - 1).sum();
            prop_assert_eq!(occ.total() as usize, expected);
            let per = build_ds(&set, CountingMode::PerStream).unwrap();
            prop_assert!(per.entries().all(|(_, _, v)| v as usize <= set.len()));
            for m in [&occ, &per] {
                for c in 0..m.n() as u32 {
                    let (_, counts) = m.column(c);
                    prop_assert_eq!(m.col_sum(c), counts.iter().sum::<u64>());
                }
            }
        }

        #[test]
        fn cvs_invariants(set in random_corpus()) {
            for mode in [CountingMode::PerStream, CountingMode::PerOccurrence] {
                let cvs = build_cvs(&set, mode).unwrap();
                prop_assert!(cvs.is_symmetric());
                prop_assert!(cvs.entries().all(|(r, c, _)| r != c));
                if mode == CountingMode::PerStream {
                    prop_assert!(cvs.entries().all(|(_, _, v)| v as usize <= set.len()));
                }
            }
        }

        #[test]
        fn filter_idempotent_and_monotone(m in random_matrix(), k in 1u64..30, extra in 0u64..30) {
            let f = k_anonymity_filter(&m, k);
            prop_assert!(f.entries().all(|(_, _, v)| v >= k));
            prop_assert_eq!(&k_anonymity_filter(&f, k), &f);
            let g = k_anonymity_filter(&m, k + extra);
            prop_assert!(g.entries().all(|(r, c, v)| f.get(r, c) == v));
            prop_assert!(f.entries().all(|(r, c, v)| m.get(r, c) == v));
        }

        #[test]
        fn matrix_text_round_trip(m in random_matrix()) {
            let back = SparseCountMatrix::parse_tsv(&m.to_tsv(), "x").unwrap();
            prop_assert_eq!(back, m);
        }
    }
}
