//! Ranking metrics over binary relevance.
//!
//! Recommended items are assumed distinct; a repeated relevant item only
//! counts at its first position.

use std::collections::HashSet;

use crate::corpus::ItemId;
use crate::error::{Error, Result};

fn hits<'a>(recommended: &'a [ItemId], relevant: &'a HashSet<ItemId>) -> impl Iterator<Item = bool> + 'a {
    let mut seen = HashSet::new();
    recommended
        .iter()
        .map(move |item| relevant.contains(item) && seen.insert(*item))
}

/// Sum of precision@p over hit positions, divided by `|relevant|`.
pub fn average_precision(recommended: &[ItemId], relevant: &HashSet<ItemId>) -> Result<f64> {
    if relevant.is_empty() {
        return Err(Error::invalid("relevant set is empty"));
    }
    let mut found = 0usize;
    let mut sum = 0.0;
    for (pos, hit) in hits(recommended, relevant).enumerate() {
        if hit {
            found += 1;
            sum += found as f64 / (pos + 1) as f64;
        }
    }
    Ok(sum / relevant.len() as f64)
}

/// Binary-gain NDCG truncated at `cutoff`.
pub fn ndcg(recommended: &[ItemId], relevant: &HashSet<ItemId>, cutoff: usize) -> Result<f64> {
    if relevant.is_empty() {
        return Err(Error::invalid("relevant set is empty"));
    }
    if cutoff == 0 {
        return Err(Error::invalid("cutoff must be >= 1"));
    }
    let dcg: f64 = hits(recommended, relevant)
        .take(cutoff)
        .enumerate()
        .filter(|&(_, hit)| hit)
        .map(|(pos, _)| 1.0 / ((pos + 2) as f64).log2())
        .sum();
    let ideal: f64 = (0..relevant.len().min(cutoff))
        .map(|pos| 1.0 / ((pos + 2) as f64).log2())
        .sum();
    Ok(dcg / ideal)
}

/// Hits among the first `n` recommendations, divided by `n`.
pub fn precision_at(recommended: &[ItemId], relevant: &HashSet<ItemId>, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::invalid("n must be >= 1"));
    }
    let found = hits(recommended, relevant).take(n).filter(|&h| h).count();
    Ok(found as f64 / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(items: &[ItemId]) -> HashSet<ItemId> {
        items.iter().copied().collect()
    }

    #[test]
    fn hit_miss_hit() {
        // r, n, r with two relevant items
        let rec = [1, 9, 2];
        let r = rel(&[1, 2]);
        assert!((average_precision(&rec, &r).unwrap() - (1.0 + 2.0 / 3.0) / 2.0).abs() < 1e-15);
        let expected = (1.0 + 1.0 / 4f64.log2()) / (1.0 + 1.0 / 3f64.log2());
        assert!((ndcg(&rec, &r, 10).unwrap() - expected).abs() < 1e-15);
        assert!((expected - 0.9197).abs() < 1e-4);
        assert!((precision_at(&rec, &r, 10).unwrap() - 0.2).abs() < 1e-15);
    }

    #[test]
    fn perfect_and_empty_rankings() {
        let r = rel(&[4, 5, 6]);
        assert_eq!(average_precision(&[6, 4, 5, 1], &r).unwrap(), 1.0);
        assert_eq!(ndcg(&[5, 6, 4], &r, 10).unwrap(), 1.0);
        assert_eq!(average_precision(&[1, 2], &r).unwrap(), 0.0);
        assert_eq!(ndcg(&[1, 2], &r, 10).unwrap(), 0.0);
        assert_eq!(precision_at(&[], &r, 10).unwrap(), 0.0);
        let all: Vec<ItemId> = (0..10).collect();
        assert_eq!(precision_at(&all, &all.iter().copied().collect(), 10).unwrap(), 1.0);
    }

    #[test]
    fn precision_uses_fixed_denominator() {
        let r = rel(&[1, 2, 3, 7]);
        assert_eq!(precision_at(&[1, 2, 3], &r, 10).unwrap(), 0.3);
    }

    #[test]
    fn errors() {
        assert!(average_precision(&[1], &rel(&[])).is_err());
        assert!(ndcg(&[1], &rel(&[]), 10).is_err());
        assert!(ndcg(&[1], &rel(&[1]), 0).is_err());
        assert!(precision_at(&[1], &rel(&[1]), 0).is_err());
    }

    #[test]
    fn duplicate_recommendations_count_once() {
        assert_eq!(average_precision(&[1, 1], &rel(&[1])).unwrap(), 1.0);
    }
}
