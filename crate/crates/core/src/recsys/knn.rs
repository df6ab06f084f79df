use std::collections::HashMap;

use rayon::prelude::*;

use super::{Recommender, RecommenderTrainer};
use crate::corpus::{ClickstreamSet, ItemId};
use crate::error::{Error, Result};

/// Binary implicit feedback: one user per clickstream, the set of items in it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UserItemMatrix {
    items: usize,
    /// Distinct items per user, ascending.
    users: Vec<Vec<ItemId>>,
}

impl UserItemMatrix {
    pub fn from_clickstreams(set: &ClickstreamSet) -> Self {
        let users = set
            .streams()
            .iter()
            .map(|s| {
                let mut items = s.items().to_vec();
                items.sort_unstable();
                items.dedup();
                items
            })
            .collect();
        UserItemMatrix { items: set.item_count(), users }
    }

    pub fn user_count(&self) -> usize {
        self.users.len()
    }

    pub fn item_count(&self) -> usize {
        self.items
    }

    pub fn user(&self, u: usize) -> &[ItemId] {
        &self.users[u]
    }

    /// Users of each item, ascending.
    pub fn item_users(&self) -> Vec<Vec<u32>> {
        let mut out = vec![Vec::new(); self.items];
        for (u, items) in self.users.iter().enumerate() {
            for &i in items {
                out[i as usize].push(u as u32);
            }
        }
        out
    }
}

/// Item-item cosine neighborhoods.
#[derive(Debug, Clone, PartialEq)]
pub struct ItemKnnModel {
    k: usize,
    neighbors: Vec<Vec<(ItemId, f64)>>,
}

impl ItemKnnModel {
    pub fn k(&self) -> usize {
        self.k
    }

    /// Up to `k` `(item, similarity)` pairs, most similar first.
    pub fn neighbors(&self, item: ItemId) -> &[(ItemId, f64)] {
        self.neighbors.get(item as usize).map_or(&[], Vec::as_slice)
    }

    pub fn item_count(&self) -> usize {
        self.neighbors.len()
    }

    pub fn similarity(&self, a: ItemId, b: ItemId) -> f64 {
        self.neighbors(a)
            .iter()
            .find(|&&(j, _)| j == b)
            .map_or(0.0, |&(_, s)| s)
    }

    /// Scored candidates for a query, best first.
    pub fn recommend_scored(&self, query: &[ItemId], top_n: usize) -> Vec<(ItemId, f64)> {
        let mut seen: Vec<ItemId> = query
            .iter()
            .copied()
            .filter(|&q| (q as usize) < self.neighbors.len())
            .collect();
        seen.sort_unstable();
        seen.dedup();
        let mut scores: HashMap<ItemId, f64> = HashMap::new();
        for &q in &seen {
            for &(j, s) in &self.neighbors[q as usize] {
                *scores.entry(j).or_default() += s;
            }
        }
        let mut ranked: Vec<(ItemId, f64)> = scores
            .into_iter()
            .filter(|&(j, s)| s > 0.0 && seen.binary_search(&j).is_err())
            .collect();
        ranked.sort_unstable_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        ranked.truncate(top_n);
        ranked
    }
}

impl Recommender for ItemKnnModel {
    fn recommend(&self, query: &[ItemId], top_n: usize) -> Vec<ItemId> {
        self.recommend_scored(query, top_n).into_iter().map(|(j, _)| j).collect()
    }
}

/// Trains item KNN with cosine similarity over user sets:
/// `sim(i, j) = |U_i & U_j| / sqrt(|U_i| * |U_j|)`, keeping the `k` most
/// similar items (ties by ascending id).
pub fn train_item_knn(train: &ClickstreamSet, k: usize) -> Result<ItemKnnModel> {
    if train.is_empty() {
        return Err(Error::invalid("cannot train on an empty clickstream set"));
    }
    if k == 0 {
        return Err(Error::invalid("k must be >= 1"));
    }
    let uim = UserItemMatrix::from_clickstreams(train);
    let item_users = uim.item_users();
    let neighbors = (0..uim.item_count())
        .into_par_iter()
        .map(|i| {
            let users_i = &item_users[i];
            if users_i.is_empty() {
                return Vec::new();
            }
            let mut overlap: HashMap<ItemId, u32> = HashMap::new();
            for &u in users_i {
                for &j in uim.user(u as usize) {
                    if j as usize != i {
                        *overlap.entry(j).or_default() += 1;
                    }
                }
            }
            let ni = users_i.len() as f64;
            let mut sims: Vec<(ItemId, f64)> = overlap
                .into_iter()
                .map(|(j, co)| (j, co as f64 / (ni * item_users[j as usize].len() as f64).sqrt()))
                .collect();
            sims.sort_unstable_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
            sims.truncate(k);
            sims
        })
        .collect();
    Ok(ItemKnnModel { k, neighbors })
}

pub fn recommend(model: &ItemKnnModel, query: &[ItemId], top_n: usize) -> Vec<ItemId> {
    model.recommend(query, top_n)
}

/// [`RecommenderTrainer`] for [`ItemKnnModel`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ItemKnn {
    pub k: usize,
}

impl RecommenderTrainer for ItemKnn {
    type Model = ItemKnnModel;

    fn train(&self, train: &ClickstreamSet) -> Result<ItemKnnModel> {
        train_item_knn(train, self.k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{parse_clickstreams, Vocabulary};
    use std::sync::Arc;

    #[test]
    fn identical_support_gives_unit_similarity() {
        let set = parse_clickstreams("a b\nb a\n", "t").unwrap();
        let m = train_item_knn(&set, 15).unwrap();
        assert_eq!(m.similarity(0, 1), 1.0);
        assert!(m.neighbors(0).iter().all(|&(j, _)| j != 0));
    }

    #[test]
    fn disjoint_items_are_not_neighbors() {
        let set = parse_clickstreams("a b\nc d\n", "t").unwrap();
        let m = train_item_knn(&set, 15).unwrap();
        assert_eq!(m.neighbors(0), &[(1, 1.0)]);
        assert_eq!(m.similarity(0, 2), 0.0);
    }

    #[test]
    fn cosine_by_hand() {
        // U_a = {u1, u2}, U_b = {u2}
        let set = parse_clickstreams("a\na b\n", "t").unwrap();
        let m = train_item_knn(&set, 15).unwrap();
        assert!((m.similarity(0, 1) - 1.0 / 2f64.sqrt()).abs() < 1e-15);
        assert!((m.similarity(1, 0) - 1.0 / 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn neighbor_lists_are_truncated_and_sorted() {
        let set = parse_clickstreams("a b c d\na b c\na b\ne\n", "t").unwrap();
        let m = train_item_knn(&set, 2).unwrap();
        for i in 0..m.item_count() as u32 {
            let nb = m.neighbors(i);
            assert!(nb.len() <= 2);
            assert!(nb.windows(2).all(|w| w[0].1 >= w[1].1));
        }
        assert!(train_item_knn(&set, 0).is_err());
    }

    fn handmade(neighbors: Vec<Vec<(ItemId, f64)>>) -> ItemKnnModel {
        ItemKnnModel { k: 15, neighbors }
    }

    #[test]
    fn scores_sum_over_query() {
        // a=0 b=1 c=2 d=3
        let m = handmade(vec![vec![(3, 0.6), (2, 0.5)], vec![(2, 0.4)], vec![], vec![]]);
        let ranked = m.recommend_scored(&[0, 1], 10);
        assert_eq!(ranked.iter().map(|r| r.0).collect::<Vec<_>>(), vec![2, 3]);
        assert!((ranked[0].1 - 0.9).abs() < 1e-15);
        assert!((ranked[1].1 - 0.6).abs() < 1e-15);
        assert_eq!(m.recommend(&[0, 1], 1), vec![2]);
    }

    #[test]
    fn query_items_never_returned() {
        let m = handmade(vec![vec![(1, 0.9), (2, 0.5)], vec![(0, 0.9)], vec![(0, 0.5)]]);
        assert_eq!(m.recommend(&[0], 10), vec![1, 2]);
        assert_eq!(m.recommend(&[0, 1], 10), vec![2]);
        assert!(m.recommend(&[2, 0, 1], 10).is_empty());
        // unknown ids contribute nothing
        assert!(m.recommend(&[77], 10).is_empty());
        let lonely = handmade(vec![vec![], vec![]]);
        assert!(lonely.recommend(&[0], 10).is_empty());
    }

    #[test]
    fn user_item_matrix_binarizes() {
        let vocab = Arc::new(Vocabulary::numbered(3).unwrap());
        let set = ClickstreamSet::from_ids(vocab, vec![vec![2, 0, 2, 2], vec![1]]).unwrap();
        let uim = UserItemMatrix::from_clickstreams(&set);
        assert_eq!(uim.user(0), &[0, 2]);
        assert_eq!(uim.item_users(), vec![vec![0], vec![1], vec![0]]);
    }
}
