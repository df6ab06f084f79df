//! Planted ground-truth corpora for desk-scale experiments.
//!
//! Items are split into clusters. Every item gets a few weighted successors,
//! mostly inside its own cluster, and streams are walks on that first-order
//! chain. Each stream also has a topic (the cluster of its first item) and
//! successors inside the topic are boosted, which gives the corpus co-view
//! structure that reaches beyond adjacent pairs. Popularity is Zipf-like by
//! rank inside each cluster.

use std::sync::Arc;

use rand::Rng as _;

use crate::corpus::dist::sample_cdf;
use crate::corpus::{ClickstreamSet, ItemId, LengthDistribution, Vocabulary};
use crate::error::{Error, Result};
use crate::rng::{rng_from_seed, split_seed};

#[derive(Debug, Clone, PartialEq)]
pub struct PlantedConfig {
    pub items: usize,
    pub streams: usize,
    pub clusters: usize,
    /// Successors per item.
    pub out_degree: usize,
    /// Probability that a successor is drawn from the item's own cluster.
    pub locality: f64,
    /// Zipf exponent of item popularity by rank within a cluster; 0 is uniform.
    pub popularity_exponent: f64,
    /// Weight multiplier for successors in the stream's topic cluster; 1 disables topics.
    pub topic_boost: f64,
    /// Stream lengths; values below 2 are raised to 2.
    pub length: LengthDistribution,
    pub seed: u64,
}

impl Default for PlantedConfig {
    fn default() -> Self {
        PlantedConfig {
            items: 200,
            streams: 2000,
            clusters: 10,
            out_degree: 6,
            locality: 0.9,
            popularity_exponent: 0.8,
            topic_boost: 5.0,
            length: LengthDistribution::Geometric { p: 0.1 },
            seed: 17,
        }
    }
}

/// The hidden chain a planted corpus is drawn from.
#[derive(Debug, Clone)]
pub struct PlantedModel {
    pub config: PlantedConfig,
    /// `successors[i]` = `(item, weight)`; weights sum to 1.
    pub successors: Vec<Vec<(ItemId, f64)>>,
    /// Relative popularity; start items are drawn proportionally.
    pub popularity: Vec<f64>,
    /// Cluster of each item.
    pub cluster: Vec<usize>,
    start_cdf: Vec<f64>,
}

fn cdf_of(weights: impl IntoIterator<Item = f64>) -> Vec<f64> {
    let w: Vec<f64> = weights.into_iter().collect();
    let total: f64 = w.iter().sum();
    let mut acc = 0.0;
    w.iter()
        .map(|x| {
            acc += x / total;
            acc
        })
        .collect()
}

impl PlantedModel {
    pub fn new(config: PlantedConfig) -> Result<Self> {
        let n = config.items;
        if n < 2 || config.clusters == 0 || config.clusters > n || config.out_degree == 0 || config.out_degree >= n {
            return Err(Error::invalid("planted model needs items >= 2, 1 <= clusters <= items and 1 <= out_degree < items"));
        }
        if !(0.0..=1.0).contains(&config.locality) {
            return Err(Error::invalid("locality must lie in [0, 1]"));
        }
        if !(config.popularity_exponent >= 0.0 && config.topic_boost >= 1.0) {
            return Err(Error::invalid("popularity exponent must be >= 0 and topic boost >= 1"));
        }
        config.length.validate()?;
        let mut rng = rng_from_seed(split_seed(config.seed, 0));
        let cluster: Vec<usize> = (0..n).map(|i| i * config.clusters / n).collect();
        let members: Vec<Vec<usize>> = (0..config.clusters)
            .map(|c| (0..n).filter(|&i| cluster[i] == c).collect())
            .collect();
        let mut popularity = vec![0.0; n];
        for m in &members {
            for (rank, &i) in m.iter().enumerate() {
                popularity[i] = 1.0 / (rank as f64 + 1.0).powf(config.popularity_exponent);
            }
        }
        let global_cdf = cdf_of(popularity.iter().copied());
        let member_cdfs: Vec<Vec<f64>> = members.iter().map(|m| cdf_of(m.iter().map(|&i| popularity[i]))).collect();
        let mut successors = Vec::with_capacity(n);
        for i in 0..n {
            let own = &members[cluster[i]];
            let mut chosen: Vec<usize> = Vec::with_capacity(config.out_degree);
            while chosen.len() < config.out_degree {
                let j = if own.len() > 1 && rng.random::<f64>() < config.locality {
                    own[sample_cdf(&member_cdfs[cluster[i]], &mut rng)]
                } else {
                    sample_cdf(&global_cdf, &mut rng)
                };
                if j != i && !chosen.contains(&j) {
                    chosen.push(j);
                }
            }
            // skewed weights so successor rankings are well separated
            let raw: Vec<f64> = (0..chosen.len()).map(|r| 1.0 / (r as f64 + 1.0)).collect();
            let total: f64 = raw.iter().sum();
            successors.push(chosen.iter().zip(&raw).map(|(&j, &w)| (j as ItemId, w / total)).collect());
        }
        Ok(PlantedModel { config, successors, popularity, cluster, start_cdf: global_cdf })
    }

    /// Draws the corpus. Stream `s` uses seed `split_seed(split_seed(seed, 1), s)`.
    pub fn sample(&self) -> Result<ClickstreamSet> {
        let n = self.config.items;
        let vocab = Arc::new(Vocabulary::new((0..n).map(|i| format!("i{i}")))?);
        let base = split_seed(self.config.seed, 1);
        let streams = (0..self.config.streams as u64)
            .map(|s| {
                let mut rng = rng_from_seed(split_seed(base, s));
                let len = self.config.length.sample(&mut rng).max(2) as usize;
                let mut items = Vec::with_capacity(len);
                let mut cur = sample_cdf(&self.start_cdf, &mut rng) as ItemId;
                let topic = self.cluster[cur as usize];
                items.push(cur);
                while items.len() < len {
                    let succ = &self.successors[cur as usize];
                    let weights = succ.iter().map(|&(j, w)| {
                        if self.cluster[j as usize] == topic {
                            w * self.config.topic_boost
                        } else {
                            w
                        }
                    });
                    cur = succ[sample_cdf(&cdf_of(weights), &mut rng)].0;
                    items.push(cur);
                }
                items
            })
            .collect();
        ClickstreamSet::from_ids(vocab, streams)
    }
}

/// Samples a corpus from a fresh planted model.
pub fn planted_corpus(config: PlantedConfig) -> Result<ClickstreamSet> {
    PlantedModel::new(config)?.sample()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_follows_the_chain() {
        let cfg = PlantedConfig { items: 40, streams: 100, clusters: 4, ..PlantedConfig::default() };
        let model = PlantedModel::new(cfg).unwrap();
        let set = model.sample().unwrap();
        assert_eq!(set.len(), 100);
        assert_eq!(set.item_count(), 40);
        for s in set.streams() {
            assert!(s.len() >= 2);
            for w in s.items().windows(2) {
                assert!(model.successors[w[0] as usize].iter().any(|&(j, _)| j == w[1]));
            }
        }
        assert_eq!(set, model.sample().unwrap());
    }

    #[test]
    fn topics_and_popularity_shape_the_corpus() {
        let in_topic = |boost: f64| {
            let cfg = PlantedConfig { topic_boost: boost, streams: 500, ..PlantedConfig::default() };
            let model = PlantedModel::new(cfg).unwrap();
            let set = model.sample().unwrap();
            let (mut inside, mut total) = (0usize, 0usize);
            for s in set.streams() {
                let topic = model.cluster[s.first() as usize];
                for &i in &s.items()[1..] {
                    total += 1;
                    inside += usize::from(model.cluster[i as usize] == topic);
                }
            }
            inside as f64 / total as f64
        };
        assert!(in_topic(5.0) > in_topic(1.0) + 0.05);

        let model = PlantedModel::new(PlantedConfig::default()).unwrap();
        let set = model.sample().unwrap();
        let mut starts = vec![0usize; 200];
        for s in set.streams() {
            starts[s.first() as usize] += 1;
        }
        // rank 0 of a cluster is drawn about 20^0.8 ~ 11 times as often as rank 19
        let head: usize = (0..10).map(|c| starts[c * 20]).sum();
        let tail: usize = (0..10).map(|c| starts[c * 20 + 19]).sum();
        assert!(head > 4 * tail, "head {head} tail {tail}");
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(PlantedModel::new(PlantedConfig { out_degree: 200, ..PlantedConfig::default() }).is_err());
        assert!(PlantedModel::new(PlantedConfig { clusters: 0, ..PlantedConfig::default() }).is_err());
        assert!(PlantedModel::new(PlantedConfig { topic_boost: 0.5, ..PlantedConfig::default() }).is_err());
    }
}
