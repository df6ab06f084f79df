//! Recommender utility evaluation: an item-based KNN recommender, ranking
//! metrics, and the Real/Syn/Rnd cross-validation experiment.

mod experiment;
mod knn;
pub mod metrics;

pub use experiment::{
    build_fold_sets, run_utility_experiment, run_utility_experiment_with, FoldResult, FoldSets, MetricSet,
    ModelKind, UtilityConfig, UtilityReport,
};
pub use knn::{recommend, train_item_knn, ItemKnn, ItemKnnModel, UserItemMatrix};
pub use metrics::{average_precision, ndcg, precision_at};

use crate::corpus::{ClickstreamSet, ItemId};
use crate::error::Result;

/// A trained model that ranks items for a user given the items they already saw.
pub trait Recommender: Send + Sync {
    /// At most `top_n` items, best first, never containing a query item.
    fn recommend(&self, query: &[ItemId], top_n: usize) -> Vec<ItemId>;
}

/// Trains a [`Recommender`] from clickstreams. Implement this to plug other
/// model families into the utility experiment.
pub trait RecommenderTrainer: Sync {
    type Model: Recommender;

    fn train(&self, train: &ClickstreamSet) -> Result<Self::Model>;
}
