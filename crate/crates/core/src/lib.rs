//! Minimum sum-of-squares clustering with variable neighborhood search over random
//! samples, a generic VNS kernel, and an experiment harness.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bigvns;
pub mod error;
pub mod harness;
pub mod kmeans;
pub mod model;
pub mod vns;

pub use bigvns::{big_vns_clust, kmeans_full, kmeans_full_from, shake_centroids, BigVnsParams, ClusteringResult};
pub use error::{Error, Result};
pub use kmeans::{kmeanspp_next_center, kmeanspp_seed, lloyd, LloydOutcome, LloydParams};
pub use model::{
    assign_points, draw_sample, objective, squared_distance, update_centroids, Assignment, CentroidSet, DataMatrix,
    ObjectiveValue, SampleIndexSet, Slot,
};
