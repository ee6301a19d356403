//! Mixed-membership graph clustering from systematically queried edge blocks.
//!
//! Instead of observing a whole `N x N` adjacency matrix, the pipeline works
//! from a chain of queried blocks: a blockwise truncated SVD recovers each
//! group's slab of `range(M^T)` in a local basis, pair stitching transports
//! the slabs into one shared frame, and a separable-factorization step (SPA
//! anchor selection plus simplex-constrained least squares) extracts the
//! membership matrix itself.
//!
//! Modules:
//! - [`graph_model`]: MMSB sampling (Dirichlet memberships, interaction
//!   matrix, Bernoulli adjacency blocks) and separability theory helpers.
//! - [`query_plan`]: block query patterns, validation and queried-fraction
//!   accounting.
//! - [`blocks`], [`svd`], [`stitch`]: block storage, truncated SVD and the
//!   stitching chain producing the subspace estimate.
//! - [`ssmf`]: SPA anchor selection and membership recovery.
//! - [`metrics`]: alignment-aware evaluation metrics.
//! - [`data_io`]: edge-list / ground-truth / result file formats and
//!   annotation-error injection.

pub mod blocks;
pub mod cli;
pub mod data_io;
pub mod error;
pub mod graph_model;
pub mod metrics;
pub mod query_plan;
pub mod ssmf;
pub mod stitch;
pub mod svd;

pub use blocks::BlockSet;
pub use error::{Error, Result};
pub use graph_model::{
    build_probability_blocks, g_function, min_nodes_for_separability, sample_binary_blocks,
    sample_dirichlet_memberships, sample_interaction_matrix, DirichletParams, InteractionMatrix,
    MembershipMatrix,
};
pub use metrics::{
    clustering_accuracy, hungarian, mse, nmi, relative_error, round_to_labels, spearman_src,
    subspace_distance, AlignmentResult,
};
pub use query_plan::{
    chain_plan_from_pairs, diagonal_plan, queried_fraction, validate_plan, Partition, QueryPlan,
    ValidationReport,
};
pub use ssmf::{membership_constrained, membership_direct, simplex_project, spa, AnchorSet};
pub use stitch::{estimate_range, pair_stitch, SubspaceEstimate};
pub use svd::{truncated_svd_k, SvdPair};
