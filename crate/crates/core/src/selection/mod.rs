//! Rank estimation, signature matching and recovery metrics.

pub mod elbow;
pub mod ess;
pub mod matching;
pub mod metrics;
pub mod rank;

pub use elbow::{elbow_curve, linear_grid, ElbowPoint};
pub use ess::{effective_sample_size, mean_ess, Ess};
pub use matching::{cosine_matrix, cosine_similarity, hungarian_match, pad_columns, Matching};
pub use metrics::{f1_score, precision_sensitivity, rmse_suite, Detection, MetricsReport, RmseReport};
pub use rank::{
    estimate_rank, fitted_intensity, from_rows, rank_from_means, summarize, FitSummary, LabelMatch, RankEstimate,
    DEFAULT_THRESHOLD_C,
};
