//! Minmax trend filtering: pointwise band estimators for univariate
//! nonparametric regression, with dyadic and endpoint variants, an exact
//! total variation denoising solver, and tooling for bias/noise bounds and
//! Monte-Carlo experiments.

pub mod analysis;
pub mod boundary;
pub mod dyadic;
pub mod error;
pub mod estimator;
pub mod harness;
pub mod interval;
pub mod polyfit;
pub mod tvd;

pub use boundary::{
    fit_boundary, fit_boundary_dyadic, fit_left_boundary, fit_left_boundary_dyadic, BoundaryFit,
};
pub use dyadic::{assemble_interval_system, build_tree_cache, fit_dyadic, DyadicProblem, TreeGramCache};
pub use error::{MtfError, Result};
pub use estimator::{
    fit, fit_naive, maxmin_lower, minmax_upper, FitBand, FitConfig, FullProblem, PointRule, PreparedFit,
    Variant,
};
pub use interval::{build_dyadified, DyadicTree, DyadifiedFamily, Interval};
pub use tvd::{kkt_residual, solve_tvd};
pub use analysis::{
    bias_terms, bv_partition, effective_noise, opt_closed_form, sd_term, se_term, tv_order,
    verify_deterministic_bound, BoundDiagnostics, BoundReport, IntervalFamily, NoiseMode, SeMode,
};
