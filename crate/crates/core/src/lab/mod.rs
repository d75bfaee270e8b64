//! Numerical studies: Taylor-truncation ranks, least-squares best
//! approximation on shrinking balls, and pointwise residual orders.

mod fit;
mod manufactured;
mod rank;
mod residual;

pub use fit::{
    ball_points, best_approx_error, convergence_study, fit_on_points, log_log_slope, sphere_points, ConvergenceReport,
    FitReport, SamplingConfig, StudyMeta, EXACT_FLOOR, FIT_TRUNCATION, SLOPE_BAND,
};
pub use manufactured::{manufactured_helmholtz, random_kappa2, random_phase, ManufacturedHelmholtz};
pub use rank::{
    gpw_dimension_check, laplacian_kernel_dimension, matrix_rank, plane_wave_dimension, plane_wave_family,
    seed_plane_waves, taylor_rank, DimensionReport, RankReport, TaylorMatrix, RANK_TOLERANCE,
};
pub use residual::{
    qt_residual, residual_order_study, Differentiation, OModePreset, PointOperator, ResidualOrderReport,
    RESIDUAL_FLOOR, SPHERE_SAMPLES,
};
