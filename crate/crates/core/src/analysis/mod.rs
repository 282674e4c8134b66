//! Trace metrics, moment checks and fractal-dimension estimators.

mod convergence;
mod dimension;
mod distance;
mod moments;
pub mod stats;
mod sweep;

pub use convergence::{
    coarsen, coupled_convergence, interpolation_convergence, strictly_decreasing,
    ConvergenceConfig, ConvergenceReference, ConvergenceReport, InterpolationConfig,
    InterpolationReport, LevelDistance, DISTANCE_FLOOR,
};
pub use dimension::{
    box_dimension, box_dimension_points, densify, yardstick_dimension, DimensionFit, RulerSpec,
    ScaleSpec, MIN_FIT_SCALES,
};
pub use distance::{lp_distance, lp_distance_relaxed, sup_distance};
pub use moments::{
    closed_form_fourth, closed_form_second, ensemble_moments, gauss_hermite,
    nested_quadrature_moments, quadrature_moments, MomentMethod, MomentReport, QUADRATURE_NODES,
};
pub use sweep::{dimension_sweep, SweepCell, SweepConfig, SweepTable, MONOTONICITY_TAU};
