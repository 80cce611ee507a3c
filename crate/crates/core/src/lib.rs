//! Finite-sample Jarque-Bera normality tests.
//!
//! The LM statistic and its finite-sample adjustment ALM have null
//! distributions that converge only slowly to chi-squared(2). This crate
//! simulates those distributions on a grid of sample sizes, stores the
//! resulting quantile tables, interpolates p-values and quantiles from them
//! and fits power series in `1/N` to the tabulated quantiles.

// `!(x > 0.0)` is used on purpose so that NaN takes the rejecting branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod dist;
pub mod error;
pub mod moments;
pub mod rng;
pub mod simulate;
pub mod surface;
pub mod table;

pub use dist::{jb_test, pjb, qjb, PValueResult, SampleSize, TestResult};
pub use error::{Error, Result};
pub use moments::{
    alm_statistic, central_moment, chi2_cdf_2df, chi2_quantile_2df, chi2_sf_2df, finite_constants,
    kurtosis, lm_statistic, skewness, FiniteSampleConstants, Sample, StatisticKind,
};
pub use rng::{stream_new, GeneratorKind, Stream, StreamSpec};
pub use simulate::{
    empirical_quantile, moment_diagnostics, simulate_null, MomentDiagnostics, QuantileTable,
    SimConfig, SimulationOutput, Simulator,
};
pub use surface::{eval_surface, fit_surface, FitOptions, SurfaceFit};
pub use table::{load_table, save_table};
