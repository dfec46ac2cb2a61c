//! Numerical probes of boundary behavior. Every sample carries certified
//! brackets; a verdict of `violated` is reserved for a certified
//! contradiction.

pub mod balls;
pub mod fit;
pub mod gromov;
pub mod growth;
pub mod localize;
pub mod report;
pub mod visibility;

pub use balls::{balls_inequality_check, sameheight_scaling, BallsCheck, SameheightRegion};
pub use fit::{geometric_grid, ols, LineFit};
pub use gromov::{certified_distance, gromov_from_brackets, gromov_product, log_estimate_residual, residual_from_bracket};
pub use growth::{goldilocks_probe, growth_fit, growth_fit_points};
pub use localize::{localization_check, localization_check_pairs};
pub use report::{fmt_float, ProbeKind, ProbeReport, Sample, Verdict, REPORT_SCHEMA};
pub use visibility::{k_point_probe, visibility_scan, Approach};
