//! Certified Kobayashi metric and distance brackets on convex domains in ℂⁿ,
//! approximate geodesics and boundary-behavior probes.

// `!(a < b)` is how NaN-rejecting range checks read here
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod domain;
pub mod error;
pub mod point;
pub mod metric;
pub mod geodesic;
pub mod diagnostics;
pub mod cases;
pub mod svg;
