//! Gromov products and log-estimate residuals as certified brackets.

use crate::domain::DomainSpec;
use crate::error::Result;
use crate::geodesic::{distance_bracket, DistanceMethod, SolverConfig};
use crate::metric::MetricBracket;
use crate::point::CPoint;

/// Closed forms are exact up to rounding; widen them by a few ulps so
/// differences of them stay honest brackets.
pub(crate) fn rounding_safe(b: MetricBracket, method: DistanceMethod) -> MetricBracket {
    if method != DistanceMethod::ClosedForm {
        return b;
    }
    let pad = |v: f64| 4.0 * f64::EPSILON * (v.abs() + 1.0);
    MetricBracket { lower: (b.lower - pad(b.lower)).max(0.0), upper: b.upper + pad(b.upper) }
}

/// Certified bracket of `k(x, y)` with rounding padding.
pub fn certified_distance(d: &DomainSpec, x: &CPoint, y: &CPoint, cfg: &SolverConfig) -> Result<MetricBracket> {
    let e = distance_bracket(d, x, y, cfg)?;
    Ok(rounding_safe(e.bracket, e.method))
}

/// Combines distance brackets into a bracket for
/// `(x|y)_o = ½[k(x,o) + k(o,y) − k(x,y)]`. The product is non-negative by
/// the triangle inequality, so the lower end is clamped at 0.
pub fn gromov_from_brackets(xo: MetricBracket, oy: MetricBracket, xy: MetricBracket) -> MetricBracket {
    let lower = 0.5 * (xo.lower + oy.lower - xy.upper);
    let upper = 0.5 * (xo.upper + oy.upper - xy.lower);
    let upper = upper.max(0.0);
    MetricBracket { lower: lower.max(0.0).min(upper), upper }
}

pub fn gromov_product(d: &DomainSpec, x: &CPoint, y: &CPoint, o: &CPoint, cfg: &SolverConfig) -> Result<MetricBracket> {
    let xo = certified_distance(d, x, o, cfg)?;
    let oy = certified_distance(d, o, y, cfg)?;
    let xy = certified_distance(d, x, y, cfg)?;
    Ok(gromov_from_brackets(xo, oy, xy))
}

/// `½ log(1/δ(x)) + ½ log(1/δ(y)) − k(x, y)` from a given distance bracket.
pub fn residual_from_bracket(d: &DomainSpec, x: &CPoint, y: &CPoint, k: MetricBracket) -> Result<MetricBracket> {
    let s = -0.5 * d.boundary_distance(x)?.ln() - 0.5 * d.boundary_distance(y)?.ln();
    Ok(MetricBracket { lower: s - k.upper, upper: s - k.lower })
}

pub fn log_estimate_residual(d: &DomainSpec, x: &CPoint, y: &CPoint, cfg: &SolverConfig) -> Result<MetricBracket> {
    let k = certified_distance(d, x, y, cfg)?;
    residual_from_bracket(d, x, y, k)
}
