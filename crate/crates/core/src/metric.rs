//! Kobayashi–Royden metric and Kobayashi distance: closed forms on the model
//! domains, two-sided brackets on general convex domains and certified lower
//! bounds for the distance.
//!
//! Normalization: the disc carries `|X|/(1−|z|²)` and the upper half-plane
//! `|X|/(2 Im z)`, so `k_𝔻(0, r) = artanh r`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::domain::{DomainKind, DomainSpec};
use crate::error::{KobError, Result};
use crate::point::{CPoint, CVector};

/// Certified `[lower, upper]` enclosure of a metric or distance value.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricBracket {
    pub lower: f64,
    pub upper: f64,
}

impl MetricBracket {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if !(lower <= upper) || lower.is_nan() || upper.is_nan() {
            return Err(KobError::Soundness(format!("bracket lower {lower} exceeds upper {upper}")));
        }
        Ok(MetricBracket { lower, upper })
    }

    pub fn exact(v: f64) -> Self {
        MetricBracket { lower: v, upper: v }
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lower <= v && v <= self.upper
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }
}

/// `1 − |z|²` computed as `(1 − |z|)(1 + |z|)`.
fn one_minus_sq(r: f64) -> f64 {
    (1.0 - r) * (1.0 + r)
}

fn unit_ball_metric(w: &CPoint, x: &CVector) -> f64 {
    let r = w.norm();
    let p = one_minus_sq(r);
    let xw = x.hermitian(w).norm();
    (p * x.norm_sqr() + xw * xw).sqrt() / p
}

/// Exact metric on the model domains.
pub fn metric_exact(d: &DomainSpec, z: &CPoint, x: &CVector) -> Result<f64> {
    d.check_dim(x)?;
    if !d.contains(z)? {
        return Err(KobError::OutsideDomain(format!("{:?}", z.to_reals())));
    }
    match d.kind() {
        DomainKind::Disc => Ok(x[0].norm() / one_minus_sq(z[0].norm())),
        DomainKind::HalfPlane => Ok(x[0].norm() / (2.0 * z[0].im)),
        DomainKind::Polydisc { .. } => Ok(z
            .coords()
            .iter()
            .zip(x.coords())
            .map(|(zj, xj)| xj.norm() / one_minus_sq(zj.norm()))
            .fold(0.0, f64::max)),
        DomainKind::Ball { center, radius } => {
            let w = (z - center).scale(1.0 / radius);
            Ok(unit_ball_metric(&w, &x.scale(1.0 / radius)))
        }
        _ => Err(KobError::NoClosedForm(d.label())),
    }
}

/// `[‖X‖/(2t), ‖X‖/t]` with `t = δ_D(z; X/‖X‖)`, valid on every convex
/// domain; the degenerate exact bracket on the model domains.
pub fn metric_bracket(d: &DomainSpec, z: &CPoint, x: &CVector) -> Result<MetricBracket> {
    if x.norm() == 0.0 {
        return Err(KobError::InvalidInput("tangent vector must be non-zero".into()));
    }
    if d.has_closed_form() {
        return Ok(MetricBracket::exact(metric_exact(d, z, x)?));
    }
    let t = d.directional_distance(z, x)?;
    let n = x.norm();
    Ok(MetricBracket { lower: n / (2.0 * t), upper: n / t })
}

/// Upper side of the bracket, with a cheaper slice search on the ray-cast
/// domains. Used inside the path optimizer; final lengths are recomputed
/// with [`metric_bracket`].
pub(crate) fn metric_upper_fast(d: &DomainSpec, z: &CPoint, x: &CVector) -> Result<f64> {
    let n = x.norm();
    if n == 0.0 {
        return Ok(0.0);
    }
    if d.has_closed_form() {
        return metric_exact(d, z, x);
    }
    Ok(n / d.directional_distance_fast(z, x)?)
}

fn check_disc(a: Complex64) -> Result<()> {
    if !(a.norm() < 1.0) {
        return Err(KobError::OutsideDomain(format!("{a} is not in the unit disc")));
    }
    Ok(())
}

/// Kobayashi distance of the unit ball of ℂⁿ (the disc for n = 1).
fn unit_ball_distance(z: &CPoint, w: &CPoint) -> f64 {
    let a = (Complex64::new(1.0, 0.0) - z.hermitian(w)).norm();
    let zz = z.norm_sqr();
    let ww = w.norm_sqr();
    let zw = z.hermitian(w).norm_sqr();
    // |1 − ⟨z,w⟩|² − (1 − |z|²)(1 − |w|²) without cancellation
    let num = (z.dist(w).powi(2) - zz * ww + zw).max(0.0);
    let p = one_minus_sq(z.norm()) * one_minus_sq(w.norm());
    ((a + num.sqrt()) / p.sqrt()).ln().max(0.0)
}

/// Poincaré distance `½ log((1+m)/(1−m))`, `m = |a−b|/|1−āb|`.
pub fn disc_distance(a: Complex64, b: Complex64) -> Result<f64> {
    check_disc(a)?;
    check_disc(b)?;
    // |1 − āb|² = |a − b|² + (1 − |a|²)(1 − |b|²)
    let ab = (a - b).norm();
    let p = one_minus_sq(a.norm()) * one_minus_sq(b.norm());
    let q = (ab * ab + p).sqrt();
    Ok(((q + ab) / p.sqrt()).ln())
}

/// Distance of the upper half-plane `{Im z > 0}`.
pub fn halfplane_distance(a: Complex64, b: Complex64) -> Result<f64> {
    if !(a.im > 0.0 && b.im > 0.0) {
        return Err(KobError::OutsideDomain(format!("{a} or {b} is not in the upper half-plane")));
    }
    let num = (a - b.conj()).norm() + (a - b).norm();
    Ok((num / (2.0 * (a.im * b.im).sqrt())).ln().max(0.0))
}

/// `max_j k_𝔻(z_j, w_j)`.
pub fn polydisc_distance(z: &CPoint, w: &CPoint) -> Result<f64> {
    if z.dim() != w.dim() {
        return Err(KobError::DimensionMismatch { expected: z.dim(), found: w.dim() });
    }
    let mut m = 0.0f64;
    for (a, b) in z.coords().iter().zip(w.coords()) {
        m = m.max(disc_distance(*a, *b)?);
    }
    Ok(m)
}

/// Closed-form distance on the model domains.
pub fn exact_distance(d: &DomainSpec, x: &CPoint, y: &CPoint) -> Result<f64> {
    d.check_dim(x)?;
    d.check_dim(y)?;
    match d.kind() {
        DomainKind::Disc => disc_distance(x[0], y[0]),
        DomainKind::HalfPlane => halfplane_distance(x[0], y[0]),
        DomainKind::Polydisc { .. } => polydisc_distance(x, y),
        DomainKind::Ball { center, radius } => {
            for p in [x, y] {
                if !d.contains(p)? {
                    return Err(KobError::OutsideDomain(format!("{:?}", p.to_reals())));
                }
            }
            let s = 1.0 / radius;
            Ok(unit_ball_distance(&(x - center).scale(s), &(y - center).scale(s)))
        }
        _ => Err(KobError::NoClosedForm(d.label())),
    }
}

/// The estimate that won in [`distance_lower_bound_detail`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LowerBoundBranch {
    /// `½|log(δ(y)/δ(x))|`.
    DepthRatio,
    /// Projection onto the half-plane bounded by a supporting hyperplane.
    HalfPlaneProjection,
    /// Two opposite supporting hyperplanes confine the pair to a strip.
    Strip,
    /// `½ log(1 + ‖x−y‖/min(t_x, t_y))` from the directional distances.
    Directional,
    Zero,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LowerBound {
    pub value: f64,
    pub branch: LowerBoundBranch,
    pub depth_ratio: f64,
    pub projection: f64,
    pub strip: f64,
    pub directional: f64,
}

impl LowerBound {
    /// True when the directional estimate decided the bound; reports flag
    /// such results as "repaired-reading".
    pub fn repaired_reading(&self) -> bool {
        self.branch == LowerBoundBranch::Directional
    }
}

/// Relative shave applied to every lower bound to absorb round-off.
const ROUNDOFF_SHAVE: f64 = 1e-12;

/// Certified lower bound for `k_D(x, y)` on a convex domain.
pub fn distance_lower_bound(d: &DomainSpec, x: &CPoint, y: &CPoint) -> Result<f64> {
    Ok(distance_lower_bound_detail(d, x, y)?.value)
}

pub fn distance_lower_bound_detail(d: &DomainSpec, x: &CPoint, y: &CPoint) -> Result<LowerBound> {
    let dx = d.nearest_set(x)?;
    let dy = d.nearest_set(y)?;
    let mut lb = LowerBound {
        value: 0.0,
        branch: LowerBoundBranch::Zero,
        depth_ratio: 0.0,
        projection: 0.0,
        strip: 0.0,
        directional: 0.0,
    };
    if x == y {
        return Ok(lb);
    }
    lb.depth_ratio = 0.5 * (dy.distance / dx.distance).ln().abs();

    // Supporting hyperplanes at the nearest points. The ball B(x, δ(x)) sits
    // in D and touches ∂D at ζ, so the hyperplane through ζ orthogonal to
    // ζ − x is the only one that can support D there.
    let margin = if d.exact_geometry() { 0.0 } else { 1e-8 * d.bounding_radius().min(1e3) };
    let frame = |z: &CPoint, dist: f64, zeta: &CPoint| {
        let n = (zeta - z).scale(1.0 / dist);
        (zeta.offset(&n, margin), n)
    };
    let (zx, nx) = frame(x, dx.distance, &dx.points[0]);
    let (zy, ny) = frame(y, dy.distance, &dy.points[0]);
    // w ↦ i⟨ζ − w, n⟩ maps D into the upper half-plane
    let to_h = |zeta: &CPoint, n: &CPoint, w: &CPoint| (zeta - w).hermitian(n) * Complex64::new(0.0, 1.0);
    for (zeta, n) in [(&zx, &nx), (&zy, &ny)] {
        let (a, b) = (to_h(zeta, n, x), to_h(zeta, n, y));
        if a.im > 0.0 && b.im > 0.0 {
            lb.projection = lb.projection.max(halfplane_distance(a, b)?);
        }
    }
    if d.exact_geometry() && nx.hermitian(&ny).re <= -1.0 + 1e-12 {
        // D lies in the strip 0 < Re⟨ζx − w, n⟩ < Δ; any path from x to y
        // crosses its midline
        let delta = (&zx - &zy).hermitian(&nx).re;
        let eta = 0.5 * delta;
        let ax = (&zx - x).hermitian(&nx).re;
        let by = (&zy - y).hermitian(&ny).re;
        if ax > 0.0 && by > 0.0 && eta > 0.0 {
            lb.strip = 0.5 * (eta / ax).ln().max(0.0) + 0.5 * (eta / by).ln().max(0.0);
        }
    }
    let v = y - x;
    let tx = d.directional_distance(x, &v)?;
    let ty = d.directional_distance(y, &v)?;
    lb.directional = 0.5 * (v.norm() / tx.min(ty)).ln_1p();

    let candidates = [
        (lb.depth_ratio, LowerBoundBranch::DepthRatio),
        (lb.projection, LowerBoundBranch::HalfPlaneProjection),
        (lb.strip, LowerBoundBranch::Strip),
        (lb.directional, LowerBoundBranch::Directional),
    ];
    for (v, b) in candidates {
        if v > lb.value {
            lb.value = v;
            lb.branch = b;
        }
    }
    lb.value *= 1.0 - ROUNDOFF_SHAVE;
    Ok(lb)
}

/// `k_H(iδ, H ∖ D̄(0, η)) = ½ log(η/δ)`.
pub fn halfplane_hole_distance(delta: f64, eta: f64) -> Result<f64> {
    if !(delta > 0.0 && eta > 0.0) {
        return Err(KobError::InvalidInput("delta and eta must be positive".into()));
    }
    if delta >= eta {
        return Err(KobError::Precondition(format!("need delta < eta, got {delta} ≥ {eta}")));
    }
    Ok(0.5 * (eta.ln() - delta.ln()))
}

/// Conformal map of the strip `{|Im ζ| < 1}` onto the unit disc,
/// `(e^{πζ/2} − 1)/(e^{πζ/2} + 1) = tanh(πζ/4)`.
pub fn strip_to_disc(zeta: Complex64) -> Result<Complex64> {
    if !(zeta.im.abs() <= 1.0) || !zeta.re.is_finite() {
        return Err(KobError::OutsideDomain(format!("{zeta} is outside the strip |Im| < 1")));
    }
    Ok((zeta * (std::f64::consts::PI / 4.0)).tanh())
}

/// Inverse of [`strip_to_disc`]: `(4/π) artanh(w)`.
pub fn disc_to_strip(w: Complex64) -> Result<Complex64> {
    check_disc(w)?;
    Ok(w.atanh() * (4.0 / std::f64::consts::PI))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn metric_examples() {
        let d = DomainSpec::disc();
        let m = metric_exact(&d, &CPoint::c(&[(0.5, 0.0)]), &CPoint::c(&[(1.0, 0.0)])).unwrap();
        assert!((m - 4.0 / 3.0).abs() < 1e-15);
        let pd = DomainSpec::polydisc(2).unwrap();
        let m = metric_exact(&pd, &CPoint::c(&[(0.5, 0.0), (0.0, 0.0)]), &CPoint::basis(2, 1)).unwrap();
        assert!((m - 1.0).abs() < 1e-15);
        let e = DomainSpec::ellipsoid(vec![1.0, 2.0]).unwrap();
        let b = metric_bracket(&e, &CPoint::zeros(2), &CPoint::basis(2, 1)).unwrap();
        assert!((b.lower - 0.25).abs() < 1e-15 && (b.upper - 0.5).abs() < 1e-15);
        assert!(matches!(metric_exact(&e, &CPoint::zeros(2), &CPoint::basis(2, 0)), Err(KobError::NoClosedForm(_))));
    }

    #[test]
    fn ball_metric_reduces_to_disc_on_a_line() {
        let b = DomainSpec::ball(2).unwrap();
        let z = CPoint::c(&[(0.3, 0.4), (0.0, 0.0)]);
        let m = metric_exact(&b, &z, &CPoint::basis(2, 0)).unwrap();
        assert!((m - 1.0 / 0.75).abs() < 1e-14);
        // transverse direction: 1/sqrt(1 − |z|²)
        let m = metric_exact(&b, &z, &CPoint::basis(2, 1)).unwrap();
        assert!((m - 1.0 / 0.75f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn distance_examples() {
        assert!((disc_distance(c(0.0, 0.0), c(0.5, 0.0)).unwrap() - 0.5f64.atanh()).abs() < 1e-15);
        assert!((disc_distance(c(-0.9, 0.0), c(0.9, 0.0)).unwrap() - 19f64.ln()).abs() < 1e-14);
        assert_eq!(disc_distance(c(0.2, 0.1), c(0.2, 0.1)).unwrap(), 0.0);
        let z = CPoint::c(&[(0.8, 0.0), (0.0, 0.0)]);
        let w = CPoint::c(&[(0.0, 0.0), (0.8, 0.0)]);
        assert!((polydisc_distance(&z, &w).unwrap() - 0.5 * 9f64.ln()).abs() < 1e-14);
        assert!((halfplane_distance(c(0.0, 1.0), c(0.0, 2.0)).unwrap() - 0.5 * 2f64.ln()).abs() < 1e-15);
        assert!(disc_distance(c(1.0, 0.0), c(0.0, 0.0)).is_err());
    }

    #[test]
    fn ball_distance_matches_disc_on_complex_lines() {
        let b = DomainSpec::ball(2).unwrap();
        // the slice through 0 spanned by u is a totally geodesic disc
        let u = CPoint::c(&[(0.6, 0.0), (0.0, 0.8)]);
        let (s, t) = (c(0.3, 0.5), c(-0.7, 0.1));
        let x = u.scale_complex(s);
        let y = u.scale_complex(t);
        let got = exact_distance(&b, &x, &y).unwrap();
        assert!((got - disc_distance(s, t).unwrap()).abs() < 1e-13);
    }

    #[test]
    fn disc_distance_is_accurate_near_the_boundary() {
        // artanh(1 − ε) = ½ log((2 − ε)/ε)
        for &e in &[1e-6f64, 1e-10, 1e-14] {
            let r = 1.0 - e;
            // the gap actually represented in floating point
            let e = 1.0 - r;
            let want: f64 = 0.5 * ((2.0 - e) / e).ln();
            let got = disc_distance(c(0.0, 0.0), c(r, 0.0)).unwrap();
            assert!((got - want).abs() < 1e-9 * want, "{e}: {got} vs {want}");
        }
    }

    #[test]
    fn lower_bound_examples() {
        let d = DomainSpec::disc();
        let lb = distance_lower_bound(&d, &CPoint::c(&[(0.0, 0.0)]), &CPoint::c(&[(0.5, 0.0)])).unwrap();
        assert!(lb >= 0.5 * 2f64.ln() * (1.0 - 1e-12) && lb <= 0.5f64.atanh());
        let b = DomainSpec::ball(2).unwrap();
        let x = CPoint::c(&[(0.9, 0.0), (0.0, 0.0)]);
        let y = CPoint::c(&[(-0.9, 0.0), (0.0, 0.0)]);
        let det = distance_lower_bound_detail(&b, &x, &y).unwrap();
        assert!(det.value >= 2.1972246, "{det:?}");
        assert!(det.value <= 19f64.ln());
        assert_eq!(distance_lower_bound(&b, &x, &x).unwrap(), 0.0);
    }

    #[test]
    fn lower_bound_is_symmetric() {
        let pd = DomainSpec::polydisc(2).unwrap();
        let x = CPoint::c(&[(0.3, 0.2), (-0.5, 0.1)]);
        let y = CPoint::c(&[(-0.6, 0.0), (0.2, 0.7)]);
        let a = distance_lower_bound(&pd, &x, &y).unwrap();
        let b = distance_lower_bound(&pd, &y, &x).unwrap();
        assert!((a - b).abs() < 1e-14);
    }

    #[test]
    fn hole_and_strip_maps() {
        assert!((halfplane_hole_distance(0.01, 1.0).unwrap() - 0.5 * 100f64.ln()).abs() < 1e-15);
        assert!((halfplane_hole_distance(0.5, 1.0).unwrap() - 0.5 * 2f64.ln()).abs() < 1e-15);
        assert!(halfplane_hole_distance(1.0, 1.0).is_err());
        for &delta in &[0.1, 0.37, 0.9] {
            assert_eq!(halfplane_hole_distance(delta, 1.0).unwrap() + 0.5 * f64::ln(delta), 0.0);
        }
        assert_eq!(strip_to_disc(c(0.0, 0.0)).unwrap(), c(0.0, 0.0));
        let e = (PI).exp();
        assert!((strip_to_disc(c(2.0, 0.0)).unwrap() - c((e - 1.0) / (e + 1.0), 0.0)).norm() < 1e-15);
        for k in 0..20 {
            let x = -5.0 + 0.5 * k as f64;
            assert!((strip_to_disc(c(x, 1.0)).unwrap().norm() - 1.0).abs() < 1e-10);
        }
        assert!(strip_to_disc(c(0.0, 1.5)).is_err());
        let w = c(0.3, -0.6);
        assert!((strip_to_disc(disc_to_strip(w).unwrap()).unwrap() - w).norm() < 1e-14);
    }
}
