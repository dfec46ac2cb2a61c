//! Euclidean size of Kobayashi balls in minimal-basis coordinates, and the
//! separation of boundary-hugging geodesic endpoints.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fit::ols;
use super::gromov::certified_distance;
use super::report::{ProbeKind, ProbeReport, Sample, Verdict};
use crate::domain::{DomainKind, DomainSpec};
use crate::error::{KobError, Result};
use crate::geodesic::{solve_geodesic, SolverConfig};
use crate::metric::MetricBracket;
use crate::point::{orthogonalize, CPoint, CVector};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BallsCheck {
    pub holds: bool,
    /// `max_j |z_j − q_j| / τ_j(q)` in minimal-basis coordinates at `q`.
    pub lhs: f64,
    /// `e^{2r} − 1`.
    pub rhs: f64,
    pub margin: f64,
    pub distance: MetricBracket,
    pub taus: Vec<f64>,
}

/// Requires a certified `k(q, z) < r`.
pub fn balls_inequality_check(d: &DomainSpec, q: &CPoint, z: &CPoint, r: f64, cfg: &SolverConfig) -> Result<BallsCheck> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(KobError::InvalidInput(format!("radius must be positive, got {r}")));
    }
    let distance = certified_distance(d, q, z, cfg)?;
    if distance.upper >= r {
        return Err(KobError::Precondition(format!("certified k(q, z) ≤ {} does not fall below r = {r}", distance.upper)));
    }
    balls_from_distance(d, q, z, r, distance)
}

pub(crate) fn balls_from_distance(d: &DomainSpec, q: &CPoint, z: &CPoint, r: f64, distance: MetricBracket) -> Result<BallsCheck> {
    let mb = d.minimal_basis(q)?;
    let diff = z - q;
    let lhs = mb
        .basis
        .iter()
        .zip(&mb.taus)
        .map(|(e, t)| diff.hermitian(e).norm() / t)
        .fold(0.0, f64::max);
    let rhs = (2.0 * r).exp_m1();
    Ok(BallsCheck { holds: lhs < rhs, lhs, rhs, margin: rhs - lhs, distance, taus: mb.taus })
}

/// Boundary region for the same-height probe: a base boundary point and a
/// tangent direction along which endpoints separate.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SameheightRegion {
    pub base: CPoint,
    /// Defaults to a complex tangent direction at `base`.
    #[serde(default)]
    pub direction: Option<CVector>,
}

fn check_finite_type(d: &DomainSpec, base: &CPoint) -> Result<()> {
    match d.kind() {
        DomainKind::Ball { .. } | DomainKind::Ellipsoid { .. } | DomainKind::SmoothConvex(_) if d.dim() >= 2 => Ok(()),
        DomainKind::OmegaPsi(_) => {
            // distance to the flat segment {(iy, 0) : |y| ≤ 2}
            let y = base[0].im.clamp(-2.0, 2.0);
            let gap = CPoint::c(&[(base[0].re, base[0].im - y), (base[1].re, base[1].im)]).norm();
            if gap < 0.5 {
                Err(KobError::Precondition("region touches the infinite-type segment of Ω_ψ".into()))
            } else {
                Ok(())
            }
        }
        DomainKind::Polydisc { .. } => {
            Err(KobError::Precondition("polydisc boundary contains complex faces (infinite type)".into()))
        }
        _ => Err(KobError::Precondition(format!("{} is not a smooth finite-type domain of dimension ≥ 2", d.label()))),
    }
}

/// For each `δ`, the largest separation of two endpoints at height `δ/2`
/// placed symmetrically along the region direction whose solved geodesic
/// stays within height `δ`; fits that separation against `δ`.
pub fn sameheight_scaling(
    d: &DomainSpec,
    region: &SameheightRegion,
    delta_grid: &[f64],
    m_type: u32,
    cfg: &SolverConfig,
) -> Result<ProbeReport> {
    d.check_dim(&region.base)?;
    check_finite_type(d, &region.base)?;
    if m_type == 0 {
        return Err(KobError::InvalidInput("type M must be positive".into()));
    }
    if delta_grid.is_empty() || delta_grid.iter().any(|x| !(*x > 0.0 && *x < (-1f64).exp())) {
        return Err(KobError::InvalidInput("delta grid must be non-empty inside (0, 1/e)".into()));
    }
    let n0 = d.supporting_hyperplane(&region.base)?;
    let v = match &region.direction {
        Some(v) => v.normalized().ok_or_else(|| KobError::InvalidInput("zero direction".into()))?,
        None => (0..d.dim())
            .find_map(|j| orthogonalize(&CPoint::basis(d.dim(), j), std::slice::from_ref(&n0)))
            .ok_or(KobError::DegenerateGradient)?,
    };
    let o = d.base_point().clone();
    let at = |s: f64, h: f64| -> Result<CPoint> {
        let dir = (&region.base.offset(&v, s) - &o)
            .normalized()
            .ok_or_else(|| KobError::Precondition("base point on the region".into()))?;
        let b = o.offset(&dir, d.ray_exit(&o, &dir));
        let n = d.supporting_hyperplane(&b)?;
        Ok(b.offset(&n, -h))
    };
    let hugs = |s: f64, delta: f64| -> Result<Option<(f64, f64)>> {
        let p = at(-s, 0.5 * delta)?;
        let q = at(s, 0.5 * delta)?;
        let r = solve_geodesic(d, &p, &q, cfg)?;
        Ok((r.max_boundary_distance <= delta).then(|| (p.dist(&q), r.distance.upper)))
    };
    let found: Vec<Option<Sample>> = delta_grid
        .par_iter()
        .map(|&delta| -> Result<Option<Sample>> {
            let mut s = 0.05 * delta.powf(1.0 / m_type as f64);
            let mut good = hugs(s, delta)?.map(|g| (s, g));
            let mut bad = None;
            for _ in 0..20 {
                if good.is_some() {
                    break;
                }
                bad = Some(s);
                s *= 0.5;
                good = hugs(s, delta)?.map(|g| (s, g));
            }
            let Some(mut best) = good else { return Ok(None) };
            while bad.is_none() && best.0 < 1.0 {
                let t = best.0 * 2.0;
                match hugs(t, delta)? {
                    Some(g) => best = (t, g),
                    None => bad = Some(t),
                }
            }
            if let Some(mut hi) = bad {
                for _ in 0..10 {
                    let mid = 0.5 * (best.0 + hi);
                    match hugs(mid, delta)? {
                        Some(g) => best = (mid, g),
                        None => hi = mid,
                    }
                }
            }
            let (_, (sep, len)) = best;
            Ok(Some(Sample::new(delta, sep, sep, sep).with("path_upper", len)))
        })
        .collect::<Result<_>>()?;
    let mut report = ProbeReport::new(ProbeKind::Sameheight, delta_grid.to_vec());
    report.param("region", region);
    report.param("m_type", &m_type);
    report.param("solver", cfg);
    for (delta, s) in delta_grid.iter().zip(found) {
        match s {
            Some(s) => report.samples.push(s),
            None => report.note(format!("no boundary-hugging geodesic found at δ = {delta}; sample dropped")),
        }
    }
    report.note("fitted prefactors are empirical; the constants of the scaling law are only known to exist");
    if report.samples.len() < 2 {
        return Ok(report);
    }
    let xs: Vec<f64> = report.samples.iter().map(|s| s.grid_value.ln()).collect();
    let ys: Vec<f64> = report.samples.iter().map(|s| s.statistic.ln()).collect();
    let fit = ols(&xs, &ys)?;
    let inv_m = 1.0 / m_type as f64;
    let c2 = report
        .samples
        .iter()
        .map(|s| s.statistic / (s.grid_value.powf(inv_m) * (1.0 / s.grid_value).ln()))
        .fold(0.0, f64::max);
    report.fitted.insert("exponent".into(), fit.slope);
    report.fitted.insert("prefactor".into(), c2);
    if (fit.slope - inv_m).abs() <= 0.15 {
        report.classify(Verdict::Consistent, Some("consistent-with-type"));
    }
    Ok(report)
}
