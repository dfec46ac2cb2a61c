//! Turnkey experiments: the bidisc pair with two geodesics, and the Ω_ψ
//! family with its analytic-disc upper bound.

use std::f64::consts::{LN_2, PI};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diagnostics::fit::ols;
use crate::diagnostics::gromov::gromov_from_brackets;
use crate::diagnostics::{goldilocks_probe, visibility_scan, Approach, ProbeKind, ProbeReport, Sample, Verdict};
use crate::domain::{DomainSpec, OmegaPsiParams};
use crate::error::{KobError, Result};
use crate::geodesic::{bidisc_boundary_geodesic, distance_bracket_quick, SolverConfig};
use crate::metric::{disc_to_strip, distance_lower_bound, MetricBracket};
use crate::point::CPoint;

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(KobError::InvalidInput("epsilon grid is empty".into()));
    }
    if grid.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
        return Err(KobError::InvalidInput("epsilon grid must be positive".into()));
    }
    Ok(())
}

/// Bidisc endpoints `(∓(1−ε), 0)`: equal lengths of the two geodesics,
/// decay of the boundary path's height, and the log-estimate residual.
pub fn run_bidisc_case(eps_grid: &[f64]) -> Result<ProbeReport> {
    check_grid(eps_grid)?;
    let samples: Vec<Sample> = eps_grid
        .par_iter()
        .map(|&eps| -> Result<Sample> {
            let g = bidisc_boundary_geodesic(eps)?;
            let k = g.exact_distance;
            let equal = [g.diameter.length, g.boundary.length].iter().all(|l| (l - k).abs() <= 1e-12 * k);
            // ½log(1/δ) twice with δ = ε at both endpoints
            let residual = -eps.ln() - k;
            // base point 0: k(x,0) + k(0,y) = k(x,y) exactly
            let gromov = gromov_from_brackets(
                MetricBracket::exact(0.5 * k),
                MetricBracket::exact(0.5 * k),
                MetricBracket::exact(k),
            );
            Ok(Sample::new(eps, k, k, g.boundary.max_boundary_distance)
                .flag("equal-lengths", equal)
                .with("diameter_length", g.diameter.length)
                .with("boundary_length", g.boundary.length)
                .with("residual", residual)
                .with("gromov_upper", gromov.upper)
                .with("c", g.c))
        })
        .collect::<Result<_>>()?;
    let mut report = ProbeReport::new(ProbeKind::BidiscCase, eps_grid.to_vec());
    let all_equal = samples.iter().all(|s| s.flags.iter().any(|f| f == "equal-lengths"));
    let max_residual = samples.iter().map(|s| s.extra["residual"]).fold(f64::NEG_INFINITY, f64::max);
    report.samples = samples;
    report.fitted.insert("max_residual".into(), max_residual);
    report.note("statistic: largest boundary distance along the boundary-hugging geodesic");
    if eps_grid.len() >= 2 {
        let xs: Vec<f64> = eps_grid.iter().map(|e| e.ln()).collect();
        let ys: Vec<f64> = report.samples.iter().map(|s| s.statistic.ln()).collect();
        let exponent = ols(&xs, &ys)?.slope;
        report.fitted.insert("exponent".into(), exponent);
        if all_equal && max_residual <= LN_2 + 0.01 && (exponent - 0.5).abs() <= 0.1 {
            report.classify(Verdict::Consistent, Some("gromov-product-bounded-visibility-fails"));
        }
    }
    Ok(report)
}

/// The analytic-disc upper bound for `k(p_ε, q_ε)` on Ω_ψ and the data of
/// its construction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OmegaPsiBound {
    pub epsilon: f64,
    /// `ε′ = ψ⁻¹(ε)`.
    pub eps_prime: f64,
    /// `log 2 + π/(2ε′)`.
    pub bound: f64,
    /// `k_𝔻(−a/ρ, a/ρ)` with `a = tanh(π/(4ε′))`, `ρ = 1 − 2e^{−π/ε′}`;
    /// never above `bound`.
    pub disc_distance: f64,
    pub disc_radius: f64,
    pub inclusion_samples: usize,
}

/// The analytic disc `w ↦ (−iε′ φ⁻¹(ρw), ε)`, with `φ(ζ) = tanh(πζ/4)`.
fn analytic_disc(eps: f64, eps_prime: f64, rho: f64, w: Complex64) -> Result<CPoint> {
    let zeta = Complex64::new(0.0, -eps_prime) * disc_to_strip(w * rho)?;
    Ok(CPoint::from(vec![zeta, Complex64::new(eps, 0.0)]))
}

pub fn omega_psi_upper_bound(params: &OmegaPsiParams, epsilon: f64) -> Result<OmegaPsiBound> {
    const SAMPLES: usize = 256;
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(KobError::InvalidInput(format!("epsilon must be positive, got {epsilon}")));
    }
    let eps_prime = params.psi.inverse(epsilon);
    if eps_prime > 2.0 || eps_prime.powi(2) + 4.0 + epsilon.powi(2) >= params.cap_radius.powi(2) {
        return Err(KobError::Precondition(format!(
            "ψ⁻¹(ε) = {eps_prime} puts the slice rectangle outside the chart ‖z‖ < {}",
            params.cap_radius
        )));
    }
    let x = PI / (2.0 * eps_prime);
    let rho = 1.0 - 2.0 * (-2.0 * x).exp();
    let a = (0.5 * x).tanh();
    let disc_distance = 2.0 * (a / rho).atanh();
    let bound = LN_2 + x;
    let d = DomainSpec::omega_psi(params.clone())?;
    for k in 0..SAMPLES {
        let w = Complex64::from_polar(1.0, 2.0 * PI * k as f64 / SAMPLES as f64);
        let z = analytic_disc(epsilon, eps_prime, rho, w)?;
        if !d.contains(&z)? {
            return Err(KobError::InclusionFailed(format!("disc boundary point {:?} at ε = {epsilon}", z.to_reals())));
        }
    }
    // the disc passes through q_ε and p_ε at w = ±a/ρ
    for (w, want) in [(a / rho, -1.0), (-a / rho, 1.0)] {
        let z = analytic_disc(epsilon, eps_prime, rho, Complex64::new(w, 0.0))?;
        if (z[0] - Complex64::new(0.0, want)).norm() > 1e-9 {
            return Err(KobError::InclusionFailed("analytic disc misses the endpoints".into()));
        }
    }
    if !(a < rho && disc_distance <= bound) {
        return Err(KobError::InclusionFailed(format!("renormalized disc too small at ε = {epsilon}")));
    }
    Ok(OmegaPsiBound { epsilon, eps_prime, bound, disc_distance, disc_radius: rho, inclusion_samples: SAMPLES })
}

pub fn p_eps(eps: f64) -> CPoint {
    CPoint::c(&[(0.0, 1.0), (eps, 0.0)])
}

pub fn q_eps(eps: f64) -> CPoint {
    CPoint::c(&[(0.0, -1.0), (eps, 0.0)])
}

/// Ω_ψ experiment. Outside the Goldilocks regime: certified lower bounds of
/// `(p_ε|q_ε)_o` from the analytic-disc bound. In the Goldilocks regime: the
/// Goldilocks probe near the segment and a coarse visibility scan.
pub fn run_omega_psi_case(
    params: &OmegaPsiParams,
    eps_grid: &[f64],
    o: Option<&CPoint>,
    cfg: &SolverConfig,
) -> Result<ProbeReport> {
    check_grid(eps_grid)?;
    let d = DomainSpec::omega_psi(params.clone())?;
    let o = o.cloned().unwrap_or_else(|| CPoint::c(&[(0.0, 0.0), (1.0, 0.0)]));
    if !d.contains(&o)? {
        return Err(KobError::OutsideDomain("base point o".into()));
    }
    if params.psi.goldilocks_regime() {
        return goldilocks_case(&d, eps_grid, &o, cfg);
    }
    let rows: Vec<std::result::Result<Sample, String>> = eps_grid
        .par_iter()
        .map(|&eps| -> Result<std::result::Result<Sample, String>> {
            let b = match omega_psi_upper_bound(params, eps) {
                Ok(b) => b,
                Err(e @ (KobError::Precondition(_) | KobError::InclusionFailed(_))) => {
                    return Ok(Err(format!("ε = {eps} skipped: {e}")));
                }
                Err(e) => return Err(e),
            };
            let (p, q) = (p_eps(eps), q_eps(eps));
            let po = distance_bracket_quick(&d, &p, &o)?.bracket;
            let qo = distance_bracket_quick(&d, &q, &o)?.bracket;
            let pq_straight = distance_bracket_quick(&d, &p, &q)?.bracket.upper;
            let pq_lower = distance_lower_bound(&d, &p, &q)?;
            let pq = MetricBracket { lower: pq_lower, upper: pq_straight.min(b.bound).max(pq_lower) };
            let product = gromov_from_brackets(po, qo, pq);
            let delta = d.boundary_distance(&p)?;
            Ok(Ok(Sample::new(eps, product.lower, product.upper, product.lower)
                .with_inputs(vec![p, q])
                .with("bound", b.bound)
                .with("eps_prime", b.eps_prime)
                .with("residual_lower", -eps.ln() - pq.upper)
                .with("delta_numeric", delta)))
        })
        .collect::<Result<_>>()?;
    let mut report = ProbeReport::new(ProbeKind::OmegaPsiCase, eps_grid.to_vec());
    report.param("psi", &params.psi);
    report.param("o", &o);
    report.note("δ(p_ε) = ε is used analytically; delta_numeric records the ray-cast check");
    for r in rows {
        match r {
            Ok(s) => report.samples.push(s),
            Err(note) => report.note(note),
        }
    }
    if report.samples.len() >= 2 {
        let xs: Vec<f64> = report.samples.iter().map(|s| -s.grid_value.ln()).collect();
        let ys: Vec<f64> = report.statistics();
        let slope = ols(&xs, &ys)?.slope;
        let coarse = report.samples.iter().max_by(|a, b| a.grid_value.total_cmp(&b.grid_value)).expect("samples");
        let fine = report.samples.iter().min_by(|a, b| a.grid_value.total_cmp(&b.grid_value)).expect("samples");
        let increase = fine.statistic - coarse.statistic;
        report.fitted.insert("trend_slope".into(), slope);
        report.fitted.insert("increase".into(), increase);
        if slope > 0.1 && increase > 0.0 {
            report.classify(Verdict::Consistent, Some("gromov-product-diverging"));
        }
    }
    Ok(report)
}

fn goldilocks_case(d: &DomainSpec, eps_grid: &[f64], o: &CPoint, cfg: &SolverConfig) -> Result<ProbeReport> {
    let focus = CPoint::zeros(2);
    let mut report = goldilocks_probe(d, eps_grid, Some(&focus), 0)?;
    report.probe = ProbeKind::OmegaPsiCase;
    report.param("o", o);
    let mut coarse: Vec<f64> = eps_grid.to_vec();
    coarse.sort_by(|a, b| b.total_cmp(a));
    coarse.truncate(3);
    let p = CPoint::c(&[(0.0, 1.0), (0.0, 0.0)]);
    let q = CPoint::c(&[(0.0, -1.0), (0.0, 0.0)]);
    let vis = visibility_scan(d, &p, &q, &coarse, &Approach::Normal, cfg)?;
    for (k, v) in &vis.fitted {
        report.fitted.insert(format!("visibility_{k}"), *v);
    }
    report.note(format!(
        "visibility scan on ε = {coarse:?}: {}",
        vis.classification.as_deref().unwrap_or("inconclusive")
    ));
    let integrable = report.classification.as_deref() == Some("integrable-tail");
    let failing = vis.classification.as_deref() == Some("consistent-with-failure");
    if integrable && !failing {
        report.classify(Verdict::Consistent, Some("consistent-with-visibility"));
    } else {
        report.classify(Verdict::Inconclusive, None);
    }
    Ok(report)
}
