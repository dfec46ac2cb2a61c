//! Growth of `k(o, ·)` towards the boundary and the Goldilocks function
//! `M(r) = sup{1/κ(x; X) : δ(x) ≤ r, ‖X‖ = 1}`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::fit::{ols, ols_finest_half};
use super::gromov::certified_distance;
use super::report::{ProbeKind, ProbeReport, Sample, Verdict};
use crate::domain::DomainSpec;
use crate::error::{KobError, Result};
use crate::geodesic::SolverConfig;
use crate::metric::metric_bracket;
use crate::point::{orthogonalize, CPoint};

pub(crate) fn seeded_unit(seed: u64, stream: u64, n: usize) -> CPoint {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    loop {
        let reals: Vec<f64> = (0..2 * n).map(|_| StandardNormal.sample(&mut rng)).collect();
        if let Some(u) = CPoint::from_reals(&reals).ok().and_then(|p| p.normalized()) {
            return u;
        }
    }
}

/// Point on the ray `o + s·u` whose boundary distance is close to `target`.
pub(crate) fn point_at_depth(d: &DomainSpec, o: &CPoint, u: &CPoint, target: f64) -> Result<Option<CPoint>> {
    let exit = d.ray_exit(o, u);
    if !exit.is_finite() || exit <= target {
        return Ok(None);
    }
    let mut s = target;
    let mut best = None;
    for _ in 0..8 {
        if s >= exit {
            return Ok(best);
        }
        let z = o.offset(u, exit - s);
        if !d.contains(&z)? {
            s *= 2.0;
            continue;
        }
        let dz = d.boundary_distance(&z)?;
        if dz <= 0.0 {
            s *= 2.0;
            continue;
        }
        best = Some(z);
        if (dz / target - 1.0).abs() < 1e-3 {
            break;
        }
        s *= target / dz;
    }
    Ok(best)
}

/// Fits upper bounds of `k(o, z)` against `log(1/δ(z))` for near-boundary
/// samples with `δ` spread log-uniformly over `[1e-5, 1e-1]`.
pub fn growth_fit(d: &DomainSpec, o: &CPoint, n_samples: usize, seed: u64, cfg: &SolverConfig) -> Result<ProbeReport> {
    if n_samples < 8 {
        return Err(KobError::InvalidInput(format!("growth fit needs at least 8 samples, got {n_samples}")));
    }
    d.check_dim(o)?;
    let points: Vec<CPoint> = (0..n_samples)
        .into_par_iter()
        .map(|i| -> Result<Option<CPoint>> {
            let target = 10f64.powf(-1.0 - 4.0 * (i as f64 + 0.5) / n_samples as f64);
            for attempt in 0..32u64 {
                let u = seeded_unit(seed, (i as u64) << 8 | attempt, d.dim());
                if let Some(z) = point_at_depth(d, o, &u, target)? {
                    return Ok(Some(z));
                }
            }
            Ok(None)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    let mut report = growth_fit_points(d, o, &points, cfg)?;
    report.param("seed", &seed);
    Ok(report)
}

/// The fit of [`growth_fit`] on explicit sample points.
pub fn growth_fit_points(d: &DomainSpec, o: &CPoint, points: &[CPoint], cfg: &SolverConfig) -> Result<ProbeReport> {
    if points.len() < 8 {
        return Err(KobError::InvalidInput(format!("growth fit needs at least 8 samples, got {}", points.len())));
    }
    let samples: Vec<Sample> = points
        .par_iter()
        .map(|z| -> Result<Sample> {
            let dz = d.boundary_distance(z)?;
            let k = certified_distance(d, o, z, cfg)?;
            Ok(Sample::new(dz, k.lower, k.upper, k.upper).with_inputs(vec![z.clone()]))
        })
        .collect::<Result<_>>()?;
    let xs: Vec<f64> = samples.iter().map(|s| -s.grid_value.ln()).collect();
    let ys: Vec<f64> = samples.iter().map(|s| s.upper).collect();
    let fit = ols(&xs, &ys)?;
    let mut report = ProbeReport::new(ProbeKind::GrowthFit, samples.iter().map(|s| s.grid_value).collect());
    report.param("o", o);
    report.samples = samples;
    report.fitted.insert("alpha".into(), fit.slope);
    report.fitted.insert("intercept".into(), fit.intercept);
    report.fitted.insert("residual".into(), fit.residual);
    if fit.slope > 0.0 {
        report.classify(Verdict::Consistent, Some("log-growth"));
    }
    Ok(report)
}

/// Complex directions orthogonal to `nu`, plus `extra` seeded directions.
fn probe_directions(nu: &CPoint, extra: usize, seed: u64, stream: u64) -> Vec<CPoint> {
    let n = nu.dim();
    let mut dirs: Vec<CPoint> = Vec::new();
    for j in 0..n {
        let mut family = vec![nu.clone()];
        family.extend(dirs.iter().cloned());
        if let Some(v) = orthogonalize(&CPoint::basis(n, j), &family) {
            dirs.push(v);
        }
    }
    for k in 0..extra {
        dirs.push(seeded_unit(seed, stream << 8 | k as u64, n));
    }
    dirs
}

/// Largest sampled `1/κ_lower(x; X)` over unit `X` at `x`. Using the lower
/// end of the metric bracket makes each value an upper estimate.
fn inverse_metric_max(d: &DomainSpec, x: &CPoint, seed: u64, stream: u64) -> Result<f64> {
    let set = d.nearest_set(x)?;
    let nu = (&set.points[0] - x).normalized().unwrap_or_else(|| CPoint::basis(x.dim(), 0));
    let mut best = 0.0f64;
    for v in probe_directions(&nu, 8, seed, stream) {
        let lo = metric_bracket(d, x, &v)?.lower;
        if lo > 0.0 {
            best = best.max(1.0 / lo);
        }
    }
    Ok(best)
}

/// Estimates `M(r)` on a grid and classifies the tail of `∫ M(r)/r dr`.
/// `focus`, a boundary point, adds the point at depth `r` along its inward
/// normal to every sample.
pub fn goldilocks_probe(d: &DomainSpec, r_grid: &[f64], focus: Option<&CPoint>, seed: u64) -> Result<ProbeReport> {
    const RAYS: usize = 32;
    if r_grid.is_empty() || r_grid.iter().any(|r| !(*r > 0.0 && *r < d.bounding_radius())) {
        return Err(KobError::InvalidInput("r grid must be non-empty inside (0, bounding radius)".into()));
    }
    let o = d.base_point().clone();
    let raw: Vec<(f64, usize)> = r_grid
        .par_iter()
        .enumerate()
        .map(|(gi, &r)| -> Result<(f64, usize)> {
            let mut pts = Vec::new();
            if let Some(f) = focus {
                pts.push(super::visibility::inward_point(d, f, r)?);
            }
            for k in 0..RAYS {
                let u = seeded_unit(seed, (gi * RAYS + k) as u64, d.dim());
                if let Some(z) = point_at_depth(d, &o, &u, r)? {
                    pts.push(z);
                }
            }
            let mut m = 0.0f64;
            let mut used = 0;
            for (k, z) in pts.iter().enumerate() {
                if d.boundary_distance(z)? <= r * (1.0 + 1e-9) {
                    m = m.max(inverse_metric_max(d, z, seed, (gi * 64 + k) as u64 + (1 << 32))?);
                    used += 1;
                }
            }
            Ok((m, used))
        })
        .collect::<Result<_>>()?;
    if let Some(i) = raw.iter().position(|(_, used)| *used == 0) {
        return Err(KobError::Precondition(format!("no sample point with depth at most r = {}", r_grid[i])));
    }
    // M is a supremum over δ ≤ r, hence monotone in r
    let m: Vec<f64> = r_grid
        .iter()
        .map(|r| raw.iter().zip(r_grid).filter(|(_, rj)| *rj <= r).map(|((v, _), _)| *v).fold(0.0, f64::max))
        .collect();
    let mut report = ProbeReport::new(ProbeKind::Goldilocks, r_grid.to_vec());
    report.param("seed", &seed);
    if let Some(f) = focus {
        report.param("focus", f);
    }
    for ((r, mv), (_, used)) in r_grid.iter().zip(&m).zip(&raw) {
        report.samples.push(Sample::new(*r, 0.0, *mv, *mv).with("points", *used as f64));
    }
    report.note("the [lower, upper] of each sample brackets the sampled supremum from the lower metric, an upper estimate of M(r)");
    if r_grid.len() < 2 {
        report.note("a single radius shows no tail");
        return Ok(report);
    }
    let mut order: Vec<usize> = (0..r_grid.len()).collect();
    order.sort_by(|&a, &b| r_grid[a].total_cmp(&r_grid[b]));
    let integral: f64 = order
        .windows(2)
        .map(|w| 0.5 * (m[w[0]] + m[w[1]]) * (r_grid[w[1]].ln() - r_grid[w[0]].ln()))
        .sum();
    report.fitted.insert("integral".into(), integral);
    let lr: Vec<f64> = r_grid.iter().map(|r| r.ln()).collect();
    let lm: Vec<f64> = m.iter().map(|v| v.max(1e-300).ln()).collect();
    let beta = ols_finest_half(r_grid, &lr, &lm)?.slope;
    report.fitted.insert("power_exponent".into(), beta);
    let small: Vec<usize> = (0..r_grid.len()).filter(|&i| r_grid[i] < 0.1).collect();
    let gamma = if small.len() >= 2 {
        let g: Vec<f64> = small.iter().map(|&i| r_grid[i]).collect();
        let x: Vec<f64> = small.iter().map(|&i| (1.0 / r_grid[i]).ln().ln()).collect();
        let y: Vec<f64> = small.iter().map(|&i| lm[i]).collect();
        Some(-ols_finest_half(&g, &x, &y)?.slope)
    } else {
        None
    };
    if let Some(g) = gamma {
        report.fitted.insert("log_exponent".into(), g);
    }
    if beta >= 0.2 || gamma.is_some_and(|g| g >= 1.3) {
        report.classify(Verdict::Consistent, Some("integrable-tail"));
    } else if gamma.is_some_and(|g| g <= 1.1) {
        report.classify(Verdict::Consistent, Some("divergent-tail"));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disc_and_ball_have_half_log_growth() {
        let cfg = SolverConfig::default();
        for d in [DomainSpec::disc(), DomainSpec::ball(2).unwrap()] {
            let o = CPoint::zeros(d.dim());
            let r = growth_fit(&d, &o, 16, 3, &cfg).unwrap();
            let a = r.fitted["alpha"];
            assert!((0.45..=0.55).contains(&a), "{} alpha {a}", d.label());
        }
    }

    #[test]
    fn constant_depth_is_degenerate() {
        let d = DomainSpec::disc();
        let pts: Vec<CPoint> = (0..8)
            .map(|k| {
                let t = k as f64;
                CPoint::c(&[(0.9 * t.cos(), 0.9 * t.sin())])
            })
            .collect();
        let e = growth_fit_points(&d, &CPoint::zeros(1), &pts, &SolverConfig::default()).unwrap_err();
        assert!(matches!(e, KobError::DegenerateFit(_)));
        assert!(growth_fit(&d, &CPoint::zeros(1), 7, 0, &SolverConfig::default()).is_err());
    }

    #[test]
    fn ball_goldilocks_is_integrable() {
        let d = DomainSpec::ball(2).unwrap();
        let grid = super::super::fit::geometric_grid(1e-1, 1e-4, 4).unwrap();
        let r = goldilocks_probe(&d, &grid, None, 5).unwrap();
        assert_eq!(r.classification.as_deref(), Some("integrable-tail"));
        // M(r) = sup 1/κ = √(2r − r²) on the unit ball
        for s in &r.samples {
            let want = (2.0 * s.grid_value - s.grid_value.powi(2)).sqrt();
            assert!(s.upper <= want * (1.0 + 1e-9) && s.upper >= 0.9 * want, "{} {}", s.upper, want);
        }
        let one = goldilocks_probe(&d, &[0.1], None, 5).unwrap();
        assert_eq!(one.verdict, Verdict::Inconclusive);
    }
}
