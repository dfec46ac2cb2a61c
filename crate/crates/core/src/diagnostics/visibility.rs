//! Visibility scans along boundary approach sequences, and the k-point
//! statistic `k(z, W^c) + ½ log δ(z)`.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fit::{ols, ols_finest_half};
use super::report::{ProbeKind, ProbeReport, Sample, Verdict};
use crate::domain::DomainSpec;
use crate::error::{KobError, Result};
use crate::geodesic::{distance_bracket_quick, path_length, solve_geodesic, Side, SolverConfig};
use crate::metric::distance_lower_bound;
use crate::point::CPoint;

/// How the interior sequences `p_ε → p`, `q_ε → q` are produced.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Approach {
    /// `p − ε·n(p)` with `n` the outward unit normal.
    #[default]
    Normal,
    /// One explicit endpoint pair per grid value; paths are solved.
    Custom { pairs: Vec<(CPoint, CPoint)> },
    /// One explicit interior path per grid value; nothing is solved.
    SuppliedPaths { paths: Vec<Vec<CPoint>> },
}

pub(crate) fn inward_point(d: &DomainSpec, p: &CPoint, eps: f64) -> Result<CPoint> {
    let n = d.supporting_hyperplane(p)?;
    let z = p.offset(&n, -eps);
    if !d.contains(&z)? {
        return Err(KobError::Precondition(format!("inward normal offset {eps} from {:?} leaves the domain", p.to_reals())));
    }
    Ok(z)
}

const FLOOR_NOTE: &str = "the max-boundary-distance floor stands in for the compact set of the visibility definition; verdicts are consistency readings, not proofs";

pub fn visibility_scan(
    d: &DomainSpec,
    p: &CPoint,
    q: &CPoint,
    eps_grid: &[f64],
    approach: &Approach,
    cfg: &SolverConfig,
) -> Result<ProbeReport> {
    d.check_dim(p)?;
    d.check_dim(q)?;
    if p.dist(q) < 1e-12 {
        return Err(KobError::Precondition("p and q must be distinct".into()));
    }
    if eps_grid.is_empty() || eps_grid.iter().any(|e| !(*e > 0.0)) {
        return Err(KobError::InvalidInput("epsilon grid must be non-empty and positive".into()));
    }
    let per_grid = |len: usize| {
        if len != eps_grid.len() {
            Err(KobError::InvalidInput(format!("approach supplies {len} entries for {} grid values", eps_grid.len())))
        } else {
            Ok(())
        }
    };
    match approach {
        Approach::Normal => {}
        Approach::Custom { pairs } => per_grid(pairs.len())?,
        Approach::SuppliedPaths { paths } => per_grid(paths.len())?,
    }
    let samples: Vec<Sample> = (0..eps_grid.len())
        .into_par_iter()
        .map(|i| -> Result<Sample> {
            let eps = eps_grid[i];
            let (path, lower, upper) = match approach {
                Approach::SuppliedPaths { paths } => {
                    let path = paths[i].clone();
                    if path.len() < 2 {
                        return Err(KobError::InvalidInput("supplied paths need two points".into()));
                    }
                    let lower = distance_lower_bound(d, &path[0], &path[path.len() - 1])?;
                    let upper = path_length(d, &path, Side::Upper)?;
                    (path, lower, upper)
                }
                _ => {
                    let (a, b) = match approach {
                        Approach::Custom { pairs } => pairs[i].clone(),
                        _ => (inward_point(d, p, eps)?, inward_point(d, q, eps)?),
                    };
                    let r = solve_geodesic(d, &a, &b, cfg)?;
                    (r.path.points, r.distance.lower, r.distance.upper)
                }
            };
            let mut max_bd = 0.0f64;
            for z in &path {
                max_bd = max_bd.max(d.boundary_distance(z)?);
            }
            let ends = vec![path[0].clone(), path[path.len() - 1].clone()];
            Ok(Sample::new(eps, lower, upper.max(lower), max_bd).with_inputs(ends))
        })
        .collect::<Result<_>>()?;

    let mut report = ProbeReport::new(ProbeKind::VisibilityScan, eps_grid.to_vec());
    report.param("p", p);
    report.param("q", q);
    report.param("approach", approach);
    report.param("solver", cfg);
    report.samples = samples;
    report.note(FLOOR_NOTE);
    let stats = report.statistics();
    if eps_grid.len() < 2 {
        report.note("a single grid value shows no trend");
        return Ok(report);
    }
    let lx: Vec<f64> = eps_grid.iter().map(|e| e.ln()).collect();
    let ly: Vec<f64> = stats.iter().map(|s| s.max(1e-300).ln()).collect();
    let fit = ols_finest_half(eps_grid, &lx, &ly)?;
    let smin = stats.iter().cloned().fold(f64::INFINITY, f64::min);
    let smax = stats.iter().cloned().fold(0.0, f64::max);
    let coarse = argmax(eps_grid);
    let fine = argmin(eps_grid);
    report.fitted.insert("exponent".into(), fit.slope);
    report.fitted.insert("prefactor".into(), fit.intercept.exp());
    report.fitted.insert("floor".into(), smin);
    if smin >= 0.5 * smax && fit.slope.abs() < 0.1 {
        report.classify(Verdict::Consistent, Some("consistent-with-visibility"));
    } else if fit.slope >= 0.2 && stats[fine] <= 0.5 * stats[coarse] {
        report.classify(Verdict::Consistent, Some("consistent-with-failure"));
    }
    Ok(report)
}

fn argmax(v: &[f64]) -> usize {
    (0..v.len()).max_by(|&a, &b| v[a].total_cmp(&v[b])).expect("non-empty")
}

fn argmin(v: &[f64]) -> usize {
    (0..v.len()).min_by(|&a, &b| v[a].total_cmp(&v[b])).expect("non-empty")
}

/// Points of `∂W ∩ D` for `W = B(p, R)`: seeded directions on the sphere,
/// each followed by a ladder of points sliding towards `∂D` along the sphere
/// with depths dropping by factors of 4 down to `min_depth`.
fn w_boundary_samples(d: &DomainSpec, p: &CPoint, radius: f64, min_depth: f64, seed: u64) -> Result<Vec<CPoint>> {
    const BASE: usize = 64;
    let n = d.supporting_hyperplane(p)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let on_sphere = |v: &CPoint| v.normalized().map(|u| p.offset(&u, radius));
    let mut base = Vec::new();
    for _ in 0..BASE * 64 {
        if base.len() >= BASE {
            break;
        }
        let reals: Vec<f64> = (0..2 * p.dim()).map(|_| StandardNormal.sample(&mut rng)).collect();
        let v = CPoint::from_reals(&reals)?;
        // companion direction with a real normal component: sliding it reaches
        // ∂D along the real normal, where the nearest points of ∂W sit
        let real_normal = &v - &n.scale_complex(Complex64::new(0.0, v.hermitian(&n).im));
        for u in [v, real_normal] {
            let Some(w) = on_sphere(&u) else { continue };
            if d.contains_unchecked(&w) && d.depth_estimate(&w) > 1e-6 * radius {
                base.push(w);
            }
        }
    }
    if base.is_empty() {
        return Err(KobError::Precondition(format!("W of radius {radius} leaves no part of the domain outside it")));
    }
    let ladders: Vec<Vec<CPoint>> = base
        .par_iter()
        .map(|w0| {
            let along = |s: f64| on_sphere(&(&(w0 - p) + &n.scale(s)));
            let depth = |w: &CPoint| if d.contains_unchecked(w) { d.boundary_distance(w).unwrap_or(0.0) } else { 0.0 };
            let d0 = depth(w0);
            let mut out = vec![w0.clone()];
            let mut s_exit = d0.max(1e-12);
            let mut found = false;
            for _ in 0..80 {
                match along(s_exit) {
                    Some(w) if d.contains_unchecked(&w) => s_exit *= 2.0,
                    _ => {
                        found = true;
                        break;
                    }
                }
            }
            if !found {
                return out;
            }
            let mut target = d0 / 4.0;
            let mut lo = 0.0;
            while target >= min_depth / 4.0 {
                let mut hi = s_exit;
                let mut best = None;
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    match along(mid) {
                        Some(w) if depth(&w) >= target => {
                            lo = mid;
                            best = Some(w);
                        }
                        _ => hi = mid,
                    }
                }
                if let Some(w) = best {
                    out.push(w);
                }
                target /= 4.0;
            }
            out
        })
        .collect();
    Ok(ladders.into_iter().flatten().collect())
}

pub fn k_point_probe(d: &DomainSpec, p: &CPoint, w_radius: f64, eps_grid: &[f64], seed: u64) -> Result<ProbeReport> {
    d.check_dim(p)?;
    if !(w_radius > 0.0) {
        return Err(KobError::InvalidInput("W radius must be positive".into()));
    }
    if eps_grid.is_empty() || eps_grid.iter().any(|e| !(*e > 0.0 && *e < w_radius)) {
        return Err(KobError::InvalidInput("epsilon grid must be non-empty and inside (0, W radius)".into()));
    }
    let min_eps = eps_grid.iter().cloned().fold(f64::INFINITY, f64::min);
    let ws = w_boundary_samples(d, p, w_radius, min_eps, seed)?;
    let samples: Vec<Sample> = eps_grid
        .par_iter()
        .map(|&eps| -> Result<Sample> {
            let z = inward_point(d, p, eps)?;
            let dz = d.boundary_distance(&z)?;
            let mut lo = f64::INFINITY;
            let mut up = f64::INFINITY;
            for w in &ws {
                // exact on the model domains, certified lower bound otherwise
                let b = distance_bracket_quick(d, &z, w)?.bracket;
                lo = lo.min(b.lower);
                up = up.min(b.upper);
            }
            let stat = lo + 0.5 * dz.ln();
            Ok(Sample::new(eps, lo, up.max(lo), stat).with_inputs(vec![z]).with("depth", dz))
        })
        .collect::<Result<_>>()?;
    let mut report = ProbeReport::new(ProbeKind::KPoint, eps_grid.to_vec());
    report.param("p", p);
    report.param("w_radius", &w_radius);
    report.param("seed", &seed);
    report.param("w_samples", &ws.len());
    report.samples = samples;
    report.note("k(z, W^c) is bracketed by the minimum over seeded samples of the boundary of W; the sample minimum is not itself certified");
    if eps_grid.len() < 2 {
        report.note("a single grid value gives a finite statistic but no verdict");
        return Ok(report);
    }
    let stats = report.statistics();
    let reference = stats[argmax(eps_grid)];
    let smin = stats.iter().cloned().fold(f64::INFINITY, f64::min);
    let drop = reference - smin;
    let lx: Vec<f64> = eps_grid.iter().map(|e| -e.ln()).collect();
    let slope = ols(&lx, &stats)?.slope;
    // the same drop restricted to the finest half, where the limit shows
    let fine = super::fit::finest_half(eps_grid);
    let fine_ref = fine.iter().map(|&i| (eps_grid[i], stats[i])).max_by(|a, b| a.0.total_cmp(&b.0)).expect("non-empty").1;
    let fine_drop = fine_ref - fine.iter().map(|&i| stats[i]).fold(f64::INFINITY, f64::min);
    report.fitted.insert("drop".into(), drop);
    report.fitted.insert("fine_drop".into(), fine_drop);
    report.fitted.insert("slope".into(), slope);
    report.fitted.insert("minimum".into(), smin);
    if fine_drop <= 0.5 && slope > -0.2 {
        report.classify(Verdict::Consistent, Some("bounded-below"));
    } else if slope <= -0.2 && drop >= 1.0 {
        report.classify(Verdict::Consistent, Some("diverging"));
    }
    Ok(report)
}
