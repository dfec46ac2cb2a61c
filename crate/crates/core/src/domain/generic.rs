//! Ray-casting fallbacks for domains without closed-form geometry, plus the
//! ellipsoid projection.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{DomainSpec, NearestSet, SliceContact};
use crate::error::{KobError, Result};
use crate::point::{CPoint, CVector};

/// Exit distance of the ray `z + s u` by root finding on the defining
/// function. Returns the last parameter known to be inside.
pub(super) fn ray_exit_by_root(d: &DomainSpec, z: &CPoint, u: &CVector) -> f64 {
    let c = d.bounding_center();
    let w = z - c;
    let (a, b, cc) = (u.norm_sqr(), w.real_dot(u), w.norm_sqr() - d.bounding_radius().powi(2));
    if a == 0.0 {
        return f64::INFINITY;
    }
    let disc = (b * b - a * cc).max(0.0).sqrt();
    let mut hi = ((disc - b) / a) * (1.0 + 1e-9) + 1e-12;
    let f = |s: f64| d.defining_value(&z.offset(u, s));
    let mut fhi = f(hi);
    while fhi < 0.0 {
        hi *= 2.0;
        fhi = f(hi);
    }
    let mut lo = 0.0;
    let mut flo = f(0.0);
    if flo >= 0.0 {
        return 0.0;
    }
    // Illinois variant of regula falsi
    let mut side = 0;
    for _ in 0..200 {
        if hi - lo <= 4.0 * f64::EPSILON * hi {
            break;
        }
        let mut s = (lo * fhi - hi * flo) / (fhi - flo);
        if !(s > lo && s < hi) {
            s = 0.5 * (lo + hi);
        }
        let fs = f(s);
        if fs < 0.0 {
            lo = s;
            flo = fs;
            if side == -1 {
                fhi *= 0.5;
            }
            side = -1;
        } else {
            hi = s;
            fhi = fs;
            if side == 1 {
                flo *= 0.5;
            }
            side = 1;
        }
    }
    lo
}

/// Deterministic unit directions of `ℝ^{2n}`.
pub(super) fn sphere_directions(n: usize, count: usize) -> Vec<CPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x6b6f62);
    let mut out = Vec::with_capacity(count + 4 * n);
    for k in 0..2 * n {
        for s in [1.0, -1.0] {
            let mut v = CPoint::zeros(n);
            v.add_real_coord(k, s);
            out.push(v);
        }
    }
    while out.len() < count + 4 * n {
        let reals: Vec<f64> = (0..2 * n).map(|_| StandardNormal.sample(&mut rng)).collect();
        if let Some(v) = CPoint::from_reals(&reals).ok().and_then(|p| p.normalized()) {
            out.push(v);
        }
    }
    out
}

/// Refines a ray direction towards a local minimum of the exit distance:
/// alternates with the normal at the hit point and finishes with a pattern
/// search on the sphere.
fn refine_direction(d: &DomainSpec, z: &CPoint, mut u: CPoint, mut s: f64) -> (CPoint, f64) {
    for _ in 0..30 {
        let hit = z.offset(&u, s);
        let Some(nu) = d.defining_gradient(&hit).normalized() else { break };
        let sn = d.ray_exit(z, &nu);
        if sn < s {
            let moved = nu.dist(&u);
            u = nu;
            s = sn;
            if moved < 1e-10 {
                break;
            }
        } else {
            break;
        }
    }
    let dims = 2 * z.dim();
    let mut step = 1e-2;
    while step > 1e-9 {
        let mut improved = false;
        for k in 0..dims {
            for sign in [1.0, -1.0] {
                let mut cand = u.clone();
                cand.add_real_coord(k, sign * step);
                let cand = cand.normalized().expect("perturbation of a unit vector");
                let sc = d.ray_exit(z, &cand);
                if sc < s {
                    u = cand;
                    s = sc;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.3;
        }
    }
    (u, s)
}

/// Nearest boundary points by minimizing the ray exit distance over the unit
/// sphere. For a convex domain this minimum is exactly δ_D(z).
pub(super) fn nearest_by_rays(d: &DomainSpec, z: &CPoint, samples: usize) -> Result<NearestSet> {
    let dirs = sphere_directions(z.dim(), samples);
    let mut scored: Vec<(f64, CPoint)> = dirs.into_iter().map(|u| (d.ray_exit(z, &u), u)).collect();
    scored.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut minima: Vec<(f64, CPoint)> = Vec::new();
    for (s, u) in scored.into_iter().take(6) {
        let (u, s) = refine_direction(d, z, u, s);
        let hit = z.offset(&u, s);
        minima.push((s, hit));
    }
    let best = minima.iter().map(|m| m.0).fold(f64::INFINITY, f64::min);
    if !best.is_finite() {
        return Err(KobError::InvalidInput("domain is unbounded in every direction".into()));
    }
    let mut points: Vec<CPoint> = Vec::new();
    for (s, hit) in minima {
        if s <= best + 1e-9 * best.max(1e-300) + 1e-15 && points.iter().all(|p| p.dist(&hit) > 1e-6) {
            points.push(hit);
        }
    }
    Ok(NearestSet { distance: best, points, continuum: false })
}

/// Projection onto the complex ellipsoid `Σ|w_j|²/a_j² = 1` from inside.
pub(super) fn ellipsoid_nearest(axes: &[f64], z: &CPoint) -> NearestSet {
    let amin2 = axes.iter().map(|a| a * a).fold(f64::INFINITY, f64::min);
    let is_min = |a: f64| a * a <= amin2 * (1.0 + 1e-14);
    let secular = |m: f64| -> f64 {
        z.coords()
            .iter()
            .zip(axes)
            .map(|(c, a)| {
                let a2 = a * a;
                c.norm_sqr() * a2 / ((a2 - m) * (a2 - m))
            })
            .sum::<f64>()
            - 1.0
    };
    let degenerate = z.coords().iter().zip(axes).all(|(c, &a)| !is_min(a) || c.norm_sqr() == 0.0);
    let limit = z
        .coords()
        .iter()
        .zip(axes)
        .filter(|(_, &a)| !is_min(a))
        .map(|(c, a)| {
            let a2 = a * a;
            c.norm_sqr() * a2 / ((a2 - amin2) * (a2 - amin2))
        })
        .sum::<f64>();
    if degenerate && limit < 1.0 {
        // the minimizers form a sphere in the shortest axes
        let mut w = CPoint::zeros(z.dim());
        let mut used = 0.0;
        let mut dist2 = 0.0;
        for (j, (c, a)) in z.coords().iter().zip(axes).enumerate() {
            if !is_min(*a) {
                let a2 = a * a;
                w[j] = c * (a2 / (a2 - amin2));
                used += w[j].norm_sqr() / a2;
                dist2 += (w[j] - c).norm_sqr();
            }
        }
        let rem = (amin2 * (1.0 - used)).max(0.0);
        let first = axes.iter().position(|&a| is_min(a)).expect("some axis is shortest");
        w[first] = Complex64::new(-rem.sqrt(), 0.0);
        return NearestSet { distance: (dist2 + rem).sqrt(), points: vec![w], continuum: rem > 0.0 };
    }
    let (mut lo, mut hi) = (0.0, amin2);
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if secular(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let m = lo;
    let mut w = z.clone();
    let mut dist2 = 0.0;
    for (j, a) in axes.iter().enumerate() {
        let a2 = a * a;
        let f = m / (a2 - m);
        dist2 += z[j].norm_sqr() * f * f;
        w[j] = z[j] * (a2 / (a2 - m));
    }
    NearestSet { distance: dist2.sqrt(), points: vec![w], continuum: false }
}

fn golden_min(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - r * (b - a);
    let mut x2 = a + r * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while b - a > tol {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// `δ_D(z; v)` as the smallest exit distance over the rays `e^{iθ} v`.
pub(super) fn slice_by_rays(d: &DomainSpec, z: &CPoint, v: &CVector, fast: bool) -> SliceContact {
    let m = if fast { 24 } else { 64 };
    let tol = if fast { 1e-6 } else { 1e-10 };
    let exit = |t: f64| d.ray_exit(z, &v.scale_complex(Complex64::from_polar(1.0, t)));
    let h = 2.0 * PI / m as f64;
    let samples: Vec<f64> = (0..m).map(|k| exit(k as f64 * h)).collect();
    let mut local: Vec<usize> = (0..m)
        .filter(|&k| samples[k] <= samples[(k + m - 1) % m] && samples[k] <= samples[(k + 1) % m])
        .collect();
    local.sort_by(|&a, &b| samples[a].total_cmp(&samples[b]));
    local.truncate(if fast { 2 } else { 4 });
    let mut found: Vec<(f64, f64)> = local
        .iter()
        .map(|&k| {
            let t0 = k as f64 * h;
            golden_min(&exit, t0 - h, t0 + h, tol)
        })
        .collect();
    found.sort_by(|a, b| a.1.total_cmp(&b.1));
    let best = found[0].1;
    let lambdas = found
        .iter()
        .filter(|(_, s)| *s <= best * (1.0 + 1e-9))
        .map(|&(t, s)| Complex64::from_polar(s, t))
        .collect();
    SliceContact { distance: best, lambdas, continuum: false }
}
