//! Path optimizers: L-BFGS on the discrete energy and a pattern-search
//! polish on the discrete length.
//!
//! The discrete energy `(m−1) Σ c_i²` of an `m`-point polyline, with `c_i`
//! the segment costs, is at least the squared length and equals it exactly
//! at constant speed. Minimizing it removes the reparametrization freedom
//! that makes the length functional degenerate. Gradients are central
//! differences, so only metric values are needed.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::domain::{DomainKind, DomainSpec};
use crate::metric::metric_upper_fast;
use crate::point::CPoint;

/// The metric minimized by the optimizer. Certified lengths always use the
/// true upper metric; a surrogate only steers the search.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(super) enum Surrogate {
    Upper,
    /// `(Σ_j (|X_j|/(1−|z_j|²))^p)^{1/p}` on the polydisc, a smooth
    /// stand-in for the max.
    PNorm(f64),
}

fn cost_metric(d: &DomainSpec, z: &CPoint, v: &CPoint, sur: Surrogate) -> f64 {
    match (d.kind(), sur) {
        (DomainKind::Polydisc { .. }, Surrogate::PNorm(p)) => {
            let terms: Vec<f64> = z
                .coords()
                .iter()
                .zip(v.coords())
                .map(|(zj, vj)| {
                    let r = zj.norm();
                    vj.norm() / ((1.0 - r) * (1.0 + r))
                })
                .collect();
            let m = terms.iter().cloned().fold(0.0, f64::max);
            if m == 0.0 || terms.iter().any(|t| !t.is_finite() || *t < 0.0) {
                return if m == 0.0 { 0.0 } else { f64::INFINITY };
            }
            m * terms.iter().map(|t| (t / m).powf(p)).sum::<f64>().powf(1.0 / p)
        }
        _ => metric_upper_fast(d, z, v).unwrap_or(f64::INFINITY),
    }
}

const G1: f64 = 0.211_324_865_405_187_1;
const G2: f64 = 0.788_675_134_594_812_9;

/// Two-point Gauss–Legendre length of the segment `a → b`.
pub(super) fn seg_cost(d: &DomainSpec, a: &CPoint, b: &CPoint, sur: Surrogate) -> f64 {
    let v = b - a;
    if v.norm() == 0.0 {
        return 0.0;
    }
    let k1 = cost_metric(d, &a.offset(&v, G1), &v, sur);
    let k2 = cost_metric(d, &a.offset(&v, G2), &v, sur);
    0.5 * (k1 + k2)
}

pub(super) struct Optimizer<'a> {
    pub d: &'a DomainSpec,
    pub margin: f64,
}

impl Optimizer<'_> {
    pub fn inside(&self, z: &CPoint) -> bool {
        self.d.contains_unchecked(z) && self.d.depth_estimate(z) > self.margin
    }

    fn energy(&self, pts: &[CPoint], sur: Surrogate) -> f64 {
        let m = pts.len() as f64;
        (m - 1.0) * pts.windows(2).map(|w| seg_cost(self.d, &w[0], &w[1], sur).powi(2)).sum::<f64>()
    }

    /// L-BFGS on the energy. Variables are the real coordinates of the
    /// interior points, scaled by each point's initial depth so that points
    /// near the boundary get proportionally small moves.
    /// Returns iterations used and whether the tolerance was met.
    pub fn lbfgs(&self, pts: &mut [CPoint], sur: Surrogate, rel_tol: f64, budget: usize) -> (usize, bool) {
        let m = pts.len();
        if m < 3 || budget == 0 {
            return (0, m < 3);
        }
        let n = pts[0].dim();
        let dims = 2 * n;
        let nv = (m - 2) * dims;
        let sigma: Vec<f64> = (1..m - 1)
            .map(|i| {
                let depth = self.d.depth_estimate(&pts[i]).max(1e-300);
                let seg = 0.5 * (pts[i].dist(&pts[i - 1]) + pts[i].dist(&pts[i + 1]));
                depth.min(seg).max(1e-14)
            })
            .collect();
        let base: Vec<CPoint> = pts.to_vec();
        let place = |u: &[f64]| -> Vec<CPoint> {
            let mut out = base.clone();
            for i in 1..m - 1 {
                for k in 0..dims {
                    out[i].add_real_coord(k, sigma[i - 1] * u[(i - 1) * dims + k]);
                }
            }
            out
        };
        let feasible = |p: &[CPoint]| p[1..m - 1].iter().all(|z| self.inside(z));
        let scale = (m - 1) as f64;
        // gradient by central differences, touching only the two adjacent
        // segments of each point
        let grad = |p: &[CPoint]| -> Vec<f64> {
            let mut g = vec![0.0; nv];
            for i in 1..m - 1 {
                for k in 0..dims {
                    let h = 1e-6 * sigma[i - 1];
                    let mut plus = p[i].clone();
                    plus.add_real_coord(k, h);
                    let mut minus = p[i].clone();
                    minus.add_real_coord(k, -h);
                    let local = |q: &CPoint| {
                        seg_cost(self.d, &p[i - 1], q, sur).powi(2) + seg_cost(self.d, q, &p[i + 1], sur).powi(2)
                    };
                    let (fp, fm) = if self.inside(&plus) && self.inside(&minus) {
                        (local(&plus), local(&minus))
                    } else {
                        (0.0, 0.0)
                    };
                    g[(i - 1) * dims + k] = scale * (fp - fm) / (2.0 * h) * sigma[i - 1];
                }
            }
            g
        };
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();

        let mut u = vec![0.0; nv];
        let mut cur = place(&u);
        let mut f = self.energy(&cur, sur);
        let mut g = grad(&cur);
        let mut hist: Vec<(Vec<f64>, Vec<f64>, f64)> = Vec::new();
        let mut quiet = 0;
        let mut iters = 0;
        let mut converged = false;
        while iters < budget {
            iters += 1;
            // two-loop recursion
            let mut q: Vec<f64> = g.iter().map(|x| -x).collect();
            let mut alphas = Vec::with_capacity(hist.len());
            for (s, y, rho) in hist.iter().rev() {
                let a = rho * dot(s, &q);
                for (qi, yi) in q.iter_mut().zip(y) {
                    *qi -= a * yi;
                }
                alphas.push(a);
            }
            if let Some((s, y, _)) = hist.last() {
                let gamma = dot(s, y) / dot(y, y);
                for qi in q.iter_mut() {
                    *qi *= gamma;
                }
            } else {
                let gmax = g.iter().fold(0.0f64, |a, x| a.max(x.abs()));
                if gmax == 0.0 {
                    converged = true;
                    break;
                }
                let t0 = 0.1 / gmax;
                for qi in q.iter_mut() {
                    *qi *= t0;
                }
            }
            for ((s, y, rho), a) in hist.iter().zip(alphas.iter().rev()) {
                let b = rho * dot(y, &q);
                for (qi, si) in q.iter_mut().zip(s) {
                    *qi += (a - b) * si;
                }
            }
            let mut slope = dot(&g, &q);
            if slope >= 0.0 {
                hist.clear();
                let gmax = g.iter().fold(0.0f64, |a, x| a.max(x.abs()));
                q = g.iter().map(|x| -x * 0.1 / gmax.max(1e-300)).collect();
                slope = dot(&g, &q);
            }
            let mut t = 1.0;
            let mut accepted = None;
            for _ in 0..60 {
                let trial: Vec<f64> = u.iter().zip(&q).map(|(a, b)| a + t * b).collect();
                let p = place(&trial);
                if feasible(&p) {
                    let ft = self.energy(&p, sur);
                    if ft <= f + 1e-4 * t * slope {
                        accepted = Some((trial, p, ft));
                        break;
                    }
                }
                t *= 0.5;
            }
            let Some((un, pn, fn_)) = accepted else {
                if hist.is_empty() {
                    converged = true;
                    break;
                }
                hist.clear();
                continue;
            };
            let gn = grad(&pn);
            let s: Vec<f64> = un.iter().zip(&u).map(|(a, b)| a - b).collect();
            let y: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
            let sy = dot(&s, &y);
            if sy > 1e-300 {
                hist.push((s, y, 1.0 / sy));
                if hist.len() > 8 {
                    hist.remove(0);
                }
            }
            let decrease = f - fn_;
            u = un;
            cur = pn;
            f = fn_;
            g = gn;
            if decrease <= rel_tol * f {
                quiet += 1;
                if quiet >= 3 {
                    converged = true;
                    break;
                }
            } else {
                quiet = 0;
            }
        }
        pts.clone_from_slice(&cur);
        (iters, converged)
    }

    /// Gauss–Seidel pattern search on the discrete length, along the real
    /// axes, their pairwise diagonals and two random directions per point.
    pub fn polish(&self, pts: &mut [CPoint], rng: &mut ChaCha8Rng, rel_tol: f64, budget: usize) -> (usize, bool) {
        let m = pts.len();
        if m < 3 {
            return (0, true);
        }
        let n = pts[0].dim();
        let mut dirs = Vec::new();
        for k in 0..2 * n {
            let mut v = CPoint::zeros(n);
            v.add_real_coord(k, 1.0);
            dirs.push(v.clone());
            for l in k + 1..2 * n {
                for s in [1.0, -1.0] {
                    let mut w = v.clone();
                    w.add_real_coord(l, s);
                    dirs.push(w.normalized().expect("non-zero"));
                }
            }
        }
        let sur = Surrogate::Upper;
        let length = |p: &[CPoint]| p.windows(2).map(|w| seg_cost(self.d, &w[0], &w[1], sur)).sum::<f64>();
        let mut steps: Vec<f64> = (0..m)
            .map(|i| {
                if i == 0 || i == m - 1 {
                    0.0
                } else {
                    0.05 * self.d.depth_estimate(&pts[i]).min(pts[i].dist(&pts[i - 1]))
                }
            })
            .collect();
        let floors: Vec<f64> = steps.iter().map(|s| s * 1e-6).collect();
        let mut obj = length(pts);
        let mut window = vec![obj];
        for sweep in 0..budget {
            for i in 1..m - 1 {
                if steps[i] <= floors[i] {
                    continue;
                }
                let mut cur = seg_cost(self.d, &pts[i - 1], &pts[i], sur) + seg_cost(self.d, &pts[i], &pts[i + 1], sur);
                let mut improved = false;
                let mut extra = Vec::with_capacity(2);
                for _ in 0..2 {
                    let reals: Vec<f64> = (0..2 * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
                    if let Some(v) = CPoint::from_reals(&reals).ok().and_then(|p| p.normalized()) {
                        extra.push(v);
                    }
                }
                for dir in dirs.iter().chain(extra.iter()) {
                    for sign in [1.0, -1.0] {
                        let cand = pts[i].offset(dir, sign * steps[i]);
                        if !self.inside(&cand) {
                            continue;
                        }
                        let c = seg_cost(self.d, &pts[i - 1], &cand, sur) + seg_cost(self.d, &cand, &pts[i + 1], sur);
                        if c < cur {
                            cur = c;
                            pts[i] = cand;
                            improved = true;
                        }
                    }
                }
                steps[i] *= if improved { 1.5 } else { 0.5 };
            }
            obj = length(pts).min(obj);
            window.push(obj);
            let lag = 8;
            if window.len() > lag && window[window.len() - 1 - lag] - obj <= rel_tol * obj {
                return (sweep + 1, true);
            }
            if steps.iter().zip(&floors).all(|(s, f)| s <= f) {
                return (sweep + 1, true);
            }
        }
        (budget, false)
    }
}
