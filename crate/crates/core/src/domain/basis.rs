//! Minimal bases: iterated nearest-point slicing.
//!
//! `e₁` points from `z` to its nearest boundary point. Each later `e_k` points
//! to the nearest boundary point of the slice of the domain by the complex
//! affine subspace through `z` orthogonal to `e₁, …, e_{k−1}`, and `τ_k` is
//! that distance. When several contacts tie, the lexicographically smallest
//! contact point wins.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::DomainSpec;
use crate::error::Result;
use crate::point::{orthogonalize, CPoint, CVector};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MinimalBasisResult {
    pub basis: Vec<CVector>,
    /// Slice distances `τ₁ ≤ … ≤ τ_n`.
    pub taus: Vec<f64>,
    /// Boundary contact points `z + τ_j e_j`.
    pub contacts: Vec<CPoint>,
}

/// Orthonormal basis of the complement of an orthonormal family.
fn complement(n: usize, family: &[CPoint]) -> Vec<CPoint> {
    let mut out: Vec<CPoint> = Vec::new();
    for j in 0..n {
        if out.len() + family.len() == n {
            break;
        }
        let mut all: Vec<CPoint> = family.to_vec();
        all.extend(out.iter().cloned());
        if let Some(v) = orthogonalize(&CPoint::basis(n, j), &all) {
            out.push(v);
        }
    }
    out
}

fn combine(frame: &[CPoint], coeffs: &[f64]) -> CPoint {
    let n = frame[0].dim();
    let mut v = CPoint::zeros(n);
    for (l, f) in frame.iter().enumerate() {
        let c = Complex64::new(coeffs[2 * l], coeffs[2 * l + 1]);
        v = &v + &f.scale_complex(c);
    }
    v
}

/// Nearest boundary point of `D ∩ (z + span_ℂ frame)` by minimizing ray exits
/// over the unit sphere of the subspace.
fn nearest_in_subspace(d: &DomainSpec, z: &CPoint, frame: &[CPoint]) -> (f64, CPoint) {
    let m = 2 * frame.len();
    let unit = |c: &[f64]| {
        let norm = c.iter().map(|x| x * x).sum::<f64>().sqrt();
        c.iter().map(|x| x / norm).collect::<Vec<f64>>()
    };
    let exit = |c: &[f64]| d.ray_exit(z, &combine(frame, c));
    let seeds: Vec<Vec<f64>> = super::generic::sphere_directions(frame.len(), 96).iter().map(|c| c.to_reals()).collect();
    let mut scored: Vec<(f64, Vec<f64>)> = seeds.into_iter().map(|c| (exit(&c), c)).collect();
    scored.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut results: Vec<(f64, CPoint)> = Vec::new();
    for (mut s, mut c) in scored.into_iter().take(4) {
        let mut step = 1e-2;
        while step > 1e-10 {
            let mut improved = false;
            for k in 0..m {
                for sign in [1.0, -1.0] {
                    let mut cand = c.clone();
                    cand[k] += sign * step;
                    let cand = unit(&cand);
                    let sc = exit(&cand);
                    if sc < s {
                        s = sc;
                        c = cand;
                        improved = true;
                    }
                }
            }
            if !improved {
                step *= 0.3;
            }
        }
        results.push((s, z.offset(&combine(frame, &c), s)));
    }
    pick_lexmin(results)
}

fn pick_lexmin(results: Vec<(f64, CPoint)>) -> (f64, CPoint) {
    let best = results.iter().map(|r| r.0).fold(f64::INFINITY, f64::min);
    results
        .into_iter()
        .filter(|r| r.0 <= best * (1.0 + 1e-9))
        .map(|r| (best, r.1))
        .min_by(|a, b| a.1.lex_cmp(&b.1))
        .expect("at least one candidate")
}

pub(super) fn minimal_basis(d: &DomainSpec, z: &CPoint) -> Result<MinimalBasisResult> {
    let n = d.dim();
    let first = d.nearest_set(z)?;
    let mut taus = vec![first.distance];
    let mut contacts = vec![first.points[0].clone()];
    let mut basis = vec![(&first.points[0] - z).normalized().expect("contact differs from interior point")];
    for k in 1..n {
        let frame = complement(n, &basis);
        let (tau, contact) = if k == n - 1 {
            let v = &frame[0];
            let slice = d.slice_contact(z, v, false)?;
            let cands = slice.lambdas.iter().map(|l| (slice.distance, z.offset(&v.scale_complex(*l), 1.0))).collect();
            pick_lexmin(cands)
        } else {
            nearest_in_subspace(d, z, &frame)
        };
        let e = (&contact - z).normalized().expect("contact differs from interior point");
        // re-orthogonalize against round-off
        let e = orthogonalize(&e, &basis).unwrap_or(e);
        taus.push(tau);
        contacts.push(contact);
        basis.push(e);
    }
    Ok(MinimalBasisResult { basis, taus, contacts })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ball_and_polydisc_examples() {
        let b = DomainSpec::ball(2).unwrap();
        let r = b.minimal_basis(&CPoint::c(&[(0.5, 0.0), (0.0, 0.0)])).unwrap();
        assert!((r.taus[0] - 0.5).abs() < 1e-12 && (r.taus[1] - 0.75f64.sqrt()).abs() < 1e-12);
        assert!(r.basis[0].dist(&CPoint::basis(2, 0)) < 1e-12);
        assert!(r.basis[0].hermitian(&r.basis[1]).norm() < 1e-10);
        let pd = DomainSpec::polydisc(2).unwrap();
        let r = pd.minimal_basis(&CPoint::c(&[(0.5, 0.0), (0.0, 0.0)])).unwrap();
        assert!((r.taus[0] - 0.5).abs() < 1e-12 && (r.taus[1] - 1.0).abs() < 1e-12);
        let r = DomainSpec::disc().minimal_basis(&CPoint::zeros(1)).unwrap();
        assert_eq!(r.taus.len(), 1);
        assert!((r.taus[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn ball_center_ties_break_lexicographically() {
        let b = DomainSpec::ball(2).unwrap();
        let r = b.minimal_basis(&CPoint::zeros(2)).unwrap();
        assert!(r.contacts[0].dist(&CPoint::c(&[(-1.0, 0.0), (0.0, 0.0)])) < 1e-12);
        assert!((r.taus[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn three_dimensional_ellipsoid_has_axis_taus() {
        let e = DomainSpec::ellipsoid(vec![1.0, 2.0, 3.0]).unwrap();
        let r = e.minimal_basis(&CPoint::zeros(3)).unwrap();
        for (t, want) in r.taus.iter().zip([1.0, 2.0, 3.0]) {
            assert!((t - want).abs() < 1e-8, "{:?}", r.taus);
        }
        for i in 0..3 {
            for j in 0..3 {
                let h = r.basis[i].hermitian(&r.basis[j]).norm();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((h - want).abs() < 1e-10);
            }
        }
    }
}
