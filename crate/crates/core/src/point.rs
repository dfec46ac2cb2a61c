//! Points and tangent vectors of ℂⁿ.
//!
//! Both are stored as a vector of complex coordinates, which has the same
//! memory layout as the alternating `(re, im)` list of `2n` reals. On the
//! wire a point is an array of `[re, im]` pairs.

use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{KobError, Result};

/// A point of ℂⁿ.
#[derive(Clone, Debug, PartialEq)]
pub struct CPoint(Vec<Complex64>);

/// A tangent direction in ℂⁿ. Same layout as [`CPoint`].
pub type CVector = CPoint;

impl CPoint {
    pub fn new(coords: Vec<Complex64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(KobError::InvalidInput("a point needs at least one coordinate".into()));
        }
        if coords.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(KobError::InvalidInput("point coordinates must be finite".into()));
        }
        Ok(CPoint(coords))
    }

    /// Builds a point from `2n` reals laid out as `re, im, re, im, ...`.
    pub fn from_reals(reals: &[f64]) -> Result<Self> {
        if !reals.len().is_multiple_of(2) {
            return Err(KobError::InvalidInput(format!(
                "expected an even number of reals, got {}",
                reals.len()
            )));
        }
        Self::new(reals.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect())
    }

    pub fn zeros(n: usize) -> Self {
        CPoint(vec![Complex64::new(0.0, 0.0); n])
    }

    /// The `j`-th standard basis vector of ℂⁿ.
    pub fn basis(n: usize, j: usize) -> Self {
        let mut v = Self::zeros(n);
        v.0[j] = Complex64::new(1.0, 0.0);
        v
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[Complex64] {
        &self.0
    }

    pub fn coords_mut(&mut self) -> &mut [Complex64] {
        &mut self.0
    }

    pub fn to_reals(&self) -> Vec<f64> {
        self.0.iter().flat_map(|c| [c.re, c.im]).collect()
    }

    /// Real coordinate `k` of the `2n` real coordinates.
    pub fn real_coord(&self, k: usize) -> f64 {
        let c = self.0[k / 2];
        if k.is_multiple_of(2) {
            c.re
        } else {
            c.im
        }
    }

    pub fn add_real_coord(&mut self, k: usize, delta: f64) {
        let c = &mut self.0[k / 2];
        if k.is_multiple_of(2) {
            c.re += delta;
        } else {
            c.im += delta;
        }
    }

    /// Hermitian product `⟨self, other⟩ = Σ self_j · conj(other_j)`.
    pub fn hermitian(&self, other: &CPoint) -> Complex64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a * b.conj()).sum()
    }

    /// Real Euclidean inner product of the underlying `ℝ^{2n}` vectors.
    pub fn real_dot(&self, other: &CPoint) -> f64 {
        self.hermitian(other).re
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn dist(&self, other: &CPoint) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn scale(&self, s: f64) -> CPoint {
        CPoint(self.0.iter().map(|c| c * s).collect())
    }

    pub fn scale_complex(&self, s: Complex64) -> CPoint {
        CPoint(self.0.iter().map(|c| c * s).collect())
    }

    /// `self + s * dir`.
    pub fn offset(&self, dir: &CPoint, s: f64) -> CPoint {
        CPoint(self.0.iter().zip(&dir.0).map(|(a, b)| a + b * s).collect())
    }

    pub fn midpoint(&self, other: &CPoint) -> CPoint {
        CPoint(self.0.iter().zip(&other.0).map(|(a, b)| (a + b) * 0.5).collect())
    }

    /// Unit vector in the direction of `self`, or `None` for the zero vector.
    pub fn normalized(&self) -> Option<CPoint> {
        let n = self.norm();
        if n > 0.0 && n.is_finite() {
            Some(self.scale(1.0 / n))
        } else {
            None
        }
    }

    pub fn is_unit(&self) -> bool {
        (self.norm() - 1.0).abs() <= 1e-12
    }

    /// Lexicographic order on the real coordinates.
    pub fn lex_cmp(&self, other: &CPoint) -> std::cmp::Ordering {
        for (a, b) in self.to_reals().iter().zip(other.to_reals().iter()) {
            match a.total_cmp(b) {
                std::cmp::Ordering::Equal => continue,
                o => return o,
            }
        }
        std::cmp::Ordering::Equal
    }

    /// Shorthand for points with real-and-imaginary literals, mostly for tests.
    pub fn c(pairs: &[(f64, f64)]) -> CPoint {
        CPoint(pairs.iter().map(|&(re, im)| Complex64::new(re, im)).collect())
    }
}

impl Index<usize> for CPoint {
    type Output = Complex64;
    fn index(&self, j: usize) -> &Complex64 {
        &self.0[j]
    }
}

impl IndexMut<usize> for CPoint {
    fn index_mut(&mut self, j: usize) -> &mut Complex64 {
        &mut self.0[j]
    }
}

impl Add<&CPoint> for &CPoint {
    type Output = CPoint;
    fn add(self, rhs: &CPoint) -> CPoint {
        CPoint(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub<&CPoint> for &CPoint {
    type Output = CPoint;
    fn sub(self, rhs: &CPoint) -> CPoint {
        CPoint(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Mul<f64> for &CPoint {
    type Output = CPoint;
    fn mul(self, rhs: f64) -> CPoint {
        self.scale(rhs)
    }
}

impl Neg for &CPoint {
    type Output = CPoint;
    fn neg(self) -> CPoint {
        self.scale(-1.0)
    }
}

impl From<Vec<Complex64>> for CPoint {
    fn from(v: Vec<Complex64>) -> Self {
        CPoint(v)
    }
}

impl Serialize for CPoint {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let pairs: Vec<[f64; 2]> = self.0.iter().map(|c| [c.re, c.im]).collect();
        pairs.serialize(s)
    }
}

impl<'de> Deserialize<'de> for CPoint {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let pairs: Vec<[f64; 2]> = Vec::deserialize(d)?;
        CPoint::new(pairs.into_iter().map(|[re, im]| Complex64::new(re, im)).collect())
            .map_err(serde::de::Error::custom)
    }
}

/// Gram–Schmidt against an orthonormal family (Hermitian product). Returns
/// `None` when `v` lies in their span.
pub fn orthogonalize(v: &CPoint, family: &[CPoint]) -> Option<CPoint> {
    let mut w = v.clone();
    // two passes keep the result orthogonal to ~1e-15
    for _ in 0..2 {
        for e in family {
            let c = w.hermitian(e);
            for (wj, ej) in w.0.iter_mut().zip(&e.0) {
                *wj -= c * ej;
            }
        }
    }
    if w.norm() < 1e-12 * v.norm().max(1e-300) {
        return None;
    }
    w.normalized()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wire_format_is_pairs() {
        let p = CPoint::c(&[(0.5, 0.0), (0.0, -1.0)]);
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(s, "[[0.5,0.0],[0.0,-1.0]]");
        let q: CPoint = serde_json::from_str(&s).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn rejects_non_finite() {
        assert!(CPoint::from_reals(&[1.0, f64::NAN]).is_err());
        assert!(CPoint::from_reals(&[1.0]).is_err());
    }

    #[test]
    fn hermitian_product_is_conjugate_linear_in_second_slot() {
        let a = CPoint::c(&[(1.0, 0.0), (0.0, 1.0)]);
        let b = CPoint::c(&[(0.0, 1.0), (1.0, 0.0)]);
        let h = a.hermitian(&b);
        // 1 * conj(i) + i * conj(1) = -i + i = 0
        assert!(h.norm() < 1e-15);
        assert!((a.hermitian(&a).re - 2.0).abs() < 1e-15);
    }

    #[test]
    fn gram_schmidt_produces_orthonormal_vectors() {
        let e1 = CPoint::c(&[(0.6, 0.0), (0.0, 0.8)]);
        let v = CPoint::c(&[(1.0, 1.0), (2.0, -1.0)]);
        let e2 = orthogonalize(&v, std::slice::from_ref(&e1)).unwrap();
        assert!(e2.hermitian(&e1).norm() < 1e-14);
        assert!((e2.norm() - 1.0).abs() < 1e-14);
        assert!(orthogonalize(&e1.scale(3.0), &[e1]).is_none());
    }
}
