//! Exact geodesics of the bidisc between `(−1+ε, 0)` and `(1−ε, 0)`: the
//! diameter and a three-leg path that hugs the boundary.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{KobError, Result};
use crate::metric::{disc_distance, polydisc_distance};
use crate::point::CPoint;

/// A piecewise geodesic path in the bidisc with its exact length.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExactPath {
    pub points: Vec<CPoint>,
    /// Sum of the exact distances of consecutive points.
    pub length: f64,
    /// Closed-form length of each leg.
    pub legs: Vec<f64>,
    pub max_boundary_distance: f64,
}

/// The two geodesics of the bidisc between `(−1+ε, 0)` and `(1−ε, 0)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BidiscGeodesics {
    pub epsilon: f64,
    pub c: f64,
    pub diameter: ExactPath,
    pub boundary: ExactPath,
    /// `k_𝔻(−1+ε, 1−ε)`.
    pub exact_distance: f64,
}

/// Points of a leg whose coordinates each follow the real diameter at
/// constant hyperbolic speed.
fn real_leg(from: [f64; 2], to: [f64; 2], cells: usize) -> Vec<CPoint> {
    (0..=cells)
        .map(|k| {
            let t = k as f64 / cells as f64;
            let c: Vec<Complex64> = (0..2)
                .map(|j| Complex64::new(((1.0 - t) * from[j].atanh() + t * to[j].atanh()).tanh(), 0.0))
                .collect();
            CPoint::from(c)
        })
        .collect()
}

fn exact_path(legs: Vec<Vec<CPoint>>, leg_lengths: Vec<f64>) -> Result<ExactPath> {
    let mut points: Vec<CPoint> = Vec::new();
    for leg in legs {
        let skip = usize::from(!points.is_empty());
        points.extend(leg.into_iter().skip(skip));
    }
    let mut length = 0.0;
    for w in points.windows(2) {
        length += polydisc_distance(&w[0], &w[1])?;
    }
    let max_bd = points
        .iter()
        .map(|p| p.coords().iter().map(|c| 1.0 - c.norm()).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max);
    Ok(ExactPath { points, length, legs: leg_lengths, max_boundary_distance: max_bd })
}

/// Builds the diameter geodesic and the three-leg geodesic hugging the
/// boundary through `(−1+c√ε, 1−√ε)` and `(1−c√ε, 1−√ε)`, with `c` the
/// smallest value in `{1.1, 1.2, …}` such that the first coordinate
/// dominates the corner legs.
pub fn bidisc_boundary_geodesic(epsilon: f64) -> Result<BidiscGeodesics> {
    if !(epsilon > 0.0 && epsilon <= 1e-2) {
        return Err(KobError::Precondition(format!("epsilon must lie in (0, 0.01], got {epsilon}")));
    }
    let s = epsilon.sqrt();
    let r = |x: f64| Complex64::new(x, 0.0);
    let d_corner_2 = disc_distance(r(0.0), r(1.0 - s))?;
    let mut c = None;
    for k in 11..=1000 {
        let ck = k as f64 / 10.0;
        if ck * s >= 1.0 {
            break;
        }
        if d_corner_2 < disc_distance(r(1.0 - epsilon), r(1.0 - ck * s))? {
            c = Some(ck);
            break;
        }
    }
    let c = c.ok_or_else(|| KobError::Precondition(format!("no admissible c for epsilon = {epsilon}")))?;
    let a = 1.0 - epsilon;
    let b = 1.0 - c * s;
    let h = 1.0 - s;
    let exact = disc_distance(r(-a), r(a))?;
    let diameter = exact_path(vec![real_leg([-a, 0.0], [a, 0.0], 256)], vec![exact])?;
    let corner = disc_distance(r(a), r(b))?;
    let middle = disc_distance(r(-b), r(b))?;
    let boundary = exact_path(
        vec![
            real_leg([-a, 0.0], [-b, h], 128),
            real_leg([-b, h], [b, h], 128),
            real_leg([b, h], [a, 0.0], 128),
        ],
        vec![corner, middle, corner],
    )?;
    Ok(BidiscGeodesics { epsilon, c, diameter, boundary, exact_distance: exact })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bidisc_paths_have_equal_exact_length() {
        for &e in &[1e-2, 1e-3, 1e-4] {
            let g = bidisc_boundary_geodesic(e).unwrap();
            assert!((g.diameter.length - g.exact_distance).abs() < 1e-12);
            assert!((g.boundary.length - g.exact_distance).abs() < 1e-12, "{e}: {}", g.boundary.length - g.exact_distance);
            assert!(g.c > 1.0 && g.boundary.max_boundary_distance <= g.c * e.sqrt() + 1e-15);
        }
        let g = bidisc_boundary_geodesic(1e-4).unwrap();
        assert!((g.exact_distance - 19999f64.ln()).abs() < 1e-9);
        assert!(bidisc_boundary_geodesic(0.5).is_err());
    }
}
