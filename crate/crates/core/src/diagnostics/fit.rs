//! Least-squares fits and grids.

use serde::{Deserialize, Serialize};

use crate::error::{KobError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual.
    pub residual: f64,
    pub n: usize,
}

/// Ordinary least squares `y ≈ slope·x + intercept`.
pub fn ols(xs: &[f64], ys: &[f64]) -> Result<LineFit> {
    if xs.len() != ys.len() {
        return Err(KobError::InvalidInput("x and y lengths differ".into()));
    }
    let n = xs.len();
    if n < 2 {
        return Err(KobError::DegenerateFit(format!("{n} point(s) cannot fix a line")));
    }
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let scale = xs.iter().map(|x| x.abs()).fold(0.0, f64::max).max(1.0);
    if sxx <= (1e-12 * scale).powi(2) * n as f64 {
        return Err(KobError::DegenerateFit("abscissae are (numerically) constant".into()));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = xs.iter().zip(ys).map(|(x, y)| (y - slope * x - intercept).powi(2)).sum();
    Ok(LineFit { slope, intercept, residual: (ss / n as f64).sqrt(), n })
}

/// Indices of the finest half of a grid: the `⌈n/2⌉` smallest values, at
/// least two when the grid has two.
pub fn finest_half(grid: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..grid.len()).collect();
    idx.sort_by(|&a, &b| grid[a].total_cmp(&grid[b]));
    let k = grid.len().div_ceil(2).max(2.min(grid.len()));
    idx.truncate(k);
    idx.sort_unstable();
    idx
}

/// OLS restricted to the finest half of `grid`.
pub fn ols_finest_half(grid: &[f64], xs: &[f64], ys: &[f64]) -> Result<LineFit> {
    let idx = finest_half(grid);
    let x: Vec<f64> = idx.iter().map(|&i| xs[i]).collect();
    let y: Vec<f64> = idx.iter().map(|&i| ys[i]).collect();
    ols(&x, &y)
}

/// Geometric grid from `hi` down to `lo` with `per_decade` points per decade,
/// both ends included.
pub fn geometric_grid(hi: f64, lo: f64, per_decade: usize) -> Result<Vec<f64>> {
    if !(hi > 0.0 && lo > 0.0 && lo <= hi && per_decade > 0) {
        return Err(KobError::InvalidInput(format!("bad grid [{lo}, {hi}] with {per_decade} per decade")));
    }
    let decades = (hi / lo).log10();
    let steps = (decades * per_decade as f64).round().max(0.0) as usize;
    if steps == 0 {
        return Ok(vec![hi]);
    }
    Ok((0..=steps)
        .map(|k| {
            if k == steps {
                lo
            } else {
                hi * 10f64.powf(-decades * k as f64 / steps as f64)
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn exact_line_recovered() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys: Vec<f64> = xs.iter().map(|x| 0.5 * x - 2.0).collect();
        let f = ols(&xs, &ys).unwrap();
        assert!((f.slope - 0.5).abs() < 1e-14 && (f.intercept + 2.0).abs() < 1e-14 && f.residual < 1e-14);
    }

    #[test]
    fn constant_abscissae_are_degenerate() {
        assert!(matches!(ols(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]), Err(KobError::DegenerateFit(_))));
        assert!(matches!(ols(&[1.0], &[1.0]), Err(KobError::DegenerateFit(_))));
    }

    #[test]
    fn grid_has_eight_per_decade() {
        let g = geometric_grid(1e-1, 1e-4, 8).unwrap();
        assert_eq!(g.len(), 25);
        assert_eq!(g[0], 1e-1);
        assert_eq!(g[24], 1e-4);
        assert!((g[8] - 1e-2).abs() < 1e-16);
        assert_eq!(finest_half(&g).len(), 13);
        assert!(finest_half(&g).iter().all(|&i| i >= 12));
    }

    proptest! {
        #[test]
        fn ols_residual_orthogonal(pts in prop::collection::vec((-10.0..10.0f64, -10.0..10.0f64), 3..20)) {
            let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
            let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
            if let Ok(f) = ols(&xs, &ys) {
                let r: Vec<f64> = xs.iter().zip(&ys).map(|(x, y)| y - f.slope * x - f.intercept).collect();
                let s: f64 = r.iter().sum();
                let sx: f64 = r.iter().zip(&xs).map(|(a, b)| a * b).sum();
                prop_assert!(s.abs() < 1e-8 && sx.abs() < 1e-7);
            }
        }
    }
}
