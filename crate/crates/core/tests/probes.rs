//! Boundary probes on domains whose behavior is known analytically.

use std::f64::consts::PI;

use koblab::cases::{omega_psi_upper_bound, p_eps, q_eps, run_bidisc_case, run_omega_psi_case};
use koblab::diagnostics::{geometric_grid, k_point_probe, visibility_scan, Approach, ProbeKind, ProbeReport, Verdict};
use koblab::domain::{DomainSpec, OmegaPsiParams};
use koblab::geodesic::SolverConfig;
use koblab::metric::distance_lower_bound;
use koblab::point::CPoint;

fn e1() -> CPoint {
    CPoint::c(&[(1.0, 0.0), (0.0, 0.0)])
}

#[test]
fn k_point_statistic_separates_ball_from_polydisc_face() {
    let grid = geometric_grid(1e-1, 1e-4, 4).unwrap();
    let ball = k_point_probe(&DomainSpec::ball(2).unwrap(), &e1(), 0.5, &grid, 7).unwrap();
    assert_eq!(ball.classification.as_deref(), Some("bounded-below"), "{:?}", ball.fitted);
    let poly = k_point_probe(&DomainSpec::polydisc(2).unwrap(), &e1(), 0.5, &grid, 7).unwrap();
    assert_eq!(poly.classification.as_deref(), Some("diverging"), "{:?}", poly.fitted);
    // k(z, W^c) stays bounded on the face while ½ log δ → −∞: slope −½ in log(1/ε)
    assert!((poly.fitted["slope"] + 0.5).abs() < 0.05, "{:?}", poly.fitted);
}

#[test]
fn ball_geodesics_stay_away_from_the_boundary() {
    let d = DomainSpec::ball(2).unwrap();
    let q = CPoint::c(&[(0.0, 0.0), (1.0, 0.0)]);
    let cfg = SolverConfig { control_points: 33, ..Default::default() };
    let r = visibility_scan(&d, &e1(), &q, &[1e-1, 1e-2, 1e-3], &Approach::Normal, &cfg).unwrap();
    assert_eq!(r.classification.as_deref(), Some("consistent-with-visibility"), "{:?}", r.fitted);
    r.check().unwrap();
}

#[test]
fn bidisc_case_reports_equal_lengths() {
    let r = run_bidisc_case(&[1e-2, 1e-3, 1e-4]).unwrap();
    assert_eq!(r.probe, ProbeKind::BidiscCase);
    let csv = r.to_csv();
    assert_eq!(csv.lines().count(), 4);
    assert!(csv.lines().skip(1).all(|l| l.ends_with(",equal-lengths")), "{csv}");
    // k_𝔻(−1+ε, 1−ε) = log((2−ε)/ε)
    let k = r.samples[2].upper;
    assert!((k - 19999f64.ln()).abs() < 1e-10);
    let back: ProbeReport = serde_json::from_str(&r.to_json()).unwrap();
    assert_eq!(back.samples.len(), 3);
}

#[test]
fn omega_psi_bound_dominates_the_certified_lower_bound() {
    let params = OmegaPsiParams::exp_neg_c_over_x(PI).unwrap();
    let d = DomainSpec::omega_psi(params.clone()).unwrap();
    for eps in [1e-1, 1e-2, 1e-3, 1e-4] {
        let b = omega_psi_upper_bound(&params, eps).unwrap();
        let lb = distance_lower_bound(&d, &p_eps(eps), &q_eps(eps)).unwrap();
        assert!(lb <= b.bound, "ε = {eps}: {lb} > {}", b.bound);
        assert!(b.disc_distance <= b.bound);
    }
}

#[test]
fn omega_psi_products_grow() {
    let params = OmegaPsiParams::exp_neg_c_over_x(PI).unwrap();
    let r = run_omega_psi_case(&params, &[1e-1, 1e-2, 1e-3], None, &SolverConfig::default()).unwrap();
    assert_eq!(r.verdict, Verdict::Consistent);
    assert_eq!(r.classification.as_deref(), Some("gromov-product-diverging"));
    let lows: Vec<f64> = r.samples.iter().map(|s| s.lower).collect();
    assert!(lows.windows(2).all(|w| w[1] > w[0]), "{lows:?}");
}
