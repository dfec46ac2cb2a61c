//! Property suites checked against closed forms written out independently of
//! the library.

use num_complex::Complex64;
use proptest::prelude::*;

use koblab::diagnostics::gromov_from_brackets;
use koblab::domain::DomainSpec;
use koblab::geodesic::{distance_bracket_quick, solve_geodesic, SolverConfig};
use koblab::metric::{distance_lower_bound, exact_distance, metric_bracket, MetricBracket};
use koblab::point::CPoint;

/// `tanh² k_B(a, b) = 1 − (1−|a|²)(1−|b|²)/|1 − ⟨a, b⟩|²`.
fn ball_oracle(a: &[Complex64], b: &[Complex64]) -> f64 {
    let na: f64 = a.iter().map(|z| z.norm_sqr()).sum();
    let nb: f64 = b.iter().map(|z| z.norm_sqr()).sum();
    let ip: Complex64 = a.iter().zip(b).map(|(x, y)| x * y.conj()).sum();
    let t2 = 1.0 - (1.0 - na) * (1.0 - nb) / (Complex64::new(1.0, 0.0) - ip).norm_sqr();
    t2.max(0.0).sqrt().atanh()
}

/// Kobayashi metric of the unit ball at `z` in direction `x`.
fn ball_metric_oracle(z: &[Complex64], x: &[Complex64]) -> f64 {
    let nz: f64 = z.iter().map(|w| w.norm_sqr()).sum();
    let nx: f64 = x.iter().map(|w| w.norm_sqr()).sum();
    let ip: Complex64 = x.iter().zip(z).map(|(a, b)| a * b.conj()).sum();
    ((1.0 - nz) * nx + ip.norm_sqr()).sqrt() / (1.0 - nz)
}

fn disc_oracle(a: Complex64, b: Complex64) -> f64 {
    ((a - b) / (Complex64::new(1.0, 0.0) - a.conj() * b)).norm().atanh()
}

/// Point of the unit ball of ℂ² from polar data, at most `0.97` in norm.
fn ball_point() -> impl Strategy<Value = Vec<Complex64>> {
    (0.0..0.97f64, 0.0..1.0f64, 0.0..std::f64::consts::TAU, 0.0..std::f64::consts::TAU).prop_map(|(r, s, t1, t2)| {
        let c = s.sqrt();
        let d = (1.0 - s).sqrt();
        vec![Complex64::from_polar(r * c, t1), Complex64::from_polar(r * d, t2)]
    })
}

fn bidisc_point() -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((0.0..0.97f64, 0.0..std::f64::consts::TAU).prop_map(|(r, t)| Complex64::from_polar(r, t)), 2)
}

fn direction() -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64).prop_map(|(a, b)| Complex64::new(a, b)), 2)
        .prop_filter("non-zero", |v| v.iter().map(|z| z.norm_sqr()).sum::<f64>() > 1e-4)
}

fn pt(v: &[Complex64]) -> CPoint {
    CPoint::new(v.to_vec()).unwrap()
}

/// The unit ball seen only through the generic convex-domain code paths.
fn generic_ball() -> DomainSpec {
    let big = DomainSpec::ball_at(CPoint::zeros(2), 10.0).unwrap();
    DomainSpec::intersection(vec![DomainSpec::ball(2).unwrap(), big]).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 1000, ..ProptestConfig::default() })]

    #[test]
    fn ball_distance_matches_oracle(a in ball_point(), b in ball_point()) {
        let d = DomainSpec::ball(2).unwrap();
        let k = exact_distance(&d, &pt(&a), &pt(&b)).unwrap();
        let o = ball_oracle(&a, &b);
        prop_assert!((k - o).abs() <= 1e-9 * (1.0 + o), "{k} vs {o}");
    }

    #[test]
    fn lower_bounds_never_exceed_exact(a in bidisc_point(), b in bidisc_point(), c in ball_point(), e in ball_point()) {
        let pd = DomainSpec::polydisc(2).unwrap();
        let k = disc_oracle(a[0], b[0]).max(disc_oracle(a[1], b[1]));
        prop_assert!(distance_lower_bound(&pd, &pt(&a), &pt(&b)).unwrap() <= k * (1.0 + 1e-12) + 1e-15);
        let ball = DomainSpec::ball(2).unwrap();
        let k = ball_oracle(&c, &e);
        prop_assert!(distance_lower_bound(&ball, &pt(&c), &pt(&e)).unwrap() <= k * (1.0 + 1e-12) + 1e-15);
        let g = generic_ball();
        prop_assert!(distance_lower_bound(&g, &pt(&c), &pt(&e)).unwrap() <= k * (1.0 + 1e-12) + 1e-15);
    }

    #[test]
    fn generic_metric_bracket_encloses_ball_metric(z in ball_point(), x in direction()) {
        let b = metric_bracket(&generic_ball(), &pt(&z), &pt(&x)).unwrap();
        let m = ball_metric_oracle(&z, &x);
        prop_assert!(b.lower <= m * (1.0 + 1e-9) && m <= b.upper * (1.0 + 1e-9), "{b:?} vs {m}");
    }

    #[test]
    fn lower_bound_and_exact_are_swap_symmetric(a in bidisc_point(), b in bidisc_point()) {
        let pd = DomainSpec::polydisc(2).unwrap();
        let (x, y) = (pt(&a), pt(&b));
        prop_assert_eq!(distance_lower_bound(&pd, &x, &y).unwrap(), distance_lower_bound(&pd, &y, &x).unwrap());
        let kxy = exact_distance(&pd, &x, &y).unwrap();
        let kyx = exact_distance(&pd, &y, &x).unwrap();
        prop_assert!((kxy - kyx).abs() <= 1e-12 * (1.0 + kxy));
    }

    #[test]
    fn quick_bracket_is_sound_on_the_generic_ball(a in ball_point(), b in ball_point()) {
        let q = distance_bracket_quick(&generic_ball(), &pt(&a), &pt(&b)).unwrap().bracket;
        let k = ball_oracle(&a, &b);
        prop_assert!(q.lower <= k * (1.0 + 1e-9) + 1e-12 && k <= q.upper * (1.0 + 1e-9) + 1e-12, "{q:?} vs {k}");
    }

    #[test]
    fn gromov_bracket_contains_exact_product(a in ball_point(), b in ball_point(), o in ball_point()) {
        let d = DomainSpec::ball(2).unwrap();
        let (x, y, p) = (pt(&a), pt(&b), pt(&o));
        let ex = |u: &CPoint, v: &CPoint| exact_distance(&d, u, v).unwrap();
        let g = 0.5 * (ex(&x, &p) + ex(&p, &y) - ex(&x, &y));
        let widen = |u: &CPoint, v: &CPoint| {
            let k = ex(u, v);
            MetricBracket { lower: k * (1.0 - 1e-3), upper: k * (1.0 + 1e-3) }
        };
        let b = gromov_from_brackets(widen(&x, &p), widen(&p, &y), widen(&x, &y));
        prop_assert!(b.lower <= g + 1e-12 && g <= b.upper + 1e-12, "{b:?} vs {g}");
    }

    #[test]
    fn points_round_trip_through_json(a in bidisc_point()) {
        let p = pt(&a);
        let s = serde_json::to_string(&p).unwrap();
        let back: CPoint = serde_json::from_str(&s).unwrap();
        prop_assert_eq!(back, p);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, ..ProptestConfig::default() })]

    /// The generic solver must bracket the true ball distance.
    #[test]
    fn solver_brackets_ball_distance_generically(a in ball_point(), b in ball_point()) {
        let cfg = SolverConfig { control_points: 17, ..Default::default() };
        let r = solve_geodesic(&generic_ball(), &pt(&a), &pt(&b), &cfg).unwrap();
        let k = ball_oracle(&a, &b);
        prop_assert!(r.distance.lower <= k * (1.0 + 1e-9) + 1e-12, "{:?} vs {k}", r.distance);
        prop_assert!(k <= r.distance.upper * (1.0 + 1e-9) + 1e-12, "{:?} vs {k}", r.distance);
    }

    #[test]
    fn solver_is_swap_symmetric(a in bidisc_point(), b in bidisc_point()) {
        let d = DomainSpec::polydisc(2).unwrap();
        let cfg = SolverConfig { control_points: 17, ..Default::default() };
        let f = solve_geodesic(&d, &pt(&a), &pt(&b), &cfg).unwrap();
        let r = solve_geodesic(&d, &pt(&b), &pt(&a), &cfg).unwrap();
        prop_assert_eq!(f.distance, r.distance);
    }
}
