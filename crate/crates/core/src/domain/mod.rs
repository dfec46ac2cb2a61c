//! Bounded convex domains and their Euclidean geometry.
//!
//! [`DomainSpec`] is the geometry oracle used by every other module. Model
//! domains (disc, half-plane, polydisc, ball, ellipsoid) answer queries in
//! closed form; Ω_ψ, user supplied convex domains and intersections fall
//! back to ray casting against a convex defining function.

pub mod basis;
mod generic;
pub mod omega_psi;

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use basis::MinimalBasisResult;
pub use omega_psi::{Chi, OmegaPsiParams, Psi, PsiForm};

use crate::error::{KobError, Result};
use crate::point::{CPoint, CVector};

/// Convex defining function of a user supplied domain: negative exactly on
/// the domain.
pub trait DefiningFunction: Send + Sync + fmt::Debug {
    fn dim(&self) -> usize;

    fn value(&self, z: &CPoint) -> f64;

    /// Real gradient packed as a complex vector (`∂/∂x_j + i ∂/∂y_j`).
    fn gradient(&self, z: &CPoint) -> CPoint {
        let h = 1e-7 * (1.0 + z.norm());
        let mut g = CPoint::zeros(z.dim());
        for k in 0..2 * z.dim() {
            let mut zp = z.clone();
            zp.add_real_coord(k, h);
            let mut zm = z.clone();
            zm.add_real_coord(k, -h);
            g.add_real_coord(k, (self.value(&zp) - self.value(&zm)) / (2.0 * h));
        }
        g
    }
}

/// A convex domain given by a defining function and a bounding ball.
#[derive(Clone, Debug)]
pub struct SmoothConvex {
    pub func: Arc<dyn DefiningFunction>,
    pub bound_center: CPoint,
    pub bound_radius: f64,
}

#[derive(Clone, Debug)]
pub enum DomainKind {
    Disc,
    /// `{Im z > 0}` in ℂ. Unbounded; only used as an estimate target.
    HalfPlane,
    Polydisc { n: usize },
    Ball { center: CPoint, radius: f64 },
    /// `Σ |z_j|² / a_j² < 1`.
    Ellipsoid { axes: Vec<f64> },
    OmegaPsi(OmegaPsiParams),
    SmoothConvex(SmoothConvex),
    Intersection(Vec<DomainSpec>),
}

/// Immutable description of a convex domain plus cached metadata.
#[derive(Clone, Debug)]
pub struct DomainSpec {
    kind: DomainKind,
    dim: usize,
    base_point: CPoint,
    bound_center: CPoint,
    bound_radius: f64,
}

/// Nearest boundary points of an interior point.
#[derive(Clone, Debug)]
pub(crate) struct NearestSet {
    pub distance: f64,
    /// Sorted lexicographically. When `continuum` is set the minimizers form
    /// a continuum and `points[0]` is its lexicographically smallest member.
    pub points: Vec<CPoint>,
    pub continuum: bool,
}

/// Boundary contact of a complex slice `z + ℂv`.
#[derive(Clone, Debug)]
pub(crate) struct SliceContact {
    pub distance: f64,
    /// Values of λ with `z + λ v` on the boundary at distance `distance`.
    pub lambdas: Vec<Complex64>,
    pub continuum: bool,
}

impl DomainSpec {
    fn build(kind: DomainKind, dim: usize, base_point: CPoint, bound_center: CPoint, bound_radius: f64) -> Self {
        DomainSpec { kind, dim, base_point, bound_center, bound_radius }
    }

    pub fn disc() -> Self {
        Self::build(DomainKind::Disc, 1, CPoint::zeros(1), CPoint::zeros(1), 1.0)
    }

    pub fn half_plane() -> Self {
        Self::build(DomainKind::HalfPlane, 1, CPoint::c(&[(0.0, 1.0)]), CPoint::zeros(1), f64::INFINITY)
    }

    pub fn polydisc(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(KobError::InvalidInput("polydisc dimension must be positive".into()));
        }
        Ok(Self::build(DomainKind::Polydisc { n }, n, CPoint::zeros(n), CPoint::zeros(n), (n as f64).sqrt()))
    }

    /// Unit ball of ℂⁿ.
    pub fn ball(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(KobError::InvalidInput("ball dimension must be positive".into()));
        }
        Self::ball_at(CPoint::zeros(n), 1.0)
    }

    pub fn ball_at(center: CPoint, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(KobError::InvalidInput(format!("ball radius must be positive, got {radius}")));
        }
        let n = center.dim();
        Ok(Self::build(DomainKind::Ball { center: center.clone(), radius }, n, center.clone(), center, radius))
    }

    pub fn ellipsoid(axes: Vec<f64>) -> Result<Self> {
        if axes.is_empty() || axes.iter().any(|a| !(*a > 0.0 && a.is_finite())) {
            return Err(KobError::InvalidInput("ellipsoid semi-axes must be positive".into()));
        }
        let n = axes.len();
        let r = axes.iter().cloned().fold(0.0, f64::max);
        Ok(Self::build(DomainKind::Ellipsoid { axes }, n, CPoint::zeros(n), CPoint::zeros(n), r))
    }

    pub fn omega_psi(params: OmegaPsiParams) -> Result<Self> {
        params.validate()?;
        let cap = params.cap_radius;
        Ok(Self::build(DomainKind::OmegaPsi(params), 2, CPoint::c(&[(0.0, 0.0), (1.0, 0.0)]), CPoint::zeros(2), cap))
    }

    pub fn smooth_convex(func: Arc<dyn DefiningFunction>, base_point: CPoint, bound_center: CPoint, bound_radius: f64) -> Result<Self> {
        let n = func.dim();
        if base_point.dim() != n || bound_center.dim() != n {
            return Err(KobError::DimensionMismatch { expected: n, found: base_point.dim() });
        }
        if !(func.value(&base_point) < 0.0) {
            return Err(KobError::InvalidInput("base point must lie inside the domain".into()));
        }
        let sc = SmoothConvex { func, bound_center: bound_center.clone(), bound_radius };
        Ok(Self::build(DomainKind::SmoothConvex(sc), n, base_point, bound_center, bound_radius))
    }

    /// Intersection of convex domains. The base point is found by maximizing
    /// the smallest depth across parts.
    pub fn intersection(parts: Vec<DomainSpec>) -> Result<Self> {
        let first = parts.first().ok_or_else(|| KobError::InvalidInput("empty intersection".into()))?;
        let n = first.dim;
        if let Some(p) = parts.iter().find(|p| p.dim != n) {
            return Err(KobError::DimensionMismatch { expected: n, found: p.dim });
        }
        let depth = |z: &CPoint| parts.iter().map(|p| p.signed_depth(z)).fold(f64::INFINITY, f64::min);
        let mut best = parts[0].base_point.clone();
        let mut best_val = depth(&best);
        for p in &parts {
            for q in &parts {
                let m = p.base_point.midpoint(&q.base_point);
                for cand in [p.base_point.clone(), m] {
                    let v = depth(&cand);
                    if v > best_val {
                        best_val = v;
                        best = cand;
                    }
                }
            }
        }
        let scale = parts.iter().map(|p| p.bound_radius).fold(f64::INFINITY, f64::min).min(1.0);
        let mut step = 0.25 * scale;
        while step > 1e-9 * scale {
            let mut improved = false;
            for k in 0..2 * n {
                for s in [step, -step] {
                    let mut cand = best.clone();
                    cand.add_real_coord(k, s);
                    let v = depth(&cand);
                    if v > best_val {
                        best_val = v;
                        best = cand;
                        improved = true;
                    }
                }
            }
            if !improved {
                step *= 0.5;
            }
        }
        if !(best_val > 0.0) {
            return Err(KobError::InvalidInput("intersection has empty interior".into()));
        }
        let tightest = parts
            .iter()
            .min_by(|a, b| a.bound_radius.total_cmp(&b.bound_radius))
            .expect("non-empty");
        let (bc, br) = (tightest.bound_center.clone(), tightest.bound_radius);
        Ok(Self::build(DomainKind::Intersection(parts), n, best, bc, br))
    }

    pub fn kind(&self) -> &DomainKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Interior reference point `o`.
    pub fn base_point(&self) -> &CPoint {
        &self.base_point
    }

    /// Radius of a ball containing the domain (infinite for the half-plane).
    pub fn bounding_radius(&self) -> f64 {
        self.bound_radius
    }

    pub fn bounding_center(&self) -> &CPoint {
        &self.bound_center
    }

    pub fn is_bounded(&self) -> bool {
        self.bound_radius.is_finite()
    }

    /// Domains whose Kobayashi metric and distance are known in closed form.
    pub fn has_closed_form(&self) -> bool {
        matches!(
            self.kind,
            DomainKind::Disc | DomainKind::HalfPlane | DomainKind::Polydisc { .. } | DomainKind::Ball { .. }
        )
    }

    /// Domains whose projections and slices are computed in closed form
    /// rather than by ray casting.
    pub fn exact_geometry(&self) -> bool {
        match &self.kind {
            DomainKind::OmegaPsi(_) | DomainKind::SmoothConvex(_) => false,
            DomainKind::Intersection(parts) => parts.iter().all(|p| p.exact_geometry()),
            _ => true,
        }
    }

    pub fn label(&self) -> String {
        match &self.kind {
            DomainKind::Disc => "disc".into(),
            DomainKind::HalfPlane => "half_plane".into(),
            DomainKind::Polydisc { n } => format!("polydisc({n})"),
            DomainKind::Ball { .. } => format!("ball({})", self.dim),
            DomainKind::Ellipsoid { axes } => format!("ellipsoid({axes:?})"),
            DomainKind::OmegaPsi(p) => format!("omega_psi({:?})", p.psi.form()),
            DomainKind::SmoothConvex(_) => format!("smooth_convex({})", self.dim),
            DomainKind::Intersection(parts) => {
                let names: Vec<String> = parts.iter().map(|p| p.label()).collect();
                format!("intersection[{}]", names.join(","))
            }
        }
    }

    pub(crate) fn check_dim(&self, z: &CPoint) -> Result<()> {
        if z.dim() != self.dim {
            return Err(KobError::DimensionMismatch { expected: self.dim, found: z.dim() });
        }
        Ok(())
    }

    fn require_inside(&self, z: &CPoint) -> Result<()> {
        if !self.contains(z)? {
            return Err(KobError::OutsideDomain(format!("{:?} not in {}", z.to_reals(), self.label())));
        }
        Ok(())
    }

    /// Convex function, negative exactly on the domain.
    pub fn defining_value(&self, z: &CPoint) -> f64 {
        match &self.kind {
            DomainKind::Disc => z[0].norm_sqr() - 1.0,
            DomainKind::HalfPlane => -z[0].im,
            DomainKind::Polydisc { .. } => z.coords().iter().map(|c| c.norm_sqr()).fold(f64::NEG_INFINITY, f64::max) - 1.0,
            DomainKind::Ball { center, radius } => (z - center).norm_sqr() / (radius * radius) - 1.0,
            DomainKind::Ellipsoid { axes } => {
                z.coords().iter().zip(axes).map(|(c, a)| c.norm_sqr() / (a * a)).sum::<f64>() - 1.0
            }
            DomainKind::OmegaPsi(p) => {
                let cap = p.cap_radius;
                p.profile(z).max(z.norm_sqr() / (cap * cap) - 1.0)
            }
            DomainKind::SmoothConvex(sc) => sc.func.value(z),
            DomainKind::Intersection(parts) => {
                parts.iter().map(|p| p.defining_value(z)).fold(f64::NEG_INFINITY, f64::max)
            }
        }
    }

    /// Gradient of [`defining_value`](Self::defining_value), taking the
    /// active piece where it is a maximum.
    pub fn defining_gradient(&self, z: &CPoint) -> CPoint {
        match &self.kind {
            DomainKind::Disc | DomainKind::Ellipsoid { .. } => {
                let axes: Vec<f64> = match &self.kind {
                    DomainKind::Ellipsoid { axes } => axes.clone(),
                    _ => vec![1.0],
                };
                CPoint::from(z.coords().iter().zip(&axes).map(|(c, a)| c * (2.0 / (a * a))).collect::<Vec<_>>())
            }
            DomainKind::HalfPlane => CPoint::c(&[(0.0, -1.0)]),
            DomainKind::Polydisc { n } => {
                let (j, _) = z
                    .coords()
                    .iter()
                    .enumerate()
                    .map(|(j, c)| (j, c.norm_sqr()))
                    .fold((0, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
                let mut g = CPoint::zeros(*n);
                g[j] = z[j] * 2.0;
                g
            }
            DomainKind::Ball { center, radius } => (z - center).scale(2.0 / (radius * radius)),
            DomainKind::OmegaPsi(p) => {
                let cap = p.cap_radius;
                if p.profile(z) >= z.norm_sqr() / (cap * cap) - 1.0 {
                    p.profile_gradient(z)
                } else {
                    z.scale(2.0 / (cap * cap))
                }
            }
            DomainKind::SmoothConvex(sc) => sc.func.gradient(z),
            DomainKind::Intersection(parts) => {
                let active = parts
                    .iter()
                    .max_by(|a, b| a.defining_value(z).total_cmp(&b.defining_value(z)))
                    .expect("non-empty");
                active.defining_gradient(z)
            }
        }
    }

    pub(crate) fn depth_estimate(&self, z: &CPoint) -> f64 {
        self.signed_depth(z)
    }

    /// Cheap monotone depth surrogate: positive inside, zero on the
    /// boundary. Exact Euclidean depth for balls, discs and polydiscs.
    fn signed_depth(&self, z: &CPoint) -> f64 {
        match &self.kind {
            DomainKind::Disc => 1.0 - z[0].norm(),
            DomainKind::HalfPlane => z[0].im,
            DomainKind::Polydisc { .. } => z.coords().iter().map(|c| 1.0 - c.norm()).fold(f64::INFINITY, f64::min),
            DomainKind::Ball { center, radius } => radius - (z - center).norm(),
            DomainKind::Ellipsoid { axes } => {
                let q: f64 = z.coords().iter().zip(axes).map(|(c, a)| c.norm_sqr() / (a * a)).sum();
                let amin = axes.iter().cloned().fold(f64::INFINITY, f64::min);
                (1.0 - q.sqrt()) * amin
            }
            DomainKind::Intersection(parts) => parts.iter().map(|p| p.signed_depth(z)).fold(f64::INFINITY, f64::min),
            _ => {
                let g = self.defining_gradient(z).norm().max(1e-12);
                -self.defining_value(z) / g
            }
        }
    }

    /// Membership in the open domain.
    pub fn contains(&self, z: &CPoint) -> Result<bool> {
        self.check_dim(z)?;
        Ok(self.contains_unchecked(z))
    }

    pub(crate) fn contains_unchecked(&self, z: &CPoint) -> bool {
        match &self.kind {
            DomainKind::Disc => z[0].norm_sqr() < 1.0,
            DomainKind::HalfPlane => z[0].im > 0.0,
            DomainKind::Polydisc { .. } => z.coords().iter().all(|c| c.norm_sqr() < 1.0),
            DomainKind::Ball { center, radius } => (z - center).norm_sqr() < radius * radius,
            DomainKind::Intersection(parts) => parts.iter().all(|p| p.contains_unchecked(z)),
            _ => self.defining_value(z) < 0.0,
        }
    }

    /// Largest `s ≥ 0` with `z + t·u ∈ D` for all `t < s`; `u` a real unit
    /// direction.
    pub(crate) fn ray_exit(&self, z: &CPoint, u: &CVector) -> f64 {
        fn quad_root(a: f64, b: f64, c: f64) -> f64 {
            // positive root of a s² + 2 b s + c = 0 with c < 0
            if a <= 0.0 {
                return if b < 0.0 { -c / (2.0 * b) } else { f64::INFINITY };
            }
            let disc = (b * b - a * c).max(0.0).sqrt();
            if b >= 0.0 {
                -c / (b + disc)
            } else {
                (disc - b) / a
            }
        }
        match &self.kind {
            DomainKind::Disc => quad_root(u.norm_sqr(), z.real_dot(u), z.norm_sqr() - 1.0),
            DomainKind::Ball { center, radius } => {
                let w = z - center;
                quad_root(u.norm_sqr(), w.real_dot(u), w.norm_sqr() - radius * radius)
            }
            DomainKind::Polydisc { .. } => z
                .coords()
                .iter()
                .zip(u.coords())
                .map(|(zj, uj)| quad_root(uj.norm_sqr(), (zj * uj.conj()).re, zj.norm_sqr() - 1.0))
                .fold(f64::INFINITY, f64::min),
            DomainKind::Ellipsoid { axes } => {
                let (mut a, mut b, mut c) = (0.0, 0.0, -1.0);
                for ((zj, uj), ax) in z.coords().iter().zip(u.coords()).zip(axes) {
                    let w = 1.0 / (ax * ax);
                    a += uj.norm_sqr() * w;
                    b += (zj * uj.conj()).re * w;
                    c += zj.norm_sqr() * w;
                }
                quad_root(a, b, c)
            }
            DomainKind::HalfPlane => {
                if u[0].im < 0.0 {
                    -z[0].im / u[0].im
                } else {
                    f64::INFINITY
                }
            }
            DomainKind::Intersection(parts) => parts.iter().map(|p| p.ray_exit(z, u)).fold(f64::INFINITY, f64::min),
            _ => generic::ray_exit_by_root(self, z, u),
        }
    }

    /// Euclidean distance δ_D(z) from `z` to the boundary.
    pub fn boundary_distance(&self, z: &CPoint) -> Result<f64> {
        self.require_inside(z)?;
        Ok(match &self.kind {
            DomainKind::Disc | DomainKind::HalfPlane | DomainKind::Polydisc { .. } | DomainKind::Ball { .. } => {
                self.signed_depth(z)
            }
            DomainKind::Intersection(parts) => {
                let mut m = f64::INFINITY;
                for p in parts {
                    m = m.min(p.boundary_distance(z)?);
                }
                m
            }
            _ => self.nearest_set(z)?.distance,
        })
    }

    pub(crate) fn nearest_set(&self, z: &CPoint) -> Result<NearestSet> {
        self.require_inside(z)?;
        let lexmin_sphere = |center: &CPoint, r: f64| {
            let mut p = center.clone();
            p[0] -= Complex64::new(r, 0.0);
            p
        };
        let mut set = match &self.kind {
            DomainKind::Disc | DomainKind::Ball { .. } => {
                let (c, r) = match &self.kind {
                    DomainKind::Ball { center, radius } => (center.clone(), *radius),
                    _ => (CPoint::zeros(1), 1.0),
                };
                let w = z - &c;
                let nw = w.norm();
                if nw <= 1e-14 * r {
                    NearestSet { distance: r - nw, points: vec![lexmin_sphere(&c, r)], continuum: true }
                } else {
                    NearestSet { distance: r - nw, points: vec![c.offset(&w, r / nw)], continuum: false }
                }
            }
            DomainKind::HalfPlane => {
                NearestSet { distance: z[0].im, points: vec![CPoint::c(&[(z[0].re, 0.0)])], continuum: false }
            }
            DomainKind::Polydisc { .. } => {
                let m = z.coords().iter().map(|c| c.norm()).fold(0.0, f64::max);
                let mut pts = Vec::new();
                let mut continuum = false;
                for (j, c) in z.coords().iter().enumerate() {
                    if c.norm() >= m - 1e-14 {
                        let mut p = z.clone();
                        if c.norm() > 1e-300 {
                            p[j] = c / c.norm();
                        } else {
                            p[j] = Complex64::new(-1.0, 0.0);
                            continuum = true;
                        }
                        pts.push(p);
                    }
                }
                NearestSet { distance: 1.0 - m, points: pts, continuum }
            }
            DomainKind::Ellipsoid { axes } => generic::ellipsoid_nearest(axes, z),
            DomainKind::Intersection(parts) => {
                let sets: Vec<NearestSet> = parts.iter().map(|p| p.nearest_set(z)).collect::<Result<_>>()?;
                let m = sets.iter().map(|s| s.distance).fold(f64::INFINITY, f64::min);
                let mut pts = Vec::new();
                let mut continuum = false;
                for s in sets {
                    if s.distance <= m * (1.0 + 1e-12) + 1e-300 {
                        continuum |= s.continuum;
                        pts.extend(s.points);
                    }
                }
                NearestSet { distance: m, points: pts, continuum }
            }
            DomainKind::OmegaPsi(_) | DomainKind::SmoothConvex(_) => generic::nearest_by_rays(self, z, 128)?,
        };
        set.points.sort_by(|a, b| a.lex_cmp(b));
        Ok(set)
    }

    /// Nearest boundary point π(z). Fails when the projection is not unique.
    pub fn nearest_boundary_point(&self, z: &CPoint) -> Result<CPoint> {
        let set = self.nearest_set(z)?;
        let first = set.points[0].clone();
        if set.continuum {
            let mut other = first.clone();
            let shift = if first.dim() > 0 { set.distance.max(1e-3) } else { 0.0 };
            // any second member of the continuum
            other[0] += Complex64::new(shift, 0.0);
            return Err(KobError::AmbiguousProjection(first.to_reals(), other.to_reals()));
        }
        if let Some(far) = set.points.iter().find(|p| p.dist(&first) > 1e-4) {
            return Err(KobError::AmbiguousProjection(first.to_reals(), far.to_reals()));
        }
        Ok(first)
    }

    /// `δ_D(z; v)`: radius of the largest complex disc `z + λv, |λ| < r`
    /// inside the domain.
    pub fn directional_distance(&self, z: &CPoint, v: &CVector) -> Result<f64> {
        Ok(self.slice_contact(z, v, false)?.distance)
    }

    /// Faster, slightly coarser slice search for inner loops.
    pub(crate) fn directional_distance_fast(&self, z: &CPoint, v: &CVector) -> Result<f64> {
        Ok(self.slice_contact(z, v, true)?.distance)
    }

    pub(crate) fn slice_contact(&self, z: &CPoint, v: &CVector, fast: bool) -> Result<SliceContact> {
        self.check_dim(v)?;
        self.require_inside(z)?;
        let v = v
            .normalized()
            .ok_or_else(|| KobError::InvalidInput("direction must be non-zero".into()))?;
        // a disc `|λ - center| < radius` containing 0
        let disc = |center: Complex64, radius: f64| {
            let cn = center.norm();
            if cn <= 1e-14 * radius {
                SliceContact { distance: radius - cn, lambdas: vec![Complex64::new(radius, 0.0)], continuum: true }
            } else {
                SliceContact { distance: radius - cn, lambdas: vec![-center / cn * (radius - cn)], continuum: false }
            }
        };
        Ok(match &self.kind {
            DomainKind::Disc | DomainKind::Ball { .. } | DomainKind::Ellipsoid { .. } => {
                let (shift, weights): (CPoint, Vec<f64>) = match &self.kind {
                    DomainKind::Ball { center, radius } => {
                        (z - center, vec![1.0 / (radius * radius); self.dim])
                    }
                    DomainKind::Ellipsoid { axes } => (z.clone(), axes.iter().map(|a| 1.0 / (a * a)).collect()),
                    _ => (z.clone(), vec![1.0]),
                };
                let mut a = 0.0;
                let mut beta = Complex64::new(0.0, 0.0);
                let mut c = 0.0;
                for ((zj, vj), w) in shift.coords().iter().zip(v.coords()).zip(&weights) {
                    a += vj.norm_sqr() * w;
                    beta += zj * vj.conj() * w;
                    c += zj.norm_sqr() * w;
                }
                // a |λ + β/a|² - |β|²/a + c < 1
                let radius = ((1.0 - c) / a + beta.norm_sqr() / (a * a)).max(0.0).sqrt();
                disc(-beta / a, radius)
            }
            DomainKind::Polydisc { .. } => {
                let mut best: Option<SliceContact> = None;
                for (zj, vj) in z.coords().iter().zip(v.coords()) {
                    if vj.norm() <= 1e-300 {
                        continue;
                    }
                    let cand = disc(-zj / vj, 1.0 / vj.norm());
                    best = Some(match best {
                        None => cand,
                        Some(b) if cand.distance < b.distance * (1.0 - 1e-13) => cand,
                        Some(mut b) if cand.distance <= b.distance * (1.0 + 1e-13) => {
                            b.continuum |= cand.continuum;
                            b.lambdas.extend(cand.lambdas);
                            b
                        }
                        Some(b) => b,
                    });
                }
                best.expect("unit vector has a non-zero entry")
            }
            DomainKind::HalfPlane => {
                SliceContact { distance: z[0].im, lambdas: vec![Complex64::new(0.0, -z[0].im) / v[0]], continuum: false }
            }
            _ => generic::slice_by_rays(self, z, &v, fast),
        })
    }

    /// Outward unit normal at a boundary point.
    pub fn supporting_hyperplane(&self, b: &CPoint) -> Result<CVector> {
        self.check_dim(b)?;
        let tol = 1e-6;
        let not_on_boundary = || KobError::Precondition(format!("{:?} is not on the boundary (tolerance 1e-6)", b.to_reals()));
        match &self.kind {
            DomainKind::Disc | DomainKind::Ball { .. } => {
                let (c, r) = match &self.kind {
                    DomainKind::Ball { center, radius } => (center.clone(), *radius),
                    _ => (CPoint::zeros(1), 1.0),
                };
                let w = b - &c;
                if (w.norm() - r).abs() > tol {
                    return Err(not_on_boundary());
                }
                w.normalized().ok_or(KobError::DegenerateGradient)
            }
            DomainKind::HalfPlane => {
                if b[0].im.abs() > tol {
                    return Err(not_on_boundary());
                }
                Ok(CPoint::c(&[(0.0, -1.0)]))
            }
            DomainKind::Polydisc { n } => {
                let m = b.coords().iter().map(|c| c.norm()).fold(0.0, f64::max);
                if (m - 1.0).abs() > tol {
                    return Err(not_on_boundary());
                }
                let mut g = CPoint::zeros(*n);
                for (j, c) in b.coords().iter().enumerate() {
                    if c.norm() >= m - 1e-9 {
                        g[j] = c / c.norm();
                    }
                }
                g.normalized().ok_or(KobError::DegenerateGradient)
            }
            _ => {
                let g = self.defining_gradient(b);
                let unit = g.normalized().ok_or(KobError::DegenerateGradient)?;
                if g.norm() < 1e-14 {
                    return Err(KobError::DegenerateGradient);
                }
                let inside_near = self.contains_unchecked(&b.offset(&unit, -1.01 * tol));
                let outside_near = !self.contains_unchecked(&b.offset(&unit, 1.01 * tol));
                if !(inside_near && outside_near) {
                    return Err(not_on_boundary());
                }
                Ok(unit)
            }
        }
    }

    /// Minimal basis and the numbers τ_j at `z`.
    pub fn minimal_basis(&self, z: &CPoint) -> Result<MinimalBasisResult> {
        basis::minimal_basis(self, z)
    }
}

/// JSON form of a domain.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DomainJson {
    Disc,
    HalfPlane,
    Polydisc {
        n: usize,
    },
    Ball {
        n: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        center: Option<CPoint>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        radius: Option<f64>,
    },
    Ellipsoid {
        axes: Vec<f64>,
    },
    OmegaPsi(OmegaPsiParams),
    Intersection {
        parts: Vec<DomainJson>,
    },
}

impl TryFrom<DomainJson> for DomainSpec {
    type Error = KobError;

    fn try_from(j: DomainJson) -> Result<DomainSpec> {
        match j {
            DomainJson::Disc => Ok(DomainSpec::disc()),
            DomainJson::HalfPlane => Ok(DomainSpec::half_plane()),
            DomainJson::Polydisc { n } => DomainSpec::polydisc(n),
            DomainJson::Ball { n, center, radius } => {
                let center = center.unwrap_or_else(|| CPoint::zeros(n));
                if center.dim() != n {
                    return Err(KobError::DimensionMismatch { expected: n, found: center.dim() });
                }
                DomainSpec::ball_at(center, radius.unwrap_or(1.0))
            }
            DomainJson::Ellipsoid { axes } => DomainSpec::ellipsoid(axes),
            DomainJson::OmegaPsi(p) => DomainSpec::omega_psi(p),
            DomainJson::Intersection { parts } => {
                DomainSpec::intersection(parts.into_iter().map(DomainSpec::try_from).collect::<Result<_>>()?)
            }
        }
    }
}

impl TryFrom<&DomainSpec> for DomainJson {
    type Error = KobError;

    fn try_from(d: &DomainSpec) -> Result<DomainJson> {
        Ok(match &d.kind {
            DomainKind::Disc => DomainJson::Disc,
            DomainKind::HalfPlane => DomainJson::HalfPlane,
            DomainKind::Polydisc { n } => DomainJson::Polydisc { n: *n },
            DomainKind::Ball { center, radius } => {
                let unit = center.norm() == 0.0 && *radius == 1.0;
                DomainJson::Ball {
                    n: d.dim,
                    center: (!unit).then(|| center.clone()),
                    radius: (!unit).then_some(*radius),
                }
            }
            DomainKind::Ellipsoid { axes } => DomainJson::Ellipsoid { axes: axes.clone() },
            DomainKind::OmegaPsi(p) => DomainJson::OmegaPsi(p.clone()),
            DomainKind::SmoothConvex(_) => {
                return Err(KobError::InvalidInput("domains given by a defining function have no JSON form".into()))
            }
            DomainKind::Intersection(parts) => DomainJson::Intersection {
                parts: parts.iter().map(DomainJson::try_from).collect::<Result<_>>()?,
            },
        })
    }
}

impl Serialize for DomainSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        DomainJson::try_from(self).map_err(serde::ser::Error::custom)?.serialize(s)
    }
}

impl<'de> Deserialize<'de> for DomainSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        DomainSpec::try_from(DomainJson::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}
