//! The Ω_ψ family: convex domains in ℂ² whose boundary contains the segment
//! `[-2i, 2i] × {0}` and whose boundary flattens towards it at a rate set by
//! `ψ`.
//!
//! Inside `‖z‖ < cap_radius` the domain is
//!
//! ```text
//! Re z₂ > ψ(Re z₁) + χ₁((|Im z₁| − 2)₊) + χ₂(Im z₂)
//! ```
//!
//! and it is cut off by the ball of radius `cap_radius`. The profile `ψ` is
//! only convex near 0 for the supported forms, so past its inflection point
//! it is continued by its tangent line; everything near the segment is
//! unaffected.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{KobError, Result};
use crate::point::CPoint;

/// Closed forms for the flattening profile ψ.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum PsiForm {
    /// ψ(x) = exp(−c/|x|).
    ExpNegCOverX { c: f64 },
    /// ψ(x) = exp(−(1/|x|)·(log 1/|x|)^(−α)).
    ExpNegInvLogPow { alpha: f64 },
}

/// ψ together with its convex continuation past the inflection point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PsiForm", into = "PsiForm")]
pub struct Psi {
    form: PsiForm,
    cutoff: f64,
    value_at_cutoff: f64,
    slope_at_cutoff: f64,
}

impl TryFrom<PsiForm> for Psi {
    type Error = KobError;
    fn try_from(form: PsiForm) -> Result<Psi> {
        Psi::new(form)
    }
}

impl From<Psi> for PsiForm {
    fn from(p: Psi) -> PsiForm {
        p.form
    }
}

// g(x) = 1 / (x L^α), L = ln(1/x); returns (g, g', g'').
fn inv_log_pow_g(x: f64, alpha: f64) -> (f64, f64, f64) {
    let l = (1.0 / x).ln();
    let base = l.powf(-alpha);
    let g = base / x;
    let g1 = base / (x * x) * (alpha / l - 1.0);
    let g2 = base / (x * x * x) * (alpha * (alpha + 1.0) / (l * l) - 3.0 * alpha / l + 2.0);
    (g, g1, g2)
}

impl Psi {
    pub fn new(form: PsiForm) -> Result<Psi> {
        match form {
            PsiForm::ExpNegCOverX { c } => {
                if !(c > 0.0 && c.is_finite()) {
                    return Err(KobError::InvalidInput(format!("psi constant c must be positive, got {c}")));
                }
                // ψ'' = ψ (c/x³)(c/x − 2) changes sign at x = c/2
                let xc = c / 2.0;
                let v = (-2.0f64).exp();
                let s = c / (xc * xc) * v;
                Ok(Psi { form, cutoff: xc, value_at_cutoff: v, slope_at_cutoff: s })
            }
            PsiForm::ExpNegInvLogPow { alpha } => {
                if !(alpha > 0.0 && alpha.is_finite()) {
                    return Err(KobError::InvalidInput(format!("psi exponent alpha must be positive, got {alpha}")));
                }
                // convex while g'² ≥ g''; increasing while L > α
                let upper = (-alpha).exp().min(0.5) * (1.0 - 1e-9);
                let convex = |x: f64| {
                    let (_, g1, g2) = inv_log_pow_g(x, alpha);
                    g1 * g1 - g2 >= 0.0 && g1 < 0.0
                };
                let mut lo = 1e-12;
                if !convex(lo) {
                    return Err(KobError::InvalidInput("psi form is not convex near 0".into()));
                }
                let mut hi = lo;
                while hi < upper && convex(hi) {
                    lo = hi;
                    hi = (hi * 1.25).min(upper);
                    if hi == upper && convex(hi) {
                        lo = hi;
                        break;
                    }
                }
                if lo < upper {
                    for _ in 0..200 {
                        let mid = 0.5 * (lo + hi);
                        if convex(mid) {
                            lo = mid;
                        } else {
                            hi = mid;
                        }
                    }
                }
                let xc = lo;
                let (g, g1, _) = inv_log_pow_g(xc, alpha);
                let v = (-g).exp();
                Ok(Psi { form, cutoff: xc, value_at_cutoff: v, slope_at_cutoff: -g1 * v })
            }
        }
    }

    pub fn form(&self) -> PsiForm {
        self.form
    }

    /// Start of the linear continuation.
    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    fn raw(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        match self.form {
            PsiForm::ExpNegCOverX { c } => (-c / x).exp(),
            PsiForm::ExpNegInvLogPow { alpha } => (-inv_log_pow_g(x, alpha).0).exp(),
        }
    }

    fn raw_derivative(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        match self.form {
            PsiForm::ExpNegCOverX { c } => c / (x * x) * (-c / x).exp(),
            PsiForm::ExpNegInvLogPow { alpha } => {
                let (g, g1, _) = inv_log_pow_g(x, alpha);
                -g1 * (-g).exp()
            }
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let a = x.abs();
        if a <= self.cutoff {
            self.raw(a)
        } else {
            self.value_at_cutoff + self.slope_at_cutoff * (a - self.cutoff)
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        let a = x.abs();
        let d = if a <= self.cutoff { self.raw_derivative(a) } else { self.slope_at_cutoff };
        d * x.signum()
    }

    /// Inverse of ψ on `[0, ∞)`.
    pub fn inverse(&self, u: f64) -> f64 {
        if u <= 0.0 {
            return 0.0;
        }
        if u > self.value_at_cutoff {
            return self.cutoff + (u - self.value_at_cutoff) / self.slope_at_cutoff;
        }
        match self.form {
            PsiForm::ExpNegCOverX { c } => c / (1.0 / u).ln(),
            PsiForm::ExpNegInvLogPow { .. } => {
                let (mut lo, mut hi) = (0.0f64, self.cutoff);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if self.raw(mid) < u {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                0.5 * (lo + hi)
            }
        }
    }

    /// ψ = o(exp(−π/(2x))) near 0: the regime where Ω_ψ loses visibility.
    pub fn non_visible_regime(&self) -> bool {
        matches!(self.form, PsiForm::ExpNegCOverX { c } if c > PI / 2.0)
    }

    /// ψ(x) ≥ exp(−(1/x)(log 1/x)^(−α)) with α > 1: the Goldilocks regime.
    pub fn goldilocks_regime(&self) -> bool {
        matches!(self.form, PsiForm::ExpNegInvLogPow { alpha } if alpha > 1.0)
    }
}

/// Convex even functions used for χ₁ and χ₂.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum Chi {
    /// χ(t) = a·t².
    Quadratic { a: f64 },
}

impl Default for Chi {
    fn default() -> Self {
        Chi::Quadratic { a: 1.0 }
    }
}

impl Chi {
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            Chi::Quadratic { a } => a * t * t,
        }
    }

    pub fn derivative(&self, t: f64) -> f64 {
        match *self {
            Chi::Quadratic { a } => 2.0 * a * t,
        }
    }
}

fn default_cap() -> f64 {
    3.0
}

/// Parameters of an Ω_ψ domain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OmegaPsiParams {
    pub psi: Psi,
    #[serde(default)]
    pub chi1: Chi,
    #[serde(default)]
    pub chi2: Chi,
    #[serde(default = "default_cap")]
    pub cap_radius: f64,
}

impl OmegaPsiParams {
    pub fn new(psi: PsiForm) -> Result<Self> {
        Ok(OmegaPsiParams { psi: Psi::new(psi)?, chi1: Chi::default(), chi2: Chi::default(), cap_radius: 3.0 })
    }

    /// ψ(x) = exp(−c/x).
    pub fn exp_neg_c_over_x(c: f64) -> Result<Self> {
        Self::new(PsiForm::ExpNegCOverX { c })
    }

    /// ψ(x) = exp(−(1/x)(log 1/x)^(−α)).
    pub fn exp_neg_inv_log_pow(alpha: f64) -> Result<Self> {
        Self::new(PsiForm::ExpNegInvLogPow { alpha })
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.cap_radius > 2.0 && self.cap_radius.is_finite()) {
            return Err(KobError::InvalidInput(format!(
                "cap radius must exceed 2 so the boundary segment survives, got {}",
                self.cap_radius
            )));
        }
        let Chi::Quadratic { a: a1 } = self.chi1;
        let Chi::Quadratic { a: a2 } = self.chi2;
        if a1 < 0.0 || a2 < 0.0 {
            return Err(KobError::InvalidInput("chi coefficients must be non-negative (convexity)".into()));
        }
        Ok(())
    }

    /// The profile part of the defining function:
    /// `ψ(Re z₁) + χ₁((|Im z₁| − 2)₊) + χ₂(Im z₂) − Re z₂`.
    pub fn profile(&self, z: &CPoint) -> f64 {
        let (z1, z2) = (z[0], z[1]);
        self.psi.eval(z1.re) + self.chi1.eval((z1.im.abs() - 2.0).max(0.0)) + self.chi2.eval(z2.im) - z2.re
    }

    /// Real gradient of [`profile`](Self::profile) packed as a complex vector.
    pub fn profile_gradient(&self, z: &CPoint) -> CPoint {
        let (z1, z2) = (z[0], z[1]);
        let t = (z1.im.abs() - 2.0).max(0.0);
        let d_im1 = self.chi1.derivative(t) * if t > 0.0 { z1.im.signum() } else { 0.0 };
        CPoint::c(&[(self.psi.derivative(z1.re), d_im1), (-1.0, self.chi2.derivative(z2.im))])
    }
}
