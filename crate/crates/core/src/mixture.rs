//! Additive gauge mixtures and their rescaling.
//!
//! An additive mixture blends a chosen first component with a logistic gauge:
//!
//! ```text
//! g*(x, y) = p g1(x, y) + (1 - p) g_logistic(x, y; gamma)
//! ```
//!
//! `g*` is a valid gauge but its limit set no longer tops out at `(1, 1)`.
//! Writing `kappa` for the largest minimiser of `z -> g*(z, 1)` on `[0, 1]`,
//! the rescaled gauge `g = g* / g*(kappa, 1)` restores the normalisation.
//! `kappa` doubles as the slope of the conditional-extremes growth of one
//! variable given the other is large, which is why it is exposed directly.
//!
//! Each supported pairing has a closed-form `kappa`; [`numeric_supremum`] is
//! the generic search the closed forms are validated against.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::gauge::{self, Side};
use crate::Result;

/// First component of an additive mixture (the second is always logistic).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub enum MixtureComponent {
    Gaussian { rho: f64 },
    InvertedLogistic { theta: f64 },
    Rectangular { theta: f64 },
}

impl MixtureComponent {
    pub(crate) fn validate(&self) -> Result<()> {
        match *self {
            MixtureComponent::Gaussian { rho } => {
                if !(0.0..1.0).contains(&rho) {
                    return Err(Error::domain(format!("mixture rho={rho} outside [0, 1)")));
                }
            }
            MixtureComponent::InvertedLogistic { theta } | MixtureComponent::Rectangular { theta } => {
                if !(theta > 0.0 && theta <= 1.0) {
                    return Err(Error::domain(format!("mixture theta={theta} outside (0, 1]")));
                }
            }
        }
        Ok(())
    }

    #[inline]
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        match *self {
            MixtureComponent::Gaussian { rho } => gauge::eval_gaussian(x, y, rho),
            MixtureComponent::InvertedLogistic { theta } => gauge::eval_inverted_logistic(x, y, theta),
            MixtureComponent::Rectangular { theta } => gauge::eval_rectangular(x, y, theta),
        }
    }

    fn k_deriv(&self, q: f64, side: Side) -> f64 {
        match *self {
            MixtureComponent::Gaussian { rho } => gauge::gaussian_k_deriv(q, rho),
            MixtureComponent::InvertedLogistic { theta } => gauge::inverted_logistic_k_deriv(q, theta),
            MixtureComponent::Rectangular { theta } => gauge::rectangular_k_deriv(q, side, theta),
        }
    }
}

/// Parameters of an additive mixture before rescaling.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MixtureSpec {
    pub component: MixtureComponent,
    /// Logistic dependence parameter of the second component, in (0, 1).
    pub gamma: f64,
    /// Weight on the first component, in (0, 1).
    pub p: f64,
}

impl MixtureSpec {
    pub fn validate(&self) -> Result<()> {
        self.component.validate()?;
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(Error::domain(format!("mixture gamma={} outside (0, 1)", self.gamma)));
        }
        if !(self.p > 0.0 && self.p < 1.0) {
            return Err(Error::domain(format!("mixture weight p={} outside (0, 1)", self.p)));
        }
        Ok(())
    }

    /// Unrescaled mixture value.
    #[inline]
    pub fn eval_raw(&self, x: f64, y: f64) -> f64 {
        self.p * self.component.eval(x, y) + (1.0 - self.p) * gauge::eval_logistic(x, y, self.gamma)
    }

    /// Closed-form `kappa` for this pairing.
    pub fn kappa(&self) -> f64 {
        match self.component {
            MixtureComponent::Gaussian { rho } => kappa_gauss_logistic(rho, self.gamma, self.p),
            MixtureComponent::InvertedLogistic { theta } => kappa_invlog_logistic(theta, self.gamma, self.p),
            MixtureComponent::Rectangular { theta } => kappa_rect_logistic(theta, self.gamma, self.p),
        }
    }
}

/// Largest minimiser of `z -> g*(z, 1)` and the attained minimum, searched on
/// `[0, 1]` with a 2001-point grid followed by golden-section refinement in the
/// bracketing cells.
///
/// The blends this crate builds are convex in `z`, so the grid minimum brackets
/// the true one; plateaus (piecewise-linear blends can be exactly flat) resolve
/// to the right edge, matching the largest-minimiser convention of the closed
/// forms.
pub fn numeric_supremum(profile: &dyn Fn(f64) -> f64) -> (f64, f64) {
    const GRID: usize = 2001;
    const TIE_EPS: f64 = 1e-12;

    let step = 1.0 / (GRID - 1) as f64;
    let mut best_i = 0;
    let mut best_v = f64::INFINITY;
    for i in 0..GRID {
        let v = profile(i as f64 * step);
        if v < best_v {
            best_v = v;
            best_i = i;
        }
    }

    let lo = if best_i == 0 { 0.0 } else { (best_i - 1) as f64 * step };
    let hi = if best_i == GRID - 1 { 1.0 } else { (best_i + 1) as f64 * step };
    let (mut z_star, mut v_star) = golden_min(profile, lo, hi);

    // Plateau handling: if the right endpoint ties the minimum, it wins.
    let v_one = profile(1.0);
    if v_one <= v_star + TIE_EPS * (1.0 + v_star.abs()) {
        z_star = 1.0;
        v_star = v_one;
    }
    (z_star, v_star)
}

/// Golden-section minimisation of a unimodal function on `[lo, hi]`.
fn golden_min(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..90 {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let z = 0.5 * (a + b);
    (z, f(z))
}

/// `kappa` for the Gaussian-logistic mixture.
///
/// With `K = (1 - rho^2) ((1 - p)/p) ((1 - gamma)/gamma)`:
///
/// * `rho = 0`: `kappa = 0` when `gamma >= 1 - p`, else `1`;
/// * `rho > 0`: interior value `rho^2 / (1 - K)^2` when `K < 1 - rho`, else `1`.
///
/// The measure-zero boundary `K = 1 - rho` belongs to the `kappa = 1` branch
/// here; the profile minimum is attained at both `z = kappa_interior` and
/// `z = 1` there, and the largest minimiser wins.
pub fn kappa_gauss_logistic(rho: f64, gamma: f64, p: f64) -> f64 {
    if rho == 0.0 {
        return if gamma >= 1.0 - p { 0.0 } else { 1.0 };
    }
    let k = (1.0 - rho * rho) * ((1.0 - p) / p) * ((1.0 - gamma) / gamma);
    if k < 1.0 - rho {
        let root = rho / (1.0 - k);
        root * root
    } else {
        1.0
    }
}

/// `kappa` for the inverted-logistic-logistic mixture.
///
/// With `C = ((1 - p)/p) ((1 - gamma)/gamma)`:
///
/// * `theta = 1`: `kappa = 0` when `gamma >= 1 - p`, else `1`;
/// * `theta < 1`: interior value `(C^{1/(theta-1)} - 1)^{-theta}` when
///   `C < 2^{theta - 1}`, else `1`.
pub fn kappa_invlog_logistic(theta: f64, gamma: f64, p: f64) -> f64 {
    let c = ((1.0 - p) / p) * ((1.0 - gamma) / gamma);
    if theta == 1.0 {
        return if gamma >= 1.0 - p { 0.0 } else { 1.0 };
    }
    if c < 2f64.powf(theta - 1.0) {
        // Exact inversion of z^{1/theta - 1} (1 + z^{1/theta})^{theta - 1} = C.
        (c.powf(1.0 / (theta - 1.0)) - 1.0).powf(-theta)
    } else {
        1.0
    }
}

/// `kappa` for the rectangular-logistic mixture.
///
/// * `theta = 1`: `kappa = 0` when `gamma >= 1 - p`, else `1`;
/// * `theta < 1`: `kappa = 1 - theta` when
///   `p/(2 - theta) + (1 - p)(1 - 1/gamma) > 0`, else `1`.
pub fn kappa_rect_logistic(theta: f64, gamma: f64, p: f64) -> f64 {
    if theta == 1.0 {
        return if gamma >= 1.0 - p { 0.0 } else { 1.0 };
    }
    if p / (2.0 - theta) + (1.0 - p) * (1.0 - 1.0 / gamma) > 0.0 {
        1.0 - theta
    } else {
        1.0
    }
}

/// An additive mixture rescaled so its limit set has supremum `(1, 1)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "MixtureSpec", into = "MixtureSpec")]
pub struct RescaledMixture {
    spec: MixtureSpec,
    kappa: f64,
    denom: f64,
}

impl TryFrom<MixtureSpec> for RescaledMixture {
    type Error = Error;

    fn try_from(spec: MixtureSpec) -> Result<Self> {
        RescaledMixture::new(spec)
    }
}

impl From<RescaledMixture> for MixtureSpec {
    fn from(mix: RescaledMixture) -> MixtureSpec {
        mix.spec
    }
}

impl RescaledMixture {
    pub fn new(spec: MixtureSpec) -> Result<Self> {
        spec.validate()?;
        let kappa = spec.kappa();
        let denom = spec.eval_raw(kappa, 1.0);
        if !(denom > 0.0) {
            return Err(Error::numeric("mixture rescaling denominator must be positive"));
        }
        Ok(RescaledMixture { spec, kappa, denom })
    }

    /// Conditional-extremes slope `kappa` (the rescaling angle).
    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn spec(&self) -> &MixtureSpec {
        &self.spec
    }

    /// Rescaled gauge value.
    #[inline]
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.spec.eval_raw(x, y) / self.denom
    }

    pub(crate) fn k_deriv(&self, q: f64, side: Side) -> f64 {
        let comp = self.spec.component.k_deriv(q, side);
        let logi = gauge::logistic_k_deriv(q, side, self.spec.gamma);
        (self.spec.p * comp + (1.0 - self.spec.p) * logi) / self.denom
    }
}
