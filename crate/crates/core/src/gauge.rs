//! Gauge functions and limit-set boundary profiles.
//!
//! A gauge `g` is one-homogeneous (`g(cx, cy) = c g(x, y)`), non-negative, and
//! on standard exponential margins satisfies `g(x, y) >= max(x, y)` with the
//! limit set `{g <= 1}` having coordinatewise supremum `(1, 1)`. The boundary
//! functions
//!
//! ```text
//! k(q) = g(1, q)        ktilde(q) = g(q, 1)
//! ```
//!
//! describe the limit set along rays and carry all the information the
//! dependence classifier needs: where they touch the unit level, and how
//! steeply they leave it.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::mixture::RescaledMixture;
use crate::stochastic::StochasticGauge;
use crate::Result;

/// Which one-sided derivative to take at a kink.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// A parametric gauge function, normalised so the limit set has coordinatewise
/// supremum `(1, 1)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum Gauge {
    /// `(x + y)/gamma + (1 - 2/gamma) min(x, y)`, `gamma` in (0, 1).
    /// Asymptotically dependent for every admissible `gamma`.
    Logistic { gamma: f64 },
    /// `(x + y - 2 rho sqrt(xy)) / (1 - rho^2)`, `rho` in [0, 1).
    Gaussian { rho: f64 },
    /// `(x^{1/theta} + y^{1/theta})^theta`, `theta` in (0, 1].
    InvertedLogistic { theta: f64 },
    /// `max(|x - y|/theta, (x + y)/(2 - theta))`, `theta` in (0, 1].
    Rectangular { theta: f64 },
    /// Single-parameter max/min blend, `theta > 0`.
    ///
    /// For `theta < 1` this coincides with the logistic gauge at
    /// `gamma = theta`. For `theta >= 1` the raw formula
    /// `max + (1/theta - 1) min` has coordinatewise supremum `theta`, so
    /// evaluation rescales by the numerically determined supremum constant
    /// (which works out to exactly `theta`; see `max_min`).
    MaxMin { theta: f64 },
    /// Additive two-gauge blend rescaled back onto `(1, 1)`.
    AdditiveMix(RescaledMixture),
    /// Gauge of a variable plus a scaled common factor (inf-convolution form).
    StochasticMix(StochasticGauge),
}

/// Raw logistic gauge.
#[inline]
pub fn eval_logistic(x: f64, y: f64, gamma: f64) -> f64 {
    (x + y) / gamma + (1.0 - 2.0 / gamma) * x.min(y)
}

/// Raw Gaussian gauge.
#[inline]
pub fn eval_gaussian(x: f64, y: f64, rho: f64) -> f64 {
    (x + y - 2.0 * rho * (x * y).sqrt()) / (1.0 - rho * rho)
}

/// Raw inverted-logistic gauge, evaluated in log space so small `theta` cannot
/// overflow the inner powers.
#[inline]
pub fn eval_inverted_logistic(x: f64, y: f64, theta: f64) -> f64 {
    let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
    if lo == 0.0 {
        return hi;
    }
    // hi * (1 + (lo/hi)^{1/theta})^theta with the power folded through ln_1p.
    let t = (lo / hi).ln() / theta;
    hi * (theta * t.exp().ln_1p()).exp()
}

/// Raw rectangular gauge.
#[inline]
pub fn eval_rectangular(x: f64, y: f64, theta: f64) -> f64 {
    ((x - y).abs() / theta).max((x + y) / (2.0 - theta))
}

/// Raw max/min blend, *before* supremum rescaling of the `theta >= 1` branch.
#[inline]
pub fn eval_maxmin(x: f64, y: f64, theta: f64) -> f64 {
    let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
    if theta < 1.0 {
        hi / theta + (1.0 - 1.0 / theta) * lo
    } else {
        hi + (1.0 / theta - 1.0) * lo
    }
}

impl Gauge {
    /// Logistic gauge, `gamma` in (0, 1).
    pub fn logistic(gamma: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&gamma) || gamma == 0.0 {
            return Err(Error::domain(format!("logistic gamma={gamma} outside (0, 1)")));
        }
        Ok(Gauge::Logistic { gamma })
    }

    /// Gaussian gauge, `rho` in [0, 1).
    pub fn gaussian(rho: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&rho) {
            return Err(Error::domain(format!("gaussian rho={rho} outside [0, 1)")));
        }
        Ok(Gauge::Gaussian { rho })
    }

    /// Inverted-logistic gauge, `theta` in (0, 1].
    pub fn inverted_logistic(theta: f64) -> Result<Self> {
        if !(theta > 0.0 && theta <= 1.0) {
            return Err(Error::domain(format!("inverted-logistic theta={theta} outside (0, 1]")));
        }
        Ok(Gauge::InvertedLogistic { theta })
    }

    /// Rectangular gauge, `theta` in (0, 1].
    pub fn rectangular(theta: f64) -> Result<Self> {
        if !(theta > 0.0 && theta <= 1.0) {
            return Err(Error::domain(format!("rectangular theta={theta} outside (0, 1]")));
        }
        Ok(Gauge::Rectangular { theta })
    }

    /// Max/min gauge, `theta > 0`.
    ///
    /// The `theta >= 1` branch is rescaled so the limit set tops out at
    /// `(1, 1)`. The constant is found by the same numeric supremum search the
    /// additive mixtures use; it equals `theta`, which the unit tests pin
    /// against the search.
    pub fn max_min(theta: f64) -> Result<Self> {
        if !(theta > 0.0) || !theta.is_finite() {
            return Err(Error::domain(format!("max-min theta={theta} must be positive")));
        }
        Ok(Gauge::MaxMin { theta })
    }

    /// Normalised gauge value at `(x, y)`, `x, y >= 0`.
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        debug_assert!(x >= 0.0 && y >= 0.0, "gauge arguments must be non-negative");
        match self {
            Gauge::Logistic { gamma } => eval_logistic(x, y, *gamma),
            Gauge::Gaussian { rho } => eval_gaussian(x, y, *rho),
            Gauge::InvertedLogistic { theta } => eval_inverted_logistic(x, y, *theta),
            Gauge::Rectangular { theta } => eval_rectangular(x, y, *theta),
            Gauge::MaxMin { theta } => {
                let scale = if *theta >= 1.0 { *theta } else { 1.0 };
                scale * eval_maxmin(x, y, *theta)
            }
            Gauge::AdditiveMix(mix) => mix.eval(x, y),
            Gauge::StochasticMix(sg) => sg.eval(x, y),
        }
    }

    /// Gauge value as the radial model's rate function.
    ///
    /// Identical to [`eval`](Self::eval) for every family except max/min
    /// with `theta >= 1`, where the likelihood works with the raw branch
    /// value `max + (1/theta - 1) min`: the supremum rescaling is a
    /// reporting convention for the limit-set geometry, and applying it to
    /// the rate would collapse the `theta >= 1` branch onto the logistic
    /// shape at `1/theta`, leaving the two branches indistinguishable to
    /// the data.
    #[inline]
    pub fn rate(&self, x: f64, y: f64) -> f64 {
        match self {
            Gauge::MaxMin { theta } => eval_maxmin(x, y, *theta),
            _ => self.eval(x, y),
        }
    }

    /// Boundary function `k(q) = g(1, q)`.
    #[inline]
    pub fn k(&self, q: f64) -> f64 {
        self.eval(1.0, q)
    }

    /// Boundary function `ktilde(q) = g(q, 1)`.
    #[inline]
    pub fn k_tilde(&self, q: f64) -> f64 {
        self.eval(q, 1.0)
    }

    /// One-sided derivative of `k` at `q`.
    ///
    /// Closed forms are used for every family except the stochastic mixture,
    /// whose piecewise structure is differentiated numerically. All families
    /// here are symmetric in their arguments, so `k` and `ktilde` share
    /// derivatives.
    pub fn k_deriv(&self, q: f64, side: Side) -> f64 {
        match self {
            Gauge::Logistic { gamma } => logistic_k_deriv(q, side, *gamma),
            Gauge::Gaussian { rho } => gaussian_k_deriv(q, *rho),
            Gauge::InvertedLogistic { theta } => inverted_logistic_k_deriv(q, *theta),
            Gauge::Rectangular { theta } => rectangular_k_deriv(q, side, *theta),
            Gauge::MaxMin { theta } => {
                if *theta < 1.0 {
                    logistic_k_deriv(q, side, *theta)
                } else {
                    // theta * (raw k) with raw slopes (1/theta - 1) and 1.
                    match decide_side(q, side) {
                        BranchSide::Below => 1.0 - *theta,
                        BranchSide::Above => *theta,
                    }
                }
            }
            Gauge::AdditiveMix(mix) => mix.k_deriv(q, side),
            Gauge::StochasticMix(_) => finite_difference_k_deriv(&|t| self.k(t), q, side),
        }
    }

    /// One-sided derivative of `ktilde` at `q`.
    ///
    /// Every family in the enum is exchangeable in `(x, y)`, so this equals
    /// [`Gauge::k_deriv`]; the alias keeps call sites that work with the
    /// second boundary function readable.
    #[inline]
    pub fn k_tilde_deriv(&self, q: f64, side: Side) -> f64 {
        self.k_deriv(q, side)
    }

    /// Short lowercase tag used in reports and file names.
    pub fn family_tag(&self) -> &'static str {
        match self {
            Gauge::Logistic { .. } => "logistic",
            Gauge::Gaussian { .. } => "gaussian",
            Gauge::InvertedLogistic { .. } => "invlogistic",
            Gauge::Rectangular { .. } => "rectangular",
            Gauge::MaxMin { .. } => "maxmin",
            Gauge::AdditiveMix(_) => "additivemix",
            Gauge::StochasticMix(_) => "stochasticmix",
        }
    }
}

enum BranchSide {
    Below,
    Above,
}

/// Resolves which side of the diagonal kink `q = 1` a derivative request sits on.
fn decide_side(q: f64, side: Side) -> BranchSide {
    if q < 1.0 || (q == 1.0 && side == Side::Left) {
        BranchSide::Below
    } else {
        BranchSide::Above
    }
}

pub(crate) fn logistic_k_deriv(q: f64, side: Side, gamma: f64) -> f64 {
    match decide_side(q, side) {
        BranchSide::Below => 1.0 - 1.0 / gamma,
        BranchSide::Above => 1.0 / gamma,
    }
}

pub(crate) fn gaussian_k_deriv(q: f64, rho: f64) -> f64 {
    // Smooth across the diagonal; blows down to -inf at q = 0 when rho > 0.
    (1.0 - rho / q.sqrt()) / (1.0 - rho * rho)
}

pub(crate) fn inverted_logistic_k_deriv(q: f64, theta: f64) -> f64 {
    if q == 0.0 {
        // q^{1/theta - 1} -> 0 for theta < 1, -> 1 at theta = 1.
        return if theta < 1.0 { 0.0 } else { 1.0 };
    }
    let a = 1.0 / theta;
    ((a - 1.0) * q.ln() + (theta - 1.0) * (q.powf(a)).ln_1p()).exp()
}

pub(crate) fn rectangular_k_deriv(q: f64, side: Side, theta: f64) -> f64 {
    // k(q) = max(|1 - q|/theta, (1 + q)/(2 - theta)) with kinks at
    // q = 1 - theta and q = 1/(1 - theta) (the latter only for theta < 1).
    let at_or_left = |boundary: f64| q < boundary || (q == boundary && side == Side::Left);
    if at_or_left(1.0 - theta) {
        -1.0 / theta
    } else if theta < 1.0 && !at_or_left(1.0 / (1.0 - theta)) {
        1.0 / theta
    } else {
        1.0 / (2.0 - theta)
    }
}

/// Three-point one-sided finite difference with step `1e-5`.
pub(crate) fn finite_difference_k_deriv(k: &dyn Fn(f64) -> f64, q: f64, side: Side) -> f64 {
    let h = 1e-5;
    match side {
        Side::Right => (-3.0 * k(q) + 4.0 * k(q + h) - k(q + 2.0 * h)) / (2.0 * h),
        Side::Left => (3.0 * k(q) - 4.0 * k(q - h) + k(q - 2.0 * h)) / (2.0 * h),
    }
}

/// Boundary functions sampled on a uniform grid over `[0, q_max]`.
#[derive(Debug, Clone)]
pub struct BoundaryProfile {
    pub q: Vec<f64>,
    pub k: Vec<f64>,
    pub k_tilde: Vec<f64>,
}

impl BoundaryProfile {
    /// Grid spacing.
    pub fn step(&self) -> f64 {
        self.q[1] - self.q[0]
    }
}

/// Samples `k` and `ktilde` on `n` points spanning `[0, q_max]`.
///
/// `q_max` must reach past 1 so the diagonal's outward derivative is visible;
/// 5 is a comfortable default for every family in the crate.
pub fn boundary_profile(gauge: &Gauge, q_max: f64, n: usize) -> Result<BoundaryProfile> {
    if !(q_max > 1.0) {
        return Err(Error::domain("boundary profile needs q_max > 1"));
    }
    if n < 16 {
        return Err(Error::domain("boundary profile needs at least 16 grid points"));
    }
    let step = q_max / (n - 1) as f64;
    let q: Vec<f64> = (0..n).map(|i| i as f64 * step).collect();
    let k = q.iter().map(|&qi| gauge.k(qi)).collect();
    let k_tilde = q.iter().map(|&qi| gauge.k_tilde(qi)).collect();
    Ok(BoundaryProfile { q, k, k_tilde })
}

/// Points `(w, x, y)` on the unit level set `g = 1`, for `w` on a uniform grid
/// of the angular interval `[0, 1]`: `(x, y) = (w, 1 - w) / g(w, 1 - w)`.
pub fn level_set_points(gauge: &Gauge, n: usize) -> Vec<(f64, f64, f64)> {
    let m = n.max(2);
    (0..m)
        .map(|i| {
            let w = i as f64 / (m - 1) as f64;
            let g = gauge.eval(w, 1.0 - w);
            (w, w / g, (1.0 - w) / g)
        })
        .collect()
}

/// Writes level-set points as CSV with header `w,x,y`.
pub fn write_level_set_csv<W: std::io::Write>(out: &mut W, points: &[(f64, f64, f64)]) -> Result<()> {
    writeln!(out, "w,x,y")?;
    for (w, x, y) in points {
        writeln!(out, "{w:.10},{x:.10},{y:.10}")?;
    }
    Ok(())
}
