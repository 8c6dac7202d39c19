//! Common-factor ("stochastic") gauge mixtures.
//!
//! The model adds a shared exponential shock to both coordinates:
//! `(X, Y) = gamma (S, S) + (V1, V2)` with `S` standard exponential,
//! independent of `V`, and `V` governed by a base gauge `g_V`. The joint
//! gauge is the inf-convolution
//!
//! ```text
//! inner(x, y) = min over s in [0, min(x, y)/gamma] of  s + g_V(x - gamma s, y - gamma s)
//! ```
//!
//! For `gamma <= 1` the margins keep unit rate and the gauge is `inner`
//! itself; for `gamma > 1` the shock dominates the margins, whose rate drops
//! to `1/gamma`, and the standardised gauge becomes `gamma * inner(x, y)`.
//!
//! Geometry: the unit level of `inner` is the base level set with a straight
//! "dome" welded on around the diagonal. The weld runs from the tangency
//! point `(x0, y0)` on `{g_V = 1}` (and its mirror) to the diagonal point
//! `(gamma, gamma)`. The tangency ray is where the directional cost of
//! raising the shock exactly balances the base gauge's decrease, i.e. where
//! `d1 g_V + d2 g_V = 1/gamma`. When `gamma` is too small for that balance
//! (at or below the base's diagonal index `eta_V`), the shock never helps and
//! the gauge is plain `g_V`.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::gauge;
use crate::mixture::MixtureComponent;
use crate::Result;

/// Parameters of a common-factor mixture.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct StochasticMixSpec {
    /// Gauge of the independent innovations `(V1, V2)`.
    pub base: MixtureComponent,
    /// Weight of the shared exponential shock, `gamma > 0`.
    pub gamma: f64,
}

impl StochasticMixSpec {
    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        if !(self.gamma > 0.0) || !self.gamma.is_finite() {
            return Err(Error::domain(format!(
                "stochastic mixture gamma={} must be positive and finite",
                self.gamma
            )));
        }
        Ok(())
    }
}

/// Tangency point of the straight dome on the base unit level, with
/// `x0 <= y0`. A degenerate point `(0, 1)` means the dome reaches the axis:
/// the shock is strong enough that the constrained minimiser caps out at
/// `s = min(x, y)/gamma` everywhere off the base region.
#[derive(Debug, Clone, Copy)]
pub struct TangentPoint {
    pub x0: f64,
    pub y0: f64,
}

/// Coordinatewise diagonal index of a base gauge: `1 / g_V(1, 1)`.
fn base_eta(base: &MixtureComponent) -> f64 {
    match *base {
        MixtureComponent::Gaussian { rho } => (1.0 + rho) / 2.0,
        MixtureComponent::InvertedLogistic { theta } => 2f64.powf(-theta),
        MixtureComponent::Rectangular { theta } => 1.0 - theta / 2.0,
    }
}

fn tangent_point(spec: &StochasticMixSpec) -> Option<TangentPoint> {
    let gamma = spec.gamma;
    if gamma <= base_eta(&spec.base) {
        return None;
    }
    match spec.base {
        MixtureComponent::Gaussian { rho } => {
            if rho == 0.0 {
                // Additive base: the balance d1 + d2 = 2 never varies, so the
                // minimiser caps out and the dome reaches the axis.
                return Some(TangentPoint { x0: 0.0, y0: 1.0 });
            }
            // On the ray (z, 1): d1 + d2 = (2 - rho (w + 1/w)) / (1 - rho^2)
            // with w = sqrt(z). Setting it to 1/gamma gives
            // rho w^2 - b w + rho = 0, b = 2 - (1 - rho^2)/gamma.
            let b = 2.0 - (1.0 - rho * rho) / gamma;
            let disc = b * b - 4.0 * rho * rho;
            if disc <= 0.0 {
                return None;
            }
            let w = (b - disc.sqrt()) / (2.0 * rho);
            let z = w * w;
            let scale = gauge::eval_gaussian(z, 1.0, rho);
            Some(TangentPoint { x0: z / scale, y0: 1.0 / scale })
        }
        MixtureComponent::InvertedLogistic { theta } => {
            if theta == 1.0 || gamma >= 1.0 {
                // Balance d1 + d2 stays below 1/gamma short of the axis, so
                // the cap binds everywhere inside the cone.
                return Some(TangentPoint { x0: 0.0, y0: 1.0 });
            }
            // Parametrise the unit level as (u^theta, (1-u)^theta); the
            // directional balance there is u^{1-theta} + (1-u)^{1-theta}.
            let target = 1.0 / gamma;
            let psi = |u: f64| u.powf(1.0 - theta) + (1.0 - u).powf(1.0 - theta);
            let (mut lo, mut hi) = (0.0, 0.5);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if psi(mid) < target {
                    lo = mid;
                } else {
                    hi = mid;
                }
                if hi - lo < 1e-15 {
                    break;
                }
            }
            let u = 0.5 * (lo + hi);
            Some(TangentPoint { x0: u.powf(theta), y0: (1.0 - u).powf(theta) })
        }
        MixtureComponent::Rectangular { theta } => {
            // The level set's corner carries the whole subdifferential, so the
            // tangency pins there for every admissible gamma.
            Some(TangentPoint { x0: 1.0 - theta, y0: 1.0 })
        }
    }
}

/// A common-factor mixture gauge, normalised so the limit set has
/// coordinatewise supremum `(1, 1)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "StochasticMixSpec", into = "StochasticMixSpec")]
pub struct StochasticGauge {
    spec: StochasticMixSpec,
    tangent: Option<TangentPoint>,
}

impl TryFrom<StochasticMixSpec> for StochasticGauge {
    type Error = Error;

    fn try_from(spec: StochasticMixSpec) -> Result<Self> {
        StochasticGauge::new(spec)
    }
}

impl From<StochasticGauge> for StochasticMixSpec {
    fn from(g: StochasticGauge) -> StochasticMixSpec {
        g.spec
    }
}

impl StochasticGauge {
    pub fn new(spec: StochasticMixSpec) -> Result<Self> {
        spec.validate()?;
        let tangent = tangent_point(&spec);
        Ok(StochasticGauge { spec, tangent })
    }

    pub fn spec(&self) -> &StochasticMixSpec {
        &self.spec
    }

    pub fn gamma(&self) -> f64 {
        self.spec.gamma
    }

    /// Tangency point of the straight dome, if the shock is strong enough to
    /// create one.
    pub fn tangent(&self) -> Option<&TangentPoint> {
        self.tangent.as_ref()
    }

    /// Residual-tail dependence index of this gauge: the base's own index
    /// while the shock is too weak to matter, `gamma` through the
    /// intermediate range, and 1 (asymptotic dependence) once the shock
    /// dominates the margins.
    pub fn eta(&self) -> f64 {
        let ev = base_eta(&self.spec.base);
        if self.spec.gamma <= ev {
            ev
        } else if self.spec.gamma <= 1.0 {
            self.spec.gamma
        } else {
            1.0
        }
    }

    /// Value of the inf-convolution at `(x, y)` before margin standardisation.
    fn inner(&self, x: f64, y: f64) -> f64 {
        let (x, y) = if x <= y { (x, y) } else { (y, x) };
        let t = match &self.tangent {
            None => return self.spec.base.eval(x, y),
            Some(t) => t,
        };
        // Rays shallower than the tangency ray never benefit from the shock.
        if x * (t.x0 + t.y0) <= t.x0 * (x + y) {
            return self.spec.base.eval(x, y);
        }
        if t.y0 - t.x0 < 1e-9 {
            // Degenerate dome (gamma barely above the base index): the
            // straight edge has vanishing width, so the base value is exact
            // to the same order.
            return self.spec.base.eval(x, y);
        }
        // Level of the line through (x0, y0) and (gamma, gamma), written in a
        // two-point form that stays stable when gamma approaches y0.
        let gamma = self.spec.gamma;
        (y * (gamma - t.x0) - x * (gamma - t.y0)) / (gamma * (t.y0 - t.x0))
    }

    /// Normalised gauge value.
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        if self.spec.gamma <= 1.0 {
            self.inner(x, y)
        } else {
            self.spec.gamma * self.inner(x, y)
        }
    }

    /// Minimising shock split `s` of the inf-convolution at `(x, y)`, in
    /// `[0, min(x, y)/gamma]`. This is the saddle the joint density
    /// concentrates on, not a property of the standardised gauge, so no
    /// `gamma > 1` rescaling applies.
    pub fn minimizer_s_hat(&self, x: f64, y: f64) -> f64 {
        let (x, y, t) = if x <= y { (x, y, self.tangent) } else { (y, x, self.tangent) };
        let t = match t {
            None => return 0.0,
            Some(t) => t,
        };
        if x * (t.x0 + t.y0) <= t.x0 * (x + y) || t.y0 - t.x0 < 1e-9 {
            return 0.0;
        }
        let gamma = self.spec.gamma;
        let s = (t.y0 * x - t.x0 * y) / (gamma * (t.y0 - t.x0));
        s.clamp(0.0, x / gamma)
    }
}
