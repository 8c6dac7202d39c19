//! Bivariate extremal dependence through the geometry of scaled sample clouds.
//!
//! On standard exponential margins, a sample cloud scaled by `log n` fills out a
//! limit set `G = {(x, y) : g(x, y) <= 1}` described by a one-homogeneous gauge
//! function `g`. The shape of `G` near the diagonal separates asymptotic
//! dependence from asymptotic independence, and a truncated-gamma model for the
//! radial component turns that geometry into a likelihood.
//!
//! The crate provides:
//!
//! * parametric gauge families and their boundary functions ([`gauge`]),
//! * additive and variable-mixture constructions ([`mixture`], [`stochastic`]),
//! * geometric dependence classification with chi bounds ([`classify`]),
//! * angular-radial decomposition and moving-window thresholds ([`threshold`]),
//! * truncated-gamma likelihood fitting ([`inference`]),
//! * simulation-based tail probability and chi estimation ([`tailsim`]),
//! * reference samplers for known copulas ([`synth`]),
//! * a repetition harness for classification studies ([`study`]).

pub mod classify;
pub mod error;
pub mod gauge;
pub mod inference;
pub mod mixture;
pub mod rng;
pub mod special;
pub mod stochastic;
pub mod study;
pub mod synth;
pub mod tailsim;
pub mod threshold;

pub use classify::{classify, classify_profile, chi_bounds, DependenceClass, IntersectionSet, Tolerances};
pub use error::Error;
pub use gauge::{BoundaryProfile, Gauge};
pub use inference::{fit, negloglik, Exceedances, Family, FitResult};
pub use mixture::{numeric_supremum, MixtureComponent, MixtureSpec, RescaledMixture};
pub use rng::RngStream;
pub use stochastic::{StochasticGauge, StochasticMixSpec, TangentPoint};
pub use tailsim::{FittedModel, RegionEstimate, RegionSpec};
pub use threshold::{AngularRadialSample, ThresholdFunction};

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
