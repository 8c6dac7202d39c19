//! Geometric classification of extremal dependence.
//!
//! A normalised gauge is asymptotically dependent exactly when its limit set
//! is *pointy* at the diagonal: the boundary function `k` touches the unit
//! level at `q = 1` with strictly sloped one-sided derivatives and only
//! isolated touch points elsewhere. Asymptotic independence arises through
//! one of four mechanisms:
//!
//! * **blunt** — `k(1) > 1`, the corner `(1, 1)` lies outside the limit set;
//! * **flat-segment** — `k` sits at the unit level over an interval;
//! * **tangent** — `k` touches the unit level with a vanishing one-sided
//!   derivative;
//! * **diverging-b** — the angular density blows up at an endpoint touch
//!   point; only diagnosed from user-supplied angular data, never silently.
//!
//! For pointy sets the tail dependence coefficient is bracketed by ratios of
//! reciprocal one-sided derivatives at the touch points ([`chi_bounds`]).

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::gauge::{boundary_profile, BoundaryProfile, Gauge, Side};
use crate::Result;

/// Numeric tolerances and grid resolution for classification.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Tolerances {
    /// A grid value within `level` of 1 counts as touching the unit level.
    pub level: f64,
    /// A one-sided derivative smaller than this at a touch point fires the
    /// tangent mechanism.
    pub deriv: f64,
    /// Number of profile grid points on `[0, q_max]`.
    pub grid_points: usize,
    /// Profile range; must exceed 1 so the outward diagonal slope is visible.
    pub q_max: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { level: 1e-4, deriv: 1e-2, grid_points: 4001, q_max: 5.0 }
    }
}

impl Tolerances {
    /// Minimum width of a unit-level run that cannot be explained by a sharp
    /// touch: a V-shaped touch with both arms at the derivative tolerance
    /// stays within the level tolerance over at most `2 level / deriv`.
    /// Floored at three grid cells so coarse grids cannot misread a touch.
    fn flat_width(&self, step: f64) -> f64 {
        (2.0 * self.level / self.deriv).max(3.0 * step)
    }
}

/// Dependence class label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Label {
    AD,
    AI,
}

/// How the classification was decided.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mechanism {
    #[serde(rename = "pointy")]
    Pointy,
    #[serde(rename = "flat-segment")]
    FlatSegment,
    #[serde(rename = "tangent")]
    Tangent,
    #[serde(rename = "diverging-b")]
    DivergingB,
    #[serde(rename = "blunt")]
    Blunt,
}

/// Which boundary function a record refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundarySide {
    #[serde(rename = "k")]
    K,
    #[serde(rename = "ktilde")]
    KTilde,
}

/// Role of a touch point in the excursion structure of the boundary
/// function: excursions of `k` above the unit level end at A-endpoints and
/// start at B-endpoints; points inside a flat run are interior.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Membership {
    #[serde(rename = "A-endpoint")]
    AEndpoint,
    #[serde(rename = "B-endpoint")]
    BEndpoint,
    #[serde(rename = "interior-of-flat-D")]
    FlatInterior,
}

/// One touch point of a boundary function with the unit level. A point that
/// both ends and starts an excursion appears twice, once per role.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct IntersectionPoint {
    pub boundary: BoundarySide,
    pub q: f64,
    /// Boundary-function value at `q` (within the level tolerance of 1).
    pub level: f64,
    pub deriv_left: Option<f64>,
    pub deriv_right: Option<f64>,
    pub membership: Membership,
}

/// A maximal run of consecutive grid points at the unit level.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FlatRun {
    pub boundary: BoundarySide,
    pub q_start: f64,
    pub q_end: f64,
    /// Whether the run is too wide to be a sharp touch (see
    /// [`Tolerances::flat_width`]).
    pub is_flat: bool,
}

/// Unit-level touch structure of both boundary functions.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct IntersectionSet {
    pub points: Vec<IntersectionPoint>,
    /// Runs spanning more than one grid cell, flat or not.
    pub runs: Vec<FlatRun>,
}

impl IntersectionSet {
    pub fn side_points(&self, side: BoundarySide) -> impl Iterator<Item = &IntersectionPoint> {
        self.points.iter().filter(move |p| p.boundary == side)
    }

    fn has_flat_run(&self) -> bool {
        self.runs.iter().any(|r| r.is_flat)
    }
}

/// Classification outcome. `chi_lower`/`chi_upper` are populated for AD only.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DependenceClass {
    pub label: Label,
    pub mechanism: Mechanism,
    pub intersections: IntersectionSet,
    pub chi_lower: Option<f64>,
    pub chi_upper: Option<f64>,
}

impl DependenceClass {
    pub fn is_ad(&self) -> bool {
        self.label == Label::AD
    }
}

fn grid_forward_diff(vals: &[f64], i: usize, h: f64) -> Option<f64> {
    if i + 2 < vals.len() {
        Some((-3.0 * vals[i] + 4.0 * vals[i + 1] - vals[i + 2]) / (2.0 * h))
    } else if i + 1 < vals.len() {
        Some((vals[i + 1] - vals[i]) / h)
    } else {
        None
    }
}

fn grid_backward_diff(vals: &[f64], i: usize, h: f64) -> Option<f64> {
    if i >= 2 {
        Some((3.0 * vals[i] - 4.0 * vals[i - 1] + vals[i - 2]) / (2.0 * h))
    } else if i >= 1 {
        Some((vals[i] - vals[i - 1]) / h)
    } else {
        None
    }
}

/// Snaps grid artefacts onto the exact endpoints so downstream branch
/// decisions (left/right of the diagonal) cannot flip on representation
/// error.
fn snap(q: f64, h: f64) -> f64 {
    if (q - 1.0).abs() < 0.5 * h {
        1.0
    } else if q < 0.5 * h {
        0.0
    } else {
        q
    }
}

/// Locates unit-level touch points of both boundary functions on `[0, 1]`.
///
/// Consecutive grid points within the level tolerance are merged into runs;
/// a run wider than the sharp-touch budget is reported flat, anything
/// narrower collapses to its minimising point with one-sided grid-difference
/// derivative estimates.
pub fn find_intersections(profile: &BoundaryProfile, tol_level: f64, tol_deriv: f64) -> IntersectionSet {
    let tol = Tolerances { level: tol_level, deriv: tol_deriv, ..Tolerances::default() };
    let h = profile.step();
    let mut set = IntersectionSet::default();
    for (side, vals) in [(BoundarySide::K, &profile.k), (BoundarySide::KTilde, &profile.k_tilde)] {
        scan_side(&mut set, side, &profile.q, vals, h, &tol);
    }
    set
}

fn scan_side(
    set: &mut IntersectionSet,
    side: BoundarySide,
    q: &[f64],
    vals: &[f64],
    h: f64,
    tol: &Tolerances,
) {
    // Touch points of the limit-set boundary live in the angular range
    // [0, 1]; the grid beyond only serves derivative estimation.
    let i_one = q.iter().position(|&qi| qi >= 1.0 - 0.5 * h).unwrap_or(q.len() - 1);
    let hit = |i: usize| vals[i] <= 1.0 + tol.level;

    let mut i = 0;
    while i <= i_one {
        if !hit(i) {
            i += 1;
            continue;
        }
        let start = i;
        while i < i_one && hit(i + 1) {
            i += 1;
        }
        let end = i;
        emit_run(set, side, q, vals, h, tol, start, end);
        i += 1;
    }
}

#[allow(clippy::too_many_arguments)]
fn emit_run(
    set: &mut IntersectionSet,
    side: BoundarySide,
    q: &[f64],
    vals: &[f64],
    h: f64,
    tol: &Tolerances,
    start: usize,
    end: usize,
) {
    let width = q[end] - q[start];
    if end > start + 1 {
        set.runs.push(FlatRun {
            boundary: side,
            q_start: snap(q[start], h),
            q_end: snap(q[end], h),
            is_flat: width >= tol.flat_width(h),
        });
    }
    if width >= tol.flat_width(h) {
        // Genuine flat segment: report its endpoints and a witness interior
        // point rather than every grid node.
        let into = start > 0 && vals[start - 1] > 1.0 + tol.level;
        let out = vals[end + 1..].first().map(|&v| v > 1.0 + tol.level).unwrap_or(false) && q[end] < 1.0 - 0.5 * h;
        push_point(set, side, q, vals, h, start, if into { Membership::AEndpoint } else { Membership::FlatInterior });
        let mid = (start + end) / 2;
        if mid != start && mid != end {
            push_point(set, side, q, vals, h, mid, Membership::FlatInterior);
        }
        push_point(set, side, q, vals, h, end, if out { Membership::BEndpoint } else { Membership::FlatInterior });
        return;
    }
    // Sharp touch: collapse the run to its minimising node.
    let i_min = (start..=end).min_by(|&a, &b| vals[a].total_cmp(&vals[b])).unwrap();
    let q_min = snap(q[i_min], h);
    let into = start > 0 && vals[start - 1] > 1.0 + tol.level;
    let out = q_min < 1.0 && vals.get(end + 1).map(|&v| v > 1.0 + tol.level).unwrap_or(false);
    if into || q_min == 1.0 {
        push_point(set, side, q, vals, h, i_min, Membership::AEndpoint);
    }
    if out {
        push_point(set, side, q, vals, h, i_min, Membership::BEndpoint);
    }
    if !(into || q_min == 1.0 || out) {
        // Degenerate: a touch at q = 0 whose right neighbourhood also sits
        // at the level (short run at the axis). Report it as a B-endpoint;
        // its derivative decides tangency downstream.
        push_point(set, side, q, vals, h, i_min, Membership::BEndpoint);
    }
}

fn push_point(
    set: &mut IntersectionSet,
    side: BoundarySide,
    q: &[f64],
    vals: &[f64],
    h: f64,
    i: usize,
    membership: Membership,
) {
    let qi = snap(q[i], h);
    set.points.push(IntersectionPoint {
        boundary: side,
        q: qi,
        level: vals[i],
        deriv_left: if qi == 0.0 { None } else { grid_backward_diff(vals, i, h) },
        deriv_right: grid_forward_diff(vals, i, h),
        membership,
    });
}

/// Evaluates the pointy-set bounds on the tail dependence coefficient from
/// touch-point derivatives.
///
/// `b_values` optionally weights each entry of `intersections.points` (in
/// order) with a positive angular-mass value; by default all weights are
/// equal, under which the bounds collapse to a single number whenever the
/// two boundary functions agree at their touch points.
///
/// Per boundary function the excursion sum is
/// `-sum_A b(q)/k'(q-) + sum_B b(q)/k'(q+) + b(1)/k'(1+)`, and
///
/// ```text
/// chi_lower = [b(1)/k'(1+) + btilde(1)/ktilde'(1+)] / max(sum, sum_tilde)
/// chi_upper = [b(1)/k'(1+) + btilde(1)/ktilde'(1+)] / min(sum, sum_tilde)
/// ```
pub fn chi_bounds(intersections: &IntersectionSet, b_values: Option<&[f64]>) -> Result<(f64, f64)> {
    if let Some(b) = b_values {
        if b.len() != intersections.points.len() {
            return Err(Error::domain(format!(
                "need one b value per intersection entry ({} entries, {} values)",
                intersections.points.len(),
                b.len()
            )));
        }
        if b.iter().any(|&v| !(v > 0.0)) {
            return Err(Error::domain("b values must be positive"));
        }
    }
    if intersections.has_flat_run() {
        return Err(Error::domain("flat unit-level segment present; the set is not pointy"));
    }
    let weight = |idx: usize| b_values.map(|b| b[idx]).unwrap_or(1.0);

    let mut numerator = 0.0;
    let mut sums = [0.0f64; 2];
    for (s, sum) in [(BoundarySide::K, 0usize), (BoundarySide::KTilde, 1usize)] {
        let mut saw_diagonal = false;
        for (idx, p) in intersections.points.iter().enumerate() {
            if p.boundary != s {
                continue;
            }
            let b = weight(idx);
            match p.membership {
                Membership::FlatInterior => {
                    return Err(Error::domain("flat-interior point present; the set is not pointy"))
                }
                Membership::AEndpoint => {
                    let d = p
                        .deriv_left
                        .ok_or_else(|| Error::numeric("A-endpoint lacks a left derivative"))?;
                    if d >= -1e-12 {
                        return Err(Error::numeric(
                            "zero one-sided derivative at a touch point; tangent classification should have fired",
                        ));
                    }
                    sums[sum] += -b / d;
                    if (p.q - 1.0).abs() < 1e-9 {
                        let dr = p
                            .deriv_right
                            .ok_or_else(|| Error::numeric("diagonal point lacks a right derivative"))?;
                        if dr <= 1e-12 {
                            return Err(Error::numeric(
                                "zero outward diagonal derivative; tangent classification should have fired",
                            ));
                        }
                        sums[sum] += b / dr;
                        numerator += b / dr;
                        saw_diagonal = true;
                    }
                }
                Membership::BEndpoint => {
                    let d = p
                        .deriv_right
                        .ok_or_else(|| Error::numeric("B-endpoint lacks a right derivative"))?;
                    if d <= 1e-12 {
                        return Err(Error::numeric(
                            "zero one-sided derivative at a touch point; tangent classification should have fired",
                        ));
                    }
                    sums[sum] += b / d;
                }
            }
        }
        if !saw_diagonal {
            return Err(Error::domain(
                "no diagonal touch point; chi bounds require a pointy set with k(1) = 1",
            ));
        }
    }
    let lower = (numerator / sums[0].max(sums[1])).clamp(0.0, 1.0);
    let upper = (numerator / sums[0].min(sums[1])).clamp(0.0, 1.0);
    Ok((lower, upper))
}

/// Re-derives the one-sided derivatives of recorded touch points from the
/// gauge itself (closed forms where available), replacing grid estimates.
fn refine_derivatives(set: &mut IntersectionSet, gauge: &Gauge) {
    for p in &mut set.points {
        let (dl, dr) = match p.boundary {
            BoundarySide::K => (
                if p.q > 0.0 { Some(gauge.k_deriv(p.q, Side::Left)) } else { None },
                Some(gauge.k_deriv(p.q, Side::Right)),
            ),
            BoundarySide::KTilde => (
                if p.q > 0.0 { Some(gauge.k_tilde_deriv(p.q, Side::Left)) } else { None },
                Some(gauge.k_tilde_deriv(p.q, Side::Right)),
            ),
        };
        p.deriv_left = dl;
        p.deriv_right = dr;
    }
}

fn tangent_present(set: &IntersectionSet, tol: &Tolerances) -> bool {
    set.points.iter().any(|p| {
        if (p.q - 1.0).abs() < 1e-9 {
            // Outward diagonal slope is at least 1 for a normalised gauge;
            // only the inward side can vanish.
            p.deriv_left.map(|d| d.abs() < tol.deriv).unwrap_or(false)
        } else if p.q == 0.0 {
            p.deriv_right.map(|d| d.abs() < tol.deriv).unwrap_or(false)
        } else {
            p.deriv_left.map(|d| d.abs() < tol.deriv).unwrap_or(false)
                || p.deriv_right.map(|d| d.abs() < tol.deriv).unwrap_or(false)
        }
    })
}

fn classify_from_set(
    mut set: IntersectionSet,
    k_one: f64,
    tol: &Tolerances,
    gauge: Option<&Gauge>,
) -> DependenceClass {
    if let Some(g) = gauge {
        refine_derivatives(&mut set, g);
    }
    if k_one > 1.0 + tol.level {
        return DependenceClass {
            label: Label::AI,
            mechanism: Mechanism::Blunt,
            intersections: set,
            chi_lower: None,
            chi_upper: None,
        };
    }
    if set.has_flat_run() {
        return DependenceClass {
            label: Label::AI,
            mechanism: Mechanism::FlatSegment,
            intersections: set,
            chi_lower: None,
            chi_upper: None,
        };
    }
    if tangent_present(&set, tol) {
        return DependenceClass {
            label: Label::AI,
            mechanism: Mechanism::Tangent,
            intersections: set,
            chi_lower: None,
            chi_upper: None,
        };
    }
    let (lo, up) = match chi_bounds(&set, None) {
        Ok(pair) => pair,
        Err(_) => {
            // Defensive: a structural surprise in the touch set is treated
            // as the nearest AI mechanism rather than a crash.
            return DependenceClass {
                label: Label::AI,
                mechanism: Mechanism::Tangent,
                intersections: set,
                chi_lower: None,
                chi_upper: None,
            };
        }
    };
    DependenceClass {
        label: Label::AD,
        mechanism: Mechanism::Pointy,
        intersections: set,
        chi_lower: Some(lo),
        chi_upper: Some(up),
    }
}

/// Classifies a gauge's extremal dependence.
///
/// The max-min family carries its own branch rule: the model is
/// asymptotically dependent exactly when `theta < 1` (where it coincides
/// with the logistic gauge) and independent for `theta >= 1`, where the
/// rescaled gauge's boundary function is flat at the branch point. The rule
/// is applied analytically so fitted values arbitrarily close to 1 classify
/// by their branch, not by grid tolerance.
pub fn classify(gauge: &Gauge, tol: &Tolerances) -> Result<DependenceClass> {
    let profile = boundary_profile(gauge, tol.q_max, tol.grid_points)?;
    let set = find_intersections(&profile, tol.level, tol.deriv);

    if let Gauge::MaxMin { theta } = gauge {
        let mut set = set;
        refine_derivatives(&mut set, gauge);
        if *theta < 1.0 {
            let chi = (2.0 - 2.0 * theta) / (2.0 - theta);
            return Ok(DependenceClass {
                label: Label::AD,
                mechanism: Mechanism::Pointy,
                intersections: set,
                chi_lower: Some(chi),
                chi_upper: Some(chi),
            });
        }
        return Ok(DependenceClass {
            label: Label::AI,
            mechanism: Mechanism::FlatSegment,
            intersections: set,
            chi_lower: None,
            chi_upper: None,
        });
    }

    let k_one = gauge.eval(1.0, 1.0);
    Ok(classify_from_set(set, k_one, tol, Some(gauge)))
}

/// Classifies from a precomputed boundary profile alone, using grid
/// derivative estimates. For sampled or external profiles where no gauge
/// object exists.
pub fn classify_profile(profile: &BoundaryProfile, tol: &Tolerances) -> Result<DependenceClass> {
    let i_one = profile
        .q
        .iter()
        .position(|&qi| (qi - 1.0).abs() < 0.5 * profile.step())
        .ok_or_else(|| Error::domain("profile grid must contain q = 1"))?;
    let set = find_intersections(profile, tol.level, tol.deriv);
    let k_one = profile.k[i_one].max(profile.k_tilde[i_one]);
    Ok(classify_from_set(set, k_one, tol, None))
}

/// Downgrades an AD classification to AI/diverging-b when empirical angular
/// data show the angular density blowing up at an axis touch point.
///
/// `angles` are observed angular coordinates `w in [0, 1]` of threshold
/// exceedances. If their empirical density diverges at an endpoint like
/// `d^rho` (in the distance `d` to that endpoint) with
/// `rho <= rho_limit < 0`, estimated Hill-style on the `tail_fraction`
/// smallest distances, and the boundary function touches the unit level at
/// `q = 0` — the geometric image of the angular endpoints — the class is
/// overridden in place. Returns whether the override fired. The diagnostic
/// is inert without data and never runs inside [`classify`] itself.
pub fn apply_angular_density_diagnostic(
    class: &mut DependenceClass,
    angles: &[f64],
    rho_limit: f64,
    tail_fraction: f64,
) -> Result<bool> {
    if !(-1.0..0.0).contains(&rho_limit) {
        return Err(Error::domain("rho_limit must lie in (-1, 0)"));
    }
    if !(tail_fraction > 0.0 && tail_fraction <= 0.5) {
        return Err(Error::domain("tail_fraction must lie in (0, 0.5]"));
    }
    if angles.iter().any(|&w| !(0.0..=1.0).contains(&w)) {
        return Err(Error::domain("angles must lie in [0, 1]"));
    }
    if class.label == Label::AI || angles.len() < 20 {
        return Ok(false);
    }
    // Divergence matters only at a unit-level touch on the axis; elsewhere
    // the angular mass near the endpoints cannot drain the diagonal.
    if !class.intersections.points.iter().any(|p| p.q == 0.0) {
        return Ok(false);
    }
    let diverges_at = |transform: &dyn Fn(f64) -> f64| -> bool {
        let mut d: Vec<f64> = angles.iter().map(|&w| transform(w)).filter(|&v| v > 0.0).collect();
        d.sort_by(f64::total_cmp);
        let m = ((d.len() as f64) * tail_fraction).floor() as usize;
        if m < 10 || m >= d.len() {
            return false;
        }
        // Density ~ d^rho near the endpoint means P(D <= d) ~ d^{rho+1};
        // conditional on D below the pivot, ln(pivot/D) is exponential with
        // rate rho+1.
        let pivot = d[m];
        let mean_log: f64 = d[..m].iter().map(|&v| (pivot / v).ln()).sum::<f64>() / m as f64;
        let alpha = 1.0 / mean_log;
        alpha - 1.0 <= rho_limit
    };
    if diverges_at(&|w| w) || diverges_at(&|w| 1.0 - w) {
        class.label = Label::AI;
        class.mechanism = Mechanism::DivergingB;
        class.chi_lower = None;
        class.chi_upper = None;
        return Ok(true);
    }
    Ok(false)
}

/// Convenience wrapper: classify a gauge, then run the angular-density
/// diagnostic on the result.
pub fn classify_with_angular_density(
    gauge: &Gauge,
    tol: &Tolerances,
    angles: &[f64],
    rho_limit: f64,
    tail_fraction: f64,
) -> Result<DependenceClass> {
    let mut out = classify(gauge, tol)?;
    apply_angular_density_diagnostic(&mut out, angles, rho_limit, tail_fraction)?;
    Ok(out)
}
