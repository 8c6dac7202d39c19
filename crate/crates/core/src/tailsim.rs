//! Tail simulation and extrapolation from a fitted angular-radial model.
//!
//! A fitted model combines a gauge, a gamma shape, an angular threshold and
//! the observed exceedance angles. Conditioning on `R > k * t(w)` for `k >= 1`
//! pushes the simulation further into the tail than the data reach: angles
//! are reweighted by how much truncated-gamma mass each one keeps, radii are
//! redrawn from the deeper truncation, and rare-set probabilities follow by
//! multiplying the conditional hit rate back through the weight average and
//! the empirical exceedance rate.

use std::io::Write as IoWrite;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::gauge::Gauge;
use crate::inference::{Exceedances, FitResult};
use crate::rng::RngStream;
use crate::special::{gamma_survival, sample_trunc_gamma};
use crate::threshold::ThresholdFunction;
use crate::Result;

/// Everything needed to simulate from a fitted exceedance model.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FittedModel {
    pub gauge: Gauge,
    pub lambda: f64,
    pub threshold: ThresholdFunction,
    /// Angles of the observed threshold exceedances; the conditional
    /// simulation resamples among these.
    pub exceedance_angles: Vec<f64>,
    /// Empirical probability that a data point exceeds the threshold.
    pub p_exceed: f64,
}

impl FittedModel {
    pub fn new(
        gauge: Gauge,
        lambda: f64,
        threshold: ThresholdFunction,
        exceedance_angles: Vec<f64>,
        p_exceed: f64,
    ) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::domain("lambda must be positive and finite"));
        }
        if exceedance_angles.is_empty() {
            return Err(Error::domain("need at least one exceedance angle"));
        }
        if exceedance_angles.iter().any(|w| !(*w >= 0.0 && *w <= 1.0)) {
            return Err(Error::domain("exceedance angles must lie in [0, 1]"));
        }
        if !(p_exceed > 0.0 && p_exceed < 1.0) {
            return Err(Error::domain("p_exceed must lie in (0, 1)"));
        }
        Ok(FittedModel { gauge, lambda, threshold, exceedance_angles, p_exceed })
    }

    /// Assembles a model from a converged fit and the exceedances it used.
    pub fn from_fit(
        fit: &FitResult,
        exc: &Exceedances,
        threshold: ThresholdFunction,
        p_exceed: f64,
    ) -> Result<Self> {
        FittedModel::new(fit.build_gauge()?, fit.lambda(), threshold, exc.w.clone(), p_exceed)
    }

    fn rate_at(&self, w: f64) -> f64 {
        // The radial model's rate, which for the max/min family is the raw
        // branch value the likelihood was fitted with.
        self.gauge.rate(w, 1.0 - w)
    }
}

/// Axis-aligned rectangle on the exponential-margin scale; upper edges may
/// be infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionSpec {
    pub x_lo: f64,
    pub x_hi: f64,
    pub y_lo: f64,
    pub y_hi: f64,
}

impl RegionSpec {
    pub fn new(x_lo: f64, x_hi: f64, y_lo: f64, y_hi: f64) -> Result<Self> {
        for (name, lo, hi) in [("x", x_lo, x_hi), ("y", y_lo, y_hi)] {
            if !(lo >= 0.0) || !lo.is_finite() {
                return Err(Error::domain(format!("{name} lower bound must be finite and >= 0")));
            }
            if !(hi > lo) {
                return Err(Error::domain(format!("{name} bounds must satisfy lo < hi")));
            }
        }
        Ok(RegionSpec { x_lo, x_hi, y_lo, y_hi })
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x_lo && x <= self.x_hi && y >= self.y_lo && y <= self.y_hi
    }

    /// Radius at which the ray of angle `w` first enters the rectangle,
    /// or `None` when the ray misses it.
    fn entry_radius(&self, w: f64) -> Option<f64> {
        if w <= 0.0 {
            // The ray runs up the y-axis.
            return if self.x_lo == 0.0 { Some(self.y_lo) } else { None };
        }
        if w >= 1.0 {
            return if self.y_lo == 0.0 { Some(self.x_lo) } else { None };
        }
        let r_lo = (self.x_lo / w).max(self.y_lo / (1.0 - w));
        let r_hi = (self.x_hi / w).min(self.y_hi / (1.0 - w));
        if r_lo <= r_hi {
            Some(r_lo)
        } else {
            None
        }
    }
}

/// Extrapolated probability of a region, with its Monte Carlo context.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegionEstimate {
    pub prob: f64,
    /// Binomial standard error of the conditional hit rate, propagated
    /// through the extrapolation factors (threshold and weight uncertainty
    /// are not included).
    pub se: Option<f64>,
    /// Threshold multiplier the simulation conditioned on.
    pub k: f64,
    pub hits: usize,
    pub n_sim: usize,
}

/// One row of a chi-by-quantile curve.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ChiPlotPoint {
    pub u: f64,
    pub chi_m_hat: f64,
    pub mc_se: f64,
}

/// Per-angle resampling weights for conditioning on `R > k * t(w)`:
/// the ratio of surviving truncated-gamma mass at depth `k` to the mass
/// above the original threshold.
fn angle_weights(model: &FittedModel, k: f64) -> Vec<f64> {
    model
        .exceedance_angles
        .iter()
        .map(|&w| {
            let g = model.rate_at(w);
            let t = model.threshold.eval(w);
            let base = gamma_survival(t, model.lambda, g);
            let deep = gamma_survival(k * t, model.lambda, g);
            if base > 0.0 && deep.is_finite() {
                deep / base
            } else {
                0.0
            }
        })
        .collect()
}

/// Draws `n_sim` points from the fitted model conditioned on
/// `R > k * t(W)`. Every returned point satisfies the conditioning
/// constraint at its own angle.
pub fn simulate_conditional(
    model: &FittedModel,
    k: f64,
    n_sim: usize,
    rng: &mut RngStream,
) -> Result<Vec<(f64, f64)>> {
    if !(k >= 1.0) || !k.is_finite() {
        return Err(Error::domain("threshold multiplier k must be finite and >= 1"));
    }
    let weights = angle_weights(model, k);
    if weights.iter().all(|&w| w <= 0.0) {
        return Err(Error::numeric(format!(
            "no angle retains any mass beyond k = {k}; the extrapolation depth is out of reach"
        )));
    }
    let mut out = Vec::with_capacity(n_sim);
    for _ in 0..n_sim {
        let idx = rng.weighted_index(&weights);
        let w = model.exceedance_angles[idx];
        let g = model.rate_at(w);
        let lower = k * model.threshold.eval(w);
        let r = sample_trunc_gamma(rng, model.lambda, g, lower)?;
        // Guard the closed lower edge of quantile inversion.
        let r = if r > lower { r } else { lower * (1.0 + 1e-12) + f64::MIN_POSITIVE };
        out.push((r * w, r * (1.0 - w)));
    }
    Ok(out)
}

/// Largest multiplier `k` for which the region lies entirely outside the
/// scaled threshold `{(x, y): r <= k t(w)}`, located by bisection over an
/// angular probe grid.
fn largest_safe_k(model: &FittedModel, region: &RegionSpec) -> Result<f64> {
    const N_ANGLES: usize = 721;
    let mut probes: Vec<(f64, f64)> = Vec::new();
    for j in 0..N_ANGLES {
        let w = j as f64 / (N_ANGLES - 1) as f64;
        if let Some(entry) = region.entry_radius(w) {
            probes.push((entry, model.threshold.eval(w)));
        }
    }
    if probes.is_empty() {
        return Err(Error::numeric("region is too thin for the angular probe grid"));
    }
    let outside_at = |k: f64| probes.iter().all(|&(entry, t)| k * t <= entry);
    if !outside_at(1.0) {
        return Err(Error::domain(
            "region reaches inside the threshold itself; probabilities there cannot be extrapolated from tail exceedances",
        ));
    }
    let mut lo = 1.0;
    let mut hi = 2.0;
    while outside_at(hi) {
        lo = hi;
        hi *= 2.0;
        if hi > 1e12 {
            return Err(Error::numeric("region appears unreachable along every probed angle"));
        }
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if outside_at(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// Estimates the region's probability by conditioning at the supplied
/// multiplier `k` (the region must lie outside `k * t(w)`).
pub fn estimate_region_prob_with_k(
    model: &FittedModel,
    region: &RegionSpec,
    k: f64,
    n_sim: usize,
    rng: &mut RngStream,
) -> Result<RegionEstimate> {
    if n_sim == 0 {
        return Err(Error::domain("n_sim must be positive"));
    }
    let weights = angle_weights(model, k);
    let mean_weight = weights.iter().sum::<f64>() / weights.len() as f64;
    let sims = simulate_conditional(model, k, n_sim, rng)?;
    let hits = sims.iter().filter(|&&(x, y)| region.contains(x, y)).count();
    let p_cond = hits as f64 / n_sim as f64;
    let scale = mean_weight * model.p_exceed;
    let se = scale * (p_cond * (1.0 - p_cond) / n_sim as f64).sqrt();
    Ok(RegionEstimate { prob: p_cond * scale, se: Some(se), k, hits, n_sim })
}

/// Estimates the region's probability, conditioning as deep into the tail
/// as the region allows.
pub fn estimate_region_prob(
    model: &FittedModel,
    region: &RegionSpec,
    n_sim: usize,
    rng: &mut RngStream,
) -> Result<RegionEstimate> {
    let k = largest_safe_k(model, region)?;
    estimate_region_prob_with_k(model, region, k, n_sim, rng)
}

/// Measure of joint extremity at quantile `u`: the ratio of the probability
/// that both coordinates exceed `z = -ln(1 - u)` to the probability that the
/// first does. Both events are counted on one shared simulation, so the
/// extrapolation factors cancel and the returned standard error is the
/// conditional binomial one.
pub fn estimate_chi_m(
    model: &FittedModel,
    u: f64,
    n_sim: usize,
    rng: &mut RngStream,
) -> Result<(f64, f64)> {
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::domain("u must lie in (0, 1)"));
    }
    if n_sim == 0 {
        return Err(Error::domain("n_sim must be positive"));
    }
    let z = -(1.0 - u).ln();
    let marginal = RegionSpec::new(z, f64::INFINITY, 0.0, f64::INFINITY)?;
    let k = largest_safe_k(model, &marginal)?;
    let sims = simulate_conditional(model, k, n_sim, rng)?;
    let mut joint_hits = 0usize;
    let mut marginal_hits = 0usize;
    for &(x, y) in &sims {
        if x > z {
            marginal_hits += 1;
            if y > z {
                joint_hits += 1;
            }
        }
    }
    if marginal_hits == 0 {
        return Err(Error::numeric(format!(
            "no simulated mass beyond the marginal quantile at u = {u}"
        )));
    }
    let chi = joint_hits as f64 / marginal_hits as f64;
    let se = (chi * (1.0 - chi) / marginal_hits as f64).sqrt();
    Ok((chi, se))
}

/// Chi-by-quantile curve over the supplied quantile levels.
pub fn chi_plot(
    model: &FittedModel,
    levels: &[f64],
    n_sim: usize,
    rng: &mut RngStream,
) -> Result<Vec<ChiPlotPoint>> {
    let mut rows = Vec::with_capacity(levels.len());
    for &u in levels {
        let (chi, se) = estimate_chi_m(model, u, n_sim, rng)?;
        rows.push(ChiPlotPoint { u, chi_m_hat: chi, mc_se: se });
    }
    Ok(rows)
}

/// Writes a chi curve as CSV with header `u,chi_m_hat,mc_se`.
pub fn write_chi_plot_csv<P: AsRef<Path>>(path: P, rows: &[ChiPlotPoint]) -> Result<()> {
    let mut out = std::fs::File::create(path)?;
    writeln!(out, "u,chi_m_hat,mc_se")?;
    for row in rows {
        writeln!(out, "{},{},{}", row.u, row.chi_m_hat, row.mc_se)?;
    }
    Ok(())
}

/// Golden-section refinement of a bracketed one-dimensional minimum.
fn golden_min(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..200 {
        if (b - a).abs() < 1e-12 {
            break;
        }
        if fc < fd {
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
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// Residual tail-dependence coefficient implied by a gauge: the reciprocal
/// of the smallest gauge value along the two unit-coordinate slices
/// `{(1, t): t >= 1}` and `{(t, 1): t >= 1}`, located by a geometric grid
/// scan plus golden-section refinement.
pub fn estimate_eta(gauge: &Gauge) -> f64 {
    let objective = |t: f64| gauge.eval(1.0, t).min(gauge.eval(t, 1.0));
    let n = 2001;
    let t_max: f64 = 64.0;
    let mut best_i = 0;
    let mut best = f64::INFINITY;
    let grid: Vec<f64> = (0..n)
        .map(|i| (t_max.ln() * i as f64 / (n - 1) as f64).exp())
        .collect();
    for (i, &t) in grid.iter().enumerate() {
        let v = objective(t);
        if v < best {
            best = v;
            best_i = i;
        }
    }
    let a = grid[best_i.saturating_sub(1)];
    let b = grid[(best_i + 1).min(n - 1)];
    let (_, refined) = golden_min(&objective, a, b);
    1.0 / refined.min(best)
}

/// Shape ratio of the highest boundary point of the gauge's unit level set
/// on the `x <= y` side: maximises the rescaled height `(1 - w) / g(w, 1 - w)`
/// over `w` in `[0, 1/2]` and returns `w* / (1 - w*)`.
pub fn estimate_kappa(gauge: &Gauge) -> f64 {
    let objective = |w: f64| -( (1.0 - w) / gauge.eval(w, 1.0 - w) );
    let n = 2001;
    let mut best_i = 0;
    let mut best = f64::INFINITY;
    for i in 0..n {
        let w = 0.5 * i as f64 / (n - 1) as f64;
        let v = objective(w);
        if v < best {
            best = v;
            best_i = i;
        }
    }
    let step = 0.5 / (n - 1) as f64;
    let a = (best_i as f64 * step - step).max(0.0);
    let b = (best_i as f64 * step + step).min(0.5);
    let (x, refined) = golden_min(&objective, a, b);
    let w_star = if refined < best { x } else { best_i as f64 * step };
    w_star / (1.0 - w_star)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mixture::{MixtureComponent, MixtureSpec, RescaledMixture};

    fn constant_threshold(r: f64) -> ThresholdFunction {
        ThresholdFunction::new(vec![0.5], vec![r]).unwrap()
    }

    fn spread_angles(n: usize) -> Vec<f64> {
        (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect()
    }

    fn logistic_model(gamma: f64) -> FittedModel {
        FittedModel::new(
            Gauge::logistic(gamma).unwrap(),
            2.0,
            constant_threshold(1.0),
            spread_angles(400),
            0.05,
        )
        .unwrap()
    }

    #[test]
    fn weights_at_unit_depth_are_all_one() {
        let model = logistic_model(0.5);
        let w = angle_weights(&model, 1.0);
        assert!(w.iter().all(|&x| (x - 1.0).abs() < 1e-14));
    }

    #[test]
    fn simulated_points_respect_the_conditioning_support() {
        let model = logistic_model(0.5);
        let mut rng = RngStream::new(11, 0);
        for &k in &[1.0, 2.5, 6.0] {
            let sims = simulate_conditional(&model, k, 2000, &mut rng).unwrap();
            assert_eq!(sims.len(), 2000);
            for &(x, y) in &sims {
                let r = x + y;
                let w = x / r;
                assert!(r > k * model.threshold.eval(w), "r={r} at k={k}");
            }
        }
    }

    #[test]
    fn unreachable_depth_is_an_error() {
        let model = logistic_model(0.5);
        let mut rng = RngStream::new(12, 0);
        assert!(simulate_conditional(&model, 1e6, 10, &mut rng).is_err());
    }

    #[test]
    fn conditional_radial_mean_matches_the_closed_form() {
        // Single angle, constant threshold: the radius is a plain truncated
        // gamma whose mean is lambda/g * S(a; lambda+1, g) / S(a; lambda, g).
        let lambda = 2.0;
        let model = FittedModel::new(
            Gauge::logistic(0.5).unwrap(),
            lambda,
            constant_threshold(1.0),
            vec![0.5],
            0.05,
        )
        .unwrap();
        let g = model.rate_at(0.5);
        let k = 3.0;
        let a = k * 1.0;
        let mut rng = RngStream::new(13, 0);
        let sims = simulate_conditional(&model, k, 200_000, &mut rng).unwrap();
        let radii: Vec<f64> = sims.iter().map(|&(x, y)| x + y).collect();
        let mean: f64 = radii.iter().sum::<f64>() / radii.len() as f64;
        let var: f64 =
            radii.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / (radii.len() - 1) as f64;
        let truth = lambda / g * gamma_survival(a, lambda + 1.0, g) / gamma_survival(a, lambda, g);
        let tol = 3.0 * (var / radii.len() as f64).sqrt();
        assert!((mean - truth).abs() < tol, "mean {mean} vs {truth} (tol {tol})");
    }

    #[test]
    fn region_entry_radii_are_geometric() {
        let region = RegionSpec::new(2.0, 10.0, 1.0, f64::INFINITY).unwrap();
        // Along the diagonal the rectangle starts where x = 2, at radius 4.
        assert!((region.entry_radius(0.5).unwrap() - 4.0).abs() < 1e-12);
        // On a flat ray the y >= 1 constraint binds: r = 1 / (1 - w).
        assert!((region.entry_radius(0.8).unwrap() - 5.0).abs() < 1e-9);
        // On a steep ray the x >= 2 constraint binds: r = 2 / w.
        assert!((region.entry_radius(0.25).unwrap() - 8.0).abs() < 1e-12);
        // The y-axis ray never reaches x >= 2.
        assert!(region.entry_radius(0.0).is_none());
        // Very flat rays pass x = 10 before y reaches 1 and miss the box.
        assert!(region.entry_radius(0.995).is_none());
        assert!(RegionSpec::new(3.0, 2.0, 0.0, 1.0).is_err());
        assert!(RegionSpec::new(-1.0, 2.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn regions_inside_the_threshold_are_rejected() {
        let model = logistic_model(0.5);
        let region = RegionSpec::new(0.1, f64::INFINITY, 0.1, f64::INFINITY).unwrap();
        let mut rng = RngStream::new(14, 0);
        let err = estimate_region_prob(&model, &region, 100, &mut rng).unwrap_err();
        assert!(matches!(err, Error::Domain(_)));
    }

    #[test]
    fn deeper_conditioning_agrees_with_shallow_conditioning() {
        let model = logistic_model(0.4);
        let region = RegionSpec::new(3.0, f64::INFINITY, 3.0, f64::INFINITY).unwrap();
        let mut rng = RngStream::new(15, 0);
        let shallow = estimate_region_prob_with_k(&model, &region, 1.0, 400_000, &mut rng).unwrap();
        let deep = estimate_region_prob(&model, &region, 400_000, &mut rng).unwrap();
        assert!(deep.k > 1.5, "expected a genuinely deeper conditioning, got {}", deep.k);
        let joint_se = (shallow.se.unwrap().powi(2) + deep.se.unwrap().powi(2)).sqrt();
        assert!(
            (shallow.prob - deep.prob).abs() <= 3.0 * joint_se,
            "{} vs {} (3se {})",
            shallow.prob,
            deep.prob,
            3.0 * joint_se
        );
    }

    #[test]
    fn disjoint_rectangles_add_up() {
        let model = logistic_model(0.4);
        let a = RegionSpec::new(3.0, 4.0, 3.0, f64::INFINITY).unwrap();
        let b = RegionSpec::new(4.0, 9.0, 3.0, f64::INFINITY).unwrap();
        let union = RegionSpec::new(3.0, 9.0, 3.0, f64::INFINITY).unwrap();
        let mut rng = RngStream::new(16, 0);
        let pa = estimate_region_prob(&model, &a, 300_000, &mut rng).unwrap();
        let pb = estimate_region_prob(&model, &b, 300_000, &mut rng).unwrap();
        let pu = estimate_region_prob(&model, &union, 300_000, &mut rng).unwrap();
        let joint_se = (pa.se.unwrap().powi(2) + pb.se.unwrap().powi(2) + pu.se.unwrap().powi(2))
            .sqrt();
        assert!(
            (pa.prob + pb.prob - pu.prob).abs() <= 3.0 * joint_se,
            "{} + {} vs {}",
            pa.prob,
            pb.prob,
            pu.prob
        );
    }

    #[test]
    fn chi_ratio_stays_in_the_unit_interval_with_finite_se() {
        let model = logistic_model(0.4);
        let mut rng = RngStream::new(17, 0);
        for &u in &[0.9, 0.99, 0.999] {
            let (chi, se) = estimate_chi_m(&model, u, 50_000, &mut rng).unwrap();
            assert!((0.0..=1.0).contains(&chi), "chi {chi} at u={u}");
            assert!(se >= 0.0 && se.is_finite());
        }
        assert!(estimate_chi_m(&model, 1.0, 10, &mut rng).is_err());
    }

    #[test]
    fn chi_estimates_are_deterministic_given_the_stream() {
        let model = logistic_model(0.3);
        let mut rng_a = RngStream::new(18, 3);
        let mut rng_b = RngStream::new(18, 3);
        let a = estimate_chi_m(&model, 0.995, 20_000, &mut rng_a).unwrap();
        let b = estimate_chi_m(&model, 0.995, 20_000, &mut rng_b).unwrap();
        assert_eq!(a.0.to_bits(), b.0.to_bits());
        assert_eq!(a.1.to_bits(), b.1.to_bits());
    }

    #[test]
    fn chi_plot_rows_serialise_to_csv() {
        let model = logistic_model(0.4);
        let mut rng = RngStream::new(19, 0);
        let rows = chi_plot(&model, &[0.9, 0.99], 20_000, &mut rng).unwrap();
        assert_eq!(rows.len(), 2);
        let dir = std::env::temp_dir().join("tailsim_chi_csv_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("chi.csv");
        write_chi_plot_csv(&path, &rows).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("u,chi_m_hat,mc_se\n"));
        assert_eq!(text.lines().count(), 3);
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn eta_matches_closed_forms() {
        let gauss = Gauge::gaussian(0.74).unwrap();
        assert!((estimate_eta(&gauss) - 0.87).abs() < 1e-4);
        let inv = Gauge::inverted_logistic(0.2).unwrap();
        assert!((estimate_eta(&inv) - 2f64.powf(-0.2)).abs() < 1e-4);
        let rect = Gauge::rectangular(0.5).unwrap();
        assert!((estimate_eta(&rect) - 0.75).abs() < 1e-4);
        let logi = Gauge::logistic(0.5).unwrap();
        assert!((estimate_eta(&logi) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn kappa_matches_known_shapes() {
        // Fully dependent-everywhere logistic boundary peaks on the diagonal.
        let logi = Gauge::logistic(0.5).unwrap();
        assert!((estimate_kappa(&logi) - 1.0).abs() < 1e-4);
        // Independence gauge: the highest boundary point sits on the axis.
        let indep = Gauge::gaussian(0.0).unwrap();
        assert!(estimate_kappa(&indep).abs() < 1e-4);
    }

    #[test]
    fn kappa_agrees_with_the_additive_mixture_closed_form() {
        let spec = MixtureSpec {
            component: MixtureComponent::Gaussian { rho: 0.5 },
            gamma: 0.5,
            p: 0.8,
        };
        let mix = RescaledMixture::new(spec).unwrap();
        let expected = mix.kappa();
        let estimated = estimate_kappa(&Gauge::AdditiveMix(mix));
        assert!(
            (estimated - expected).abs() < 1e-4,
            "numeric {estimated} vs closed form {expected}"
        );
    }

    #[test]
    fn model_validation_rejects_bad_inputs() {
        let g = Gauge::logistic(0.5).unwrap();
        let t = constant_threshold(1.0);
        assert!(FittedModel::new(g.clone(), 0.0, t.clone(), vec![0.5], 0.05).is_err());
        assert!(FittedModel::new(g.clone(), 2.0, t.clone(), vec![], 0.05).is_err());
        assert!(FittedModel::new(g.clone(), 2.0, t.clone(), vec![1.5], 0.05).is_err());
        assert!(FittedModel::new(g, 2.0, t, vec![0.5], 1.0).is_err());
    }
}
