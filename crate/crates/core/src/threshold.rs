//! Angular radial thresholds from rolling-window quantiles.
//!
//! Observations `(x, y)` in the positive quadrant are mapped to pseudo-polar
//! coordinates `r = x + y`, `w = x / (x + y)`. The radial threshold
//! `r_tau(w)` is estimated by rolling overlapping windows across the sample
//! sorted by angle, taking the empirical `tau`-quantile of `r` in each
//! window, and smoothing each window-centre knot with the mean of the
//! quantiles from all windows covering that centre. Windows hold equal point
//! counts rather than equal angular widths: strongly dependent data
//! concentrates its angles near `w = 0.5`, and width-based windows near the
//! edges of `[0, 1]` would be empty there. Evaluation interpolates linearly
//! between knots and extrapolates flat beyond the first and last centre.

use std::io::{BufRead, BufReader, Write as IoWrite};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::Result;

/// Pseudo-polar view of a positive-quadrant sample: `r = x + y` and
/// `w = x / (x + y)`, stored record-aligned.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AngularRadialSample {
    pub r: Vec<f64>,
    pub w: Vec<f64>,
}

impl AngularRadialSample {
    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    /// Inverse transform back to Cartesian coordinates.
    pub fn to_cartesian(&self) -> Vec<(f64, f64)> {
        self.r
            .iter()
            .zip(&self.w)
            .map(|(&r, &w)| (r * w, r * (1.0 - w)))
            .collect()
    }
}

/// Maps positive-quadrant points to angular-radial coordinates.
///
/// Coordinates must be non-negative and no point may sit at the origin,
/// where the angle is undefined.
pub fn to_angular(points: &[(f64, f64)]) -> Result<AngularRadialSample> {
    let mut r = Vec::with_capacity(points.len());
    let mut w = Vec::with_capacity(points.len());
    for (i, &(x, y)) in points.iter().enumerate() {
        if !(x >= 0.0 && y >= 0.0) {
            return Err(Error::domain(format!("record {i}: coordinates ({x}, {y}) outside the positive quadrant")));
        }
        let radius = x + y;
        if radius <= 0.0 {
            return Err(Error::domain(format!("record {i}: point at the origin has no angle")));
        }
        r.push(radius);
        w.push(x / radius);
    }
    Ok(AngularRadialSample { r, w })
}

/// Piecewise-linear angular threshold with flat extrapolation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ThresholdFunction {
    knots_w: Vec<f64>,
    knots_r: Vec<f64>,
}

impl ThresholdFunction {
    /// Builds from knot positions (strictly increasing in `[0, 1]`) and
    /// positive values.
    pub fn new(knots_w: Vec<f64>, knots_r: Vec<f64>) -> Result<Self> {
        if knots_w.is_empty() || knots_w.len() != knots_r.len() {
            return Err(Error::domain("threshold needs matching, non-empty knot and value lists"));
        }
        if !knots_w.windows(2).all(|p| p[0] < p[1]) {
            return Err(Error::domain("threshold knots must be strictly increasing"));
        }
        if knots_w.iter().any(|&w| !(0.0..=1.0).contains(&w)) {
            return Err(Error::domain("threshold knots must lie in [0, 1]"));
        }
        if knots_r.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
            return Err(Error::domain("threshold values must be positive and finite"));
        }
        Ok(ThresholdFunction { knots_w, knots_r })
    }

    pub fn knots(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.knots_w.iter().zip(&self.knots_r).map(|(&w, &r)| (w, r))
    }

    /// Threshold value at angle `w in [0, 1]`.
    pub fn eval(&self, w: f64) -> f64 {
        let n = self.knots_w.len();
        if w <= self.knots_w[0] {
            return self.knots_r[0];
        }
        if w >= self.knots_w[n - 1] {
            return self.knots_r[n - 1];
        }
        let hi = self.knots_w.partition_point(|&kw| kw < w);
        let lo = hi - 1;
        let span = self.knots_w[hi] - self.knots_w[lo];
        let frac = (w - self.knots_w[lo]) / span;
        self.knots_r[lo] + frac * (self.knots_r[hi] - self.knots_r[lo])
    }

    /// Writes the knots as CSV with header `w,r_tau`. Values use the
    /// shortest decimal form that parses back to the identical double.
    pub fn write_csv<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(out, "w,r_tau")?;
        for (w, r) in self.knots() {
            writeln!(out, "{w},{r}")?;
        }
        Ok(())
    }

    /// Reads knots from the CSV layout produced by [`Self::write_csv`].
    pub fn read_csv<P: AsRef<Path>>(path: P) -> Result<Self> {
        let reader = BufReader::new(std::fs::File::open(path)?);
        let mut knots_w = Vec::new();
        let mut knots_r = Vec::new();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if lineno == 0 {
                if line != "w,r_tau" {
                    return Err(Error::parse(format!("expected header 'w,r_tau', found '{line}'")));
                }
                continue;
            }
            let (ws, rs) = line
                .split_once(',')
                .ok_or_else(|| Error::parse(format!("line {}: expected 'w,r_tau' pair", lineno + 1)))?;
            let w: f64 = ws
                .trim()
                .parse()
                .map_err(|_| Error::parse(format!("line {}: bad w value '{ws}'", lineno + 1)))?;
            let r: f64 = rs
                .trim()
                .parse()
                .map_err(|_| Error::parse(format!("line {}: bad r_tau value '{rs}'", lineno + 1)))?;
            knots_w.push(w);
            knots_r.push(r);
        }
        ThresholdFunction::new(knots_w, knots_r)
    }
}

/// Empirical quantile with linearly interpolated order statistics
/// (the common "type 7" rule): `h = (n - 1) p`, interpolate between the
/// straddling order statistics.
fn quantile_type7(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    debug_assert!(n > 0);
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * p;
    let i = (h.floor() as usize).min(n - 2);
    let frac = h - i as f64;
    sorted[i] + frac * (sorted[i + 1] - sorted[i])
}

/// Estimates the angular radial threshold by overlapping rolling windows.
///
/// The sample is sorted by angle and covered by `n_windows` windows of equal
/// point count, consecutive windows sharing an `overlap_fraction` of their
/// points. Each window contributes the type-7 `tau`-quantile of its radii;
/// the knot at a window's centre (its median angle) is the mean of the
/// quantiles from every window covering that centre, which smooths the raw
/// window estimates. Windows holding fewer than `min_per_window` points
/// signal insufficient data.
pub fn rolling_quantile_threshold(
    sample: &AngularRadialSample,
    tau: f64,
    n_windows: usize,
    overlap_fraction: f64,
    min_per_window: usize,
) -> Result<ThresholdFunction> {
    if !(tau > 0.5 && tau < 1.0) {
        return Err(Error::domain(format!("tau={tau} outside (0.5, 1)")));
    }
    if n_windows < 3 {
        return Err(Error::domain("need at least 3 windows"));
    }
    if !(0.0..1.0).contains(&overlap_fraction) {
        return Err(Error::domain("overlap_fraction must lie in [0, 1)"));
    }
    if min_per_window == 0 {
        return Err(Error::domain("min_per_window must be positive"));
    }
    if sample.is_empty() {
        return Err(Error::insufficient("empty sample"));
    }
    let n = sample.len();

    // Window length solves: length + (k-1) * stride = n with
    // stride = length * (1 - f), so the windows tile the sorted sample.
    let stride_units = 1.0 + (n_windows - 1) as f64 * (1.0 - overlap_fraction);
    let length_f = n as f64 / stride_units;
    let stride_f = length_f * (1.0 - overlap_fraction);
    let length = (length_f.round() as usize).max(1);
    if length < min_per_window {
        return Err(Error::insufficient(format!(
            "windows of {length} points fall short of min_per_window = {min_per_window} (n = {n})"
        )));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| sample.w[a].total_cmp(&sample.w[b]));

    let mut bounds = Vec::with_capacity(n_windows); // rank ranges [start, end)
    let mut window_q = Vec::with_capacity(n_windows);
    let mut center_ranks = Vec::with_capacity(n_windows);
    for j in 0..n_windows {
        let start = ((j as f64 * stride_f).round() as usize).min(n - length);
        let end = if j == n_windows - 1 { n } else { (start + length).min(n) };
        let mut radii: Vec<f64> = order[start..end].iter().map(|&i| sample.r[i]).collect();
        radii.sort_by(f64::total_cmp);
        window_q.push(quantile_type7(&radii, tau));
        bounds.push((start, end));
        center_ranks.push(start + (end - start - 1) / 2);
    }

    // Smooth: the knot at a window's centre averages the quantiles of every
    // window whose rank range covers that centre.
    let mut knots: Vec<(f64, f64)> = Vec::with_capacity(n_windows);
    for &m in &center_ranks {
        let mut sum = 0.0;
        let mut count = 0.0;
        for (i, &(s, e)) in bounds.iter().enumerate() {
            if s <= m && m < e {
                sum += window_q[i];
                count += 1.0;
            }
        }
        knots.push((sample.w[order[m]], sum / count));
    }

    // Heavily tied angles can make centres coincide; identical centres
    // collapse into one knot holding the mean of their values.
    let mut knots_w: Vec<f64> = Vec::with_capacity(n_windows);
    let mut knots_r: Vec<f64> = Vec::with_capacity(n_windows);
    let mut merged: Vec<f64> = Vec::with_capacity(n_windows);
    for (w, q) in knots {
        if knots_w.last() == Some(&w) {
            let k = knots_r.len() - 1;
            merged[k] += 1.0;
            knots_r[k] += (q - knots_r[k]) / merged[k];
        } else {
            knots_w.push(w);
            knots_r.push(q);
            merged.push(1.0);
        }
    }

    ThresholdFunction::new(knots_w, knots_r)
}
