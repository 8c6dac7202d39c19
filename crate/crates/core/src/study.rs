//! Classification benchmark: how reliably each fit family recovers the true
//! dependence class across the scenario catalog.
//!
//! Every repetition draws its own ChaCha stream addressed by a label built
//! from (scenario, structure, family, rep), so results are identical no
//! matter how the work is scheduled across threads, and any single cell can
//! be reproduced in isolation.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classify::{classify, Label, Tolerances};
use crate::error::Error;
use crate::inference::{fit, Exceedances, Family, FitConfig};
use crate::rng::{stream_label, RngStream};
use crate::synth::{scenario_catalog, ScenarioCell};
use crate::threshold::{rolling_quantile_threshold, to_angular, AngularRadialSample, ThresholdFunction};
use crate::Result;

/// Thresholding knobs shared by the fit command and the benchmark.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PipelineSettings {
    /// Radial quantile level of the rolling threshold.
    pub tau: f64,
    pub n_windows: usize,
    pub overlap: f64,
    pub min_per_window: usize,
}

impl Default for PipelineSettings {
    fn default() -> Self {
        PipelineSettings { tau: 0.95, n_windows: 17, overlap: 0.5, min_per_window: 30 }
    }
}

/// Output of the shared preprocessing pipeline: angular sample, fitted
/// threshold, strict exceedances and the empirical exceedance rate.
#[derive(Debug, Clone)]
pub struct PreparedData {
    pub sample: AngularRadialSample,
    pub threshold: ThresholdFunction,
    pub exceedances: Exceedances,
    pub p_exceed: f64,
}

/// Runs points through the angular transform, rolling threshold and
/// exceedance extraction.
pub fn prepare(points: &[(f64, f64)], settings: &PipelineSettings) -> Result<PreparedData> {
    let sample = to_angular(points)?;
    let threshold = rolling_quantile_threshold(
        &sample,
        settings.tau,
        settings.n_windows,
        settings.overlap,
        settings.min_per_window,
    )?;
    let exceedances = Exceedances::from_threshold(&sample, &threshold);
    if exceedances.is_empty() {
        return Err(Error::insufficient("no radial exceedances above the threshold"));
    }
    let p_exceed = exceedances.len() as f64 / sample.len() as f64;
    Ok(PreparedData { sample, threshold, exceedances, p_exceed })
}

/// Benchmark configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchmarkConfig {
    pub n: usize,
    pub reps: usize,
    pub seed: u64,
    pub families: Vec<Family>,
    pub pipeline: PipelineSettings,
    /// 0 leaves the global thread pool in charge.
    pub threads: usize,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        BenchmarkConfig {
            n: 5000,
            reps: 100,
            seed: 1,
            families: vec![Family::MaxMin, Family::ExpGa],
            pipeline: PipelineSettings::default(),
            threads: 0,
        }
    }
}

/// One (scenario, structure, family) cell of the benchmark report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CellReport {
    pub scenario: String,
    pub structure: String,
    pub family: Family,
    pub truth: Label,
    pub reps: usize,
    /// Converged fits; the denominator of `rate`.
    pub fits_used: usize,
    /// Reps whose fit failed or did not converge; excluded from `rate`.
    pub fit_failures: usize,
    pub correct: usize,
    /// Sensitivity on dependent cells, specificity on independent ones.
    pub rate: f64,
    /// Binomial standard error of `rate`.
    pub rate_se: f64,
    pub mean_fit_seconds: f64,
}

/// Average correct-classification rate of one family across its cells.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FamilySummary {
    pub family: Family,
    pub cells: usize,
    pub average_rate: f64,
}

/// Full benchmark output.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub config: BenchmarkConfig,
    pub cells: Vec<CellReport>,
    pub family_summaries: Vec<FamilySummary>,
}

impl BenchmarkReport {
    /// Cells as CSV. The timing column is wall-clock and therefore the one
    /// field that legitimately varies between otherwise identical runs.
    pub fn cells_csv(&self) -> String {
        let mut out = String::from(
            "scenario,structure,family,truth,reps,fits_used,fit_failures,correct,rate,rate_se,mean_fit_seconds\n",
        );
        for c in &self.cells {
            let truth = match c.truth {
                Label::AD => "AD",
                Label::AI => "AI",
            };
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{:.6}\n",
                c.scenario,
                c.structure,
                c.family.token(),
                truth,
                c.reps,
                c.fits_used,
                c.fit_failures,
                c.correct,
                c.rate,
                c.rate_se,
                c.mean_fit_seconds
            ));
        }
        out
    }
}

struct RepOutcome {
    cell_idx: usize,
    family_idx: usize,
    fit_ok: bool,
    correct: bool,
    seconds: f64,
}

/// One repetition: generate, threshold, fit, classify the fitted gauge.
fn run_rep(
    cell: &ScenarioCell,
    family: Family,
    rep: usize,
    config: &BenchmarkConfig,
) -> Result<(bool, f64)> {
    let rep_tag = rep.to_string();
    let sid = stream_label(&[cell.scenario, cell.structure, family.token(), &rep_tag]);
    let mut rng = RngStream::new(config.seed, sid);
    let points = cell.generator.sample(config.n, &mut rng)?;
    let prepared = prepare(&points, &config.pipeline)?;
    let started = Instant::now();
    let fitted = fit(&prepared.exceedances, family, None, &FitConfig::default())?;
    let seconds = started.elapsed().as_secs_f64();
    if !fitted.converged {
        return Err(Error::numeric("fit did not converge"));
    }
    let gauge = fitted.build_gauge()?;
    let class = classify(&gauge, &Tolerances::default())?;
    Ok((class.label == cell.truth.label, seconds))
}

/// Runs the benchmark over the full scenario catalog.
pub fn run_benchmark(config: &BenchmarkConfig) -> Result<BenchmarkReport> {
    if config.reps == 0 || config.n < 100 {
        return Err(Error::domain("benchmark needs reps >= 1 and n >= 100"));
    }
    if config.families.is_empty() {
        return Err(Error::domain("benchmark needs at least one family"));
    }
    let catalog = scenario_catalog();
    let mut tasks: Vec<(usize, usize, usize)> = Vec::new();
    for cell_idx in 0..catalog.len() {
        for family_idx in 0..config.families.len() {
            for rep in 0..config.reps {
                tasks.push((cell_idx, family_idx, rep));
            }
        }
    }

    let execute = || -> Vec<RepOutcome> {
        tasks
            .par_iter()
            .map(|&(cell_idx, family_idx, rep)| {
                let outcome = run_rep(&catalog[cell_idx], config.families[family_idx], rep, config);
                match outcome {
                    Ok((correct, seconds)) => {
                        RepOutcome { cell_idx, family_idx, fit_ok: true, correct, seconds }
                    }
                    Err(_) => RepOutcome { cell_idx, family_idx, fit_ok: false, correct: false, seconds: 0.0 },
                }
            })
            .collect()
    };
    let outcomes = if config.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(config.threads)
            .build()
            .map_err(|e| Error::numeric(format!("thread pool: {e}")))?
            .install(execute)
    } else {
        execute()
    };

    let mut cells = Vec::new();
    for (cell_idx, cell) in catalog.iter().enumerate() {
        for (family_idx, &family) in config.families.iter().enumerate() {
            let mine: Vec<&RepOutcome> = outcomes
                .iter()
                .filter(|o| o.cell_idx == cell_idx && o.family_idx == family_idx)
                .collect();
            let fits_used = mine.iter().filter(|o| o.fit_ok).count();
            let correct = mine.iter().filter(|o| o.fit_ok && o.correct).count();
            let rate = if fits_used > 0 { correct as f64 / fits_used as f64 } else { f64::NAN };
            let rate_se = if fits_used > 0 {
                (rate * (1.0 - rate) / fits_used as f64).sqrt()
            } else {
                f64::NAN
            };
            let total_seconds: f64 = mine.iter().filter(|o| o.fit_ok).map(|o| o.seconds).sum();
            cells.push(CellReport {
                scenario: cell.scenario.to_string(),
                structure: cell.structure.to_string(),
                family,
                truth: cell.truth.label,
                reps: config.reps,
                fits_used,
                fit_failures: config.reps - fits_used,
                correct,
                rate,
                rate_se,
                mean_fit_seconds: if fits_used > 0 { total_seconds / fits_used as f64 } else { f64::NAN },
            });
        }
    }

    let mut family_summaries = Vec::new();
    for &family in &config.families {
        let rates: Vec<f64> = cells
            .iter()
            .filter(|c| c.family == family && c.rate.is_finite())
            .map(|c| c.rate)
            .collect();
        family_summaries.push(FamilySummary {
            family,
            cells: rates.len(),
            average_rate: if rates.is_empty() {
                f64::NAN
            } else {
                rates.iter().sum::<f64>() / rates.len() as f64
            },
        });
    }

    Ok(BenchmarkReport { config: config.clone(), cells, family_summaries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::sample_logistic_copula;

    #[test]
    fn pipeline_produces_threshold_and_exceedances() {
        let mut rng = RngStream::new(21, 0);
        let pts = sample_logistic_copula(4000, 0.5, &mut rng).unwrap();
        let prepared = prepare(&pts, &PipelineSettings::default()).unwrap();
        assert!(prepared.exceedances.len() > 100);
        assert!((prepared.p_exceed - 0.05).abs() < 0.01);
        for i in 0..prepared.exceedances.len() {
            assert!(prepared.exceedances.r[i] > prepared.exceedances.t[i]);
        }
    }

    #[test]
    fn mini_benchmark_reports_every_cell() {
        let config = BenchmarkConfig {
            n: 1500,
            reps: 2,
            seed: 3,
            families: vec![Family::MaxMin],
            pipeline: PipelineSettings::default(),
            threads: 2,
        };
        let report = run_benchmark(&config).unwrap();
        assert_eq!(report.cells.len(), 10);
        for cell in &report.cells {
            assert_eq!(cell.reps, 2);
            assert_eq!(cell.fits_used + cell.fit_failures, 2);
            if cell.fits_used > 0 {
                assert!((0.0..=1.0).contains(&cell.rate));
                assert!(cell.mean_fit_seconds >= 0.0);
            }
        }
        assert_eq!(report.family_summaries.len(), 1);
        let csv = report.cells_csv();
        assert!(csv.starts_with("scenario,structure,family,truth,"));
        assert_eq!(csv.lines().count(), 11);
    }

    #[test]
    fn benchmark_outcomes_do_not_depend_on_thread_count() {
        let base = BenchmarkConfig {
            n: 1200,
            reps: 2,
            seed: 9,
            families: vec![Family::MaxMin],
            pipeline: PipelineSettings::default(),
            threads: 1,
        };
        let serial = run_benchmark(&base).unwrap();
        let parallel = run_benchmark(&BenchmarkConfig { threads: 4, ..base.clone() }).unwrap();
        for (a, b) in serial.cells.iter().zip(&parallel.cells) {
            assert_eq!(a.scenario, b.scenario);
            assert_eq!(a.family, b.family);
            assert_eq!(a.correct, b.correct, "{} {} {}", a.scenario, a.structure, a.family.token());
            assert_eq!(a.fits_used, b.fits_used);
        }
    }
}
