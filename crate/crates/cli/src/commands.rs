//! Subcommand implementations.
//!
//! Every command resolves its settings in the same order: command-line flag,
//! then config-file value, then built-in default. Validation problems exit
//! with code 2, numeric failures mid-run with code 3 (see `main`).

use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use serde::Serialize;

use tailgauge::classify::{classify, DependenceClass, Tolerances};
use tailgauge::gauge::{level_set_points, write_level_set_csv, Gauge};
use tailgauge::inference::{fit, Family, FitConfig, FitResult, ParamEstimate};
use tailgauge::rng::{stream_label, RngStream};
use tailgauge::study::{prepare, run_benchmark, BenchmarkConfig, PipelineSettings};
use tailgauge::synth::{
    read_sample_csv, scenario_catalog, write_metadata_json, write_sample_csv, SampleMetadata,
};
use tailgauge::tailsim::{
    estimate_chi_m, estimate_region_prob, write_chi_plot_csv, ChiPlotPoint, FittedModel, RegionSpec,
};
use tailgauge::{Error, Result};

use crate::config::{pick, pick_opt, RunConfig};

/// Parses a `--family` token for clap.
pub fn parse_family(s: &str) -> std::result::Result<Family, String> {
    Family::parse_token(s).map_err(|e| e.to_string())
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    Ok(fs::write(path, text)?)
}

// ---------------------------------------------------------------- gen ----

#[derive(Debug, Args)]
pub struct GenArgs {
    /// Scenario name from the benchmark catalog (e.g. st.d.AD, w.d.AI).
    #[arg(long)]
    pub scenario: Option<String>,
    /// Generator structure within the scenario (e.g. logistic, dirichlet).
    #[arg(long)]
    pub structure: Option<String>,
    /// Sample size.
    #[arg(long)]
    pub n: Option<usize>,
    /// Master seed; the same seed reproduces the file byte for byte.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output CSV path; a .json metadata sidecar is written next to it.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON config file supplying defaults for the flags above.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

pub fn cmd_gen(args: &GenArgs) -> Result<()> {
    let file = RunConfig::load(args.config.as_deref())?;
    file.ensure_command("gen")?;
    let scenario = pick_opt(args.scenario.clone(), file.scenario)
        .ok_or_else(|| Error::Domain("--scenario is required".into()))?;
    let structure = pick_opt(args.structure.clone(), file.structure)
        .ok_or_else(|| Error::Domain("--structure is required".into()))?;
    let n = pick(args.n, file.n, 5000);
    let seed = pick(args.seed, file.seed, 1);
    let out = pick(args.out.clone(), file.out, PathBuf::from("sample.csv"));

    let catalog = scenario_catalog();
    let cell = catalog
        .iter()
        .find(|c| c.scenario == scenario && c.structure == structure)
        .ok_or_else(|| {
            let names: Vec<String> =
                catalog.iter().map(|c| format!("{}/{}", c.scenario, c.structure)).collect();
            Error::Domain(format!(
                "no catalog cell named {scenario}/{structure}; available: {}",
                names.join(", ")
            ))
        })?;

    let mut rng = RngStream::new(seed, stream_label(&["gen", &scenario, &structure]));
    let points = cell.generator.sample(n, &mut rng)?;
    write_sample_csv(&out, &points)?;
    let sidecar = out.with_extension("json");
    write_metadata_json(&sidecar, &SampleMetadata::new(&cell.generator, seed, cell.truth))?;
    println!(
        "wrote {n} points from {} {} to {} (metadata: {})",
        cell.generator.tag(),
        cell.generator.parameters(),
        out.display(),
        sidecar.display()
    );
    Ok(())
}

// ---------------------------------------------------------------- fit ----

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Input CSV with header x,y on exponential margins (or use --ranks).
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Rank-transform each margin to standard exponential before fitting.
    #[arg(long)]
    pub ranks: bool,
    /// Radial quantile level of the rolling threshold.
    #[arg(long)]
    pub tau: Option<f64>,
    /// Gauge family to fit; repeat the flag to fit several (default: all).
    #[arg(long = "family", value_parser = parse_family)]
    pub families: Vec<Family>,
    /// Output directory for per-family fit JSONs, ranking.csv and model.json.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON config file supplying defaults for the flags above.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// Replaces each margin by `-ln(1 - r/(n+1))` of its within-margin ranks,
/// giving standard exponential margins regardless of the original scale.
fn rank_to_exponential(points: &[(f64, f64)]) -> Result<Vec<(f64, f64)>> {
    let n = points.len();
    let margin = |vals: Vec<f64>| -> Result<Vec<f64>> {
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(Error::Parse("non-finite value in input sample".into()));
        }
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by(|&a, &b| vals[a].partial_cmp(&vals[b]).expect("finite values"));
        let mut out = vec![0.0; n];
        for (pos, &i) in idx.iter().enumerate() {
            let u = (pos + 1) as f64 / (n as f64 + 1.0);
            out[i] = -(-u).ln_1p();
        }
        Ok(out)
    };
    let x = margin(points.iter().map(|p| p.0).collect())?;
    let y = margin(points.iter().map(|p| p.1).collect())?;
    Ok(x.into_iter().zip(y).collect())
}

pub fn cmd_fit(args: &FitArgs) -> Result<()> {
    let file = RunConfig::load(args.config.as_deref())?;
    file.ensure_command("fit")?;
    let input = pick_opt(args.input.clone(), file.input)
        .ok_or_else(|| Error::Domain("--input is required".into()))?;
    let tau = pick(args.tau, file.tau, 0.95);
    let families = if args.families.is_empty() {
        file.families.unwrap_or_else(|| Family::ALL.to_vec())
    } else {
        args.families.clone()
    };
    let out_dir = pick(args.out.clone(), file.out, PathBuf::from("."));
    let ranks = args.ranks || file.ranks.unwrap_or(false);

    let mut points = read_sample_csv(&input)?;
    if ranks {
        points = rank_to_exponential(&points)?;
    }
    let settings = PipelineSettings { tau, ..PipelineSettings::default() };
    let prepared = prepare(&points, &settings)?;
    println!(
        "{} points, {} exceedances above the tau = {tau} rolling threshold",
        points.len(),
        prepared.exceedances.len()
    );

    fs::create_dir_all(&out_dir)?;
    let fit_cfg = FitConfig { compute_se: true, ..FitConfig::default() };
    let mut results: Vec<FitResult> = Vec::new();
    for &family in &families {
        match fit(&prepared.exceedances, family, None, &fit_cfg) {
            Ok(res) => {
                if !res.converged {
                    eprintln!(
                        "warning: {} did not converge: {}",
                        family.token(),
                        res.message.as_deref().unwrap_or("no diagnostic")
                    );
                }
                write_json(&out_dir.join(format!("fit_{}.json", family.token())), &res)?;
                results.push(res);
            }
            Err(e) => eprintln!("warning: {} fit failed: {e}", family.token()),
        }
    }
    if results.is_empty() {
        return Err(Error::Numeric("every requested family failed to fit".into()));
    }

    // AIC ranking: converged fits first, best AIC on top.
    results.sort_by(|a, b| {
        b.converged
            .cmp(&a.converged)
            .then(a.aic.partial_cmp(&b.aic).expect("finite AIC"))
    });
    let mut ranking = String::from("family,converged,n_params,nll,aic\n");
    println!("family    converged  nll           aic");
    for res in &results {
        ranking.push_str(&format!(
            "{},{},{},{},{}\n",
            res.family.token(),
            res.converged,
            res.family.n_params(),
            res.nll,
            res.aic
        ));
        println!(
            "{:<9} {:<10} {:<13.4} {:.4}",
            res.family.token(),
            res.converged,
            res.nll,
            res.aic
        );
    }
    fs::write(out_dir.join("ranking.csv"), ranking)?;

    match results.iter().find(|r| r.converged) {
        Some(best) => {
            let model = FittedModel::from_fit(
                best,
                &prepared.exceedances,
                prepared.threshold.clone(),
                prepared.p_exceed,
            )?;
            write_json(&out_dir.join("model.json"), &model)?;
            println!(
                "best family by AIC: {}; wrote fit_*.json, ranking.csv and model.json to {}",
                best.family.token(),
                out_dir.display()
            );
        }
        None => eprintln!("warning: no family converged; model.json not written"),
    }
    Ok(())
}

// ----------------------------------------------------------- classify ----

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    /// Fit JSON produced by the fit command.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Optional output path for the verdict JSON (stdout otherwise).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON config file supplying defaults for the flags above.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct ClassifyOutput {
    family: Family,
    estimates: Vec<ParamEstimate>,
    class: DependenceClass,
}

pub fn cmd_classify(args: &ClassifyArgs) -> Result<()> {
    let file = RunConfig::load(args.config.as_deref())?;
    file.ensure_command("classify")?;
    let input = pick_opt(args.input.clone(), file.input)
        .ok_or_else(|| Error::Domain("--input is required".into()))?;
    let fitres: FitResult = read_json(&input)?;
    let gauge = fitres.build_gauge()?;
    let class = classify(&gauge, &Tolerances::default())?;

    match (class.chi_lower, class.chi_upper) {
        (Some(lo), Some(hi)) => println!(
            "{:?} via {:?}, chi in [{lo:.4}, {hi:.4}]",
            class.label, class.mechanism
        ),
        _ => println!("{:?} via {:?}", class.label, class.mechanism),
    }
    let output = ClassifyOutput { family: fitres.family, estimates: fitres.estimates, class };
    match pick_opt(args.out.clone(), file.out) {
        Some(path) => {
            write_json(&path, &output)?;
            println!("wrote {}", path.display());
        }
        None => println!(
            "{}",
            serde_json::to_string_pretty(&output).map_err(|e| Error::Parse(e.to_string()))?
        ),
    }
    Ok(())
}

// ---------------------------------------------------------- benchmark ----

#[derive(Debug, Args)]
pub struct BenchmarkArgs {
    /// Repetitions per catalog cell and family.
    #[arg(long)]
    pub reps: Option<usize>,
    /// Sample size per repetition.
    #[arg(long)]
    pub n: Option<usize>,
    /// Master seed; per-repetition streams are derived from it.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Radial quantile level of the rolling threshold.
    #[arg(long)]
    pub tau: Option<f64>,
    /// Worker threads (0 = library default).
    #[arg(long)]
    pub threads: Option<usize>,
    /// Gauge family to benchmark; repeat to add more.
    #[arg(long = "family", value_parser = parse_family)]
    pub families: Vec<Family>,
    /// Output prefix; writes <out>.csv and <out>.json.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON config file supplying defaults for the flags above.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

pub fn cmd_benchmark(args: &BenchmarkArgs) -> Result<()> {
    let file = RunConfig::load(args.config.as_deref())?;
    file.ensure_command("benchmark")?;
    let defaults = BenchmarkConfig::default();
    let families = if args.families.is_empty() {
        file.families.unwrap_or(defaults.families)
    } else {
        args.families.clone()
    };
    let config = BenchmarkConfig {
        n: pick(args.n, file.n, defaults.n),
        reps: pick(args.reps, file.reps, defaults.reps),
        seed: pick(args.seed, file.seed, defaults.seed),
        families,
        pipeline: PipelineSettings {
            tau: pick(args.tau, file.tau, defaults.pipeline.tau),
            ..defaults.pipeline
        },
        threads: pick(args.threads, file.threads, defaults.threads),
    };
    if config.reps == 0 {
        return Err(Error::Domain("--reps must be at least 1".into()));
    }
    let out = pick(args.out.clone(), file.out, PathBuf::from("benchmark"));

    let report = run_benchmark(&config)?;
    let csv_path = out.with_extension("csv");
    let json_path = out.with_extension("json");
    fs::write(&csv_path, report.cells_csv())?;
    write_json(&json_path, &report)?;

    print!("{}", report.cells_csv());
    for s in &report.family_summaries {
        println!(
            "{}: average correct-classification rate {:.3} over {} cells",
            s.family.token(),
            s.average_rate,
            s.cells
        );
    }
    println!("wrote {} and {}", csv_path.display(), json_path.display());
    Ok(())
}

// ----------------------------------------------------------- levelset ----

#[derive(Debug, Args)]
pub struct LevelsetArgs {
    /// Fit JSON whose fitted gauge supplies the level set.
    #[arg(long, conflicts_with_all = ["family", "params"])]
    pub input: Option<PathBuf>,
    /// Gauge family to build directly (with --params).
    #[arg(long, value_parser = parse_family)]
    pub family: Option<Family>,
    /// Comma-separated gauge parameters for --family (radial shape excluded).
    #[arg(long, value_delimiter = ',')]
    pub params: Vec<f64>,
    /// Number of angular grid points.
    #[arg(long)]
    pub grid: Option<usize>,
    /// Output CSV path.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON config file supplying defaults for the flags above.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

pub fn cmd_levelset(args: &LevelsetArgs) -> Result<()> {
    let file = RunConfig::load(args.config.as_deref())?;
    file.ensure_command("levelset")?;
    let grid = pick(args.grid, file.grid, 201);
    if grid < 2 {
        return Err(Error::Domain("--grid needs at least 2 points".into()));
    }
    let out = pick(args.out.clone(), file.out, PathBuf::from("levelset.csv"));

    let gauge: Gauge = if let Some(path) = pick_opt(args.input.clone(), file.input) {
        let fitres: FitResult = read_json(&path)?;
        fitres.build_gauge()?
    } else {
        let family = match (args.family, &file.families) {
            (Some(f), _) => f,
            (None, Some(fs)) if fs.len() == 1 => fs[0],
            _ => return Err(Error::Domain("need --input, or --family with --params".into())),
        };
        let params = if args.params.is_empty() {
            file.params.clone().unwrap_or_default()
        } else {
            args.params.clone()
        };
        family.build_gauge(&params)?
    };

    let points = level_set_points(&gauge, grid);
    let mut out_file = fs::File::create(&out)?;
    write_level_set_csv(&mut out_file, &points)?;
    println!("wrote {} level-set rows to {}", points.len(), out.display());
    Ok(())
}

// ------------------------------------------------------------ chiplot ----

#[derive(Debug, Args)]
pub struct ChiplotArgs {
    /// Model JSON (model.json from the fit command).
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Comma-separated quantile levels in (0, 1).
    #[arg(long = "u-grid", value_delimiter = ',')]
    pub u_grid: Vec<f64>,
    /// Conditional simulations per level.
    #[arg(long = "n-sim")]
    pub n_sim: Option<usize>,
    /// Simulation seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output CSV path.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON config file supplying defaults for the flags above.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

pub fn cmd_chiplot(args: &ChiplotArgs) -> Result<()> {
    let file = RunConfig::load(args.config.as_deref())?;
    file.ensure_command("chiplot")?;
    let input = pick_opt(args.input.clone(), file.input)
        .ok_or_else(|| Error::Domain("--input is required".into()))?;
    let u_grid = if args.u_grid.is_empty() {
        file.u_grid.unwrap_or_else(|| vec![0.9, 0.95, 0.99, 0.999, 0.9999])
    } else {
        args.u_grid.clone()
    };
    let n_sim = pick(args.n_sim, file.n_sim, 100_000);
    let seed = pick(args.seed, file.seed, 1);
    let out = pick(args.out.clone(), file.out, PathBuf::from("chiplot.csv"));

    let model: FittedModel = read_json(&input)?;
    let mut rng = RngStream::new(seed, stream_label(&["chiplot"]));
    let mut rows = Vec::with_capacity(u_grid.len());
    let mut unreachable = 0usize;
    for &u in &u_grid {
        match estimate_chi_m(&model, u, n_sim, &mut rng) {
            Ok((chi, se)) => rows.push(ChiPlotPoint { u, chi_m_hat: chi, mc_se: se }),
            Err(e) => {
                eprintln!("warning: u = {u} unreachable: {e}");
                rows.push(ChiPlotPoint { u, chi_m_hat: f64::NAN, mc_se: f64::NAN });
                unreachable += 1;
            }
        }
    }
    write_chi_plot_csv(&out, &rows)?;
    println!("wrote {} rows to {} ({unreachable} unreachable)", rows.len(), out.display());
    Ok(())
}

// --------------------------------------------------------------- prob ----

#[derive(Debug, Args)]
pub struct ProbArgs {
    /// Model JSON (model.json from the fit command).
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Lower x edge of the region (exponential margins).
    #[arg(long = "x-lo")]
    pub x_lo: Option<f64>,
    /// Upper x edge; "inf" for an unbounded edge.
    #[arg(long = "x-hi")]
    pub x_hi: Option<f64>,
    /// Lower y edge of the region.
    #[arg(long = "y-lo")]
    pub y_lo: Option<f64>,
    /// Upper y edge; "inf" for an unbounded edge.
    #[arg(long = "y-hi")]
    pub y_hi: Option<f64>,
    /// Conditional simulations.
    #[arg(long = "n-sim")]
    pub n_sim: Option<usize>,
    /// Simulation seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Optional output path for the estimate JSON (stdout always).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON config file supplying defaults for the flags above.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

pub fn cmd_prob(args: &ProbArgs) -> Result<()> {
    let file = RunConfig::load(args.config.as_deref())?;
    file.ensure_command("prob")?;
    let input = pick_opt(args.input.clone(), file.input)
        .ok_or_else(|| Error::Domain("--input is required".into()))?;
    let x_lo = pick_opt(args.x_lo, file.x_lo)
        .ok_or_else(|| Error::Domain("--x-lo is required".into()))?;
    let y_lo = pick_opt(args.y_lo, file.y_lo)
        .ok_or_else(|| Error::Domain("--y-lo is required".into()))?;
    let x_hi = pick(args.x_hi, file.x_hi, f64::INFINITY);
    let y_hi = pick(args.y_hi, file.y_hi, f64::INFINITY);
    let n_sim = pick(args.n_sim, file.n_sim, 100_000);
    let seed = pick(args.seed, file.seed, 1);

    let region = RegionSpec::new(x_lo, x_hi, y_lo, y_hi)?;
    let model: FittedModel = read_json(&input)?;
    let mut rng = RngStream::new(seed, stream_label(&["prob"]));
    let estimate = estimate_region_prob(&model, &region, n_sim, &mut rng)?;
    let json =
        serde_json::to_string_pretty(&estimate).map_err(|e| Error::Parse(e.to_string()))?;
    println!("{json}");
    if let Some(path) = pick_opt(args.out.clone(), file.out) {
        fs::write(&path, json)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}
