//! CLI command implementations. Each command returns the process exit code:
//! 0 on success, 3 when a fit completes but fails the convergence gate
//! (outputs are still written). Config and data problems surface as errors
//! and map to exit codes 1 and 2 through [`Error::exit_code`].

use std::fs;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::comparison::{dic_delta_annotation, fit_summary, pooled_log_lik_matrix, FitSummary};
use crate::config::{load_toml, FitFileConfig, SimulateFileConfig, StudyFileConfig};
use crate::data::Dataset;
use crate::diagnostics::{
    baseline_hazard_curve, baseline_survival_curve, beta_summaries, default_grid,
    partition_posterior, psrf_report, CoefficientSummary, GridCurve, PartitionPosterior,
    PsrfReport,
};
use crate::error::{Error, Result};
use crate::rjmcmc::{run_chain, MoveTallies, SampleChain};
use crate::samples::{read_samples, write_samples, SAMPLES_FORMAT_VERSION};
use crate::simulate::{run_scenario_study, simulate_dataset, FitSpec, StudyOptions};

const CRATE_VERSION: &str = env!("CARGO_PKG_VERSION");

pub struct FitArgs {
    pub config: PathBuf,
    pub data: PathBuf,
    pub out: PathBuf,
    pub seed: Option<u64>,
    pub chains: Option<usize>,
}

pub struct SimulateArgs {
    pub config: PathBuf,
    pub out: PathBuf,
    pub seed: Option<u64>,
}

pub struct StudyArgs {
    pub config: PathBuf,
    pub out: PathBuf,
    pub seed: Option<u64>,
}

pub struct CompareArgs {
    pub data: PathBuf,
    pub out: PathBuf,
    pub fits: Vec<PathBuf>,
}

pub struct SummarizeArgs {
    pub data: PathBuf,
    pub fit: PathBuf,
    pub out: PathBuf,
    pub grid_points: Option<usize>,
    pub level: Option<f64>,
    pub bins: Option<usize>,
}

fn io_err(path: &Path, e: std::io::Error) -> Error {
    Error::io(path.display().to_string(), e)
}

fn ensure_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| io_err(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::invariant(format!("serializing {}: {e}", path.display())))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| io_err(path, e))
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    let file = fs::File::create(path).map_err(|e| io_err(path, e))?;
    Ok(csv::Writer::from_writer(file))
}

fn finish_csv(mut w: csv::Writer<fs::File>, path: &Path) -> Result<()> {
    w.flush().map_err(|e| io_err(path, e))
}

fn fmt(v: f64) -> String {
    format!("{v}")
}

fn write_curve_csv(path: &Path, curve: &GridCurve) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["t", "mean", "lower", "upper"])
        .map_err(|e| Error::data(format!("{}: {e}", path.display())))?;
    for g in 0..curve.grid.len() {
        w.write_record([
            fmt(curve.grid[g]),
            fmt(curve.mean[g]),
            fmt(curve.lower[g]),
            fmt(curve.upper[g]),
        ])
        .map_err(|e| Error::data(format!("{}: {e}", path.display())))?;
    }
    finish_csv(w, path)
}

fn write_partition_csvs(dir: &Path, post: &PartitionPosterior) -> Result<(PathBuf, PathBuf)> {
    let j_path = dir.join("partition_j.csv");
    let total = post.n_samples() as f64;
    let mut w = csv_writer(&j_path)?;
    w.write_record(["j", "count", "proportion"])
        .map_err(|e| Error::data(format!("{}: {e}", j_path.display())))?;
    for (j, &count) in post.j_counts.iter().enumerate() {
        w.write_record([j.to_string(), count.to_string(), fmt(count as f64 / total)])
            .map_err(|e| Error::data(format!("{}: {e}", j_path.display())))?;
    }
    finish_csv(w, &j_path)?;

    let s_path = dir.join("partition_splits.csv");
    let mut w = csv_writer(&s_path)?;
    w.write_record(["bin_left", "bin_right", "mass"])
        .map_err(|e| Error::data(format!("{}: {e}", s_path.display())))?;
    for (k, &mass) in post.split_hist.iter().enumerate() {
        let (left, right) = post.bin_edges(k);
        w.write_record([fmt(left), fmt(right), fmt(mass)])
            .map_err(|e| Error::data(format!("{}: {e}", s_path.display())))?;
    }
    finish_csv(w, &s_path)?;
    Ok((j_path, s_path))
}

fn write_beta_csv(path: &Path, summaries: &[CoefficientSummary]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["coefficient", "mean", "median", "lower", "upper", "level"])
        .map_err(|e| Error::data(format!("{}: {e}", path.display())))?;
    for s in summaries {
        w.write_record([
            s.name.clone(),
            fmt(s.mean),
            fmt(s.median),
            fmt(s.lower),
            fmt(s.upper),
            fmt(s.level),
        ])
        .map_err(|e| Error::data(format!("{}: {e}", path.display())))?;
    }
    finish_csv(w, path)
}

fn write_psrf_csv(path: &Path, report: Option<&PsrfReport>) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["parameter", "psrf", "pass"])
        .map_err(|e| Error::data(format!("{}: {e}", path.display())))?;
    if let Some(report) = report {
        for row in &report.rows {
            let shown = match row.psrf {
                Some(v) => fmt(v),
                None => String::new(),
            };
            w.write_record([row.param.clone(), shown, row.pass.to_string()])
                .map_err(|e| Error::data(format!("{}: {e}", path.display())))?;
        }
    }
    finish_csv(w, path)
}

fn write_cpo_csv(path: &Path, summary: &FitSummary) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["subject", "cpo", "log_cpo"])
        .map_err(|e| Error::data(format!("{}: {e}", path.display())))?;
    for (i, (&cpo, &log_cpo)) in summary.cpo.iter().zip(&summary.log_cpo).enumerate() {
        w.write_record([(i + 1).to_string(), fmt(cpo), fmt(log_cpo)])
            .map_err(|e| Error::data(format!("{}: {e}", path.display())))?;
    }
    finish_csv(w, path)
}

#[derive(Serialize, Deserialize)]
struct ChainInfo {
    file: String,
    seed: u64,
    stream: u64,
    retained: usize,
    acceptance: MoveTallies,
}

#[derive(Serialize, Deserialize)]
struct FitManifest {
    command: String,
    crate_version: String,
    samples_format: u32,
    data_path: String,
    data_fingerprint: String,
    n_subjects: usize,
    n_events: usize,
    covariates: Vec<String>,
    s_max: f64,
    gate_passed: Option<bool>,
    config: FitFileConfig,
    chains: Vec<ChainInfo>,
    outputs: Vec<String>,
}

/// Serializable PSRF rows for fit_summary.json; infinities are kept as
/// strings because JSON has no representation for them.
#[derive(Serialize)]
struct PsrfRowOut {
    parameter: String,
    psrf: String,
    pass: bool,
}

#[derive(Serialize)]
struct FitSummaryOut {
    dic: f64,
    lpml: f64,
    n_samples_used: usize,
    gate_passed: Option<bool>,
    psrf: Vec<PsrfRowOut>,
}

fn load_fit_dataset(cfg: &FitFileConfig, data_path: &Path) -> Result<Dataset> {
    let data = Dataset::read_csv(data_path)?;
    if cfg.covariates.is_empty() {
        Ok(data)
    } else {
        data.select_covariates(&cfg.covariates)
    }
}

/// Fit the configured model: run the chains, write samples, diagnostics,
/// comparison statistics, and summary curves. Exit code 3 when the PSRF
/// gate fails (after writing everything).
pub fn cmd_fit(args: &FitArgs) -> Result<i32> {
    let mut cfg: FitFileConfig = load_toml(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(chains) = args.chains {
        cfg.chains = chains;
    }
    cfg.validate()?;
    let data = load_fit_dataset(&cfg, &args.data)?;
    let hp = cfg.hyperparameters(data.y_max());
    hp.validate()?;

    // All inputs are valid; now it is safe to create outputs.
    ensure_dir(&args.out)?;

    let n_chains = cfg.chains;
    let mut slots: Vec<Option<Result<SampleChain>>> = Vec::new();
    slots.resize_with(n_chains, || None);
    std::thread::scope(|scope| {
        for (c, slot) in slots.iter_mut().enumerate() {
            let cfg = &cfg;
            let data = &data;
            let hp = &hp;
            scope.spawn(move || {
                *slot = Some(
                    cfg.sampler(c as u64)
                        .and_then(|s| run_chain(data, hp, &s, None)),
                );
            });
        }
    });
    let chains: Vec<SampleChain> = slots
        .into_iter()
        .map(|s| s.expect("chain thread finished"))
        .collect::<Result<_>>()?;

    let mut outputs = Vec::new();
    let mut chain_infos = Vec::new();
    for (c, chain) in chains.iter().enumerate() {
        let name = format!("chain_{c}.samples");
        write_samples(&args.out.join(&name), chain)?;
        chain_infos.push(ChainInfo {
            file: name.clone(),
            seed: chain.seed,
            stream: chain.stream,
            retained: chain.len(),
            acceptance: chain.acceptance,
        });
        outputs.push(name);
    }

    let report = if n_chains >= 2 {
        Some(psrf_report(&chains, data.covariate_names())?)
    } else {
        None
    };
    let gate_passed = report.as_ref().map(|r| r.gate_passes());
    write_psrf_csv(&args.out.join("psrf.csv"), report.as_ref())?;
    outputs.push("psrf.csv".into());

    let summary = fit_summary(&data, &chains)?;
    write_cpo_csv(&args.out.join("cpo.csv"), &summary)?;
    outputs.push("cpo.csv".into());

    let psrf_rows = report
        .as_ref()
        .map(|r| {
            r.rows
                .iter()
                .map(|row| PsrfRowOut {
                    parameter: row.param.clone(),
                    psrf: row.psrf.map(fmt).unwrap_or_else(|| "skipped".into()),
                    pass: row.pass,
                })
                .collect()
        })
        .unwrap_or_default();
    write_json(
        &args.out.join("fit_summary.json"),
        &FitSummaryOut {
            dic: summary.dic,
            lpml: summary.lpml,
            n_samples_used: summary.n_samples_used,
            gate_passed,
            psrf: psrf_rows,
        },
    )?;
    outputs.push("fit_summary.json".into());

    write_beta_csv(
        &args.out.join("beta_summary.csv"),
        &beta_summaries(&chains, &data, cfg.level)?,
    )?;
    outputs.push("beta_summary.csv".into());

    let hazard_grid = default_grid(hp.s_max, cfg.grid_points);
    write_curve_csv(
        &args.out.join("hazard.csv"),
        &baseline_hazard_curve(&chains, &hazard_grid, cfg.level)?,
    )?;
    outputs.push("hazard.csv".into());
    let mut survival_grid = vec![0.0];
    survival_grid.extend_from_slice(&hazard_grid);
    write_curve_csv(
        &args.out.join("survival.csv"),
        &baseline_survival_curve(&chains, &survival_grid, cfg.level)?,
    )?;
    outputs.push("survival.csv".into());

    let post = partition_posterior(&chains, cfg.n_bins)?;
    write_partition_csvs(&args.out, &post)?;
    outputs.push("partition_j.csv".into());
    outputs.push("partition_splits.csv".into());

    outputs.push("manifest.json".into());
    write_json(
        &args.out.join("manifest.json"),
        &FitManifest {
            command: "fit".into(),
            crate_version: CRATE_VERSION.into(),
            samples_format: SAMPLES_FORMAT_VERSION,
            data_path: args.data.display().to_string(),
            data_fingerprint: data.fingerprint(),
            n_subjects: data.n(),
            n_events: data.event_count(),
            covariates: data.covariate_names().to_vec(),
            s_max: hp.s_max,
            gate_passed,
            config: cfg,
            chains: chain_infos,
            outputs,
        },
    )?;

    Ok(if gate_passed == Some(false) { 3 } else { 0 })
}

#[derive(Serialize)]
struct SimulateManifest {
    command: String,
    crate_version: String,
    scenario: String,
    realized_censoring: f64,
    data_fingerprint: String,
    config: SimulateFileConfig,
    outputs: Vec<String>,
}

/// Simulate one dataset and write it as CSV.
pub fn cmd_simulate(args: &SimulateArgs) -> Result<i32> {
    let mut cfg: SimulateFileConfig = load_toml(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    let sc = cfg.scenario_config()?;
    // Same stream convention as study replicate 0, so `simulate` with the
    // study's seed reproduces its first dataset.
    let mut rng = ChaCha8Rng::seed_from_u64(sc.seed);
    rng.set_stream(0);
    let data = simulate_dataset(&sc, &mut rng)?;

    ensure_dir(&args.out)?;
    let data_path = args.out.join("data.csv");
    data.write_csv(&data_path)?;
    write_json(
        &args.out.join("manifest.json"),
        &SimulateManifest {
            command: "simulate".into(),
            crate_version: CRATE_VERSION.into(),
            scenario: sc.name.clone(),
            realized_censoring: data.censoring_rate(),
            data_fingerprint: data.fingerprint(),
            config: cfg,
            outputs: vec!["data.csv".into(), "manifest.json".into()],
        },
    )?;
    Ok(0)
}

#[derive(Serialize)]
struct StudyManifest {
    command: String,
    crate_version: String,
    scenario: String,
    n_datasets: usize,
    excluded_replicates: Vec<usize>,
    excluded_count: usize,
    config: StudyFileConfig,
    outputs: Vec<String>,
}

/// Run a replicate study and write record/aggregate/gate tables.
pub fn cmd_study(args: &StudyArgs) -> Result<i32> {
    let mut cfg: StudyFileConfig = load_toml(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    let sc = cfg.scenario_config()?;
    let fits: Vec<FitSpec> = cfg
        .models
        .iter()
        .map(|m| -> Result<FitSpec> {
            let fc = cfg.fit_config(m);
            fc.validate()?;
            Ok(FitSpec {
                label: m.clone(),
                scheme: fc.scheme()?,
                hyper: fc.hyperparameters(1.0),
                sampler: fc.sampler(0)?,
                n_chains: fc.chains,
            })
        })
        .collect::<Result<_>>()?;
    let opts = StudyOptions {
        level: cfg.level,
        hazard_grid: None,
    };
    let study = run_scenario_study(&sc, cfg.n_datasets, &fits, &opts)?;

    ensure_dir(&args.out)?;
    let rec_path = args.out.join("study_records.csv");
    let mut w = csv_writer(&rec_path)?;
    w.write_record([
        "scenario",
        "replicate",
        "model",
        "coefficient",
        "estimate",
        "lower",
        "upper",
        "covered",
        "width",
    ])
    .map_err(|e| Error::data(format!("{}: {e}", rec_path.display())))?;
    for r in &study.records {
        w.write_record([
            r.scenario.clone(),
            r.replicate.to_string(),
            r.model.clone(),
            r.coefficient.clone(),
            fmt(r.estimate),
            fmt(r.lower),
            fmt(r.upper),
            r.covered.to_string(),
            fmt(r.width),
        ])
        .map_err(|e| Error::data(format!("{}: {e}", rec_path.display())))?;
    }
    finish_csv(w, &rec_path)?;

    let agg_path = args.out.join("study_aggregates.csv");
    let mut w = csv_writer(&agg_path)?;
    w.write_record([
        "model",
        "coefficient",
        "truth",
        "percent_bias",
        "coverage",
        "relative_width",
        "n_used",
    ])
    .map_err(|e| Error::data(format!("{}: {e}", agg_path.display())))?;
    for a in &study.aggregates {
        w.write_record([
            a.model.clone(),
            a.coefficient.clone(),
            fmt(a.truth),
            fmt(a.percent_bias),
            fmt(a.coverage),
            fmt(a.relative_width),
            a.n_used.to_string(),
        ])
        .map_err(|e| Error::data(format!("{}: {e}", agg_path.display())))?;
    }
    finish_csv(w, &agg_path)?;

    let gate_path = args.out.join("study_gates.csv");
    let mut w = csv_writer(&gate_path)?;
    w.write_record(["replicate", "model", "passed", "worst_psrf"])
        .map_err(|e| Error::data(format!("{}: {e}", gate_path.display())))?;
    for g in &study.gates {
        w.write_record([
            g.replicate.to_string(),
            g.model.clone(),
            g.passed.to_string(),
            fmt(g.worst_psrf),
        ])
        .map_err(|e| Error::data(format!("{}: {e}", gate_path.display())))?;
    }
    finish_csv(w, &gate_path)?;

    write_json(
        &args.out.join("manifest.json"),
        &StudyManifest {
            command: "study".into(),
            crate_version: CRATE_VERSION.into(),
            scenario: study.scenario.clone(),
            n_datasets: cfg.n_datasets,
            excluded_replicates: study.excluded_replicates.clone(),
            excluded_count: study.excluded_count(),
            config: cfg,
            outputs: vec![
                "study_records.csv".into(),
                "study_aggregates.csv".into(),
                "study_gates.csv".into(),
                "manifest.json".into(),
            ],
        },
    )?;
    Ok(0)
}

fn read_fit_dir(dir: &Path) -> Result<(FitManifest, Vec<SampleChain>)> {
    let manifest_path = dir.join("manifest.json");
    let text = fs::read_to_string(&manifest_path).map_err(|e| io_err(&manifest_path, e))?;
    let manifest: FitManifest = serde_json::from_str(&text)
        .map_err(|e| Error::data(format!("{}: {e}", manifest_path.display())))?;
    let mut names: Vec<String> = fs::read_dir(dir)
        .map_err(|e| io_err(dir, e))?
        .filter_map(|entry| entry.ok())
        .map(|entry| entry.file_name().to_string_lossy().into_owned())
        .filter(|name| name.starts_with("chain_") && name.ends_with(".samples"))
        .collect();
    names.sort();
    if names.is_empty() {
        return Err(Error::config(format!(
            "no chain_*.samples files in {}",
            dir.display()
        )));
    }
    let chains = names
        .iter()
        .map(|name| read_samples(&dir.join(name)))
        .collect::<Result<Vec<_>>>()?;
    Ok((manifest, chains))
}

fn check_fingerprint(data: &Dataset, manifest: &FitManifest, dir: &Path) -> Result<Dataset> {
    let fitted = if manifest.config.covariates.is_empty() {
        data.clone()
    } else {
        data.select_covariates(&manifest.config.covariates)?
    };
    if fitted.fingerprint() != manifest.data_fingerprint {
        return Err(Error::data(format!(
            "dataset does not match the one fitted in {} (fingerprint mismatch)",
            dir.display()
        )));
    }
    Ok(fitted)
}

#[derive(Serialize)]
struct CompareManifest {
    command: String,
    crate_version: String,
    data_path: String,
    data_fingerprint: String,
    fits: Vec<String>,
    outputs: Vec<String>,
}

/// Compare two or more fitted models on one dataset: DIC, LPML, delta-DIC
/// annotations, and the pairwise PBF matrix.
pub fn cmd_compare(args: &CompareArgs) -> Result<i32> {
    if args.fits.len() < 2 {
        return Err(Error::config("compare needs at least two fit directories"));
    }
    let data = Dataset::read_csv(&args.data)?;
    let mut labels = Vec::new();
    let mut stats = Vec::new();
    for dir in &args.fits {
        let (manifest, chains) = read_fit_dir(dir)?;
        let fitted = check_fingerprint(&data, &manifest, dir)?;
        let matrix = pooled_log_lik_matrix(&fitted, &chains)?;
        let dic = crate::comparison::dic_from_matrix(&matrix)?;
        let (lpml, _) = crate::comparison::lpml_from_matrix(&matrix)?;
        let label = dir
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| dir.display().to_string());
        labels.push(label);
        stats.push((dic, lpml, matrix.len()));
    }

    ensure_dir(&args.out)?;
    let best_dic = stats.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
    let cmp_path = args.out.join("comparison.csv");
    let mut w = csv_writer(&cmp_path)?;
    w.write_record([
        "model",
        "dic",
        "lpml",
        "delta_dic",
        "annotation",
        "n_samples",
    ])
    .map_err(|e| Error::data(format!("{}: {e}", cmp_path.display())))?;
    for (label, &(dic, lpml, n)) in labels.iter().zip(&stats) {
        let delta = dic - best_dic;
        w.write_record([
            label.clone(),
            fmt(dic),
            fmt(lpml),
            fmt(delta),
            dic_delta_annotation(delta).to_string(),
            n.to_string(),
        ])
        .map_err(|e| Error::data(format!("{}: {e}", cmp_path.display())))?;
    }
    finish_csv(w, &cmp_path)?;

    let pbf_path = args.out.join("pbf.csv");
    let mut w = csv_writer(&pbf_path)?;
    let mut header = vec!["model".to_string()];
    header.extend(labels.iter().cloned());
    w.write_record(&header)
        .map_err(|e| Error::data(format!("{}: {e}", pbf_path.display())))?;
    for (label, &(_, lpml_a, _)) in labels.iter().zip(&stats) {
        let mut row = vec![label.clone()];
        for &(_, lpml_b, _) in &stats {
            row.push(fmt(crate::comparison::pseudo_bayes_factor(lpml_a, lpml_b)));
        }
        w.write_record(&row)
            .map_err(|e| Error::data(format!("{}: {e}", pbf_path.display())))?;
    }
    finish_csv(w, &pbf_path)?;

    write_json(
        &args.out.join("compare_manifest.json"),
        &CompareManifest {
            command: "compare".into(),
            crate_version: CRATE_VERSION.into(),
            data_path: args.data.display().to_string(),
            data_fingerprint: data.fingerprint(),
            fits: labels,
            outputs: vec![
                "comparison.csv".into(),
                "pbf.csv".into(),
                "compare_manifest.json".into(),
            ],
        },
    )?;
    Ok(0)
}

#[derive(Serialize)]
struct SummarizeManifest {
    command: String,
    crate_version: String,
    fit_dir: String,
    grid_points: usize,
    n_bins: usize,
    level: f64,
    outputs: Vec<String>,
}

/// Regenerate summary curves and histograms from a fit's sample files.
/// Pure post-processing: rerunning on the same inputs is byte-identical.
pub fn cmd_summarize(args: &SummarizeArgs) -> Result<i32> {
    let (manifest, chains) = read_fit_dir(&args.fit)?;
    let data = Dataset::read_csv(&args.data)?;
    let fitted = check_fingerprint(&data, &manifest, &args.fit)?;
    let grid_points = args.grid_points.unwrap_or(manifest.config.grid_points);
    let n_bins = args.bins.unwrap_or(manifest.config.n_bins);
    let level = args.level.unwrap_or(manifest.config.level);
    if grid_points == 0 || n_bins == 0 || !(level > 0.0 && level < 1.0) {
        return Err(Error::config(
            "grid_points and bins must be positive and level in (0, 1)",
        ));
    }

    ensure_dir(&args.out)?;
    let s_max = manifest.s_max;
    let hazard_grid = default_grid(s_max, grid_points);
    write_curve_csv(
        &args.out.join("hazard.csv"),
        &baseline_hazard_curve(&chains, &hazard_grid, level)?,
    )?;
    let mut survival_grid = vec![0.0];
    survival_grid.extend_from_slice(&hazard_grid);
    write_curve_csv(
        &args.out.join("survival.csv"),
        &baseline_survival_curve(&chains, &survival_grid, level)?,
    )?;
    write_partition_csvs(&args.out, &partition_posterior(&chains, n_bins)?)?;
    write_beta_csv(
        &args.out.join("beta_summary.csv"),
        &beta_summaries(&chains, &fitted, level)?,
    )?;
    write_json(
        &args.out.join("summarize_manifest.json"),
        &SummarizeManifest {
            command: "summarize".into(),
            crate_version: CRATE_VERSION.into(),
            fit_dir: args.fit.display().to_string(),
            grid_points,
            n_bins,
            level,
            outputs: vec![
                "hazard.csv".into(),
                "survival.csv".into(),
                "partition_j.csv".into(),
                "partition_splits.csv".into(),
                "beta_summary.csv".into(),
                "summarize_manifest.json".into(),
            ],
        },
    )?;
    Ok(0)
}
