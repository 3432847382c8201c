//! Survival-data simulator: Weibull or piecewise-linear baseline hazards,
//! three covariates with proportional-hazards effects, calibrated uniform
//! censoring, and the replicate study runner.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::data::Dataset;
use crate::diagnostics::{baseline_hazard_curve, beta_summaries, psrf_report, GridCurve};
use crate::error::{Error, Result};
use crate::math::mean;
use crate::priors::Hyperparameters;
use crate::rjmcmc::{run_chain, PartitionScheme, SamplerConfig};

/// Cumulative baseline hazard of a Weibull(shape, rate): H0(t) = rate * t^shape.
pub fn weibull_cumhaz(t: f64, shape: f64, rate: f64) -> f64 {
    rate * t.powf(shape)
}

/// V-shaped piecewise-linear baseline hazard: b at 0, falling to k at t = 40,
/// rising at half the fall rate afterwards (reaching (b+k)/2 at t = 80).
pub fn pwl_hazard(t: f64, b: f64, k: f64) -> f64 {
    if t <= 40.0 {
        b - (b - k) * t / 40.0
    } else {
        (3.0 * k - b) / 2.0 + (b - k) * t / 80.0
    }
}

/// Baseline hazard family of a simulation scenario.
#[derive(Debug, Clone, PartialEq)]
pub enum BaselineHazard {
    Weibull { shape: f64, rate: f64 },
    PiecewiseLinear { b: f64, k: f64 },
}

impl BaselineHazard {
    pub fn validate(&self) -> Result<()> {
        match *self {
            BaselineHazard::Weibull { shape, rate } => {
                if shape <= 0.0 || rate <= 0.0 || !shape.is_finite() || !rate.is_finite() {
                    return Err(Error::config(format!(
                        "Weibull parameters must be positive, got shape {shape}, rate {rate}"
                    )));
                }
            }
            BaselineHazard::PiecewiseLinear { b, k } => {
                if !(b > 0.0 && k > 0.0 && b >= k) || !b.is_finite() {
                    return Err(Error::config(format!(
                        "piecewise-linear hazard needs b >= k > 0, got b {b}, k {k}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn rate(&self, t: f64) -> f64 {
        match *self {
            BaselineHazard::Weibull { shape, rate } => shape * rate * t.powf(shape - 1.0),
            BaselineHazard::PiecewiseLinear { b, k } => pwl_hazard(t, b, k),
        }
    }

    pub fn cumulative(&self, t: f64) -> f64 {
        match *self {
            BaselineHazard::Weibull { shape, rate } => weibull_cumhaz(t, shape, rate),
            BaselineHazard::PiecewiseLinear { b, k } => {
                if t <= 40.0 {
                    b * t - (b - k) * t * t / 80.0
                } else {
                    let c2 = (b - k) / 160.0;
                    let c1 = (3.0 * k - b) / 2.0;
                    20.0 * (b + k) + c1 * (t - 40.0) + c2 * (t * t - 1600.0)
                }
            }
        }
    }

    /// Inverse cumulative hazard; the inverse-transform workhorse.
    pub fn invert(&self, u: f64) -> f64 {
        debug_assert!(u >= 0.0);
        match *self {
            BaselineHazard::Weibull { shape, rate } => (u / rate).powf(1.0 / shape),
            BaselineHazard::PiecewiseLinear { b, k } => {
                if b == k {
                    // Constant hazard; both pieces collapse to H = b t.
                    return u / b;
                }
                let h40 = 20.0 * (b + k);
                if u <= h40 {
                    // Solve (b-k)/80 t^2 - b t + u = 0, smaller root.
                    let disc = (b * b - (b - k) * u / 20.0).max(0.0);
                    40.0 / (b - k) * (b - disc.sqrt())
                } else {
                    let c2 = (b - k) / 160.0;
                    let c1 = (3.0 * k - b) / 2.0;
                    let c0 = h40 - 1600.0 * c2 - 40.0 * c1;
                    (-c1 + (c1 * c1 - 4.0 * c2 * (c0 - u)).sqrt()) / (2.0 * c2)
                }
            }
        }
    }
}

/// One simulation scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub name: String,
    pub n: usize,
    /// Target censoring proportion in [0, 1); 0 disables censoring.
    pub censor_target: f64,
    pub baseline: BaselineHazard,
    pub beta_true: Vec<f64>,
    pub seed: u64,
}

impl ScenarioConfig {
    /// The four study scenarios: (n, censoring, baseline) =
    /// (300, 30%, Weibull), (300, 30%, piecewise linear), (300, 50%,
    /// Weibull), (100, 30%, Weibull), all with beta = (0.5, 0.8, -0.5).
    pub fn scenario(which: usize, seed: u64) -> Result<Self> {
        let weibull = BaselineHazard::Weibull {
            shape: 0.8,
            rate: 0.05,
        };
        let pwl = BaselineHazard::PiecewiseLinear { b: 0.1, k: 0.0005 };
        let (n, censor_target, baseline) = match which {
            1 => (300, 0.30, weibull),
            2 => (300, 0.30, pwl),
            3 => (300, 0.50, weibull),
            4 => (100, 0.30, weibull),
            _ => {
                return Err(Error::config(format!(
                    "unknown scenario {which}; expected 1-4"
                )))
            }
        };
        Ok(ScenarioConfig {
            name: format!("scenario{which}"),
            n,
            censor_target,
            baseline,
            beta_true: vec![0.5, 0.8, -0.5],
            seed,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::config("scenario sample size must be at least 1"));
        }
        if !(0.0..1.0).contains(&self.censor_target) {
            return Err(Error::config(format!(
                "censoring target must be in [0, 1), got {}",
                self.censor_target
            )));
        }
        if self.beta_true.len() != 3 {
            return Err(Error::config(format!(
                "the simulator draws exactly 3 covariates; beta_true has {}",
                self.beta_true.len()
            )));
        }
        self.baseline.validate()
    }
}

/// Covariates (N(0,1), N(0,1), Bernoulli(0.5)) and an event time by inverse
/// transform: T = H0^{-1}(-log V * exp(-x'beta)).
fn draw_subject<R: Rng>(baseline: &BaselineHazard, beta: &[f64], rng: &mut R) -> (f64, [f64; 3]) {
    let x = [
        rng.sample::<f64, _>(StandardNormal),
        rng.sample::<f64, _>(StandardNormal),
        rng.gen_bool(0.5) as u8 as f64,
    ];
    let v = loop {
        let v = rng.gen::<f64>();
        if v > 0.0 {
            break v;
        }
    };
    let lp: f64 = x.iter().zip(beta).map(|(a, b)| a * b).sum();
    let t = baseline.invert(-v.ln() * (-lp).exp());
    (t, x)
}

const PILOT_DRAWS: usize = 100_000;

/// Calibrate the uniform-censoring horizon c so that C ~ Uniform(0, c) hits
/// the target censoring proportion, by bisection against a pilot sample of
/// event times. P(C < T | T) = min(T, c)/c makes the pilot curve exact up to
/// Monte Carlo error in the pilot itself.
pub fn calibrate_censoring<R: Rng>(
    baseline: &BaselineHazard,
    beta_true: &[f64],
    target: f64,
    rng: &mut R,
) -> Result<f64> {
    let pilot: Vec<f64> = (0..PILOT_DRAWS)
        .map(|_| draw_subject(baseline, beta_true, rng).0)
        .collect();
    let frac_at =
        |c: f64| -> f64 { pilot.iter().map(|&t| t.min(c)).sum::<f64>() / (c * pilot.len() as f64) };
    // frac_at decreases from 1 toward 0 as c grows.
    let mut hi = 1.0;
    while frac_at(hi) > target {
        hi *= 2.0;
        if hi > 1e17 {
            return Err(Error::config(format!(
                "censoring target {target} unattainable under this hazard"
            )));
        }
    }
    let mut lo = hi / 2.0;
    while frac_at(lo) < target {
        lo /= 2.0;
        if lo < 1e-12 {
            return Err(Error::config(format!(
                "censoring target {target} unattainable under this hazard"
            )));
        }
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if frac_at(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Simulate one dataset. When censoring is active the calibration pilot is
/// drawn from the same generator first, so a dataset is a pure function of
/// (scenario, rng state).
pub fn simulate_dataset<R: Rng>(sc: &ScenarioConfig, rng: &mut R) -> Result<Dataset> {
    sc.validate()?;
    let c_cal = if sc.censor_target > 0.0 {
        Some(calibrate_censoring(
            &sc.baseline,
            &sc.beta_true,
            sc.censor_target,
            rng,
        )?)
    } else {
        None
    };
    let n = sc.n;
    let mut times = Vec::with_capacity(n);
    let mut events = Vec::with_capacity(n);
    let mut xs = vec![
        Vec::with_capacity(n),
        Vec::with_capacity(n),
        Vec::with_capacity(n),
    ];
    for _ in 0..n {
        let (t, x) = draw_subject(&sc.baseline, &sc.beta_true, rng);
        let (y, delta) = match c_cal {
            Some(c) => {
                let censor = rng.gen::<f64>() * c;
                if t <= censor {
                    (t, true)
                } else {
                    (censor, false)
                }
            }
            None => (t, true),
        };
        times.push(y);
        events.push(delta);
        for (col, v) in xs.iter_mut().zip(x) {
            col.push(v);
        }
    }
    Dataset::from_columns(
        times,
        events,
        xs,
        vec!["x1".to_string(), "x2".to_string(), "x3".to_string()],
    )
}

/// One model configuration inside a replicate study. `hyper.s_max` and the
/// sampler's (seed, stream, scheme) are overridden per replicate; everything
/// else is used as given.
#[derive(Debug, Clone)]
pub struct FitSpec {
    pub label: String,
    pub scheme: PartitionScheme,
    pub hyper: Hyperparameters,
    pub sampler: SamplerConfig,
    pub n_chains: usize,
}

#[derive(Debug, Clone)]
pub struct StudyOptions {
    /// Credible level for coverage and width.
    pub level: f64,
    /// When set, the referent model's pooled baseline-hazard curve is
    /// recorded on this grid for every included replicate.
    pub hazard_grid: Option<Vec<f64>>,
}

impl Default for StudyOptions {
    fn default() -> Self {
        StudyOptions {
            level: 0.95,
            hazard_grid: None,
        }
    }
}

/// PSRF gate outcome of one fit.
#[derive(Debug, Clone, PartialEq)]
pub struct GateRecord {
    pub replicate: usize,
    pub model: String,
    pub passed: bool,
    /// Largest monitored PSRF (infinite when a trace froze).
    pub worst_psrf: f64,
}

/// One coefficient summary from one fit of one replicate.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyRecord {
    pub scenario: String,
    pub replicate: usize,
    pub model: String,
    pub coefficient: String,
    pub estimate: f64,
    pub lower: f64,
    pub upper: f64,
    pub covered: bool,
    pub width: f64,
}

/// Replicate-aggregated operating characteristics for one (model,
/// coefficient) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyAggregate {
    pub model: String,
    pub coefficient: String,
    pub truth: f64,
    /// Mean over replicates of 100 (median - truth)/truth.
    pub percent_bias: f64,
    /// Fraction of replicates whose interval covers the truth.
    pub coverage: f64,
    /// Mean over replicates of width / referent-model width.
    pub relative_width: f64,
    pub n_used: usize,
}

#[derive(Debug, Clone)]
pub struct ScenarioStudy {
    pub scenario: String,
    /// Per-replicate records, gate-passing replicates only.
    pub records: Vec<StudyRecord>,
    pub aggregates: Vec<StudyAggregate>,
    pub gates: Vec<GateRecord>,
    /// Replicates dropped because some fit failed the PSRF gate.
    pub excluded_replicates: Vec<usize>,
    /// Referent-model hazard curves per included replicate, when requested.
    pub hazard_curves: Vec<GridCurve>,
}

impl ScenarioStudy {
    pub fn excluded_count(&self) -> usize {
        self.excluded_replicates.len()
    }
}

/// Simulate `n_datasets` replicates, fit every model, gate on PSRF, and
/// aggregate percent bias, coverage, and relative width (first fit spec is
/// the referent).
pub fn run_scenario_study(
    sc: &ScenarioConfig,
    n_datasets: usize,
    fits: &[FitSpec],
    opts: &StudyOptions,
) -> Result<ScenarioStudy> {
    sc.validate()?;
    if n_datasets == 0 {
        return Err(Error::config("study needs at least one replicate"));
    }
    if fits.is_empty() {
        return Err(Error::config("study needs at least one fit configuration"));
    }
    if sc.beta_true.contains(&0.0) {
        return Err(Error::config(
            "percent bias is undefined for a zero true coefficient",
        ));
    }
    let p = sc.beta_true.len();
    let streams_per_rep: u64 = fits.iter().map(|f| f.n_chains as u64).sum();

    let mut study = ScenarioStudy {
        scenario: sc.name.clone(),
        records: Vec::new(),
        aggregates: Vec::new(),
        gates: Vec::new(),
        excluded_replicates: Vec::new(),
        hazard_curves: Vec::new(),
    };
    // widths[f][m] and pbs/covers aligned the same way, included reps only.
    let mut widths: Vec<Vec<Vec<f64>>> = vec![vec![Vec::new(); p]; fits.len()];
    let mut pbs: Vec<Vec<Vec<f64>>> = vec![vec![Vec::new(); p]; fits.len()];
    let mut covers: Vec<Vec<Vec<bool>>> = vec![vec![Vec::new(); p]; fits.len()];

    for rep in 0..n_datasets {
        let mut data_rng = ChaCha8Rng::seed_from_u64(sc.seed);
        data_rng.set_stream(rep as u64);
        let data = simulate_dataset(sc, &mut data_rng)?;

        let mut rep_records = Vec::new();
        let mut rep_widths = vec![vec![0.0; p]; fits.len()];
        let mut rep_pbs = vec![vec![0.0; p]; fits.len()];
        let mut rep_covers = vec![vec![false; p]; fits.len()];
        let mut rep_curve = None;
        let mut all_passed = true;
        let mut stream_base = rep as u64 * streams_per_rep;

        for (f_idx, fit) in fits.iter().enumerate() {
            let hp = Hyperparameters {
                s_max: data.y_max(),
                ..fit.hyper
            };
            let mut chains = Vec::with_capacity(fit.n_chains);
            for c in 0..fit.n_chains {
                let cfg = SamplerConfig {
                    seed: fit.sampler.seed,
                    stream: stream_base + c as u64,
                    scheme: fit.scheme.clone(),
                    ..fit.sampler.clone()
                };
                chains.push(run_chain(&data, &hp, &cfg, None)?);
            }
            stream_base += fit.n_chains as u64;

            let mut passed = true;
            let mut worst = f64::NAN;
            if fit.n_chains >= 2 {
                let report = psrf_report(&chains, data.covariate_names())?;
                passed = report.gate_passes();
                worst = report
                    .rows
                    .iter()
                    .filter_map(|r| r.psrf)
                    .fold(f64::NEG_INFINITY, f64::max);
            }
            study.gates.push(GateRecord {
                replicate: rep,
                model: fit.label.clone(),
                passed,
                worst_psrf: worst,
            });
            all_passed &= passed;

            for (m, summ) in beta_summaries(&chains, &data, opts.level)?
                .iter()
                .enumerate()
            {
                let truth = sc.beta_true[m];
                let covered = summ.lower <= truth && truth <= summ.upper;
                let width = summ.upper - summ.lower;
                rep_widths[f_idx][m] = width;
                rep_pbs[f_idx][m] = 100.0 * (summ.median - truth) / truth;
                rep_covers[f_idx][m] = covered;
                rep_records.push(StudyRecord {
                    scenario: sc.name.clone(),
                    replicate: rep,
                    model: fit.label.clone(),
                    coefficient: summ.name.clone(),
                    estimate: summ.median,
                    lower: summ.lower,
                    upper: summ.upper,
                    covered,
                    width,
                });
            }
            if f_idx == 0 {
                if let Some(grid) = &opts.hazard_grid {
                    rep_curve = Some(baseline_hazard_curve(&chains, grid, opts.level)?);
                }
            }
        }

        if all_passed {
            study.records.extend(rep_records);
            if let Some(curve) = rep_curve {
                study.hazard_curves.push(curve);
            }
            for f_idx in 0..fits.len() {
                for m in 0..p {
                    widths[f_idx][m].push(rep_widths[f_idx][m]);
                    pbs[f_idx][m].push(rep_pbs[f_idx][m]);
                    covers[f_idx][m].push(rep_covers[f_idx][m]);
                }
            }
        } else {
            study.excluded_replicates.push(rep);
        }
    }

    let names = ["x1", "x2", "x3"];
    for (f_idx, fit) in fits.iter().enumerate() {
        for m in 0..p {
            let used = pbs[f_idx][m].len();
            let rw = if used == 0 {
                f64::NAN
            } else {
                let ratios: Vec<f64> = widths[f_idx][m]
                    .iter()
                    .zip(&widths[0][m])
                    .map(|(w, w0)| w / w0)
                    .collect();
                mean(&ratios)
            };
            study.aggregates.push(StudyAggregate {
                model: fit.label.clone(),
                coefficient: names[m].to_string(),
                truth: sc.beta_true[m],
                percent_bias: if used == 0 {
                    f64::NAN
                } else {
                    mean(&pbs[f_idx][m])
                },
                coverage: if used == 0 {
                    f64::NAN
                } else {
                    covers[f_idx][m].iter().filter(|&&c| c).count() as f64 / used as f64
                },
                relative_width: rw,
                n_used: used,
            });
        }
    }
    Ok(study)
}
