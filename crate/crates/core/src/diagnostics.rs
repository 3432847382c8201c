//! Convergence diagnostics and posterior summaries: PSRF, baseline hazard
//! and survival curves on a grid, the posterior of J, split-position
//! histograms, and coefficient intervals.
//!
//! PSRF monitors the coefficients, the log-likelihood trace, and J. The
//! increments h_j are not monitored directly: their dimension changes across
//! samples, so the traces are not alignable; the log-likelihood is the
//! scalar surrogate.

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::likelihood::{baseline_hazard_rate, cumulative_baseline_hazard};
use crate::math::{mean, quantile, sample_var};
use crate::rjmcmc::SampleChain;

pub const PSRF_GATE: f64 = 1.05;

/// Gelman-Rubin potential scale reduction factor over M >= 2 equal-length
/// traces: W = mean within-chain variance, B = n var(chain means),
/// V = ((n-1)/n) W + B/n, PSRF = sqrt(V/W).
pub fn psrf_many(traces: &[&[f64]]) -> Result<f64> {
    if traces.len() < 2 {
        return Err(Error::config(format!(
            "PSRF requires at least 2 chains, got {}",
            traces.len()
        )));
    }
    let n = traces[0].len();
    if n < 2 {
        return Err(Error::config("PSRF requires traces of length >= 2"));
    }
    if traces.iter().any(|t| t.len() != n) {
        return Err(Error::config("PSRF requires equal-length traces"));
    }
    let means: Vec<f64> = traces.iter().map(|t| mean(t)).collect();
    let w = mean(&traces.iter().map(|t| sample_var(t)).collect::<Vec<_>>());
    if w == 0.0 {
        return Err(Error::data(
            "PSRF undefined: zero within-chain variance (constant chains)",
        ));
    }
    let nf = n as f64;
    let b = nf * sample_var(&means);
    let v_hat = (nf - 1.0) / nf * w + b / nf;
    Ok((v_hat / w).sqrt())
}

/// Two-chain PSRF.
pub fn psrf(chain_a: &[f64], chain_b: &[f64]) -> Result<f64> {
    psrf_many(&[chain_a, chain_b])
}

#[derive(Debug, Clone, PartialEq)]
pub struct PsrfRow {
    pub param: String,
    /// None when the trace is deterministic (constant and equal in every
    /// chain, e.g. J under a fixed partition) and monitoring is skipped.
    pub psrf: Option<f64>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PsrfReport {
    pub rows: Vec<PsrfRow>,
}

impl PsrfReport {
    pub fn gate_passes(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }
}

fn all_constant_equal(traces: &[Vec<f64>]) -> bool {
    let first = traces[0].first().copied();
    traces.iter().all(|t| t.iter().all(|&v| Some(v) == first))
}

fn report_row(param: &str, traces: &[Vec<f64>]) -> Result<PsrfRow> {
    if all_constant_equal(traces) {
        return Ok(PsrfRow {
            param: param.to_string(),
            psrf: None,
            pass: true,
        });
    }
    let views: Vec<&[f64]> = traces.iter().map(|t| t.as_slice()).collect();
    // Constant-within-chain but different across chains (a stuck chain):
    // W = 0 with B > 0, which is divergence, not an undefined input.
    let within_all_zero = traces.iter().all(|t| sample_var(t) == 0.0);
    let value = if within_all_zero {
        f64::INFINITY
    } else {
        psrf_many(&views)?
    };
    Ok(PsrfRow {
        param: param.to_string(),
        psrf: Some(value),
        pass: value < PSRF_GATE,
    })
}

/// PSRF table over beta coefficients, the log-likelihood trace, and J,
/// flagging anything at or above the 1.05 gate.
pub fn psrf_report(chains: &[SampleChain], covariate_names: &[String]) -> Result<PsrfReport> {
    if chains.len() < 2 {
        return Err(Error::config(format!(
            "convergence report requires at least 2 chains, got {}",
            chains.len()
        )));
    }
    let mut rows = Vec::new();
    for (m, name) in covariate_names.iter().enumerate() {
        let traces: Vec<Vec<f64>> = chains.iter().map(|c| c.beta_trace(m)).collect();
        rows.push(report_row(&format!("beta:{name}"), &traces)?);
    }
    let ll: Vec<Vec<f64>> = chains.iter().map(|c| c.log_lik_trace.clone()).collect();
    rows.push(report_row("loglik", &ll)?);
    let js: Vec<Vec<f64>> = chains.iter().map(|c| c.j_trace()).collect();
    rows.push(report_row("J", &js)?);
    Ok(PsrfReport { rows })
}

/// Pointwise posterior summary of a function of time.
#[derive(Debug, Clone, PartialEq)]
pub struct GridCurve {
    pub grid: Vec<f64>,
    pub mean: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub level: f64,
}

fn validate_grid(grid: &[f64], s_max: f64, allow_zero: bool) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::config("summary grid is empty"));
    }
    for pair in grid.windows(2) {
        if pair[1] <= pair[0] {
            return Err(Error::config("summary grid must be strictly increasing"));
        }
    }
    let min_ok = if allow_zero {
        grid[0] >= 0.0
    } else {
        grid[0] > 0.0
    };
    if !min_ok || grid[grid.len() - 1] > s_max {
        return Err(Error::config(format!(
            "summary grid must lie within ({}0, {s_max}]",
            if allow_zero { "or at " } else { "" }
        )));
    }
    Ok(())
}

fn summarize_over_samples<F>(
    chains: &[SampleChain],
    grid: &[f64],
    level: f64,
    eval: F,
) -> Result<GridCurve>
where
    F: Fn(&crate::likelihood::ModelState, f64) -> f64,
{
    if !(0.0..1.0).contains(&level) || level <= 0.0 {
        return Err(Error::config(format!(
            "credible level must be in (0, 1), got {level}"
        )));
    }
    let total: usize = chains.iter().map(|c| c.samples.len()).sum();
    if total == 0 {
        return Err(Error::invariant("summary over an empty chain"));
    }
    let mut columns: Vec<Vec<f64>> = vec![Vec::with_capacity(total); grid.len()];
    for chain in chains {
        for state in &chain.samples {
            for (g, &t) in grid.iter().enumerate() {
                columns[g].push(eval(state, t));
            }
        }
    }
    let lo_q = (1.0 - level) / 2.0;
    let mut curve = GridCurve {
        grid: grid.to_vec(),
        mean: Vec::with_capacity(grid.len()),
        lower: Vec::with_capacity(grid.len()),
        upper: Vec::with_capacity(grid.len()),
        level,
    };
    for col in &columns {
        curve.mean.push(mean(col));
        curve.lower.push(quantile(col, lo_q));
        curve.upper.push(quantile(col, 1.0 - lo_q));
    }
    Ok(curve)
}

/// Posterior of the baseline hazard rate h0(t) on a grid in (0, s_max].
pub fn baseline_hazard_curve(
    chains: &[SampleChain],
    grid: &[f64],
    level: f64,
) -> Result<GridCurve> {
    let s_max = first_s_max(chains)?;
    validate_grid(grid, s_max, false)?;
    summarize_over_samples(chains, grid, level, |state, t| {
        baseline_hazard_rate(state, t)
    })
}

/// Posterior of the baseline survival S0(t) = exp(-H0(t)) on a grid in
/// [0, s_max].
pub fn baseline_survival_curve(
    chains: &[SampleChain],
    grid: &[f64],
    level: f64,
) -> Result<GridCurve> {
    let s_max = first_s_max(chains)?;
    validate_grid(grid, s_max, true)?;
    summarize_over_samples(chains, grid, level, |state, t| {
        (-cumulative_baseline_hazard(state, t)).exp()
    })
}

fn first_s_max(chains: &[SampleChain]) -> Result<f64> {
    chains
        .iter()
        .flat_map(|c| c.samples.first())
        .map(|s| s.partition.s_max())
        .next()
        .ok_or_else(|| Error::invariant("summary over an empty chain"))
}

/// Default summary grid: `points` equally spaced values on (0, s_max].
pub fn default_grid(s_max: f64, points: usize) -> Vec<f64> {
    (1..=points)
        .map(|k| s_max * k as f64 / points as f64)
        .collect()
}

/// Histogram of J and binned split-position frequencies.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionPosterior {
    /// j_counts[j] = number of retained samples with exactly j splits.
    pub j_counts: Vec<u64>,
    /// Per-bin mean number of splits per sample, over n_bins equal-width
    /// bins spanning (0, s_max].
    pub split_hist: Vec<f64>,
    pub s_max: f64,
}

impl PartitionPosterior {
    pub fn n_samples(&self) -> u64 {
        self.j_counts.iter().sum()
    }

    pub fn bin_edges(&self, k: usize) -> (f64, f64) {
        let w = self.s_max / self.split_hist.len() as f64;
        (k as f64 * w, (k + 1) as f64 * w)
    }
}

/// Posterior of the partition: histogram of J plus split positions pooled
/// across samples and binned over (0, s_max], normalized by sample count.
pub fn partition_posterior(chains: &[SampleChain], n_bins: usize) -> Result<PartitionPosterior> {
    if n_bins == 0 {
        return Err(Error::config("split histogram needs at least one bin"));
    }
    let s_max = first_s_max(chains)?;
    let mut j_counts = Vec::new();
    let mut split_hist = vec![0.0; n_bins];
    let mut total = 0u64;
    for chain in chains {
        for state in &chain.samples {
            let j = state.partition.j_count();
            if j_counts.len() <= j {
                j_counts.resize(j + 1, 0);
            }
            j_counts[j] += 1;
            total += 1;
            for &s in state.partition.splits() {
                let bin = ((s / s_max * n_bins as f64).ceil() as usize)
                    .max(1)
                    .min(n_bins)
                    - 1;
                split_hist[bin] += 1.0;
            }
        }
    }
    if total == 0 {
        return Err(Error::invariant("summary over an empty chain"));
    }
    for mass in &mut split_hist {
        *mass /= total as f64;
    }
    Ok(PartitionPosterior {
        j_counts,
        split_hist,
        s_max,
    })
}

/// Posterior summary of one regression coefficient.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientSummary {
    pub name: String,
    pub mean: f64,
    pub median: f64,
    pub lower: f64,
    pub upper: f64,
    pub level: f64,
}

/// Equal-tailed posterior intervals for every coefficient, chains pooled.
pub fn beta_summaries(
    chains: &[SampleChain],
    data: &Dataset,
    level: f64,
) -> Result<Vec<CoefficientSummary>> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::config(format!(
            "credible level must be in (0, 1), got {level}"
        )));
    }
    let total: usize = chains.iter().map(|c| c.samples.len()).sum();
    if total == 0 {
        return Err(Error::invariant("summary over an empty chain"));
    }
    let lo_q = (1.0 - level) / 2.0;
    let mut out = Vec::with_capacity(data.p());
    for (m, name) in data.covariate_names().iter().enumerate() {
        let mut draws = Vec::with_capacity(total);
        for chain in chains {
            draws.extend(chain.samples.iter().map(|s| s.beta[m]));
        }
        out.push(CoefficientSummary {
            name: name.clone(),
            mean: mean(&draws),
            median: quantile(&draws, 0.5),
            lower: quantile(&draws, lo_q),
            upper: quantile(&draws, 1.0 - lo_q),
            level,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::likelihood::{HazardIncrements, ModelState, TimePartition};
    use crate::rjmcmc::MoveTallies;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn psrf_identical_chains_reference_value() {
        let t = [1.0, 2.0, 3.0, 4.0];
        let v = psrf(&t, &t).unwrap();
        assert_relative_eq!(v, (3.0f64 / 4.0).sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn psrf_degenerate_inputs_error() {
        assert!(psrf(&[0.0, 0.0, 0.0], &[1.0, 1.0, 1.0]).is_err());
        assert!(psrf_many(&[&[1.0, 2.0]]).is_err());
        assert!(psrf(&[1.0], &[2.0]).is_err());
        assert!(psrf(&[1.0, 2.0, 3.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn psrf_same_distribution_is_below_gate() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let a: Vec<f64> = (0..10_000).map(|_| rng.gen::<f64>()).collect();
        let b: Vec<f64> = (0..10_000).map(|_| rng.gen::<f64>()).collect();
        let v = psrf(&a, &b).unwrap();
        assert!(v < PSRF_GATE, "{v}");
        assert!(v > 0.99, "{v}");
    }

    fn fake_chain(betas: &[f64], lls: &[f64], j: usize) -> SampleChain {
        let splits: Vec<f64> = (1..=j).map(|k| k as f64).collect();
        let partition = TimePartition::new(splits, (j + 1) as f64).unwrap();
        let increments = HazardIncrements::new(vec![1.0; partition.n_intervals()]).unwrap();
        let samples: Vec<ModelState> = betas
            .iter()
            .map(|&b| ModelState {
                beta: vec![b],
                partition: partition.clone(),
                increments: increments.clone(),
            })
            .collect();
        SampleChain {
            iterations: (1..=samples.len() as u64).collect(),
            log_lik_trace: lls.to_vec(),
            samples,
            acceptance: MoveTallies::default(),
            seed: 0,
            stream: 0,
        }
    }

    #[test]
    fn report_skips_deterministic_traces_and_flags_stuck_chains() {
        // J identical and constant in both chains: skipped, passes.
        let a = fake_chain(&[0.1, 0.4, 0.2, 0.5], &[-3.0, -2.0, -2.5, -2.2], 2);
        let b = fake_chain(&[0.2, 0.3, 0.1, 0.4], &[-2.8, -2.1, -2.4, -2.3], 2);
        let rep = psrf_report(&[a, b], &["x1".to_string()]).unwrap();
        let j_row = rep.rows.iter().find(|r| r.param == "J").unwrap();
        assert_eq!(j_row.psrf, None);
        assert!(j_row.pass);
        assert!(rep.gate_passes());

        // A chain stuck at one beta value while the other moves: flagged.
        let stuck = fake_chain(&[0.7, 0.7, 0.7, 0.7], &[-3.0, -3.0, -3.0, -3.0], 2);
        let moving = fake_chain(&[0.2, 0.9, 0.1, 0.6], &[-2.0, -2.6, -2.2, -2.4], 2);
        let rep = psrf_report(&[stuck, moving], &["x1".to_string()]).unwrap();
        assert!(!rep.gate_passes());
        let beta_row = rep.rows.iter().find(|r| r.param == "beta:x1").unwrap();
        assert!(!beta_row.pass);

        // Both chains constant at different values: infinite PSRF, flagged.
        let c0 = fake_chain(&[0.0, 0.0], &[-1.0, -1.0], 1);
        let c1 = fake_chain(&[1.0, 1.0], &[-1.0, -1.0], 1);
        let rep = psrf_report(&[c0, c1], &["x1".to_string()]).unwrap();
        let beta_row = rep.rows.iter().find(|r| r.param == "beta:x1").unwrap();
        assert_eq!(beta_row.psrf, Some(f64::INFINITY));
        assert!(!beta_row.pass);

        assert!(psrf_report(&[fake_chain(&[0.0], &[0.0], 1)], &[]).is_err());
    }

    fn single_state_chain() -> SampleChain {
        let partition = TimePartition::new(vec![2.0, 5.0], 10.0).unwrap();
        let increments = HazardIncrements::new(vec![0.4, 0.9, 1.5]).unwrap();
        SampleChain {
            samples: vec![ModelState {
                beta: vec![],
                partition,
                increments,
            }],
            iterations: vec![1],
            log_lik_trace: vec![0.0],
            acceptance: MoveTallies::default(),
            seed: 0,
            stream: 0,
        }
    }

    #[test]
    fn single_sample_curve_is_the_step_function() {
        let chain = single_state_chain();
        let grid = [1.0, 2.0, 3.0, 7.0, 10.0];
        let curve = baseline_hazard_curve(std::slice::from_ref(&chain), &grid, 0.95).unwrap();
        let want = [0.2, 0.2, 0.3, 0.3, 0.3];
        for (g, w) in curve.mean.iter().zip(want) {
            assert_relative_eq!(*g, w, epsilon = 1e-12);
        }
        assert_eq!(curve.mean, curve.lower);
        assert_eq!(curve.mean, curve.upper);

        let surv = baseline_survival_curve(&[chain], &[0.0, 2.0, 10.0], 0.95).unwrap();
        assert_relative_eq!(surv.mean[0], 1.0, epsilon = 1e-15);
        assert_relative_eq!(surv.mean[1], (-0.4f64).exp(), epsilon = 1e-12);
        assert_relative_eq!(surv.mean[2], (-2.8f64).exp(), epsilon = 1e-12);
        for w in surv.mean.windows(2) {
            assert!(w[1] <= w[0]);
        }
    }

    #[test]
    fn curve_grids_are_validated() {
        let chain = single_state_chain();
        assert!(baseline_hazard_curve(std::slice::from_ref(&chain), &[0.0, 1.0], 0.95).is_err());
        assert!(baseline_hazard_curve(std::slice::from_ref(&chain), &[1.0, 11.0], 0.95).is_err());
        assert!(baseline_hazard_curve(std::slice::from_ref(&chain), &[2.0, 1.0], 0.95).is_err());
        assert!(baseline_survival_curve(std::slice::from_ref(&chain), &[-1.0, 1.0], 0.95).is_err());
        assert!(baseline_survival_curve(&[chain], &[0.0, 1.0], 1.5).is_err());
    }

    #[test]
    fn prior_mean_cumulative_hazard_reference_point() {
        // Telescoping prior means over any partition of (0, 25] give
        // H*(25) = eta0 * 25^kappa0 = 1, so prior-mean survival is 1/e.
        let hp = crate::priors::Hyperparameters::with_s_max(30.0);
        let h: f64 = [(0.0, 5.0), (5.0, 25.0)]
            .iter()
            .map(|&(a, b)| hp.increment_prior_mean(a, b))
            .sum();
        assert_relative_eq!((-h).exp(), 0.36788, epsilon = 1e-5);
    }

    #[test]
    fn partition_posterior_counts_and_masses() {
        let chain = single_state_chain();
        let post = partition_posterior(&[chain], 5).unwrap();
        // One sample with J=2.
        assert_eq!(post.j_counts, vec![0, 0, 1]);
        assert_eq!(post.n_samples(), 1);
        // Splits at 2.0 and 5.0 over bins of width 2: bins 0 and 2.
        assert_eq!(post.split_hist, vec![1.0, 0.0, 1.0, 0.0, 0.0]);
        let total_mass: f64 = post.split_hist.iter().sum();
        assert_relative_eq!(total_mass, 2.0, epsilon = 1e-12);
        assert_eq!(post.bin_edges(2), (4.0, 6.0));
    }

    #[test]
    fn beta_summaries_quantiles_are_ordered() {
        let chain = fake_chain(&[0.1, 0.5, 0.3, 0.9, 0.397], &[0.0; 5], 1);
        let data = crate::data::Dataset::from_columns(
            vec![1.0, 2.0],
            vec![true, false],
            vec![vec![0.0, 1.0]],
            vec!["x1".to_string()],
        )
        .unwrap();
        let summ = beta_summaries(&[chain], &data, 0.9).unwrap();
        assert_eq!(summ.len(), 1);
        let s = &summ[0];
        assert!(s.lower <= s.median && s.median <= s.upper);
        assert_relative_eq!(
            s.mean,
            (0.1 + 0.5 + 0.3 + 0.9 + 0.397) / 5.0,
            epsilon = 1e-12
        );
        assert_relative_eq!(s.median, 0.397, epsilon = 1e-12);
    }
}
