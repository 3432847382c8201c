//! Model-comparison statistics over retained samples: DIC, CPO/LPML, and
//! pseudo-Bayes factors.
//!
//! Everything is computed in the log domain from a draws-by-subjects matrix
//! of per-subject log-likelihoods. Sums over draws use the canonical
//! summation from [`crate::math`], so both statistics are invariant, bitwise,
//! under permutation of the retained samples and under duplication of the
//! full sample set.

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::likelihood::subject_log_likelihood;
use crate::math::{canonical_sum, log_mean_exp};
use crate::rjmcmc::SampleChain;

/// Comparison statistics for one fitted model.
#[derive(Debug, Clone, PartialEq)]
pub struct FitSummary {
    pub dic: f64,
    pub lpml: f64,
    /// Conditional predictive ordinate per subject. Kept alongside its log
    /// because CPO itself can underflow for extreme subjects.
    pub cpo: Vec<f64>,
    pub log_cpo: Vec<f64>,
    pub n_samples_used: usize,
}

/// Per-subject log-likelihoods of every retained draw, chains pooled in
/// order: one row per draw, one column per subject.
pub fn pooled_log_lik_matrix(data: &Dataset, chains: &[SampleChain]) -> Result<Vec<Vec<f64>>> {
    let total: usize = chains.iter().map(|c| c.samples.len()).sum();
    if total == 0 {
        return Err(Error::invariant(
            "model comparison requires at least one retained sample",
        ));
    }
    let mut rows = Vec::with_capacity(total);
    for chain in chains {
        for state in &chain.samples {
            rows.push(
                (0..data.n())
                    .map(|i| subject_log_likelihood(data, state, i))
                    .collect(),
            );
        }
    }
    Ok(rows)
}

/// Total log-likelihood of one draw: the subject contributions summed in
/// index order. The R = 1 identities hold bitwise against this orientation.
pub fn row_total(row: &[f64]) -> f64 {
    row.iter().sum()
}

/// DIC from a draws-by-subjects log-likelihood matrix:
/// -(4/R) Σ_r log L(D|Φ_r) + 2 Σ_i log[(1/R) Σ_r L(D_i|Φ_r)].
pub fn dic_from_matrix(matrix: &[Vec<f64>]) -> Result<f64> {
    let r = matrix.len();
    if r == 0 {
        return Err(Error::invariant("DIC over an empty chain"));
    }
    let n = matrix[0].len();
    let totals: Vec<f64> = matrix.iter().map(|row| row_total(row)).collect();
    let deviance_term = -4.0 * (canonical_sum(&totals) / r as f64);
    let mut fit_term = 0.0;
    let mut column = vec![0.0; r];
    for i in 0..n {
        for (k, row) in matrix.iter().enumerate() {
            column[k] = row[i];
        }
        fit_term += log_mean_exp(&column);
    }
    Ok(deviance_term + 2.0 * fit_term)
}

/// LPML and per-subject log CPO from the matrix. CPO_i is the harmonic mean
/// of the subject's likelihoods, via log-sum-exp of the negated logs.
pub fn lpml_from_matrix(matrix: &[Vec<f64>]) -> Result<(f64, Vec<f64>)> {
    let r = matrix.len();
    if r == 0 {
        return Err(Error::invariant("LPML over an empty chain"));
    }
    let n = matrix[0].len();
    let mut log_cpo = Vec::with_capacity(n);
    let mut neg = vec![0.0; r];
    for i in 0..n {
        let mut all_zero = true;
        for (k, row) in matrix.iter().enumerate() {
            neg[k] = -row[i];
            all_zero &= row[i] == f64::NEG_INFINITY;
        }
        if all_zero {
            // 1-based to match data-file row numbering.
            return Err(Error::data(format!(
                "subject {} has zero likelihood under every retained sample",
                i + 1
            )));
        }
        log_cpo.push(-log_mean_exp(&neg));
    }
    let lpml = log_cpo.iter().sum();
    Ok((lpml, log_cpo))
}

/// DIC over pooled chains.
pub fn dic(data: &Dataset, chains: &[SampleChain]) -> Result<f64> {
    dic_from_matrix(&pooled_log_lik_matrix(data, chains)?)
}

/// (LPML, log CPO vector) over pooled chains.
pub fn lpml(data: &Dataset, chains: &[SampleChain]) -> Result<(f64, Vec<f64>)> {
    lpml_from_matrix(&pooled_log_lik_matrix(data, chains)?)
}

/// PBF = exp(LPML_a - LPML_b).
pub fn pseudo_bayes_factor(lpml_a: f64, lpml_b: f64) -> f64 {
    (lpml_a - lpml_b).exp()
}

/// Qualitative reading of a DIC difference (smaller-is-better convention,
/// delta = DIC_other - DIC_best): under 2 negligible, 2 to 6 positive,
/// above 6 strong.
pub fn dic_delta_annotation(delta: f64) -> &'static str {
    let d = delta.abs();
    if d < 2.0 {
        "negligible"
    } else if d < 6.0 {
        "positive"
    } else {
        "strong"
    }
}

/// All comparison statistics for one fit.
pub fn fit_summary(data: &Dataset, chains: &[SampleChain]) -> Result<FitSummary> {
    let matrix = pooled_log_lik_matrix(data, chains)?;
    let dic = dic_from_matrix(&matrix)?;
    let (lpml, log_cpo) = lpml_from_matrix(&matrix)?;
    let cpo = log_cpo.iter().map(|&l| l.exp()).collect();
    Ok(FitSummary {
        dic,
        lpml,
        cpo,
        log_cpo,
        n_samples_used: matrix.len(),
    })
}
