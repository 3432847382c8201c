//! Numeric helpers shared across the crate.
//!
//! The summation routines here are chosen for reproducibility, not just
//! accuracy: model-comparison outputs must not depend on the order in which
//! posterior draws were produced or stored.

pub use statrs::function::gamma::ln_gamma;

/// Balanced-tree (pairwise) summation.
///
/// Rounding error grows like O(log n) instead of O(n) for sequential
/// accumulation, and the result depends only on the sequence order, not on
/// accumulator state.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        2 => values[0] + values[1],
        n => {
            let mid = n / 2;
            pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
        }
    }
}

/// Order-canonical sum: bitwise identical under permutation of `values` and
/// under duplicating every element (which exactly doubles the result).
///
/// Values are sorted by total order, runs of bitwise-equal values are
/// collapsed to `count * value` (one rounding each, and exact doubling when
/// the run length doubles), and the run contributions are pairwise-summed.
/// Power-of-two scaling commutes with IEEE rounding, so duplicating every
/// element doubles each run contribution exactly and leaves the tree shape
/// unchanged.
pub fn canonical_sum(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut runs: Vec<f64> = Vec::new();
    let mut current = sorted[0];
    let mut count: u64 = 1;
    for &v in &sorted[1..] {
        if v.to_bits() == current.to_bits() {
            count += 1;
        } else {
            runs.push(current * count as f64);
            current = v;
            count = 1;
        }
    }
    runs.push(current * count as f64);
    pairwise_sum(&runs)
}

/// Order-canonical mean built on [`canonical_sum`]; stable under permutation
/// and duplication of `values` (scaling numerator and denominator by two
/// leaves the quotient's rounding unchanged).
pub fn canonical_mean(values: &[f64]) -> f64 {
    canonical_sum(values) / values.len() as f64
}

/// log(sum(exp(x_i))) without overflow, streaming form.
pub fn logsumexp(values: &[f64]) -> f64 {
    let m = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let sum: f64 = values.iter().map(|&v| (v - m).exp()).sum();
    m + sum.ln()
}

/// log(mean(exp(x_i))), order-canonical.
///
/// The shifted exponentials are reduced with [`canonical_sum`] and the
/// division by n happens before the log, so the result is bitwise stable
/// under permutation and duplication of `values`.
pub fn log_mean_exp(values: &[f64]) -> f64 {
    assert!(!values.is_empty(), "log_mean_exp of empty slice");
    let m = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let shifted: Vec<f64> = values.iter().map(|&v| (v - m).exp()).collect();
    m + (canonical_sum(&shifted) / values.len() as f64).ln()
}

/// Arithmetic mean.
pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Unbiased sample variance (n - 1 denominator).
pub fn sample_var(values: &[f64]) -> f64 {
    let n = values.len();
    assert!(n >= 2, "sample_var needs at least two values");
    let m = mean(values);
    values.iter().map(|&v| (v - m) * (v - m)).sum::<f64>() / (n - 1) as f64
}

/// Linear-interpolation quantile on pre-sorted values (the convention where
/// q(0.5) of [1,2,3,4] is 2.5).
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty slice");
    assert!((0.0..=1.0).contains(&p), "quantile level outside [0,1]");
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * p;
    let lo = h.floor() as usize;
    if lo + 1 >= n {
        return sorted[n - 1];
    }
    let frac = h - lo as f64;
    sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
}

/// Quantile of unsorted values; sorts a copy.
pub fn quantile(values: &[f64], p: f64) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    quantile_sorted(&sorted, p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn pairwise_matches_naive_on_small_input() {
        let xs = [1.5, -2.25, 3.0, 0.125, 7.5];
        assert_relative_eq!(pairwise_sum(&xs), xs.iter().sum::<f64>(), epsilon = 1e-12);
    }

    #[test]
    fn canonical_sum_is_permutation_invariant() {
        let xs = [0.1, 0.7, -0.3, 1e-9, 42.0, 0.1];
        let mut ys = xs.to_vec();
        ys.reverse();
        ys.swap(1, 3);
        assert_eq!(canonical_sum(&xs).to_bits(), canonical_sum(&ys).to_bits());
    }

    #[test]
    fn canonical_sum_doubles_exactly_under_duplication() {
        let xs = [0.1, 0.7, -0.3, 1e-9, 42.0, std::f64::consts::PI];
        let mut doubled = xs.to_vec();
        doubled.extend_from_slice(&xs);
        assert_eq!(
            canonical_sum(&doubled).to_bits(),
            (2.0 * canonical_sum(&xs)).to_bits()
        );
    }

    #[test]
    fn canonical_mean_is_duplication_invariant() {
        let xs = [0.3, -1.25, 2.5e-3, 9.75, 0.3, 0.3];
        let mut doubled = xs.to_vec();
        doubled.extend_from_slice(&xs);
        assert_eq!(
            canonical_mean(&xs).to_bits(),
            canonical_mean(&doubled).to_bits()
        );
    }

    #[test]
    fn logsumexp_handles_large_offsets() {
        let xs = [1000.0, 1000.0 + (2.0f64).ln()];
        assert_relative_eq!(logsumexp(&xs), 1000.0 + (3.0f64).ln(), epsilon = 1e-12);
    }

    #[test]
    fn log_mean_exp_of_constant_is_the_constant() {
        let xs = [-5.5; 7];
        assert_relative_eq!(log_mean_exp(&xs), -5.5, epsilon = 1e-12);
    }

    #[test]
    fn log_mean_exp_is_duplication_invariant() {
        let xs = [-310.0, -295.5, -301.25, -299.0];
        let mut doubled = xs.to_vec();
        doubled.extend_from_slice(&xs);
        assert_eq!(
            log_mean_exp(&xs).to_bits(),
            log_mean_exp(&doubled).to_bits()
        );
    }

    #[test]
    fn quantile_linear_interpolation() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        assert_relative_eq!(quantile(&xs, 0.5), 2.5);
        assert_relative_eq!(quantile(&xs, 0.0), 1.0);
        assert_relative_eq!(quantile(&xs, 1.0), 4.0);
        assert_relative_eq!(quantile(&xs, 0.25), 1.75);
    }

    #[test]
    fn sample_var_matches_hand_computation() {
        let xs = [2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0];
        assert_relative_eq!(sample_var(&xs), 32.0 / 7.0, epsilon = 1e-12);
    }
}
