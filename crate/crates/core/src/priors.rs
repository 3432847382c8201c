//! Prior densities: gamma-process increments, even-numbered-order-statistics
//! partition prior, truncated Poisson on the split count, flat prior on beta.
//!
//! The gamma process GP(c0 * Hstar, c0) with mean function
//! Hstar(t) = eta0 * t^kappa0 induces independent gamma increments
//! h_j ~ Gamma(shape = c0 * eta0 * (s_j^kappa0 - s_{j-1}^kappa0), rate = c0).
//! The flat prior on beta contributes nothing to any posterior difference and
//! has no term anywhere in the code.

use rand::Rng;

use crate::error::{Error, Result};
use crate::likelihood::TimePartition;
use crate::math::ln_gamma;

/// Model hyperparameters shared by the priors and the sampler moves.
#[derive(Debug, Clone, PartialEq)]
pub struct Hyperparameters {
    /// Scale of the prior mean cumulative hazard Hstar(t) = eta0 * t^kappa0.
    pub eta0: f64,
    /// Power of the prior mean cumulative hazard.
    pub kappa0: f64,
    /// Gamma-process confidence weight (prior sample size).
    pub c0: f64,
    /// Poisson rate for the number of interior splits J.
    pub alpha: f64,
    /// Scale of the birth/death move probabilities.
    pub rho: f64,
    /// Upper bound enforced on pi_BI + pi_DI; must exceed 2*rho.
    pub c_cap: f64,
    /// Truncation bound for J.
    pub j_max: usize,
    /// Terminal partition edge; must cover the largest observed time.
    pub s_max: f64,
}

impl Hyperparameters {
    /// Stock defaults except for s_max, which must come from the data.
    pub fn with_s_max(s_max: f64) -> Self {
        Hyperparameters {
            eta0: 0.2,
            kappa0: 0.5,
            c0: 1.0,
            alpha: 10.0,
            rho: 0.2,
            c_cap: 0.8,
            j_max: 50,
            s_max,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("eta0", self.eta0),
            ("kappa0", self.kappa0),
            ("c0", self.c0),
            ("alpha", self.alpha),
            ("s_max", self.s_max),
        ] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::config(format!(
                    "hyperparameter {name} must be finite and positive, got {v}"
                )));
            }
        }
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return Err(Error::config(format!(
                "rho must be in (0,1), got {}",
                self.rho
            )));
        }
        if !(self.c_cap < 1.0 && 2.0 * self.rho <= self.c_cap) {
            return Err(Error::config(format!(
                "need 2*rho <= c_cap < 1, got rho={}, c_cap={}",
                self.rho, self.c_cap
            )));
        }
        if self.j_max < 1 {
            return Err(Error::config("j_max must be at least 1"));
        }
        Ok(())
    }

    /// Gamma shape of the increment over (s_lo, s_hi].
    pub fn increment_shape(&self, s_lo: f64, s_hi: f64) -> f64 {
        self.c0 * self.eta0 * (s_hi.powf(self.kappa0) - s_lo.powf(self.kappa0))
    }

    /// Prior mean of the increment over (s_lo, s_hi] (shape / rate).
    pub fn increment_prior_mean(&self, s_lo: f64, s_hi: f64) -> f64 {
        self.eta0 * (s_hi.powf(self.kappa0) - s_lo.powf(self.kappa0))
    }

    /// Log gamma density of one increment.
    pub fn log_prior_increment(&self, h: f64, s_lo: f64, s_hi: f64) -> f64 {
        debug_assert!(h > 0.0 && s_lo < s_hi);
        let shape = self.increment_shape(s_lo, s_hi);
        debug_assert!(shape > 0.0);
        shape * self.c0.ln() - ln_gamma(shape) + (shape - 1.0) * h.ln() - self.c0 * h
    }

    /// Log density of the interior splits: the even-numbered order statistics
    /// of 2J+1 uniforms on (0, s_max),
    /// (2J+1)! / s_max^{2J+1} * prod_j (s_j - s_{j-1}).
    pub fn log_prior_partition(&self, part: &TimePartition) -> f64 {
        let j = part.j_count() as f64;
        let mut lp = ln_gamma(2.0 * j + 2.0) - (2.0 * j + 1.0) * self.s_max.ln();
        for k in 0..part.n_intervals() {
            lp += part.width(k).ln();
        }
        lp
    }

    /// Log pmf of J under the Poisson(alpha) prior truncated to {0..j_max}.
    pub fn log_prior_j(&self, j: usize) -> Result<f64> {
        if j > self.j_max {
            return Err(Error::invariant(format!(
                "J={j} exceeds j_max={}",
                self.j_max
            )));
        }
        let pmf = self.truncated_poisson_pmf();
        Ok(pmf[j].ln())
    }

    /// Normalized pmf of the truncated Poisson(alpha) over {0..j_max}.
    pub fn truncated_poisson_pmf(&self) -> Vec<f64> {
        let la = self.alpha.ln();
        let logs: Vec<f64> = (0..=self.j_max)
            .map(|k| k as f64 * la - self.alpha - ln_gamma(k as f64 + 1.0))
            .collect();
        let norm = crate::math::logsumexp(&logs);
        logs.iter().map(|l| (l - norm).exp()).collect()
    }

    /// Draw a partition with J interior splits: sort 2J+1 uniforms on
    /// (0, s_max) and keep the 2nd, 4th, ..., 2Jth order statistics.
    pub fn sample_partition<R: Rng>(&self, j: usize, rng: &mut R) -> TimePartition {
        let mut draws: Vec<f64> = (0..2 * j + 1)
            .map(|_| rng.gen::<f64>() * self.s_max)
            .collect();
        draws.sort_by(f64::total_cmp);
        let splits: Vec<f64> = (1..=j).map(|k| draws[2 * k - 1]).collect();
        TimePartition::new(splits, self.s_max).expect("order statistics are strictly increasing")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn hp(s_max: f64) -> Hyperparameters {
        Hyperparameters::with_s_max(s_max)
    }

    #[test]
    fn gamma_log_density_reference_value() {
        // shape 0.2, rate 1 at h=1: -1 - ln Gamma(0.2), Gamma(0.2) ~ 4.59084.
        let hp = hp(1.0);
        assert_relative_eq!(
            hp.log_prior_increment(1.0, 0.0, 1.0),
            -1.0 - ln_gamma(0.2),
            epsilon = 1e-12
        );
        assert_relative_eq!(ln_gamma(0.2), 4.59084371199880f64.ln(), epsilon = 1e-10);
    }

    #[test]
    fn gamma_unit_shape_is_exponential() {
        // c0 * eta0 * (s_hi^k - s_lo^k) = 1 with eta0=1, kappa0=1, s=(0,1).
        let hp = Hyperparameters {
            eta0: 1.0,
            kappa0: 1.0,
            ..hp(1.0)
        };
        assert_relative_eq!(hp.log_prior_increment(0.7, 0.0, 1.0), -0.7, epsilon = 1e-12);
    }

    #[test]
    fn gamma_density_integrates_to_one() {
        // Simpson's rule on a shape > 1 case (no endpoint singularity).
        let hp = Hyperparameters {
            eta0: 2.5,
            kappa0: 1.0,
            ..hp(1.0)
        };
        let (a, b, m) = (0.0f64, 60.0f64, 60_000usize);
        let f = |h: f64| {
            if h <= 0.0 {
                0.0
            } else {
                hp.log_prior_increment(h, 0.0, 1.0).exp()
            }
        };
        let hstep = (b - a) / m as f64;
        let mut sum = f(a) + f(b);
        for k in 1..m {
            let w = if k % 2 == 1 { 4.0 } else { 2.0 };
            sum += w * f(a + k as f64 * hstep);
        }
        assert_relative_eq!(sum * hstep / 3.0, 1.0, epsilon = 1e-6);
    }

    #[test]
    fn shapes_add_over_refinements() {
        let hp = hp(10.0);
        let whole = hp.increment_shape(0.0, 7.0);
        let parts = hp.increment_shape(0.0, 2.5) + hp.increment_shape(2.5, 7.0);
        assert_relative_eq!(whole, parts, epsilon = 1e-12);
    }

    #[test]
    fn partition_prior_reference_value() {
        let hp = hp(1.0);
        let part = TimePartition::new(vec![0.5], 1.0).unwrap();
        assert_relative_eq!(hp.log_prior_partition(&part), 1.5f64.ln(), epsilon = 1e-12);
        let empty = TimePartition::new(vec![], 1.0).unwrap();
        assert_relative_eq!(hp.log_prior_partition(&empty), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn partition_prior_normalizes_at_j2() {
        // Nested Simpson over 0 < s1 < s2 < 1.
        let hp = hp(1.0);
        let m = 400usize;
        let step = 1.0 / m as f64;
        let mut total = 0.0;
        for i in 0..m {
            let s1 = (i as f64 + 0.5) * step;
            for k in (i + 1)..m {
                let s2 = (k as f64 + 0.5) * step;
                let part = TimePartition::new(vec![s1, s2], 1.0).unwrap();
                total += hp.log_prior_partition(&part).exp() * step * step;
            }
        }
        assert_relative_eq!(total, 1.0, epsilon = 1e-3);
    }

    #[test]
    fn truncated_poisson_ratio_and_normalization() {
        let hp = Hyperparameters {
            alpha: 10.0,
            ..hp(1.0)
        };
        let pmf = hp.truncated_poisson_pmf();
        assert_relative_eq!(pmf.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
        for j in 0..hp.j_max {
            assert_relative_eq!(
                pmf[j + 1] / pmf[j],
                hp.alpha / (j + 1) as f64,
                epsilon = 1e-9
            );
        }
        assert_relative_eq!(pmf[10] / pmf[9], 1.0, epsilon = 1e-12);
        assert!(hp.log_prior_j(51).is_err());
    }

    #[test]
    fn sampled_partition_moments_match_beta_order_statistic() {
        // J=1 on (0,1): the split is the median of 3 uniforms, Beta(2,2),
        // mean 0.5 and variance 0.05.
        let hp = hp(1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 100_000;
        let draws: Vec<f64> = (0..n)
            .map(|_| hp.sample_partition(1, &mut rng).splits()[0])
            .collect();
        let mean = crate::math::mean(&draws);
        let var = crate::math::sample_var(&draws);
        let se_mean = (0.05f64 / n as f64).sqrt();
        assert!((mean - 0.5).abs() < 3.0 * se_mean, "mean {mean}");
        assert!((var - 0.05).abs() < 0.002, "var {var}");
    }

    #[test]
    fn sampled_partitions_are_strictly_increasing() {
        let hp = hp(5.0);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for j in [0usize, 1, 4, 9] {
            for _ in 0..50 {
                let part = hp.sample_partition(j, &mut rng);
                assert_eq!(part.j_count(), j);
            }
        }
    }

    #[test]
    fn validation_rejects_bad_settings() {
        assert!(hp(10.0).validate().is_ok());
        assert!(Hyperparameters {
            rho: 0.5,
            ..hp(1.0)
        }
        .validate()
        .is_err());
        assert!(Hyperparameters {
            eta0: 0.0,
            ..hp(1.0)
        }
        .validate()
        .is_err());
        assert!(Hyperparameters {
            c_cap: 1.0,
            ..hp(1.0)
        }
        .validate()
        .is_err());
        assert!(Hyperparameters {
            j_max: 0,
            ..hp(1.0)
        }
        .validate()
        .is_err());
    }
}
