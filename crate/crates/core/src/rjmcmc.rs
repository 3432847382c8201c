//! Random-scan Metropolis-Hastings-Green sampler over (beta, partition, h).
//!
//! Each iteration draws one move by the J-dependent move probabilities:
//! RP (coefficient random walk), BH (increment random walk on the log scale),
//! BI (birth of a split at an observed event time), DI (death of a split).
//! Birth/death proposals are dimension-changing and carry the transform
//! Jacobian in their acceptance ratio.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::likelihood::{HazardIncrements, LikCache, ModelState, TimePartition};
use crate::priors::Hyperparameters;

/// Per-iteration move distribution at a given J.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MoveProbabilities {
    pub rp: f64,
    pub bh: f64,
    pub bi: f64,
    pub di: f64,
}

/// pi_BI = rho * min(1, alpha/(J+1)) (0 at J_max), pi_DI = rho * min(1, J/alpha),
/// and the remainder is split evenly between RP and BH.
pub fn move_probabilities(j: usize, hp: &Hyperparameters) -> MoveProbabilities {
    let bi = if j >= hp.j_max {
        0.0
    } else {
        hp.rho * (hp.alpha / (j + 1) as f64).min(1.0)
    };
    let di = if j == 0 {
        0.0
    } else {
        hp.rho * (j as f64 / hp.alpha).min(1.0)
    };
    debug_assert!(bi + di <= hp.c_cap);
    let rest = (1.0 - bi - di) / 2.0;
    MoveProbabilities {
        rp: rest,
        bh: rest,
        bi,
        di,
    }
}

/// Split one increment h_j at s_star into (h_lo, h_hi).
///
/// With a = s_star - s_lo, b = s_hi - s_star, D = a + b, r = (1-U)/U:
///   h_lo = h_j * (a/D) * r^{b/D},  h_hi = h_j * (b/D) * r^{-a/D}.
/// This is the unique pair satisfying both the weighted-log-mean identity
/// a*log(h_lo/a) + b*log(h_hi/b) = D*log(h_j/D) and the perturbation
/// h_lo*b / (h_hi*a) = (1-U)/U.
pub fn split_transform(h_j: f64, s_lo: f64, s_star: f64, s_hi: f64, u: f64) -> (f64, f64) {
    debug_assert!(s_lo < s_star && s_star < s_hi);
    debug_assert!(u > 0.0 && u < 1.0);
    let a = s_star - s_lo;
    let b = s_hi - s_star;
    let d = s_hi - s_lo;
    let log_r = (1.0 - u).ln() - u.ln();
    let h_lo = h_j * (a / d) * (log_r * b / d).exp();
    let h_hi = h_j * (b / d) * (-log_r * a / d).exp();
    (h_lo, h_hi)
}

/// Inverse of [`split_transform`]: the merged increment from the
/// weighted-log-mean identity and the uniform variate that would have
/// produced the pair.
pub fn merge_transform(h_lo: f64, h_hi: f64, s_lo: f64, s_mid: f64, s_hi: f64) -> (f64, f64) {
    debug_assert!(s_lo < s_mid && s_mid < s_hi);
    let a = s_mid - s_lo;
    let b = s_hi - s_mid;
    let d = s_hi - s_lo;
    let h_merged = d * ((a * (h_lo / a).ln() + b * (h_hi / b).ln()) / d).exp();
    let u_star = h_hi * a / (h_hi * a + h_lo * b);
    (h_merged, u_star)
}

/// Log of the split-transform Jacobian determinant,
/// h_j * (a*b/D^2) * (1-U)^{-2a/D} * U^{-2b/D},
/// equivalently h_lo * h_hi / (h_j * U * (1-U)).
pub fn log_split_jacobian(h_j: f64, s_lo: f64, s_star: f64, s_hi: f64, u: f64) -> f64 {
    let a = s_star - s_lo;
    let b = s_hi - s_star;
    let d = s_hi - s_lo;
    h_j.ln() + a.ln() + b.ln()
        - 2.0 * d.ln()
        - (2.0 * a / d) * (1.0 - u).ln()
        - (2.0 * b / d) * u.ln()
}

/// Log acceptance ratio of a birth at s_star inside (s_lo, s_hi), given the
/// log-likelihood change, the current split count j, and the size of the
/// candidate pool the proposal drew from. The Uniform(0,1) density of U
/// equals 1 and contributes nothing.
#[allow(clippy::too_many_arguments)]
pub fn log_birth_acceptance(
    hp: &Hyperparameters,
    dll: f64,
    j: usize,
    n_cand: usize,
    s_lo: f64,
    s_star: f64,
    s_hi: f64,
    h_j: f64,
    h_lo: f64,
    h_hi: f64,
    u: f64,
) -> f64 {
    let a = s_star - s_lo;
    let b = s_hi - s_star;
    let d = s_hi - s_lo;
    let jf = j as f64;
    let log_prior_j_ratio = hp.alpha.ln() - (jf + 1.0).ln();
    let log_prior_h_ratio = hp.log_prior_increment(h_lo, s_lo, s_star)
        + hp.log_prior_increment(h_hi, s_star, s_hi)
        - hp.log_prior_increment(h_j, s_lo, s_hi);
    let log_prior_s_ratio = (2.0 * jf + 3.0).ln() + (2.0 * jf + 2.0).ln() + a.ln() + b.ln()
        - 2.0 * hp.s_max.ln()
        - d.ln();
    let log_proposal_ratio = move_probabilities(j + 1, hp).di.ln() + (n_cand as f64).ln()
        - move_probabilities(j, hp).bi.ln()
        - (jf + 1.0).ln();
    dll + log_prior_j_ratio
        + log_prior_h_ratio
        + log_prior_s_ratio
        + log_proposal_ratio
        + log_split_jacobian(h_j, s_lo, s_star, s_hi, u)
}

/// Log acceptance ratio of a death removing the split at s_mid, with j the
/// split count before removal and n_cand_post the candidate-pool size of the
/// post-death state (the pool the reverse birth would draw from).
#[allow(clippy::too_many_arguments)]
pub fn log_death_acceptance(
    hp: &Hyperparameters,
    dll: f64,
    j: usize,
    n_cand_post: usize,
    s_lo: f64,
    s_mid: f64,
    s_hi: f64,
    h_lo: f64,
    h_hi: f64,
    h_merged: f64,
    u_star: f64,
) -> f64 {
    let a = s_mid - s_lo;
    let b = s_hi - s_mid;
    let d = s_hi - s_lo;
    let jf = j as f64;
    let log_prior_j_ratio = jf.ln() - hp.alpha.ln();
    let log_prior_h_ratio = hp.log_prior_increment(h_merged, s_lo, s_hi)
        - hp.log_prior_increment(h_lo, s_lo, s_mid)
        - hp.log_prior_increment(h_hi, s_mid, s_hi);
    let log_prior_s_ratio =
        2.0 * hp.s_max.ln() + d.ln() - (2.0 * jf + 1.0).ln() - (2.0 * jf).ln() - a.ln() - b.ln();
    let log_proposal_ratio = move_probabilities(j - 1, hp).bi.ln() + jf.ln()
        - move_probabilities(j, hp).di.ln()
        - (n_cand_post as f64).ln();
    dll + log_prior_j_ratio + log_prior_h_ratio + log_prior_s_ratio + log_proposal_ratio
        - log_split_jacobian(h_merged, s_lo, s_mid, s_hi, u_star)
}

/// How the time partition is treated during sampling.
#[derive(Debug, Clone, PartialEq)]
pub enum PartitionScheme {
    /// Trans-dimensional: splits move via birth/death (GP-RJ).
    Adaptive,
    /// Fixed equal-width partition with j interior splits (GP-EQ).
    EqualSpaced { j: usize },
    /// Fixed partition at the distinct observed event times (GP-UQ).
    EventTimes,
}

impl PartitionScheme {
    pub fn is_fixed(&self) -> bool {
        !matches!(self, PartitionScheme::Adaptive)
    }
}

/// Chain-level sampler settings.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplerConfig {
    pub n_iter: u64,
    pub n_burnin: u64,
    /// Retention stride over post-burn-in iterations.
    pub thin: u64,
    /// Initial random-walk standard deviation per coefficient.
    pub beta_step: f64,
    /// Initial log-scale random-walk standard deviation for increments.
    pub h_step: f64,
    /// Adapt step sizes during burn-in (frozen afterwards).
    pub adapt: bool,
    pub seed: u64,
    /// RNG substream; chains of one fit use 0, 1, ...
    pub stream: u64,
    pub scheme: PartitionScheme,
    /// Replace the data log-likelihood with a constant. Used to verify that
    /// the sampler recovers its priors.
    pub flat_likelihood: bool,
}

impl SamplerConfig {
    /// Desk-scale defaults: 100k iterations, half burn-in, thin 10.
    pub fn desk_scale(seed: u64, stream: u64) -> Self {
        SamplerConfig {
            n_iter: 100_000,
            n_burnin: 50_000,
            thin: 10,
            beta_step: 0.1,
            h_step: 0.5,
            adapt: true,
            seed,
            stream,
            scheme: PartitionScheme::Adaptive,
            flat_likelihood: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_burnin >= self.n_iter {
            return Err(Error::config(format!(
                "n_burnin ({}) must be smaller than n_iter ({})",
                self.n_burnin, self.n_iter
            )));
        }
        if self.thin == 0 || self.n_iter - self.n_burnin < self.thin {
            return Err(Error::config(format!(
                "thin ({}) must be in [1, n_iter - n_burnin]",
                self.thin
            )));
        }
        for (name, v) in [("beta_step", self.beta_step), ("h_step", self.h_step)] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::config(format!(
                    "{name} must be finite and positive, got {v}"
                )));
            }
        }
        if let PartitionScheme::EqualSpaced { j } = self.scheme {
            if j > 200 {
                return Err(Error::config(format!(
                    "equal-spaced partition with {j} splits is unreasonably fine"
                )));
            }
        }
        Ok(())
    }
}

/// Proposed/accepted counters for one move type.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Counts {
    pub proposed: u64,
    pub accepted: u64,
}

impl Counts {
    fn record(&mut self, accepted: bool) {
        self.proposed += 1;
        self.accepted += accepted as u64;
    }

    pub fn rate(&self) -> Option<f64> {
        (self.proposed > 0).then(|| self.accepted as f64 / self.proposed as f64)
    }
}

/// Post-burn-in acceptance tallies (burn-in proposals feed only adaptation).
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct MoveTallies {
    pub rp: Counts,
    pub bh: Counts,
    pub bi: Counts,
    pub di: Counts,
}

/// Multiplicative Robbins-Monro adaptation of a random-walk step size,
/// targeting a fixed acceptance rate.
#[derive(Debug, Clone)]
pub struct StepAdapter {
    log_step: f64,
    t: u64,
}

const TARGET_ACCEPTANCE: f64 = 0.35;

impl StepAdapter {
    pub fn new(initial_step: f64) -> Self {
        StepAdapter {
            log_step: initial_step.ln(),
            t: 0,
        }
    }

    pub fn step(&self) -> f64 {
        self.log_step.exp()
    }

    /// Record one accept/reject outcome; the gain decays as t^{-0.6}.
    pub fn observe(&mut self, accepted: bool) {
        self.t += 1;
        let gain = (self.t as f64).powf(-0.6);
        let indicator = accepted as u8 as f64;
        self.log_step = (self.log_step + gain * (indicator - TARGET_ACCEPTANCE)).clamp(-14.0, 7.0);
    }
}

/// Retained draws from one chain.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleChain {
    pub samples: Vec<ModelState>,
    /// Global iteration index of each retained sample.
    pub iterations: Vec<u64>,
    pub log_lik_trace: Vec<f64>,
    pub acceptance: MoveTallies,
    pub seed: u64,
    pub stream: u64,
}

impl SampleChain {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn beta_trace(&self, m: usize) -> Vec<f64> {
        self.samples.iter().map(|s| s.beta[m]).collect()
    }

    pub fn j_trace(&self) -> Vec<f64> {
        self.samples
            .iter()
            .map(|s| s.partition.j_count() as f64)
            .collect()
    }
}

/// Distinct event times strictly inside (0, s_max) that are not currently
/// splits: the pool a birth proposal draws from.
pub fn candidate_splits(event_lattice: &[f64], part: &TimePartition) -> Vec<f64> {
    event_lattice
        .iter()
        .copied()
        .filter(|t| part.splits().binary_search_by(|s| s.total_cmp(t)).is_err())
        .collect()
}

fn lattice_contains(event_lattice: &[f64], t: f64) -> bool {
    event_lattice.binary_search_by(|s| s.total_cmp(&t)).is_ok()
}

/// Draw a strictly interior uniform variate.
fn open_uniform<R: Rng>(rng: &mut R) -> f64 {
    loop {
        let u = rng.gen::<f64>();
        if u > 0.0 {
            return u;
        }
    }
}

fn mh_accept<R: Rng>(log_ratio: f64, rng: &mut R) -> bool {
    if log_ratio.is_nan() {
        return false;
    }
    if log_ratio >= 0.0 {
        return true;
    }
    open_uniform(rng).ln() < log_ratio
}

/// One RP sweep: random-walk update of each coefficient in random order.
/// `cache` is None only in flat-likelihood mode.
fn sweep_beta<R: Rng>(
    data: &Dataset,
    state: &mut ModelState,
    mut cache: Option<&mut LikCache>,
    adapters: &mut [StepAdapter],
    adapting: bool,
    rng: &mut R,
) -> Counts {
    let mut counts = Counts::default();
    let p = state.beta.len();
    if p == 0 {
        return counts;
    }
    if let Some(c) = cache.as_deref_mut() {
        c.ensure_cumhaz(data, state);
    }
    let mut order: Vec<usize> = (0..p).collect();
    order.shuffle(rng);
    for &m in &order {
        let noise: f64 = rng.sample(StandardNormal);
        let db = adapters[m].step() * noise;
        let dll = match cache.as_deref_mut() {
            Some(c) => c.delta_beta(data, m, db),
            None => 0.0,
        };
        let accepted = mh_accept(dll, rng);
        if accepted {
            state.beta[m] += db;
            if let Some(c) = cache.as_deref_mut() {
                c.accept_beta(data, m, db, dll);
                c.ensure_cumhaz(data, state);
            }
        }
        if adapting {
            adapters[m].observe(accepted);
        }
        counts.record(accepted);
    }
    counts
}

/// One BH sweep: log-scale random-walk update of every increment. The
/// acceptance ratio carries the log h change-of-variable correction.
fn sweep_increments<R: Rng>(
    data: &Dataset,
    state: &mut ModelState,
    mut cache: Option<&mut LikCache>,
    hp: &Hyperparameters,
    adapter: &mut StepAdapter,
    adapting: bool,
    rng: &mut R,
) -> Counts {
    let mut counts = Counts::default();
    if let Some(c) = cache.as_deref_mut() {
        c.ensure_eraw(data, state);
    }
    for j in 0..state.partition.n_intervals() {
        let noise: f64 = rng.sample(StandardNormal);
        let z = adapter.step() * noise;
        let h_old = state.increments.get(j);
        let h_new = h_old * z.exp();
        let (lo, hi) = (state.partition.lower(j), state.partition.upper(j));
        let mut accepted = false;
        if h_new.is_finite() && h_new > 0.0 {
            let dll = match cache.as_deref_mut() {
                Some(c) => c.delta_increment(state, j, h_new),
                None => 0.0,
            };
            let log_ratio = dll + hp.log_prior_increment(h_new, lo, hi)
                - hp.log_prior_increment(h_old, lo, hi)
                + z;
            accepted = mh_accept(log_ratio, rng);
            if accepted {
                state.increments.set(j, h_new);
                if let Some(c) = cache.as_deref_mut() {
                    c.accept_increment(dll);
                }
            }
        }
        if adapting {
            adapter.observe(accepted);
        }
        counts.record(accepted);
    }
    counts
}

/// One birth proposal. An empty candidate pool is an automatic rejection.
fn try_birth<R: Rng>(
    data: &Dataset,
    event_lattice: &[f64],
    state: &mut ModelState,
    mut cache: Option<&mut LikCache>,
    hp: &Hyperparameters,
    rng: &mut R,
) -> Counts {
    let mut counts = Counts::default();
    let candidates = candidate_splits(event_lattice, &state.partition);
    if candidates.is_empty() {
        counts.record(false);
        return counts;
    }
    let s_star = candidates[rng.gen_range(0..candidates.len())];
    let u = open_uniform(rng);
    let j_int = state.partition.interval_index(s_star);
    let (s_lo, s_hi) = (state.partition.lower(j_int), state.partition.upper(j_int));
    let h_j = state.increments.get(j_int);
    let (h_lo, h_hi) = split_transform(h_j, s_lo, s_star, s_hi, u);
    if !(h_lo.is_finite() && h_lo > 0.0 && h_hi.is_finite() && h_hi > 0.0) {
        counts.record(false);
        return counts;
    }
    let j = state.partition.j_count();
    let (dll, agg) = match cache.as_deref_mut() {
        Some(c) => {
            c.ensure_eraw(data, state);
            let (dll, agg) = c.delta_birth(data, state, j_int, s_star, h_lo, h_hi);
            (dll, Some(agg))
        }
        None => (0.0, None),
    };
    let log_acc = log_birth_acceptance(
        hp,
        dll,
        j,
        candidates.len(),
        s_lo,
        s_star,
        s_hi,
        h_j,
        h_lo,
        h_hi,
        u,
    );
    let accepted = mh_accept(log_acc, rng);
    if accepted {
        state.partition.insert_split(s_star);
        state.increments.split(j_int, h_lo, h_hi);
        if let (Some(c), Some(agg)) = (cache, agg) {
            c.accept_birth(data, j_int, s_star, agg, dll);
        }
    }
    counts.record(accepted);
    counts
}

/// One death proposal: remove a uniformly chosen split and merge its two
/// intervals through the inverse transform.
fn try_death<R: Rng>(
    data: &Dataset,
    event_lattice: &[f64],
    state: &mut ModelState,
    mut cache: Option<&mut LikCache>,
    hp: &Hyperparameters,
    rng: &mut R,
) -> Counts {
    let mut counts = Counts::default();
    let j = state.partition.j_count();
    debug_assert!(j >= 1);
    let r = rng.gen_range(0..j);
    let (s_lo, s_mid, s_hi) = (
        state.partition.lower(r),
        state.partition.upper(r),
        state.partition.upper(r + 1),
    );
    let (h_lo, h_hi) = (state.increments.get(r), state.increments.get(r + 1));
    let (h_merged, u_star) = merge_transform(h_lo, h_hi, s_lo, s_mid, s_hi);
    if !(h_merged.is_finite() && h_merged > 0.0) {
        counts.record(false);
        return counts;
    }
    // Candidate pool of the post-death state: the removed split becomes
    // available again iff it sits on the event lattice.
    let n_cand_post = candidate_splits(event_lattice, &state.partition).len()
        + lattice_contains(event_lattice, s_mid) as usize;
    let dll = match cache.as_deref_mut() {
        Some(c) => {
            c.ensure_eraw(data, state);
            c.delta_death(state, r, h_merged)
        }
        None => 0.0,
    };
    let log_acc = log_death_acceptance(
        hp,
        dll,
        j,
        n_cand_post,
        s_lo,
        s_mid,
        s_hi,
        h_lo,
        h_hi,
        h_merged,
        u_star,
    );
    let accepted = mh_accept(log_acc, rng);
    if accepted {
        state.partition.remove_split(r);
        state.increments.merge(r, h_merged);
        if let Some(c) = cache {
            c.accept_death(data, r, dll);
        }
    }
    counts.record(accepted);
    counts
}

/// Default initial state: beta = 0, round(alpha) splits at evenly spaced
/// event-time ranks (or the scheme's fixed partition), increments at their
/// prior means.
pub fn initial_state(
    data: &Dataset,
    hp: &Hyperparameters,
    scheme: &PartitionScheme,
) -> Result<ModelState> {
    let events = data.distinct_event_times();
    let partition = match scheme {
        PartitionScheme::Adaptive => {
            let interior = events.iter().filter(|&&t| t < hp.s_max).count();
            let j0 = (hp.alpha.round() as usize).min(hp.j_max).min(interior);
            TimePartition::event_quantiles(&events, j0, hp.s_max)?
        }
        PartitionScheme::EqualSpaced { j } => TimePartition::equal_spaced(*j, hp.s_max)?,
        PartitionScheme::EventTimes => {
            let splits: Vec<f64> = events.iter().copied().filter(|&t| t < hp.s_max).collect();
            TimePartition::new(splits, hp.s_max)?
        }
    };
    let increments = HazardIncrements::new(
        (0..partition.n_intervals())
            .map(|k| hp.increment_prior_mean(partition.lower(k), partition.upper(k)))
            .collect(),
    )?;
    Ok(ModelState {
        beta: vec![0.0; data.p()],
        partition,
        increments,
    })
}

/// Run one chain. Deterministic given (seed, stream).
pub fn run_chain(
    data: &Dataset,
    hp: &Hyperparameters,
    cfg: &SamplerConfig,
    init: Option<ModelState>,
) -> Result<SampleChain> {
    hp.validate()?;
    cfg.validate()?;
    if hp.s_max < data.y_max() {
        return Err(Error::config(format!(
            "s_max ({}) must cover the largest observed time ({})",
            hp.s_max,
            data.y_max()
        )));
    }

    let mut state = match init {
        Some(s) => {
            s.validate()?;
            if s.beta.len() != data.p() {
                return Err(Error::config(format!(
                    "initial state has {} coefficients, dataset has {}",
                    s.beta.len(),
                    data.p()
                )));
            }
            if s.partition.s_max() != hp.s_max {
                return Err(Error::config(
                    "initial partition terminal edge differs from s_max",
                ));
            }
            s
        }
        None => initial_state(data, hp, &cfg.scheme)?,
    };

    let fixed = cfg.scheme.is_fixed();
    let event_lattice: Vec<f64> = data
        .distinct_event_times()
        .into_iter()
        .filter(|&t| t < hp.s_max)
        .collect();

    let mut cache = if cfg.flat_likelihood {
        None
    } else {
        Some(LikCache::new(data, &state))
    };

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(cfg.stream);

    let mut beta_adapters: Vec<StepAdapter> = (0..data.p())
        .map(|_| StepAdapter::new(cfg.beta_step))
        .collect();
    let mut h_adapter = StepAdapter::new(cfg.h_step);

    let retained_cap = ((cfg.n_iter - cfg.n_burnin) / cfg.thin) as usize;
    let mut chain = SampleChain {
        samples: Vec::with_capacity(retained_cap),
        iterations: Vec::with_capacity(retained_cap),
        log_lik_trace: Vec::with_capacity(retained_cap),
        acceptance: MoveTallies::default(),
        seed: cfg.seed,
        stream: cfg.stream,
    };

    for iter in 1..=cfg.n_iter {
        let in_burnin = iter <= cfg.n_burnin;
        let adapting = cfg.adapt && in_burnin;
        let probs = if fixed {
            MoveProbabilities {
                rp: 0.5,
                bh: 0.5,
                bi: 0.0,
                di: 0.0,
            }
        } else {
            move_probabilities(state.partition.j_count(), hp)
        };
        let draw = rng.gen::<f64>();
        let (move_name, counts) = if draw < probs.rp {
            (
                "RP",
                sweep_beta(
                    data,
                    &mut state,
                    cache.as_mut(),
                    &mut beta_adapters,
                    adapting,
                    &mut rng,
                ),
            )
        } else if draw < probs.rp + probs.bh {
            (
                "BH",
                sweep_increments(
                    data,
                    &mut state,
                    cache.as_mut(),
                    hp,
                    &mut h_adapter,
                    adapting,
                    &mut rng,
                ),
            )
        } else if draw < probs.rp + probs.bh + probs.bi {
            (
                "BI",
                try_birth(
                    data,
                    &event_lattice,
                    &mut state,
                    cache.as_mut(),
                    hp,
                    &mut rng,
                ),
            )
        } else {
            (
                "DI",
                try_death(
                    data,
                    &event_lattice,
                    &mut state,
                    cache.as_mut(),
                    hp,
                    &mut rng,
                ),
            )
        };
        if !in_burnin {
            let tally = match move_name {
                "RP" => &mut chain.acceptance.rp,
                "BH" => &mut chain.acceptance.bh,
                "BI" => &mut chain.acceptance.bi,
                _ => &mut chain.acceptance.di,
            };
            tally.proposed += counts.proposed;
            tally.accepted += counts.accepted;
        }

        // Periodic full recompute caps incremental rounding drift.
        if let Some(c) = cache.as_mut() {
            if iter % 4096 == 0 {
                c.resync_loglik(data, &state);
            }
        }

        if !in_burnin && (iter - cfg.n_burnin).is_multiple_of(cfg.thin) {
            let ll = match cache.as_mut() {
                Some(c) => c.loglik(),
                None => 0.0,
            };
            if !ll.is_finite() {
                return Err(Error::invariant(format!(
                    "non-finite log-likelihood at iteration {iter} after move {move_name}"
                )));
            }
            chain.samples.push(state.clone());
            chain.iterations.push(iter);
            chain.log_lik_trace.push(ll);
        }
    }

    if let Some(c) = cache.as_mut() {
        let drift = c.resync_loglik(data, &state);
        if drift.abs() > 1e-6 {
            return Err(Error::invariant(format!(
                "incremental log-likelihood drifted by {drift} over the run"
            )));
        }
    }
    debug_assert!(!chain.samples.is_empty());
    Ok(chain)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::likelihood::log_likelihood;
    use approx::assert_relative_eq;

    fn hp_for(s_max: f64) -> Hyperparameters {
        Hyperparameters::with_s_max(s_max)
    }

    #[test]
    fn move_probability_reference_values() {
        let hp = hp_for(1.0);
        let p = move_probabilities(5, &hp);
        assert_relative_eq!(p.bi, 0.2, epsilon = 1e-15);
        assert_relative_eq!(p.di, 0.1, epsilon = 1e-15);
        assert_relative_eq!(p.rp, 0.35, epsilon = 1e-15);
        assert_relative_eq!(p.bh, 0.35, epsilon = 1e-15);

        let p15 = move_probabilities(15, &hp);
        assert_relative_eq!(p15.bi, 0.125, epsilon = 1e-15);
        assert_relative_eq!(p15.di, 0.2, epsilon = 1e-15);

        assert_eq!(move_probabilities(hp.j_max, &hp).bi, 0.0);
        assert_eq!(move_probabilities(0, &hp).di, 0.0);
        for j in 0..=hp.j_max {
            let m = move_probabilities(j, &hp);
            assert_relative_eq!(m.rp + m.bh + m.bi + m.di, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn split_transform_reference_values() {
        let (lo, hi) = split_transform(1.0, 0.0, 1.0, 2.0, 0.5);
        assert_relative_eq!(lo, 0.5, epsilon = 1e-12);
        assert_relative_eq!(hi, 0.5, epsilon = 1e-12);

        let (lo, hi) = split_transform(1.0, 0.0, 0.5, 2.0, 0.4);
        assert_relative_eq!(lo, 0.33885, epsilon = 1e-5);
        assert_relative_eq!(hi, 0.67771, epsilon = 1e-5);
    }

    #[test]
    fn split_satisfies_both_constraints() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let h: f64 = rng.gen_range(0.01..5.0);
            let s_lo: f64 = rng.gen_range(0.0..3.0);
            let s_star = s_lo + rng.gen_range(0.05..2.0);
            let s_hi = s_star + rng.gen_range(0.05..2.0);
            let u: f64 = rng.gen_range(0.02..0.98);
            let (h_lo, h_hi) = split_transform(h, s_lo, s_star, s_hi, u);
            let (a, b, d) = (s_star - s_lo, s_hi - s_star, s_hi - s_lo);
            // Weighted log mean.
            assert_relative_eq!(
                a * (h_lo / a).ln() + b * (h_hi / b).ln(),
                d * (h / d).ln(),
                epsilon = 1e-12
            );
            // Multiplicative perturbation.
            assert_relative_eq!(h_lo * b / (h_hi * a), (1.0 - u) / u, epsilon = 1e-10);
        }
    }

    #[test]
    fn merge_inverts_split() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..200 {
            let h: f64 = rng.gen_range(0.01..5.0);
            let s_lo: f64 = rng.gen_range(0.0..3.0);
            let s_star = s_lo + rng.gen_range(0.05..2.0);
            let s_hi = s_star + rng.gen_range(0.05..2.0);
            let u: f64 = rng.gen_range(0.02..0.98);
            let (h_lo, h_hi) = split_transform(h, s_lo, s_star, s_hi, u);
            let (h_back, u_back) = merge_transform(h_lo, h_hi, s_lo, s_star, s_hi);
            assert_relative_eq!(h_back, h, epsilon = 1e-12);
            assert_relative_eq!(u_back, u, epsilon = 1e-12);
        }
        // Symmetric merge of equal increments.
        let (h, u) = merge_transform(0.5, 0.5, 0.0, 1.0, 2.0);
        assert_relative_eq!(h, 1.0, epsilon = 1e-12);
        assert_relative_eq!(u, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn jacobian_reference_values() {
        // h=1, a=0.5, b=1.5, U=0.4: 0.1875 * 0.6^{-0.5} * 0.4^{-1.5}.
        let lj = log_split_jacobian(1.0, 0.0, 0.5, 2.0, 0.4);
        assert_relative_eq!(lj.exp(), 0.95683, epsilon = 1e-5);
        // Midpoint with U = 0.5 collapses to h_j.
        let lj_mid = log_split_jacobian(2.5, 0.0, 1.0, 2.0, 0.5);
        assert_relative_eq!(lj_mid.exp(), 2.5, epsilon = 1e-12);
    }

    #[test]
    fn jacobian_equals_product_identity() {
        // det = h_lo * h_hi / (h_j * U * (1-U)).
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let h: f64 = rng.gen_range(0.01..5.0);
            let s_lo: f64 = rng.gen_range(0.0..3.0);
            let s_star = s_lo + rng.gen_range(0.05..2.0);
            let s_hi = s_star + rng.gen_range(0.05..2.0);
            let u: f64 = rng.gen_range(0.02..0.98);
            let (h_lo, h_hi) = split_transform(h, s_lo, s_star, s_hi, u);
            assert_relative_eq!(
                log_split_jacobian(h, s_lo, s_star, s_hi, u),
                (h_lo * h_hi / (h * u * (1.0 - u))).ln(),
                epsilon = 1e-10
            );
        }
    }

    fn toy_data(seed: u64, n: usize) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let times: Vec<f64> = (0..n).map(|_| rng.gen_range(0.2..10.0)).collect();
        let events: Vec<bool> = (0..n).map(|i| i % 4 != 0).collect();
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        Dataset::from_columns(times, events, vec![x], vec!["x1".into()]).unwrap()
    }

    #[test]
    fn same_seed_gives_identical_chain() {
        let data = toy_data(11, 30);
        let hp = Hyperparameters {
            alpha: 3.0,
            ..hp_for(data.y_max())
        };
        let cfg = SamplerConfig {
            n_iter: 2000,
            n_burnin: 1000,
            thin: 5,
            ..SamplerConfig::desk_scale(42, 0)
        };
        let a = run_chain(&data, &hp, &cfg, None).unwrap();
        let b = run_chain(&data, &hp, &cfg, None).unwrap();
        assert_eq!(a, b);
        let c = run_chain(
            &data,
            &hp,
            &SamplerConfig {
                stream: 1,
                ..cfg.clone()
            },
            None,
        )
        .unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn fixed_partition_never_moves() {
        let data = toy_data(12, 25);
        let hp = hp_for(data.y_max());
        let cfg = SamplerConfig {
            n_iter: 3000,
            n_burnin: 500,
            thin: 5,
            scheme: PartitionScheme::EqualSpaced { j: 4 },
            ..SamplerConfig::desk_scale(7, 0)
        };
        let chain = run_chain(&data, &hp, &cfg, None).unwrap();
        let first = &chain.samples[0].partition;
        assert_eq!(first.j_count(), 4);
        for s in &chain.samples {
            assert_eq!(&s.partition, first);
        }
        assert_eq!(chain.acceptance.bi.proposed, 0);
        assert_eq!(chain.acceptance.di.proposed, 0);
    }

    #[test]
    fn event_time_scheme_uses_every_distinct_event_time() {
        let data = toy_data(13, 20);
        let hp = hp_for(data.y_max());
        let cfg = SamplerConfig {
            n_iter: 200,
            n_burnin: 100,
            thin: 10,
            scheme: PartitionScheme::EventTimes,
            ..SamplerConfig::desk_scale(7, 0)
        };
        let chain = run_chain(&data, &hp, &cfg, None).unwrap();
        let interior: Vec<f64> = data
            .distinct_event_times()
            .into_iter()
            .filter(|&t| t < hp.s_max)
            .collect();
        assert_eq!(chain.samples[0].partition.splits(), &interior[..]);
    }

    #[test]
    fn retained_states_satisfy_invariants() {
        let data = toy_data(14, 40);
        let hp = Hyperparameters {
            alpha: 4.0,
            ..hp_for(data.y_max())
        };
        let cfg = SamplerConfig {
            n_iter: 4000,
            n_burnin: 1000,
            thin: 3,
            ..SamplerConfig::desk_scale(9, 0)
        };
        let chain = run_chain(&data, &hp, &cfg, None).unwrap();
        assert!(!chain.is_empty());
        for s in &chain.samples {
            s.validate().unwrap();
            assert!(s.partition.j_count() <= hp.j_max);
        }
        // Log-likelihood trace must agree with a fresh evaluation.
        for (s, &ll) in chain.samples.iter().zip(&chain.log_lik_trace) {
            assert_relative_eq!(ll, log_likelihood(&data, s), epsilon = 1e-7);
        }
    }

    #[test]
    fn increments_recover_their_prior_in_flat_mode() {
        // Flat likelihood and a fixed 2-interval partition: BH is the only
        // state-changing move, so each h_j must recover Gamma(shape_j, c0).
        let data = Dataset::from_columns(vec![1.0, 2.0], vec![true, true], vec![], vec![]).unwrap();
        let hp = hp_for(2.0);
        let cfg = SamplerConfig {
            n_iter: 120_000,
            n_burnin: 20_000,
            thin: 5,
            scheme: PartitionScheme::EqualSpaced { j: 1 },
            flat_likelihood: true,
            ..SamplerConfig::desk_scale(21, 0)
        };
        let chain = run_chain(&data, &hp, &cfg, None).unwrap();
        for j in 0..2 {
            let (lo, hi) = (
                chain.samples[0].partition.lower(j),
                chain.samples[0].partition.upper(j),
            );
            let shape = hp.increment_shape(lo, hi);
            let draws: Vec<f64> = chain.samples.iter().map(|s| s.increments.get(j)).collect();
            let mean = crate::math::mean(&draws);
            let want = shape / hp.c0;
            // Generous tolerance: small-shape gammas mix slowly.
            assert!(
                (mean - want).abs() < 0.12 * want.max(0.05),
                "interval {j}: mean {mean}, prior mean {want}"
            );
        }
    }

    #[test]
    fn beta_posterior_matches_grid_oracle() {
        // Single binary covariate, fixed single-interval baseline. The
        // posterior over beta alone (flat prior) can be integrated on a grid.
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let n = 40;
        let times: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..5.0)).collect();
        let events: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.8)).collect();
        let mut x: Vec<f64> = (0..n).map(|_| rng.gen_bool(0.5) as u8 as f64).collect();
        x[0] = 1.0;
        let mut events = events;
        events[0] = true;
        let data =
            Dataset::from_columns(times, events, vec![x.clone()], vec!["x1".into()]).unwrap();

        let partition = TimePartition::new(vec![], data.y_max()).unwrap();
        let h = HazardIncrements::new(vec![1.5]).unwrap();

        // Grid integration of the posterior mean of beta.
        let loglik_at = |b: f64| {
            let state = ModelState {
                beta: vec![b],
                partition: partition.clone(),
                increments: h.clone(),
            };
            log_likelihood(&data, &state)
        };
        let lmax = (-400..=600)
            .map(|k| loglik_at(k as f64 / 100.0))
            .fold(f64::NEG_INFINITY, f64::max);
        let (mut z, mut zb) = (0.0, 0.0);
        for k in -400..=600 {
            let b = k as f64 / 100.0;
            let w = (loglik_at(b) - lmax).exp();
            z += w;
            zb += w * b;
        }
        let oracle_mean = zb / z;

        // MCMC over beta only: fixed partition, increments pinned by an
        // initial state, and BH disabled by accepting only RP draws is not
        // expressible; instead run the full fixed-partition sampler and use
        // a conjugate-style wide tolerance on the beta posterior mean.
        let hp = Hyperparameters {
            // Tight prior around the fixed increment keeps h near 1.5 so the
            // beta marginal stays close to the grid oracle's conditional.
            eta0: 1.5 / data.y_max(),
            kappa0: 1.0,
            c0: 400.0,
            ..hp_for(data.y_max())
        };
        let cfg = SamplerConfig {
            n_iter: 60_000,
            n_burnin: 10_000,
            thin: 5,
            scheme: PartitionScheme::EqualSpaced { j: 0 },
            ..SamplerConfig::desk_scale(77, 0)
        };
        let chain = run_chain(&data, &hp, &cfg, None).unwrap();
        let bmean = crate::math::mean(&chain.beta_trace(0));
        assert!(
            (bmean - oracle_mean).abs() < 0.1,
            "sampler {bmean} vs oracle {oracle_mean}"
        );
    }

    #[test]
    fn rejects_bad_configs() {
        let data = toy_data(15, 10);
        let hp = hp_for(data.y_max());
        let mut cfg = SamplerConfig::desk_scale(1, 0);
        cfg.n_iter = 100;
        cfg.n_burnin = 100;
        assert!(run_chain(&data, &hp, &cfg, None).is_err());

        let hp_small = Hyperparameters {
            s_max: data.y_max() / 2.0,
            ..hp
        };
        assert!(run_chain(&data, &hp_small, &SamplerConfig::desk_scale(1, 0), None).is_err());
    }

    #[test]
    fn acceptance_rates_land_in_band_after_adaptation() {
        let data = toy_data(16, 60);
        let hp = Hyperparameters {
            alpha: 4.0,
            ..hp_for(data.y_max())
        };
        let cfg = SamplerConfig {
            n_iter: 30_000,
            n_burnin: 15_000,
            thin: 10,
            ..SamplerConfig::desk_scale(5, 0)
        };
        let chain = run_chain(&data, &hp, &cfg, None).unwrap();
        let rp = chain.acceptance.rp.rate().unwrap();
        let bh = chain.acceptance.bh.rate().unwrap();
        assert!((0.25..=0.50).contains(&rp), "RP rate {rp}");
        assert!((0.25..=0.50).contains(&bh), "BH rate {bh}");
    }
}
