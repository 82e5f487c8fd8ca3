//! Hash-partitioned parallel estimator.
//!
//! Processor `i` belongs to group `i / m` and owns slot `i % m` of that
//! group's hash function: it keeps edge `e` iff `h_{i/m}(e) == i % m`. The
//! processors of one full group hold a partition of the stream, so two
//! triangles can only be counted together on the same processor, which
//! removes the cross-processor covariance a Bernoulli sampler suffers from.
//!
//! Three regimes are estimated differently:
//!
//! * `c <= m`: one (possibly partial) group, `tau_hat = m^2/c * sum tau_i`.
//! * `c = c1 * m`: `c1` full independent groups, `tau_hat = m/c1 * sum tau_i`.
//! * otherwise: the full groups and the trailing partial group give two
//!   independent estimates, combined by inverse-variance weighting with
//!   plug-in variances that need an estimate of the pair count `eta`.

use std::collections::BTreeSet;
use std::time::Instant;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hash::HashFamily;
use crate::processor::{PairMode, ProcessorState, ProcessorSummary};
use crate::report::{CombineWeights, EstimateReport, Method, ProcessorCounts};
use crate::stream::{EdgeStream, NodeId};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReptConfig {
    /// Sampling parameter; each processor keeps a `1/m` share of edges.
    pub m: u32,
    /// Processor count.
    pub c: u32,
    pub seed: u64,
    pub compute_local: bool,
    /// Track pair counters even when the regime does not need them.
    pub compute_eta: bool,
}

impl ReptConfig {
    pub fn new(m: u32, c: u32, seed: u64) -> Result<Self> {
        let cfg = ReptConfig {
            m,
            c,
            seed,
            compute_local: false,
            compute_eta: false,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_local(mut self, on: bool) -> Self {
        self.compute_local = on;
        self
    }

    pub fn with_eta(mut self, on: bool) -> Self {
        self.compute_eta = on;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.m < 2 {
            return Err(Error::config(format!("m must be at least 2, got {}", self.m)));
        }
        if self.c < 1 {
            return Err(Error::config("c must be at least 1"));
        }
        Ok(())
    }

    /// Number of full groups, `floor(c / m)`.
    pub fn full_groups(&self) -> u32 {
        self.c / self.m
    }

    /// Size of the trailing partial group, `c mod m`.
    pub fn remainder(&self) -> u32 {
        self.c % self.m
    }

    /// Whether the combined estimator (and thus pair counting) is required.
    pub fn needs_combination(&self) -> bool {
        self.c > self.m && self.remainder() != 0
    }

    pub fn tracks_eta(&self) -> bool {
        self.compute_eta || self.needs_combination()
    }
}

/// `(group, slot)` of a 0-based processor index.
#[inline]
pub fn processor_slot(i: u32, m: u32) -> (u32, u32) {
    (i / m, i % m)
}

/// Runs one processor over the whole stream.
pub(crate) fn run_processor<F>(stream: &EdgeStream, index: usize, mode: PairMode, mut keep: F) -> ProcessorSummary
where
    F: FnMut(usize, crate::stream::Edge) -> bool,
{
    let mut state = ProcessorState::new(index, mode);
    for (t, &e) in stream.edges().iter().enumerate() {
        let common = state.observe_edge(e);
        if keep(t, e) {
            state.insert_sampled_edge(e, &common);
        }
    }
    state.into_summary()
}

pub fn run_rept(stream: &EdgeStream, config: &ReptConfig) -> Result<EstimateReport> {
    config.validate()?;
    let start = Instant::now();
    let family = HashFamily::new(config.seed, config.m)?;
    let mode = if config.tracks_eta() { PairMode::WithPairs } else { PairMode::CountOnly };

    let summaries: Vec<ProcessorSummary> = (0..config.c)
        .into_par_iter()
        .map(|i| {
            let (group, slot) = processor_slot(i, config.m);
            let key = family.member_key(group);
            run_processor(stream, i as usize, mode, |_, e| family.bucket_with(key, e) == slot)
        })
        .collect();

    let mut report = aggregate(&summaries, config);
    report.elapsed_seconds = start.elapsed().as_secs_f64();
    Ok(report)
}

fn aggregate(summaries: &[ProcessorSummary], config: &ReptConfig) -> EstimateReport {
    let (m, c) = (config.m, config.c);
    let taus: Vec<u64> = summaries.iter().map(|s| s.tau).collect();
    let etas: Option<Vec<u64>> = summaries.iter().map(|s| s.eta).collect();

    let mut combine = None;
    let tau_hat;
    if c <= m {
        tau_hat = estimate_leq_m(&taus, m, c);
    } else if config.remainder() == 0 {
        tau_hat = estimate_gt_m_divisible(&taus, m, config.full_groups());
    } else {
        let etas = etas.as_deref().expect("pair counters tracked when combining");
        let combined = estimate_gt_m_general(&taus, etas, m, c);
        tau_hat = combined.tau_hat;
        combine = Some(combined.weights);
    }
    let eta_hat = etas.as_deref().map(|e| estimate_eta_hat(e, m, c));

    let mut report = EstimateReport {
        method: Method::Rept,
        tau_hat,
        eta_hat,
        m,
        c,
        seed: config.seed,
        combine,
        per_processor: summaries
            .iter()
            .map(|s| ProcessorCounts { tau: s.tau, eta: s.eta })
            .collect(),
        elapsed_seconds: 0.0,
        tau_v_hat: Default::default(),
    };

    if config.compute_local {
        let nodes: BTreeSet<NodeId> = summaries.iter().flat_map(|s| s.tau_v.keys().copied()).collect();
        let mut local_taus = vec![0u64; summaries.len()];
        let mut local_etas = vec![0u64; summaries.len()];
        for v in nodes {
            for (i, s) in summaries.iter().enumerate() {
                local_taus[i] = s.tau_v.get(&v).copied().unwrap_or(0);
                local_etas[i] = s.eta_v.get(&v).copied().unwrap_or(0);
            }
            let est = if c <= m {
                estimate_leq_m(&local_taus, m, c)
            } else if config.remainder() == 0 {
                estimate_gt_m_divisible(&local_taus, m, config.full_groups())
            } else {
                estimate_gt_m_general(&local_taus, &local_etas, m, c).tau_hat
            };
            if est != 0.0 {
                report.tau_v_hat.insert(v, est);
            }
        }
    }
    report
}

fn sum(counts: &[u64]) -> f64 {
    counts.iter().sum::<u64>() as f64
}

/// `(m^2 / c) * sum(counts)`, for `c <= m`. Applies unchanged to local counts.
pub fn estimate_leq_m(counts: &[u64], m: u32, c: u32) -> f64 {
    let m = f64::from(m);
    m * m / f64::from(c) * sum(counts)
}

/// `(m / c1) * sum(counts)` over `c1` full groups of `m` processors.
pub fn estimate_gt_m_divisible(counts: &[u64], m: u32, full_groups: u32) -> f64 {
    f64::from(m) / f64::from(full_groups) * sum(counts)
}

/// `(m^3 / c) * sum(eta_counts)`.
pub fn estimate_eta_hat(eta_counts: &[u64], m: u32, c: u32) -> f64 {
    f64::from(m).powi(3) / f64::from(c) * sum(eta_counts)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Combined {
    pub tau_hat: f64,
    pub eta_hat: f64,
    pub weights: CombineWeights,
}

/// Inverse-variance combination of the full-group estimate and the
/// partial-group estimate. The full-group estimate stands in for `tau` in
/// both plug-in variances.
///
/// Both weights vanish only when the full-group estimate and `eta_hat` are
/// zero. The weights are then taken at their limit as the full-group
/// estimate goes to zero with `eta_hat = 0`, i.e. proportional to
/// `(m - 1) / c1` and `(m^2 - c2) / c2`.
pub fn combine_estimates(tau_hat_1: f64, tau_hat_2: f64, eta_hat: f64, m: u32, c1: u32, c2: u32) -> CombineWeights {
    let (mf, c1f, c2f) = (f64::from(m), f64::from(c1), f64::from(c2));
    let w1 = tau_hat_1 * (mf - 1.0) / c1f;
    let w2 = (tau_hat_1 * (mf * mf - c2f) + 2.0 * eta_hat * (mf - c2f)) / c2f;
    let tau_hat = if w1 + w2 > 0.0 {
        (w2 * tau_hat_1 + w1 * tau_hat_2) / (w1 + w2)
    } else {
        let (a, b) = ((mf - 1.0) / c1f, (mf * mf - c2f) / c2f);
        (b * tau_hat_1 + a * tau_hat_2) / (a + b)
    };
    CombineWeights {
        tau_hat_full_groups: tau_hat_1,
        tau_hat_partial_group: tau_hat_2,
        w1,
        w2,
        tau_hat,
    }
}

/// Estimator for `c > m` with `c mod m != 0`.
///
/// `counts` and `eta_counts` are indexed by processor; the first
/// `floor(c/m) * m` entries belong to full groups.
pub fn estimate_gt_m_general(counts: &[u64], eta_counts: &[u64], m: u32, c: u32) -> Combined {
    debug_assert!(c > m && !c.is_multiple_of(m));
    debug_assert_eq!(counts.len(), c as usize);
    let (c1, c2) = (c / m, c % m);
    let split = (c1 * m) as usize;
    let mf = f64::from(m);
    let tau_hat_1 = mf / f64::from(c1) * sum(&counts[..split]);
    let tau_hat_2 = mf * mf / f64::from(c2) * sum(&counts[split..]);
    let eta_hat = estimate_eta_hat(eta_counts, m, c);
    let weights = combine_estimates(tau_hat_1, tau_hat_2, eta_hat, m, c1, c2);
    Combined {
        tau_hat: weights.tau_hat,
        eta_hat,
        weights,
    }
}

/// Variance of the estimate for `c <= m`:
/// `(tau (m^2 - c) + 2 eta (m - c)) / c`. The local form substitutes
/// `tau_v`, `eta_v`.
pub fn theoretical_variance_global(tau: f64, eta: f64, m: u32, c: u32) -> f64 {
    debug_assert!(c <= m);
    let (mf, cf) = (f64::from(m), f64::from(c));
    (tau * (mf * mf - cf) + 2.0 * eta * (mf - cf)) / cf
}

/// Analytic variance where one is known: `c <= m` or `c` a multiple of `m`.
pub fn theoretical_variance(tau: f64, eta: f64, m: u32, c: u32) -> Option<f64> {
    if c <= m {
        Some(theoretical_variance_global(tau, eta, m, c))
    } else if c.is_multiple_of(m) {
        Some(tau * (f64::from(m) - 1.0) / f64::from(c / m))
    } else {
        None
    }
}
