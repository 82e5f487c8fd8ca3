//! Parallel MASCOT baseline: every processor keeps each edge by an
//! independent coin with bias `1/m`, counts semi-triangles, and scales by
//! `m^2`. The final estimate is the mean over processors.
//!
//! Coins are drawn from a counter-based generator keyed by
//! `(seed, processor, stream position)`, so results do not depend on how
//! processors are scheduled.

use std::collections::BTreeSet;
use std::time::Instant;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hash::{derive, reduce};
use crate::processor::{PairMode, ProcessorSummary};
use crate::report::{EstimateReport, Method, ProcessorCounts};
use crate::rept::run_processor;
use crate::stream::{EdgeStream, NodeId};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MascotConfig {
    pub m: u32,
    pub c: u32,
    pub seed: u64,
    pub compute_local: bool,
}

impl MascotConfig {
    pub fn new(m: u32, c: u32, seed: u64) -> Result<Self> {
        let cfg = MascotConfig {
            m,
            c,
            seed,
            compute_local: false,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_local(mut self, on: bool) -> Self {
        self.compute_local = on;
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
}

/// Whether processor `processor` keeps the edge at stream position `t`.
#[inline]
pub fn bernoulli_keep(seed: u64, processor: u32, t: usize, m: u32) -> bool {
    reduce(derive(seed, u64::from(processor), t as u64), m) == 0
}

pub fn run_parallel_mascot(stream: &EdgeStream, config: &MascotConfig) -> Result<EstimateReport> {
    config.validate()?;
    let start = Instant::now();
    let (m, c, seed) = (config.m, config.c, config.seed);

    let summaries: Vec<ProcessorSummary> = (0..c)
        .into_par_iter()
        .map(|i| run_processor(stream, i as usize, PairMode::CountOnly, |t, _| bernoulli_keep(seed, i, t, m)))
        .collect();

    let scale = f64::from(m) * f64::from(m) / f64::from(c);
    let tau_hat = scale * summaries.iter().map(|s| s.tau).sum::<u64>() as f64;

    let mut report = EstimateReport {
        method: Method::Mascot,
        tau_hat,
        eta_hat: None,
        m,
        c,
        seed,
        combine: None,
        per_processor: summaries.iter().map(|s| ProcessorCounts { tau: s.tau, eta: None }).collect(),
        elapsed_seconds: 0.0,
        tau_v_hat: Default::default(),
    };
    if config.compute_local {
        let nodes: BTreeSet<NodeId> = summaries.iter().flat_map(|s| s.tau_v.keys().copied()).collect();
        for v in nodes {
            let total: u64 = summaries.iter().map(|s| s.tau_v.get(&v).copied().unwrap_or(0)).sum();
            report.tau_v_hat.insert(v, scale * total as f64);
        }
    }
    report.elapsed_seconds = start.elapsed().as_secs_f64();
    Ok(report)
}

/// `(tau (m^2 - 1) + 2 eta (m - 1)) / c`.
pub fn mascot_theoretical_variance(tau: f64, eta: f64, m: u32, c: u32) -> f64 {
    let mf = f64::from(m);
    (tau * (mf * mf - 1.0) + 2.0 * eta * (mf - 1.0)) / f64::from(c)
}
