//! Monte-Carlo accuracy evaluation.
//!
//! Each run re-seeds the estimator with a seed derived from
//! `(seed, run index)`, so any single run can be replayed on its own and
//! runs can execute in any order. Results are folded in run-index order.
//!
//! Local accuracy is summarised as the per-node NRMSE over all runs,
//! averaged over nodes with at least one triangle.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exact::{exact_stream_counts, ExactCounts};
use crate::hash::derive;
use crate::mascot::{mascot_theoretical_variance, run_parallel_mascot, MascotConfig};
use crate::report::{EstimateReport, Method};
use crate::rept::{run_rept, theoretical_variance, ReptConfig};
use crate::stream::{EdgeStream, NodeId};

pub const CSV_HEADER: &str = "method,m,c,runs,nrmse_global,nrmse_local_mean,emp_var,theo_var";

const CHUNK: usize = 256;

/// Root-mean-square deviation from `truth`, divided by `truth`.
pub fn nrmse(estimates: &[f64], truth: f64) -> Result<f64> {
    if truth <= 0.0 || !truth.is_finite() {
        return Err(Error::config(format!("NRMSE needs a positive truth, got {truth}")));
    }
    if estimates.is_empty() {
        return Err(Error::config("NRMSE needs at least one estimate"));
    }
    let mse = estimates.iter().map(|x| (x - truth).powi(2)).sum::<f64>() / estimates.len() as f64;
    Ok(mse.sqrt() / truth)
}

/// Anything that turns a stream and a seed into an estimate.
pub trait Estimator: Sync {
    fn tag(&self) -> String;
    fn m(&self) -> u32;
    fn c(&self) -> u32;
    fn estimate(&self, stream: &EdgeStream, seed: u64, local: bool) -> Result<EstimateReport>;
    /// Analytic variance of the global estimate, if known.
    fn theoretical_variance(&self, truth: &ExactCounts) -> Option<f64>;
}

#[derive(Debug, Clone, Copy)]
pub struct ReptEstimator {
    pub m: u32,
    pub c: u32,
    pub compute_eta: bool,
}

impl Estimator for ReptEstimator {
    fn tag(&self) -> String {
        Method::Rept.tag().into()
    }
    fn m(&self) -> u32 {
        self.m
    }
    fn c(&self) -> u32 {
        self.c
    }
    fn estimate(&self, stream: &EdgeStream, seed: u64, local: bool) -> Result<EstimateReport> {
        let cfg = ReptConfig::new(self.m, self.c, seed)?
            .with_local(local)
            .with_eta(self.compute_eta);
        run_rept(stream, &cfg)
    }
    fn theoretical_variance(&self, truth: &ExactCounts) -> Option<f64> {
        theoretical_variance(truth.tau as f64, truth.eta as f64, self.m, self.c)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct MascotEstimator {
    pub m: u32,
    pub c: u32,
}

impl Estimator for MascotEstimator {
    fn tag(&self) -> String {
        Method::Mascot.tag().into()
    }
    fn m(&self) -> u32 {
        self.m
    }
    fn c(&self) -> u32 {
        self.c
    }
    fn estimate(&self, stream: &EdgeStream, seed: u64, local: bool) -> Result<EstimateReport> {
        run_parallel_mascot(stream, &MascotConfig::new(self.m, self.c, seed)?.with_local(local))
    }
    fn theoretical_variance(&self, truth: &ExactCounts) -> Option<f64> {
        Some(mascot_theoretical_variance(truth.tau as f64, truth.eta as f64, self.m, self.c))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalConfig {
    pub method: Method,
    pub m: u32,
    pub c: u32,
    pub runs: usize,
    pub seed: u64,
    pub compute_local: bool,
    /// REPT only: track pair counters so `eta_hat` is reported every run.
    pub compute_eta: bool,
    pub keep_estimates: bool,
}

impl EvalConfig {
    pub fn new(method: Method, m: u32, c: u32, runs: usize, seed: u64) -> Self {
        EvalConfig {
            method,
            m,
            c,
            runs,
            seed,
            compute_local: true,
            compute_eta: false,
            keep_estimates: false,
        }
    }

    fn estimator(&self) -> Box<dyn Estimator> {
        match self.method {
            Method::Rept => Box::new(ReptEstimator {
                m: self.m,
                c: self.c,
                compute_eta: self.compute_eta,
            }),
            Method::Mascot => Box::new(MascotEstimator { m: self.m, c: self.c }),
        }
    }
}

/// Monte-Carlo summary of one node's local estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeStats {
    pub node: NodeId,
    pub truth: f64,
    pub mean: f64,
    pub variance: f64,
    pub nrmse: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalResult {
    pub method: String,
    pub m: u32,
    pub c: u32,
    pub runs: usize,
    pub truth: f64,
    pub stream_fingerprint: u64,
    pub nrmse_global: f64,
    /// Mean per-node NRMSE over nodes with `tau_v >= 1`.
    pub nrmse_local_mean: Option<f64>,
    pub empirical_mean: f64,
    /// Unbiased (`R - 1`) sample variance.
    pub empirical_variance: f64,
    pub theoretical_variance: Option<f64>,
    pub eta_hat_mean: Option<f64>,
    pub eta_hat_variance: Option<f64>,
    pub local: Vec<NodeStats>,
    pub estimates: Option<Vec<f64>>,
}

impl EvalResult {
    /// Standard error of [`Self::empirical_mean`].
    pub fn standard_error(&self) -> f64 {
        (self.empirical_variance / self.runs as f64).sqrt()
    }

    pub fn bias(&self) -> f64 {
        self.empirical_mean - self.truth
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.method,
            self.m,
            self.c,
            self.runs,
            self.nrmse_global,
            opt(self.nrmse_local_mean),
            self.empirical_variance,
            opt(self.theoretical_variance)
        )
    }

    /// Header plus one row.
    pub fn to_csv(&self) -> String {
        format!("{CSV_HEADER}\n{}\n", self.csv_row())
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

#[derive(Debug, Clone, Copy, Default)]
struct Welford {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Welford {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }
}

/// Seed of run `run` under master seed `seed`.
pub fn run_seed(seed: u64, run: usize) -> u64 {
    derive(seed, run as u64, 0x00e5_7a11)
}

/// Computes exact counts for `stream`, then evaluates.
pub fn monte_carlo_eval(stream: &EdgeStream, config: &EvalConfig) -> Result<EvalResult> {
    let truth = exact_stream_counts(stream);
    monte_carlo_eval_with_truth(stream, &truth, config)
}

pub fn monte_carlo_eval_with_truth(stream: &EdgeStream, truth: &ExactCounts, config: &EvalConfig) -> Result<EvalResult> {
    let estimator = config.estimator();
    evaluate(
        stream,
        truth,
        estimator.as_ref(),
        config.runs,
        config.seed,
        config.compute_local,
        config.keep_estimates,
    )
}

/// Generic Monte-Carlo loop over any [`Estimator`].
pub fn evaluate(
    stream: &EdgeStream,
    truth: &ExactCounts,
    estimator: &dyn Estimator,
    runs: usize,
    seed: u64,
    compute_local: bool,
    keep_estimates: bool,
) -> Result<EvalResult> {
    if runs < 2 {
        return Err(Error::config(format!("at least 2 runs are required, got {runs}")));
    }
    if truth.tau == 0 {
        return Err(Error::config("stream has no triangles; NRMSE is undefined"));
    }
    let tau = truth.tau as f64;

    let tracked: Vec<(NodeId, f64)> = if compute_local {
        truth
            .tau_v
            .iter()
            .enumerate()
            .filter(|(_, &t)| t >= 1)
            .map(|(v, &t)| (v as NodeId, t as f64))
            .collect()
    } else {
        Vec::new()
    };
    let mut node_acc = vec![Welford::default(); tracked.len()];
    let mut node_sq = vec![0.0f64; tracked.len()];

    let mut estimates = Vec::with_capacity(runs);
    let mut eta_acc = Welford::default();
    let mut eta_seen = 0usize;

    let all_runs: Vec<usize> = (0..runs).collect();
    for chunk in all_runs.chunks(CHUNK) {
        let reports: Vec<EstimateReport> = chunk
            .par_iter()
            .map(|&r| estimator.estimate(stream, run_seed(seed, r), compute_local))
            .collect::<Result<_>>()?;
        for report in &reports {
            estimates.push(report.tau_hat);
            if let Some(eta) = report.eta_hat {
                eta_acc.push(eta);
                eta_seen += 1;
            }
            for (k, &(v, t)) in tracked.iter().enumerate() {
                let est = report.local(v);
                node_acc[k].push(est);
                node_sq[k] += (est - t).powi(2);
            }
        }
    }

    let mut global = Welford::default();
    for &x in &estimates {
        global.push(x);
    }

    let local: Vec<NodeStats> = tracked
        .iter()
        .zip(node_acc.iter().zip(&node_sq))
        .map(|(&(node, t), (acc, &sq))| NodeStats {
            node,
            truth: t,
            mean: acc.mean,
            variance: acc.variance(),
            nrmse: (sq / runs as f64).sqrt() / t,
        })
        .collect();
    let nrmse_local_mean =
        (!local.is_empty()).then(|| local.iter().map(|s| s.nrmse).sum::<f64>() / local.len() as f64);

    Ok(EvalResult {
        method: estimator.tag(),
        m: estimator.m(),
        c: estimator.c(),
        runs,
        truth: tau,
        stream_fingerprint: stream.fingerprint(),
        nrmse_global: nrmse(&estimates, tau)?,
        nrmse_local_mean,
        empirical_mean: global.mean,
        empirical_variance: global.variance(),
        theoretical_variance: estimator.theoretical_variance(truth),
        eta_hat_mean: (eta_seen == runs).then_some(eta_acc.mean),
        eta_hat_variance: (eta_seen == runs).then(|| eta_acc.variance()),
        local,
        estimates: keep_estimates.then_some(estimates),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub method: String,
    pub m: u32,
    pub c: u32,
    pub runs: usize,
    pub nrmse_global: f64,
    pub nrmse_local_mean: Option<f64>,
    pub emp_var: f64,
    pub theo_var: Option<f64>,
    /// `emp_var` relative to the first row; blank for the first row.
    pub var_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonTable {
    pub rows: Vec<ComparisonRow>,
}

impl ComparisonTable {
    pub fn to_csv(&self) -> String {
        let mut out = format!("{CSV_HEADER},var_ratio\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                r.method,
                r.m,
                r.c,
                r.runs,
                r.nrmse_global,
                opt(r.nrmse_local_mean),
                r.emp_var,
                opt(r.theo_var),
                opt(r.var_ratio)
            );
        }
        out
    }
}

/// One row per result; all results must come from the same stream.
pub fn compare_report(results: &[EvalResult]) -> Result<ComparisonTable> {
    let Some(first) = results.first() else {
        return Ok(ComparisonTable { rows: Vec::new() });
    };
    if let Some(other) = results.iter().find(|r| r.stream_fingerprint != first.stream_fingerprint) {
        return Err(Error::config(format!(
            "cannot compare results from different streams ({:016x} vs {:016x})",
            first.stream_fingerprint, other.stream_fingerprint
        )));
    }
    let rows = results
        .iter()
        .enumerate()
        .map(|(i, r)| ComparisonRow {
            method: r.method.clone(),
            m: r.m,
            c: r.c,
            runs: r.runs,
            nrmse_global: r.nrmse_global,
            nrmse_local_mean: r.nrmse_local_mean,
            emp_var: r.empirical_variance,
            theo_var: r.theoretical_variance,
            var_ratio: (i > 0 && first.empirical_variance > 0.0)
                .then(|| r.empirical_variance / first.empirical_variance),
        })
        .collect();
    Ok(ComparisonTable { rows })
}
