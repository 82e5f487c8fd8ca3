//! Estimate reports and their on-disk forms.
//!
//! The JSON document carries the global estimate, the raw per-processor
//! counters and a config echo. Local estimates go to a separate
//! `node,tau_v_hat` table keyed by source label.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stream::{EdgeStream, NodeId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Rept,
    Mascot,
}

impl Method {
    pub fn tag(self) -> &'static str {
        match self {
            Method::Rept => "rept",
            Method::Mascot => "mascot",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.tag())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rept" => Ok(Method::Rept),
            "mascot" => Ok(Method::Mascot),
            other => Err(Error::config(format!("unknown method `{other}`"))),
        }
    }
}

/// Raw counters of one processor at end of stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProcessorCounts {
    pub tau: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<u64>,
}

/// Inverse-variance weights used when the processor count is not a
/// multiple of `m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CombineWeights {
    pub tau_hat_full_groups: f64,
    pub tau_hat_partial_group: f64,
    pub w1: f64,
    pub w2: f64,
    /// Combined estimate.
    pub tau_hat: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub method: Method,
    pub tau_hat: f64,
    pub eta_hat: Option<f64>,
    pub m: u32,
    pub c: u32,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub combine: Option<CombineWeights>,
    pub per_processor: Vec<ProcessorCounts>,
    /// Wall time; the only field that varies between identical runs.
    pub elapsed_seconds: f64,
    #[serde(skip)]
    pub tau_v_hat: BTreeMap<NodeId, f64>,
}

impl EstimateReport {
    pub fn local(&self, node: NodeId) -> f64 {
        self.tau_v_hat.get(&node).copied().unwrap_or(0.0)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    /// Decodes and validates a report document.
    pub fn from_json(text: &str) -> Result<Self> {
        let report: EstimateReport = serde_json::from_str(text)?;
        report.validate()?;
        Ok(report)
    }

    fn validate(&self) -> Result<()> {
        if self.m < 2 || self.c < 1 {
            return Err(Error::Document(format!("invalid m={} c={}", self.m, self.c)));
        }
        if self.per_processor.len() != self.c as usize {
            return Err(Error::Document(format!(
                "{} per-processor entries for c={}",
                self.per_processor.len(),
                self.c
            )));
        }
        if !(self.tau_hat.is_finite() && self.tau_hat >= 0.0) {
            return Err(Error::Document(format!("tau_hat {} is not a non-negative number", self.tau_hat)));
        }
        if let Some(eta) = self.eta_hat {
            if !(eta.is_finite() && eta >= 0.0) {
                return Err(Error::Document(format!("eta_hat {eta} is not a non-negative number")));
            }
        }
        Ok(())
    }

    /// `node,tau_v_hat` table, one row per node of the stream in id order.
    pub fn local_table(&self, stream: &EdgeStream) -> String {
        let mut out = String::from("node,tau_v_hat\n");
        for id in 0..stream.node_count() as NodeId {
            let _ = writeln!(out, "{},{}", stream.label(id), self.local(id));
        }
        out
    }
}
