//! Ground truth.
//!
//! [`exact_stream_counts`] runs the production processor with every edge
//! sampled, so the oracle exercises the same code path as the estimators.
//! [`naive_triangle_count`] and [`brute_force_eta_pairs`] are independent
//! enumerations used to certify it.
//!
//! Pair counts classify every unordered pair of distinct triangles sharing
//! an edge `g` by where `g` falls in stream order:
//!
//! | `g` is the last edge of | counted in      |
//! |-------------------------|-----------------|
//! | neither triangle        | `eta`           |
//! | exactly one             | `eta_last_one`  |
//! | both                    | nothing         |

use std::collections::BTreeSet;
use std::fmt::Write as _;

use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::processor::{PairMode, ProcessorState};
use crate::stream::{Edge, EdgeStream, NodeId};

/// Default cap on triangles for the quadratic pair enumeration.
pub const BRUTE_FORCE_TRIANGLE_LIMIT: usize = 20_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactCounts {
    pub tau: u64,
    /// Indexed by node id.
    pub tau_v: Vec<u64>,
    pub eta: u64,
    pub eta_v: Vec<u64>,
    pub eta_last_one: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TriangleCounts {
    pub tau: u64,
    pub tau_v: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairCounts {
    pub eta: u64,
    pub eta_v: Vec<u64>,
    pub eta_last_one: u64,
}

fn densify(map: &FxHashMap<NodeId, u64>, n: usize) -> Vec<u64> {
    let mut out = vec![0; n];
    for (&k, &v) in map {
        out[k as usize] = v;
    }
    out
}

fn sample_everything(stream: &EdgeStream, mode: PairMode) -> ProcessorState {
    let mut state = ProcessorState::new(0, mode);
    for &e in stream.edges() {
        state.process(e, true);
    }
    state
}

/// Exact `tau`, `tau_v`, `eta`, `eta_v`, `eta_last_one` for the stream
/// order.
pub fn exact_stream_counts(stream: &EdgeStream) -> ExactCounts {
    let state = sample_everything(stream, PairMode::Classified);
    let n = stream.node_count();
    let (neither, last_one) = state.eta_split().expect("classified mode");
    ExactCounts {
        tau: state.tau(),
        tau_v: densify(state.tau_v_map(), n),
        eta: neither,
        eta_v: densify(state.eta_neither_v_map().expect("classified mode"), n),
        eta_last_one: last_one,
    }
}

/// Exact `tau`, `tau_v` only; cheaper than [`exact_stream_counts`].
pub fn exact_triangle_counts(stream: &EdgeStream) -> TriangleCounts {
    let state = sample_everything(stream, PairMode::CountOnly);
    TriangleCounts {
        tau: state.tau(),
        tau_v: densify(state.tau_v_map(), stream.node_count()),
    }
}

fn adjacency(edges: &[Edge]) -> Vec<BTreeSet<NodeId>> {
    let n = edges.iter().map(|e| e.v() as usize + 1).max().unwrap_or(0);
    let mut adj = vec![BTreeSet::new(); n];
    for e in edges {
        adj[e.u() as usize].insert(e.v());
        adj[e.v() as usize].insert(e.u());
    }
    adj
}

/// All triangles `(a, b, c)` with `a < b < c`, order-independent.
fn enumerate_triangles(edges: &[Edge]) -> (Vec<[NodeId; 3]>, usize) {
    let adj = adjacency(edges);
    let mut out = Vec::new();
    for e in edges {
        let (u, v) = (e.u(), e.v());
        for &w in adj[u as usize].intersection(&adj[v as usize]) {
            if w > v {
                out.push([u, v, w]);
            }
        }
    }
    (out, adj.len())
}

/// Order-independent triangle count: for each edge `(u, v)` count common
/// neighbours above `max(u, v)`.
pub fn naive_triangle_count(edges: &[Edge]) -> TriangleCounts {
    let (triangles, n) = enumerate_triangles(edges);
    let mut tau_v = vec![0; n];
    for t in &triangles {
        for &x in t {
            tau_v[x as usize] += 1;
        }
    }
    TriangleCounts {
        tau: triangles.len() as u64,
        tau_v,
    }
}

/// Classifies every pair of edge-sharing triangles by brute force.
///
/// Quadratic in the triangle count; refuses inputs with more than
/// `max_triangles` triangles.
pub fn brute_force_eta_pairs(stream: &EdgeStream, max_triangles: usize) -> Result<PairCounts> {
    let pos: FxHashMap<Edge, usize> = stream.edges().iter().enumerate().map(|(i, &e)| (e, i)).collect();
    let (triangles, _) = enumerate_triangles(stream.edges());
    if triangles.len() > max_triangles {
        return Err(Error::ResourceLimit(format!(
            "{} triangles exceed the pair-enumeration bound of {max_triangles}",
            triangles.len()
        )));
    }
    let with_last: Vec<([Edge; 3], Edge)> = triangles
        .iter()
        .map(|&[a, b, c]| {
            let es = [Edge::new(a, b).unwrap(), Edge::new(a, c).unwrap(), Edge::new(b, c).unwrap()];
            let last = *es.iter().max_by_key(|e| pos[e]).unwrap();
            (es, last)
        })
        .collect();

    let mut out = PairCounts {
        eta: 0,
        eta_v: vec![0; stream.node_count()],
        eta_last_one: 0,
    };
    for (i, (ei, last_i)) in with_last.iter().enumerate() {
        for (ej, last_j) in &with_last[i + 1..] {
            let Some(&shared) = ei.iter().find(|e| ej.contains(e)) else {
                continue;
            };
            match (shared == *last_i, shared == *last_j) {
                (false, false) => {
                    out.eta += 1;
                    out.eta_v[shared.u() as usize] += 1;
                    out.eta_v[shared.v() as usize] += 1;
                }
                (true, false) | (false, true) => out.eta_last_one += 1,
                (true, true) => {}
            }
        }
    }
    Ok(out)
}

/// Global part of an exact-count document. Pair fields are null when pair
/// counts were not requested.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactSummary {
    pub nodes: usize,
    pub edges: usize,
    pub tau: u64,
    pub eta: Option<u64>,
    pub eta_last_one: Option<u64>,
}

impl ExactSummary {
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ExactSummary = serde_json::from_str(text)?;
        if doc.eta.is_some() != doc.eta_last_one.is_some() {
            return Err(Error::Document("eta and eta_last_one must both be present or both null".into()));
        }
        Ok(doc)
    }
}

impl ExactCounts {
    pub fn summary(&self, stream: &EdgeStream) -> ExactSummary {
        ExactSummary {
            nodes: stream.node_count(),
            edges: stream.len(),
            tau: self.tau,
            eta: Some(self.eta),
            eta_last_one: Some(self.eta_last_one),
        }
    }

    /// `node,tau_v,eta_v` table in node-id order.
    pub fn local_table(&self, stream: &EdgeStream) -> String {
        let mut out = String::from("node,tau_v,eta_v\n");
        for (id, label) in stream.labels().iter().enumerate() {
            let _ = writeln!(out, "{label},{},{}", self.tau_v[id], self.eta_v[id]);
        }
        out
    }
}

impl TriangleCounts {
    pub fn summary(&self, stream: &EdgeStream) -> ExactSummary {
        ExactSummary {
            nodes: stream.node_count(),
            edges: stream.len(),
            tau: self.tau,
            eta: None,
            eta_last_one: None,
        }
    }

    /// Same layout as [`ExactCounts::local_table`] with an empty `eta_v`.
    pub fn local_table(&self, stream: &EdgeStream) -> String {
        let mut out = String::from("node,tau_v,eta_v\n");
        for (id, label) in stream.labels().iter().enumerate() {
            let _ = writeln!(out, "{label},{},", self.tau_v[id]);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn by_label(stream: &EdgeStream, values: &[u64], label: &str) -> u64 {
        values[stream.node_id(label).unwrap() as usize]
    }

    fn k4() -> EdgeStream {
        EdgeStream::from_pairs(&[(1, 2), (1, 3), (2, 3), (1, 4), (2, 4), (3, 4)])
    }

    #[test]
    fn k4_exact() {
        let s = k4();
        let x = exact_stream_counts(&s);
        assert_eq!(x.tau, 4);
        assert!(x.tau_v.iter().all(|&t| t == 3));
        assert_eq!(x.eta, 3);
        assert_eq!(x.eta_last_one, 2);
        assert_eq!(by_label(&s, &x.eta_v, "1"), 3);
        for l in ["2", "3", "4"] {
            assert_eq!(by_label(&s, &x.eta_v, l), 1);
        }
    }

    #[test]
    fn k4_brute_force() {
        let s = k4();
        let p = brute_force_eta_pairs(&s, 100).unwrap();
        assert_eq!((p.eta, p.eta_last_one), (3, 2));
        assert_eq!(by_label(&s, &p.eta_v, "1"), 3);
        let n = naive_triangle_count(s.edges());
        assert_eq!(n.tau, 4);
        assert_eq!(n.tau_v, vec![3; 4]);
    }

    #[test]
    fn k3_exact() {
        let s = EdgeStream::from_pairs(&[(1, 2), (1, 3), (2, 3)]);
        let x = exact_stream_counts(&s);
        assert_eq!((x.tau, x.eta, x.eta_last_one), (1, 0, 0));
        assert_eq!(x.tau_v, vec![1, 1, 1]);
    }

    #[test]
    fn two_triangle_orders() {
        let a = EdgeStream::from_pairs(&[(1, 2), (1, 3), (2, 3), (1, 4), (2, 4)]);
        let b = EdgeStream::from_pairs(&[(1, 3), (2, 3), (1, 4), (2, 4), (1, 2)]);
        let xa = exact_stream_counts(&a);
        let xb = exact_stream_counts(&b);
        assert_eq!((xa.tau, xa.eta, xa.eta_last_one), (2, 1, 0));
        assert_eq!((xb.tau, xb.eta, xb.eta_last_one), (2, 0, 0));
        let pa = brute_force_eta_pairs(&a, 10).unwrap();
        let pb = brute_force_eta_pairs(&b, 10).unwrap();
        assert_eq!((pa.eta, pa.eta_last_one), (1, 0));
        assert_eq!((pb.eta, pb.eta_last_one), (0, 0));
    }

    #[test]
    fn star_has_no_triangles() {
        let s = EdgeStream::from_pairs(&[(0, 1), (0, 2), (0, 3), (0, 4)]);
        let n = naive_triangle_count(s.edges());
        assert_eq!(n.tau, 0);
        assert!(n.tau_v.iter().all(|&t| t == 0));
        assert_eq!(exact_triangle_counts(&s).tau, 0);
    }

    #[test]
    fn brute_force_guard() {
        let s = k4();
        assert!(matches!(brute_force_eta_pairs(&s, 3), Err(Error::ResourceLimit(_))));
    }

    #[test]
    fn summary_document() {
        let s = k4();
        let doc = exact_stream_counts(&s).summary(&s);
        let text = doc.to_json().unwrap();
        assert_eq!(ExactSummary::from_json(&text).unwrap(), doc);
        assert!(ExactSummary::from_json(r#"{"nodes":1,"edges":0,"tau":0,"eta":1,"eta_last_one":null}"#).is_err());
        let t = exact_triangle_counts(&s).summary(&s).to_json().unwrap();
        assert!(t.contains("\"eta\": null"));
    }
}
