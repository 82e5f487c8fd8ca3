//! Edge-stream ingestion, synthetic generation and permutation.
//!
//! Stream order is preserved exactly: the position of an edge in
//! [`EdgeStream::edges`] is its arrival time, and order-dependent quantities
//! (the pair counts used by the variance formulas) are computed from it.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustc_hash::FxHashSet;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense node index assigned at ingestion.
pub type NodeId = u32;

/// Undirected edge in canonical form (`u < v`).
///
/// The fields are private so every `Edge` in circulation is canonical and
/// loop-free.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "(NodeId, NodeId)", into = "(NodeId, NodeId)")]
pub struct Edge {
    u: NodeId,
    v: NodeId,
}

impl Edge {
    /// Canonical edge between `a` and `b`, or `None` for a self-loop.
    #[inline]
    pub fn new(a: NodeId, b: NodeId) -> Option<Edge> {
        canonicalize_edge(a, b)
    }

    #[inline]
    pub fn u(self) -> NodeId {
        self.u
    }

    #[inline]
    pub fn v(self) -> NodeId {
        self.v
    }

    /// Both endpoints packed into one word, `u` in the high half.
    #[inline]
    pub fn key(self) -> u64 {
        (u64::from(self.u) << 32) | u64::from(self.v)
    }
}

impl TryFrom<(NodeId, NodeId)> for Edge {
    type Error = String;

    fn try_from((a, b): (NodeId, NodeId)) -> Result<Self, Self::Error> {
        canonicalize_edge(a, b).ok_or_else(|| format!("self-loop on node {a}"))
    }
}

impl From<Edge> for (NodeId, NodeId) {
    fn from(e: Edge) -> Self {
        (e.u, e.v)
    }
}

/// Sorts the endpoints; `None` signals a self-loop that must be skipped.
#[inline]
pub fn canonicalize_edge(a: NodeId, b: NodeId) -> Option<Edge> {
    match a.cmp(&b) {
        std::cmp::Ordering::Less => Some(Edge { u: a, v: b }),
        std::cmp::Ordering::Greater => Some(Edge { u: b, v: a }),
        std::cmp::Ordering::Equal => None,
    }
}

/// Counters collected while ingesting raw pairs.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestStats {
    pub lines: usize,
    pub edges: usize,
    pub duplicates_dropped: usize,
    pub self_loops_skipped: usize,
}

/// An ordered, duplicate-free sequence of canonical edges plus the
/// label of every node id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeStream {
    edges: Vec<Edge>,
    labels: Vec<String>,
}

impl EdgeStream {
    /// Builds a stream from labelled pairs in order, remapping labels to
    /// dense ids by first appearance and dropping loops and duplicates.
    pub fn from_labeled_pairs<I, A, B>(pairs: I) -> (EdgeStream, IngestStats)
    where
        I: IntoIterator<Item = (A, B)>,
        A: AsRef<str>,
        B: AsRef<str>,
    {
        let mut builder = StreamBuilder::default();
        for (a, b) in pairs {
            builder.stats.lines += 1;
            builder.push(a.as_ref(), b.as_ref());
        }
        builder.finish()
    }

    /// Convenience for fixtures: integer labels, same remapping rules.
    pub fn from_pairs(pairs: &[(u64, u64)]) -> EdgeStream {
        Self::from_labeled_pairs(pairs.iter().map(|(a, b)| (a.to_string(), b.to_string()))).0
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Number of edges, `t_max`.
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, id: NodeId) -> &str {
        &self.labels[id as usize]
    }

    /// Reverse lookup of a source label. Linear; meant for tests and tools.
    pub fn node_id(&self, label: &str) -> Option<NodeId> {
        self.labels.iter().position(|l| l == label).map(|i| i as NodeId)
    }

    /// Edge looked up by source labels.
    pub fn edge_by_labels(&self, a: &str, b: &str) -> Option<Edge> {
        Edge::new(self.node_id(a)?, self.node_id(b)?)
    }

    /// Stable fingerprint of the edge order, used to tell streams apart in
    /// evaluation tables.
    pub fn fingerprint(&self) -> u64 {
        let mut h = crate::hash::mix64(self.edges.len() as u64);
        for e in &self.edges {
            h = crate::hash::mix64(h ^ e.key());
        }
        h
    }

    /// Serializes as an edge-list document that parses back to the same
    /// stream.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::with_capacity(self.edges.len() * 12);
        for e in &self.edges {
            let _ = writeln!(out, "{} {}", self.label(e.u), self.label(e.v));
        }
        out
    }

    pub fn write_edge_list<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for e in &self.edges {
            writeln!(w, "{} {}", self.label(e.u), self.label(e.v))?;
        }
        Ok(())
    }
}

#[derive(Default)]
struct StreamBuilder {
    labels: Vec<String>,
    index: HashMap<String, NodeId>,
    seen: FxHashSet<Edge>,
    edges: Vec<Edge>,
    stats: IngestStats,
}

impl StreamBuilder {
    fn intern(&mut self, label: &str) -> NodeId {
        if let Some(&id) = self.index.get(label) {
            return id;
        }
        let id = self.labels.len() as NodeId;
        self.labels.push(label.to_owned());
        self.index.insert(label.to_owned(), id);
        id
    }

    fn push(&mut self, a: &str, b: &str) {
        if a == b {
            self.stats.self_loops_skipped += 1;
            return;
        }
        let ia = self.intern(a);
        let ib = self.intern(b);
        let edge = canonicalize_edge(ia, ib).expect("distinct labels map to distinct ids");
        if self.seen.insert(edge) {
            self.edges.push(edge);
        } else {
            self.stats.duplicates_dropped += 1;
        }
    }

    fn finish(mut self) -> (EdgeStream, IngestStats) {
        self.stats.edges = self.edges.len();
        (
            EdgeStream {
                edges: self.edges,
                labels: self.labels,
            },
            self.stats,
        )
    }
}

/// Parses a whitespace-separated edge list. `#` lines and blank lines are
/// ignored; any other line must hold exactly two tokens.
pub fn parse_edge_list(text: &str) -> Result<(EdgeStream, IngestStats)> {
    let mut builder = StreamBuilder::default();
    for (lineno, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut tokens = trimmed.split_whitespace();
        let (Some(a), Some(b), None) = (tokens.next(), tokens.next(), tokens.next()) else {
            return Err(Error::Parse {
                line: lineno + 1,
                message: format!(
                    "expected two whitespace-separated node labels, found {} token(s)",
                    trimmed.split_whitespace().count()
                ),
            });
        };
        builder.stats.lines += 1;
        builder.push(a, b);
    }
    Ok(builder.finish())
}

pub fn read_edge_list(path: impl AsRef<Path>) -> Result<(EdgeStream, IngestStats)> {
    let text = std::fs::read_to_string(path)?;
    parse_edge_list(&text)
}

/// Random graph families available to [`generate_synthetic`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphModel {
    /// `G(n, p)`; the parameter is the edge probability.
    ErdosRenyi,
    /// Preferential attachment; the parameter is the number of edges each
    /// new node attaches with.
    BarabasiAlbert,
}

impl std::str::FromStr for GraphModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "er" | "erdos-renyi" => Ok(GraphModel::ErdosRenyi),
            "ba" | "barabasi-albert" => Ok(GraphModel::BarabasiAlbert),
            other => Err(Error::config(format!("unknown graph model `{other}`"))),
        }
    }
}

/// Generates a simple undirected graph and emits its edges in a seeded
/// uniformly random order.
pub fn generate_synthetic(model: GraphModel, n: usize, param: f64, seed: u64) -> Result<EdgeStream> {
    if n < 3 {
        return Err(Error::config(format!("node count must be at least 3, got {n}")));
    }
    if n > NodeId::MAX as usize {
        return Err(Error::config(format!("node count {n} exceeds the id range")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs = match model {
        GraphModel::ErdosRenyi => {
            if !(param > 0.0 && param <= 1.0) {
                return Err(Error::config(format!("edge probability must lie in (0, 1], got {param}")));
            }
            erdos_renyi(n, param, &mut rng)
        }
        GraphModel::BarabasiAlbert => {
            if param.fract() != 0.0 || param < 1.0 || param >= n as f64 {
                return Err(Error::config(format!(
                    "attachment degree must be an integer in [1, {n}), got {param}"
                )));
            }
            barabasi_albert(n, param as usize, &mut rng)
        }
    };
    pairs.shuffle(&mut rng);
    let (stream, _) =
        EdgeStream::from_labeled_pairs(pairs.iter().map(|&(a, b)| (a.to_string(), b.to_string())));
    Ok(stream)
}

/// Geometric skipping over the `n(n-1)/2` candidate pairs.
fn erdos_renyi(n: usize, p: f64, rng: &mut ChaCha8Rng) -> Vec<(u32, u32)> {
    let mut pairs = Vec::new();
    if p >= 1.0 {
        for v in 1..n {
            for w in 0..v {
                pairs.push((w as u32, v as u32));
            }
        }
        return pairs;
    }
    let log_q = (1.0 - p).ln();
    let (mut v, mut w) = (1_i64, -1_i64);
    let n = n as i64;
    while v < n {
        let r: f64 = 1.0 - rng.random::<f64>();
        w += 1 + (r.ln() / log_q).floor() as i64;
        while w >= v && v < n {
            w -= v;
            v += 1;
        }
        if v < n {
            pairs.push((w as u32, v as u32));
        }
    }
    pairs
}

/// Starts from `k` isolated seed nodes; each later node links to `k`
/// distinct targets drawn proportionally to degree. Produces exactly
/// `(n - k) * k` edges.
fn barabasi_albert(n: usize, k: usize, rng: &mut ChaCha8Rng) -> Vec<(u32, u32)> {
    let mut pairs = Vec::with_capacity((n - k) * k);
    let mut repeated: Vec<u32> = Vec::with_capacity(2 * (n - k) * k);
    let mut targets: Vec<u32> = (0..k as u32).collect();
    let mut chosen = FxHashSet::default();
    for source in k..n {
        let source = source as u32;
        for &t in &targets {
            pairs.push((source, t));
        }
        repeated.extend_from_slice(&targets);
        repeated.extend(std::iter::repeat_n(source, k));
        chosen.clear();
        targets.clear();
        while targets.len() < k {
            let pick = repeated[rng.random_range(0..repeated.len())];
            if chosen.insert(pick) {
                targets.push(pick);
            }
        }
    }
    pairs
}

/// Returns the same edges in a seeded uniformly random order. Seed 0 is
/// reserved for the identity permutation.
pub fn permute_stream(stream: &EdgeStream, seed: u64) -> EdgeStream {
    let mut out = stream.clone();
    if seed != 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        out.edges.shuffle(&mut rng);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonicalize_sorts_and_skips_loops() {
        assert_eq!(canonicalize_edge(5, 2), Some(Edge { u: 2, v: 5 }));
        assert_eq!(canonicalize_edge(2, 5), Some(Edge { u: 2, v: 5 }));
        assert_eq!(canonicalize_edge(3, 3), None);
    }

    #[test]
    fn parse_remaps_labels_in_first_seen_order() {
        let (s, stats) = parse_edge_list("1 2\n# c\n2 3\n").unwrap();
        assert_eq!(s.edges(), &[Edge { u: 0, v: 1 }, Edge { u: 1, v: 2 }]);
        assert_eq!(s.labels(), &["1", "2", "3"]);
        assert_eq!(stats.edges, 2);
    }

    #[test]
    fn parse_drops_duplicates_and_loops() {
        let (s, stats) = parse_edge_list("1 2\n2 1\n\n3 3\n").unwrap();
        assert_eq!(s.edges(), &[Edge { u: 0, v: 1 }]);
        assert_eq!(stats.duplicates_dropped, 1);
        assert_eq!(stats.self_loops_skipped, 1);
        // a skipped loop does not allocate an id
        assert_eq!(s.node_count(), 2);
    }

    #[test]
    fn parse_rejects_wrong_arity() {
        match parse_edge_list("1 2 3\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 1),
            other => panic!("expected parse error, got {other:?}"),
        }
        match parse_edge_list("1 2\n\n7\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn parse_accepts_tabs_and_crlf() {
        let (s, _) = parse_edge_list("a\tb\r\nb  c\r\n").unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.label(2), "c");
    }

    #[test]
    fn complete_er_graph_on_three_nodes() {
        for seed in [0, 1, 99] {
            let s = generate_synthetic(GraphModel::ErdosRenyi, 3, 1.0, seed).unwrap();
            let mut got: Vec<_> = s.edges().iter().map(|e| (s.label(e.u()), s.label(e.v()))).collect();
            for p in got.iter_mut() {
                if p.0 > p.1 {
                    *p = (p.1, p.0);
                }
            }
            got.sort();
            assert_eq!(got, vec![("0", "1"), ("0", "2"), ("1", "2")]);
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let a = generate_synthetic(GraphModel::ErdosRenyi, 100, 0.1, 7).unwrap();
        let b = generate_synthetic(GraphModel::ErdosRenyi, 100, 0.1, 7).unwrap();
        assert_eq!(a, b);
        let c = generate_synthetic(GraphModel::ErdosRenyi, 100, 0.1, 8).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn er_edge_count_is_plausible() {
        // mean 4950 * 0.1 = 495, sd ~ 21
        let s = generate_synthetic(GraphModel::ErdosRenyi, 100, 0.1, 3).unwrap();
        assert!((400..600).contains(&s.len()), "{}", s.len());
    }

    #[test]
    fn ba_has_exact_edge_count_and_is_connected() {
        let s = generate_synthetic(GraphModel::BarabasiAlbert, 1000, 5.0, 1).unwrap();
        assert_eq!(s.len(), (1000 - 5) * 5);
        assert_eq!(s.node_count(), 1000);
        // union-find connectivity
        let mut parent: Vec<usize> = (0..s.node_count()).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for e in s.edges() {
            let (a, b) = (find(&mut parent, e.u() as usize), find(&mut parent, e.v() as usize));
            parent[a] = b;
        }
        let root = find(&mut parent, 0);
        assert!((0..s.node_count()).all(|x| find(&mut parent, x) == root));
    }

    #[test]
    fn invalid_generator_parameters() {
        assert!(generate_synthetic(GraphModel::ErdosRenyi, 2, 0.5, 0).is_err());
        assert!(generate_synthetic(GraphModel::ErdosRenyi, 10, 0.0, 0).is_err());
        assert!(generate_synthetic(GraphModel::ErdosRenyi, 10, 1.5, 0).is_err());
        assert!(generate_synthetic(GraphModel::BarabasiAlbert, 10, 0.0, 0).is_err());
        assert!(generate_synthetic(GraphModel::BarabasiAlbert, 10, 2.5, 0).is_err());
        assert!(generate_synthetic(GraphModel::BarabasiAlbert, 10, 10.0, 0).is_err());
    }

    #[test]
    fn seed_zero_permutation_is_identity() {
        let s = generate_synthetic(GraphModel::ErdosRenyi, 30, 0.3, 5).unwrap();
        assert_eq!(permute_stream(&s, 0), s);
        let p = permute_stream(&s, 11);
        assert_ne!(p.edges(), s.edges());
        let mut a = p.edges().to_vec();
        let mut b = s.edges().to_vec();
        a.sort();
        b.sort();
        assert_eq!(a, b);
    }

    #[test]
    fn serialize_parse_round_trip() {
        let s = generate_synthetic(GraphModel::BarabasiAlbert, 50, 3.0, 2).unwrap();
        let (back, stats) = parse_edge_list(&s.to_edge_list()).unwrap();
        assert_eq!(back, s);
        assert_eq!(stats.duplicates_dropped, 0);
    }
}
