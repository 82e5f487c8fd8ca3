//! Streaming state of one processor.
//!
//! Every stream edge is first *observed* (closing semi-triangles against the
//! edges this processor already holds) and only then, if the processor
//! samples it, *inserted*. A triangle whose last edge is sampled is therefore
//! counted exactly once, at the arrival of that edge.

use rustc_hash::{FxHashMap, FxHashSet};

use crate::stream::{Edge, NodeId};

/// Which counters a processor maintains.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairMode {
    /// Semi-triangle counts only.
    CountOnly,
    /// Adds per-edge triangle counters and the pair counters used to
    /// estimate `eta`.
    WithPairs,
    /// `WithPairs` plus a split of the pair counter into pairs whose shared
    /// edge is the last edge of neither triangle and pairs whose shared edge
    /// is the last edge of exactly one. Used by the exact oracle.
    Classified,
}

impl PairMode {
    fn tracks_pairs(self) -> bool {
        !matches!(self, PairMode::CountOnly)
    }
}

/// Final counters of a processor, with the sampled edge set dropped.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ProcessorSummary {
    pub tau: u64,
    pub tau_v: FxHashMap<NodeId, u64>,
    pub eta: Option<u64>,
    pub eta_v: FxHashMap<NodeId, u64>,
}

#[derive(Debug, Clone, Default)]
struct Classification {
    /// Part of `tau_edge` that was seeded at insertion (triangles whose last
    /// stream edge is the key).
    seeded: FxHashMap<Edge, u64>,
    neither: u64,
    neither_v: FxHashMap<NodeId, u64>,
    last_one: u64,
}

#[derive(Debug, Clone)]
pub struct ProcessorState {
    index: usize,
    mode: PairMode,
    adjacency: FxHashMap<NodeId, FxHashSet<NodeId>>,
    sampled_edges: usize,
    tau: u64,
    tau_v: FxHashMap<NodeId, u64>,
    eta: u64,
    eta_v: FxHashMap<NodeId, u64>,
    tau_edge: FxHashMap<Edge, u64>,
    classification: Option<Box<Classification>>,
}

#[inline]
fn bump(map: &mut FxHashMap<NodeId, u64>, key: NodeId, by: u64) {
    if by != 0 {
        *map.entry(key).or_insert(0) += by;
    }
}

fn edge(a: NodeId, b: NodeId) -> Edge {
    Edge::new(a, b).expect("semi-triangle apex differs from both endpoints")
}

impl ProcessorState {
    pub fn new(index: usize, mode: PairMode) -> Self {
        ProcessorState {
            index,
            mode,
            adjacency: FxHashMap::default(),
            sampled_edges: 0,
            tau: 0,
            tau_v: FxHashMap::default(),
            eta: 0,
            eta_v: FxHashMap::default(),
            tau_edge: FxHashMap::default(),
            classification: matches!(mode, PairMode::Classified).then(Box::default),
        }
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn mode(&self) -> PairMode {
        self.mode
    }

    /// Closes semi-triangles on `(u, v)` against the sampled edge set and
    /// returns the common neighbours `N_u ∩ N_v`. Must be called for every
    /// stream edge, before the edge is (possibly) inserted.
    pub fn observe_edge(&mut self, e: Edge) -> Vec<NodeId> {
        let (u, v) = (e.u(), e.v());
        let common = match (self.adjacency.get(&u), self.adjacency.get(&v)) {
            (Some(nu), Some(nv)) => {
                let (small, large) = if nu.len() <= nv.len() { (nu, nv) } else { (nv, nu) };
                small.iter().copied().filter(|w| large.contains(w)).collect::<Vec<_>>()
            }
            _ => return Vec::new(),
        };
        if common.is_empty() {
            return common;
        }

        let k = common.len() as u64;
        self.tau += k;
        bump(&mut self.tau_v, u, k);
        bump(&mut self.tau_v, v, k);
        for &w in &common {
            bump(&mut self.tau_v, w, 1);
        }

        if self.mode.tracks_pairs() {
            for &w in &common {
                let uw = edge(u, w);
                let vw = edge(v, w);
                let t_uw = self.tau_edge[&uw];
                let t_vw = self.tau_edge[&vw];
                self.eta += t_uw + t_vw;
                bump(&mut self.eta_v, w, t_uw + t_vw);
                bump(&mut self.eta_v, u, t_uw);
                bump(&mut self.eta_v, v, t_vw);

                if let Some(cls) = self.classification.as_deref_mut() {
                    let s_uw = cls.seeded.get(&uw).copied().unwrap_or(0);
                    let s_vw = cls.seeded.get(&vw).copied().unwrap_or(0);
                    let (n_uw, n_vw) = (t_uw - s_uw, t_vw - s_vw);
                    cls.neither += n_uw + n_vw;
                    cls.last_one += s_uw + s_vw;
                    bump(&mut cls.neither_v, w, n_uw + n_vw);
                    bump(&mut cls.neither_v, u, n_uw);
                    bump(&mut cls.neither_v, v, n_vw);
                }

                *self.tau_edge.get_mut(&uw).expect("sampled edge has a counter") += 1;
                *self.tau_edge.get_mut(&vw).expect("sampled edge has a counter") += 1;
            }
        }
        common
    }

    /// Adds a sampled edge. `common` must be the value `observe_edge`
    /// returned for this same arrival.
    ///
    /// Panics if the edge is already present: streams are simple.
    pub fn insert_sampled_edge(&mut self, e: Edge, common: &[NodeId]) {
        let (u, v) = (e.u(), e.v());
        let fresh = self.adjacency.entry(u).or_default().insert(v);
        assert!(fresh, "edge {e:?} inserted twice into processor {}", self.index);
        self.adjacency.entry(v).or_default().insert(u);
        self.sampled_edges += 1;
        if self.mode.tracks_pairs() {
            let k = common.len() as u64;
            self.tau_edge.insert(e, k);
            if let Some(cls) = self.classification.as_deref_mut() {
                if k > 0 {
                    cls.seeded.insert(e, k);
                }
            }
        }
    }

    /// Observe, then insert if `sampled`.
    #[inline]
    pub fn process(&mut self, e: Edge, sampled: bool) {
        let common = self.observe_edge(e);
        if sampled {
            self.insert_sampled_edge(e, &common);
        }
    }

    /// Semi-triangles counted so far.
    pub fn tau(&self) -> u64 {
        self.tau
    }

    pub fn tau_v(&self, node: NodeId) -> u64 {
        self.tau_v.get(&node).copied().unwrap_or(0)
    }

    pub fn tau_v_map(&self) -> &FxHashMap<NodeId, u64> {
        &self.tau_v
    }

    /// Pair counter as Algorithm-2 style updates define it; `None` in
    /// count-only mode.
    pub fn eta(&self) -> Option<u64> {
        self.mode.tracks_pairs().then_some(self.eta)
    }

    pub fn eta_v(&self, node: NodeId) -> Option<u64> {
        self.mode
            .tracks_pairs()
            .then(|| self.eta_v.get(&node).copied().unwrap_or(0))
    }

    pub fn eta_v_map(&self) -> Option<&FxHashMap<NodeId, u64>> {
        self.mode.tracks_pairs().then_some(&self.eta_v)
    }

    /// Per-edge triangle counter for a sampled edge.
    pub fn tau_edge(&self, e: Edge) -> Option<u64> {
        self.tau_edge.get(&e).copied()
    }

    /// `(neither, last_one)` split of the pair counter; classified mode only.
    pub fn eta_split(&self) -> Option<(u64, u64)> {
        self.classification.as_deref().map(|c| (c.neither, c.last_one))
    }

    /// Per-node pair counts restricted to pairs whose shared edge is the
    /// last edge of neither member; classified mode only.
    pub fn eta_neither_v_map(&self) -> Option<&FxHashMap<NodeId, u64>> {
        self.classification.as_deref().map(|c| &c.neither_v)
    }

    pub fn contains_edge(&self, e: Edge) -> bool {
        self.adjacency.get(&e.u()).is_some_and(|n| n.contains(&e.v()))
    }

    pub fn neighbors(&self, node: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.adjacency.get(&node).into_iter().flatten().copied()
    }

    pub fn sampled_edge_count(&self) -> usize {
        self.sampled_edges
    }

    pub fn into_summary(self) -> ProcessorSummary {
        let pairs = self.mode.tracks_pairs();
        ProcessorSummary {
            tau: self.tau,
            tau_v: self.tau_v,
            eta: pairs.then_some(self.eta),
            eta_v: self.eta_v,
        }
    }

    #[cfg(test)]
    fn check_invariants(&self) {
        for (&a, ns) in &self.adjacency {
            for &b in ns {
                assert!(self.adjacency[&b].contains(&a), "asymmetric adjacency {a}-{b}");
            }
        }
        let degree_sum: usize = self.adjacency.values().map(|n| n.len()).sum();
        assert_eq!(degree_sum, 2 * self.sampled_edges);
        assert_eq!(self.tau_v.values().sum::<u64>(), 3 * self.tau);
        if self.mode.tracks_pairs() {
            assert_eq!(self.tau_edge.len(), self.sampled_edges);
            assert!(self.tau_edge.keys().all(|&e| self.contains_edge(e)));
            assert_eq!(self.eta_v.values().sum::<u64>(), 2 * self.eta);
        }
    }
}
