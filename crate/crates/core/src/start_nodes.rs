//! Start-node discovery.
//!
//! A target node becomes a start node when it has between 1 and `k - 1`
//! attribute-plausible query nodes and at least one of them survives the
//! degree, 2-hop and neighborhood-plausibility checks.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::graph::{AttributedGraph, NodeId, NodeIx};

/// For every target node, the query nodes it could plausibly pair with.
#[derive(Clone, Debug, PartialEq)]
pub struct CandidateMap {
    // Sorted by query index; the distance is cached when it is known.
    rows: Vec<Vec<(NodeIx, Option<f64>)>>,
    holders: Vec<Vec<NodeIx>>,
}

impl CandidateMap {
    pub(crate) fn from_rows(rows: Vec<Vec<(NodeIx, f64)>>, query_len: usize) -> Self {
        Self::assemble(
            rows.into_iter()
                .map(|r| r.into_iter().map(|(w, d)| (w, Some(d))).collect())
                .collect(),
            query_len,
        )
    }

    /// Builds a map from explicit `(target, query)` pairs.
    pub fn from_pairs(
        target_len: usize,
        query_len: usize,
        pairs: impl IntoIterator<Item = (NodeIx, NodeIx)>,
    ) -> Self {
        let mut rows = vec![Vec::new(); target_len];
        for (u, w) in pairs {
            rows[u.index()].push((w, None));
        }
        Self::assemble(rows, query_len)
    }

    fn assemble(mut rows: Vec<Vec<(NodeIx, Option<f64>)>>, query_len: usize) -> Self {
        let mut holders = vec![Vec::new(); query_len];
        for (u, row) in rows.iter_mut().enumerate() {
            row.sort_unstable_by_key(|e| e.0);
            row.dedup_by_key(|e| e.0);
            for &(w, _) in row.iter() {
                holders[w.index()].push(NodeIx::new(u));
            }
        }
        CandidateMap { rows, holders }
    }

    pub fn target_len(&self) -> usize {
        self.rows.len()
    }

    pub fn candidates(&self, u: NodeIx) -> impl ExactSizeIterator<Item = NodeIx> + '_ {
        self.rows[u.index()].iter().map(|e| e.0)
    }

    pub fn count(&self, u: NodeIx) -> usize {
        self.rows[u.index()].len()
    }

    pub fn contains(&self, u: NodeIx, w: NodeIx) -> bool {
        self.rows[u.index()].binary_search_by_key(&w, |e| e.0).is_ok()
    }

    /// Cached attribute distance for `(u, w)`, if `w` is a candidate of `u`
    /// and the map was built from attribute comparisons.
    pub fn distance(&self, u: NodeIx, w: NodeIx) -> Option<f64> {
        let row = &self.rows[u.index()];
        row.binary_search_by_key(&w, |e| e.0).ok().and_then(|i| row[i].1)
    }

    /// Target nodes listing `w` as a candidate, sorted.
    pub fn holders(&self, w: NodeIx) -> &[NodeIx] {
        &self.holders[w.index()]
    }

    pub fn to_id_map(
        &self,
        target: &AttributedGraph,
        query: &AttributedGraph,
    ) -> BTreeMap<NodeId, Vec<NodeId>> {
        target
            .node_indices()
            .map(|u| {
                (
                    target.id(u).clone(),
                    self.candidates(u).map(|w| query.id(w).clone()).collect(),
                )
            })
            .collect()
    }
}

/// Options for [`find_start_nodes`].
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct StartOptions {
    /// Require each neighbor and 2-hop neighbor of `w` to be plausible for some
    /// node in the 2-hop ball around `u`, rather than for any target node.
    pub strict_local_check: bool,
    pub two_hop_excludes_neighbors: bool,
}

impl Default for StartOptions {
    fn default() -> Self {
        StartOptions {
            strict_local_check: true,
            two_hop_excludes_neighbors: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StartEntry {
    pub target: NodeIx,
    pub candidates: Vec<NodeIx>,
}

/// Start nodes ordered by ascending candidate count, then node id.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct StartSet {
    pub entries: Vec<StartEntry>,
}

impl StartSet {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = &StartEntry> {
        self.entries.iter()
    }

    pub fn to_id_pairs(
        &self,
        target: &AttributedGraph,
        query: &AttributedGraph,
    ) -> Vec<(NodeId, Vec<NodeId>)> {
        self.entries
            .iter()
            .map(|e| {
                (
                    target.id(e.target).clone(),
                    e.candidates.iter().map(|&w| query.id(w).clone()).collect(),
                )
            })
            .collect()
    }
}

pub fn find_start_nodes(
    target: &AttributedGraph,
    query: &AttributedGraph,
    p: &CandidateMap,
    k: usize,
    opts: StartOptions,
) -> StartSet {
    let seeds: Vec<NodeIx> = target
        .node_indices()
        .filter(|&u| (1..k).contains(&p.count(u)))
        .collect();

    let mut entries: Vec<StartEntry> = seeds
        .par_iter()
        .filter_map(|&u| {
            let survivors: Vec<NodeIx> = p
                .candidates(u)
                .filter(|&w| plausible_start(target, query, p, u, w, opts))
                .collect();
            (!survivors.is_empty()).then_some(StartEntry {
                target: u,
                candidates: survivors,
            })
        })
        .collect();
    // Index order equals id order.
    entries.sort_by_key(|e| (e.candidates.len(), e.target));
    StartSet { entries }
}

fn plausible_start(
    target: &AttributedGraph,
    query: &AttributedGraph,
    p: &CandidateMap,
    u: NodeIx,
    w: NodeIx,
    opts: StartOptions,
) -> bool {
    let excl = opts.two_hop_excludes_neighbors;
    if target.degree(u) < query.degree(w) {
        return false;
    }
    if target.two_hop_count(u, excl) < query.two_hop_count(w, excl) {
        return false;
    }
    let ball: Vec<NodeIx> = if opts.strict_local_check {
        let mut b: Vec<NodeIx> = target
            .neighbors_of(u)
            .iter()
            .chain(target.two_hop_of(u))
            .copied()
            .collect();
        b.sort_unstable();
        b.dedup();
        b
    } else {
        Vec::new()
    };
    let has_match = |x: NodeIx| -> bool {
        if !opts.strict_local_check {
            return !p.holders(x).is_empty();
        }
        let holders = p.holders(x);
        if holders.len() <= ball.len() {
            holders.iter().any(|h| ball.binary_search(h).is_ok())
        } else {
            ball.iter().any(|&b| p.contains(b, x))
        }
    };
    query.neighbors_of(w).iter().all(|&x| has_match(x))
        && query.two_hop_filtered(w, excl).all(has_match)
}
