//! Depth-first matching over the target graph.
//!
//! For every start node the search walks the target graph from the start,
//! pairing each reached target node with the cheapest acceptable query node.
//! A query node is considered for a target node only if it is
//! attribute-plausible, still unmapped, and adjacent to an already mapped query
//! node. Target nodes farther from the start than the query's eccentricity
//! (measured from the start node's partner) are never entered.
//!
//! Whenever a node had more than one acceptable partner, the search state is
//! saved in a [`SearchFrame`] together with the untried partners. After a
//! search completes, the deepest frame with untried partners is restored and
//! the search continues from there. A branch is abandoned as soon as the best
//! global cost it could still reach exceeds the best cost found so far for the
//! same start node.
//!
//! Target nodes reached with no acceptable partner stay unmapped, but their
//! neighbors are still explored. Such a node is looked at again whenever one
//! of its neighbors gets mapped later on. A node that does have partners may
//! also be left unmapped on backtracking, when some other reachable target
//! node could take one of those partners instead; it too is looked at again
//! once another neighbor gets mapped.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::time::{Duration, Instant};

use log::{debug, trace};
use rayon::prelude::*;

use crate::cost::{global_cost_from_parts, CostModel};
use crate::error::MatchError;
use crate::graph::{AttributedGraph, NodeIx};
use crate::mapping::{Mapping, Pair};
use crate::params::MatchParams;
use crate::similarity::candidate_map;
use crate::start_nodes::{find_start_nodes, CandidateMap, StartSet};

const COST_EPS: f64 = 1e-12;

/// A completed mapping found from one start node.
#[derive(Clone, Debug, PartialEq)]
pub struct Match {
    pub mapping: Mapping,
    pub global_cost: f64,
    pub start: NodeIx,
    /// Target nodes the producing search reached, sorted.
    pub explored: Vec<NodeIx>,
}

impl Match {
    fn sort_key(&self) -> Vec<(NodeIx, NodeIx)> {
        self.mapping.pair_set().into_iter().collect()
    }
}

#[derive(Clone, Debug)]
pub struct MatchResult {
    /// Ascending global cost, ties broken by the sorted pair list.
    pub matches: Vec<Match>,
    /// Start nodes whose search actually ran, in order.
    pub start_nodes_used: Vec<NodeIx>,
    /// Start nodes skipped because an earlier search that paired every query
    /// node had reached them.
    pub start_nodes_skipped: Vec<NodeIx>,
    pub explored_node_count: usize,
    pub backtracks: usize,
    pub backtrack_cap_hit: bool,
    pub runtime: Duration,
}

impl MatchResult {
    pub fn best(&self) -> Option<&Match> {
        self.matches.first()
    }
}

/// An untried option at a decision point.
#[derive(Copy, Clone, Debug, PartialEq)]
pub enum Alternative {
    Pair(NodeIx, f64),
    /// Leave the target node unmapped so another target node can take one of
    /// its partners.
    Decline,
}

/// A saved decision point: the state just before `target` was paired and the
/// options not tried yet. Partners come cheapest first, a decline last.
#[derive(Clone, Debug)]
pub struct SearchFrame {
    pub target: NodeIx,
    pub alternatives: Vec<Alternative>,
    state: SearchState,
}

/// Outcome of searching from a single start node.
#[derive(Clone, Debug, Default)]
pub struct StartSearch {
    pub matches: Vec<Match>,
    pub visited: Vec<NodeIx>,
    pub backtracks: usize,
    pub cap_hit: bool,
}

const POPPED: u8 = 1;
const EXPANDED_UNMAPPED: u8 = 2;
const EXPANDED_MAPPED: u8 = 4;
const DECLINED: u8 = 8;

/// Target nodes within the allowed radius of the start node, densely numbered.
struct Region {
    local: HashMap<NodeIx, usize>,
    nodes: Vec<NodeIx>,
}

impl Region {
    fn around(target: &AttributedGraph, start: NodeIx, radius: usize) -> Self {
        let mut nodes: Vec<NodeIx> = target.bfs_distances(start, Some(radius)).into_keys().collect();
        nodes.sort_unstable();
        let local = nodes.iter().enumerate().map(|(i, &n)| (n, i)).collect();
        Region { local, nodes }
    }
}

#[derive(Clone, Debug)]
struct SearchState {
    mapping: Mapping,
    stack: Vec<NodeIx>,
    flags: Vec<u8>,
}

impl SearchState {
    fn popped(&self, region: &Region) -> Vec<NodeIx> {
        region
            .nodes
            .iter()
            .zip(&self.flags)
            .filter(|(_, &f)| f & POPPED != 0)
            .map(|(&n, _)| n)
            .collect()
    }
}

enum Advance {
    Completed,
    Pruned,
}

/// Best results for one start node, shared across its start partners.
struct Accumulator {
    incumbent: f64,
    found: Vec<Match>,
    visited: HashSet<NodeIx>,
    backtracks: usize,
    cap_hit: bool,
}

/// Matching pipeline for one target/query pair.
pub struct Matcher<'g> {
    target: &'g AttributedGraph,
    query: &'g AttributedGraph,
    params: &'g MatchParams,
    model: CostModel<'g>,
    candidates: CandidateMap,
    threshold: f64,
}

impl<'g> Matcher<'g> {
    pub fn new(
        target: &'g AttributedGraph,
        query: &'g AttributedGraph,
        params: &'g MatchParams,
    ) -> Result<Self, MatchError> {
        params.validate()?;
        if target.is_empty() {
            return Err(MatchError::EmptyGraph { which: "target" });
        }
        if query.is_empty() {
            return Err(MatchError::EmptyGraph { which: "query" });
        }
        let candidates = candidate_map(target, query, &params.comparator(), params.candidate_threshold);
        Ok(Self::with_candidates(target, query, params, candidates))
    }

    /// Uses a caller-supplied candidate map instead of attribute comparison.
    pub fn with_candidates(
        target: &'g AttributedGraph,
        query: &'g AttributedGraph,
        params: &'g MatchParams,
        candidates: CandidateMap,
    ) -> Self {
        Matcher {
            target,
            query,
            params,
            model: CostModel::new(target, query, params),
            candidates,
            threshold: params.effective_threshold(),
        }
    }

    pub fn candidates(&self) -> &CandidateMap {
        &self.candidates
    }

    pub fn cost_model(&self) -> &CostModel<'g> {
        &self.model
    }

    pub fn start_nodes(&self) -> StartSet {
        find_start_nodes(
            self.target,
            self.query,
            &self.candidates,
            self.params.k,
            self.params.start_options(),
        )
    }

    /// Runs every start node and collects the best mappings.
    pub fn run(&self) -> Result<MatchResult, MatchError> {
        let clock = Instant::now();
        let starts = self.start_nodes();
        if starts.is_empty() {
            return Err(MatchError::NoStartNodes { k: self.params.k });
        }
        debug!("{} start nodes", starts.len());

        let mut used = Vec::new();
        let mut skipped = Vec::new();
        let mut region: HashSet<NodeIx> = HashSet::new();
        let mut explored: HashSet<NodeIx> = HashSet::new();
        let mut all: Vec<Match> = Vec::new();
        let mut backtracks = 0;
        let mut cap_hit = false;

        let nq = self.query.node_count();
        let mut absorb = |start: NodeIx, s: StartSearch, region: &mut HashSet<NodeIx>| {
            if !s.visited.is_empty() {
                used.push(start);
            }
            // Only a search that paired every query node marks its area as
            // explored; a partial result says nothing about nearby starts.
            if s.matches.iter().any(|m| m.mapping.len() == nq) {
                region.extend(s.visited.iter().copied());
            }
            explored.extend(s.visited);
            backtracks += s.backtracks;
            cap_hit |= s.cap_hit;
            all.extend(s.matches);
        };

        if self.params.skip_visited_starts {
            for entry in starts.iter() {
                if region.contains(&entry.target) {
                    trace!("skip start {:?}: already visited", entry.target);
                    skipped.push(entry.target);
                    continue;
                }
                let s = self.dfs_from_start(entry.target, &entry.candidates);
                absorb(entry.target, s, &mut region);
            }
        } else {
            let searches: Vec<StartSearch> = starts
                .entries
                .par_iter()
                .map(|e| self.dfs_from_start(e.target, &e.candidates))
                .collect();
            for (entry, s) in starts.iter().zip(searches) {
                absorb(entry.target, s, &mut region);
            }
        }

        let mut seen = HashSet::new();
        all.sort_by(|a, b| {
            a.global_cost
                .total_cmp(&b.global_cost)
                .then_with(|| a.sort_key().cmp(&b.sort_key()))
        });
        all.retain(|m| seen.insert(m.mapping.pair_set()));

        Ok(MatchResult {
            matches: all,
            start_nodes_used: used,
            start_nodes_skipped: skipped,
            explored_node_count: explored.len(),
            backtracks,
            backtrack_cap_hit: cap_hit,
            runtime: clock.elapsed(),
        })
    }

    /// Target nodes reached by a finished set of start searches.
    pub fn visited_region<'a>(searches: impl IntoIterator<Item = &'a StartSearch>) -> BTreeSet<NodeIx> {
        searches
            .into_iter()
            .flat_map(|s| s.visited.iter().copied())
            .collect()
    }

    /// Searches from one start node, trying each start partner in ascending
    /// local-cost order. Returns the cheapest mappings found.
    pub fn dfs_from_start(&self, start: NodeIx, start_candidates: &[NodeIx]) -> StartSearch {
        let empty = Mapping::new(self.query.node_count());
        let mut partners: Vec<(NodeIx, f64)> = start_candidates
            .iter()
            .map(|&w| (w, self.pair_cost(start, w, &empty)))
            .filter(|&(_, c)| c <= self.threshold)
            .collect();
        partners.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));

        let mut acc = Accumulator {
            incumbent: f64::INFINITY,
            found: Vec::new(),
            visited: HashSet::new(),
            backtracks: 0,
            cap_hit: false,
        };
        for (w0, c0) in partners {
            if acc.cap_hit {
                break;
            }
            let radius = self.query.eccentricity(w0);
            let region = Region::around(self.target, start, radius);
            trace!("start {:?} -> {:?} (cost {c0}, radius {radius})", start, w0);
            self.search(&region, start, w0, c0, &mut acc);
        }

        let best = acc.incumbent;
        let mut matches: Vec<Match> = acc
            .found
            .into_iter()
            .filter(|m| m.global_cost <= best + COST_EPS)
            .collect();
        let mut seen = HashSet::new();
        matches.retain(|m| seen.insert(m.mapping.pair_set()));
        let mut visited: Vec<NodeIx> = acc.visited.into_iter().collect();
        visited.sort_unstable();
        StartSearch {
            matches,
            visited,
            backtracks: acc.backtracks,
            cap_hit: acc.cap_hit,
        }
    }

    fn pair_cost(&self, u: NodeIx, w: NodeIx, state: &Mapping) -> f64 {
        match self.candidates.distance(u, w) {
            Some(d) => self.model.local_cost_with(d, u, w, state),
            None => self.model.local_cost(u, w, state),
        }
    }

    /// Acceptable partners of `u`, cheapest first.
    fn acceptable(&self, u: NodeIx, state: &Mapping) -> Vec<(NodeIx, f64)> {
        let mut out: Vec<(NodeIx, f64)> = self
            .candidates
            .candidates(u)
            .filter(|&w| {
                !state.is_query_mapped(w)
                    && self
                        .query
                        .neighbors_of(w)
                        .iter()
                        .any(|&x| state.is_query_mapped(x))
            })
            .map(|w| (w, self.pair_cost(u, w, state)))
            .filter(|&(_, c)| c <= self.threshold)
            .collect();
        out.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        out
    }

    /// Optimistic global cost of any completion of `m`: every remaining query
    /// node gets mapped at zero cost.
    fn bound(&self, m: &Mapping) -> f64 {
        self.params.lambda2 * m.local_cost_sum() / self.query.node_count() as f64
    }

    fn pair_and_expand(&self, region: &Region, state: &mut SearchState, u: NodeIx, w: NodeIx, cost: f64) {
        state.mapping.insert(Pair {
            target: u,
            query: w,
            local_cost: cost,
        });
        self.expand(region, state, u, EXPANDED_MAPPED);
    }

    fn expand(&self, region: &Region, state: &mut SearchState, u: NodeIx, how: u8) {
        let li = region.local[&u];
        if state.flags[li] & how != 0 {
            return;
        }
        state.flags[li] |= how;
        // Reverse order so the smallest id is popped first.
        for &v in self.target.neighbors_of(u).iter().rev() {
            if let Some(&lv) = region.local.get(&v) {
                if state.mapping.is_target_mapped(v) {
                    continue;
                }
                // A new mapped neighbor may open partners a declined node lacked.
                if how == EXPANDED_MAPPED {
                    state.flags[lv] &= !DECLINED;
                }
                state.stack.push(v);
            }
        }
    }

    /// Whether another reachable, still free target node could take one of
    /// `u`'s partners.
    fn contested(&self, region: &Region, state: &SearchState, u: NodeIx, options: &[(NodeIx, f64)]) -> bool {
        options.iter().any(|&(w, _)| {
            self.candidates.holders(w).iter().any(|&h| {
                h != u
                    && !state.mapping.is_target_mapped(h)
                    && region
                        .local
                        .get(&h)
                        .is_some_and(|&l| state.flags[l] & DECLINED == 0)
            })
        })
    }

    fn search(&self, region: &Region, start: NodeIx, w0: NodeIx, c0: f64, acc: &mut Accumulator) {
        let mut state = SearchState {
            mapping: Mapping::new(self.query.node_count()),
            stack: Vec::new(),
            flags: vec![0; region.nodes.len()],
        };
        state.flags[region.local[&start]] |= POPPED;
        self.pair_and_expand(region, &mut state, start, w0, c0);
        let mut frames: Vec<SearchFrame> = Vec::new();

        let mut outcome = if self.bound(&state.mapping) > acc.incumbent + COST_EPS {
            Advance::Pruned
        } else {
            self.advance(region, &mut state, &mut frames, acc.incumbent)
        };
        loop {
            acc.visited.extend(state.popped(region));
            match outcome {
                Advance::Completed => {
                    let cost = global_cost_from_parts(
                        state.mapping.local_cost_sum(),
                        state.mapping.len(),
                        self.query.node_count(),
                        self.params.lambda2,
                    )
                    .expect("a search always maps its start node");
                    debug!("mapping of {} pairs, global cost {cost}", state.mapping.len());
                    if cost <= acc.incumbent + COST_EPS {
                        acc.incumbent = acc.incumbent.min(cost);
                        acc.found.push(Match {
                            mapping: state.mapping.clone(),
                            global_cost: cost,
                            start,
                            explored: state.popped(region),
                        });
                    }
                    if acc.incumbent <= 0.0 {
                        return;
                    }
                }
                Advance::Pruned => trace!("pruned at {} pairs", state.mapping.len()),
            }

            // Resume at the deepest frame with an untried partner.
            let resumed = loop {
                let Some(frame) = frames.last_mut() else {
                    break false;
                };
                if frame.alternatives.is_empty() {
                    frames.pop();
                    continue;
                }
                if acc.backtracks >= self.params.max_backtracks {
                    acc.cap_hit = true;
                    debug!("backtrack cap of {} reached", self.params.max_backtracks);
                    return;
                }
                acc.backtracks += 1;
                let alt = frame.alternatives.remove(0);
                let u = frame.target;
                state = if frame.alternatives.is_empty() {
                    frames.pop().expect("frame exists").state
                } else {
                    frame.state.clone()
                };
                match alt {
                    Alternative::Pair(w, c) => {
                        trace!("backtrack: {:?} -> {:?} (cost {c})", u, w);
                        self.pair_and_expand(region, &mut state, u, w, c);
                    }
                    Alternative::Decline => {
                        trace!("backtrack: leave {:?} unmapped", u);
                        state.flags[region.local[&u]] |= DECLINED;
                        self.expand(region, &mut state, u, EXPANDED_UNMAPPED);
                    }
                }
                if self.bound(&state.mapping) > acc.incumbent + COST_EPS {
                    trace!("pruned at {} pairs", state.mapping.len());
                    acc.visited.extend(state.popped(region));
                    continue;
                }
                break true;
            };
            if !resumed {
                return;
            }
            outcome = self.advance(region, &mut state, &mut frames, acc.incumbent);
        }
    }

    fn advance(
        &self,
        region: &Region,
        state: &mut SearchState,
        frames: &mut Vec<SearchFrame>,
        incumbent: f64,
    ) -> Advance {
        while let Some(u) = state.stack.pop() {
            let li = region.local[&u];
            if state.mapping.is_target_mapped(u) || state.flags[li] & DECLINED != 0 {
                continue;
            }
            state.flags[li] |= POPPED;
            let options = self.acceptable(u, &state.mapping);
            let Some(&(w, c)) = options.first() else {
                self.expand(region, state, u, EXPANDED_UNMAPPED);
                continue;
            };
            let mut alternatives: Vec<Alternative> = options[1..]
                .iter()
                .map(|&(w, c)| Alternative::Pair(w, c))
                .collect();
            if self.contested(region, state, u, &options) {
                alternatives.push(Alternative::Decline);
            }
            if !alternatives.is_empty() {
                trace!("frame at {:?}: {} alternatives", u, alternatives.len());
                frames.push(SearchFrame {
                    target: u,
                    alternatives,
                    state: state.clone(),
                });
            }
            self.pair_and_expand(region, state, u, w, c);
            if self.bound(&state.mapping) > incumbent + COST_EPS {
                return Advance::Pruned;
            }
        }
        Advance::Completed
    }
}

/// Convenience wrapper: build the candidate map, find start nodes and search.
pub fn match_graphs(
    target: &AttributedGraph,
    query: &AttributedGraph,
    params: &MatchParams,
) -> Result<MatchResult, MatchError> {
    Matcher::new(target, query, params)?.run()
}
