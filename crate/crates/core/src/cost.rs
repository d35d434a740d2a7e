//! Pairing and mapping costs.
//!
//! A candidate pairing `(u, w)` of a target node with a query node is scored
//! against the current partial mapping:
//!
//! ```text
//! node_cost  = gamma   * D_V(u, w)  + (1 - gamma)   * L_V(u, w)
//! edge_cost  = sum over mapped u' of D_E((u, u'), (w, f(u'))) / N
//! local_cost = lambda1 * node_cost  + (1 - lambda1) * edge_cost
//! ```
//!
//! `D_V` is the attribute distance, `L_V` the look-ahead on unmapped
//! neighborhoods, and `N = max(1, |mapped target nodes other than u|)`. A
//! complete mapping is scored by
//!
//! ```text
//! global = lambda2 * mean(local costs) + (1 - lambda2) * (|V_Q| - |V_Q'|) / |V_Q|
//! ```
//!
//! Every cost lies in `[0, 1]`.

use crate::error::MatchError;
use crate::graph::{AttributedGraph, EdgeView, NodeIx};
use crate::mapping::{Mapping, Pair};
use crate::params::{EdgeCostSpec, EdgeSubstitution, MatchParams};
use crate::similarity::{jaro_winkler, AttributeComparator};

/// `h(x) = max(x, 0)`.
#[inline]
pub fn h(x: f64) -> f64 {
    if x >= 0.0 {
        x
    } else {
        0.0
    }
}

/// `weight * a + (1 - weight) * b`, kept inside `[0, 1]`.
#[inline]
pub fn blend(weight: f64, a: f64, b: f64) -> f64 {
    (weight * a + (1.0 - weight) * b).clamp(0.0, 1.0)
}

/// Share of query nodes left unmapped.
pub fn missing_node_penalty(query_len: usize, mapped: usize) -> f64 {
    if query_len == 0 {
        return 0.0;
    }
    (query_len - mapped.min(query_len)) as f64 / query_len as f64
}

/// Global cost from the sum of local costs and the mapping size.
pub fn global_cost_from_parts(
    local_cost_sum: f64,
    mapped: usize,
    query_len: usize,
    lambda2: f64,
) -> Result<f64, MatchError> {
    if mapped == 0 {
        return Err(MatchError::EmptyMapping);
    }
    let mean = local_cost_sum / mapped as f64;
    Ok(blend(lambda2, mean, missing_node_penalty(query_len, mapped)))
}

/// Edge comparison for a pair of node pairs, following the four existence
/// cases: both edges present, target only, query only, neither.
pub fn edge_distance(
    spec: &EdgeCostSpec,
    compare_orientation: bool,
    target_edge: Option<EdgeView<'_>>,
    query_edge: Option<EdgeView<'_>>,
) -> f64 {
    match (target_edge, query_edge) {
        (Some(te), Some(qe)) => substitution_cost(spec, compare_orientation, te, qe),
        (Some(_), None) => spec.deletion_cost,
        (None, Some(_)) => spec.addition_cost,
        (None, None) => 0.0,
    }
}

fn substitution_cost(
    spec: &EdgeCostSpec,
    compare_orientation: bool,
    te: EdgeView<'_>,
    qe: EdgeView<'_>,
) -> f64 {
    let orientation_differs = compare_orientation && te.orientation != qe.orientation;
    let shared = spec.attributes.shared(te.attributes, qe.attributes);
    match spec.substitution {
        EdgeSubstitution::Binary => {
            let mut differs = orientation_differs;
            for (_, a, b) in shared {
                differs |= a != b;
            }
            if differs {
                1.0
            } else {
                0.0
            }
        }
        EdgeSubstitution::Graded => {
            let mut total = 0.0;
            let mut n = 0usize;
            if compare_orientation {
                total += if orientation_differs { 1.0 } else { 0.0 };
                n += 1;
            }
            for (_, a, b) in shared {
                total += 1.0 - jaro_winkler(a, b).value();
                n += 1;
            }
            if n == 0 {
                0.0
            } else {
                total / n as f64
            }
        }
    }
}

/// Cost evaluation against one target/query pair of graphs.
#[derive(Clone, Debug)]
pub struct CostModel<'g> {
    target: &'g AttributedGraph,
    query: &'g AttributedGraph,
    params: &'g MatchParams,
    comparator: AttributeComparator,
    compare_orientation: bool,
}

impl<'g> CostModel<'g> {
    pub fn new(target: &'g AttributedGraph, query: &'g AttributedGraph, params: &'g MatchParams) -> Self {
        CostModel {
            target,
            query,
            params,
            comparator: params.comparator(),
            compare_orientation: target.is_directed() && query.is_directed(),
        }
    }

    pub fn params(&self) -> &MatchParams {
        self.params
    }

    /// Attribute distance `D_V`.
    pub fn attr_distance(&self, u: NodeIx, w: NodeIx) -> f64 {
        self.comparator
            .distance(self.target.attributes(u), self.query.attributes(w))
    }

    /// Look-ahead `L_V`: how many more unmapped neighbors and 2-hop neighbors
    /// `w` has than `u`, relative to the size of `w`'s neighborhoods.
    pub fn look_ahead(&self, u: NodeIx, w: NodeIx, state: &Mapping) -> f64 {
        let excl = self.params.two_hop_excludes_neighbors;
        let (t, q) = (self.target, self.query);

        let u1 = t.neighbors_of(u).iter().filter(|&&x| !state.is_target_mapped(x)).count();
        let w1 = q.neighbors_of(w).iter().filter(|&&x| !state.is_query_mapped(x)).count();
        let u2 = t.two_hop_filtered(u, excl).filter(|&x| !state.is_target_mapped(x)).count();
        let w2 = q.two_hop_filtered(w, excl).filter(|&x| !state.is_query_mapped(x)).count();

        let deg = q.degree(w);
        let deg2 = q.two_hop_count(w, excl);
        let first = if deg == 0 {
            0.0
        } else {
            0.5 * h(w1 as f64 - u1 as f64) / deg as f64
        };
        let second = if deg2 == 0 {
            0.0
        } else {
            0.5 * h(w2 as f64 - u2 as f64) / deg2 as f64
        };
        (first + second).clamp(0.0, 1.0)
    }

    pub fn node_cost(&self, u: NodeIx, w: NodeIx, state: &Mapping) -> f64 {
        self.node_cost_with(self.attr_distance(u, w), u, w, state)
    }

    /// Node cost with a precomputed attribute distance.
    pub fn node_cost_with(&self, attr_distance: f64, u: NodeIx, w: NodeIx, state: &Mapping) -> f64 {
        blend(self.params.gamma, attr_distance, self.look_ahead(u, w, state))
    }

    /// Mean edge disagreement between `u` and `w` over all mapped target
    /// nodes. Pairs with no edge on either side contribute 0, so only mapped
    /// neighbors on either side are visited.
    pub fn edge_cost(&self, u: NodeIx, w: NodeIx, state: &Mapping) -> f64 {
        let others = state.len() - usize::from(state.is_target_mapped(u));
        if others == 0 {
            return 0.0;
        }
        let spec = &self.params.edge_cost;
        let (t, q) = (self.target, self.query);
        let mut total = 0.0;
        for &u2 in t.neighbors_of(u) {
            if let Some(w2) = state.image(u2) {
                total += edge_distance(
                    spec,
                    self.compare_orientation,
                    t.edge_between(u, u2),
                    q.edge_between(w, w2),
                );
            }
        }
        for &w2 in q.neighbors_of(w) {
            if let Some(u2) = state.preimage(w2) {
                if u2 != u && !t.is_adjacent(u, u2) {
                    total += edge_distance(spec, self.compare_orientation, None, q.edge_between(w, w2));
                }
            }
        }
        (total / others as f64).clamp(0.0, 1.0)
    }

    pub fn local_cost(&self, u: NodeIx, w: NodeIx, state: &Mapping) -> f64 {
        self.local_cost_with(self.attr_distance(u, w), u, w, state)
    }

    /// Local cost with a precomputed attribute distance.
    pub fn local_cost_with(&self, attr_distance: f64, u: NodeIx, w: NodeIx, state: &Mapping) -> f64 {
        blend(
            self.params.lambda1,
            self.node_cost_with(attr_distance, u, w, state),
            self.edge_cost(u, w, state),
        )
    }

    pub fn global_cost(&self, m: &Mapping) -> Result<f64, MatchError> {
        global_cost(m, self.query, self.params)
    }

    /// Re-scores `order` pair by pair from an empty mapping. Pairs that would
    /// break injectivity are skipped.
    pub fn replay(&self, order: impl IntoIterator<Item = (NodeIx, NodeIx)>) -> Mapping {
        let mut m = Mapping::new(self.query.node_count());
        for (u, w) in order {
            if m.is_target_mapped(u) || m.is_query_mapped(w) {
                continue;
            }
            let c = self.local_cost(u, w, &m);
            m.insert(Pair {
                target: u,
                query: w,
                local_cost: c,
            });
        }
        m
    }
}

/// Global cost of a mapping, from its stored local costs.
pub fn global_cost(m: &Mapping, query: &AttributedGraph, params: &MatchParams) -> Result<f64, MatchError> {
    global_cost_from_parts(m.local_cost_sum(), m.len(), query.node_count(), params.lambda2)
}
