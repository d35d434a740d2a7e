//! Attributed graph model.
//!
//! Graphs are built once through [`GraphBuilder`] and are immutable afterwards.
//! Internally every node gets a dense [`NodeIx`]; indices are assigned in
//! ascending [`NodeId`] order so that comparing indices is the same as comparing
//! ids. All traversal and distance queries work on the underlying undirected
//! structure, even for directed graphs; edge direction is only consulted when
//! edges are compared (see [`AttributedGraph::edge_between`]).

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::GraphError;

/// String-valued attributes, iterated in key order.
pub type AttributeMap = BTreeMap<String, String>;

/// Stable, user-facing node identifier.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(String);

impl NodeId {
    pub fn new(id: impl Into<String>) -> Self {
        NodeId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for NodeId {
    fn from(s: &str) -> Self {
        NodeId(s.to_owned())
    }
}

impl From<String> for NodeId {
    fn from(s: String) -> Self {
        NodeId(s)
    }
}

/// Dense index of a node inside one particular graph.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeIx(u32);

impl NodeIx {
    pub fn new(ix: usize) -> Self {
        NodeIx(ix as u32)
    }

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Degree and 2-hop neighborhood size of a node.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NeighborhoodStats {
    pub degree: usize,
    pub two_hop_count: usize,
}

/// How an edge between `a` and `b` is oriented, relative to the order the
/// endpoints were asked for in [`AttributedGraph::edge_between`].
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Orientation {
    Undirected,
    Forward,
    Backward,
    Both,
}

impl Orientation {
    pub fn label(self) -> &'static str {
        match self {
            Orientation::Undirected => "undirected",
            Orientation::Forward => "forward",
            Orientation::Backward => "backward",
            Orientation::Both => "both",
        }
    }
}

/// The connection between two nodes as seen from one of them.
///
/// For a directed pair connected both ways the forward edge's attributes are
/// reported.
#[derive(Copy, Clone, Debug)]
pub struct EdgeView<'g> {
    pub orientation: Orientation,
    pub attributes: &'g AttributeMap,
}

/// An edge record, as stored.
#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    pub source: NodeIx,
    pub target: NodeIx,
    pub attributes: AttributeMap,
}

#[derive(Clone, Debug)]
pub struct AttributedGraph {
    directed: bool,
    ids: Vec<NodeId>,
    lookup: HashMap<NodeId, NodeIx>,
    attrs: Vec<AttributeMap>,
    adjacency: Vec<Vec<NodeIx>>,
    two_hop: Vec<Vec<NodeIx>>,
    self_loop: Vec<bool>,
    edges: Vec<Edge>,
    edge_index: HashMap<(NodeIx, NodeIx), usize>,
}

impl PartialEq for AttributedGraph {
    fn eq(&self, other: &Self) -> bool {
        self.directed == other.directed
            && self.ids == other.ids
            && self.attrs == other.attrs
            && self.edges == other.edges
    }
}

impl AttributedGraph {
    pub fn builder(directed: bool) -> GraphBuilder {
        GraphBuilder::new(directed)
    }

    pub fn empty(directed: bool) -> Self {
        GraphBuilder::new(directed)
            .build()
            .expect("empty graph is always valid")
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn node_count(&self) -> usize {
        self.ids.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn node_indices(&self) -> impl Iterator<Item = NodeIx> + '_ {
        (0..self.ids.len()).map(NodeIx::new)
    }

    pub fn index_of(&self, id: &NodeId) -> Option<NodeIx> {
        self.lookup.get(id).copied()
    }

    pub fn require(&self, id: &NodeId) -> Result<NodeIx, GraphError> {
        self.index_of(id)
            .ok_or_else(|| GraphError::UnknownNode(id.to_string()))
    }

    pub fn id(&self, ix: NodeIx) -> &NodeId {
        &self.ids[ix.index()]
    }

    pub fn attributes(&self, ix: NodeIx) -> &AttributeMap {
        &self.attrs[ix.index()]
    }

    /// Edges sorted by (source, target) index.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn has_self_loop(&self, ix: NodeIx) -> bool {
        self.self_loop[ix.index()]
    }

    pub fn self_loop_count(&self) -> usize {
        self.self_loop.iter().filter(|&&b| b).count()
    }

    /// Distinct neighbors over the undirected structure, sorted, without the
    /// node itself.
    #[inline]
    pub fn neighbors_of(&self, ix: NodeIx) -> &[NodeIx] {
        &self.adjacency[ix.index()]
    }

    /// Neighbors of neighbors, sorted, without the node itself. Direct
    /// neighbors reachable in two hops are included.
    #[inline]
    pub fn two_hop_of(&self, ix: NodeIx) -> &[NodeIx] {
        &self.two_hop[ix.index()]
    }

    /// 2-hop set, optionally dropping direct neighbors.
    pub fn two_hop_filtered(
        &self,
        ix: NodeIx,
        exclude_direct: bool,
    ) -> impl Iterator<Item = NodeIx> + '_ {
        let direct = self.neighbors_of(ix);
        self.two_hop_of(ix)
            .iter()
            .copied()
            .filter(move |m| !exclude_direct || direct.binary_search(m).is_err())
    }

    pub fn two_hop_count(&self, ix: NodeIx, exclude_direct: bool) -> usize {
        if exclude_direct {
            self.two_hop_filtered(ix, true).count()
        } else {
            self.two_hop_of(ix).len()
        }
    }

    /// Number of distinct neighbors, plus one for a self-loop.
    #[inline]
    pub fn degree(&self, ix: NodeIx) -> usize {
        self.adjacency[ix.index()].len() + usize::from(self.self_loop[ix.index()])
    }

    pub fn stats(&self, ix: NodeIx) -> NeighborhoodStats {
        NeighborhoodStats {
            degree: self.degree(ix),
            two_hop_count: self.two_hop_of(ix).len(),
        }
    }

    pub fn is_adjacent(&self, a: NodeIx, b: NodeIx) -> bool {
        self.neighbors_of(a).binary_search(&b).is_ok()
    }

    /// The edge joining `a` and `b`, if any. Self-loops are not reported.
    pub fn edge_between(&self, a: NodeIx, b: NodeIx) -> Option<EdgeView<'_>> {
        if a == b {
            return None;
        }
        if !self.directed {
            let key = if a < b { (a, b) } else { (b, a) };
            return self.edge_index.get(&key).map(|&i| EdgeView {
                orientation: Orientation::Undirected,
                attributes: &self.edges[i].attributes,
            });
        }
        let fwd = self.edge_index.get(&(a, b));
        let bwd = self.edge_index.get(&(b, a));
        match (fwd, bwd) {
            (Some(&i), Some(_)) => Some(EdgeView {
                orientation: Orientation::Both,
                attributes: &self.edges[i].attributes,
            }),
            (Some(&i), None) => Some(EdgeView {
                orientation: Orientation::Forward,
                attributes: &self.edges[i].attributes,
            }),
            (None, Some(&i)) => Some(EdgeView {
                orientation: Orientation::Backward,
                attributes: &self.edges[i].attributes,
            }),
            (None, None) => None,
        }
    }

    /// Hop distances from `start` over the undirected structure, stopping at
    /// `limit` hops. Unreachable nodes are absent from the result.
    pub fn bfs_distances(&self, start: NodeIx, limit: Option<usize>) -> HashMap<NodeIx, usize> {
        let mut dist = HashMap::new();
        dist.insert(start, 0);
        let mut queue = VecDeque::from([start]);
        while let Some(n) = queue.pop_front() {
            let d = dist[&n];
            if limit.is_some_and(|l| d >= l) {
                continue;
            }
            for &m in self.neighbors_of(n) {
                if let std::collections::hash_map::Entry::Vacant(e) = dist.entry(m) {
                    e.insert(d + 1);
                    queue.push_back(m);
                }
            }
        }
        dist
    }

    /// Largest hop distance from `start` to any reachable node.
    pub fn eccentricity(&self, start: NodeIx) -> usize {
        self.bfs_distances(start, None)
            .values()
            .copied()
            .max()
            .unwrap_or(0)
    }

    /// Node sets of the connected components, largest first; ties broken by
    /// smallest member.
    pub fn connected_components(&self) -> Vec<Vec<NodeIx>> {
        let mut seen = vec![false; self.node_count()];
        let mut comps = Vec::new();
        for s in self.node_indices() {
            if seen[s.index()] {
                continue;
            }
            seen[s.index()] = true;
            let mut comp = vec![s];
            let mut queue = VecDeque::from([s]);
            while let Some(n) = queue.pop_front() {
                for &m in self.neighbors_of(n) {
                    if !seen[m.index()] {
                        seen[m.index()] = true;
                        comp.push(m);
                        queue.push_back(m);
                    }
                }
            }
            comp.sort_unstable();
            comps.push(comp);
        }
        comps.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a[0].cmp(&b[0])));
        comps
    }

    pub fn is_connected(&self) -> bool {
        self.connected_components().len() <= 1
    }

    // Id-based queries.

    pub fn neighbors(&self, id: &NodeId) -> Result<BTreeSet<NodeId>, GraphError> {
        let ix = self.require(id)?;
        Ok(self.ids_of(self.neighbors_of(ix).iter().copied()))
    }

    pub fn two_hop_neighbors(&self, id: &NodeId) -> Result<BTreeSet<NodeId>, GraphError> {
        let ix = self.require(id)?;
        Ok(self.ids_of(self.two_hop_of(ix).iter().copied()))
    }

    pub fn eccentricity_from(&self, id: &NodeId) -> Result<usize, GraphError> {
        Ok(self.eccentricity(self.require(id)?))
    }

    /// Subgraph on `nodes` containing every edge with both endpoints inside.
    pub fn induced_subgraph(&self, nodes: &BTreeSet<NodeId>) -> Result<AttributedGraph, GraphError> {
        let keep = nodes
            .iter()
            .map(|id| self.require(id))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(self.induced_by_index(&keep))
    }

    /// Same as [`induced_subgraph`](Self::induced_subgraph) with node indices.
    pub fn induced_by_index(&self, keep: &[NodeIx]) -> AttributedGraph {
        let mut inside = vec![false; self.node_count()];
        for &k in keep {
            inside[k.index()] = true;
        }
        let mut b = GraphBuilder::new(self.directed);
        for ix in self.node_indices().filter(|ix| inside[ix.index()]) {
            b.add_node(self.id(ix).clone(), self.attributes(ix).clone());
        }
        for e in &self.edges {
            if inside[e.source.index()] && inside[e.target.index()] {
                b.add_edge(
                    self.id(e.source).clone(),
                    self.id(e.target).clone(),
                    e.attributes.clone(),
                );
            }
        }
        b.build().expect("induced subgraph of a valid graph is valid")
    }

    fn ids_of(&self, it: impl Iterator<Item = NodeIx>) -> BTreeSet<NodeId> {
        it.map(|ix| self.id(ix).clone()).collect()
    }
}

/// Accumulates nodes and edges, then validates them in [`build`](Self::build).
#[derive(Clone, Debug, Default)]
pub struct GraphBuilder {
    directed: bool,
    nodes: Vec<(NodeId, AttributeMap)>,
    edges: Vec<(NodeId, NodeId, AttributeMap)>,
}

impl GraphBuilder {
    pub fn new(directed: bool) -> Self {
        GraphBuilder {
            directed,
            ..Default::default()
        }
    }

    pub fn add_node(&mut self, id: impl Into<NodeId>, attributes: AttributeMap) -> &mut Self {
        self.nodes.push((id.into(), attributes));
        self
    }

    pub fn add_edge(
        &mut self,
        source: impl Into<NodeId>,
        target: impl Into<NodeId>,
        attributes: AttributeMap,
    ) -> &mut Self {
        self.edges.push((source.into(), target.into(), attributes));
        self
    }

    pub fn build(self) -> Result<AttributedGraph, GraphError> {
        let GraphBuilder {
            directed,
            mut nodes,
            edges,
        } = self;

        let mut first_seen: HashMap<&NodeId, usize> = HashMap::with_capacity(nodes.len());
        for (i, (id, _)) in nodes.iter().enumerate() {
            if first_seen.insert(id, i).is_some() {
                return Err(GraphError::DuplicateNode {
                    id: id.to_string(),
                    index: i,
                });
            }
        }
        drop(first_seen);

        nodes.sort_by(|a, b| a.0.cmp(&b.0));
        let n = nodes.len();
        let mut ids = Vec::with_capacity(n);
        let mut attrs = Vec::with_capacity(n);
        let mut lookup = HashMap::with_capacity(n);
        for (i, (id, a)) in nodes.into_iter().enumerate() {
            lookup.insert(id.clone(), NodeIx::new(i));
            ids.push(id);
            attrs.push(a);
        }

        let mut self_loop = vec![false; n];
        let mut adjacency: Vec<Vec<NodeIx>> = vec![Vec::new(); n];
        let mut stored: Vec<Edge> = Vec::with_capacity(edges.len());
        let mut edge_index = HashMap::with_capacity(edges.len());
        for (i, (s, t, a)) in edges.into_iter().enumerate() {
            let si = *lookup.get(&s).ok_or_else(|| GraphError::DanglingEndpoint {
                edge_index: i,
                endpoint: s.to_string(),
            })?;
            let ti = *lookup.get(&t).ok_or_else(|| GraphError::DanglingEndpoint {
                edge_index: i,
                endpoint: t.to_string(),
            })?;
            let key = if directed || si <= ti { (si, ti) } else { (ti, si) };
            if edge_index.contains_key(&key) {
                return Err(GraphError::DuplicateEdge {
                    edge_index: i,
                    from: s.to_string(),
                    to: t.to_string(),
                });
            }
            edge_index.insert(key, usize::MAX);
            if si == ti {
                self_loop[si.index()] = true;
            } else {
                adjacency[si.index()].push(ti);
                adjacency[ti.index()].push(si);
            }
            stored.push(Edge {
                source: key.0,
                target: key.1,
                attributes: a,
            });
        }
        stored.sort_by_key(|e| (e.source, e.target));
        for (i, e) in stored.iter().enumerate() {
            edge_index.insert((e.source, e.target), i);
        }
        for list in &mut adjacency {
            list.sort_unstable();
            list.dedup();
        }

        let mut two_hop = Vec::with_capacity(n);
        for (ix, direct) in adjacency.iter().enumerate() {
            let me = NodeIx::new(ix);
            let mut set: Vec<NodeIx> = direct
                .iter()
                .flat_map(|m| adjacency[m.index()].iter().copied())
                .filter(|&x| x != me)
                .collect();
            set.sort_unstable();
            set.dedup();
            two_hop.push(set);
        }

        Ok(AttributedGraph {
            directed,
            ids,
            lookup,
            attrs,
            adjacency,
            two_hop,
            self_loop,
            edges: stored,
            edge_index,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn id(s: &str) -> NodeId {
        NodeId::from(s)
    }

    fn set(ids: &[&str]) -> BTreeSet<NodeId> {
        ids.iter().map(|s| id(s)).collect()
    }

    pub(crate) fn undirected(nodes: &[&str], edges: &[(&str, &str)]) -> AttributedGraph {
        let mut b = GraphBuilder::new(false);
        for n in nodes {
            b.add_node(*n, AttributeMap::new());
        }
        for (s, t) in edges {
            b.add_edge(*s, *t, AttributeMap::new());
        }
        b.build().unwrap()
    }

    fn triangle() -> AttributedGraph {
        undirected(&["a", "b", "c"], &[("a", "b"), ("b", "c"), ("a", "c")])
    }

    fn star() -> AttributedGraph {
        undirected(
            &["s", "l1", "l2", "l3", "l4"],
            &[("s", "l1"), ("s", "l2"), ("s", "l3"), ("s", "l4")],
        )
    }

    fn path(n: usize) -> AttributedGraph {
        let names: Vec<String> = (0..n).map(|i| format!("p{i}")).collect();
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        let edges: Vec<(&str, &str)> = refs.windows(2).map(|w| (w[0], w[1])).collect();
        undirected(&refs, &edges)
    }

    #[test]
    fn neighbors_examples() {
        assert_eq!(triangle().neighbors(&id("a")).unwrap(), set(&["b", "c"]));
        let g = undirected(&["x", "y"], &[]);
        assert!(g.neighbors(&id("x")).unwrap().is_empty());
        let p = undirected(&["a", "b", "c"], &[("a", "b"), ("b", "c")]);
        assert_eq!(p.neighbors(&id("b")).unwrap(), set(&["a", "c"]));
    }

    #[test]
    fn unknown_node_is_lookup_error() {
        let g = triangle();
        assert!(matches!(g.neighbors(&id("zz")), Err(GraphError::UnknownNode(_))));
        assert!(g.two_hop_neighbors(&id("zz")).is_err());
        assert!(g.eccentricity_from(&id("zz")).is_err());
        assert!(g.induced_subgraph(&set(&["a", "zz"])).is_err());
    }

    #[test]
    fn two_hop_examples() {
        let p = undirected(&["a", "b", "c", "d"], &[("a", "b"), ("b", "c"), ("c", "d")]);
        assert_eq!(p.two_hop_neighbors(&id("a")).unwrap(), set(&["c"]));
        assert_eq!(triangle().two_hop_neighbors(&id("a")).unwrap(), set(&["b", "c"]));
        assert_eq!(star().two_hop_neighbors(&id("l1")).unwrap(), set(&["l2", "l3", "l4"]));
    }

    #[test]
    fn two_hop_can_drop_direct_neighbors() {
        let g = triangle();
        let a = g.index_of(&id("a")).unwrap();
        assert_eq!(g.two_hop_count(a, false), 2);
        assert_eq!(g.two_hop_count(a, true), 0);
    }

    #[test]
    fn eccentricity_examples() {
        let p = path(5);
        assert_eq!(p.eccentricity_from(&id("p0")).unwrap(), 4);
        let k4 = undirected(
            &["a", "b", "c", "d"],
            &[("a", "b"), ("a", "c"), ("a", "d"), ("b", "c"), ("b", "d"), ("c", "d")],
        );
        for n in ["a", "b", "c", "d"] {
            assert_eq!(k4.eccentricity_from(&id(n)).unwrap(), 1);
        }
        let s = star();
        assert_eq!(s.eccentricity_from(&id("s")).unwrap(), 1);
        assert_eq!(s.eccentricity_from(&id("l3")).unwrap(), 2);
    }

    #[test]
    fn eccentricity_ignores_edge_direction() {
        let mut b = GraphBuilder::new(true);
        for n in ["a", "b", "c"] {
            b.add_node(n, AttributeMap::new());
        }
        b.add_edge("b", "a", AttributeMap::new());
        b.add_edge("c", "b", AttributeMap::new());
        let g = b.build().unwrap();
        assert_eq!(g.eccentricity_from(&id("a")).unwrap(), 2);
    }

    #[test]
    fn induced_subgraph_examples() {
        let k3 = triangle();
        let sub = k3.induced_subgraph(&set(&["a", "b"])).unwrap();
        assert_eq!(sub.node_count(), 2);
        assert_eq!(sub.edge_count(), 1);

        let empty = k3.induced_subgraph(&BTreeSet::new()).unwrap();
        assert!(empty.is_empty());
        assert_eq!(empty.edge_count(), 0);

        let names = ["c0", "c1", "c2", "c3", "c4", "c5"];
        let edges: Vec<(&str, &str)> = (0..6).map(|i| (names[i], names[(i + 1) % 6])).collect();
        let cycle = undirected(&names, &edges);
        let alt = cycle.induced_subgraph(&set(&["c0", "c2", "c4"])).unwrap();
        assert_eq!(alt.node_count(), 3);
        assert_eq!(alt.edge_count(), 0);

        assert_eq!(k3.induced_subgraph(&set(&["a", "b", "c"])).unwrap(), k3);
    }

    #[test]
    fn rejects_duplicates_and_dangling() {
        let mut b = GraphBuilder::new(false);
        b.add_node("a", AttributeMap::new()).add_node("a", AttributeMap::new());
        assert!(matches!(b.build(), Err(GraphError::DuplicateNode { ref id, index: 1 }) if id == "a"));

        let mut b = GraphBuilder::new(false);
        b.add_node("a", AttributeMap::new());
        b.add_edge("a", "q", AttributeMap::new());
        assert!(matches!(b.build(), Err(GraphError::DanglingEndpoint { edge_index: 0, .. })));

        let mut b = GraphBuilder::new(false);
        b.add_node("a", AttributeMap::new()).add_node("b", AttributeMap::new());
        b.add_edge("a", "b", AttributeMap::new());
        b.add_edge("b", "a", AttributeMap::new());
        assert!(matches!(b.build(), Err(GraphError::DuplicateEdge { edge_index: 1, .. })));

        // Opposite directions are two distinct edges in a directed graph.
        let mut b = GraphBuilder::new(true);
        b.add_node("a", AttributeMap::new()).add_node("b", AttributeMap::new());
        b.add_edge("a", "b", AttributeMap::new());
        b.add_edge("b", "a", AttributeMap::new());
        let g = b.build().unwrap();
        assert_eq!(g.edge_count(), 2);
        let (a, bb) = (g.index_of(&id("a")).unwrap(), g.index_of(&id("b")).unwrap());
        assert_eq!(g.degree(a), 1);
        assert_eq!(g.edge_between(a, bb).unwrap().orientation, Orientation::Both);
    }

    #[test]
    fn self_loop_counts_toward_degree_only() {
        let mut b = GraphBuilder::new(false);
        b.add_node("a", AttributeMap::new()).add_node("b", AttributeMap::new());
        b.add_edge("a", "a", AttributeMap::new());
        b.add_edge("a", "b", AttributeMap::new());
        let g = b.build().unwrap();
        let a = g.index_of(&id("a")).unwrap();
        assert!(g.has_self_loop(a));
        assert_eq!(g.degree(a), 2);
        assert_eq!(g.neighbors(&id("a")).unwrap(), set(&["b"]));
        assert!(g.edge_between(a, a).is_none());
        assert!(!g.two_hop_neighbors(&id("a")).unwrap().contains(&id("a")));
    }

    #[test]
    fn directed_orientation_is_relative_to_query_order() {
        let mut b = GraphBuilder::new(true);
        b.add_node("a", AttributeMap::new()).add_node("b", AttributeMap::new());
        b.add_edge("a", "b", AttributeMap::new());
        let g = b.build().unwrap();
        let (a, bb) = (g.index_of(&id("a")).unwrap(), g.index_of(&id("b")).unwrap());
        assert_eq!(g.edge_between(a, bb).unwrap().orientation, Orientation::Forward);
        assert_eq!(g.edge_between(bb, a).unwrap().orientation, Orientation::Backward);
    }

    #[test]
    fn indices_follow_id_order() {
        let g = undirected(&["z", "m", "a"], &[]);
        let order: Vec<&str> = g.node_indices().map(|ix| g.id(ix).as_str()).collect();
        assert_eq!(order, ["a", "m", "z"]);
    }
}
