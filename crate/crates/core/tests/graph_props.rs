use std::collections::{BTreeSet, VecDeque};

use proptest::prelude::*;
use submatch::{AttributeMap, AttributedGraph, GraphBuilder, GraphError, NodeId, NodeIx};

fn build(n: usize, directed: bool, edges: &[(usize, usize)]) -> AttributedGraph {
    let mut b = GraphBuilder::new(directed);
    for i in 0..n {
        let mut a = AttributeMap::new();
        a.insert("name".into(), format!("v{i}"));
        b.add_node(format!("n{i:02}"), a);
    }
    let mut seen = BTreeSet::new();
    for &(x, y) in edges {
        let key = if directed { (x, y) } else { (x.min(y), x.max(y)) };
        if seen.insert(key) {
            b.add_edge(format!("n{x:02}"), format!("n{y:02}"), AttributeMap::new());
        }
    }
    b.build().unwrap()
}

fn arb_graph(max_nodes: usize) -> impl Strategy<Value = (usize, bool, Vec<(usize, usize)>)> {
    (1..=max_nodes, any::<bool>()).prop_flat_map(|(n, directed)| {
        (
            Just(n),
            Just(directed),
            prop::collection::vec((0..n, 0..n), 0..n * 3),
        )
    })
}

/// Plain adjacency-list BFS, independent of the graph's own traversal.
fn oracle_eccentricity(n: usize, edges: &[(usize, usize)], start: usize) -> usize {
    let mut adj = vec![Vec::new(); n];
    for &(x, y) in edges {
        if x != y {
            adj[x].push(y);
            adj[y].push(x);
        }
    }
    let mut dist = vec![usize::MAX; n];
    dist[start] = 0;
    let mut queue = VecDeque::from([start]);
    while let Some(x) = queue.pop_front() {
        for &y in &adj[x] {
            if dist[y] == usize::MAX {
                dist[y] = dist[x] + 1;
                queue.push_back(y);
            }
        }
    }
    dist.into_iter().filter(|&d| d != usize::MAX).max().unwrap_or(0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn eccentricity_matches_bfs_oracle((n, directed, edges) in arb_graph(50)) {
        let g = build(n, directed, &edges);
        for i in 0..n {
            let id = NodeId::new(format!("n{i:02}"));
            prop_assert_eq!(g.eccentricity_from(&id).unwrap(), oracle_eccentricity(n, &edges, i));
        }
    }

    #[test]
    fn two_hop_set_never_contains_the_node((n, directed, edges) in arb_graph(30)) {
        let g = build(n, directed, &edges);
        for u in g.node_indices() {
            let id = g.id(u).clone();
            prop_assert!(!g.two_hop_neighbors(&id).unwrap().contains(&id));
            prop_assert!(!g.two_hop_of(u).contains(&u));
        }
    }

    #[test]
    fn undirected_neighbors_are_symmetric((n, _d, edges) in arb_graph(30)) {
        let g = build(n, false, &edges);
        for a in g.node_indices() {
            for &b in g.neighbors_of(a) {
                prop_assert!(g.neighbors_of(b).contains(&a));
            }
        }
    }

    #[test]
    fn induced_subgraph_has_no_more_edges(
        (n, directed, edges) in arb_graph(30),
        keep in prop::collection::vec(any::<bool>(), 30),
    ) {
        let g = build(n, directed, &edges);
        let ns: BTreeSet<NodeId> = g
            .node_indices()
            .filter(|u| keep[u.index()])
            .map(|u| g.id(u).clone())
            .collect();
        let sub = g.induced_subgraph(&ns).unwrap();
        prop_assert!(sub.edge_count() <= g.edge_count());
        prop_assert_eq!(sub.node_count(), ns.len());

        let all: BTreeSet<NodeId> = g.node_indices().map(|u| g.id(u).clone()).collect();
        prop_assert_eq!(g.induced_subgraph(&all).unwrap(), g);
    }
}

#[test]
fn duplicate_undirected_edge_is_rejected() {
    let mut b = GraphBuilder::new(false);
    b.add_node("a", AttributeMap::new());
    b.add_node("b", AttributeMap::new());
    b.add_edge("a", "b", AttributeMap::new());
    b.add_edge("b", "a", AttributeMap::new());
    assert!(matches!(b.build(), Err(GraphError::DuplicateEdge { .. })));
}

#[test]
fn triangle_neighbors_are_also_two_hop() {
    let g = build(3, false, &[(0, 1), (1, 2), (2, 0)]);
    let a = NodeIx::new(0);
    assert_eq!(g.two_hop_of(a).len(), 2);
    assert_eq!(g.two_hop_count(a, true), 0);
}

#[test]
fn self_loop_counts_toward_degree() {
    let g = build(2, false, &[(0, 0), (0, 1)]);
    assert!(g.has_self_loop(NodeIx::new(0)));
    assert_eq!(g.degree(NodeIx::new(0)), 2);
    assert_eq!(g.self_loop_count(), 1);
}
