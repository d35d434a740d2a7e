#![allow(dead_code)]

use std::collections::BTreeSet;

use submatch::{AttributeMap, AttributedGraph, GraphBuilder, Match, NodeId};

/// Builds a graph from `(id, name)` nodes and `(from, to)` edges.
pub fn graph(directed: bool, nodes: &[(&str, &str)], edges: &[(&str, &str)]) -> AttributedGraph {
    let mut b = GraphBuilder::new(directed);
    for (id, name) in nodes {
        b.add_node(*id, named(name));
    }
    for (x, y) in edges {
        b.add_edge(*x, *y, AttributeMap::new());
    }
    b.build().unwrap()
}

pub fn named(name: &str) -> AttributeMap {
    let mut a = AttributeMap::new();
    a.insert("name".into(), name.into());
    a
}

pub fn id_pairs(t: &AttributedGraph, q: &AttributedGraph, m: &Match) -> BTreeSet<(NodeId, NodeId)> {
    m.mapping
        .pairs()
        .iter()
        .map(|p| (t.id(p.target).clone(), q.id(p.query).clone()))
        .collect()
}

pub fn pairs(list: &[(&str, &str)]) -> BTreeSet<(NodeId, NodeId)> {
    list.iter().map(|(a, b)| (NodeId::from(*a), NodeId::from(*b))).collect()
}
