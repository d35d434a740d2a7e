mod common;

use std::collections::HashSet;

use common::{graph, id_pairs, pairs};
use proptest::prelude::*;
use submatch::{match_graphs, AttributeMap, GraphBuilder, MatchError, MatchParams, Matcher, NodeIx};

#[test]
fn path_inside_larger_graph() {
    let t = graph(
        false,
        &[("t0", "ann"), ("t1", "bob"), ("t2", "cid"), ("t3", "dee"), ("t4", "eve"), ("t5", "fay")],
        &[("t0", "t1"), ("t1", "t2"), ("t2", "t3"), ("t3", "t4"), ("t4", "t5"), ("t1", "t4")],
    );
    let q = graph(false, &[("q0", "cid"), ("q1", "dee"), ("q2", "eve")], &[("q0", "q1"), ("q1", "q2")]);
    let r = match_graphs(&t, &q, &MatchParams::exact()).unwrap();
    let best = r.best().unwrap();
    assert_eq!(best.global_cost, 0.0);
    assert_eq!(id_pairs(&t, &q, best), pairs(&[("t2", "q0"), ("t3", "q1"), ("t4", "q2")]));
}

#[test]
fn twin_copies_give_two_mappings() {
    // Two copies of a-b-c joined through a long bridge of other names.
    let t = graph(
        false,
        &[
            ("a1", "a"), ("b1", "b"), ("c1", "c"),
            ("a2", "a"), ("b2", "b"), ("c2", "c"),
            ("x1", "p"), ("x2", "q"), ("x3", "r"), ("x4", "s"),
        ],
        &[
            ("a1", "b1"), ("b1", "c1"),
            ("a2", "b2"), ("b2", "c2"),
            ("c1", "x1"), ("x1", "x2"), ("x2", "x3"), ("x3", "x4"), ("x4", "a2"),
        ],
    );
    let q = graph(false, &[("qa", "a"), ("qb", "b"), ("qc", "c")], &[("qa", "qb"), ("qb", "qc")]);
    let r = match_graphs(&t, &q, &MatchParams::exact()).unwrap();
    let zero: Vec<_> = r.matches.iter().filter(|m| m.global_cost == 0.0).collect();
    assert_eq!(zero.len(), 2);
    let found: HashSet<_> = zero.iter().map(|m| id_pairs(&t, &q, m)).collect();
    assert!(found.contains(&pairs(&[("a1", "qa"), ("b1", "qb"), ("c1", "qc")])));
    assert!(found.contains(&pairs(&[("a2", "qa"), ("b2", "qb"), ("c2", "qc")])));
}

#[test]
fn decoy_twin_is_declined() {
    // t1 and t2 both look like x; only t2 continues to b. t1 is reached first.
    let t = graph(
        false,
        &[("t0", "alpha"), ("t1", "xenon"), ("t2", "xenon"), ("t3", "bravo")],
        &[("t0", "t1"), ("t0", "t2"), ("t2", "t3")],
    );
    let q = graph(false, &[("qa", "alpha"), ("qx", "xenon"), ("qb", "bravo")], &[("qa", "qx"), ("qx", "qb")]);
    let r = match_graphs(&t, &q, &MatchParams::default()).unwrap();
    let best = r.best().unwrap();
    assert_eq!(best.global_cost, 0.0);
    assert_eq!(id_pairs(&t, &q, best), pairs(&[("t0", "qa"), ("t2", "qx"), ("t3", "qb")]));
}

#[test]
fn extra_query_node_is_left_unmapped() {
    let t = graph(
        false,
        &[("t0", "ann"), ("t1", "bob"), ("t2", "cid"), ("t3", "dee")],
        &[("t0", "t1"), ("t1", "t2"), ("t2", "t3")],
    );
    let q = graph(
        false,
        &[("q0", "ann"), ("q1", "bob"), ("q2", "cid"), ("q3", "dee"), ("q4", "zed")],
        &[("q0", "q1"), ("q1", "q2"), ("q2", "q3"), ("q3", "q4")],
    );
    let params = MatchParams {
        strict_local_check: false,
        ..MatchParams::default()
    };
    let r = match_graphs(&t, &q, &params).unwrap();
    let best = r.best().unwrap();
    assert_eq!(best.mapping.len(), 4);
    assert!(best.global_cost > 0.0);
    assert!(best.global_cost < 0.5);
}

#[test]
fn visited_starts_are_skipped() {
    let names = ["a", "b", "c", "d", "e", "f"];
    let nodes: Vec<(String, &str)> = names.iter().enumerate().map(|(i, n)| (format!("t{i}"), *n)).collect();
    let node_refs: Vec<(&str, &str)> = nodes.iter().map(|(i, n)| (i.as_str(), *n)).collect();
    let edges: Vec<(String, String)> = (0..5).map(|i| (format!("t{i}"), format!("t{}", i + 1))).collect();
    let edge_refs: Vec<(&str, &str)> = edges.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
    let t = graph(false, &node_refs, &edge_refs);
    let q = t.clone();
    let params = MatchParams::exact();
    let m = Matcher::new(&t, &q, &params).unwrap();
    let starts = m.start_nodes();
    let r = m.run().unwrap();
    assert_eq!(r.start_nodes_used.len(), 1);
    assert_eq!(r.start_nodes_used.len() + r.start_nodes_skipped.len(), starts.len());
    assert_eq!(r.best().unwrap().mapping.len(), 6);

    let all = MatchParams {
        skip_visited_starts: false,
        ..MatchParams::exact()
    };
    let r2 = match_graphs(&t, &q, &all).unwrap();
    assert_eq!(r2.start_nodes_used.len(), starts.len());
    assert_eq!(r2.matches.len(), 1);
}

#[test]
fn no_overlap_means_no_start_nodes() {
    let t = graph(false, &[("t0", "aaaa"), ("t1", "bbbb")], &[("t0", "t1")]);
    let q = graph(false, &[("q0", "0000"), ("q1", "1111")], &[("q0", "q1")]);
    assert!(matches!(
        match_graphs(&t, &q, &MatchParams::default()),
        Err(MatchError::NoStartNodes { k: 3 })
    ));
}

#[test]
fn flipped_edge_is_penalized_in_directed_graphs() {
    let t = graph(true, &[("t0", "ann"), ("t1", "bob"), ("t2", "cid")], &[("t0", "t1"), ("t2", "t1")]);
    let q = graph(true, &[("q0", "ann"), ("q1", "bob"), ("q2", "cid")], &[("q0", "q1"), ("q1", "q2")]);
    let r = match_graphs(&t, &q, &MatchParams::default()).unwrap();
    assert!(r.best().unwrap().global_cost > 0.0);
    let exact = match_graphs(&t, &q, &MatchParams::exact()).unwrap();
    assert!(exact.best().unwrap().mapping.len() < 3);
}

fn random_instance(
    nt: usize,
    nq: usize,
    tedges: &[(usize, usize)],
    qedges: &[(usize, usize)],
    labels: &[u8],
) -> (submatch::AttributedGraph, submatch::AttributedGraph) {
    let mk = |n: usize, edges: &[(usize, usize)], prefix: &str, off: usize| {
        let mut b = GraphBuilder::new(false);
        for i in 0..n {
            let mut a = AttributeMap::new();
            a.insert("name".into(), format!("lbl{}", labels[(i + off) % labels.len()]));
            b.add_node(format!("{prefix}{i}"), a);
        }
        let mut seen = HashSet::new();
        for &(x, y) in edges {
            let (x, y) = (x % n, y % n);
            if x != y && seen.insert((x.min(y), x.max(y))) {
                b.add_edge(format!("{prefix}{x}"), format!("{prefix}{y}"), AttributeMap::new());
            }
        }
        b.build().unwrap()
    };
    (mk(nt, tedges, "t", 0), mk(nq, qedges, "q", 3))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn returned_mappings_respect_search_invariants(
        nt in 3usize..14,
        nq in 2usize..6,
        tedges in prop::collection::vec((0usize..14, 0usize..14), 2..30),
        qedges in prop::collection::vec((0usize..6, 0usize..6), 1..8),
        labels in prop::collection::vec(0u8..4, 1..8),
        exact in any::<bool>(),
    ) {
        let (t, q) = random_instance(nt, nq, &tedges, &qedges, &labels);
        let params = if exact { MatchParams::exact() } else { MatchParams::default() };
        let Ok(r) = match_graphs(&t, &q, &params) else { return Ok(()) };
        let again = match_graphs(&t, &q, &params).unwrap();
        prop_assert_eq!(&r.matches, &again.matches);

        let model = submatch::CostModel::new(&t, &q, &params);
        for m in &r.matches {
            let mut ts = HashSet::new();
            let mut qs = HashSet::new();
            let pairs = m.mapping.pairs();
            prop_assert_eq!(pairs[0].target, m.start);
            let radius = q.eccentricity(pairs[0].query);
            let dist = t.bfs_distances(m.start, None);
            for (i, p) in pairs.iter().enumerate() {
                prop_assert!(ts.insert(p.target) && qs.insert(p.query), "not injective");
                prop_assert!(dist[&p.target] <= radius);
                prop_assert!(p.local_cost <= params.effective_threshold());
                if i > 0 {
                    let earlier: HashSet<NodeIx> = pairs[..i].iter().map(|p| p.query).collect();
                    prop_assert!(q.neighbors_of(p.query).iter().any(|x| earlier.contains(x)));
                }
            }
            let replayed = model.replay(pairs.iter().map(|p| (p.target, p.query)));
            for (a, b) in replayed.pairs().iter().zip(pairs) {
                prop_assert!((a.local_cost - b.local_cost).abs() < 1e-12);
            }
            prop_assert!((model.global_cost(&m.mapping).unwrap() - m.global_cost).abs() < 1e-12);
            prop_assert!((0.0..=1.0).contains(&m.global_cost));
        }
    }
}
