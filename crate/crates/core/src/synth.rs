//! Synthetic attributed graphs for tests, benchmarks and the noise harness.
//!
//! Both generators give every node a random string attribute that is unique
//! across the graph, so a planted copy of any region can be told apart from
//! the rest of the target by attributes alone.

use std::collections::HashSet;

use rand::distr::Alphanumeric;
use rand::seq::IndexedRandom;
use rand::Rng;

use crate::error::GraphError;
use crate::graph::{AttributeMap, AttributedGraph, GraphBuilder};

const RELATIONS: &[&str] = &["parent", "child", "spouse", "partner"];

pub fn random_string<R: Rng + ?Sized>(rng: &mut R, len: usize) -> String {
    rng.sample_iter(&Alphanumeric)
        .take(len)
        .map(char::from)
        .collect()
}

/// Draws random alphanumeric strings that never repeat.
#[derive(Debug, Default)]
pub struct UniqueStrings {
    seen: HashSet<String>,
}

impl UniqueStrings {
    pub fn draw<R: Rng + ?Sized>(&mut self, rng: &mut R, len: usize) -> String {
        loop {
            let s = random_string(rng, len);
            if self.seen.insert(s.clone()) {
                return s;
            }
        }
    }
}

fn node_id(prefix: &str, i: usize, n: usize) -> String {
    let width = n.saturating_sub(1).to_string().len();
    format!("{prefix}{i:0width$}")
}

fn unordered(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

/// A connected undirected graph with `n` nodes and `round(n * mean_degree / 2)`
/// edges (at least `n - 1`).
///
/// Nodes carry a unique `name` and `code`; edges carry a `rel` drawn from a
/// small vocabulary.
pub fn random_connected<R: Rng + ?Sized>(
    n: usize,
    mean_degree: f64,
    rng: &mut R,
) -> Result<AttributedGraph, GraphError> {
    let max_edges = n * n.saturating_sub(1) / 2;
    let wanted = ((n as f64 * mean_degree / 2.0).round() as usize)
        .max(n.saturating_sub(1))
        .min(max_edges);

    let mut names = UniqueStrings::default();
    let mut b = GraphBuilder::new(false);
    for i in 0..n {
        let mut a = AttributeMap::new();
        a.insert("name".into(), names.draw(rng, 10));
        a.insert("code".into(), names.draw(rng, 6));
        b.add_node(node_id("n", i, n), a);
    }

    let mut edges: HashSet<(usize, usize)> = HashSet::new();
    for i in 1..n {
        edges.insert(unordered(i, rng.random_range(0..i)));
    }
    while edges.len() < wanted {
        let x = rng.random_range(0..n);
        let y = rng.random_range(0..n);
        if x != y {
            edges.insert(unordered(x, y));
        }
    }
    let mut edges: Vec<_> = edges.into_iter().collect();
    edges.sort_unstable();
    for (x, y) in edges {
        let mut a = AttributeMap::new();
        a.insert("rel".into(), RELATIONS.choose(rng).unwrap().to_string());
        b.add_edge(node_id("n", x, n), node_id("n", y, n), a);
    }
    b.build()
}

#[derive(Clone, Copy)]
enum Jump {
    Fallthrough,
    Branch,
    Loop,
    Call,
}

impl Jump {
    fn label(self) -> &'static str {
        match self {
            Jump::Fallthrough => "fallthrough",
            Jump::Branch => "branch",
            Jump::Loop => "loop",
            Jump::Call => "call",
        }
    }
}

fn block_attributes<R: Rng + ?Sized>(rng: &mut R, sigs: &mut UniqueStrings) -> AttributeMap {
    let mut a = AttributeMap::new();
    a.insert("sig".into(), sigs.draw(rng, 12));
    a.insert("hash".into(), random_string(rng, 16));
    a.insert("sym".into(), random_string(rng, 8));
    a
}

/// A directed, connected graph shaped like a program's control flow: runs of
/// basic blocks grouped into functions, with fallthrough chains, forward
/// branches, loop back-edges and calls between functions.
///
/// Blocks carry a unique `sig`, a content `hash` and a symbol fragment `sym`;
/// edges carry a `jump` kind. `edges` must lie between `nodes - 1` and what
/// the function layout can hold.
pub fn cfg_like<R: Rng + ?Sized>(
    nodes: usize,
    edges: usize,
    rng: &mut R,
) -> Result<AttributedGraph, GraphError> {
    // Function boundaries: [start, end).
    let mut functions: Vec<(usize, usize)> = Vec::new();
    let mut at = 0;
    while at < nodes {
        let len = rng.random_range(3..=40).min(nodes - at);
        functions.push((at, at + len));
        at += len;
    }
    if functions.len() > 1 && functions.last().is_some_and(|&(s, e)| e - s < 3) {
        let (_, end) = functions.pop().unwrap();
        functions.last_mut().unwrap().1 = end;
    }

    let mut links: Vec<(usize, usize, Jump)> = Vec::new();
    let mut taken: HashSet<(usize, usize)> = HashSet::new();
    let mut link = |links: &mut Vec<(usize, usize, Jump)>, a: usize, b: usize, j: Jump| {
        if a != b && taken.insert(unordered(a, b)) {
            links.push((a, b, j));
            true
        } else {
            false
        }
    };

    for &(s, e) in &functions {
        for i in s..e - 1 {
            link(&mut links, i, i + 1, Jump::Fallthrough);
        }
    }
    for f in 1..functions.len() {
        let (cs, ce) = functions[rng.random_range(0..f)];
        link(&mut links, rng.random_range(cs..ce), functions[f].0, Jump::Call);
    }

    let mut stalls = 0;
    while links.len() < edges && stalls < 100_000 {
        let added = if rng.random_bool(0.08) && functions.len() > 1 {
            let (cs, ce) = *functions.choose(rng).unwrap();
            let callee = functions.choose(rng).unwrap().0;
            link(&mut links, rng.random_range(cs..ce), callee, Jump::Call)
        } else {
            let (s, e) = *functions.choose(rng).unwrap();
            let i = rng.random_range(s..e);
            let j = rng.random_range(s..e);
            let (lo, hi) = unordered(i, j);
            if rng.random_bool(0.75) {
                link(&mut links, lo, hi, Jump::Branch)
            } else {
                link(&mut links, hi, lo, Jump::Loop)
            }
        };
        stalls = if added { 0 } else { stalls + 1 };
    }

    let mut sigs = UniqueStrings::default();
    let mut b = GraphBuilder::new(true);
    for i in 0..nodes {
        b.add_node(node_id("bb", i, nodes), block_attributes(rng, &mut sigs));
    }
    for (x, y, j) in links {
        let mut a = AttributeMap::new();
        a.insert("jump".into(), j.label().to_string());
        b.add_edge(node_id("bb", x, nodes), node_id("bb", y, nodes), a);
    }
    b.build()
}
