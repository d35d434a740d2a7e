use std::collections::{BTreeSet, HashMap};

use crate::graph::NodeIx;

/// One target/query pairing and the local cost it had when it was made.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct Pair {
    pub target: NodeIx,
    pub query: NodeIx,
    pub local_cost: f64,
}

/// Partial injective map from target nodes to query nodes, in pairing order.
#[derive(Clone, Debug)]
pub struct Mapping {
    pairs: Vec<Pair>,
    forward: HashMap<NodeIx, NodeIx>,
    backward: Vec<Option<NodeIx>>,
    cost_sum: f64,
}

impl PartialEq for Mapping {
    fn eq(&self, other: &Self) -> bool {
        self.pairs == other.pairs && self.backward.len() == other.backward.len()
    }
}

impl Mapping {
    /// Empty mapping into a query graph of `query_len` nodes.
    pub fn new(query_len: usize) -> Self {
        Mapping {
            pairs: Vec::new(),
            forward: HashMap::new(),
            backward: vec![None; query_len],
            cost_sum: 0.0,
        }
    }

    /// Adds a pair. Returns `false`, leaving the mapping untouched, when either
    /// node is already mapped.
    pub fn insert(&mut self, pair: Pair) -> bool {
        if self.forward.contains_key(&pair.target) || self.backward[pair.query.index()].is_some() {
            return false;
        }
        self.forward.insert(pair.target, pair.query);
        self.backward[pair.query.index()] = Some(pair.target);
        self.cost_sum += pair.local_cost;
        self.pairs.push(pair);
        true
    }

    pub fn pairs(&self) -> &[Pair] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Size of the query graph this mapping points into.
    pub fn query_len(&self) -> usize {
        self.backward.len()
    }

    #[inline]
    pub fn image(&self, u: NodeIx) -> Option<NodeIx> {
        self.forward.get(&u).copied()
    }

    #[inline]
    pub fn preimage(&self, w: NodeIx) -> Option<NodeIx> {
        self.backward[w.index()]
    }

    #[inline]
    pub fn is_target_mapped(&self, u: NodeIx) -> bool {
        self.forward.contains_key(&u)
    }

    #[inline]
    pub fn is_query_mapped(&self, w: NodeIx) -> bool {
        self.backward[w.index()].is_some()
    }

    pub fn local_cost_sum(&self) -> f64 {
        self.cost_sum
    }

    /// Pairs as an unordered set, for deduplication.
    pub fn pair_set(&self) -> BTreeSet<(NodeIx, NodeIx)> {
        self.pairs.iter().map(|p| (p.target, p.query)).collect()
    }

    pub fn unmapped_query(&self) -> impl Iterator<Item = NodeIx> + '_ {
        self.backward
            .iter()
            .enumerate()
            .filter(|(_, t)| t.is_none())
            .map(|(i, _)| NodeIx::new(i))
    }
}
