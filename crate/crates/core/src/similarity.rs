//! String similarity and attribute comparison.
//!
//! Everything is compared as strings. The node distance used by the cost
//! function is the mean of `1 - jaro_winkler` over the selected keys both nodes
//! carry; nodes sharing no selected key are maximally distant.

use std::cmp::{max, min};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::ParamError;
use crate::graph::{AttributeMap, AttributedGraph, NodeIx};
use crate::start_nodes::CandidateMap;

const PREFIX_SCALE: f64 = 0.1;
const MAX_PREFIX: usize = 4;
const BOOST_THRESHOLD: f64 = 0.7;

/// Similarity in `[0, 1]`; 1 means identical.
#[derive(Copy, Clone, Debug, PartialEq, PartialOrd)]
pub struct SimilarityScore(f64);

impl SimilarityScore {
    pub fn new(value: f64) -> Self {
        SimilarityScore(value.clamp(0.0, 1.0))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Which attribute keys take part in a comparison.
///
/// Serialized as the string `"all"` or as a list of keys.
#[derive(Clone, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(into = "SelectorRepr", try_from = "SelectorRepr")]
pub enum AttributeSelector {
    #[default]
    All,
    Keys(Vec<String>),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum SelectorRepr {
    Word(String),
    List(Vec<String>),
}

impl From<AttributeSelector> for SelectorRepr {
    fn from(s: AttributeSelector) -> Self {
        match s {
            AttributeSelector::All => SelectorRepr::Word("all".into()),
            AttributeSelector::Keys(k) => SelectorRepr::List(k),
        }
    }
}

impl TryFrom<SelectorRepr> for AttributeSelector {
    type Error = String;

    fn try_from(r: SelectorRepr) -> Result<Self, String> {
        match r {
            SelectorRepr::Word(w) if w == "all" => Ok(AttributeSelector::All),
            SelectorRepr::Word(w) => Err(format!("expected \"all\" or a list of keys, found \"{w}\"")),
            SelectorRepr::List(k) => AttributeSelector::keys(k).map_err(|e| e.to_string()),
        }
    }
}

impl AttributeSelector {
    pub fn keys<I, S>(keys: I) -> Result<Self, ParamError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let sel = AttributeSelector::Keys(keys.into_iter().map(Into::into).collect());
        sel.validate()?;
        Ok(sel)
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        if let AttributeSelector::Keys(keys) = self {
            if keys.is_empty() {
                return Err(ParamError::EmptySelector);
            }
            for (i, k) in keys.iter().enumerate() {
                if keys[..i].contains(k) {
                    return Err(ParamError::DuplicateSelectorKey(k.clone()));
                }
            }
        }
        Ok(())
    }

    /// `(key, value_a, value_b)` for every selected key present in both maps.
    pub fn shared<'m>(
        &'m self,
        a: &'m AttributeMap,
        b: &'m AttributeMap,
    ) -> Box<dyn Iterator<Item = (&'m str, &'m str, &'m str)> + 'm> {
        match self {
            AttributeSelector::All => Box::new(a.iter().filter_map(move |(k, va)| {
                b.get(k).map(|vb| (k.as_str(), va.as_str(), vb.as_str()))
            })),
            AttributeSelector::Keys(keys) => Box::new(keys.iter().filter_map(move |k| {
                Some((k.as_str(), a.get(k)?.as_str(), b.get(k)?.as_str()))
            })),
        }
    }

    fn selected<'m>(&'m self, a: &'m AttributeMap) -> Vec<(&'m str, &'m str)> {
        match self {
            AttributeSelector::All => a.iter().map(|(k, v)| (k.as_str(), v.as_str())).collect(),
            AttributeSelector::Keys(keys) => {
                let mut out: Vec<_> = keys
                    .iter()
                    .filter_map(|k| a.get(k).map(|v| (k.as_str(), v.as_str())))
                    .collect();
                out.sort_unstable_by(|x, y| x.0.cmp(y.0));
                out
            }
        }
    }
}

/// Jaro similarity over Unicode scalar values.
pub fn jaro(a: &str, b: &str) -> f64 {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    jaro_chars(&a, &b)
}

fn jaro_chars(a: &[char], b: &[char]) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 1.0;
    }
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    let window = (max(a.len(), b.len()) / 2).saturating_sub(1);
    let mut b_taken = vec![false; b.len()];
    let mut a_matched = Vec::with_capacity(min(a.len(), b.len()));
    for (i, &ca) in a.iter().enumerate() {
        let lo = i.saturating_sub(window);
        let hi = min(b.len(), i + window + 1);
        for j in lo..hi {
            if !b_taken[j] && b[j] == ca {
                b_taken[j] = true;
                a_matched.push(ca);
                break;
            }
        }
    }
    let m = a_matched.len();
    if m == 0 {
        return 0.0;
    }
    let out_of_order = b
        .iter()
        .zip(&b_taken)
        .filter(|(_, &t)| t)
        .zip(&a_matched)
        .filter(|((cb, _), ca)| *cb != *ca)
        .count();
    // Integer halving, as in the reference strcmp95 code.
    let t = (out_of_order / 2) as f64;
    let m = m as f64;
    (m / a.len() as f64 + m / b.len() as f64 + (m - t) / m) / 3.0
}

fn winkler(a: &[char], b: &[char]) -> f64 {
    let sim = jaro_chars(a, b);
    if sim <= BOOST_THRESHOLD {
        return sim;
    }
    let prefix = a
        .iter()
        .zip(b)
        .take(MAX_PREFIX)
        .take_while(|(x, y)| x == y)
        .count();
    sim + prefix as f64 * PREFIX_SCALE * (1.0 - sim)
}

/// Jaro-Winkler similarity with prefix scale 0.1 and a prefix of at most four
/// characters. The prefix bonus applies once the Jaro score exceeds 0.7.
pub fn jaro_winkler(a: &str, b: &str) -> SimilarityScore {
    if a == b {
        return SimilarityScore(1.0);
    }
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    SimilarityScore::new(winkler(&a, &b))
}

/// Attribute distance for the node term of the cost function: 0 means the
/// selected shared attributes are identical, 1 that nothing is comparable.
pub fn node_attr_distance(a: &AttributeMap, b: &AttributeMap, sel: &AttributeSelector) -> f64 {
    AttributeComparator::new(sel.clone(), false).distance(a, b)
}

/// Selector plus comparison options.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct AttributeComparator {
    pub selector: AttributeSelector,
    pub fold_case: bool,
}

impl AttributeComparator {
    pub fn new(selector: AttributeSelector, fold_case: bool) -> Self {
        AttributeComparator {
            selector,
            fold_case,
        }
    }

    fn similarity(&self, x: &str, y: &str) -> f64 {
        if self.fold_case {
            jaro_winkler(&x.to_lowercase(), &y.to_lowercase()).value()
        } else {
            jaro_winkler(x, y).value()
        }
    }

    pub fn distance(&self, a: &AttributeMap, b: &AttributeMap) -> f64 {
        let mut total = 0.0;
        let mut n = 0usize;
        for (_, va, vb) in self.selector.shared(a, b) {
            total += 1.0 - self.similarity(va, vb);
            n += 1;
        }
        if n == 0 {
            1.0
        } else {
            total / n as f64
        }
    }

    fn prepare(&self, a: &AttributeMap) -> Vec<(String, Vec<char>)> {
        self.selector
            .selected(a)
            .into_iter()
            .map(|(k, v)| {
                let chars = if self.fold_case {
                    v.to_lowercase().chars().collect()
                } else {
                    v.chars().collect()
                };
                (k.to_owned(), chars)
            })
            .collect()
    }
}

fn prepared_distance(a: &[(String, Vec<char>)], b: &[(String, Vec<char>)]) -> f64 {
    // Both sides are sorted by key.
    let (mut i, mut j) = (0, 0);
    let mut total = 0.0;
    let mut n = 0usize;
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                let sim = if a[i].1 == b[j].1 {
                    1.0
                } else {
                    winkler(&a[i].1, &b[j].1).clamp(0.0, 1.0)
                };
                total += 1.0 - sim;
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    if n == 0 {
        1.0
    } else {
        total / n as f64
    }
}

/// Attribute-plausible query nodes for every target node: `w` is listed for
/// `u` when `1 - distance(u, w) >= threshold`.
pub fn candidate_map(
    target: &AttributedGraph,
    query: &AttributedGraph,
    comparator: &AttributeComparator,
    threshold: f64,
) -> CandidateMap {
    let query_prepared: Vec<_> = query
        .node_indices()
        .map(|w| comparator.prepare(query.attributes(w)))
        .collect();
    let rows: Vec<Vec<(NodeIx, f64)>> = target
        .node_indices()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&u| {
            let pu = comparator.prepare(target.attributes(u));
            query_prepared
                .iter()
                .enumerate()
                .filter_map(|(wi, pw)| {
                    let d = prepared_distance(&pu, pw);
                    (1.0 - d >= threshold).then_some((NodeIx::new(wi), d))
                })
                .collect()
        })
        .collect();
    CandidateMap::from_rows(rows, query.node_count())
}
