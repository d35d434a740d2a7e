//! Noise injection and scoring against planted ground truth.
//!
//! A query is cut out of the target by breadth-first growth, perturbed
//! structurally and/or in its attributes, matched back against the target, and
//! the best mapping is scored pair by pair.

use std::collections::{BTreeSet, HashSet, VecDeque};

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::FuzzError;
use crate::graph::{AttributedGraph, GraphBuilder, NodeId, NodeIx};
use crate::matcher::{match_graphs, MatchResult};
use crate::params::MatchParams;
use crate::synth::random_string;

/// Noise levels for one trial and the seed that makes it reproducible.
#[derive(Copy, Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub structural_level: f64,
    pub attribute_level: f64,
    pub rng_seed: u64,
}

impl NoiseSpec {
    pub fn validate(&self) -> Result<(), FuzzError> {
        check_level(self.structural_level)?;
        check_level(self.attribute_level)
    }
}

fn check_level(level: f64) -> Result<(), FuzzError> {
    if (0.0..=1.0).contains(&level) {
        Ok(())
    } else {
        Err(FuzzError::Level(level))
    }
}

/// Correct `(target, query)` pairs of a planted query.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GroundTruth {
    pub pairs: BTreeSet<(NodeId, NodeId)>,
}

impl GroundTruth {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Pairs whose query node still exists in `query`.
    pub fn surviving(&self, query: &AttributedGraph) -> GroundTruth {
        GroundTruth {
            pairs: self
                .pairs
                .iter()
                .filter(|(_, q)| query.index_of(q).is_some())
                .cloned()
                .collect(),
        }
    }
}

#[derive(Copy, Clone, Debug, Default, PartialEq, Serialize)]
pub struct EvalReport {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub returned_pairs: usize,
    pub correct_pairs: usize,
}

impl EvalReport {
    pub fn from_counts(returned: usize, correct: usize, relevant: usize) -> Self {
        let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        let precision = ratio(correct, returned);
        let recall = ratio(correct, relevant);
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        EvalReport {
            precision,
            recall,
            f1,
            returned_pairs: returned,
            correct_pairs: correct,
        }
    }
}

/// A query graph cut out of a target, with its ground truth.
#[derive(Clone, Debug)]
pub struct Planted {
    pub query: AttributedGraph,
    pub truth: GroundTruth,
    pub seed_node: NodeId,
}

/// Grows a connected region of `size` nodes breadth-first from `seed`, visiting
/// neighbors in random order, and returns its induced subgraph under fresh,
/// shuffled query ids.
pub fn plant_query<R: Rng + ?Sized>(
    target: &AttributedGraph,
    seed: &NodeId,
    size: usize,
    rng: &mut R,
) -> Result<(AttributedGraph, GroundTruth), FuzzError> {
    let start = target.require(seed)?;
    let mut region = vec![start];
    let mut seen: HashSet<NodeIx> = HashSet::from([start]);
    let mut queue = VecDeque::from([start]);
    'grow: while let Some(n) = queue.pop_front() {
        if region.len() >= size {
            break;
        }
        let mut next = target.neighbors_of(n).to_vec();
        next.shuffle(rng);
        for m in next {
            if region.len() >= size {
                break 'grow;
            }
            if seen.insert(m) {
                region.push(m);
                queue.push_back(m);
            }
        }
    }
    if region.len() < size {
        return Err(FuzzError::RegionTooSmall {
            seed: seed.to_string(),
            wanted: size,
            available: region.len(),
        });
    }

    let mut labels: Vec<usize> = (0..size).collect();
    labels.shuffle(rng);
    let width = size.saturating_sub(1).to_string().len();
    let qid = |i: usize| NodeId::new(format!("q{:0width$}", labels[i]));
    let slot: std::collections::HashMap<NodeIx, usize> =
        region.iter().enumerate().map(|(i, &n)| (n, i)).collect();

    let mut b = GraphBuilder::new(target.is_directed());
    for (i, &n) in region.iter().enumerate() {
        b.add_node(qid(i), target.attributes(n).clone());
    }
    for e in target.edges() {
        if let (Some(&i), Some(&j)) = (slot.get(&e.source), slot.get(&e.target)) {
            b.add_edge(qid(i), qid(j), e.attributes.clone());
        }
    }
    let truth = GroundTruth {
        pairs: region
            .iter()
            .enumerate()
            .map(|(i, &n)| (target.id(n).clone(), qid(i)))
            .collect(),
    };
    Ok((b.build()?, truth))
}

/// Plants a `nodes`-node query from random seeds, preferring one whose induced
/// edge count equals `edges`. After `attempts` tries the closest is kept.
pub fn plant_query_shaped<R: Rng + ?Sized>(
    target: &AttributedGraph,
    nodes: usize,
    edges: Option<usize>,
    attempts: usize,
    rng: &mut R,
) -> Result<Planted, FuzzError> {
    let mut best: Option<(usize, Planted)> = None;
    let mut last_err = None;
    for _ in 0..attempts.max(1) {
        let seed = target.id(NodeIx::new(rng.random_range(0..target.node_count()))).clone();
        match plant_query(target, &seed, nodes, rng) {
            Ok((query, truth)) => {
                let miss = edges.map_or(0, |e| query.edge_count().abs_diff(e));
                if best.as_ref().is_none_or(|(m, _)| miss < *m) {
                    best = Some((
                        miss,
                        Planted {
                            query,
                            truth,
                            seed_node: seed,
                        },
                    ));
                }
                if miss == 0 {
                    break;
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    match (best, last_err) {
        (Some((_, p)), _) => Ok(p),
        (None, Some(e)) => Err(e),
        (None, None) => Err(FuzzError::NoTrials),
    }
}

#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct StructuralNoiseStats {
    pub nodes_deleted: usize,
    pub edges_deleted: usize,
    pub edges_added: usize,
    /// Nodes dropped because they fell outside the largest component.
    pub nodes_disconnected: usize,
}

/// Deletes each node, then each remaining edge, with probability `level`, then
/// joins each non-adjacent pair of remaining nodes with probability
/// `level / 4`. Added edges have no attributes and, in directed graphs, a
/// random direction. Only the largest connected component is kept.
pub fn add_structural_noise<R: Rng + ?Sized>(
    g: &AttributedGraph,
    level: f64,
    rng: &mut R,
) -> Result<(AttributedGraph, StructuralNoiseStats), FuzzError> {
    check_level(level)?;
    let mut stats = StructuralNoiseStats::default();
    let alive: Vec<bool> = g.node_indices().map(|_| !rng.random_bool(level)).collect();
    stats.nodes_deleted = alive.iter().filter(|&&a| !a).count();

    let mut kept_edges = Vec::new();
    for e in g.edges() {
        if !(alive[e.source.index()] && alive[e.target.index()]) {
            continue;
        }
        if rng.random_bool(level) {
            stats.edges_deleted += 1;
        } else {
            kept_edges.push((e.source, e.target, e.attributes.clone()));
        }
    }

    let survivors: Vec<NodeIx> = g.node_indices().filter(|n| alive[n.index()]).collect();
    let add_p = level / 4.0;
    for (i, &a) in survivors.iter().enumerate() {
        for &b in &survivors[i + 1..] {
            if g.is_adjacent(a, b) || !rng.random_bool(add_p) {
                continue;
            }
            let (s, t) = if g.is_directed() && rng.random_bool(0.5) {
                (b, a)
            } else {
                (a, b)
            };
            kept_edges.push((s, t, Default::default()));
            stats.edges_added += 1;
        }
    }

    let mut b = GraphBuilder::new(g.is_directed());
    for &n in &survivors {
        b.add_node(g.id(n).clone(), g.attributes(n).clone());
    }
    for (s, t, a) in kept_edges {
        b.add_edge(g.id(s).clone(), g.id(t).clone(), a);
    }
    let noisy = b.build()?;
    let out = match noisy.connected_components().into_iter().next() {
        Some(largest) if largest.len() < noisy.node_count() => {
            stats.nodes_disconnected = noisy.node_count() - largest.len();
            noisy.induced_by_index(&largest)
        }
        _ => noisy,
    };
    Ok((out, stats))
}

#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct AttributeNoiseStats {
    pub nodes_altered: usize,
    pub values_altered: usize,
}

/// Picks each node with probability `level`; for a picked node, a uniform
/// number of its attributes (at least one) is chosen uniformly and each
/// chosen value is replaced by a random string of the same length.
pub fn add_attribute_noise<R: Rng + ?Sized>(
    g: &AttributedGraph,
    level: f64,
    rng: &mut R,
) -> Result<(AttributedGraph, AttributeNoiseStats), FuzzError> {
    check_level(level)?;
    let mut stats = AttributeNoiseStats::default();
    let mut b = GraphBuilder::new(g.is_directed());
    for n in g.node_indices() {
        let mut attrs = g.attributes(n).clone();
        if !attrs.is_empty() && rng.random_bool(level) {
            let keys: Vec<String> = attrs.keys().cloned().collect();
            let count = rng.random_range(1..=keys.len());
            for i in index::sample(rng, keys.len(), count) {
                let v = attrs.get_mut(&keys[i]).expect("key exists");
                *v = random_string(rng, v.chars().count());
            }
            stats.nodes_altered += 1;
            stats.values_altered += count;
        }
        b.add_node(g.id(n).clone(), attrs);
    }
    for e in g.edges() {
        b.add_edge(g.id(e.source).clone(), g.id(e.target).clone(), e.attributes.clone());
    }
    Ok((b.build()?, stats))
}

/// Scores a set of returned `(target, query)` pairs. Truth pairs whose query
/// node is absent from `query` do not count towards recall.
pub fn score_pairs(
    returned: &BTreeSet<(NodeId, NodeId)>,
    query: &AttributedGraph,
    truth: &GroundTruth,
) -> EvalReport {
    let relevant = truth.surviving(query);
    let correct = returned.intersection(&relevant.pairs).count();
    EvalReport::from_counts(returned.len(), correct, relevant.len())
}

/// Scores the best mapping of `result`.
pub fn score(
    result: &MatchResult,
    target: &AttributedGraph,
    query: &AttributedGraph,
    truth: &GroundTruth,
) -> EvalReport {
    let returned: BTreeSet<(NodeId, NodeId)> = result
        .best()
        .map(|m| {
            m.mapping
                .pairs()
                .iter()
                .map(|p| (target.id(p.target).clone(), query.id(p.query).clone()))
                .collect()
        })
        .unwrap_or_default();
    score_pairs(&returned, query, truth)
}

/// One noisy-match trial.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct TrialOutcome {
    pub report: EvalReport,
    pub structural: StructuralNoiseStats,
    pub attributes: AttributeNoiseStats,
    /// Why the trial produced no mapping, if it failed.
    pub failure: Option<String>,
}

/// Applies structural then attribute noise to `planted`, matches the result
/// against `target` and scores it. Failures score zero.
pub fn run_trial(
    target: &AttributedGraph,
    planted: &Planted,
    spec: &NoiseSpec,
    params: &MatchParams,
) -> Result<TrialOutcome, FuzzError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.rng_seed);
    let (shaken, structural) = add_structural_noise(&planted.query, spec.structural_level, &mut rng)?;
    let (noisy, attributes) = add_attribute_noise(&shaken, spec.attribute_level, &mut rng)?;
    let (report, failure) = match match_graphs(target, &noisy, params) {
        Ok(r) => (score(&r, target, &noisy, &planted.truth), None),
        Err(e) => (EvalReport::default(), Some(e.to_string())),
    };
    Ok(TrialOutcome {
        report,
        structural,
        attributes,
        failure,
    })
}

/// One row of a sweep: a grid point and trial index.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub structural_level: f64,
    pub attribute_level: f64,
    pub trial: usize,
    pub outcome: TrialOutcome,
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize)]
pub struct SweepSummary {
    pub structural_level: f64,
    pub attribute_level: f64,
    pub mean: [f64; 3],
    pub std: [f64; 3],
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    pub summaries: Vec<SweepSummary>,
}

impl SweepReport {
    /// f1 of every trial at grid point `i`.
    pub fn f1_at(&self, i: usize) -> Vec<f64> {
        let s = &self.summaries[i];
        self.rows
            .iter()
            .filter(|r| r.structural_level == s.structural_level && r.attribute_level == s.attribute_level)
            .map(|r| r.outcome.report.f1)
            .collect()
    }

    /// CSV with one row per trial followed by `mean` and `std` rows per grid
    /// point.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let line = |w: &mut csv::Writer<Vec<u8>>, s: f64, a: f64, t: &str, v: [f64; 3]| {
            w.write_record([
                s.to_string(),
                a.to_string(),
                t.to_string(),
                v[0].to_string(),
                v[1].to_string(),
                v[2].to_string(),
            ])
            .expect("writing to memory");
        };
        w.write_record([
            "structural_level",
            "attribute_level",
            "trial",
            "precision",
            "recall",
            "f1",
        ])
        .expect("writing to memory");
        for r in &self.rows {
            let e = r.outcome.report;
            line(
                &mut w,
                r.structural_level,
                r.attribute_level,
                &r.trial.to_string(),
                [e.precision, e.recall, e.f1],
            );
        }
        for s in &self.summaries {
            line(&mut w, s.structural_level, s.attribute_level, "mean", s.mean);
            line(&mut w, s.structural_level, s.attribute_level, "std", s.std);
        }
        String::from_utf8(w.into_inner().expect("flush to memory")).expect("csv is utf-8")
    }
}

/// Seed of trial `trial` at grid point `point`.
pub fn trial_seed(seed: u64, point: usize, trial: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((point as u64) << 32) | trial as u64);
    rng.random()
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = if xs.len() > 1 {
        xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, var.sqrt())
}

/// Runs `trials` seeded trials at every `(structural, attribute)` grid point
/// against the same planted query.
pub fn run_noise_sweep(
    target: &AttributedGraph,
    planted: &Planted,
    grid: &[(f64, f64)],
    params: &MatchParams,
    trials: usize,
    seed: u64,
) -> Result<SweepReport, FuzzError> {
    if trials == 0 {
        return Err(FuzzError::NoTrials);
    }
    for &(s, a) in grid {
        check_level(s)?;
        check_level(a)?;
    }
    let jobs: Vec<(usize, usize)> = (0..grid.len())
        .flat_map(|p| (0..trials).map(move |t| (p, t)))
        .collect();
    let outcomes: Vec<TrialOutcome> = jobs
        .par_iter()
        .map(|&(p, t)| {
            let spec = NoiseSpec {
                structural_level: grid[p].0,
                attribute_level: grid[p].1,
                rng_seed: trial_seed(seed, p, t),
            };
            run_trial(target, planted, &spec, params)
        })
        .collect::<Result<_, _>>()?;

    let rows: Vec<SweepRow> = jobs
        .iter()
        .zip(outcomes)
        .map(|(&(p, t), outcome)| SweepRow {
            structural_level: grid[p].0,
            attribute_level: grid[p].1,
            trial: t,
            outcome,
        })
        .collect();
    let summaries = grid
        .iter()
        .enumerate()
        .map(|(p, &(s, a))| {
            let point = &rows[p * trials..(p + 1) * trials];
            let column = |f: fn(&EvalReport) -> f64| {
                mean_std(&point.iter().map(|r| f(&r.outcome.report)).collect::<Vec<_>>())
            };
            let (pm, ps) = column(|e| e.precision);
            let (rm, rs) = column(|e| e.recall);
            let (fm, fs) = column(|e| e.f1);
            SweepSummary {
                structural_level: s,
                attribute_level: a,
                mean: [pm, rm, fm],
                std: [ps, rs, fs],
            }
        })
        .collect();
    Ok(SweepReport { rows, summaries })
}

/// One-sided Welch t-test of `mean(a) > mean(b)`. Returns the p-value.
pub fn welch_greater(a: &[f64], b: &[f64]) -> f64 {
    let (ma, sa) = mean_std(a);
    let (mb, sb) = mean_std(b);
    let va = sa * sa / a.len() as f64;
    let vb = sb * sb / b.len() as f64;
    let se = (va + vb).sqrt();
    if se == 0.0 {
        return if ma > mb { 0.0 } else { 1.0 };
    }
    let t = (ma - mb) / se;
    let df = (va + vb).powi(2)
        / (va * va / (a.len() as f64 - 1.0).max(1.0) + vb * vb / (b.len() as f64 - 1.0).max(1.0));
    let dist = StudentsT::new(0.0, 1.0, df).expect("positive degrees of freedom");
    1.0 - dist.cdf(t)
}

/// One-sided test for an increasing linear trend of `y` in `x`: the p-value
/// of a positive least-squares slope.
pub fn slope_increase_p(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len(), "paired samples");
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    if sxx == 0.0 || x.len() < 3 {
        return 1.0;
    }
    let slope = sxy / sxx;
    let rss: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - my - slope * (a - mx)).powi(2))
        .sum();
    let se = (rss / (n - 2.0) / sxx).sqrt();
    if se == 0.0 {
        return if slope > 0.0 { 0.0 } else { 1.0 };
    }
    let dist = StudentsT::new(0.0, 1.0, n - 2.0).expect("positive degrees of freedom");
    1.0 - dist.cdf(slope / se)
}
