//! File formats: JSON graph documents, TOML configuration and JSON mapping
//! documents.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cost::{global_cost_from_parts, CostModel};
use crate::error::DocumentError;
use crate::fuzz::NoiseSpec;
use crate::graph::{AttributeMap, AttributedGraph, GraphBuilder, NodeId};
use crate::matcher::{Match, MatchResult};
use crate::params::{EdgeCostSpec, EdgeSubstitution, MatchMode, MatchParams};
use crate::similarity::AttributeSelector;

pub const FORMAT_VERSION: &str = "1.0";

/// Tolerance for the self-check of written mapping documents.
const RECOMPUTE_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeRecord {
    pub id: NodeId,
    #[serde(default)]
    pub attributes: AttributeMap,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeRecord {
    pub source: NodeId,
    pub target: NodeId,
    #[serde(default)]
    pub attributes: AttributeMap,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphDocument {
    pub format_version: String,
    #[serde(default)]
    pub directed: bool,
    pub nodes: Vec<NodeRecord>,
    #[serde(default)]
    pub edges: Vec<EdgeRecord>,
}

impl GraphDocument {
    /// Nodes in id order, edges in (source, target) order.
    pub fn from_graph(g: &AttributedGraph) -> Self {
        GraphDocument {
            format_version: FORMAT_VERSION.into(),
            directed: g.is_directed(),
            nodes: g
                .node_indices()
                .map(|n| NodeRecord {
                    id: g.id(n).clone(),
                    attributes: g.attributes(n).clone(),
                })
                .collect(),
            edges: g
                .edges()
                .iter()
                .map(|e| EdgeRecord {
                    source: g.id(e.source).clone(),
                    target: g.id(e.target).clone(),
                    attributes: e.attributes.clone(),
                })
                .collect(),
        }
    }

    pub fn to_graph(&self, path: &str) -> Result<AttributedGraph, DocumentError> {
        if self.format_version != FORMAT_VERSION {
            return Err(DocumentError::Version {
                path: path.into(),
                version: self.format_version.clone(),
            });
        }
        let mut b = GraphBuilder::new(self.directed);
        for n in &self.nodes {
            b.add_node(n.id.clone(), n.attributes.clone());
        }
        for e in &self.edges {
            b.add_edge(e.source.clone(), e.target.clone(), e.attributes.clone());
        }
        b.build().map_err(|source| DocumentError::Graph {
            path: path.into(),
            source,
        })
    }
}

fn read(path: &Path) -> Result<String, DocumentError> {
    fs::read_to_string(path).map_err(|source| DocumentError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn write(path: &Path, text: &str) -> Result<(), DocumentError> {
    fs::write(path, text).map_err(|source| DocumentError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn json_error(path: &str, e: serde_json::Error) -> DocumentError {
    DocumentError::Parse {
        path: path.into(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    }
}

/// Parses and validates a graph document. `path` is only used in messages.
pub fn parse_graph(text: &str, path: &str) -> Result<AttributedGraph, DocumentError> {
    let doc: GraphDocument = serde_json::from_str(text).map_err(|e| json_error(path, e))?;
    doc.to_graph(path)
}

pub fn load_graph(path: impl AsRef<Path>) -> Result<AttributedGraph, DocumentError> {
    let path = path.as_ref();
    parse_graph(&read(path)?, &path.display().to_string())
}

pub fn graph_to_json(g: &AttributedGraph) -> String {
    let mut s = serde_json::to_string_pretty(&GraphDocument::from_graph(g)).expect("graph serializes");
    s.push('\n');
    s
}

pub fn save_graph(g: &AttributedGraph, path: impl AsRef<Path>) -> Result<(), DocumentError> {
    write(path.as_ref(), &graph_to_json(g))
}

/// Flat configuration file. Every key is optional; missing keys take the
/// library defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConfigDocument {
    pub gamma: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub pairing_cost_threshold: f64,
    pub k: usize,
    pub candidate_threshold: f64,
    pub attributes: AttributeSelector,
    pub mode: MatchMode,
    pub edge_substitution: EdgeSubstitution,
    pub edge_deletion_cost: f64,
    pub edge_addition_cost: f64,
    pub edge_attributes: AttributeSelector,
    pub strict_local_check: bool,
    pub two_hop_excludes_neighbors: bool,
    pub fold_case: bool,
    pub max_backtracks: usize,
    pub skip_visited_starts: bool,
    pub structural_level: f64,
    pub attribute_level: f64,
    pub seed: u64,
    pub trials: usize,
}

impl Default for ConfigDocument {
    fn default() -> Self {
        ConfigDocument::from_parts(&MatchParams::default(), &NoiseSpec::default(), 20)
    }
}

impl ConfigDocument {
    pub fn from_parts(p: &MatchParams, noise: &NoiseSpec, trials: usize) -> Self {
        ConfigDocument {
            gamma: p.gamma,
            lambda1: p.lambda1,
            lambda2: p.lambda2,
            pairing_cost_threshold: p.pairing_cost_threshold,
            k: p.k,
            candidate_threshold: p.candidate_threshold,
            attributes: p.selector.clone(),
            mode: p.mode,
            edge_substitution: p.edge_cost.substitution,
            edge_deletion_cost: p.edge_cost.deletion_cost,
            edge_addition_cost: p.edge_cost.addition_cost,
            edge_attributes: p.edge_cost.attributes.clone(),
            strict_local_check: p.strict_local_check,
            two_hop_excludes_neighbors: p.two_hop_excludes_neighbors,
            fold_case: p.fold_case,
            max_backtracks: p.max_backtracks,
            skip_visited_starts: p.skip_visited_starts,
            structural_level: noise.structural_level,
            attribute_level: noise.attribute_level,
            seed: noise.rng_seed,
            trials,
        }
    }

    pub fn params(&self) -> MatchParams {
        MatchParams {
            gamma: self.gamma,
            lambda1: self.lambda1,
            lambda2: self.lambda2,
            pairing_cost_threshold: self.pairing_cost_threshold,
            k: self.k,
            candidate_threshold: self.candidate_threshold,
            selector: self.attributes.clone(),
            mode: self.mode,
            edge_cost: EdgeCostSpec {
                substitution: self.edge_substitution,
                deletion_cost: self.edge_deletion_cost,
                addition_cost: self.edge_addition_cost,
                attributes: self.edge_attributes.clone(),
            },
            strict_local_check: self.strict_local_check,
            two_hop_excludes_neighbors: self.two_hop_excludes_neighbors,
            fold_case: self.fold_case,
            max_backtracks: self.max_backtracks,
            skip_visited_starts: self.skip_visited_starts,
        }
    }

    pub fn noise(&self) -> NoiseSpec {
        NoiseSpec {
            structural_level: self.structural_level,
            attribute_level: self.attribute_level,
            rng_seed: self.seed,
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str, path: &str) -> Result<ConfigDocument, DocumentError> {
    let doc: ConfigDocument = toml::from_str(text).map_err(|e| {
        let (line, column) = e
            .span()
            .map(|span| line_column(text, span.start))
            .unwrap_or((0, 0));
        DocumentError::Parse {
            path: path.into(),
            line,
            column,
            message: e.message().to_string(),
        }
    })?;
    doc.params().validate().map_err(|source| DocumentError::Params {
        path: path.into(),
        source,
    })?;
    doc.noise()
        .validate()
        .map_err(|e| DocumentError::Invalid(format!("{path}: {e}")))?;
    Ok(doc)
}

pub fn load_config(path: impl AsRef<Path>) -> Result<ConfigDocument, DocumentError> {
    let path = path.as_ref();
    parse_config(&read(path)?, &path.display().to_string())
}

fn line_column(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairRecord {
    pub target: NodeId,
    pub query: NodeId,
    pub local_cost: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MappingRecord {
    pub start: NodeId,
    pub global_cost: f64,
    /// In pairing order; local costs depend on it.
    pub pairs: Vec<PairRecord>,
    pub unmapped_query: Vec<NodeId>,
    pub unmapped_explored_target: Vec<NodeId>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MappingDocument {
    pub format_version: String,
    pub mappings: Vec<MappingRecord>,
    pub start_nodes_used: Vec<NodeId>,
    pub explored_node_count: usize,
    pub backtracks: usize,
    pub backtrack_cap_hit: bool,
    /// Wall-clock seconds. Left out unless asked for, since it differs
    /// between otherwise identical runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub runtime_secs: Option<f64>,
    pub params: MatchParams,
}

impl MappingRecord {
    fn from_match(m: &Match, target: &AttributedGraph, query: &AttributedGraph) -> Self {
        let mut unmapped_explored_target: Vec<NodeId> = m
            .explored
            .iter()
            .filter(|&&u| !m.mapping.is_target_mapped(u))
            .map(|&u| target.id(u).clone())
            .collect();
        unmapped_explored_target.sort();
        MappingRecord {
            start: target.id(m.start).clone(),
            global_cost: m.global_cost,
            pairs: m
                .mapping
                .pairs()
                .iter()
                .map(|p| PairRecord {
                    target: target.id(p.target).clone(),
                    query: query.id(p.query).clone(),
                    local_cost: p.local_cost,
                })
                .collect(),
            unmapped_query: m.mapping.unmapped_query().map(|w| query.id(w).clone()).collect(),
            unmapped_explored_target,
        }
    }
}

impl MappingDocument {
    /// Builds the document and checks every cost in it against a fresh
    /// recomputation from the pair lists.
    pub fn from_result(
        result: &MatchResult,
        target: &AttributedGraph,
        query: &AttributedGraph,
        params: &MatchParams,
        with_runtime: bool,
    ) -> Result<Self, DocumentError> {
        let doc = MappingDocument {
            format_version: FORMAT_VERSION.into(),
            mappings: result
                .matches
                .iter()
                .map(|m| MappingRecord::from_match(m, target, query))
                .collect(),
            start_nodes_used: result.start_nodes_used.iter().map(|&u| target.id(u).clone()).collect(),
            explored_node_count: result.explored_node_count,
            backtracks: result.backtracks,
            backtrack_cap_hit: result.backtrack_cap_hit,
            runtime_secs: with_runtime.then(|| result.runtime.as_secs_f64()),
            params: params.clone(),
        };
        doc.verify(target, query)?;
        Ok(doc)
    }

    /// Recomputes every local and global cost from the stored pairs.
    pub fn verify(&self, target: &AttributedGraph, query: &AttributedGraph) -> Result<(), DocumentError> {
        let model = CostModel::new(target, query, &self.params);
        for (i, rec) in self.mappings.iter().enumerate() {
            let mut order = Vec::with_capacity(rec.pairs.len());
            for p in &rec.pairs {
                let u = target.require(&p.target).map_err(|e| DocumentError::Invalid(e.to_string()))?;
                let w = query.require(&p.query).map_err(|e| DocumentError::Invalid(e.to_string()))?;
                order.push((u, w));
            }
            let replayed = model.replay(order);
            if replayed.len() != rec.pairs.len() {
                return Err(DocumentError::Invalid(format!("mappings[{i}] is not injective")));
            }
            for (j, (p, r)) in rec.pairs.iter().zip(replayed.pairs()).enumerate() {
                if (p.local_cost - r.local_cost).abs() > RECOMPUTE_TOLERANCE {
                    return Err(DocumentError::Invalid(format!(
                        "mappings[{i}].pairs[{j}]: stored local cost {} but recomputed {}",
                        p.local_cost, r.local_cost
                    )));
                }
            }
            let sum: f64 = rec.pairs.iter().map(|p| p.local_cost).sum();
            let global = global_cost_from_parts(sum, rec.pairs.len(), query.node_count(), self.params.lambda2)
                .map_err(|e| DocumentError::Invalid(format!("mappings[{i}]: {e}")))?;
            if (global - rec.global_cost).abs() > RECOMPUTE_TOLERANCE {
                return Err(DocumentError::Invalid(format!(
                    "mappings[{i}]: stored global cost {} but recomputed {global}",
                    rec.global_cost
                )));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("mapping serializes");
        s.push('\n');
        s
    }

    pub fn parse(text: &str, path: &str) -> Result<Self, DocumentError> {
        serde_json::from_str(text).map_err(|e| json_error(path, e))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), DocumentError> {
        write(path.as_ref(), &self.to_json())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, DocumentError> {
        let path = path.as_ref();
        Self::parse(&read(path)?, &path.display().to_string())
    }
}
