//! Inexact subgraph matching for node- and edge-attributed graphs.
//!
//! The pipeline has three stages:
//!
//! 1. [`similarity::candidate_map`] lists, for every target node, the query
//!    nodes whose attributes are similar enough (Jaro-Winkler on strings).
//! 2. [`start_nodes::find_start_nodes`] keeps target nodes with few candidates
//!    whose neighborhoods can host the candidate's neighborhood.
//! 3. [`matcher::Matcher`] runs a backtracking depth-first search over the
//!    target graph from each start node, scoring pairings with the
//!    [`cost::CostModel`].
//!
//! [`fuzz`] perturbs planted query graphs and scores the recovered pairings,
//! and [`io`] handles the JSON graph/mapping documents and TOML configs.

pub mod cost;
pub mod error;
pub mod fuzz;
pub mod graph;
pub mod io;
pub mod mapping;
pub mod matcher;
pub mod params;
pub mod similarity;
pub mod start_nodes;
pub mod synth;

pub use cost::CostModel;
pub use error::{DocumentError, FuzzError, GraphError, MatchError, ParamError};
pub use graph::{AttributeMap, AttributedGraph, GraphBuilder, NodeId, NodeIx};
pub use mapping::{Mapping, Pair};
pub use matcher::{match_graphs, Alternative, Match, MatchResult, Matcher, SearchFrame, StartSearch};
pub use params::{EdgeCostSpec, EdgeSubstitution, MatchMode, MatchParams};
pub use similarity::{jaro_winkler, AttributeComparator, AttributeSelector};
pub use start_nodes::{find_start_nodes, CandidateMap, StartSet};
