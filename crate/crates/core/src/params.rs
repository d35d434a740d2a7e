//! Matching parameters.

use serde::{Deserialize, Serialize};

use crate::error::ParamError;
use crate::similarity::{AttributeComparator, AttributeSelector};
use crate::start_nodes::StartOptions;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatchMode {
    Exact,
    #[default]
    Inexact,
}

/// How two existing edges are compared.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeSubstitution {
    /// 0 when every shared attribute (and the orientation) agrees, else 1.
    #[default]
    Binary,
    /// Mean of `1 - jaro_winkler` over shared attributes, with orientation
    /// counted as one more attribute.
    Graded,
}

/// Edge edit costs used by the edge term.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeCostSpec {
    pub substitution: EdgeSubstitution,
    pub deletion_cost: f64,
    pub addition_cost: f64,
    pub attributes: AttributeSelector,
}

impl Default for EdgeCostSpec {
    fn default() -> Self {
        EdgeCostSpec {
            substitution: EdgeSubstitution::Binary,
            deletion_cost: 1.0,
            addition_cost: 1.0,
            attributes: AttributeSelector::All,
        }
    }
}

/// Every tunable of the matcher.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatchParams {
    /// Weight of attribute distance against look-ahead in the node term.
    pub gamma: f64,
    /// Weight of the node term against the edge term in a local cost.
    pub lambda1: f64,
    /// Weight of the mean local cost against the missing-node penalty.
    pub lambda2: f64,
    /// Largest local cost a pairing may have. Ignored in exact mode.
    pub pairing_cost_threshold: f64,
    /// Target nodes with fewer than `k` candidates may start a search.
    pub k: usize,
    /// Minimum attribute similarity for a query node to be a candidate.
    pub candidate_threshold: f64,
    pub selector: AttributeSelector,
    pub mode: MatchMode,
    pub edge_cost: EdgeCostSpec,
    pub strict_local_check: bool,
    pub two_hop_excludes_neighbors: bool,
    pub fold_case: bool,
    /// Cap on backtracking restarts per start node.
    pub max_backtracks: usize,
    /// Skip start nodes reached by an earlier search that paired every query
    /// node. Disabling it lets start-node searches run in parallel.
    pub skip_visited_starts: bool,
}

impl Default for MatchParams {
    fn default() -> Self {
        MatchParams {
            gamma: 0.7,
            lambda1: 0.7,
            lambda2: 0.7,
            pairing_cost_threshold: 0.5,
            k: 3,
            candidate_threshold: 0.5,
            selector: AttributeSelector::All,
            mode: MatchMode::Inexact,
            edge_cost: EdgeCostSpec::default(),
            strict_local_check: true,
            two_hop_excludes_neighbors: false,
            fold_case: false,
            max_backtracks: 10_000,
            skip_visited_starts: true,
        }
    }
}

impl MatchParams {
    pub fn exact() -> Self {
        MatchParams {
            mode: MatchMode::Exact,
            ..Default::default()
        }
    }

    pub fn is_exact(&self) -> bool {
        self.mode == MatchMode::Exact
    }

    /// Threshold actually applied: zero in exact mode.
    pub fn effective_threshold(&self) -> f64 {
        match self.mode {
            MatchMode::Exact => 0.0,
            MatchMode::Inexact => self.pairing_cost_threshold,
        }
    }

    pub fn comparator(&self) -> AttributeComparator {
        AttributeComparator::new(self.selector.clone(), self.fold_case)
    }

    pub fn start_options(&self) -> StartOptions {
        StartOptions {
            strict_local_check: self.strict_local_check,
            two_hop_excludes_neighbors: self.two_hop_excludes_neighbors,
        }
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        let unit = [
            ("gamma", self.gamma),
            ("lambda1", self.lambda1),
            ("lambda2", self.lambda2),
            ("pairing_cost_threshold", self.pairing_cost_threshold),
            ("candidate_threshold", self.candidate_threshold),
            ("edge_deletion_cost", self.edge_cost.deletion_cost),
            ("edge_addition_cost", self.edge_cost.addition_cost),
        ];
        for (name, value) in unit {
            if !(0.0..=1.0).contains(&value) {
                return Err(ParamError::OutOfUnitRange { name, value });
            }
        }
        if self.k == 0 {
            return Err(ParamError::ZeroK);
        }
        self.selector.validate()?;
        self.edge_cost.attributes.validate()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let p = MatchParams::default();
        assert_eq!((p.gamma, p.lambda1, p.lambda2), (0.7, 0.7, 0.7));
        assert_eq!(p.k, 3);
        assert_eq!(p.candidate_threshold, 0.5);
        assert_eq!(p.effective_threshold(), 0.5);
        assert!(p.validate().is_ok());
    }

    #[test]
    fn exact_mode_forces_zero_threshold() {
        let p = MatchParams {
            pairing_cost_threshold: 0.9,
            ..MatchParams::exact()
        };
        assert_eq!(p.effective_threshold(), 0.0);
    }

    #[test]
    fn validation_rejects_out_of_range() {
        let p = MatchParams {
            gamma: 1.5,
            ..Default::default()
        };
        assert!(matches!(p.validate(), Err(ParamError::OutOfUnitRange { name: "gamma", .. })));
        let p = MatchParams {
            k: 0,
            ..Default::default()
        };
        assert_eq!(p.validate(), Err(ParamError::ZeroK));
        let p = MatchParams {
            lambda2: f64::NAN,
            ..Default::default()
        };
        assert!(p.validate().is_err());
    }
}
