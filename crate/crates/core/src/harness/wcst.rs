use serde::{Deserialize, Serialize};

use super::config::DEFAULT_WCST_CAP;
use crate::error::Result;
use crate::knowledge::{Agent, EventRecord, KnowledgeGraph, OrderedWeights, Parameters};
use crate::scenarios::wcst::pile_of;
use crate::scenarios::{wcst_actions, wcst_oracle, wcst_percept, wcst_schema, SortingRule, WcstState};

/// Parameters used for card sorting unless overridden.
pub fn wcst_default_parameters() -> Parameters {
    Parameters {
        rho_ra: 0.0,
        delta_aw: 0.02,
        theta_mc: 2.5,
        theta_mf: 0.3,
        ..Parameters::default()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct WcstConfig {
    pub seed: u64,
    /// Card presentations before giving up.
    pub cap: u64,
    pub parameters: Parameters,
}

impl Default for WcstConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            cap: DEFAULT_WCST_CAP,
            parameters: wcst_default_parameters(),
        }
    }
}

/// Weights at the instant a run of five was completed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RuleChange {
    /// Presentation number (1-based) that completed the run.
    pub presentation: u64,
    pub completed_rule: SortingRule,
    pub next_rule: SortingRule,
    pub weights: OrderedWeights,
}

impl RuleChange {
    /// Whether the completed rule's feature carries the strictly largest feature weight.
    pub fn rule_weight_is_max(&self) -> bool {
        let feature_weights: Vec<f64> = self.weights.0.iter().take(3).map(|(_, w)| *w).collect();
        let idx = self.completed_rule.feature_index();
        let own = feature_weights[idx];
        feature_weights.iter().enumerate().all(|(i, &w)| i == idx || own > w)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct WcstStats {
    pub completed: bool,
    pub cards_presented: u64,
    pub completed_runs: u32,
    pub rule_changes: Vec<RuleChange>,
    /// Weights after every presentation.
    pub per_step_weights: Vec<OrderedWeights>,
    pub final_category_count: usize,
    pub seed: u64,
    pub parameters: Parameters,
}

#[derive(Debug, Clone)]
pub struct WcstRun {
    pub stats: WcstStats,
    pub events: Vec<EventRecord>,
    pub graph: KnowledgeGraph,
}

/// Sorts cards until nine runs of five are completed or `cap` cards were presented.
pub fn run_wcst(config: &WcstConfig) -> Result<WcstRun> {
    config.parameters.validate()?;
    let graph = KnowledgeGraph::new(wcst_schema(), wcst_actions(), config.parameters, config.seed)?;
    let mut agent = Agent::new(graph);
    let mut state = WcstState::new(config.seed);
    let mut rule_changes = Vec::new();
    let mut per_step_weights = Vec::new();

    while !state.is_complete() && state.presented_count < config.cap {
        let card = state.deal()?;
        let presentation = agent.present(card.label(), wcst_percept(&card))?;
        let pile = pile_of(&presentation.chosen_action)?;
        let assignment = wcst_oracle(&mut state, &card, pile)?;
        let result = agent.reward(assignment.reward)?;
        per_step_weights.push(result.event.weights_after.clone());
        if let Some(rule) = assignment.completed_rule {
            rule_changes.push(RuleChange {
                presentation: state.presented_count,
                completed_rule: rule,
                next_rule: state.active_rule,
                weights: result.event.weights_after,
            });
        }
    }

    let graph = agent.graph().clone();
    let stats = WcstStats {
        completed: state.is_complete(),
        cards_presented: state.presented_count,
        completed_runs: state.completed_runs,
        rule_changes,
        per_step_weights,
        final_category_count: graph.len(),
        seed: config.seed,
        parameters: config.parameters,
    };
    Ok(WcstRun {
        stats,
        events: agent.history().to_vec(),
        graph,
    })
}
