use serde::{Deserialize, Serialize};

use super::category::{CategoryId, Reward};
use super::document::OrderedWeights;
use super::graph::{KnowledgeGraph, MergeEvent, Observation, RewardOutcome, SplitEvent};
use super::percept::Percept;
use super::weights::WeightAdaptation;
use crate::error::{Error, Result};

/// One line of the event log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EventRecord {
    pub step: u64,
    pub percept_id: String,
    pub category_id: CategoryId,
    pub action: String,
    pub reward: Reward,
    pub merges: Vec<MergeEvent>,
    pub splits: Vec<SplitEvent>,
    pub weights_after: OrderedWeights,
}

/// Response to presenting a percept.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Presentation {
    pub category_id: CategoryId,
    pub is_new: bool,
    pub chosen_action: String,
    /// σ between the percept's category and every other category.
    pub similarities: Vec<(CategoryId, f64)>,
}

/// Result of rewarding the pending interaction.
#[derive(Debug, Clone, PartialEq)]
pub struct RewardResult {
    pub outcome: RewardOutcome,
    pub adaptations: Vec<WeightAdaptation>,
    pub event: EventRecord,
}

#[derive(Debug, Clone, PartialEq)]
struct Pending {
    percept_id: String,
    percept: Percept,
    observation: Observation,
    action: String,
}

/// Strict two-phase teaching loop over a graph: `present` then `reward`, alternating.
#[derive(Debug, Clone)]
pub struct Agent {
    graph: KnowledgeGraph,
    pending: Option<Pending>,
    history: Vec<EventRecord>,
}

impl Agent {
    pub fn new(graph: KnowledgeGraph) -> Self {
        Self {
            graph,
            pending: None,
            history: Vec::new(),
        }
    }

    pub fn graph(&self) -> &KnowledgeGraph {
        &self.graph
    }

    pub fn history(&self) -> &[EventRecord] {
        &self.history
    }

    pub fn has_pending(&self) -> bool {
        self.pending.is_some()
    }

    pub fn pending_action(&self) -> Option<&str> {
        self.pending.as_ref().map(|p| p.action.as_str())
    }

    /// Replaces the graph and clears history; rejected while an interaction is pending.
    pub fn replace_graph(&mut self, graph: KnowledgeGraph) -> Result<()> {
        if self.pending.is_some() {
            return Err(Error::Conflict("an interaction is pending".into()));
        }
        self.graph = graph;
        self.history.clear();
        Ok(())
    }

    pub fn into_graph(self) -> KnowledgeGraph {
        self.graph
    }

    /// Observes the percept and picks an action; the interaction stays pending until rewarded.
    pub fn present(&mut self, percept_id: impl Into<String>, percept: Percept) -> Result<Presentation> {
        if self.pending.is_some() {
            return Err(Error::Conflict("reward the pending interaction first".into()));
        }
        let observation = self.graph.observe(&percept)?;
        let action = self.graph.select_action(observation.category)?;
        let c = observation.category;
        let similarities = self
            .graph
            .category_ids()
            .into_iter()
            .filter(|&k| k != c)
            .filter_map(|k| self.graph.similarity(c, k).map(|s| (k, s)))
            .collect();
        let presentation = Presentation {
            category_id: c,
            is_new: observation.is_new,
            chosen_action: action.clone(),
            similarities,
        };
        self.pending = Some(Pending {
            percept_id: percept_id.into(),
            percept,
            observation,
            action,
        });
        Ok(presentation)
    }

    pub fn reward(&mut self, reward: Reward) -> Result<RewardResult> {
        let pending = self
            .pending
            .take()
            .ok_or_else(|| Error::Conflict("no pending interaction".into()))?;
        let report =
            match self
                .graph
                .record_reward(pending.observation.category, &pending.percept, &pending.action, reward)
            {
                Ok(r) => r,
                Err(e) => {
                    self.pending = Some(pending);
                    return Err(e);
                }
            };
        let event = EventRecord {
            step: self.history.len() as u64 + 1,
            percept_id: pending.percept_id,
            category_id: pending.observation.category,
            action: pending.action,
            reward,
            merges: report.merges,
            splits: report.splits,
            weights_after: OrderedWeights::of(self.graph.schema(), self.graph.weights()),
        };
        self.history.push(event.clone());
        Ok(RewardResult {
            outcome: report.outcome,
            adaptations: report.adaptations,
            event,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::knowledge::params::Parameters;
    use crate::knowledge::percept::{FeatureDef, FeatureSchema};

    fn agent() -> Agent {
        let schema = FeatureSchema::new(vec![FeatureDef::new("color", ["red", "green"])]).unwrap();
        Agent::new(KnowledgeGraph::new(schema, vec!["a".into(), "b".into()], Parameters::default(), 3).unwrap())
    }

    #[test]
    fn strict_alternation() {
        let mut a = agent();
        let p = Percept::from_values(a.graph().schema(), &[vec![1.0, 0.0]]).unwrap();
        assert!(matches!(a.reward(Reward::Positive), Err(Error::Conflict(_))));
        let first = a.present("p1", p.clone()).unwrap();
        assert!(first.is_new);
        assert!(matches!(a.present("p2", p.clone()), Err(Error::Conflict(_))));
        let r = a.reward(Reward::Neutral).unwrap();
        assert_eq!(r.outcome, RewardOutcome::Updated);
        assert!(r.event.merges.is_empty());
        assert!(matches!(a.reward(Reward::Neutral), Err(Error::Conflict(_))));
        let second = a.present("p1", p).unwrap();
        assert!(!second.is_new);
        assert_eq!(second.category_id, first.category_id);
        a.reward(Reward::Positive).unwrap();
        assert_eq!(a.history().len(), 2);
        assert_eq!(a.history()[1].step, 2);
    }
}
