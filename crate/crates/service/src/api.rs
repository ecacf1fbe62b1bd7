//! Request and response bodies. Field names are camelCase on the wire.

use std::collections::BTreeMap;
use std::path::PathBuf;

use objcat::harness::ScenarioKind;
use objcat::knowledge::{
    CategoryId, EventRecord, FeatureSchema, GraphDocument, KnowledgeGraph, MergeEvent, OrderedWeights, Parameters,
    Reward, RewardOutcome, SplitEvent, WeightAdaptation,
};
use objcat::scenarios::{ObjectKind, Variant};
use serde::{Deserialize, Serialize};

/// `POST /sessions`. Schema and actions may be omitted when a scenario is bound.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct CreateSessionRequest {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parameters: Option<Parameters>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub action_set: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feature_schema: Option<FeatureSchema>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<ScenarioKind>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CreateSessionResponse {
    pub session_id: String,
    pub scenario: Option<ScenarioKind>,
    pub parameters: Parameters,
    pub action_set: Vec<String>,
    pub feature_schema: FeatureSchema,
    pub seed: u64,
}

/// A WCST card by index: colour and form in 0..4, number in 1..=4.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CardBody {
    pub color: u8,
    pub form: u8,
    pub number: u8,
}

/// `POST /sessions/{id}/present`. Exactly one of `features`, `object` or `card`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct PresentRequest {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub percept_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub features: Option<BTreeMap<String, Vec<f64>>>,
    /// Example-bound sessions: object kind, e.g. `greenApple`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub object: Option<ObjectKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variant: Option<Variant>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// WCST-bound sessions.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub card: Option<CardBody>,
}

impl PresentRequest {
    pub fn features(features: BTreeMap<String, Vec<f64>>) -> Self {
        Self {
            features: Some(features),
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SimilarityView {
    pub category_id: CategoryId,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PresentResponse {
    pub percept_id: String,
    pub category_id: CategoryId,
    pub is_new: bool,
    pub chosen_action: String,
    pub similarities: Vec<SimilarityView>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RewardRequest {
    pub reward: Reward,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RewardResponse {
    pub outcome: RewardOutcome,
    pub merges: Vec<MergeEvent>,
    pub splits: Vec<SplitEvent>,
    pub weights_after: OrderedWeights,
    pub adaptations: Vec<WeightAdaptation>,
    pub event: EventRecord,
}

/// The interaction awaiting a reward.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PendingInteraction {
    pub percept_id: String,
    pub features: BTreeMap<String, Vec<f64>>,
    pub category_id: CategoryId,
    pub chosen_action: String,
}

/// Square σ matrix over `ids`; the diagonal is null.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityMatrix {
    pub ids: Vec<CategoryId>,
    pub values: Vec<Vec<Option<f64>>>,
}

impl SimilarityMatrix {
    pub fn of(graph: &KnowledgeGraph) -> Self {
        let ids = graph.category_ids();
        let values = ids
            .iter()
            .map(|&j| {
                ids.iter()
                    .map(|&k| if j == k { None } else { graph.similarity(j, k) })
                    .collect()
            })
            .collect();
        Self { ids, values }
    }
}

/// `GET /sessions/{id}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct InspectResponse {
    pub session_id: String,
    pub scenario: Option<ScenarioKind>,
    pub graph: GraphDocument,
    pub similarity_matrix: SimilarityMatrix,
    pub weights: OrderedWeights,
    pub history: Vec<EventRecord>,
    pub pending: Option<PendingInteraction>,
}

/// `GET /sessions/{id}/events?since=N` returns events with `step > N`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventsQuery {
    #[serde(default)]
    pub since: u64,
}

/// `POST /sessions/{id}/save`. Without a path the document is only returned inline.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SaveRequest {
    #[serde(default)]
    pub path: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaveResponse {
    pub path: Option<PathBuf>,
    pub graph: GraphDocument,
}

/// `POST /sessions/{id}/load`. Exactly one of `path` or `graph`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoadRequest {
    #[serde(default)]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub graph: Option<GraphDocument>,
}
