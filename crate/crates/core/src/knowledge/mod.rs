//! Symbolic knowledge management: fit testing, similarity calculus, action
//! selection, reward processing, merging/splitting and weight adaptation.

mod agent;
mod category;
mod document;
mod graph;
mod interval;
mod params;
mod percept;
pub mod similarity;
mod weights;

pub use agent::{Agent, EventRecord, Presentation, RewardResult};
pub use category::{CategoryId, Experience, ObjectCategory, Reward};
pub use document::{CategoryDocument, GraphDocument, OrderedWeights, RngState, SimilarityEntry, DOCUMENT_VERSION};
pub use graph::{KnowledgeGraph, MergeEvent, Observation, RewardOutcome, RewardReport, SplitEvent};
pub use interval::{delta_distance, Interval, IntervalVector, EPSILON};
pub use params::{FitOrder, Parameters};
pub use percept::{normalize_percept, FeatureDef, FeatureSchema, FeatureVector, Percept, EXPERIENCE_ATTRIBUTE};
pub use similarity::{category_similarity, experience_similarity, feature_similarity, set_similarity};
pub use weights::{AdaptationCase, AttributeWeights, WeightAdaptation};
