use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::interval::IntervalVector;
use super::percept::Percept;

/// Identifier of an object category node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CategoryId(pub u64);

impl fmt::Display for CategoryId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "s{}", self.0)
    }
}

/// Supervisor feedback for an action.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Reward {
    Positive,
    Neutral,
    Negative,
}

impl Reward {
    /// Positive against negative, in either order.
    pub fn opposes(self, other: Reward) -> bool {
        matches!(
            (self, other),
            (Reward::Positive, Reward::Negative) | (Reward::Negative, Reward::Positive)
        )
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Reward::Positive => "positive",
            Reward::Neutral => "neutral",
            Reward::Negative => "negative",
        }
    }
}

impl fmt::Display for Reward {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Reward {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "positive" | "+" => Ok(Reward::Positive),
            "neutral" | "0" => Ok(Reward::Neutral),
            "negative" | "-" => Ok(Reward::Negative),
            other => Err(crate::Error::InvalidValue(format!("unknown reward `{other}`"))),
        }
    }
}

/// A stored `(action, reward)` pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Experience {
    pub action: String,
    pub reward: Reward,
}

/// An object category: per-feature interval vector sets plus action experiences.
///
/// `features[f]` is the set `C` of interval vectors for the schema's feature `f`;
/// occurrence probabilities are derived from the counts.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectCategory {
    id: CategoryId,
    features: Vec<Vec<IntervalVector>>,
    experiences: BTreeMap<String, Reward>,
}

impl ObjectCategory {
    pub fn from_percept(id: CategoryId, percept: &Percept) -> Self {
        Self {
            id,
            features: percept
                .vectors()
                .iter()
                .map(|v| vec![IntervalVector::from_point(v.values())])
                .collect(),
            experiences: BTreeMap::new(),
        }
    }

    /// Assembles a category from parts; callers are responsible for schema agreement.
    pub fn from_parts(
        id: CategoryId,
        features: Vec<Vec<IntervalVector>>,
        experiences: BTreeMap<String, Reward>,
    ) -> Self {
        Self {
            id,
            features,
            experiences,
        }
    }

    pub fn id(&self) -> CategoryId {
        self.id
    }

    pub(crate) fn set_id(&mut self, id: CategoryId) {
        self.id = id;
    }

    pub fn feature_sets(&self) -> &[Vec<IntervalVector>] {
        &self.features
    }

    pub fn feature_set(&self, feature: usize) -> &[IntervalVector] {
        &self.features[feature]
    }

    pub fn experiences(&self) -> &BTreeMap<String, Reward> {
        &self.experiences
    }

    pub fn experience(&self, action: &str) -> Option<Reward> {
        self.experiences.get(action).copied()
    }

    pub(crate) fn set_experience(&mut self, action: &str, reward: Reward) {
        self.experiences.insert(action.to_string(), reward);
    }

    /// Occurrence probability of interval vector `index` within feature `feature`.
    pub fn probability(&self, feature: usize, index: usize) -> f64 {
        let set = &self.features[feature];
        let total: u64 = set.iter().map(IntervalVector::count).sum();
        set[index].count() as f64 / total as f64
    }

    pub fn probabilities(&self, feature: usize) -> Vec<f64> {
        let set = &self.features[feature];
        let total: u64 = set.iter().map(IntervalVector::count).sum();
        set.iter().map(|c| c.count() as f64 / total as f64).collect()
    }

    /// Fit test: for every feature some interval vector must contain the percept's values.
    ///
    /// Returns the chosen interval vector index per feature. Among several containing
    /// vectors the one closest to the percept's degenerate form wins, then the lowest index.
    pub fn fits(&self, percept: &Percept) -> Option<Vec<usize>> {
        if percept.len() != self.features.len() {
            return None;
        }
        self.features
            .iter()
            .enumerate()
            .map(|(f, set)| {
                let values = percept.values(f);
                let mut best: Option<(usize, f64)> = None;
                for (i, c) in set.iter().enumerate() {
                    if !c.contains(values) {
                        continue;
                    }
                    let d = c.delta_to_point(values);
                    if best.is_none_or(|(_, bd)| d < bd) {
                        best = Some((i, d));
                    }
                }
                best.map(|(i, _)| i)
            })
            .collect()
    }

    pub(crate) fn absorb(&mut self, assignment: &[usize]) {
        for (f, &i) in assignment.iter().enumerate() {
            self.features[f][i].increment();
        }
    }

    /// Undoes one `absorb`. Vectors whose count would reach zero are dropped when the
    /// feature keeps at least one other vector; otherwise they are left in place.
    pub(crate) fn release(&mut self, assignment: &[usize]) {
        for (f, &i) in assignment.iter().enumerate() {
            let set = &mut self.features[f];
            if set[i].count() > 1 {
                set[i].decrement();
            } else if set.len() > 1 {
                set.remove(i);
            }
        }
    }
}
