use serde::{Deserialize, Serialize};

/// Why a weight adaptation fires.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum AdaptationCase {
    /// Two categories were merged: the most divergent attribute loses weight.
    Merged,
    /// A category was split: the attribute most responsible for the similarity loses weight.
    Split,
    /// A first experience contradicted the most similar category; handled like `Split`.
    ContradictingFirstExperience,
}

/// Attribute weights: one per feature in schema order, the experience weight last.
///
/// Every weight starts at 1, so the total is `M + 1` and stays there.
#[derive(Debug, Clone, PartialEq)]
pub struct AttributeWeights {
    values: Vec<f64>,
}

/// Record of a single adaptation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct WeightAdaptation {
    pub case: AdaptationCase,
    /// Attribute index (features first, experience last).
    pub target: usize,
    /// Amount actually removed from the target.
    pub amount: f64,
}

impl AttributeWeights {
    /// All-ones weights for `features` features plus experience.
    pub fn uniform(features: usize) -> Self {
        Self {
            values: vec![1.0; features + 1],
        }
    }

    pub(crate) fn from_values(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn feature(&self, index: usize) -> f64 {
        self.values[index]
    }

    pub fn experience(&self) -> f64 {
        *self.values.last().expect("weights always include experience")
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Picks the target attribute for `case` given the per-attribute similarities.
    ///
    /// Merges target the lowest similarity; splits and contradictions target the highest
    /// weighted contribution. Ties go to the lowest attribute index.
    pub fn target(&self, case: AdaptationCase, attribute_sims: &[f64]) -> usize {
        let score = |i: usize| match case {
            AdaptationCase::Merged => -attribute_sims[i],
            AdaptationCase::Split | AdaptationCase::ContradictingFirstExperience => self.values[i] * attribute_sims[i],
        };
        let mut best = 0;
        for i in 1..self.values.len() {
            if score(i) > score(best) {
                best = i;
            }
        }
        best
    }

    /// Moves up to `step` weight from `target` evenly onto every other attribute.
    pub fn shift_from(&mut self, target: usize, step: f64) -> f64 {
        let n = self.values.len();
        if n < 2 || step <= 0.0 {
            return 0.0;
        }
        let amount = step.min(self.values[target]);
        if amount <= 0.0 {
            return 0.0;
        }
        let share = amount / (n - 1) as f64;
        for (i, w) in self.values.iter_mut().enumerate() {
            if i == target {
                *w -= amount;
            } else {
                *w += share;
            }
        }
        amount
    }

    /// Applies one adaptation; returns `None` when nothing moved.
    pub fn adapt(&mut self, case: AdaptationCase, attribute_sims: &[f64], step: f64) -> Option<WeightAdaptation> {
        debug_assert_eq!(attribute_sims.len(), self.values.len());
        let target = self.target(case, attribute_sims);
        let amount = self.shift_from(target, step);
        (amount > 0.0).then_some(WeightAdaptation { case, target, amount })
    }
}
