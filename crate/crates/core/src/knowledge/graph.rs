use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::category::{CategoryId, ObjectCategory, Reward};
use super::interval::{IntervalVector, EPSILON};
use super::params::{FitOrder, Parameters};
use super::percept::{FeatureSchema, Percept};
use super::similarity::{attribute_similarities, weighted_similarity};
use super::weights::{AdaptationCase, AttributeWeights, WeightAdaptation};
use crate::error::{Error, Result};

/// Result of presenting a percept to the graph.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub category: CategoryId,
    pub is_new: bool,
    /// Interval vector index per feature that absorbed the percept.
    pub assignment: Vec<usize>,
}

/// What reward processing did to the stored experience.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", tag = "kind", content = "category")]
pub enum RewardOutcome {
    Updated,
    Unchanged,
    Split(CategoryId),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MergeEvent {
    pub into: CategoryId,
    pub from: [CategoryId; 2],
    pub similarity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SplitEvent {
    pub from: CategoryId,
    pub into: CategoryId,
}

/// Everything one `record_reward` call changed.
#[derive(Debug, Clone, PartialEq)]
pub struct RewardReport {
    pub outcome: RewardOutcome,
    pub splits: Vec<SplitEvent>,
    pub merges: Vec<MergeEvent>,
    pub adaptations: Vec<WeightAdaptation>,
}

fn pair_key(a: CategoryId, b: CategoryId) -> (CategoryId, CategoryId) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// The symbolic knowledge base: categories, attribute weights, parameters and the
/// pairwise similarity cache.
///
/// All mutation goes through `&mut self`; a graph is a single-writer state machine
/// and is `Send + Sync` so it can move between threads.
#[derive(Debug, Clone)]
pub struct KnowledgeGraph {
    schema: FeatureSchema,
    actions: Vec<String>,
    params: Parameters,
    weights: AttributeWeights,
    categories: BTreeMap<CategoryId, ObjectCategory>,
    similarities: BTreeMap<(CategoryId, CategoryId), f64>,
    /// Per-attribute similarities behind `similarities`; they do not depend on weights.
    attribute_cache: BTreeMap<(CategoryId, CategoryId), Vec<f64>>,
    next_id: u64,
    seed: u64,
    rng: ChaCha8Rng,
}

impl PartialEq for KnowledgeGraph {
    fn eq(&self, other: &Self) -> bool {
        self.schema == other.schema
            && self.actions == other.actions
            && self.params == other.params
            && self.weights == other.weights
            && self.categories == other.categories
            && self.similarities == other.similarities
            && self.next_id == other.next_id
            && self.seed == other.seed
            && self.rng.get_word_pos() == other.rng.get_word_pos()
    }
}

impl KnowledgeGraph {
    pub fn new(schema: FeatureSchema, actions: Vec<String>, params: Parameters, seed: u64) -> Result<Self> {
        params.validate()?;
        if actions.is_empty() {
            return Err(Error::Config("action set must not be empty".into()));
        }
        for (i, a) in actions.iter().enumerate() {
            if a.is_empty() || actions[..i].contains(a) {
                return Err(Error::Config(format!("invalid or duplicate action `{a}`")));
            }
        }
        let weights = AttributeWeights::uniform(schema.len());
        Ok(Self {
            schema,
            actions,
            params,
            weights,
            categories: BTreeMap::new(),
            similarities: BTreeMap::new(),
            attribute_cache: BTreeMap::new(),
            next_id: 1,
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    #[allow(clippy::too_many_arguments)]
    pub(crate) fn from_parts(
        schema: FeatureSchema,
        actions: Vec<String>,
        params: Parameters,
        weights: AttributeWeights,
        categories: BTreeMap<CategoryId, ObjectCategory>,
        similarities: BTreeMap<(CategoryId, CategoryId), f64>,
        next_id: u64,
        seed: u64,
        word_pos: u128,
    ) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_word_pos(word_pos);
        let mut graph = Self {
            schema,
            actions,
            params,
            weights,
            categories,
            similarities,
            attribute_cache: BTreeMap::new(),
            next_id,
            seed,
            rng,
        };
        let complete = graph.similarities_complete();
        graph.rebuild_attribute_cache();
        if !complete {
            graph.reweigh();
        }
        graph
    }

    pub fn schema(&self) -> &FeatureSchema {
        &self.schema
    }

    pub fn actions(&self) -> &[String] {
        &self.actions
    }

    pub fn params(&self) -> &Parameters {
        &self.params
    }

    pub fn weights(&self) -> &AttributeWeights {
        &self.weights
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub(crate) fn rng_word_pos(&self) -> u128 {
        self.rng.get_word_pos()
    }

    pub(crate) fn next_id(&self) -> u64 {
        self.next_id
    }

    pub fn len(&self) -> usize {
        self.categories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.categories.is_empty()
    }

    pub fn categories(&self) -> impl Iterator<Item = &ObjectCategory> {
        self.categories.values()
    }

    pub fn category(&self, id: CategoryId) -> Option<&ObjectCategory> {
        self.categories.get(&id)
    }

    pub fn category_ids(&self) -> Vec<CategoryId> {
        self.categories.keys().copied().collect()
    }

    /// Cached σ(j, k) for two distinct categories.
    pub fn similarity(&self, j: CategoryId, k: CategoryId) -> Option<f64> {
        self.similarities.get(&pair_key(j, k)).copied()
    }

    /// All cached similarities keyed by `(lower id, higher id)`.
    pub fn similarities(&self) -> &BTreeMap<(CategoryId, CategoryId), f64> {
        &self.similarities
    }

    /// Maximum attainable |σ|: the weight total.
    pub fn similarity_bound(&self) -> f64 {
        self.weights.sum()
    }

    /// Adds a category built from explicit parts, e.g. to seed a fixture graph.
    pub fn insert_category(
        &mut self,
        features: Vec<Vec<IntervalVector>>,
        experiences: BTreeMap<String, Reward>,
    ) -> Result<CategoryId> {
        if features.len() != self.schema.len() {
            return Err(Error::DimensionMismatch {
                expected: self.schema.len(),
                actual: features.len(),
            });
        }
        for (set, def) in features.iter().zip(self.schema.features()) {
            if set.is_empty() {
                return Err(Error::MissingFeature(def.id.clone()));
            }
            if let Some(bad) = set.iter().find(|c| c.arity() != def.arity()) {
                return Err(Error::ArityMismatch {
                    feature: def.id.clone(),
                    expected: def.arity(),
                    actual: bad.arity(),
                });
            }
        }
        if let Some(a) = experiences.keys().find(|a| !self.actions.contains(a)) {
            return Err(Error::UnknownAction(a.clone()));
        }
        let id = self.allocate_id();
        self.categories
            .insert(id, ObjectCategory::from_parts(id, features, experiences));
        self.refresh_row(id);
        Ok(id)
    }

    fn allocate_id(&mut self) -> CategoryId {
        let id = CategoryId(self.next_id);
        self.next_id += 1;
        id
    }

    fn action_index(&self, action: &str) -> Result<usize> {
        self.actions
            .iter()
            .position(|a| a == action)
            .ok_or_else(|| Error::UnknownAction(action.to_string()))
    }

    fn similarities_complete(&self) -> bool {
        let n = self.categories.len();
        if self.similarities.len() != n * n.saturating_sub(1) / 2 {
            return false;
        }
        self.similarities
            .keys()
            .all(|(a, b)| a < b && self.categories.contains_key(a) && self.categories.contains_key(b))
    }

    /// Recomputes every similarity involving `id` after that category changed.
    fn refresh_row(&mut self, id: CategoryId) {
        let Some(c) = self.categories.get(&id) else {
            return;
        };
        let row: Vec<_> = self
            .categories
            .values()
            .filter(|k| k.id() != id)
            .map(|k| (pair_key(id, k.id()), attribute_similarities(c, k)))
            .collect();
        for (key, sims) in row {
            self.similarities.insert(key, weighted_similarity(&sims, &self.weights));
            self.attribute_cache.insert(key, sims);
        }
    }

    fn rebuild_attribute_cache(&mut self) {
        self.attribute_cache.clear();
        let cats: Vec<&ObjectCategory> = self.categories.values().collect();
        for (i, j) in cats.iter().enumerate() {
            for k in &cats[i + 1..] {
                self.attribute_cache
                    .insert((j.id(), k.id()), attribute_similarities(j, k));
            }
        }
    }

    /// Recomputes σ for every pair from the cached per-attribute similarities.
    fn reweigh(&mut self) {
        let aligned = self.similarities.len() == self.attribute_cache.len()
            && self.similarities.keys().eq(self.attribute_cache.keys());
        if aligned {
            for (slot, sims) in self.similarities.values_mut().zip(self.attribute_cache.values()) {
                *slot = weighted_similarity(sims, &self.weights);
            }
        } else {
            self.similarities = self
                .attribute_cache
                .iter()
                .map(|(&key, sims)| (key, weighted_similarity(sims, &self.weights)))
                .collect();
        }
    }

    fn drop_rows(&mut self, id: CategoryId) {
        self.similarities.retain(|(a, b), _| *a != id && *b != id);
        self.attribute_cache.retain(|(a, b), _| *a != id && *b != id);
    }

    /// Per-attribute similarities between two stored categories.
    pub fn attribute_similarities(&self, j: CategoryId, k: CategoryId) -> Result<Vec<f64>> {
        let cj = self.categories.get(&j).ok_or(Error::UnknownCategory(j))?;
        let ck = self.categories.get(&k).ok_or(Error::UnknownCategory(k))?;
        match self.attribute_cache.get(&pair_key(j, k)) {
            Some(sims) if j != k => Ok(sims.clone()),
            _ => Ok(attribute_similarities(cj, ck)),
        }
    }

    /// The category with the highest positive similarity to `c` (ties: lowest id).
    pub fn most_similar(&self, c: CategoryId) -> Option<CategoryId> {
        self.ranked_similar(c).first().map(|&(id, _)| id)
    }

    /// Categories with σ > 0 to `c`, most similar first, ties by ascending id.
    pub fn ranked_similar(&self, c: CategoryId) -> Vec<(CategoryId, f64)> {
        let mut ranked: Vec<(CategoryId, f64)> = self
            .categories
            .keys()
            .filter(|&&k| k != c)
            .filter_map(|&k| self.similarity(c, k).map(|s| (k, s)))
            .filter(|&(_, s)| s > 0.0)
            .collect();
        ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        ranked
    }

    /// Categories the percept fits, in the graph's fit order, with their assignments.
    pub fn fitting(&self, percept: &Percept) -> Vec<(CategoryId, Vec<usize>)> {
        let found = self
            .categories
            .values()
            .filter_map(|c| c.fits(percept).map(|a| (c.id(), a)));
        match self.params.fit_order {
            FitOrder::Oldest => found.collect(),
            FitOrder::Newest => {
                let mut v: Vec<_> = found.collect();
                v.reverse();
                v
            }
        }
    }

    /// The category `observe` would route the percept to, without mutating anything.
    pub fn resolve(&self, percept: &Percept) -> Option<(CategoryId, Vec<usize>)> {
        self.fitting(percept).into_iter().next()
    }

    /// Routes a percept into a fitting category, or creates a new one.
    pub fn observe(&mut self, percept: &Percept) -> Result<Observation> {
        percept.check_schema(&self.schema)?;
        if let Some((id, assignment)) = self.resolve(percept) {
            self.categories
                .get_mut(&id)
                .expect("resolved category exists")
                .absorb(&assignment);
            self.refresh_row(id);
            return Ok(Observation {
                category: id,
                is_new: false,
                assignment,
            });
        }
        let id = self.allocate_id();
        self.categories.insert(id, ObjectCategory::from_percept(id, percept));
        self.refresh_row(id);
        Ok(Observation {
            category: id,
            is_new: true,
            assignment: vec![0; self.schema.len()],
        })
    }

    /// Chooses an action for category `c`.
    ///
    /// With probability ρ_ra the choice is uniform over the whole action set. Otherwise:
    /// an action with a positive experience in `c`; else the first positively experienced
    /// action of a positively similar category (most similar first) that is not negative
    /// in `c` or in the most similar category; else a uniform pick among actions not
    /// negative in `c`, or among all actions if every one is.
    pub fn select_action(&mut self, c: CategoryId) -> Result<String> {
        let idx = self.select_action_index(c)?;
        Ok(self.actions[idx].clone())
    }

    fn select_action_index(&mut self, c: CategoryId) -> Result<usize> {
        let cat = self.categories.get(&c).ok_or(Error::UnknownCategory(c))?;
        let n = self.actions.len();
        if self.params.rho_ra > 0.0 && self.rng.gen_bool(self.params.rho_ra) {
            return Ok(self.rng.gen_range(0..n));
        }
        let in_c = |i: usize| cat.experience(&self.actions[i]);

        if let Some(i) = (0..n).find(|&i| in_c(i) == Some(Reward::Positive)) {
            return Ok(i);
        }

        let ranked = self.ranked_similar(c);
        if let Some(&(best, _)) = ranked.first() {
            let most = &self.categories[&best];
            for &(k, _) in &ranked {
                let other = &self.categories[&k];
                let hit = (0..n).find(|&i| {
                    let a = &self.actions[i];
                    other.experience(a) == Some(Reward::Positive)
                        && in_c(i) != Some(Reward::Negative)
                        && most.experience(a) != Some(Reward::Negative)
                });
                if let Some(i) = hit {
                    return Ok(i);
                }
            }
        }

        let open: Vec<usize> = (0..n).filter(|&i| in_c(i) != Some(Reward::Negative)).collect();
        if open.is_empty() {
            Ok(self.rng.gen_range(0..n))
        } else {
            Ok(open[self.rng.gen_range(0..open.len())])
        }
    }

    /// Processes the supervisor's reward for `action` taken on `percept`, which was
    /// observed into category `c` during this interaction.
    pub fn record_reward(
        &mut self,
        c: CategoryId,
        percept: &Percept,
        action: &str,
        reward: Reward,
    ) -> Result<RewardReport> {
        percept.check_schema(&self.schema)?;
        self.action_index(action)?;
        let stored = self
            .categories
            .get(&c)
            .ok_or(Error::UnknownCategory(c))?
            .experience(action);

        let mut report = RewardReport {
            outcome: RewardOutcome::Unchanged,
            splits: Vec::new(),
            merges: Vec::new(),
            adaptations: Vec::new(),
        };

        match stored {
            None => {
                let contradicted = self.most_similar(c).filter(|&m| {
                    self.categories[&m]
                        .experience(action)
                        .is_some_and(|r| r.opposes(reward))
                });
                if let Some(m) = contradicted {
                    report.adaptations.extend(self.adapt_weights(
                        AdaptationCase::ContradictingFirstExperience,
                        c,
                        m,
                    )?);
                }
                self.categories.get_mut(&c).unwrap().set_experience(action, reward);
                report.outcome = RewardOutcome::Updated;
            }
            Some(s) if s == reward => {}
            Some(Reward::Neutral) => {
                self.categories.get_mut(&c).unwrap().set_experience(action, reward);
                report.outcome = RewardOutcome::Updated;
            }
            Some(_) if reward == Reward::Neutral => {}
            Some(_) => {
                let new_id = self.split(c, percept, action, reward);
                report.outcome = RewardOutcome::Split(new_id);
                report.splits.push(SplitEvent { from: c, into: new_id });
                report
                    .adaptations
                    .extend(self.adapt_weights(AdaptationCase::Split, c, new_id)?);
            }
        }

        self.refresh_row(c);
        let (merges, adaptations) = self.merge_pass_inner();
        report.merges = merges;
        report.adaptations.extend(adaptations);
        Ok(report)
    }

    fn split(&mut self, c: CategoryId, percept: &Percept, action: &str, reward: Reward) -> CategoryId {
        let cat = self.categories.get_mut(&c).expect("checked by caller");
        if let Some(assignment) = cat.fits(percept) {
            cat.release(&assignment);
        }
        let id = self.allocate_id();
        let mut fresh = ObjectCategory::from_percept(id, percept);
        fresh.set_experience(action, reward);
        self.categories.insert(id, fresh);
        self.refresh_row(c);
        self.refresh_row(id);
        id
    }

    /// Adapts the attribute weights for `case` between categories `j` and `k`, then
    /// refreshes every cached similarity.
    pub fn adapt_weights(
        &mut self,
        case: AdaptationCase,
        j: CategoryId,
        k: CategoryId,
    ) -> Result<Option<WeightAdaptation>> {
        if j == k {
            return Err(Error::InvalidValue(
                "weight adaptation needs two distinct categories".into(),
            ));
        }
        let sims = self.attribute_similarities(j, k)?;
        let adaptation = self.weights.adapt(case, &sims, self.params.delta_aw);
        if adaptation.is_some() {
            self.reweigh();
        }
        Ok(adaptation)
    }

    fn mergeable(&self, j: &ObjectCategory, k: &ObjectCategory) -> bool {
        !j.experiences()
            .iter()
            .any(|(a, r)| k.experience(a).is_some_and(|o| o.opposes(*r)))
    }

    /// The most similar pair with σ ≥ θ_mc that holds no opposed experiences.
    pub fn merge_candidate(&self) -> Option<(CategoryId, CategoryId, f64)> {
        let mut best: Option<(CategoryId, CategoryId, f64)> = None;
        for (&(j, k), &s) in &self.similarities {
            if s < self.params.theta_mc {
                continue;
            }
            if best.is_some_and(|(_, _, b)| s <= b) {
                continue;
            }
            if self.mergeable(&self.categories[&j], &self.categories[&k]) {
                best = Some((j, k, s));
            }
        }
        best
    }

    /// Merges categories until no eligible pair remains.
    pub fn merge_pass(&mut self) -> Vec<MergeEvent> {
        self.merge_pass_inner().0
    }

    fn merge_pass_inner(&mut self) -> (Vec<MergeEvent>, Vec<WeightAdaptation>) {
        let mut merges = Vec::new();
        let mut adaptations = Vec::new();
        while let Some((j, k, similarity)) = self.merge_candidate() {
            let sims = self.attribute_cache[&(j, k)].clone();
            let into = self.merge(j, k);
            merges.push(MergeEvent {
                into,
                from: [j, k],
                similarity,
            });
            if let Some(a) = self.weights.adapt(AdaptationCase::Merged, &sims, self.params.delta_aw) {
                adaptations.push(a);
            }
            self.refresh_row(into);
            self.reweigh();
        }
        (merges, adaptations)
    }

    fn merge(&mut self, j: CategoryId, k: CategoryId) -> CategoryId {
        let cj = self.categories.remove(&j).expect("candidate exists");
        let ck = self.categories.remove(&k).expect("candidate exists");
        self.drop_rows(j);
        self.drop_rows(k);

        let features = cj
            .feature_sets()
            .iter()
            .zip(ck.feature_sets())
            .map(|(a, b)| {
                let mut set: Vec<IntervalVector> = a.iter().chain(b).cloned().collect();
                fold_close_vectors(&mut set, self.params.theta_mf);
                set
            })
            .collect();

        let mut experiences = cj.experiences().clone();
        for (a, &r) in ck.experiences() {
            match experiences.get(a) {
                Some(&existing) if existing != Reward::Neutral => {}
                _ => {
                    experiences.insert(a.clone(), r);
                }
            }
        }

        let into = j.max(k);
        let mut merged = ObjectCategory::from_parts(into, features, experiences);
        merged.set_id(into);
        self.categories.insert(into, merged);
        into
    }

    /// Checks the structural invariants; returns a description of the first violation.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        let total = self.weights.sum();
        let expected = self.schema.attribute_count() as f64;
        if (total - expected).abs() > 1e-9 {
            return Err(format!("weight sum {total} != {expected}"));
        }
        if let Some(w) = self.weights.values().iter().find(|w| **w < 0.0) {
            return Err(format!("negative weight {w}"));
        }
        if !self.similarities_complete() {
            return Err("similarity cache incomplete".into());
        }
        for c in self.categories.values() {
            for f in 0..self.schema.len() {
                let p: f64 = c.probabilities(f).iter().sum();
                if (p - 1.0).abs() > 1e-9 {
                    return Err(format!("{}: probabilities of feature {f} sum to {p}", c.id()));
                }
            }
        }
        for (&(j, k), &s) in &self.similarities {
            let fresh = weighted_similarity(
                &attribute_similarities(&self.categories[&j], &self.categories[&k]),
                &self.weights,
            );
            if fresh != s {
                return Err(format!("stale similarity for {j}, {k}: cached {s}, actual {fresh}"));
            }
        }
        if let Some((j, k, s)) = self.merge_candidate() {
            return Err(format!("{j} and {k} still mergeable at σ = {s}"));
        }
        Ok(())
    }
}

/// Repeatedly folds the closest pair of interval vectors with Δ ≤ `threshold` into their
/// hull (ties: lowest indices) until no such pair remains.
fn fold_close_vectors(set: &mut Vec<IntervalVector>, threshold: f64) {
    loop {
        let mut best: Option<(usize, usize, f64)> = None;
        for i in 0..set.len() {
            for l in i + 1..set.len() {
                let d = set[i].delta(&set[l]);
                if d <= threshold + EPSILON && best.is_none_or(|(_, _, bd)| d < bd) {
                    best = Some((i, l, d));
                }
            }
        }
        let Some((i, l, _)) = best else {
            return;
        };
        let other = set.remove(l);
        set[i] = set[i].fold(&other);
    }
}
