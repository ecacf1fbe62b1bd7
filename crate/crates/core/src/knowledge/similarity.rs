//! Similarity calculus between object categories.
//!
//! Category similarity is the weighted sum of one similarity per feature and an
//! experience similarity. A feature similarity sums, over the smaller interval-vector
//! set, the best `(1 - Δ) · P(c_j) · P(c_k)` match in the other set. When both sets have
//! the same cardinality the two directions can disagree, so their mean is used; this
//! keeps the measure exactly symmetric.

use std::collections::BTreeSet;

use super::category::{ObjectCategory, Reward};
use super::interval::IntervalVector;
use super::weights::AttributeWeights;

fn probabilities(set: &[IntervalVector]) -> Vec<f64> {
    let total: u64 = set.iter().map(IntervalVector::count).sum();
    set.iter().map(|c| c.count() as f64 / total as f64).collect()
}

/// One direction of the feature similarity sum, `small` playing the role of `C_j`.
fn directed(small: &[IntervalVector], p_small: &[f64], large: &[IntervalVector], p_large: &[f64]) -> f64 {
    small
        .iter()
        .zip(p_small)
        .map(|(cj, &pj)| {
            large
                .iter()
                .zip(p_large)
                .map(|(ck, &pk)| (1.0 - cj.delta(ck)) * pj * pk)
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .sum()
}

/// Feature similarity between two interval-vector sets of the same feature, in `[-1, 1]`.
pub fn set_similarity(a: &[IntervalVector], b: &[IntervalVector]) -> f64 {
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    let pa = probabilities(a);
    let pb = probabilities(b);
    match a.len().cmp(&b.len()) {
        std::cmp::Ordering::Less => directed(a, &pa, b, &pb),
        std::cmp::Ordering::Greater => directed(b, &pb, a, &pa),
        std::cmp::Ordering::Equal => 0.5 * (directed(a, &pa, b, &pb) + directed(b, &pb, a, &pa)),
    }
}

/// Similarity of two categories regarding feature `feature`.
pub fn feature_similarity(j: &ObjectCategory, k: &ObjectCategory, feature: usize) -> f64 {
    set_similarity(j.feature_set(feature), k.feature_set(feature))
}

/// Signed agreement ratio over the actions experienced by either category.
///
/// Equal non-neutral rewards score +1, opposed ones -1, anything else 0; the sum is
/// divided by the number of distinct actions. Zero when neither category has experiences.
pub fn experience_similarity(j: &ObjectCategory, k: &ObjectCategory) -> f64 {
    let actions: BTreeSet<&String> = j.experiences().keys().chain(k.experiences().keys()).collect();
    if actions.is_empty() {
        return 0.0;
    }
    let score: f64 = actions
        .iter()
        .map(|a| match (j.experience(a), k.experience(a)) {
            (Some(x), Some(y)) if x == y && x != Reward::Neutral => 1.0,
            (Some(x), Some(y)) if x.opposes(y) => -1.0,
            _ => 0.0,
        })
        .sum();
    score / actions.len() as f64
}

/// Per-attribute similarities: one per feature in schema order, experience last.
pub fn attribute_similarities(j: &ObjectCategory, k: &ObjectCategory) -> Vec<f64> {
    let mut sims: Vec<f64> = (0..j.feature_sets().len())
        .map(|f| feature_similarity(j, k, f))
        .collect();
    sims.push(experience_similarity(j, k));
    sims
}

/// Weighted category similarity σ(j, k).
pub fn category_similarity(j: &ObjectCategory, k: &ObjectCategory, weights: &AttributeWeights) -> f64 {
    weighted_similarity(&attribute_similarities(j, k), weights)
}

/// Σ ω·σ over per-attribute similarities.
pub fn weighted_similarity(sims: &[f64], weights: &AttributeWeights) -> f64 {
    sims.iter().zip(weights.values()).map(|(s, w)| w * s).sum()
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::knowledge::category::CategoryId;
    use crate::knowledge::interval::Interval;

    fn iv(bounds: &[(f64, f64)], count: u64) -> IntervalVector {
        IntervalVector::new(
            bounds.iter().map(|&(l, h)| Interval::new(l, h).unwrap()).collect(),
            count,
        )
        .unwrap()
    }

    fn with_experiences(pairs: &[(&str, Reward)]) -> ObjectCategory {
        ObjectCategory::from_parts(
            CategoryId(0),
            vec![vec![IntervalVector::from_point(&[1.0])]],
            pairs
                .iter()
                .map(|(a, r)| (a.to_string(), *r))
                .collect::<BTreeMap<_, _>>(),
        )
    }

    #[test]
    fn feature_similarity_hand_evaluation() {
        let cj = vec![iv(&[(1.0, 1.0), (0.0, 0.0), (0.0, 0.0), (0.0, 0.0)], 1)];
        let ck = vec![iv(&[(0.6, 0.8), (0.0, 0.0), (0.0, 0.0), (0.2, 0.4)], 1)];
        // Δ = 0.2 + 0.2 = 0.4
        assert!((set_similarity(&cj, &ck) - 0.6).abs() < 1e-12);
        assert_eq!(set_similarity(&cj, &ck), set_similarity(&ck, &cj));
    }

    #[test]
    fn identical_sets_are_fully_similar() {
        let c = vec![iv(&[(0.2, 0.3), (0.7, 0.8)], 4)];
        assert_eq!(set_similarity(&c, &c), 1.0);
    }

    #[test]
    fn maximal_distance_is_fully_dissimilar() {
        let cj = vec![IntervalVector::from_point(&[1.0, 0.0])];
        let ck = vec![IntervalVector::from_point(&[0.0, 1.0])];
        assert_eq!(set_similarity(&cj, &ck), -1.0);
    }

    #[test]
    fn smaller_set_drives_the_sum() {
        let cj = vec![IntervalVector::from_point(&[1.0, 0.0])];
        let ck = vec![
            IntervalVector::from_point(&[1.0, 0.0]),
            IntervalVector::from_point(&[0.0, 1.0]),
        ];
        // only cj's single vector is summed: max(1·1·½, -1·1·½) = ½
        assert!((set_similarity(&cj, &ck) - 0.5).abs() < 1e-12);
        assert!((set_similarity(&ck, &cj) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn equal_cardinality_is_symmetric() {
        let a = vec![
            IntervalVector::from_point(&[1.0, 0.0, 0.0]),
            IntervalVector::from_point(&[0.0, 1.0, 0.0]),
        ];
        let b = vec![
            IntervalVector::from_point(&[1.0, 0.0, 0.0]),
            IntervalVector::from_point(&[0.0, 0.5, 0.5]),
        ];
        assert_eq!(set_similarity(&a, &b), set_similarity(&b, &a));
    }

    #[test]
    fn experience_similarity_cases() {
        let pos = with_experiences(&[("Action1", Reward::Positive)]);
        let neg = with_experiences(&[("Action1", Reward::Negative)]);
        let two = with_experiences(&[("A", Reward::Positive), ("B", Reward::Positive)]);
        let one = with_experiences(&[("A", Reward::Positive)]);
        let none = with_experiences(&[]);
        assert_eq!(experience_similarity(&pos, &pos), 1.0);
        assert_eq!(experience_similarity(&pos, &neg), -1.0);
        assert_eq!(experience_similarity(&two, &one), 0.5);
        assert_eq!(experience_similarity(&one, &two), 0.5);
        assert_eq!(experience_similarity(&none, &none), 0.0);
        let neutral = with_experiences(&[("Action1", Reward::Neutral)]);
        assert_eq!(experience_similarity(&neutral, &neutral), 0.0);
    }

    #[test]
    fn weighted_sum() {
        let w = AttributeWeights::uniform(2);
        // σ_color = 0.6, σ_form = 1, σ_e = 0
        let j = ObjectCategory::from_parts(
            CategoryId(0),
            vec![
                vec![iv(&[(1.0, 1.0), (0.0, 0.0), (0.0, 0.0), (0.0, 0.0)], 1)],
                vec![IntervalVector::from_point(&[0.0, 1.0])],
            ],
            BTreeMap::new(),
        );
        let k = ObjectCategory::from_parts(
            CategoryId(1),
            vec![
                vec![iv(&[(0.6, 0.8), (0.0, 0.0), (0.0, 0.0), (0.2, 0.4)], 1)],
                vec![IntervalVector::from_point(&[0.0, 1.0])],
            ],
            BTreeMap::new(),
        );
        assert!((category_similarity(&j, &k, &w) - 1.6).abs() < 1e-12);
        assert_eq!(category_similarity(&j, &j, &w), 2.0);
    }
}
