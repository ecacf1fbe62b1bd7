//! Oracles and random operation sequences shared by the invariant and acceptance suites.
#![allow(dead_code)]

use objcat::features::*;
use objcat::knowledge::*;
use objcat::scenarios::{example_actions, example_schema};
use proptest::prelude::*;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Per-characteristic gap between two interval vectors, summed.
pub fn oracle_delta(a: &IntervalVector, b: &IntervalVector) -> f64 {
    a.intervals()
        .iter()
        .zip(b.intervals())
        .map(|(x, y)| (y.lo() - x.hi()).max(x.lo() - y.hi()).max(0.0))
        .sum()
}

pub fn oracle_probabilities(set: &[IntervalVector]) -> Vec<f64> {
    let total: u64 = set.iter().map(|c| c.count()).sum();
    set.iter().map(|c| c.count() as f64 / total as f64).collect()
}

pub fn oracle_directed(small: &[IntervalVector], large: &[IntervalVector]) -> f64 {
    let (ps, pl) = (oracle_probabilities(small), oracle_probabilities(large));
    let mut total = 0.0;
    for (i, s) in small.iter().enumerate() {
        let mut best = f64::NEG_INFINITY;
        for (l, c) in large.iter().enumerate() {
            best = best.max((1.0 - oracle_delta(s, c)) * ps[i] * pl[l]);
        }
        total += best;
    }
    total
}

pub fn oracle_feature_similarity(a: &[IntervalVector], b: &[IntervalVector]) -> f64 {
    if a.len() < b.len() {
        oracle_directed(a, b)
    } else if b.len() < a.len() {
        oracle_directed(b, a)
    } else {
        (oracle_directed(a, b) + oracle_directed(b, a)) / 2.0
    }
}

/// Raw percepts on a 0.1 grid so that repeats and near-repeats are common.
pub fn raw_percept() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (prop::collection::vec(0u8..=10, 4), 0u8..=10).prop_filter_map("all-zero colour", |(c, f)| {
        if c.iter().all(|&v| v == 0) {
            return None;
        }
        let color = c.iter().map(|&v| f64::from(v) / 10.0).collect();
        let form = vec![f64::from(f) / 10.0, 1.0 - f64::from(f) / 10.0];
        Some((color, form))
    })
}

pub fn reward() -> impl Strategy<Value = Reward> {
    prop_oneof![3 => Just(Reward::Positive), 3 => Just(Reward::Negative), 1 => Just(Reward::Neutral)]
}

#[derive(Debug, Clone)]
pub enum Op {
    Interact {
        percept: (Vec<f64>, Vec<f64>),
        reward: Reward,
    },
    Adapt {
        case: u8,
        j: usize,
        k: usize,
    },
    RoundTrip,
}

pub fn op() -> impl Strategy<Value = Op> {
    prop_oneof![
        8 => (raw_percept(), reward()).prop_map(|(percept, reward)| Op::Interact { percept, reward }),
        1 => (0u8..3, 0usize..64, 0usize..64).prop_map(|(case, j, k)| Op::Adapt { case, j, k }),
        1 => Just(Op::RoundTrip),
    ]
}

pub fn parameters() -> impl Strategy<Value = Parameters> {
    (
        prop_oneof![Just(0.0), 0.0f64..0.5],
        0.0f64..0.6,
        -1.0f64..3.5,
        0.0f64..0.6,
        prop_oneof![Just(FitOrder::Oldest), Just(FitOrder::Newest)],
    )
        .prop_map(|(rho_ra, delta_aw, theta_mc, theta_mf, fit_order)| Parameters {
            rho_ra,
            delta_aw,
            theta_mc,
            theta_mf,
            fit_order,
        })
}

/// Applies `ops` and returns the final graph plus the chosen actions; checks every
/// invariant after each step.
pub fn run_ops(params: Parameters, seed: u64, ops: &[Op]) -> Result<(KnowledgeGraph, Vec<String>), TestCaseError> {
    let schema = example_schema();
    let mut g = KnowledgeGraph::new(schema.clone(), example_actions(), params, seed).unwrap();
    let mut actions = Vec::new();
    for op in ops {
        match op {
            Op::Interact { percept, reward } => {
                let p = Percept::from_values(&schema, &[percept.0.clone(), percept.1.clone()]).unwrap();
                for f in 0..p.len() {
                    prop_assert!((p.values(f).iter().sum::<f64>() - 1.0).abs() < 1e-9);
                }
                let obs = g.observe(&p).unwrap();
                // fit stability: the percept now fits where it was routed
                prop_assert_eq!(g.resolve(&p).map(|(c, _)| c), Some(obs.category));
                let action = g.select_action(obs.category).unwrap();
                g.record_reward(obs.category, &p, &action, *reward).unwrap();
                actions.push(action);
            }
            Op::Adapt { case, j, k } => {
                let ids = g.category_ids();
                if ids.len() >= 2 {
                    let (a, b) = (ids[j % ids.len()], ids[k % ids.len()]);
                    let case = [
                        AdaptationCase::Merged,
                        AdaptationCase::Split,
                        AdaptationCase::ContradictingFirstExperience,
                    ][*case as usize];
                    if a != b {
                        g.adapt_weights(case, a, b).unwrap();
                        g.merge_pass();
                    }
                }
            }
            Op::RoundTrip => {
                let back = KnowledgeGraph::from_json(&g.to_json()).unwrap();
                prop_assert_eq!(&back, &g);
                g = back;
            }
        }
        check(&g)?;
    }
    Ok((g, actions))
}

pub fn check(g: &KnowledgeGraph) -> Result<(), TestCaseError> {
    if let Err(msg) = g.check_invariants() {
        return Err(TestCaseError::fail(msg));
    }
    let weights = g.weights();
    let bound = weights.sum();
    prop_assert!((bound - g.schema().attribute_count() as f64).abs() < 1e-9);
    prop_assert!(weights.values().iter().all(|&w| w >= 0.0));
    let cats: Vec<&ObjectCategory> = g.categories().collect();
    for (x, j) in cats.iter().enumerate() {
        for k in &cats[x + 1..] {
            let forward = category_similarity(j, k, weights);
            let backward = category_similarity(k, j, weights);
            prop_assert_eq!(forward, backward);
            prop_assert!(forward.abs() <= bound + 1e-9);
            prop_assert_eq!(g.similarity(j.id(), k.id()), Some(forward));
            for f in 0..g.schema().len() {
                let sf = feature_similarity(j, k, f);
                prop_assert!((-1.0 - 1e-12..=1.0 + 1e-12).contains(&sf), "σ_f = {}", sf);
                let oracle = oracle_feature_similarity(j.feature_set(f), k.feature_set(f));
                prop_assert!((sf - oracle).abs() < 1e-12, "σ_f {} vs oracle {}", sf, oracle);
                for a in j.feature_set(f) {
                    for b in k.feature_set(f) {
                        let d = delta_distance(a, b).unwrap();
                        prop_assert!((0.0..=2.0 + 1e-12).contains(&d));
                        prop_assert!((d - oracle_delta(a, b)).abs() < 1e-12);
                    }
                }
            }
            let se = experience_similarity(j, k);
            prop_assert!((-1.0..=1.0).contains(&se));
        }
    }
    Ok(())
}

/// Smallest circle among all 2- and 3-point support circles that contains every point.
pub fn brute_force_circle(points: &[Point]) -> f64 {
    if points.len() == 1 {
        return 0.0;
    }
    let covers = |c: &Circle| points.iter().all(|&p| c.center.distance(p) <= c.radius + 1e-9);
    let mut best = f64::INFINITY;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            let c = Circle::through_two(points[i], points[j]);
            if c.radius < best && covers(&c) {
                best = c.radius;
            }
            for k in j + 1..points.len() {
                if let Some(c) = Circle::through_three(points[i], points[j], points[k]) {
                    if c.radius < best && covers(&c) {
                        best = c.radius;
                    }
                }
            }
        }
    }
    best
}

pub fn random_points(rng: &mut ChaCha8Rng, n: usize) -> Vec<Point> {
    (0..n)
        .map(|_| Point::new(rng.gen_range(-50.0..50.0), rng.gen_range(-50.0..50.0)))
        .collect()
}

pub fn paper_quarter_raster() -> Raster {
    let b_quarter = [
        [0, 0, 0, 0, 0],
        [130, 0, 0, 0, 0],
        [134, 137, 0, 0, 0],
        [138, 135, 139, 0, 0],
        [140, 138, 140, 0, 0],
    ];
    Raster::from_fn(10, 10, |x, y| {
        if (x, y) == (0, 0) || (x, y) == (9, 9) {
            Some(Chroma::new(50.0, 50.0))
        } else if x >= 5 && y < 5 && b_quarter[y][x - 5] > 0 {
            Some(Chroma::new(128.0, b_quarter[y][x - 5] as f64))
        } else {
            None
        }
    })
}

pub fn finite_difference_gradient(m: &Mlp, data: &[LabeledSample]) -> Vec<Vec<f64>> {
    let h = 1e-6;
    let mut out = Vec::new();
    for l in 0..m.weights().len() {
        let mut layer = Vec::new();
        for i in 0..m.weights()[l].len() {
            let mut plus = m.clone();
            let mut w = plus.weights().to_vec();
            w[l][i] += h;
            plus.set_weights(w).unwrap();
            let mut minus = m.clone();
            let mut w = minus.weights().to_vec();
            w[l][i] -= h;
            minus.set_weights(w).unwrap();
            layer.push((plus.loss(data).unwrap() - minus.loss(data).unwrap()) / (2.0 * h));
        }
        out.push(layer);
    }
    out
}
