//! The apple / toy-block sorting scenario.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::knowledge::{CategoryId, FeatureDef, FeatureSchema, KnowledgeGraph, Percept, Reward};

pub const TOY_BOX: &str = "toyBox";
pub const FRUIT_BASKET: &str = "fruitBasket";
pub const RUBBISH_BIN: &str = "rubbishBin";

/// Ground-truth object kinds; hidden from the learner, which only sees percepts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum ObjectKind {
    GreenApple,
    RedApple,
    BrownApple,
    GreenBlock,
    RedBlock,
    YellowBlock,
}

impl ObjectKind {
    pub const ALL: [ObjectKind; 6] = [
        ObjectKind::GreenApple,
        ObjectKind::RedApple,
        ObjectKind::BrownApple,
        ObjectKind::GreenBlock,
        ObjectKind::RedBlock,
        ObjectKind::YellowBlock,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ObjectKind::GreenApple => "greenApple",
            ObjectKind::RedApple => "redApple",
            ObjectKind::BrownApple => "brownApple",
            ObjectKind::GreenBlock => "greenBlock",
            ObjectKind::RedBlock => "redBlock",
            ObjectKind::YellowBlock => "yellowBlock",
        }
    }

    /// Index into the color characteristics `[red, green, yellow, brown]`.
    fn color(self) -> usize {
        match self {
            ObjectKind::RedApple | ObjectKind::RedBlock => 0,
            ObjectKind::GreenApple | ObjectKind::GreenBlock => 1,
            ObjectKind::YellowBlock => 2,
            ObjectKind::BrownApple => 3,
        }
    }

    /// Index into the form characteristics `[rectangular, circular]`.
    fn form(self) -> usize {
        if self.is_apple() {
            1
        } else {
            0
        }
    }

    pub fn is_apple(self) -> bool {
        matches!(
            self,
            ObjectKind::GreenApple | ObjectKind::RedApple | ObjectKind::BrownApple
        )
    }

    /// Target group of the desired partition: 0 fresh apples, 1 brown apples, 2 blocks.
    pub fn target_group(self) -> usize {
        match self {
            ObjectKind::GreenApple | ObjectKind::RedApple => 0,
            ObjectKind::BrownApple => 1,
            _ => 2,
        }
    }
}

impl fmt::Display for ObjectKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ObjectKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ObjectKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidValue(format!("unknown object kind `{s}`")))
    }
}

/// Simulated feature quality.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Variant {
    /// Unit feature vectors.
    #[default]
    Exact,
    /// Dominant characteristic in `[0.7, 1]`, remainder spread over the others.
    Noisy,
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "exact" => Ok(Variant::Exact),
            "noisy" => Ok(Variant::Noisy),
            other => Err(Error::InvalidValue(format!("unknown variant `{other}`"))),
        }
    }
}

pub fn example_schema() -> FeatureSchema {
    FeatureSchema::new(vec![
        FeatureDef::new("color", ["red", "green", "yellow", "brown"]),
        FeatureDef::new("form", ["rectangular", "circular"]),
    ])
    .expect("static schema is valid")
}

pub fn example_actions() -> Vec<String> {
    vec![TOY_BOX.into(), FRUIT_BASKET.into(), RUBBISH_BIN.into()]
}

fn noisy_vector(dominant: usize, arity: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mass: f64 = rng.gen_range(0.7..=1.0);
    let shares: Vec<f64> = (0..arity).map(|_| rng.gen::<f64>()).collect();
    let rest: f64 = shares
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != dominant)
        .map(|(_, s)| s)
        .sum();
    (0..arity)
        .map(|i| {
            if i == dominant {
                mass
            } else if rest > 0.0 {
                (1.0 - mass) * shares[i] / rest
            } else {
                (1.0 - mass) / (arity - 1) as f64
            }
        })
        .collect()
}

fn unit(index: usize, arity: usize) -> Vec<f64> {
    (0..arity).map(|i| if i == index { 1.0 } else { 0.0 }).collect()
}

/// Simulated percept of an object of `kind`.
pub fn example_percept(kind: ObjectKind, variant: Variant, seed: u64) -> Percept {
    let schema = example_schema();
    let values = match variant {
        Variant::Exact => vec![unit(kind.color(), 4), unit(kind.form(), 2)],
        Variant::Noisy => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            vec![
                noisy_vector(kind.color(), 4, &mut rng),
                noisy_vector(kind.form(), 2, &mut rng),
            ]
        }
    };
    Percept::from_values(&schema, &values).expect("simulated percepts are valid")
}

/// The exact percept of `kind`.
pub fn prototype(kind: ObjectKind) -> Percept {
    example_percept(kind, Variant::Exact, 0)
}

/// Supervisor reward for sorting `kind` with `action`.
pub fn example_oracle(kind: ObjectKind, action: &str) -> Result<Reward> {
    let correct = match action {
        FRUIT_BASKET => matches!(kind, ObjectKind::GreenApple | ObjectKind::RedApple),
        TOY_BOX => !kind.is_apple(),
        RUBBISH_BIN => kind == ObjectKind::BrownApple,
        other => return Err(Error::UnknownAction(other.to_string())),
    };
    Ok(if correct { Reward::Positive } else { Reward::Negative })
}

/// How prototypes are assigned to categories when checking the partition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum PrototypeMatch {
    /// A prototype belongs to the category `observe` would route it to; it must fit.
    Fit,
    /// As `Fit`, but a prototype that fits nothing belongs to the category with the
    /// smallest summed Δ between its degenerate form and the category's closest interval
    /// vectors. Used for noisy percepts, whose categories never contain exact prototypes.
    Nearest,
}

/// Outcome of the desired-partition check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PartitionReport {
    pub reached: bool,
    /// Category each kind's prototype was assigned to, if any.
    pub assignment: BTreeMap<ObjectKind, Option<CategoryId>>,
    /// Categories that no prototype was assigned to.
    pub residual: usize,
}

fn nearest_category(graph: &KnowledgeGraph, percept: &Percept) -> Option<CategoryId> {
    let mut best: Option<(CategoryId, f64)> = None;
    for c in graph.categories() {
        let d: f64 = (0..percept.len())
            .map(|f| {
                let point = crate::knowledge::IntervalVector::from_point(percept.values(f));
                c.feature_set(f)
                    .iter()
                    .map(|v| crate::knowledge::delta_distance(v, &point).unwrap_or(f64::INFINITY))
                    .fold(f64::INFINITY, f64::min)
            })
            .sum();
        if best.is_none_or(|(_, bd)| d < bd) {
            best = Some((c.id(), d));
        }
    }
    best.map(|(id, _)| id)
}

/// Checks whether the prototypes of the six kinds fall into exactly the three target
/// groups {green, red apples}, {brown apples}, {blocks}.
///
/// Prototypes are routed like `observe` routes percepts. With `PrototypeMatch::Fit` every
/// prototype must fit some category. Categories no prototype is routed to are tolerated
/// and counted as residual.
pub fn desired_partition(graph: &KnowledgeGraph, mode: PrototypeMatch) -> PartitionReport {
    let mut assignment = BTreeMap::new();
    for kind in ObjectKind::ALL {
        let proto = prototype(kind);
        let chosen = match (graph.resolve(&proto), mode) {
            (Some((id, _)), _) => Some(id),
            (None, PrototypeMatch::Fit) => None,
            (None, PrototypeMatch::Nearest) => nearest_category(graph, &proto),
        };
        assignment.insert(kind, chosen);
    }
    let used: BTreeSet<CategoryId> = assignment.values().flatten().copied().collect();
    let residual = graph.len() - used.len();

    let complete = assignment.values().all(Option::is_some);
    let grouped = complete
        && ObjectKind::ALL.iter().all(|&a| {
            ObjectKind::ALL
                .iter()
                .all(|&b| (assignment[&a] == assignment[&b]) == (a.target_group() == b.target_group()))
        });
    PartitionReport {
        reached: grouped,
        assignment,
        residual,
    }
}

/// Whether the graph holds the desired partition, matching prototypes by fit.
pub fn desired_partition_reached(graph: &KnowledgeGraph) -> bool {
    desired_partition(graph, PrototypeMatch::Fit).reached
}
