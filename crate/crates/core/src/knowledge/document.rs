//! Versioned JSON document for knowledge graphs.
//!
//! Counts are stored and probabilities derived; the similarity cache and the RNG
//! position are stored so that a reloaded graph continues bit-identically.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use serde::de::{MapAccess, Visitor};
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::category::{CategoryId, Experience, ObjectCategory, Reward};
use super::graph::KnowledgeGraph;
use super::interval::IntervalVector;
use super::params::Parameters;
use super::percept::{FeatureSchema, EXPERIENCE_ATTRIBUTE};
use super::weights::AttributeWeights;
use crate::error::{Error, Result};

pub const DOCUMENT_VERSION: u32 = 1;

/// `name -> weight` pairs that keep attribute order when serialized.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderedWeights(pub Vec<(String, f64)>);

impl OrderedWeights {
    pub fn of(schema: &FeatureSchema, weights: &AttributeWeights) -> Self {
        Self(
            weights
                .values()
                .iter()
                .enumerate()
                .map(|(i, &w)| (schema.attribute_name(i).to_string(), w))
                .collect(),
        )
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.0.iter().find(|(n, _)| n == name).map(|&(_, w)| w)
    }
}

impl Serialize for OrderedWeights {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            map.serialize_entry(k, v)?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for OrderedWeights {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = OrderedWeights;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a map of attribute weights")
            }
            fn visit_map<A: MapAccess<'de>>(self, mut access: A) -> std::result::Result<Self::Value, A::Error> {
                let mut out = Vec::new();
                while let Some((k, v)) = access.next_entry::<String, f64>()? {
                    out.push((k, v));
                }
                Ok(OrderedWeights(out))
            }
        }
        deserializer.deserialize_map(V)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct CategoryDocument {
    pub id: CategoryId,
    pub features: BTreeMap<String, Vec<IntervalVector>>,
    #[serde(default)]
    pub experiences: Vec<Experience>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct SimilarityEntry {
    pub a: CategoryId,
    pub b: CategoryId,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct RngState {
    pub seed: u64,
    pub word_pos: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct GraphDocument {
    pub version: u32,
    pub parameters: Parameters,
    pub action_set: Vec<String>,
    pub feature_schema: FeatureSchema,
    pub weights: OrderedWeights,
    pub categories: Vec<CategoryDocument>,
    #[serde(default)]
    pub similarities: Vec<SimilarityEntry>,
    pub next_category_id: u64,
    pub rng_state: RngState,
}

impl KnowledgeGraph {
    pub fn to_document(&self) -> GraphDocument {
        let schema = self.schema();
        GraphDocument {
            version: DOCUMENT_VERSION,
            parameters: *self.params(),
            action_set: self.actions().to_vec(),
            feature_schema: schema.clone(),
            weights: OrderedWeights::of(schema, self.weights()),
            categories: self
                .categories()
                .map(|c| CategoryDocument {
                    id: c.id(),
                    features: schema
                        .features()
                        .iter()
                        .zip(c.feature_sets())
                        .map(|(def, set)| (def.id.clone(), set.clone()))
                        .collect(),
                    experiences: c
                        .experiences()
                        .iter()
                        .map(|(a, &r)| Experience {
                            action: a.clone(),
                            reward: r,
                        })
                        .collect(),
                })
                .collect(),
            similarities: self
                .similarities()
                .iter()
                .map(|(&(a, b), &value)| SimilarityEntry { a, b, value })
                .collect(),
            next_category_id: self.next_id(),
            rng_state: RngState {
                seed: self.seed(),
                word_pos: self.rng_word_pos() as u64,
            },
        }
    }

    pub fn from_document(doc: GraphDocument) -> Result<Self> {
        if doc.version != DOCUMENT_VERSION {
            return Err(Error::document(
                "version",
                format!("unsupported version {}, expected {DOCUMENT_VERSION}", doc.version),
            ));
        }
        doc.parameters
            .validate()
            .map_err(|e| Error::document("parameters", e.to_string()))?;
        let schema = doc.feature_schema;
        let probe = KnowledgeGraph::new(
            schema.clone(),
            doc.action_set.clone(),
            doc.parameters,
            doc.rng_state.seed,
        )
        .map_err(|e| Error::document("actionSet", e.to_string()))?;
        drop(probe);

        let weights = parse_weights(&schema, &doc.weights)?;

        let mut categories = BTreeMap::new();
        for (ci, cat) in doc.categories.into_iter().enumerate() {
            let loc = format!("categories[{ci}]");
            if cat.id.0 >= doc.next_category_id {
                return Err(Error::document(
                    &loc,
                    format!("id {} not below nextCategoryId", cat.id.0),
                ));
            }
            if let Some(unknown) = cat.features.keys().find(|k| schema.index_of(k).is_none()) {
                return Err(Error::document(&loc, format!("unknown feature `{unknown}`")));
            }
            let mut features = Vec::with_capacity(schema.len());
            for def in schema.features() {
                let floc = format!("{loc}.features.{}", def.id);
                let set = cat
                    .features
                    .get(&def.id)
                    .ok_or_else(|| Error::document(&floc, "missing feature"))?;
                if set.is_empty() {
                    return Err(Error::document(&floc, "empty interval vector set"));
                }
                if let Some((i, bad)) = set.iter().enumerate().find(|(_, c)| c.arity() != def.arity()) {
                    return Err(Error::document(
                        format!("{floc}[{i}]"),
                        format!("arity {} != {}", bad.arity(), def.arity()),
                    ));
                }
                features.push(set.clone());
            }
            let mut experiences: BTreeMap<String, Reward> = BTreeMap::new();
            for (ei, e) in cat.experiences.iter().enumerate() {
                let eloc = format!("{loc}.experiences[{ei}]");
                if !doc.action_set.contains(&e.action) {
                    return Err(Error::document(eloc, format!("unknown action `{}`", e.action)));
                }
                if experiences.insert(e.action.clone(), e.reward).is_some() {
                    return Err(Error::document(eloc, format!("duplicate action `{}`", e.action)));
                }
            }
            if categories
                .insert(cat.id, ObjectCategory::from_parts(cat.id, features, experiences))
                .is_some()
            {
                return Err(Error::document(loc, format!("duplicate id {}", cat.id.0)));
            }
        }

        let mut similarities = BTreeMap::new();
        for (si, s) in doc.similarities.iter().enumerate() {
            let loc = format!("similarities[{si}]");
            if s.a >= s.b || !categories.contains_key(&s.a) || !categories.contains_key(&s.b) {
                return Err(Error::document(loc, format!("invalid pair ({}, {})", s.a, s.b)));
            }
            if !s.value.is_finite() {
                return Err(Error::document(loc, "non-finite similarity"));
            }
            similarities.insert((s.a, s.b), s.value);
        }

        Ok(KnowledgeGraph::from_parts(
            schema,
            doc.action_set,
            doc.parameters,
            weights,
            categories,
            similarities,
            doc.next_category_id,
            doc.rng_state.seed,
            doc.rng_state.word_pos as u128,
        ))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("graph documents always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: GraphDocument = serde_json::from_str(text)?;
        Self::from_document(doc)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

fn parse_weights(schema: &FeatureSchema, weights: &OrderedWeights) -> Result<AttributeWeights> {
    let names: BTreeSet<&str> = weights.0.iter().map(|(n, _)| n.as_str()).collect();
    if names.len() != weights.0.len() {
        return Err(Error::document("weights", "duplicate attribute"));
    }
    let mut values = Vec::with_capacity(schema.attribute_count());
    for i in 0..schema.attribute_count() {
        let name = schema.attribute_name(i);
        let w = weights
            .get(name)
            .ok_or_else(|| Error::document("weights", format!("missing weight for `{name}`")))?;
        if !(w.is_finite() && w >= 0.0) {
            return Err(Error::document(
                format!("weights.{name}"),
                format!("invalid weight {w}"),
            ));
        }
        values.push(w);
    }
    if let Some((extra, _)) = weights
        .0
        .iter()
        .find(|(n, _)| n != EXPERIENCE_ATTRIBUTE && schema.index_of(n).is_none())
    {
        return Err(Error::document("weights", format!("unknown attribute `{extra}`")));
    }
    let total: f64 = values.iter().sum();
    let expected = schema.attribute_count() as f64;
    if (total - expected).abs() > 1e-6 {
        return Err(Error::document(
            "weights",
            format!("weights sum to {total}, expected {expected}"),
        ));
    }
    Ok(AttributeWeights::from_values(values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::knowledge::interval::Interval;
    use crate::knowledge::percept::{FeatureDef, Percept};

    fn schema() -> FeatureSchema {
        FeatureSchema::new(vec![
            FeatureDef::new("color", ["red", "green", "yellow", "brown"]),
            FeatureDef::new("form", ["circular", "rectangular"]),
        ])
        .unwrap()
    }

    fn empty() -> KnowledgeGraph {
        KnowledgeGraph::new(
            schema(),
            vec!["Action1".into(), "Action2".into()],
            Parameters::default(),
            11,
        )
        .unwrap()
    }

    fn iv(bounds: &[(f64, f64)], count: u64) -> IntervalVector {
        IntervalVector::new(
            bounds.iter().map(|&(l, h)| Interval::new(l, h).unwrap()).collect(),
            count,
        )
        .unwrap()
    }

    #[test]
    fn empty_graph_round_trips() {
        let g = empty();
        assert_eq!(KnowledgeGraph::from_json(&g.to_json()).unwrap(), g);
    }

    #[test]
    fn fig3_graph_round_trips() {
        let mut g = empty();
        let id = g
            .insert_category(
                vec![
                    vec![
                        iv(&[(0.0, 0.0), (1.0, 1.0), (0.0, 0.0), (0.0, 0.0)], 1),
                        iv(&[(0.7, 0.7), (0.0, 0.0), (0.0, 0.0), (0.3, 0.3)], 2),
                    ],
                    vec![iv(&[(0.0, 0.2), (0.8, 1.0)], 3)],
                ],
                [("Action1".to_string(), Reward::Positive)].into(),
            )
            .unwrap();
        let back = KnowledgeGraph::from_json(&g.to_json()).unwrap();
        assert_eq!(back, g);
        let p = back.category(id).unwrap().probabilities(0);
        assert_eq!(p, g.category(id).unwrap().probabilities(0));
        assert!((p[0] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn rng_position_survives_round_trip() {
        let mut g = empty();
        let p = Percept::from_values(g.schema(), &[vec![1.0, 0.0, 0.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let c = g.observe(&p).unwrap().category;
        g.select_action(c).unwrap();
        let mut back = KnowledgeGraph::from_json(&g.to_json()).unwrap();
        assert_eq!(back, g);
        let a: Vec<_> = (0..20).map(|_| g.select_action(c).unwrap()).collect();
        let b: Vec<_> = (0..20).map(|_| back.select_action(c).unwrap()).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn syntax_errors_carry_location() {
        let err = KnowledgeGraph::from_json("{\n  \"version\": 1,\n  oops").unwrap_err();
        match err {
            Error::Document { location, .. } => assert!(location.contains("line 3"), "{location}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn semantic_errors_carry_path() {
        let mut doc = empty().to_document();
        doc.categories.push(CategoryDocument {
            id: CategoryId(0),
            features: [
                ("color".to_string(), vec![IntervalVector::from_point(&[1.0, 0.0])]),
                ("form".to_string(), vec![IntervalVector::from_point(&[1.0, 0.0])]),
            ]
            .into(),
            experiences: vec![],
        });
        let text = serde_json::to_string(&doc).unwrap();
        match KnowledgeGraph::from_json(&text).unwrap_err() {
            Error::Document { location, .. } => assert_eq!(location, "categories[0].features.color[0]"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bad_weights_rejected() {
        let mut doc = empty().to_document();
        doc.weights.0[0].1 = 5.0;
        assert!(KnowledgeGraph::from_document(doc).is_err());
        let mut doc = empty().to_document();
        doc.weights.0.pop();
        assert!(KnowledgeGraph::from_document(doc).is_err());
    }

    #[test]
    fn weights_keep_attribute_order() {
        let json = serde_json::to_string(&empty().to_document().weights).unwrap();
        assert_eq!(json, r#"{"color":1.0,"form":1.0,"experience":1.0}"#);
    }
}
