use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Name reserved for the experience attribute in weight maps.
pub const EXPERIENCE_ATTRIBUTE: &str = "experience";

/// One feature channel and the names of its characteristics, e.g. `color = [red, green, yellow, brown]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureDef {
    pub id: String,
    pub characteristics: Vec<String>,
}

impl FeatureDef {
    pub fn new<S: Into<String>>(id: impl Into<String>, characteristics: impl IntoIterator<Item = S>) -> Self {
        Self {
            id: id.into(),
            characteristics: characteristics.into_iter().map(Into::into).collect(),
        }
    }

    pub fn arity(&self) -> usize {
        self.characteristics.len()
    }
}

/// The ordered feature set every percept and category of a graph is declared over.
///
/// Attribute indices follow declaration order, with the experience attribute
/// appended after the last feature.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct FeatureSchema {
    features: Vec<FeatureDef>,
}

impl FeatureSchema {
    pub fn new(features: Vec<FeatureDef>) -> Result<Self> {
        if features.is_empty() {
            return Err(Error::Config("feature schema must declare at least one feature".into()));
        }
        for (i, def) in features.iter().enumerate() {
            if def.id.is_empty() || def.id == EXPERIENCE_ATTRIBUTE {
                return Err(Error::Config(format!("invalid feature id `{}`", def.id)));
            }
            if def.arity() == 0 {
                return Err(Error::Config(format!("feature `{}` has no characteristics", def.id)));
            }
            if features[..i].iter().any(|d| d.id == def.id) {
                return Err(Error::Config(format!("duplicate feature id `{}`", def.id)));
            }
        }
        Ok(Self { features })
    }

    pub fn features(&self) -> &[FeatureDef] {
        &self.features
    }

    /// Number of features (M).
    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    /// Features plus the experience attribute.
    pub fn attribute_count(&self) -> usize {
        self.features.len() + 1
    }

    pub fn index_of(&self, feature: &str) -> Option<usize> {
        self.features.iter().position(|d| d.id == feature)
    }

    pub fn attribute_name(&self, index: usize) -> &str {
        self.features
            .get(index)
            .map(|d| d.id.as_str())
            .unwrap_or(EXPERIENCE_ATTRIBUTE)
    }
}

impl<'de> Deserialize<'de> for FeatureSchema {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let features = Vec::<FeatureDef>::deserialize(deserializer)?;
        FeatureSchema::new(features).map_err(serde::de::Error::custom)
    }
}

/// Clamps negatives to zero and rescales so the values sum to one.
pub fn normalize_percept(raw: &[f64], arity: usize) -> Result<Vec<f64>> {
    if raw.len() != arity {
        return Err(Error::DimensionMismatch {
            expected: arity,
            actual: raw.len(),
        });
    }
    if raw.iter().any(|v| !v.is_finite()) {
        return Err(Error::DegenerateInput("non-finite characteristic value".into()));
    }
    let clamped: Vec<f64> = raw.iter().map(|v| v.max(0.0)).collect();
    let sum: f64 = clamped.iter().sum();
    if sum <= 0.0 {
        return Err(Error::DegenerateInput("all characteristic values are zero".into()));
    }
    Ok(clamped.into_iter().map(|v| v / sum).collect())
}

/// A percept's normalized characteristic percentages for one feature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub feature: String,
    values: Vec<f64>,
}

impl FeatureVector {
    pub fn new(feature: impl Into<String>, raw: &[f64], arity: usize) -> Result<Self> {
        Ok(Self {
            feature: feature.into(),
            values: normalize_percept(raw, arity)?,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn arity(&self) -> usize {
        self.values.len()
    }
}

/// A full percept: one normalized feature vector per schema feature, in schema order.
#[derive(Debug, Clone, PartialEq)]
pub struct Percept {
    vectors: Vec<FeatureVector>,
}

impl Percept {
    /// Builds a percept from raw values given in schema order.
    pub fn from_values(schema: &FeatureSchema, values: &[Vec<f64>]) -> Result<Self> {
        if values.len() != schema.len() {
            return Err(Error::DimensionMismatch {
                expected: schema.len(),
                actual: values.len(),
            });
        }
        let vectors = schema
            .features()
            .iter()
            .zip(values)
            .map(|(def, raw)| {
                if raw.len() != def.arity() {
                    return Err(Error::ArityMismatch {
                        feature: def.id.clone(),
                        expected: def.arity(),
                        actual: raw.len(),
                    });
                }
                FeatureVector::new(def.id.clone(), raw, def.arity())
            })
            .collect::<Result<_>>()?;
        Ok(Self { vectors })
    }

    /// Builds a percept from a `featureId -> values` map that must cover the schema exactly.
    pub fn from_map(schema: &FeatureSchema, map: &BTreeMap<String, Vec<f64>>) -> Result<Self> {
        if let Some(unknown) = map.keys().find(|k| schema.index_of(k).is_none()) {
            return Err(Error::UnknownFeature(unknown.clone()));
        }
        let values = schema
            .features()
            .iter()
            .map(|def| {
                map.get(&def.id)
                    .cloned()
                    .ok_or_else(|| Error::MissingFeature(def.id.clone()))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_values(schema, &values)
    }

    pub fn vectors(&self) -> &[FeatureVector] {
        &self.vectors
    }

    pub fn values(&self, feature: usize) -> &[f64] {
        self.vectors[feature].values()
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn to_map(&self) -> BTreeMap<String, Vec<f64>> {
        self.vectors
            .iter()
            .map(|v| (v.feature.clone(), v.values.clone()))
            .collect()
    }

    /// Checks that this percept was built over `schema`.
    pub fn check_schema(&self, schema: &FeatureSchema) -> Result<()> {
        if self.vectors.len() != schema.len() {
            return Err(Error::DimensionMismatch {
                expected: schema.len(),
                actual: self.vectors.len(),
            });
        }
        for (v, def) in self.vectors.iter().zip(schema.features()) {
            if v.feature != def.id {
                return Err(Error::UnknownFeature(v.feature.clone()));
            }
            if v.arity() != def.arity() {
                return Err(Error::ArityMismatch {
                    feature: def.id.clone(),
                    expected: def.arity(),
                    actual: v.arity(),
                });
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &[f64], b: &[f64]) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-12)
    }

    #[test]
    fn proportional_normalization() {
        let v = normalize_percept(&[2.0, 1.0, 1.0, 0.0], 4).unwrap();
        assert!(close(&v, &[0.5, 0.25, 0.25, 0.0]));
    }

    #[test]
    fn unit_vector_is_identity() {
        let v = normalize_percept(&[1.0, 0.0, 0.0, 0.0], 4).unwrap();
        assert_eq!(v, vec![1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn noisy_example_is_already_normalized() {
        let v = normalize_percept(&[0.8, 0.0, 0.05, 0.15], 4).unwrap();
        assert!(close(&v, &[0.8, 0.0, 0.05, 0.15]));
    }

    #[test]
    fn negatives_are_clamped() {
        let v = normalize_percept(&[-1.0, 3.0, 1.0], 3).unwrap();
        assert!(close(&v, &[0.0, 0.75, 0.25]));
    }

    #[test]
    fn all_zero_is_degenerate() {
        assert!(matches!(
            normalize_percept(&[0.0, -2.0, 0.0], 3),
            Err(Error::DegenerateInput(_))
        ));
    }

    #[test]
    fn wrong_length_rejected() {
        assert!(matches!(
            normalize_percept(&[1.0, 0.0], 3),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn schema_rejects_duplicates_and_reserved_names() {
        assert!(FeatureSchema::new(vec![FeatureDef::new("a", ["x"]), FeatureDef::new("a", ["y"])]).is_err());
        assert!(FeatureSchema::new(vec![FeatureDef::new(EXPERIENCE_ATTRIBUTE, ["x"])]).is_err());
        assert!(FeatureSchema::new(vec![]).is_err());
    }

    #[test]
    fn percept_from_map_requires_exact_cover() {
        let schema = FeatureSchema::new(vec![
            FeatureDef::new("color", ["r", "g"]),
            FeatureDef::new("form", ["rect", "circ"]),
        ])
        .unwrap();
        let mut map = BTreeMap::new();
        map.insert("color".to_string(), vec![1.0, 1.0]);
        assert!(matches!(
            Percept::from_map(&schema, &map),
            Err(Error::MissingFeature(_))
        ));
        map.insert("form".to_string(), vec![0.0, 2.0]);
        let p = Percept::from_map(&schema, &map).unwrap();
        assert_eq!(p.values(0), &[0.5, 0.5]);
        assert_eq!(p.values(1), &[0.0, 1.0]);
        map.insert("size".to_string(), vec![1.0]);
        assert!(matches!(
            Percept::from_map(&schema, &map),
            Err(Error::UnknownFeature(_))
        ));
    }
}
