use std::io::{BufRead, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::color::color_input;
use super::raster::{render_object, Chroma, ObjectSpec, Raster, Shape};
use super::silhouette::mask_shape_ratios;
use crate::error::{Error, Result};

/// One training row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledSample {
    pub features: Vec<f64>,
    pub label: usize,
}

impl LabeledSample {
    pub fn new(features: Vec<f64>, label: usize) -> Self {
        Self { features, label }
    }
}

/// Reads one JSON sample per line; blank lines are skipped.
pub fn read_samples<R: BufRead>(input: R) -> Result<Vec<LabeledSample>> {
    let mut samples = Vec::new();
    for (n, line) in input.lines().enumerate() {
        let line = line.map_err(|e| Error::io("<samples>", e))?;
        if line.trim().is_empty() {
            continue;
        }
        let sample = serde_json::from_str(&line).map_err(|e| Error::Document {
            location: format!("line {}", n + 1),
            message: e.to_string(),
        })?;
        samples.push(sample);
    }
    Ok(samples)
}

pub fn write_samples<W: Write>(mut out: W, samples: &[LabeledSample]) -> Result<()> {
    for s in samples {
        let line = serde_json::to_string(s).map_err(|e| Error::InvalidValue(e.to_string()))?;
        writeln!(out, "{line}").map_err(|e| Error::io("<samples>", e))?;
    }
    Ok(())
}

pub fn load_samples(path: impl AsRef<Path>) -> Result<Vec<LabeledSample>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_samples(std::io::BufReader::new(file))
}

pub fn save_samples(path: impl AsRef<Path>, samples: &[LabeledSample]) -> Result<()> {
    let path = path.as_ref();
    let mut file = std::io::BufWriter::new(std::fs::File::create(path).map_err(|e| Error::io(path, e))?);
    write_samples(&mut file, samples)?;
    file.flush().map_err(|e| Error::io(path, e))
}

/// Colour classes in the example schema's order.
pub const COLOR_CLASSES: [&str; 4] = ["red", "green", "yellow", "brown"];
/// Form classes in the example schema's order.
pub const FORM_CLASSES: [&str; 2] = ["rectangular", "circular"];

/// Nominal (a, b) chroma per colour class, 8-bit offset encoding.
pub const COLOR_PROTOTYPES: [Chroma; 4] = [
    Chroma { a: 188.0, b: 173.0 },
    Chroma { a: 78.0, b: 173.0 },
    Chroma { a: 123.0, b: 203.0 },
    Chroma { a: 148.0, b: 158.0 },
];

pub const SYNTHETIC_RASTER_SIZE: usize = 48;

fn random_shape(rng: &mut ChaCha8Rng, circular: bool) -> Shape {
    if circular {
        Shape::Circle {
            radius: rng.gen_range(8.0..16.0),
        }
    } else {
        Shape::Rect {
            width: rng.gen_range(10.0..24.0),
            height: rng.gen_range(10.0..24.0),
        }
    }
}

/// A randomly sized, rotated and tinted object of the given classes.
pub fn synthetic_object(color: usize, circular: bool, rng: &mut ChaCha8Rng) -> Result<Raster> {
    let base = COLOR_PROTOTYPES
        .get(color)
        .ok_or_else(|| Error::InvalidValue(format!("colour class {color} out of range")))?;
    let spec = ObjectSpec {
        shape: random_shape(rng, circular),
        chroma: Chroma::new(base.a + rng.gen_range(-8.0..=8.0), base.b + rng.gen_range(-8.0..=8.0)),
        rotation: rng.gen_range(0.0..std::f64::consts::PI),
        noise: 6.0,
        seed: rng.gen(),
        center: None,
    };
    render_object(&spec, SYNTHETIC_RASTER_SIZE, SYNTHETIC_RASTER_SIZE)
}

/// `n` quarter-average samples cycling through the four colour classes.
pub fn synthetic_color_set(n: usize, seed: u64) -> Result<Vec<LabeledSample>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let label = i % COLOR_CLASSES.len();
            let circular = rng.gen_bool(0.5);
            let raster = synthetic_object(label, circular, &mut rng)?;
            Ok(LabeledSample::new(color_input(&raster)?, label))
        })
        .collect()
}

/// `n` shape-ratio samples alternating rectangles (label 0) and circles (label 1).
pub fn synthetic_shape_set(n: usize, seed: u64) -> Result<Vec<LabeledSample>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let label = i % FORM_CLASSES.len();
            let color = rng.gen_range(0..COLOR_CLASSES.len());
            let raster = synthetic_object(color, label == 1, &mut rng)?;
            Ok(LabeledSample::new(mask_shape_ratios(&raster.mask())?.to_vec(), label))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jsonl_round_trip() {
        let samples = vec![
            LabeledSample::new(vec![0.1, 0.25], 1),
            LabeledSample::new(vec![1.0, 0.0], 0),
        ];
        let mut buf = Vec::new();
        write_samples(&mut buf, &samples).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with(r#"{"features":[0.1,0.25],"label":1}"#));
        assert_eq!(read_samples(text.as_bytes()).unwrap(), samples);
        assert!(read_samples("{\"features\": 3}\n".as_bytes()).is_err());
    }

    #[test]
    fn synthetic_sets_are_balanced_and_seeded() {
        let a = synthetic_color_set(40, 3).unwrap();
        assert_eq!(a.iter().filter(|s| s.label == 2).count(), 10);
        assert!(a.iter().all(|s| s.features.len() == 8));
        assert_eq!(a, synthetic_color_set(40, 3).unwrap());
        let s = synthetic_shape_set(10, 3).unwrap();
        assert!(s
            .iter()
            .all(|s| s.features.len() == 2 && s.features.iter().all(|&v| v > 0.0 && v <= 1.0)));
    }
}
