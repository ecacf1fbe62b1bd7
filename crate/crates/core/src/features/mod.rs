//! Subsymbolic feature extraction over synthetic rasters: silhouette geometry, quartered
//! bounding-box chroma averages, area-ratio shape descriptors and Rprop-trained networks.

pub mod circle;
pub mod color;
pub mod dataset;
pub mod mlp;
pub mod raster;
pub mod silhouette;

pub use circle::{min_enclosing_circle, Circle};
pub use color::{color_input, quarter_averages};
pub use dataset::{
    load_samples, read_samples, save_samples, synthetic_color_set, synthetic_object, synthetic_shape_set,
    write_samples, LabeledSample, COLOR_CLASSES, COLOR_PROTOTYPES, FORM_CLASSES,
};
pub use mlp::{ConfusionStats, Mlp, MlpCheckpoint, RpropConfig, RpropState, CHECKPOINT_VERSION};
pub use raster::{render_object, Chroma, Mask, ObjectSpec, PixelRect, Point, Raster, Shape};
pub use silhouette::{
    convex_hull, mask_shape_ratios, min_area_box, polygon_area, shape_ratios, trace_contour, OrientedBox,
    SilhouetteStats,
};

use crate::error::Result;
use crate::knowledge::{FeatureSchema, Percept};
use crate::scenarios::example_schema;

/// Colour and shape networks producing percepts for the example schema.
#[derive(Debug, Clone)]
pub struct FeatureExtractor {
    pub color: Mlp,
    pub shape: Mlp,
    schema: FeatureSchema,
}

impl FeatureExtractor {
    pub fn new(color: Mlp, shape: Mlp) -> Self {
        Self {
            color,
            shape,
            schema: example_schema(),
        }
    }

    /// Trains an 8-10-4 colour net and a 2-2-2 shape net on synthetic data.
    pub fn train_synthetic(samples: usize, epochs: usize, seed: u64) -> Result<Self> {
        let mut color = Mlp::new(8, 10, COLOR_CLASSES.len(), seed)?;
        color.train(&synthetic_color_set(samples, seed)?, epochs)?;
        let mut shape = Mlp::new(2, 2, FORM_CLASSES.len(), seed.wrapping_add(1))?;
        shape.train(&synthetic_shape_set(samples, seed.wrapping_add(1))?, epochs)?;
        Ok(Self::new(color, shape))
    }

    pub fn schema(&self) -> &FeatureSchema {
        &self.schema
    }

    pub fn extract(&self, raster: &Raster) -> Result<Percept> {
        let color = self.color.classify(&color_input(raster)?)?;
        let form = self.shape.classify(&mask_shape_ratios(&raster.mask())?)?;
        Percept::from_values(&self.schema, &[color, form])
    }
}
