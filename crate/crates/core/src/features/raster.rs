use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Chromatic channels of an object pixel; luminance is not represented.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Chroma {
    pub a: f64,
    pub b: f64,
}

impl Chroma {
    pub fn new(a: f64, b: f64) -> Self {
        Self { a, b }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Grid of background (`None`) or object pixels, row-major from the top-left corner.
#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    width: usize,
    height: usize,
    pixels: Vec<Option<Chroma>>,
}

impl Raster {
    /// An all-background raster.
    pub fn blank(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            pixels: vec![None; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> Option<Chroma>) -> Self {
        let pixels = (0..height)
            .flat_map(|y| (0..width).map(move |x| (x, y)))
            .map(|(x, y)| f(x, y))
            .collect();
        Self { width, height, pixels }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, x: usize, y: usize) -> Option<Chroma> {
        if x < self.width && y < self.height {
            self.pixels[y * self.width + x]
        } else {
            None
        }
    }

    pub fn set(&mut self, x: usize, y: usize, value: Option<Chroma>) {
        assert!(x < self.width && y < self.height, "pixel ({x}, {y}) outside raster");
        self.pixels[y * self.width + x] = value;
    }

    pub fn object_pixel_count(&self) -> usize {
        self.pixels.iter().filter(|p| p.is_some()).count()
    }

    /// Adds background margins around the raster.
    pub fn padded(&self, left: usize, top: usize, right: usize, bottom: usize) -> Self {
        let (w, h) = (self.width + left + right, self.height + top + bottom);
        Raster::from_fn(w, h, |x, y| {
            if x < left || y < top {
                None
            } else {
                self.get(x - left, y - top)
            }
        })
    }

    pub fn mask(&self) -> Mask {
        Mask {
            width: self.width,
            height: self.height,
            bits: self.pixels.iter().map(Option::is_some).collect(),
        }
    }
}

/// Inclusive pixel rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PixelRect {
    pub x0: usize,
    pub y0: usize,
    pub x1: usize,
    pub y1: usize,
}

impl PixelRect {
    pub fn width(&self) -> usize {
        self.x1 - self.x0 + 1
    }

    pub fn height(&self) -> usize {
        self.y1 - self.y0 + 1
    }
}

/// Binary object silhouette.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl Mask {
    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> bool) -> Self {
        let bits = (0..height)
            .flat_map(|y| (0..width).map(move |x| (x, y)))
            .map(|(x, y)| f(x, y))
            .collect();
        Self { width, height, bits }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        x < self.width && y < self.height && self.bits[y * self.width + x]
    }

    /// Like `get` but accepting coordinates outside the grid.
    pub fn get_signed(&self, x: isize, y: isize) -> bool {
        x >= 0 && y >= 0 && self.get(x as usize, y as usize)
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Axis-aligned bounding box of the set pixels.
    pub fn bounding_box(&self) -> Option<PixelRect> {
        let mut rect: Option<PixelRect> = None;
        for y in 0..self.height {
            for x in 0..self.width {
                if !self.get(x, y) {
                    continue;
                }
                rect = Some(match rect {
                    None => PixelRect {
                        x0: x,
                        y0: y,
                        x1: x,
                        y1: y,
                    },
                    Some(r) => PixelRect {
                        x0: r.x0.min(x),
                        y0: r.y0.min(y),
                        x1: r.x1.max(x),
                        y1: r.y1.max(y),
                    },
                });
            }
        }
        rect
    }

    /// Quarter turn clockwise.
    pub fn rotated_90(&self) -> Self {
        let (w, h) = (self.height, self.width);
        Mask::from_fn(w, h, |x, y| self.get(y, self.height - 1 - x))
    }

    pub fn shifted(&self, dx: usize, dy: usize) -> Self {
        Mask::from_fn(self.width + dx, self.height + dy, |x, y| {
            x >= dx && y >= dy && self.get(x - dx, y - dy)
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", tag = "kind")]
pub enum Shape {
    Rect { width: f64, height: f64 },
    Circle { radius: f64 },
}

/// Description of a synthetic object to draw.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ObjectSpec {
    pub shape: Shape,
    pub chroma: Chroma,
    /// Counter-clockwise rotation in radians.
    #[serde(default)]
    pub rotation: f64,
    /// Half-width of the uniform per-pixel chroma noise.
    #[serde(default)]
    pub noise: f64,
    #[serde(default)]
    pub seed: u64,
    /// Object center; the raster center when absent.
    #[serde(default)]
    pub center: Option<Point>,
}

impl ObjectSpec {
    pub fn new(shape: Shape, chroma: Chroma) -> Self {
        Self {
            shape,
            chroma,
            rotation: 0.0,
            noise: 0.0,
            seed: 0,
            center: None,
        }
    }
}

/// Draws one object on a `width`×`height` background. A pixel belongs to the object
/// when its center lies inside the shape.
pub fn render_object(spec: &ObjectSpec, width: usize, height: usize) -> Result<Raster> {
    let center = spec
        .center
        .unwrap_or(Point::new(width as f64 / 2.0, height as f64 / 2.0));
    let (cos, sin) = (spec.rotation.cos(), spec.rotation.sin());
    let half_extent = match spec.shape {
        Shape::Rect { width: w, height: h } => {
            if !(w > 0.0 && h > 0.0) {
                return Err(Error::InvalidValue("rectangle sides must be positive".into()));
            }
            let (hw, hh) = (w / 2.0, h / 2.0);
            ((hw * cos).abs() + (hh * sin).abs(), (hw * sin).abs() + (hh * cos).abs())
        }
        Shape::Circle { radius } => {
            if radius.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
                return Err(Error::InvalidValue("circle radius must be positive".into()));
            }
            (radius, radius)
        }
    };
    if center.x - half_extent.0 < 0.0
        || center.y - half_extent.1 < 0.0
        || center.x + half_extent.0 > width as f64
        || center.y + half_extent.1 > height as f64
    {
        return Err(Error::InvalidValue(format!(
            "object does not fit into a {width}x{height} raster"
        )));
    }
    if !(spec.noise >= 0.0 && spec.noise.is_finite()) {
        return Err(Error::InvalidValue("noise must be finite and non-negative".into()));
    }

    let inside = |x: usize, y: usize| {
        let dx = x as f64 + 0.5 - center.x;
        let dy = y as f64 + 0.5 - center.y;
        match spec.shape {
            Shape::Rect { width: w, height: h } => {
                let u = dx * cos + dy * sin;
                let v = -dx * sin + dy * cos;
                u.abs() <= w / 2.0 + 1e-9 && v.abs() <= h / 2.0 + 1e-9
            }
            Shape::Circle { radius } => dx * dx + dy * dy <= radius * radius + 1e-9,
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut raster = Raster::blank(width, height);
    for y in 0..height {
        for x in 0..width {
            if !inside(x, y) {
                continue;
            }
            let chroma = if spec.noise > 0.0 {
                Chroma::new(
                    spec.chroma.a + rng.gen_range(-spec.noise..=spec.noise),
                    spec.chroma.b + rng.gen_range(-spec.noise..=spec.noise),
                )
            } else {
                spec.chroma
            };
            raster.set(x, y, Some(chroma));
        }
    }
    Ok(raster)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;

    const GREY: Chroma = Chroma { a: 128.0, b: 128.0 };

    #[test]
    fn square_pixel_count() {
        let spec = ObjectSpec::new(
            Shape::Rect {
                width: 10.0,
                height: 10.0,
            },
            GREY,
        );
        let r = render_object(&spec, 32, 32).unwrap();
        assert_eq!(r.object_pixel_count(), 100);
        let bb = r.mask().bounding_box().unwrap();
        assert_eq!((bb.width(), bb.height()), (10, 10));
    }

    #[test]
    fn disk_pixel_count_close_to_area() {
        let spec = ObjectSpec::new(Shape::Circle { radius: 20.0 }, GREY);
        let r = render_object(&spec, 64, 64).unwrap();
        let expected = PI * 400.0;
        let n = r.object_pixel_count() as f64;
        assert!((n - expected).abs() / expected < 0.02, "{n}");
    }

    #[test]
    fn rendering_is_deterministic() {
        let spec = ObjectSpec {
            rotation: 0.4,
            noise: 5.0,
            seed: 11,
            ..ObjectSpec::new(
                Shape::Rect {
                    width: 20.0,
                    height: 8.0,
                },
                GREY,
            )
        };
        assert_eq!(
            render_object(&spec, 40, 40).unwrap(),
            render_object(&spec, 40, 40).unwrap()
        );
        let other = ObjectSpec { seed: 12, ..spec };
        assert_ne!(
            render_object(&spec, 40, 40).unwrap(),
            render_object(&other, 40, 40).unwrap()
        );
    }

    #[test]
    fn oversized_objects_are_rejected() {
        let spec = ObjectSpec::new(Shape::Circle { radius: 20.0 }, GREY);
        assert!(render_object(&spec, 30, 30).is_err());
        let rotated = ObjectSpec {
            rotation: PI / 4.0,
            ..ObjectSpec::new(
                Shape::Rect {
                    width: 20.0,
                    height: 20.0,
                },
                GREY,
            )
        };
        assert!(render_object(&rotated, 24, 24).is_err());
        assert!(render_object(&rotated, 30, 30).is_ok());
    }

    #[test]
    fn mask_rotation_and_shift() {
        let m = Mask::from_fn(3, 2, |x, y| x == 0 && y == 0);
        let r = m.rotated_90();
        assert_eq!((r.width(), r.height()), (2, 3));
        assert!(r.get(1, 0));
        assert_eq!(r.count(), 1);
        let s = m.shifted(2, 1);
        assert!(s.get(2, 1));
        assert_eq!(s.count(), 1);
    }
}
