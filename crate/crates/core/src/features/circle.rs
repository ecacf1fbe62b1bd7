use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::raster::Point;

const SHUFFLE_SEED: u64 = 0x5745_4c5a;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Circle {
    pub center: Point,
    pub radius: f64,
}

impl Circle {
    pub fn contains(&self, p: Point) -> bool {
        self.center.distance(p) <= self.radius + 1e-9 * self.radius.max(1.0)
    }

    /// Circle with `p` and `q` as a diameter.
    pub fn through_two(p: Point, q: Point) -> Self {
        Circle {
            center: Point::new((p.x + q.x) / 2.0, (p.y + q.y) / 2.0),
            radius: p.distance(q) / 2.0,
        }
    }

    /// Circumcircle; `None` for collinear points.
    pub fn through_three(a: Point, b: Point, c: Point) -> Option<Self> {
        let (bx, by) = (b.x - a.x, b.y - a.y);
        let (cx, cy) = (c.x - a.x, c.y - a.y);
        let d = 2.0 * (bx * cy - by * cx);
        let scale = (bx * bx + by * by).max(cx * cx + cy * cy);
        if d.abs() <= 1e-12 * scale {
            return None;
        }
        let b2 = bx * bx + by * by;
        let c2 = cx * cx + cy * cy;
        let ux = (cy * b2 - by * c2) / d;
        let uy = (bx * c2 - cx * b2) / d;
        Some(Circle {
            center: Point::new(a.x + ux, a.y + uy),
            radius: ux.hypot(uy),
        })
    }
}

fn circle_on_three(a: Point, b: Point, c: Point) -> Circle {
    Circle::through_three(a, b, c).unwrap_or_else(|| {
        [
            Circle::through_two(a, b),
            Circle::through_two(a, c),
            Circle::through_two(b, c),
        ]
        .into_iter()
        .max_by(|p, q| p.radius.total_cmp(&q.radius))
        .expect("three candidates")
    })
}

/// Smallest circle containing every point (randomized incremental construction).
/// An empty input yields a zero circle at the origin.
pub fn min_enclosing_circle(points: &[Point]) -> Circle {
    let mut pts = points.to_vec();
    pts.shuffle(&mut ChaCha8Rng::seed_from_u64(SHUFFLE_SEED));
    let Some(&first) = pts.first() else {
        return Circle {
            center: Point::new(0.0, 0.0),
            radius: 0.0,
        };
    };
    let mut c = Circle {
        center: first,
        radius: 0.0,
    };
    for i in 1..pts.len() {
        if c.contains(pts[i]) {
            continue;
        }
        c = Circle {
            center: pts[i],
            radius: 0.0,
        };
        for j in 0..i {
            if c.contains(pts[j]) {
                continue;
            }
            c = Circle::through_two(pts[i], pts[j]);
            for k in 0..j {
                if !c.contains(pts[k]) {
                    c = circle_on_three(pts[i], pts[j], pts[k]);
                }
            }
        }
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_and_two_points() {
        let p = Point::new(3.0, 4.0);
        let c = min_enclosing_circle(&[p]);
        assert_eq!(c.radius, 0.0);
        assert_eq!(c.center, p);
        let c = min_enclosing_circle(&[Point::new(0.0, 0.0), Point::new(6.0, 8.0)]);
        assert!((2.0 * c.radius - 10.0).abs() < 1e-12);
    }

    #[test]
    fn collinear_triple_uses_extreme_pair() {
        let pts = [Point::new(0.0, 0.0), Point::new(1.0, 1.0), Point::new(4.0, 4.0)];
        let c = min_enclosing_circle(&pts);
        assert!((c.radius - 32f64.sqrt() / 2.0).abs() < 1e-12);
    }

    #[test]
    fn right_triangle_circumcircle() {
        let c = Circle::through_three(Point::new(0.0, 0.0), Point::new(4.0, 0.0), Point::new(0.0, 3.0)).unwrap();
        assert!((c.radius - 2.5).abs() < 1e-12);
        assert!((c.center.x - 2.0).abs() < 1e-12 && (c.center.y - 1.5).abs() < 1e-12);
    }
}
