use serde::{Deserialize, Serialize};

use super::circle::{min_enclosing_circle, Circle};
use super::raster::{Mask, PixelRect, Point};
use crate::error::{Error, Result};

/// Neighbour offsets, clockwise on screen starting east (y grows downward).
const NEIGHBOURS: [(isize, isize); 8] = [(1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1)];

fn direction_of(dx: isize, dy: isize) -> usize {
    NEIGHBOURS
        .iter()
        .position(|&d| d == (dx, dy))
        .expect("backtrack pixel is a neighbour")
}

/// Outer boundary of the first object component in raster order, as pixel coordinates.
///
/// Moore-neighbour tracing with Jacob's stopping criterion: the walk ends when the start
/// pixel is entered again from the same background neighbour.
pub fn trace_contour(mask: &Mask) -> Vec<(usize, usize)> {
    let start = (0..mask.height())
        .flat_map(|y| (0..mask.width()).map(move |x| (x, y)))
        .find(|&(x, y)| mask.get(x, y));
    let Some(start) = start else {
        return Vec::new();
    };
    let start = (start.0 as isize, start.1 as isize);
    let start_back = (start.0 - 1, start.1);

    let mut contour = vec![(start.0 as usize, start.1 as usize)];
    let (mut current, mut back) = (start, start_back);
    // a closed walk never needs more than 4 visits per boundary pixel
    let limit = 4 * mask.width() * mask.height() + 8;
    for _ in 0..limit {
        let from = direction_of(back.0 - current.0, back.1 - current.1);
        let mut next = None;
        for k in 1..=8 {
            let d = (from + k) % 8;
            let q = (current.0 + NEIGHBOURS[d].0, current.1 + NEIGHBOURS[d].1);
            if mask.get_signed(q.0, q.1) {
                let prev = (from + k - 1) % 8;
                next = Some((q, (current.0 + NEIGHBOURS[prev].0, current.1 + NEIGHBOURS[prev].1)));
                break;
            }
        }
        let Some((q, b)) = next else {
            break; // isolated pixel
        };
        if q == start && b == start_back {
            break;
        }
        current = q;
        back = b;
        contour.push((current.0 as usize, current.1 as usize));
    }
    contour
}

/// Signed shoelace area; positive for counter-clockwise vertices in y-up axes.
pub fn polygon_area(points: &[Point]) -> f64 {
    if points.len() < 3 {
        return 0.0;
    }
    let twice: f64 = points
        .iter()
        .zip(points.iter().cycle().skip(1))
        .map(|(p, q)| p.x * q.y - q.x * p.y)
        .sum();
    twice / 2.0
}

fn cross(o: Point, a: Point, b: Point) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

/// Convex hull by the monotone chain, counter-clockwise, without collinear points.
pub fn convex_hull(points: &[Point]) -> Vec<Point> {
    let mut pts = points.to_vec();
    pts.sort_by(|p, q| p.x.total_cmp(&q.x).then(p.y.total_cmp(&q.y)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut hull: Vec<Point> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let base = hull.len();
        let iter: Box<dyn Iterator<Item = &Point>> = if pass == 0 {
            Box::new(pts.iter())
        } else {
            Box::new(pts.iter().rev())
        };
        for &p in iter {
            while hull.len() >= base + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull
}

/// Rectangle of any orientation enclosing a point set with minimal area.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct OrientedBox {
    /// Direction of the first side, radians.
    pub angle: f64,
    pub length: f64,
    pub breadth: f64,
}

impl OrientedBox {
    pub fn area(&self) -> f64 {
        self.length * self.breadth
    }
}

/// Minimal-area box over all hull edge directions (rotating calipers).
pub fn min_area_box(hull: &[Point]) -> OrientedBox {
    let mut best = OrientedBox {
        angle: 0.0,
        length: 0.0,
        breadth: 0.0,
    };
    if hull.len() < 2 {
        return best;
    }
    let mut best_area = f64::INFINITY;
    for i in 0..hull.len() {
        let (p, q) = (hull[i], hull[(i + 1) % hull.len()]);
        let len = p.distance(q);
        if len == 0.0 {
            continue;
        }
        let (ux, uy) = ((q.x - p.x) / len, (q.y - p.y) / len);
        let (mut lo_u, mut hi_u, mut lo_v, mut hi_v) =
            (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for r in hull {
            let u = r.x * ux + r.y * uy;
            let v = -r.x * uy + r.y * ux;
            lo_u = lo_u.min(u);
            hi_u = hi_u.max(u);
            lo_v = lo_v.min(v);
            hi_v = hi_v.max(v);
        }
        let area = (hi_u - lo_u) * (hi_v - lo_v);
        if area < best_area {
            best_area = area;
            best = OrientedBox {
                angle: uy.atan2(ux),
                length: hi_u - lo_u,
                breadth: hi_v - lo_v,
            };
        }
    }
    best
}

/// Geometry of an object silhouette. Areas are measured on the traced outline through
/// pixel centers, so the object polygon always lies inside both enclosing shapes.
#[derive(Debug, Clone, PartialEq)]
pub struct SilhouetteStats {
    pub mask: Mask,
    pub axis_box: PixelRect,
    pub contour: Vec<Point>,
    pub oriented_box: OrientedBox,
    pub oriented_box_area: f64,
    pub min_circle: Circle,
    pub min_circle_area: f64,
    pub object_area: f64,
}

impl SilhouetteStats {
    pub fn from_mask(mask: &Mask) -> Result<Self> {
        let axis_box = mask
            .bounding_box()
            .ok_or_else(|| Error::DegenerateInput("mask has no object pixels".into()))?;
        let contour: Vec<Point> = trace_contour(mask)
            .into_iter()
            .map(|(x, y)| Point::new(x as f64 + 0.5, y as f64 + 0.5))
            .collect();
        let hull = convex_hull(&contour);
        let oriented_box = min_area_box(&hull);
        let min_circle = min_enclosing_circle(&hull);
        Ok(Self {
            mask: mask.clone(),
            axis_box,
            object_area: polygon_area(&contour).abs(),
            oriented_box_area: oriented_box.area(),
            oriented_box,
            min_circle_area: std::f64::consts::PI * min_circle.radius * min_circle.radius,
            min_circle,
            contour,
        })
    }
}

/// Object area relative to the oriented box and to the enclosing circle.
pub fn shape_ratios(stats: &SilhouetteStats) -> Result<[f64; 2]> {
    if !(stats.object_area > 0.0 && stats.oriented_box_area > 0.0 && stats.min_circle_area > 0.0) {
        return Err(Error::DegenerateInput("silhouette has zero area".into()));
    }
    Ok([
        (stats.object_area / stats.oriented_box_area).min(1.0),
        (stats.object_area / stats.min_circle_area).min(1.0),
    ])
}

/// Shape ratios straight from a mask.
pub fn mask_shape_ratios(mask: &Mask) -> Result<[f64; 2]> {
    shape_ratios(&SilhouetteStats::from_mask(mask)?)
}
