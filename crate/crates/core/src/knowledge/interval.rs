use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for closed-interval containment and gap tests.
pub const EPSILON: f64 = 1e-9;

/// A closed characteristic interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 2]", into = "[f64; 2]")]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) || lo > hi {
            return Err(Error::InvalidValue(format!("invalid interval [{lo}, {hi}]")));
        }
        Ok(Self { lo, hi })
    }

    pub fn point(v: f64) -> Self {
        Self { lo: v, hi: v }
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, v: f64) -> bool {
        v >= self.lo - EPSILON && v <= self.hi + EPSILON
    }

    /// Shortest distance between the two intervals; zero when they overlap or touch.
    pub fn gap(&self, other: &Interval) -> f64 {
        let d = if self.hi < other.lo {
            other.lo - self.hi
        } else if other.hi < self.lo {
            self.lo - other.hi
        } else {
            0.0
        };
        if d <= EPSILON {
            0.0
        } else {
            d
        }
    }

    pub fn hull(&self, other: &Interval) -> Interval {
        Interval {
            lo: self.lo.min(other.lo),
            hi: self.hi.max(other.hi),
        }
    }
}

impl TryFrom<[f64; 2]> for Interval {
    type Error = Error;

    fn try_from([lo, hi]: [f64; 2]) -> Result<Self> {
        Interval::new(lo, hi)
    }
}

impl From<Interval> for [f64; 2] {
    fn from(i: Interval) -> Self {
        [i.lo, i.hi]
    }
}

/// A category's interval vector for one feature, with the number of percepts it absorbed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalVector {
    intervals: Vec<Interval>,
    count: u64,
}

impl IntervalVector {
    pub fn new(intervals: Vec<Interval>, count: u64) -> Result<Self> {
        if intervals.is_empty() {
            return Err(Error::InvalidValue("interval vector without characteristics".into()));
        }
        if count == 0 {
            return Err(Error::InvalidValue("interval vector count must be positive".into()));
        }
        Ok(Self { intervals, count })
    }

    /// Degenerate `[v, v]` intervals around a percept's values, count 1.
    pub fn from_point(values: &[f64]) -> Self {
        Self {
            intervals: values.iter().copied().map(Interval::point).collect(),
            count: 1,
        }
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn arity(&self) -> usize {
        self.intervals.len()
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub(crate) fn increment(&mut self) {
        self.count += 1;
    }

    pub(crate) fn decrement(&mut self) {
        debug_assert!(self.count > 1);
        self.count -= 1;
    }

    /// True if every characteristic value lies inside its interval.
    pub fn contains(&self, values: &[f64]) -> bool {
        values.len() == self.intervals.len() && self.intervals.iter().zip(values).all(|(i, &v)| i.contains(v))
    }

    /// Sum over characteristics of the interval gaps (the Δ distance).
    pub(crate) fn delta(&self, other: &IntervalVector) -> f64 {
        debug_assert_eq!(self.arity(), other.arity());
        self.intervals.iter().zip(&other.intervals).map(|(a, b)| a.gap(b)).sum()
    }

    /// Δ distance to the degenerate form of a percept vector.
    pub(crate) fn delta_to_point(&self, values: &[f64]) -> f64 {
        self.intervals
            .iter()
            .zip(values)
            .map(|(i, &v)| i.gap(&Interval::point(v)))
            .sum()
    }

    /// Per-characteristic hull with summed counts.
    pub(crate) fn fold(&self, other: &IntervalVector) -> IntervalVector {
        IntervalVector {
            intervals: self
                .intervals
                .iter()
                .zip(&other.intervals)
                .map(|(a, b)| a.hull(b))
                .collect(),
            count: self.count + other.count,
        }
    }
}

/// Overall distance between two interval vectors of the same feature, in `[0, 2]` for
/// percentage characteristics.
pub fn delta_distance(a: &IntervalVector, b: &IntervalVector) -> Result<f64> {
    if a.arity() != b.arity() {
        return Err(Error::DimensionMismatch {
            expected: a.arity(),
            actual: b.arity(),
        });
    }
    Ok(a.delta(b))
}
