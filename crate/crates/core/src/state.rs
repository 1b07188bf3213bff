//! Named-coordinate state points and axis-aligned regions over them.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

/// A point of a (local) state space, addressed by coordinate name.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct State(BTreeMap<String, f64>);

impl State {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs<I, K>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (K, f64)>,
        K: Into<String>,
    {
        Self(pairs.into_iter().map(|(k, v)| (k.into(), v)).collect())
    }

    pub fn get(&self, coord: &str) -> Option<f64> {
        self.0.get(coord).copied()
    }

    /// Overwrites (or inserts) a coordinate.
    pub fn set(&mut self, coord: &str, value: f64) {
        match self.0.get_mut(coord) {
            Some(slot) => *slot = value,
            None => {
                self.0.insert(coord.to_owned(), value);
            }
        }
    }

    pub fn with(mut self, coord: &str, value: f64) -> Self {
        self.set(coord, value);
        self
    }

    pub fn coords(&self) -> impl Iterator<Item = (&str, f64)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.0.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, (k, v)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{k}={v}")?;
        }
        f.write_str(")")
    }
}

/// A real interval whose ends may each be open or closed. Missing ends are unbounded.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    #[serde(default = "neg_inf", skip_serializing_if = "is_neg_inf")]
    pub lo: f64,
    #[serde(default = "pos_inf", skip_serializing_if = "is_pos_inf")]
    pub hi: f64,
    #[serde(default, skip_serializing_if = "is_false")]
    pub lo_open: bool,
    #[serde(default, skip_serializing_if = "is_false")]
    pub hi_open: bool,
}

fn neg_inf() -> f64 {
    f64::NEG_INFINITY
}
fn pos_inf() -> f64 {
    f64::INFINITY
}
fn is_neg_inf(v: &f64) -> bool {
    *v == f64::NEG_INFINITY
}
fn is_pos_inf(v: &f64) -> bool {
    *v == f64::INFINITY
}
fn is_false(b: &bool) -> bool {
    !*b
}

impl Interval {
    pub const UNBOUNDED: Interval = Interval {
        lo: f64::NEG_INFINITY,
        hi: f64::INFINITY,
        lo_open: false,
        hi_open: false,
    };

    pub fn closed(lo: f64, hi: f64) -> Self {
        Self { lo, hi, lo_open: false, hi_open: false }
    }

    pub fn open(lo: f64, hi: f64) -> Self {
        Self { lo, hi, lo_open: true, hi_open: true }
    }

    /// `[lo, hi)`
    pub fn closed_open(lo: f64, hi: f64) -> Self {
        Self { lo, hi, lo_open: false, hi_open: true }
    }

    /// `(lo, hi]`
    pub fn open_closed(lo: f64, hi: f64) -> Self {
        Self { lo, hi, lo_open: true, hi_open: false }
    }

    pub fn contains(&self, v: f64) -> bool {
        let above = if self.lo_open { v > self.lo } else { v >= self.lo };
        let below = if self.hi_open { v < self.hi } else { v <= self.hi };
        above && below
    }

    pub fn is_empty(&self) -> bool {
        self.lo > self.hi || (self.lo == self.hi && (self.lo_open || self.hi_open))
    }

    pub fn is_bounded(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let l = if self.lo_open { '(' } else { '[' };
        let r = if self.hi_open { ')' } else { ']' };
        write!(f, "{l}{}, {}{r}", self.lo, self.hi)
    }
}

/// Product of per-coordinate intervals. A coordinate not listed is unconstrained.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BoxRegion(BTreeMap<String, Interval>);

impl BoxRegion {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, coord: &str, interval: Interval) -> Self {
        self.0.insert(coord.to_owned(), interval);
        self
    }

    pub fn bound(&self, coord: &str) -> Option<&Interval> {
        self.0.get(coord)
    }

    pub fn bounds(&self) -> impl Iterator<Item = (&str, &Interval)> {
        self.0.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn coord_names(&self) -> impl Iterator<Item = &str> {
        self.0.keys().map(String::as_str)
    }

    /// True iff every constrained coordinate is present in `state` and inside its interval.
    pub fn contains(&self, state: &State) -> bool {
        self.0
            .iter()
            .all(|(name, iv)| state.get(name).is_some_and(|v| iv.contains(v)))
    }
}
