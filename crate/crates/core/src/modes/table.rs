use std::collections::BTreeMap;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use super::ModeError;
use crate::complex::Simplex;
use crate::geometry::DEFAULT_SNAP;
use crate::state::State;

pub const DEFAULT_EPSILON: f64 = 0.05;
pub const DEFAULT_ETA: f64 = 0.05;
pub const DEFAULT_MAP_TOLERANCE: f64 = 1e-12;

/// Where one output coordinate of a state map comes from.
///
/// JSON: a coordinate name (`"x"`), a number (`0`), or `{"from": "x", "scale": 1, "offset": 0.08}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CoordSource {
    Copy(String),
    Const(f64),
    Affine {
        from: String,
        #[serde(default = "one")]
        scale: f64,
        #[serde(default)]
        offset: f64,
    },
}

fn one() -> f64 {
    1.0
}

impl CoordSource {
    fn source(&self) -> Option<&str> {
        match self {
            CoordSource::Copy(c) | CoordSource::Affine { from: c, .. } => Some(c),
            CoordSource::Const(_) => None,
        }
    }

    fn is_identity(&self, out: &str) -> bool {
        match self {
            CoordSource::Copy(c) => c == out,
            CoordSource::Affine { from, scale, offset } => from == out && *scale == 1.0 && *offset == 0.0,
            CoordSource::Const(_) => false,
        }
    }
}

/// A declarative state map: each output coordinate is a renaming, constant or
/// affine function of one input coordinate. Inputs not mentioned are dropped.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StateMap(pub IndexMap<String, CoordSource>);

impl StateMap {
    /// Copies each listed coordinate unchanged.
    pub fn identity<'a>(coords: impl IntoIterator<Item = &'a str>) -> Self {
        Self(coords.into_iter().map(|c| (c.to_owned(), CoordSource::Copy(c.to_owned()))).collect())
    }

    pub fn apply(&self, s: &State) -> Result<State, ModeError> {
        let mut out = State::new();
        for (name, src) in &self.0 {
            let value = match src {
                CoordSource::Const(c) => *c,
                CoordSource::Copy(from) => s.get(from).ok_or_else(|| ModeError::MissingCoordinate(from.clone()))?,
                CoordSource::Affine { from, scale, offset } => {
                    scale * s.get(from).ok_or_else(|| ModeError::MissingCoordinate(from.clone()))? + offset
                }
            };
            out.set(name, value);
        }
        Ok(out)
    }

    pub fn outputs(&self) -> impl Iterator<Item = &str> {
        self.0.keys().map(String::as_str)
    }

    pub fn inputs(&self) -> impl Iterator<Item = &str> {
        self.0.values().filter_map(CoordSource::source)
    }

    /// True when every output is copied from the coordinate of the same name.
    pub fn is_coordinate_identity(&self) -> bool {
        self.0.iter().all(|(out, src)| src.is_identity(out))
    }
}

/// A mode-keyed threshold: one number for every mode, or a table keyed by mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PerMode {
    All(f64),
    ByMode(BTreeMap<String, f64>),
}

impl PerMode {
    pub fn get(&self, mode: &Simplex) -> Option<f64> {
        match self {
            PerMode::All(v) => Some(*v),
            PerMode::ByMode(m) => m.get(&mode.key()).copied(),
        }
    }
}

/// `{ "kappa": …, "pi": …, "epsilon": {"X->Y": …}, "eta": … }`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdFile {
    pub kappa: PerMode,
    pub pi: PerMode,
    #[serde(default)]
    pub epsilon: BTreeMap<String, f64>,
    #[serde(default = "default_epsilon")]
    pub default_epsilon: f64,
    #[serde(default = "default_eta")]
    pub eta: f64,
    #[serde(default = "default_snap")]
    pub snap: f64,
    #[serde(default = "default_map_tolerance")]
    pub map_tolerance: f64,
}

fn default_epsilon() -> f64 {
    DEFAULT_EPSILON
}
fn default_eta() -> f64 {
    DEFAULT_ETA
}
fn default_snap() -> f64 {
    DEFAULT_SNAP
}
fn default_map_tolerance() -> f64 {
    DEFAULT_MAP_TOLERANCE
}

/// `{ "inc": {"Y->X": map}, "proj": {"X->Y": map} }`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MapsFile {
    #[serde(default)]
    pub inc: BTreeMap<String, StateMap>,
    #[serde(default)]
    pub proj: BTreeMap<String, StateMap>,
}

/// Parses `"X->Y"` into its two mode keys.
pub fn parse_pair(key: &str) -> Result<(Simplex, Simplex), ModeError> {
    let (a, b) = key.split_once("->").ok_or_else(|| ModeError::BadPairKey(key.to_owned()))?;
    Ok((Simplex::parse_key(a)?, Simplex::parse_key(b)?))
}

pub fn pair_key(from: &Simplex, to: &Simplex) -> String {
    format!("{}->{}", from.key(), to.key())
}

/// The partial transition maps between nested modes, with their thresholds.
#[derive(Debug, Clone)]
pub struct TransitionTable {
    pub(crate) inc: BTreeMap<(Simplex, Simplex), StateMap>,
    pub(crate) proj: BTreeMap<(Simplex, Simplex), StateMap>,
    pub(crate) epsilon: BTreeMap<(Simplex, Simplex), f64>,
    pub default_epsilon: f64,
    pub eta: f64,
    pub snap: f64,
    pub map_tolerance: f64,
}

impl Default for TransitionTable {
    fn default() -> Self {
        Self {
            inc: BTreeMap::new(),
            proj: BTreeMap::new(),
            epsilon: BTreeMap::new(),
            default_epsilon: DEFAULT_EPSILON,
            eta: DEFAULT_ETA,
            snap: DEFAULT_SNAP,
            map_tolerance: DEFAULT_MAP_TOLERANCE,
        }
    }
}

impl TransitionTable {
    /// `inc` from `from` into the strict superset `to`.
    pub fn set_inc(&mut self, from: &Simplex, to: &Simplex, map: StateMap) -> Result<(), ModeError> {
        if !from.is_strict_subset(to) {
            return Err(ModeError::NotASuperset { from: from.clone(), to: to.clone() });
        }
        self.inc.insert((from.clone(), to.clone()), map);
        Ok(())
    }

    /// `proj` from `from` onto the strict subset `to`.
    pub fn set_proj(&mut self, from: &Simplex, to: &Simplex, map: StateMap) -> Result<(), ModeError> {
        if !to.is_strict_subset(from) {
            return Err(ModeError::NotASubset { from: from.clone(), to: to.clone() });
        }
        self.proj.insert((from.clone(), to.clone()), map);
        Ok(())
    }

    pub fn set_epsilon(&mut self, from: &Simplex, to: &Simplex, eps: f64) -> Result<(), ModeError> {
        if !to.is_strict_subset(from) {
            return Err(ModeError::NotASubset { from: from.clone(), to: to.clone() });
        }
        if !(eps > 0.0 && eps < 1.0) {
            return Err(ModeError::Threshold(format!("epsilon {} must lie in (0,1), got {eps}", pair_key(from, to))));
        }
        self.epsilon.insert((from.clone(), to.clone()), eps);
        Ok(())
    }

    pub fn inc_map(&self, from: &Simplex, to: &Simplex) -> Option<&StateMap> {
        self.inc.get(&(from.clone(), to.clone()))
    }

    pub fn proj_map(&self, from: &Simplex, to: &Simplex) -> Option<&StateMap> {
        self.proj.get(&(from.clone(), to.clone()))
    }

    /// `ε_{from→to}`, falling back to the table default.
    pub fn epsilon(&self, from: &Simplex, to: &Simplex) -> f64 {
        self.epsilon
            .get(&(from.clone(), to.clone()))
            .copied()
            .unwrap_or(self.default_epsilon)
    }

    pub fn inc_pairs(&self) -> impl Iterator<Item = (&Simplex, &Simplex, &StateMap)> {
        self.inc.iter().map(|((a, b), m)| (a, b, m))
    }

    pub fn proj_pairs(&self) -> impl Iterator<Item = (&Simplex, &Simplex, &StateMap)> {
        self.proj.iter().map(|((a, b), m)| (a, b, m))
    }

    pub fn to_maps_file(&self) -> MapsFile {
        MapsFile {
            inc: self.inc.iter().map(|((a, b), m)| (pair_key(a, b), m.clone())).collect(),
            proj: self.proj.iter().map(|((a, b), m)| (pair_key(a, b), m.clone())).collect(),
        }
    }
}
