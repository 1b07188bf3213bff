//! Mode packages, the inc/proj transition table, the `tran` dispatcher, hysteresis
//! and the sheaf-law validator.

mod laws;
mod system;
mod table;
mod transition;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::complex::{ComplexError, Simplex};
use crate::geometry::{belief, BarycentricPoint, GeometryError, PartitionOfUnity};
use crate::state::{BoxRegion, State};

pub use laws::{generate_probes, validate_sheaf_laws, LawEntry, LawReport, LawStatus, Witness};
pub use system::{ModeFile, ModeSystem, SystemFile};
pub use table::{
    pair_key, parse_pair, CoordSource, MapsFile, PerMode, StateMap, ThresholdFile, TransitionTable, DEFAULT_EPSILON,
    DEFAULT_ETA, DEFAULT_MAP_TOLERANCE,
};
pub use transition::{
    hysteresis_gate, inc_domain_check, proj_domain_check, tran, Direction, SupportTracker, TransitionOutcome,
    TransitionReason,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModeError {
    #[error("state {state} is outside the state space of mode {mode}")]
    OutOfStateSpace { mode: Simplex, state: State },
    #[error("{to} is not a strict subset of {from}")]
    NotASubset { from: Simplex, to: Simplex },
    #[error("{to} is not a strict superset of {from}")]
    NotASuperset { from: Simplex, to: Simplex },
    #[error("no package for mode {0}")]
    UnknownMode(Simplex),
    #[error("state has no coordinate `{0}`")]
    MissingCoordinate(String),
    #[error("bad mode pair key `{0}` (expected `X->Y`)")]
    BadPairKey(String),
    #[error("threshold error: {0}")]
    Threshold(String),
    #[error("map {pair}: {reason}")]
    BadMap { pair: String, reason: String },
    #[error("state space of mode {0} is unbounded; probes need finite bounds")]
    Unbounded(Simplex),
    #[error("malformed system file: {0}")]
    Parse(String),
    #[error("no probes")]
    NoProbes,
    #[error("partition axiom violated at {state}: {error}")]
    Axiom { state: State, error: GeometryError },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Complex(#[from] ComplexError),
}

/// The paper's check type.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Check {
    #[serde(rename = "OK")]
    Ok,
    #[serde(rename = "NotOK")]
    NotOk,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Check::Ok => "OK",
            Check::NotOk => "NotOK",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Zone {
    Comfort,
    GrowingCrisis,
    Panic,
}

/// Everything a mode `X` needs locally: its state space `S_X`, its calibration `φ_X`,
/// the name of its control algorithm and the comfort/panic bounds.
#[derive(Debug, Clone)]
pub struct ModePackage {
    pub mode: Simplex,
    pub state_space: BoxRegion,
    pub phi: PartitionOfUnity,
    pub algorithm: String,
    pub kappa: f64,
    pub pi: f64,
}

impl ModePackage {
    pub fn new(
        mode: Simplex,
        state_space: BoxRegion,
        phi: PartitionOfUnity,
        algorithm: impl Into<String>,
        kappa: f64,
        pi: f64,
    ) -> Result<Self, ModeError> {
        if !(0.0 < pi && pi < kappa && kappa < 1.0) {
            return Err(ModeError::Threshold(format!(
                "mode {mode}: need 0 < pi < kappa < 1, got pi={pi}, kappa={kappa}"
            )));
        }
        if mode.is_empty() {
            return Err(ComplexError::EmptySimplex.into());
        }
        phi.complex().vertices().mask_of(&mode)?;
        Ok(Self { mode, state_space, phi, algorithm: algorithm.into(), kappa, pi })
    }

    pub fn contains(&self, state: &State) -> bool {
        self.state_space.contains(state)
    }

    /// `φ_X(s)`, defined only on `S_X`.
    pub fn phi_at(&self, state: &State) -> Result<BarycentricPoint, ModeError> {
        if !self.contains(state) {
            return Err(ModeError::OutOfStateSpace { mode: self.mode.clone(), state: state.clone() });
        }
        Ok(self.phi.evaluate(state)?)
    }

    /// `B_X(Y)(s)`.
    pub fn belief(&self, state: &State, subset: &Simplex) -> Result<f64, ModeError> {
        Ok(belief(&self.phi_at(state)?, subset))
    }

    /// Whether `s` lies in `W_X = {s : π_X ≤ B_X(X)(s)}`, where `X` models the state reasonably well.
    pub fn models_well(&self, state: &State) -> Result<bool, ModeError> {
        Ok(self.pi <= self.belief(state, &self.mode)?)
    }

    pub fn zone_of_belief(&self, b: f64) -> Zone {
        if b >= self.kappa {
            Zone::Comfort
        } else if b < self.pi {
            Zone::Panic
        } else {
            Zone::GrowingCrisis
        }
    }
}

/// Comfort iff `B_X(X) ≥ κ_X`, Panic iff `B_X(X) < π_X`, GrowingCrisis otherwise.
pub fn comfort_zone_status(pkg: &ModePackage, state: &State) -> Result<Zone, ModeError> {
    let b = pkg.belief(state, &pkg.mode)?;
    Ok(pkg.zone_of_belief(b))
}
