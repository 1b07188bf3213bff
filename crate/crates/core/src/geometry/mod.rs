//! Realisations of complexes: barycentric points, supports and faces, straight
//! segments and piecewise-linear paths, partitions of unity and belief.

mod partition;
mod path;
mod point;

use thiserror::Error;

use crate::complex::{ComplexError, Simplex};
use crate::state::State;

pub use partition::{breakpoint_grid, product_partition, Component, PartitionFile, PartitionOfUnity, PiecewiseLinear};
pub use path::{classify_segment, EndpointKind, PlPath, SegmentClassification};
pub use point::{belief, interior_support, realize_map, BarycentricPoint, DEFAULT_SNAP, SUM_TOLERANCE};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("expected {expected} weights, found {found}")]
    WrongLength { expected: usize, found: usize },
    #[error("weight of `{vertex}` is {value}; weights must be finite and nonnegative")]
    NegativeWeight { vertex: String, value: f64 },
    #[error("all weights are zero")]
    ZeroTotal,
    #[error("weights sum to {sum}, not 1")]
    NotNormalized { sum: f64 },
    #[error("positive components {0} do not form a simplex of the complex")]
    SupportNotASimplex(Simplex),
    #[error("segment passes through {0}, which is not a simplex")]
    SegmentLeavesComplex(Simplex),
    #[error("points belong to different complexes")]
    ComplexMismatch,
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("state has no coordinate `{0}`")]
    MissingCoordinate(String),
    #[error("state {0} lies outside every cover set")]
    OutsideCover(State),
    #[error("bad breakpoint table: {0}")]
    BadBreakpoints(String),
    #[error("path has no waypoints")]
    EmptyPath,
    #[error("waypoint times must be strictly increasing (at t={at})")]
    TimesNotIncreasing { at: f64 },
    #[error(transparent)]
    Complex(#[from] ComplexError),
}
