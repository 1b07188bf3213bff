//! Simplicial models of systems with modes.
//!
//! Modes are simplices of an abstract simplicial complex, a partition of unity
//! calibrates states onto its realisation, and threshold-gated transitions move
//! control between modes. The racing-car case study lives in [`scenario`].

pub mod complex;
pub mod environment;
pub mod geometry;
pub mod modes;
pub mod par;
pub mod scenario;
pub mod state;
pub mod trace;
