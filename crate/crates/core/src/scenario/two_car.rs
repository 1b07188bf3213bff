//! Joint models for two cars: the independent product and the chicane system with
//! wait vertices.

use serde::{Deserialize, Serialize};

use super::algorithms::{CU, STR};
use super::ScenarioError;
use crate::complex::{pair_label, Complex, Simplex, VertexSet};
use crate::geometry::{product_partition, Component, PartitionFile, PartitionOfUnity};
use crate::state::State;
use crate::trace::{Event, EventKind};

pub const W: &str = "W";

/// `x → x1` for car 0, `x → x2` for car 1.
pub fn car_coord(coord: &str, car: usize) -> String {
    format!("{coord}{}", car + 1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaitConfig {
    /// Depth of the W strip before the chicane, as a fraction of `L`.
    #[serde(default = "default_d")]
    pub d_frac: f64,
    /// Restart timer of car 1, seconds.
    #[serde(default = "default_t1")]
    pub t1_s: f64,
    /// Restart timer of car 2, seconds. Must be shorter than `t1_s`.
    #[serde(default = "default_t2")]
    pub t2_s: f64,
}

fn default_d() -> f64 {
    0.05
}
fn default_t1() -> f64 {
    1.0
}
fn default_t2() -> f64 {
    0.4
}

impl Default for WaitConfig {
    fn default() -> Self {
        Self { d_frac: default_d(), t1_s: default_t1(), t2_s: default_t2() }
    }
}

/// The wait-region geometry in km.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChicaneGeometry {
    pub lo: f64,
    pub hi: f64,
    pub d: f64,
}

impl ChicaneGeometry {
    /// Car `car`'s W rectangle: its own position in `[lo - d, lo]`, the other car's in `[lo - 2d, hi]`.
    pub fn w_region(&self, car: usize) -> [(f64, f64); 2] {
        let own = (self.lo - self.d, self.lo);
        let other = (self.lo - 2.0 * self.d, self.hi);
        if car == 0 {
            [own, other]
        } else {
            [other, own]
        }
    }

    pub fn in_chicane(&self, x: f64) -> bool {
        self.lo < x && x < self.hi
    }
}

fn tent(coord: &str, a: f64, b: f64) -> Component {
    Component::pl(coord, &[[a, 0.0], [0.5 * (a + b), 1.0], [b, 0.0]])
}

/// The glued chicane complex: the tetrahedron on `{Str,Cu}²` and the tetrahedron on
/// `{Str,W}²`, sharing only `(Str,Str)`.
pub fn chicane_complex() -> Result<Complex, ScenarioError> {
    let labels = [
        (STR, STR),
        (STR, CU),
        (CU, STR),
        (CU, CU),
        (STR, W),
        (W, STR),
        (W, W),
    ]
    .map(|(a, b)| pair_label(a, b));
    let vertices = VertexSet::new(labels.iter().cloned())?;
    let curve_side = Simplex::new(labels[..4].iter().cloned());
    let wait_side = Simplex::new([&labels[0], &labels[4], &labels[5], &labels[6]].map(|s| s.clone()));
    Ok(Complex::new(vertices, &[curve_side, wait_side])?)
}

/// `(W,Str)` for car 0 waiting alone, `(Str,W)` for car 1.
pub fn pair_wait(car: usize) -> String {
    if car == 0 {
        pair_label(W, STR)
    } else {
        pair_label(STR, W)
    }
}

/// Joint state of two cars: coordinates renamed per car.
pub fn joint_state(states: &[State]) -> State {
    let mut s = State::new();
    for (car, st) in states.iter().enumerate() {
        for (c, v) in st.coords() {
            s.set(&car_coord(c, car), v);
        }
    }
    s
}

/// A two-car joint complex with its partition `ψ` and, for the chicane, the wait geometry.
#[derive(Debug, Clone)]
pub struct TwoCarModel {
    pub complex: Complex,
    pub psi: PartitionOfUnity,
    pub chicane: Option<ChicaneGeometry>,
    /// Per car, the mask of joint vertices whose car component is `W`.
    w_masks: [u64; 2],
}

impl TwoCarModel {
    /// Independent product of two copies of the single-car partition.
    pub fn product(phi: &PartitionOfUnity) -> Result<Self, ScenarioError> {
        let psi = product_partition(&phi.rename_coords(|c| car_coord(c, 0)), &phi.rename_coords(|c| car_coord(c, 1)))?;
        Ok(Self { complex: psi.complex().clone(), psi, chicane: None, w_masks: [0, 0] })
    }

    /// The chicane system. Each car's partition gains a `W` component, a product of
    /// tents over its W rectangle, carved out of `Str`: `φ_Str = 1 - φ_Cu - φ_W`.
    pub fn chicane(phi: &PartitionOfUnity, geometry: ChicaneGeometry) -> Result<Self, ScenarioError> {
        let cu = phi
            .component(CU)
            .ok_or_else(|| ScenarioError::Config(format!("partition has no `{CU}` component")))?;
        let path = Complex::new(
            VertexSet::new([STR, CU, W])?,
            &[Simplex::new([STR, CU]), Simplex::new([STR, W])],
        )?;
        let per_car = |car: usize| -> Result<PartitionOfUnity, ScenarioError> {
            let [r1, r2] = geometry.w_region(car);
            let w = Component::Product(vec![tent(&car_coord("x", 0), r1.0, r1.1), tent(&car_coord("x", 1), r2.0, r2.1)]);
            let cu_i = cu.rename_coords(&|c: &str| car_coord(c, car));
            let mut f = PartitionFile::new();
            f.insert(STR.into(), Component::OneMinus(vec![cu_i.clone(), w.clone()]));
            f.insert(CU.into(), cu_i);
            f.insert(W.into(), w);
            Ok(PartitionOfUnity::new(&path, &f)?.with_snap(phi.snap()))
        };
        let full = product_partition(&per_car(0)?, &per_car(1)?)?;
        let complex = chicane_complex()?;
        let psi = full.restrict_to(&complex)?;
        let v = complex.vertices();
        let mask = |car: usize| {
            v.labels()
                .iter()
                .enumerate()
                .filter(|(_, l)| {
                    let inner = &l[1..l.len() - 1];
                    let (a, b) = inner.split_once(',').expect("pair label");
                    (if car == 0 { a } else { b }) == W
                })
                .fold(0u64, |m, (i, _)| m | 1 << i)
        };
        let w_masks = [mask(0), mask(1)];
        Ok(Self { complex, psi, chicane: Some(geometry), w_masks })
    }

    /// Per-car `W` marginals of `ψ` at `weights`.
    pub fn w_marginals(&self, weights: &[f64]) -> [f64; 2] {
        self.w_masks.map(|m| crate::complex::bits(m).map(|i| weights[i]).sum())
    }

    /// Wait decisions for the joint state: car `i` waits iff its `W` marginal of `ψ`
    /// is positive. Fails with `ShieldBreach` when both cars are inside the chicane.
    pub fn chicane_guard(&self, joint: &State) -> Result<[bool; 2], GuardError> {
        let Some(geo) = self.chicane else {
            return Ok([false, false]);
        };
        let x = |car| joint.get(&car_coord("x", car)).ok_or(GuardError::MissingCoordinate);
        let (x1, x2) = (x(0)?, x(1)?);
        if geo.in_chicane(x1) && geo.in_chicane(x2) {
            return Err(GuardError::ShieldBreach { x1, x2 });
        }
        let p = self.psi.evaluate(joint).map_err(|e| GuardError::Partition(e.to_string()))?;
        Ok(self.w_marginals(p.weights()).map(|w| w > 0.0))
    }

    /// Joint mode from the per-car modes, adding `W` to car `i`'s mode when it waits.
    pub fn joint_mode(&self, modes: &[Simplex], waiting: [bool; 2]) -> Simplex {
        let aug = |car: usize| -> Vec<String> {
            let mut v: Vec<String> = modes[car].labels().map(str::to_owned).collect();
            if waiting[car] {
                v.push(W.to_owned());
            }
            v
        };
        let (a, b) = (aug(0), aug(1));
        let vs = self.complex.vertices();
        Simplex::new(
            a.iter()
                .flat_map(|x| b.iter().map(move |y| pair_label(x, y)))
                .filter(|l| vs.contains(l)),
        )
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GuardError {
    #[error("shield breach: both cars inside the chicane (x1={x1}, x2={x2})")]
    ShieldBreach { x1: f64, x2: f64 },
    #[error("joint state lacks a position coordinate")]
    MissingCoordinate,
    #[error("joint partition failed: {0}")]
    Partition(String),
}

/// Turns geometric wait flags into blocked/free decisions with restart timers.
///
/// A car is blocked while its flag is set, unless released. Timers count only while
/// both cars are blocked; car 2's shorter timer releases it first. A released car
/// stays free until its flag clears.
#[derive(Debug, Clone)]
pub struct WaitCoordinator {
    limits: [u64; 2],
    timers: [u64; 2],
    released: [bool; 2],
    blocked: [bool; 2],
}

impl WaitCoordinator {
    pub fn new(config: &WaitConfig, dt: f64) -> Self {
        let steps = |t: f64| (t / dt).round().max(1.0) as u64;
        Self { limits: [steps(config.t1_s), steps(config.t2_s)], timers: [0; 2], released: [false; 2], blocked: [false; 2] }
    }

    pub fn blocked(&self) -> [bool; 2] {
        self.blocked
    }

    /// Updates with this step's flags; returns the blocked state and Wait/Resume events.
    pub fn update(&mut self, flags: [bool; 2]) -> ([bool; 2], Vec<Event>) {
        for (released, flag) in self.released.iter_mut().zip(flags) {
            *released &= flag;
        }
        let mut blocked = [0, 1].map(|c| flags[c] && !self.released[c]);
        if blocked[0] && blocked[1] {
            for car in 0..2 {
                self.timers[car] += 1;
                if self.timers[car] >= self.limits[car] {
                    self.released[car] = true;
                }
            }
            // one restart at a time; car 2 first
            if self.released[0] && self.released[1] {
                self.released[0] = false;
            }
            blocked = [0, 1].map(|c| flags[c] && !self.released[c]);
        }
        if !(blocked[0] && blocked[1]) {
            self.timers = [0, 0];
        }
        let mut events = Vec::new();
        for car in [1, 0] {
            if blocked[car] != self.blocked[car] {
                let kind = if blocked[car] { EventKind::Wait } else { EventKind::Resume };
                events.push(Event::for_car(kind, car + 1));
            }
        }
        self.blocked = blocked;
        (blocked, events)
    }
}
