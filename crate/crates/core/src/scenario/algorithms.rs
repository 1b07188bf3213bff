//! The per-mode control algorithms of the racing car.

use crate::complex::Simplex;
use crate::environment::{Check, Oracle, PositionOracle, PowerOracle, TrackEnvironment};
use crate::modes::{tran, ModeError, ModePackage, ModeSystem, TransitionOutcome, TransitionReason, Zone};
use crate::state::State;

pub const STR: &str = "Str";
pub const CU: &str = "Cu";

pub const STRAIGHT_SPEED: f64 = 120.0;
pub const CURVE_SPEED: f64 = 80.0;

/// What the engine should do after an algorithm step.
#[derive(Debug, Clone, PartialEq)]
pub enum Directive {
    Stay,
    /// A granted transfer; the engine hands control to `outcome.new_mode`.
    Transfer(TransitionOutcome),
    /// The algorithm gave up (its transfer was refused); the run halts.
    Halt(TransitionOutcome),
}

/// What an algorithm can see and do during one step: its own package and local
/// state, the oracles of its car, and `tran`.
pub struct StepContext<'a> {
    pub system: &'a ModeSystem,
    pub package: &'a ModePackage,
    pub state: &'a mut State,
    pub env: &'a mut TrackEnvironment,
    pub car: usize,
}

impl StepContext<'_> {
    pub fn pos(&mut self) -> f64 {
        PositionOracle { car: self.car }.call(self.env, ())
    }

    pub fn power(&mut self, v: f64) -> Check {
        let c = PowerOracle { car: self.car }.call(self.env, v);
        if c == Check::NotOk {
            log::warn!("car {}: power({v}) refused at step {}", self.car + 1, self.env.step());
        }
        c
    }

    /// `φ_X(state)` at vertex `label`.
    pub fn phi(&self, label: &str) -> Result<f64, ModeError> {
        Ok(self.package.phi_at(self.state)?.weight(label))
    }

    pub fn zone(&self) -> Result<Zone, ModeError> {
        crate::modes::comfort_zone_status(self.package, self.state)
    }

    pub fn tran(&self, target: &Simplex) -> TransitionOutcome {
        tran(self.system, self.package, self.state, target)
    }

    /// Requests `target`; on refusal cuts power and halts.
    fn transfer_or_stop(&mut self, target: &Simplex) -> Directive {
        let outcome = self.tran(target);
        if outcome.is_ok() {
            Directive::Transfer(outcome)
        } else {
            self.power(0.0);
            Directive::Halt(outcome)
        }
    }

    fn fail(&mut self, e: ModeError) -> Directive {
        self.power(0.0);
        Directive::Halt(TransitionOutcome::not_ok(TransitionReason::DomainViolation, e.to_string()))
    }
}

pub trait ModeAlgorithm: Send {
    /// Entry actions, run when the mode takes control.
    fn start(&mut self, cx: &mut StepContext<'_>) -> Directive;
    /// One iteration of the mode's loop.
    fn step(&mut self, cx: &mut StepContext<'_>) -> Directive;
}

/// Names accepted in the `algorithm` field of a mode.
pub const ALGORITHMS: &[&str] = &["straight", "straight_curve", "curve"];

pub fn make_algorithm(name: &str) -> Option<Box<dyn ModeAlgorithm>> {
    match name {
        "straight" => Some(Box::new(Straight::default())),
        "straight_curve" => Some(Box::new(StraightCurve)),
        "curve" => Some(Box::new(Curve::default())),
        _ => None,
    }
}

/// `B_{Str}`: full speed; ask for `{Str,Cu}` once `φ_Str` drops below `κ`; stop the
/// car if that transfer is refused.
#[derive(Debug, Default)]
pub struct Straight {
    powered: bool,
}

impl ModeAlgorithm for Straight {
    fn start(&mut self, cx: &mut StepContext<'_>) -> Directive {
        *cx.state = State::from_pairs([("v", 0.0), ("x", 0.0)]);
        let x = cx.pos();
        cx.state.set("x", x);
        cx.state.set("v", STRAIGHT_SPEED);
        self.powered = cx.power(STRAIGHT_SPEED) == Check::Ok;
        Directive::Stay
    }

    fn step(&mut self, cx: &mut StepContext<'_>) -> Directive {
        if !self.powered {
            self.powered = cx.power(STRAIGHT_SPEED) == Check::Ok;
        }
        let x = cx.pos();
        cx.state.set("x", x);
        match cx.phi(STR) {
            Ok(phi) if phi < cx.package.kappa => cx.transfer_or_stop(&Simplex::new([STR, CU])),
            Ok(_) => Directive::Stay,
            Err(e) => cx.fail(e),
        }
    }
}

/// `B_{Str,Cu}`: blend the speed from 120 down to 80 km/h as `t = φ_Cu` goes from 0
/// to 1, and hand over to `{Cu}` at `t = 1`.
#[derive(Debug, Default)]
pub struct StraightCurve;

impl ModeAlgorithm for StraightCurve {
    fn start(&mut self, _: &mut StepContext<'_>) -> Directive {
        Directive::Stay
    }

    fn step(&mut self, cx: &mut StepContext<'_>) -> Directive {
        let x = cx.pos();
        cx.state.set("x", x);
        let t = match cx.phi(CU) {
            Ok(t) => t,
            Err(e) => return cx.fail(e),
        };
        let v = CURVE_SPEED * t + STRAIGHT_SPEED * (1.0 - t);
        cx.state.set("v", v);
        cx.power(v);
        if t >= 1.0 - cx.system.table().snap {
            cx.transfer_or_stop(&Simplex::vertex(CU))
        } else {
            Directive::Stay
        }
    }
}

/// `B_{Cu}`: 80 km/h until the end of the track.
#[derive(Debug, Default)]
pub struct Curve {
    powered: bool,
}

impl ModeAlgorithm for Curve {
    fn start(&mut self, cx: &mut StepContext<'_>) -> Directive {
        cx.state.set("v", CURVE_SPEED);
        self.powered = cx.power(CURVE_SPEED) == Check::Ok;
        Directive::Stay
    }

    fn step(&mut self, cx: &mut StepContext<'_>) -> Directive {
        if !self.powered {
            self.powered = cx.power(CURVE_SPEED) == Check::Ok;
        }
        let x = cx.pos();
        cx.state.set("x", x);
        Directive::Stay
    }
}
