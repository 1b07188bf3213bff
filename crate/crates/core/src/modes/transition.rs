use serde::{Deserialize, Serialize};

use super::system::ModeSystem;
use super::table::TransitionTable;
use super::{Check, ModeError, ModePackage};
use crate::complex::{bits, Complex, Simplex};
use crate::geometry::{belief, BarycentricPoint};
use crate::state::State;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TransitionReason {
    Identity,
    ToSuperset,
    ToSubset,
    Unrelated,
    DomainViolation,
}

/// Result of `tran(s, Z)` called in mode `X`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionOutcome {
    pub status: Check,
    pub new_mode: Option<Simplex>,
    pub new_state: Option<State>,
    pub reason: TransitionReason,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl TransitionOutcome {
    fn ok(mode: &Simplex, state: State, reason: TransitionReason) -> Self {
        Self { status: Check::Ok, new_mode: Some(mode.clone()), new_state: Some(state), reason, detail: None }
    }

    pub fn not_ok(reason: TransitionReason, detail: impl Into<String>) -> Self {
        Self { status: Check::NotOk, new_mode: None, new_state: None, reason, detail: Some(detail.into()) }
    }

    pub fn is_ok(&self) -> bool {
        self.status == Check::Ok
    }
}

/// Whether `state` lies in the declared domain of `inc` from `pkg.mode = X` into `target = Z`:
/// `π_X ≤ B_X(X)`, `κ_X ≤ B_X(Z)`, and every added vertex `β ∈ Z∖X` has `φ_Xβ > 0`
/// after snapping.
pub fn inc_domain_check(tt: &TransitionTable, pkg: &ModePackage, target: &Simplex, state: &State) -> Result<bool, ModeError> {
    if !pkg.mode.is_strict_subset(target) {
        return Err(ModeError::NotASuperset { from: pkg.mode.clone(), to: target.clone() });
    }
    let p = pkg.phi_at(state)?;
    let justified = target
        .difference(&pkg.mode)
        .labels()
        .all(|b| {
            let w = p.weight(b);
            w > 0.0 && w >= tt.snap
        });
    Ok(justified && pkg.pi <= belief(&p, &pkg.mode) && pkg.kappa <= belief(&p, target))
}

/// Whether `state` lies in the declared domain of `proj` from `pkg.mode = X` onto
/// `target = Y`: `B_X(X∖Y) < ε_{X→Y}`.
pub fn proj_domain_check(tt: &TransitionTable, pkg: &ModePackage, target: &Simplex, state: &State) -> Result<bool, ModeError> {
    if !target.is_strict_subset(&pkg.mode) || target.is_empty() {
        return Err(ModeError::NotASubset { from: pkg.mode.clone(), to: target.clone() });
    }
    let p = pkg.phi_at(state)?;
    Ok(belief(&p, &pkg.mode.difference(target)) < tt.epsilon(&pkg.mode, target))
}

/// `tran(s, Z)` in mode `current`. Never fails: problems become `NotOK` outcomes.
pub fn tran(system: &ModeSystem, current: &ModePackage, state: &State, target: &Simplex) -> TransitionOutcome {
    use TransitionReason::*;
    let tt = system.table();
    let mode = &current.mode;
    if target == mode {
        return TransitionOutcome::ok(mode, state.clone(), Identity);
    }
    let (reason, check, map) = if mode.is_strict_subset(target) {
        (ToSuperset, inc_domain_check(tt, current, target, state), tt.inc_map(mode, target))
    } else if target.is_strict_subset(mode) && !target.is_empty() {
        (ToSubset, proj_domain_check(tt, current, target, state), tt.proj_map(mode, target))
    } else {
        return TransitionOutcome::not_ok(Unrelated, format!("{mode} and {target} are not nested"));
    };
    match check {
        Ok(true) => {}
        Ok(false) => return TransitionOutcome::not_ok(DomainViolation, format!("{state} is outside the domain of {mode} -> {target}")),
        Err(e) => return TransitionOutcome::not_ok(DomainViolation, e.to_string()),
    }
    let Ok(target_pkg) = system.package(target) else {
        return TransitionOutcome::not_ok(DomainViolation, format!("no package for {target}"));
    };
    let Some(map) = map else {
        return TransitionOutcome::not_ok(DomainViolation, format!("no state map {mode} -> {target}"));
    };
    match map.apply(state) {
        Ok(s) if target_pkg.contains(&s) => TransitionOutcome::ok(target, s, reason),
        Ok(s) => TransitionOutcome::not_ok(DomainViolation, format!("mapped state {s} is outside S_{target}")),
        Err(e) => TransitionOutcome::not_ok(DomainViolation, e.to_string()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    ToSuperset,
    ToSubset,
}

/// Asymmetric switching thresholds. Dropping vertices is allowed once their weights
/// have reached zero (the outer boundary); adding vertices needs every added weight
/// to reach `η` (the inner boundary). With `η = 0` both directions share the face.
pub fn hysteresis_gate(tt: &TransitionTable, direction: Direction, weights: &[f64]) -> bool {
    match direction {
        Direction::ToSubset => weights.iter().all(|&w| w < tt.snap || w <= 0.0),
        Direction::ToSuperset => weights.iter().all(|&w| w >= tt.snap && w > 0.0 && w >= tt.eta),
    }
}

/// Follows barycentric readings and proposes the strict-support simplex as the next
/// mode, subject to [`hysteresis_gate`]. At most one switch per observation; subset
/// moves are tried first.
#[derive(Debug, Clone)]
pub struct SupportTracker {
    table: TransitionTable,
    complex: Complex,
    current: u64,
    switches: usize,
}

impl SupportTracker {
    pub fn new(table: &TransitionTable, complex: &Complex, initial: &Simplex) -> Result<Self, ModeError> {
        let current = complex.vertices().mask_of(initial)?;
        if current == 0 || !complex.contains_mask(current) {
            return Err(ModeError::UnknownMode(initial.clone()));
        }
        Ok(Self { table: table.clone(), complex: complex.clone(), current, switches: 0 })
    }

    pub fn current(&self) -> Simplex {
        self.complex.vertices().simplex_of(self.current)
    }

    pub fn switches(&self) -> usize {
        self.switches
    }

    /// Feeds one reading; returns the new mode if a switch happened.
    pub fn observe(&mut self, p: &BarycentricPoint) -> Option<Simplex> {
        let w = p.snapped(self.table.snap);
        let support = w.support_mask();
        let dropped = self.current & !support;
        let added = support & !self.current;
        let weights = |mask: u64| bits(mask).map(|i| w.weights()[i]).collect::<Vec<_>>();
        let next = if dropped != 0 && self.current & support != 0 {
            hysteresis_gate(&self.table, Direction::ToSubset, &weights(dropped)).then_some(self.current & support)
        } else if added != 0 {
            hysteresis_gate(&self.table, Direction::ToSuperset, &weights(added)).then_some(support)
        } else {
            None
        };
        match next {
            Some(m) if m != self.current => {
                self.current = m;
                self.switches += 1;
                Some(self.current())
            }
            _ => None,
        }
    }
}
