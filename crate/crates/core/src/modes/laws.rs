use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::system::ModeSystem;
use super::table::StateMap;
use super::transition::{inc_domain_check, proj_domain_check};
use super::{ModeError, ModePackage};
use crate::complex::Simplex;
use crate::geometry::BarycentricPoint;
use crate::state::State;

/// Tolerance for comparing partition-of-unity values across modes.
const PHI_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LawStatus {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub state: State,
    pub modes: Vec<String>,
    pub expected: String,
    pub actual: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LawEntry {
    pub id: String,
    pub law: String,
    pub status: LawStatus,
    /// How many (probe, mode-tuple) instances were actually checked.
    pub checked: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LawReport {
    pub probes: usize,
    pub passed: bool,
    pub laws: Vec<LawEntry>,
    pub caveats: Vec<String>,
}

impl LawReport {
    pub fn entry(&self, id: &str) -> Option<&LawEntry> {
        self.laws.iter().find(|e| e.id == id)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

struct Law {
    id: &'static str,
    name: &'static str,
    checked: usize,
    witness: Option<Witness>,
}

impl Law {
    fn new(id: &'static str, name: &'static str) -> Self {
        Self { id, name, checked: 0, witness: None }
    }

    fn record(&mut self, ok: bool, witness: impl FnOnce() -> Witness) {
        self.checked += 1;
        if !ok && self.witness.is_none() {
            self.witness = Some(witness());
        }
    }

    fn finish(self) -> LawEntry {
        LawEntry {
            id: self.id.to_owned(),
            law: self.name.to_owned(),
            status: if self.witness.is_some() { LawStatus::Fail } else { LawStatus::Pass },
            checked: self.checked,
            witness: self.witness,
        }
    }
}

fn witness(state: &State, modes: &[&Simplex], expected: impl ToString, actual: impl ToString) -> Witness {
    Witness {
        state: state.clone(),
        modes: modes.iter().map(|m| m.key()).collect(),
        expected: expected.to_string(),
        actual: actual.to_string(),
    }
}

fn states_close(a: &State, b: &State, tol: f64) -> bool {
    a.len() == b.len() && a.coords().all(|(k, v)| b.get(k).is_some_and(|w| (v - w).abs() <= tol))
}

fn points_close(a: &BarycentricPoint, b: &BarycentricPoint) -> bool {
    a.weights().iter().zip(b.weights()).all(|(x, y)| (x - y).abs() <= PHI_TOLERANCE)
}

/// Applies `map` when `s ∈ S_from` and the image lands in `S_to`.
fn natural(map: &StateMap, from: &ModePackage, to: &ModePackage, s: &State) -> Option<State> {
    if !from.contains(s) {
        return None;
    }
    map.apply(s).ok().filter(|t| to.contains(t))
}

/// `n` probe states drawn uniformly from the mode state spaces in turn, with a fixed seed.
pub fn generate_probes(system: &ModeSystem, n: usize, seed: u64) -> Result<Vec<State>, ModeError> {
    let pkgs: Vec<&ModePackage> = system.packages().collect();
    for p in &pkgs {
        if p.state_space.bounds().any(|(_, iv)| !iv.is_bounded()) {
            return Err(ModeError::Unbounded(p.mode.clone()));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let region = &pkgs[k % pkgs.len()].state_space;
        loop {
            let s = region
                .bounds()
                .fold(State::new(), |s, (c, iv)| s.with(c, if iv.lo == iv.hi { iv.lo } else { rng.gen_range(iv.lo..=iv.hi) }));
            if region.contains(&s) {
                out.push(s);
                break;
            }
        }
    }
    Ok(out)
}

/// Checks the transition laws of the system on `probes`.
///
/// Entries: `partition_axioms` (each `φ_X` is a partition of unity with simplicial
/// support on `S_X`, and `φ_α > 0` only inside `U_α` on the cover samples), then
/// (i) `inc` functoriality, (ii) `proj` functoriality, (iii) `proj ∘ inc = id` on
/// `Dom(inc)`, (iv) `φ` compatibility along `inc` and `proj` on `W_X`, (v) `inc`
/// injectivity and (vi) `1 - π_X < ε_{Z→X}` for all nested `X ⊊ Z`.
///
/// A law with nothing to check passes with `checked = 0`.
pub fn validate_sheaf_laws(system: &ModeSystem, probes: &[State]) -> Result<LawReport, ModeError> {
    if probes.is_empty() {
        return Err(ModeError::NoProbes);
    }
    let tt = system.table();
    let tol = tt.map_tolerance;
    let pkgs: Vec<&ModePackage> = system.packages().collect();
    let pkg = |m: &Simplex| system.package(m).expect("table pairs have packages");
    let mut caveats = vec!["laws are checked on the probe states only".to_owned()];

    let mut axioms = Law::new("partition_axioms", "partition of unity axioms with simplicial support");
    for s in probes {
        for p in pkgs.iter().filter(|p| p.contains(s)) {
            let r = p.phi_at(s);
            axioms.record(r.is_ok(), || {
                witness(s, &[&p.mode], "valid barycentric point", r.as_ref().err().map(|e| e.to_string()).unwrap_or_default())
            });
        }
    }
    if let Some(cover) = system.phi().cover() {
        caveats.push("cover property and partition support are certified on the cover samples only".to_owned());
        let labels = system.complex().vertices().labels();
        for s in cover.samples() {
            let raw = system.phi().raw(s)?;
            for (label, w) in labels.iter().zip(raw) {
                let inside = cover.set(label).is_some_and(|r| r.contains(s));
                axioms.record(w <= 0.0 || inside, || {
                    witness(s, &[&Simplex::vertex(label)], format!("φ_{label} = 0 outside U_{label}"), format!("φ_{label} = {w}"))
                });
            }
        }
    }

    let incs: Vec<_> = tt.inc_pairs().collect();
    let projs: Vec<_> = tt.proj_pairs().collect();

    let mut inc_functor = Law::new("i", "inc functoriality: inc_ZX = inc_ZY ∘ inc_YX");
    for &(y, x, m_yx) in &incs {
        for &(x2, z, m_xz) in incs.iter().filter(|(a, _, _)| *a == x) {
            let Some(m_yz) = tt.inc_map(y, z) else { continue };
            let (py, px, pz) = (pkg(y), pkg(x2), pkg(z));
            for s in probes {
                let (Some(a), Some(direct)) = (natural(m_yx, py, px, s), natural(m_yz, py, pz, s)) else { continue };
                let Some(composed) = natural(m_xz, px, pz, &a) else { continue };
                inc_functor.record(states_close(&composed, &direct, tol), || witness(s, &[y, x, z], &direct, &composed));
            }
        }
    }

    let mut proj_functor = Law::new("ii", "proj functoriality: proj_XZ = proj_YZ ∘ proj_XY");
    for &(x, y, m_xy) in &projs {
        for &(y2, w, m_yw) in projs.iter().filter(|(a, _, _)| *a == y) {
            let Some(m_xw) = tt.proj_map(x, w) else { continue };
            let (px, py, pw) = (pkg(x), pkg(y2), pkg(w));
            for s in probes {
                let (Some(a), Some(direct)) = (natural(m_xy, px, py, s), natural(m_xw, px, pw, s)) else { continue };
                let Some(composed) = natural(m_yw, py, pw, &a) else { continue };
                proj_functor.record(states_close(&composed, &direct, tol), || witness(s, &[x, y, w], &direct, &composed));
            }
        }
    }

    let mut identity = Law::new("iii", "proj ∘ inc = id on Dom(inc)");
    let mut compat = Law::new("iv", "compatibility: φ_Z ∘ inc = φ_X and φ_Y ∘ proj = φ_X on W_X");
    let mut injective = Law::new("v", "inc is injective");
    for &(y, x, m_yx) in &incs {
        let (py, px) = (pkg(y), pkg(x));
        let mut images: Vec<(&State, State)> = Vec::new();
        for s in probes.iter().filter(|s| py.contains(s)) {
            if let Ok(t) = m_yx.apply(s) {
                images.push((s, t));
            }
            if !inc_domain_check(tt, py, x, s).unwrap_or(false) {
                continue;
            }
            let Ok(t) = m_yx.apply(s) else { continue };
            if !px.contains(&t) {
                identity.record(false, || witness(s, &[y, x], format!("inc lands in S_{x}"), &t));
                continue;
            }
            match tt.proj_map(x, y).map(|m| m.apply(&t)) {
                Some(Ok(back)) => identity.record(states_close(&back, s, tol), || witness(s, &[y, x, y], s, &back)),
                Some(Err(e)) => identity.record(false, || witness(s, &[y, x, y], s, e)),
                None => identity.record(false, || witness(s, &[y, x, y], s, format!("proj {x} -> {y} undefined"))),
            }
            if py.models_well(s).unwrap_or(false) {
                if let (Ok(a), Ok(b)) = (py.phi_at(s), px.phi_at(&t)) {
                    compat.record(points_close(&a, &b), || witness(s, &[y, x], &a, &b));
                }
            }
        }
        for (i, (si, ti)) in images.iter().enumerate() {
            for (sj, tj) in &images[i + 1..] {
                let distinct = !states_close(si, sj, tol);
                let ok = !distinct || !states_close(ti, tj, tol);
                injective.record(ok, || witness(si, &[y, x], format!("distinct image from {sj}"), ti));
            }
        }
    }
    for &(x, y, m_xy) in &projs {
        let (px, py) = (pkg(x), pkg(y));
        for s in probes.iter().filter(|s| px.contains(s)) {
            if !proj_domain_check(tt, px, y, s).unwrap_or(false) || !px.models_well(s).unwrap_or(false) {
                continue;
            }
            let (Ok(a), Ok(t)) = (px.phi_at(s), m_xy.apply(s)) else { continue };
            match py.phi_at(&t) {
                Ok(b) => compat.record(points_close(&a, &b), || witness(s, &[x, y], &a, &b)),
                Err(e) => compat.record(false, || witness(s, &[x, y], &a, e)),
            }
        }
    }

    let mut eps_pi = Law::new("vi", "1 - π_X < ε_{Z→X} for X ⊊ Z");
    for small in &pkgs {
        for big in pkgs.iter().filter(|b| small.mode.is_strict_subset(&b.mode)) {
            let eps = tt.epsilon(&big.mode, &small.mode);
            let lhs = 1.0 - small.pi;
            eps_pi.record(lhs < eps, || Witness {
                state: State::new(),
                modes: vec![small.mode.key(), big.mode.key()],
                expected: format!("1 - π_{} = {lhs} < ε", small.mode.key()),
                actual: format!("ε_{{{}->{}}} = {eps}", big.mode.key(), small.mode.key()),
            });
        }
    }

    let laws: Vec<LawEntry> = [axioms, inc_functor, proj_functor, identity, compat, injective, eps_pi]
        .into_iter()
        .map(Law::finish)
        .collect();
    Ok(LawReport {
        probes: probes.len(),
        passed: laws.iter().all(|l| l.status == LawStatus::Pass),
        laws,
        caveats,
    })
}
