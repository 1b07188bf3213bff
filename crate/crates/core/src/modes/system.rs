use std::collections::{BTreeMap, BTreeSet};

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use super::table::{parse_pair, MapsFile, StateMap, ThresholdFile, TransitionTable};
use super::{ModeError, ModePackage};
use crate::complex::{Complex, ComplexFile, Cover, CoverFile, Simplex};
use crate::geometry::{breakpoint_grid, PartitionFile, PartitionOfUnity};
use crate::state::BoxRegion;

/// One mode's entry in a system file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModeFile {
    pub state_space: BoxRegion,
    pub algorithm: String,
    /// Overrides the global partition for this mode's `φ_X`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partition: Option<PartitionFile>,
}

/// On-disk form of a mode system.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SystemFile {
    pub complex: ComplexFile,
    pub partition: PartitionFile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cover: Option<CoverFile>,
    pub modes: IndexMap<String, ModeFile>,
    pub thresholds: ThresholdFile,
    #[serde(default)]
    pub maps: MapsFile,
    pub initial_mode: String,
}

/// A complex of modes with a package per served simplex and the transition table between them.
#[derive(Debug, Clone)]
pub struct ModeSystem {
    complex: Complex,
    phi: PartitionOfUnity,
    packages: BTreeMap<Simplex, ModePackage>,
    table: TransitionTable,
    initial: Simplex,
}

impl ModeSystem {
    /// Checks the packages against the complex and fills in coordinate-identity
    /// `inc`/`proj` maps for nested mode pairs that declare none, whenever the
    /// target's coordinates are available in the source.
    pub fn new(
        complex: Complex,
        phi: PartitionOfUnity,
        packages: Vec<ModePackage>,
        mut table: TransitionTable,
        initial: Simplex,
    ) -> Result<Self, ModeError> {
        let mut by_mode = BTreeMap::new();
        for pkg in packages {
            if !complex.contains(&pkg.mode) {
                return Err(ModeError::UnknownMode(pkg.mode));
            }
            if pkg.phi.complex() != &complex {
                return Err(ModeError::Threshold(format!("mode {}: φ_X lives on a different complex", pkg.mode)));
            }
            by_mode.insert(pkg.mode.clone(), pkg);
        }
        if !by_mode.contains_key(&initial) {
            return Err(ModeError::UnknownMode(initial));
        }
        let coords = |m: &Simplex| -> BTreeSet<String> { by_mode[m].state_space.coord_names().map(str::to_owned).collect() };
        for ((from, to), map) in table.inc.iter().chain(table.proj.iter()) {
            for m in [from, to] {
                if !by_mode.contains_key(m) {
                    return Err(ModeError::UnknownMode(m.clone()));
                }
            }
            let pair = super::pair_key(from, to);
            let src = coords(from);
            if let Some(c) = map.inputs().find(|c| !src.contains(*c)) {
                return Err(ModeError::BadMap { pair, reason: format!("reads `{c}`, which S_{from} lacks") });
            }
            let outs: BTreeSet<String> = map.outputs().map(str::to_owned).collect();
            if outs != coords(to) {
                return Err(ModeError::BadMap {
                    pair,
                    reason: format!("writes {outs:?} but S_{to} has coordinates {:?}", coords(to)),
                });
            }
        }
        for (from, to) in table.epsilon.keys() {
            for m in [from, to] {
                if !by_mode.contains_key(m) {
                    return Err(ModeError::UnknownMode(m.clone()));
                }
            }
        }
        let modes: Vec<Simplex> = by_mode.keys().cloned().collect();
        for small in &modes {
            for big in &modes {
                if !small.is_strict_subset(big) {
                    continue;
                }
                let (cs, cb) = (coords(small), coords(big));
                let key = (small.clone(), big.clone());
                if !table.inc.contains_key(&key) && cb.is_subset(&cs) {
                    table.inc.insert(key, StateMap::identity(cb.iter().map(String::as_str)));
                }
                let key = (big.clone(), small.clone());
                if !table.proj.contains_key(&key) && cs.is_subset(&cb) {
                    table.proj.insert(key, StateMap::identity(cs.iter().map(String::as_str)));
                }
            }
        }
        Ok(Self { complex, phi, packages: by_mode, table, initial })
    }

    pub fn from_file(file: &SystemFile) -> Result<Self, ModeError> {
        let complex = Complex::from_file(&file.complex)?;
        let snap = file.thresholds.snap;
        let cover = file.cover.clone().map(Cover::from_file);
        let attach = |pu: PartitionOfUnity| match &cover {
            Some(c) => pu.with_snap(snap).with_cover(c.clone()),
            None => pu.with_snap(snap),
        };
        let phi = attach(PartitionOfUnity::new(&complex, &file.partition)?);
        let mut packages = Vec::new();
        for (key, mf) in &file.modes {
            let mode = Simplex::parse_key(key)?;
            let kappa = file.thresholds.kappa.get(&mode).ok_or_else(|| ModeError::Threshold(format!("no kappa for mode {key}")))?;
            let pi = file.thresholds.pi.get(&mode).ok_or_else(|| ModeError::Threshold(format!("no pi for mode {key}")))?;
            let local = match &mf.partition {
                Some(p) => attach(PartitionOfUnity::new(&complex, p)?),
                None => phi.clone(),
            };
            packages.push(ModePackage::new(mode, mf.state_space.clone(), local, mf.algorithm.clone(), kappa, pi)?);
        }
        let mut table = TransitionTable {
            default_epsilon: file.thresholds.default_epsilon,
            eta: file.thresholds.eta,
            snap,
            map_tolerance: file.thresholds.map_tolerance,
            ..TransitionTable::default()
        };
        if !(table.default_epsilon > 0.0 && table.default_epsilon < 1.0) {
            return Err(ModeError::Threshold(format!("default_epsilon must lie in (0,1), got {}", table.default_epsilon)));
        }
        if !(table.eta >= 0.0) {
            return Err(ModeError::Threshold(format!("eta must be nonnegative, got {}", table.eta)));
        }
        for (key, eps) in &file.thresholds.epsilon {
            let (a, b) = parse_pair(key)?;
            table.set_epsilon(&a, &b, *eps)?;
        }
        for (key, map) in &file.maps.inc {
            let (a, b) = parse_pair(key)?;
            table.set_inc(&a, &b, map.clone())?;
        }
        for (key, map) in &file.maps.proj {
            let (a, b) = parse_pair(key)?;
            table.set_proj(&a, &b, map.clone())?;
        }
        let initial = Simplex::parse_key(&file.initial_mode)?;
        Self::new(complex, phi, packages, table, initial)
    }

    pub fn from_json(text: &str) -> Result<Self, ModeError> {
        let file: SystemFile = serde_json::from_str(text).map_err(|e| ModeError::Parse(e.to_string()))?;
        Self::from_file(&file)
    }

    pub fn complex(&self) -> &Complex {
        &self.complex
    }

    pub fn phi(&self) -> &PartitionOfUnity {
        &self.phi
    }

    pub fn table(&self) -> &TransitionTable {
        &self.table
    }

    pub fn initial_mode(&self) -> &Simplex {
        &self.initial
    }

    pub fn package(&self, mode: &Simplex) -> Result<&ModePackage, ModeError> {
        self.packages.get(mode).ok_or_else(|| ModeError::UnknownMode(mode.clone()))
    }

    pub fn packages(&self) -> impl Iterator<Item = &ModePackage> {
        self.packages.values()
    }

    pub fn modes(&self) -> impl Iterator<Item = &Simplex> {
        self.packages.keys()
    }

    /// Evaluates every mode's `φ_X` on a grid built from the partition's breakpoints
    /// (and midpoints between them) inside `S_X`. Returns the first violation.
    pub fn audit_partition(&self) -> Result<usize, ModeError> {
        let mut checked = 0;
        for pkg in self.packages() {
            for s in breakpoint_grid(&pkg.state_space, &pkg.phi) {
                pkg.phi_at(&s).map_err(|e| match e {
                    ModeError::Geometry(error) => ModeError::Axiom { state: s.clone(), error },
                    other => other,
                })?;
                checked += 1;
            }
        }
        Ok(checked)
    }
}
