use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use super::{map::pair_label, Complex, ComplexError, VertexSet};
use crate::state::{BoxRegion, State};

/// A finite cover of a state space by labelled boxes, witnessed on a finite sample list.
///
/// The covered space itself is never materialised: every question about it is
/// answered on `samples`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cover {
    pub ground: String,
    sets: Vec<(String, BoxRegion)>,
    samples: Vec<State>,
}

/// JSON form: `{ "ground": …, "samples": [ {coord: value} ], "sets": { label: { coord: interval } } }`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoverFile {
    #[serde(default)]
    pub ground: String,
    pub samples: Vec<State>,
    pub sets: IndexMap<String, BoxRegion>,
}

impl Cover {
    pub fn new(ground: impl Into<String>, sets: Vec<(String, BoxRegion)>, samples: Vec<State>) -> Self {
        Self { ground: ground.into(), sets, samples }
    }

    pub fn from_file(file: CoverFile) -> Self {
        Self { ground: file.ground, sets: file.sets.into_iter().collect(), samples: file.samples }
    }

    pub fn to_file(&self) -> CoverFile {
        CoverFile {
            ground: self.ground.clone(),
            samples: self.samples.clone(),
            sets: self.sets.iter().cloned().collect(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, ComplexError> {
        let file: CoverFile = serde_json::from_str(text).map_err(|e| ComplexError::Parse(e.to_string()))?;
        Ok(Self::from_file(file))
    }

    pub fn sets(&self) -> &[(String, BoxRegion)] {
        &self.sets
    }

    pub fn samples(&self) -> &[State] {
        &self.samples
    }

    pub fn set(&self, label: &str) -> Option<&BoxRegion> {
        self.sets.iter().find(|(l, _)| l == label).map(|(_, r)| r)
    }

    /// Bitmask (in set order) of the sets containing `state`.
    pub fn membership(&self, state: &State) -> u64 {
        self.sets
            .iter()
            .enumerate()
            .filter(|(_, (_, region))| region.contains(state))
            .fold(0u64, |acc, (i, _)| acc | 1 << i)
    }

    pub fn covers(&self, state: &State) -> bool {
        self.sets.iter().any(|(_, r)| r.contains(state))
    }

    /// Index of the first sample lying in no set.
    pub fn first_uncovered(&self) -> Option<usize> {
        self.samples.iter().position(|s| !self.covers(s))
    }

    fn vertex_set(&self) -> Result<VertexSet, ComplexError> {
        VertexSet::new(self.sets.iter().map(|(l, _)| l.clone()))
    }

    fn memberships(&self) -> Result<Vec<u64>, ComplexError> {
        if self.sets.is_empty() {
            return Err(ComplexError::EmptyCover);
        }
        if self.samples.is_empty() {
            return Err(ComplexError::NoSamples);
        }
        self.samples
            .iter()
            .enumerate()
            .map(|(index, s)| match self.membership(s) {
                0 => Err(ComplexError::NotACover { index }),
                m => Ok(m),
            })
            .collect()
    }
}

/// Nerve of a cover: `X` is a simplex iff some sample lies in every set indexed by `X`.
pub fn nerve(cover: &Cover) -> Result<Complex, ComplexError> {
    let vertices = cover.vertex_set()?;
    let masks = cover.memberships()?;
    Complex::from_generator_masks(vertices, masks)
}

/// Nerve of the twofold cover `{U_a ∩ V_i}`, over pair labels `(a,i)`.
pub fn intersection_nerve(c1: &Cover, c2: &Cover) -> Result<Complex, ComplexError> {
    if c1.samples != c2.samples {
        return Err(ComplexError::SampleMismatch);
    }
    let m1 = c1.memberships()?;
    let m2 = c2.memberships()?;
    let n2 = c2.sets.len();
    if c1.sets.len() * n2 > 64 {
        return Err(ComplexError::TooManyVertices(c1.sets.len() * n2));
    }
    let labels = c1
        .sets
        .iter()
        .flat_map(|(a, _)| c2.sets.iter().map(move |(b, _)| pair_label(a, b)));
    let vertices = VertexSet::new(labels)?;
    let gens = m1.iter().zip(&m2).map(|(&a, &b)| {
        let mut g = 0u64;
        for i in super::bits(a) {
            for j in super::bits(b) {
                g |= 1 << (i * n2 + j);
            }
        }
        g
    });
    Complex::from_generator_masks(vertices, gens.collect::<Vec<_>>())
}
