use std::fmt;

use super::GeometryError;
use crate::complex::{Complex, SimplicialMap, Simplex};

/// Tolerance on the weight sum of a barycentric point.
pub const SUM_TOLERANCE: f64 = 1e-9;

/// Default cutoff below which a weight is treated as zero before support computation.
pub const DEFAULT_SNAP: f64 = 1e-9;

/// A point of the realisation: one nonnegative weight per vertex, summing to one,
/// whose support is a simplex of the ambient complex.
#[derive(Debug, Clone, PartialEq)]
pub struct BarycentricPoint {
    complex: Complex,
    weights: Vec<f64>,
}

impl BarycentricPoint {
    /// Normalises `weights` (given in vertex order) to sum to one.
    pub fn new(complex: &Complex, weights: Vec<f64>) -> Result<Self, GeometryError> {
        if weights.len() != complex.vertices().len() {
            return Err(GeometryError::WrongLength {
                expected: complex.vertices().len(),
                found: weights.len(),
            });
        }
        if let Some(i) = weights.iter().position(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(GeometryError::NegativeWeight {
                vertex: complex.vertices().label(i).to_owned(),
                value: weights[i],
            });
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(GeometryError::ZeroTotal);
        }
        let weights = weights.into_iter().map(|w| w / total).collect();
        Self::checked(complex, weights)
    }

    /// Builds a point from label/weight pairs; unlisted vertices get weight zero.
    pub fn from_labels(complex: &Complex, pairs: &[(&str, f64)]) -> Result<Self, GeometryError> {
        let mut w = vec![0.0; complex.vertices().len()];
        for (label, value) in pairs {
            let i = complex
                .vertices()
                .index_of(label)
                .ok_or_else(|| GeometryError::UnknownVertex((*label).to_owned()))?;
            w[i] += value;
        }
        Self::new(complex, w)
    }

    pub fn vertex(complex: &Complex, label: &str) -> Result<Self, GeometryError> {
        Self::from_labels(complex, &[(label, 1.0)])
    }

    /// Accepts weights that already sum to one within [`SUM_TOLERANCE`], without rescaling.
    pub(crate) fn from_normalized(complex: &Complex, weights: Vec<f64>) -> Result<Self, GeometryError> {
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > SUM_TOLERANCE {
            return Err(GeometryError::NotNormalized { sum: total });
        }
        Self::checked(complex, weights)
    }

    fn checked(complex: &Complex, weights: Vec<f64>) -> Result<Self, GeometryError> {
        let p = Self { complex: complex.clone(), weights };
        let support = p.support_mask();
        if !complex.contains_mask(support) {
            return Err(GeometryError::SupportNotASimplex(complex.vertices().simplex_of(support)));
        }
        Ok(p)
    }

    pub fn complex(&self) -> &Complex {
        &self.complex
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, label: &str) -> f64 {
        self.complex
            .vertices()
            .index_of(label)
            .map_or(0.0, |i| self.weights[i])
    }

    pub fn sum(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Vertices with strictly positive weight (compared to `0.0`, not a tolerance).
    pub fn support_mask(&self) -> u64 {
        self.weights
            .iter()
            .enumerate()
            .filter(|(_, w)| **w > 0.0)
            .fold(0u64, |acc, (i, _)| acc | 1 << i)
    }

    pub fn support(&self) -> Simplex {
        self.complex.vertices().simplex_of(self.support_mask())
    }

    /// Zeroes every weight below `tol`. The remaining weights are not rescaled,
    /// so the sum moves by at most `n * tol`.
    pub fn snapped(&self, tol: f64) -> Self {
        let weights = self.weights.iter().map(|&w| if w < tol { 0.0 } else { w }).collect();
        Self { complex: self.complex.clone(), weights }
    }

    /// `(1 - t) a + t b`.
    pub fn lerp(a: &Self, b: &Self, t: f64) -> Result<Self, GeometryError> {
        if a.complex != b.complex {
            return Err(GeometryError::ComplexMismatch);
        }
        let weights = a
            .weights
            .iter()
            .zip(&b.weights)
            .map(|(x, y)| if t == 0.0 { *x } else if t == 1.0 { *y } else { (1.0 - t) * x + t * y })
            .collect();
        Self::checked(&a.complex, weights)
    }
}

impl fmt::Display for BarycentricPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, w) in self.weights.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{}:{w}", self.complex.vertices().label(i))?;
        }
        f.write_str(")")
    }
}

/// The unique simplex whose open interior contains `p`: its strict support.
pub fn interior_support(p: &BarycentricPoint) -> Simplex {
    p.support()
}

/// Belief in `subset`: the total weight on its vertices. Labels outside the ambient
/// complex contribute nothing.
pub fn belief(p: &BarycentricPoint, subset: &Simplex) -> f64 {
    subset.labels().map(|l| p.weight(l)).sum()
}

/// Pushes `p` forward along a simplicial map, summing weights of vertices that collide.
pub fn realize_map(map: &SimplicialMap, p: &BarycentricPoint) -> Result<BarycentricPoint, GeometryError> {
    if p.complex() != map.source() {
        return Err(GeometryError::ComplexMismatch);
    }
    let mut out = vec![0.0; map.target().vertices().len()];
    for (i, w) in p.weights.iter().enumerate() {
        out[map.image_index(i)] += w;
    }
    BarycentricPoint::checked(map.target(), out)
}
