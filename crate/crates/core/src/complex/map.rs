use std::collections::BTreeMap;

use super::{bits, Complex, ComplexError, Simplex, VertexSet};

/// A vertex map between complexes. Construction only checks totality; use
/// [`SimplicialMap::check`] to verify that simplices map to simplices.
#[derive(Debug, Clone)]
pub struct SimplicialMap {
    source: Complex,
    target: Complex,
    vertex_map: BTreeMap<String, String>,
    // source vertex index -> target vertex index
    table: Vec<usize>,
}

impl SimplicialMap {
    pub fn new(
        source: Complex,
        target: Complex,
        vertex_map: BTreeMap<String, String>,
    ) -> Result<Self, ComplexError> {
        let mut table = Vec::with_capacity(source.vertices().len());
        for label in source.vertices().labels() {
            let image = vertex_map
                .get(label)
                .ok_or_else(|| ComplexError::MapNotTotal(label.clone()))?;
            let j = target
                .vertices()
                .index_of(image)
                .ok_or_else(|| ComplexError::UnknownVertex(image.clone()))?;
            table.push(j);
        }
        Ok(Self { source, target, vertex_map, table })
    }

    pub fn identity(complex: &Complex) -> Self {
        let vertex_map = complex
            .vertices()
            .labels()
            .iter()
            .map(|l| (l.clone(), l.clone()))
            .collect();
        Self::new(complex.clone(), complex.clone(), vertex_map).expect("identity is total")
    }

    pub fn source(&self) -> &Complex {
        &self.source
    }

    pub fn target(&self) -> &Complex {
        &self.target
    }

    pub fn vertex_map(&self) -> &BTreeMap<String, String> {
        &self.vertex_map
    }

    pub fn image_of_vertex(&self, label: &str) -> Option<&str> {
        self.vertex_map.get(label).map(String::as_str)
    }

    pub(crate) fn image_index(&self, source_index: usize) -> usize {
        self.table[source_index]
    }

    pub fn image_mask(&self, mask: u64) -> u64 {
        bits(mask).fold(0u64, |acc, i| acc | 1 << self.table[i])
    }

    pub fn image(&self, simplex: &Simplex) -> Result<Simplex, ComplexError> {
        let m = self.source.vertices().mask_of(simplex)?;
        Ok(self.target.vertices().simplex_of(self.image_mask(m)))
    }

    /// `Err(witness)` carries a source simplex whose image is not a target simplex.
    ///
    /// Faces of a simplex map into faces of its image, so checking maximal
    /// simplices is enough.
    pub fn check(&self) -> Result<(), Simplex> {
        for m in self.source.maximal_masks() {
            if !self.target.contains_mask(self.image_mask(m)) {
                return Err(self.source.vertices().simplex_of(m));
            }
        }
        Ok(())
    }

    pub fn is_simplicial(&self) -> bool {
        self.check().is_ok()
    }
}

/// Label of the product vertex `(a, b)`.
pub fn pair_label(a: &str, b: &str) -> String {
    format!("({a},{b})")
}

/// Categorical product of two complexes together with its coordinate projections.
///
/// A set of pairs is a simplex iff both of its coordinate projections are
/// simplices, which makes the product the downward closure of `A × B` over
/// pairs of maximal simplices.
pub fn product(c1: &Complex, c2: &Complex) -> Result<(Complex, SimplicialMap, SimplicialMap), ComplexError> {
    let n1 = c1.vertices().len();
    let n2 = c2.vertices().len();
    if n1 * n2 > 64 {
        return Err(ComplexError::TooManyVertices(n1 * n2));
    }
    let mut labels = Vec::with_capacity(n1 * n2);
    let mut p1 = BTreeMap::new();
    let mut p2 = BTreeMap::new();
    for a in c1.vertices().labels() {
        for b in c2.vertices().labels() {
            let l = pair_label(a, b);
            p1.insert(l.clone(), a.clone());
            p2.insert(l.clone(), b.clone());
            labels.push(l);
        }
    }
    let vertices = VertexSet::new(labels)?;
    let mut gens = Vec::new();
    for ma in c1.maximal_masks() {
        for mb in c2.maximal_masks() {
            let mut g = 0u64;
            for i in bits(ma) {
                for j in bits(mb) {
                    g |= 1 << (i * n2 + j);
                }
            }
            gens.push(g);
        }
    }
    let prod = Complex::from_generator_masks(vertices, gens)?;
    let pi1 = SimplicialMap::new(prod.clone(), c1.clone(), p1)?;
    let pi2 = SimplicialMap::new(prod.clone(), c2.clone(), p2)?;
    Ok((prod, pi1, pi2))
}
