//! Abstract simplicial complexes over finite labelled vertex sets.
//!
//! A [`Complex`] is the space of modes: every simplex is a set of basic modes that
//! may be simultaneously relevant, and the family is closed under taking nonempty
//! subsets. Internally simplices are bitmasks over the complex's [`VertexSet`], so
//! a complex holds at most 64 vertices.

mod cover;
mod map;

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use cover::{intersection_nerve, nerve, Cover, CoverFile};
pub use map::{pair_label, product, SimplicialMap};

/// Largest simplex whose faces we are willing to enumerate when closing downward.
pub const MAX_SIMPLEX_SIZE: usize = 24;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ComplexError {
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("duplicate vertex label `{0}`")]
    DuplicateVertex(String),
    #[error("invalid vertex label `{0}` (labels must be nonempty and must not contain '+')")]
    InvalidLabel(String),
    #[error("complex has {0} vertices; at most 64 are supported")]
    TooManyVertices(usize),
    #[error("simplex with {0} vertices is too large to close downward (limit {MAX_SIMPLEX_SIZE})")]
    SimplexTooLarge(usize),
    #[error("cover has no sets")]
    EmptyCover,
    #[error("cover has no sample points")]
    NoSamples,
    #[error("sample #{index} lies in no cover set")]
    NotACover { index: usize },
    #[error("covers do not share the same sample list")]
    SampleMismatch,
    #[error("vertex map is not defined on source vertex `{0}`")]
    MapNotTotal(String),
    #[error("empty simplex is not a mode")]
    EmptySimplex,
    #[error("malformed complex file: {0}")]
    Parse(String),
}

/// The ordered, duplicate-free list of basic-mode names.
#[derive(Debug, Clone)]
pub struct VertexSet {
    labels: Vec<String>,
    index: HashMap<String, usize>,
}

impl PartialEq for VertexSet {
    fn eq(&self, other: &Self) -> bool {
        self.labels == other.labels
    }
}

impl Eq for VertexSet {}

impl VertexSet {
    pub fn new<I, S>(labels: I) -> Result<Self, ComplexError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut out = Vec::new();
        let mut index = HashMap::new();
        for label in labels {
            let label: String = label.into();
            if label.is_empty() || label.contains('+') {
                return Err(ComplexError::InvalidLabel(label));
            }
            if index.insert(label.clone(), out.len()).is_some() {
                return Err(ComplexError::DuplicateVertex(label));
            }
            out.push(label);
        }
        if out.len() > 64 {
            return Err(ComplexError::TooManyVertices(out.len()));
        }
        Ok(Self { labels: out, index })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }

    pub fn contains(&self, label: &str) -> bool {
        self.index.contains_key(label)
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn mask_of(&self, simplex: &Simplex) -> Result<u64, ComplexError> {
        let mut mask = 0u64;
        for label in simplex.labels() {
            let i = self
                .index_of(label)
                .ok_or_else(|| ComplexError::UnknownVertex(label.to_owned()))?;
            mask |= 1 << i;
        }
        Ok(mask)
    }

    pub fn simplex_of(&self, mask: u64) -> Simplex {
        Simplex(
            bits(mask)
                .map(|i| self.labels[i].clone())
                .collect::<BTreeSet<_>>(),
        )
    }

    /// Members of `mask` listed in vertex order.
    pub fn ordered_labels(&self, mask: u64) -> Vec<String> {
        bits(mask).map(|i| self.labels[i].clone()).collect()
    }

    pub fn full_mask(&self) -> u64 {
        if self.labels.len() == 64 {
            u64::MAX
        } else {
            (1u64 << self.labels.len()) - 1
        }
    }
}

/// Indices of the set bits of `mask`, ascending.
pub(crate) fn bits(mut mask: u64) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if mask == 0 {
            None
        } else {
            let i = mask.trailing_zeros() as usize;
            mask &= mask - 1;
            Some(i)
        }
    })
}

/// Nonempty submasks of `mask`, including `mask` itself.
pub(crate) fn submasks(mask: u64) -> impl Iterator<Item = u64> {
    let mut sub = mask;
    let mut done = mask == 0;
    std::iter::from_fn(move || {
        if done {
            return None;
        }
        let cur = sub;
        if sub == 0 {
            done = true;
            return None;
        }
        sub = (sub - 1) & mask;
        if sub == 0 {
            done = true;
        }
        Some(cur)
    })
}

/// A finite set of vertex labels. Ordering and hashing follow the sorted label list.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Simplex(BTreeSet<String>);

impl Simplex {
    pub fn new<I, S>(labels: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self(labels.into_iter().map(Into::into).collect())
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn vertex(label: &str) -> Self {
        Self::new([label])
    }

    /// Parses a `'+'`-joined mode key. Member order in the key is irrelevant.
    pub fn parse_key(key: &str) -> Result<Self, ComplexError> {
        let key = key.trim();
        if key.is_empty() {
            return Err(ComplexError::EmptySimplex);
        }
        let mut out = BTreeSet::new();
        for part in key.split('+') {
            let part = part.trim();
            if part.is_empty() {
                return Err(ComplexError::InvalidLabel(key.to_owned()));
            }
            out.insert(part.to_owned());
        }
        Ok(Self(out))
    }

    /// Sorted labels joined with `'+'`, e.g. `Cu+Str`.
    pub fn key(&self) -> String {
        self.0.iter().map(String::as_str).collect::<Vec<_>>().join("+")
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(String::as_str)
    }

    pub fn contains(&self, label: &str) -> bool {
        self.0.contains(label)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn dimension(&self) -> isize {
        self.0.len() as isize - 1
    }

    pub fn is_subset(&self, other: &Simplex) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn is_strict_subset(&self, other: &Simplex) -> bool {
        self.0.len() < other.0.len() && self.0.is_subset(&other.0)
    }

    pub fn union(&self, other: &Simplex) -> Simplex {
        Simplex(self.0.union(&other.0).cloned().collect())
    }

    pub fn intersection(&self, other: &Simplex) -> Simplex {
        Simplex(self.0.intersection(&other.0).cloned().collect())
    }

    pub fn difference(&self, other: &Simplex) -> Simplex {
        Simplex(self.0.difference(&other.0).cloned().collect())
    }
}

impl fmt::Display for Simplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.0.iter().map(String::as_str).collect::<Vec<_>>().join(","))
    }
}

impl<S: Into<String>> FromIterator<S> for Simplex {
    fn from_iter<T: IntoIterator<Item = S>>(iter: T) -> Self {
        Simplex::new(iter)
    }
}

#[derive(Debug)]
struct Inner {
    vertices: VertexSet,
    masks: HashSet<u64>,
}

/// A downward-closed family of nonempty vertex subsets. Cheap to clone.
#[derive(Debug, Clone)]
pub struct Complex(Arc<Inner>);

impl PartialEq for Complex {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.vertices == other.0.vertices && self.0.masks == other.0.masks)
    }
}

impl Eq for Complex {}

impl Complex {
    /// Downward closure of `generators` over `vertices`.
    pub fn new(vertices: VertexSet, generators: &[Simplex]) -> Result<Self, ComplexError> {
        let masks = generators
            .iter()
            .filter(|g| !g.is_empty())
            .map(|g| vertices.mask_of(g))
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_generator_masks(vertices, masks)
    }

    pub(crate) fn from_generator_masks<I>(vertices: VertexSet, generators: I) -> Result<Self, ComplexError>
    where
        I: IntoIterator<Item = u64>,
    {
        let mut masks = HashSet::new();
        let mut tops: Vec<u64> = generators.into_iter().filter(|m| *m != 0).collect();
        // Largest first: faces of an already-closed generator are skipped wholesale.
        tops.sort_by_key(|m| std::cmp::Reverse(m.count_ones()));
        tops.dedup();
        for g in tops {
            if masks.contains(&g) {
                continue;
            }
            let size = g.count_ones() as usize;
            if size > MAX_SIMPLEX_SIZE {
                return Err(ComplexError::SimplexTooLarge(size));
            }
            masks.extend(submasks(g));
        }
        Ok(Self(Arc::new(Inner { vertices, masks })))
    }

    pub fn vertices(&self) -> &VertexSet {
        &self.0.vertices
    }

    /// Number of nonempty simplices.
    pub fn len(&self) -> usize {
        self.0.masks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.masks.is_empty()
    }

    pub fn contains(&self, simplex: &Simplex) -> bool {
        match self.0.vertices.mask_of(simplex) {
            Ok(m) => self.contains_mask(m),
            Err(_) => false,
        }
    }

    pub fn contains_mask(&self, mask: u64) -> bool {
        mask != 0 && self.0.masks.contains(&mask)
    }

    pub fn masks(&self) -> impl Iterator<Item = u64> + '_ {
        self.0.masks.iter().copied()
    }

    /// All simplices in canonical order: by size, then by vertex indices.
    pub fn simplices(&self) -> Vec<Simplex> {
        self.sorted_masks(self.0.masks.iter().copied())
            .into_iter()
            .map(|m| self.0.vertices.simplex_of(m))
            .collect()
    }

    pub fn maximal_masks(&self) -> Vec<u64> {
        let all: Vec<u64> = self.0.masks.iter().copied().collect();
        let maximal = all
            .iter()
            .copied()
            .filter(|&m| !all.iter().any(|&o| o != m && o & m == m));
        self.sorted_masks(maximal)
    }

    pub fn maximal_simplices(&self) -> Vec<Simplex> {
        self.maximal_masks()
            .into_iter()
            .map(|m| self.0.vertices.simplex_of(m))
            .collect()
    }

    pub fn dimension(&self) -> isize {
        self.0.masks.iter().map(|m| m.count_ones() as isize - 1).max().unwrap_or(-1)
    }

    /// Every simplex of `self` (by labels) is a simplex of `other`.
    pub fn is_subcomplex_of(&self, other: &Complex) -> bool {
        self.0.masks.iter().all(|&m| {
            let s = self.0.vertices.simplex_of(m);
            other.contains(&s)
        })
    }

    /// Union of two complexes; vertices of `other` not in `self` are appended.
    pub fn union(&self, other: &Complex) -> Result<Complex, ComplexError> {
        let mut labels: Vec<String> = self.vertices().labels().to_vec();
        for l in other.vertices().labels() {
            if !self.vertices().contains(l) {
                labels.push(l.clone());
            }
        }
        let vertices = VertexSet::new(labels)?;
        let mut gens = Vec::new();
        for c in [self, other] {
            for m in c.maximal_masks() {
                gens.push(vertices.mask_of(&c.vertices().simplex_of(m))?);
            }
        }
        Self::from_generator_masks(vertices, gens)
    }

    /// The subcomplex of simplices whose vertices all lie in `keep`, over the vertex subset `keep`.
    pub fn restrict(&self, keep: &[&str]) -> Result<Complex, ComplexError> {
        let vertices = VertexSet::new(keep.iter().copied())?;
        let mut keep_mask = 0u64;
        for l in keep {
            let i = self
                .vertices()
                .index_of(l)
                .ok_or_else(|| ComplexError::UnknownVertex((*l).to_owned()))?;
            keep_mask |= 1 << i;
        }
        let gens = self
            .0
            .masks
            .iter()
            .filter(|&&m| m & !keep_mask == 0)
            .map(|&m| vertices.mask_of(&self.vertices().simplex_of(m)))
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_generator_masks(vertices, gens)
    }

    fn sorted_masks<I: IntoIterator<Item = u64>>(&self, masks: I) -> Vec<u64> {
        let mut v: Vec<(Vec<usize>, u64)> = masks.into_iter().map(|m| (bits(m).collect(), m)).collect();
        v.sort_by(|a, b| a.0.len().cmp(&b.0.len()).then_with(|| a.0.cmp(&b.0)));
        v.into_iter().map(|(_, m)| m).collect()
    }

    pub fn to_file(&self) -> ComplexFile {
        ComplexFile {
            vertices: self.vertices().labels().to_vec(),
            maximal_simplices: self
                .maximal_masks()
                .into_iter()
                .map(|m| self.vertices().ordered_labels(m))
                .collect(),
        }
    }

    pub fn from_file(file: &ComplexFile) -> Result<Complex, ComplexError> {
        let vertices = VertexSet::new(file.vertices.iter().cloned())?;
        let gens: Vec<Simplex> = file.maximal_simplices.iter().map(|s| Simplex::new(s.iter().cloned())).collect();
        Complex::new(vertices, &gens)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("complex file serializes")
    }

    pub fn from_json(text: &str) -> Result<Complex, ComplexError> {
        let file: ComplexFile = serde_json::from_str(text).map_err(|e| ComplexError::Parse(e.to_string()))?;
        Complex::from_file(&file)
    }
}

/// Convenience constructor mirroring the `make_complex` operation.
pub fn make_complex(vertices: VertexSet, generators: &[Simplex]) -> Result<Complex, ComplexError> {
    Complex::new(vertices, generators)
}

/// On-disk form of a complex: vertices plus maximal simplices only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexFile {
    pub vertices: Vec<String>,
    pub maximal_simplices: Vec<Vec<String>>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vs(labels: &[&str]) -> VertexSet {
        VertexSet::new(labels.iter().copied()).unwrap()
    }

    #[test]
    fn straight_curve_edge() {
        let c = make_complex(vs(&["Str", "Cu"]), &[Simplex::new(["Str", "Cu"])]).unwrap();
        assert_eq!(c.len(), 3);
        for s in [Simplex::vertex("Str"), Simplex::vertex("Cu"), Simplex::new(["Str", "Cu"])] {
            assert!(c.contains(&s), "{s}");
        }
    }

    #[test]
    fn single_vertex() {
        let c = make_complex(vs(&["a"]), &[Simplex::vertex("a")]).unwrap();
        assert_eq!(c.simplices(), vec![Simplex::vertex("a")]);
    }

    #[test]
    fn two_triangles_sharing_an_edge() {
        // {a,b,g} and {a,g,d}: 7 + 7 - 3 shared ({a},{g},{a,g}) = 11
        let c = make_complex(
            vs(&["α", "β", "γ", "δ"]),
            &[Simplex::new(["α", "β", "γ"]), Simplex::new(["α", "γ", "δ"])],
        )
        .unwrap();
        assert_eq!(c.len(), 11);
        assert!(!c.contains(&Simplex::new(["β", "δ"])));
    }

    #[test]
    fn unknown_vertex_rejected() {
        let err = make_complex(vs(&["a"]), &[Simplex::new(["a", "z"])]).unwrap_err();
        assert_eq!(err, ComplexError::UnknownVertex("z".into()));
    }

    #[test]
    fn labels_validated() {
        assert!(matches!(VertexSet::new(["a", "a"]), Err(ComplexError::DuplicateVertex(_))));
        assert!(matches!(VertexSet::new(["a+b"]), Err(ComplexError::InvalidLabel(_))));
        assert!(matches!(VertexSet::new([""]), Err(ComplexError::InvalidLabel(_))));
    }

    #[test]
    fn closure_is_idempotent() {
        let c = make_complex(vs(&["a", "b", "c"]), &[Simplex::new(["a", "b"]), Simplex::vertex("c")]).unwrap();
        let again = make_complex(c.vertices().clone(), &c.simplices()).unwrap();
        assert_eq!(c, again);
    }

    #[test]
    fn mode_keys() {
        let s = Simplex::parse_key("Str+Cu").unwrap();
        assert_eq!(s.key(), "Cu+Str");
        assert_eq!(Simplex::parse_key("Cu + Str").unwrap(), s);
        assert!(Simplex::parse_key("").is_err());
        assert!(Simplex::parse_key("a++b").is_err());
    }

    #[test]
    fn serialization_lists_maximal_simplices_in_vertex_order() {
        let c = make_complex(vs(&["Str", "Cu"]), &[Simplex::new(["Str", "Cu"])]).unwrap();
        let f = c.to_file();
        assert_eq!(f.maximal_simplices, vec![vec!["Str".to_string(), "Cu".to_string()]]);
        assert_eq!(Complex::from_json(&c.to_json()).unwrap(), c);
    }

    #[test]
    fn submask_enumeration() {
        let subs: Vec<u64> = submasks(0b101).collect();
        assert_eq!(subs, vec![0b101, 0b100, 0b001]);
        assert_eq!(submasks(0).count(), 0);
    }

    #[test]
    fn union_and_restrict() {
        let a = make_complex(vs(&["p", "q"]), &[Simplex::new(["p", "q"])]).unwrap();
        let b = make_complex(vs(&["q", "r"]), &[Simplex::new(["q", "r"])]).unwrap();
        let u = a.union(&b).unwrap();
        assert_eq!(u.vertices().labels(), &["p", "q", "r"]);
        assert_eq!(u.maximal_simplices().len(), 2);
        assert!(!u.contains(&Simplex::new(["p", "r"])));
        let r = u.restrict(&["p", "q"]).unwrap();
        assert_eq!(r, a);
    }
}
