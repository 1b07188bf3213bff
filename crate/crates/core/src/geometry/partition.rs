use std::collections::BTreeSet;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use super::point::{BarycentricPoint, DEFAULT_SNAP, SUM_TOLERANCE};
use super::GeometryError;
use crate::complex::{pair_label, product, Complex, Cover};
use crate::state::{BoxRegion, Interval, State};

/// Piecewise-linear function of one coordinate, constant beyond the outer breakpoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseLinear {
    pub coord: String,
    pub points: Vec<[f64; 2]>,
}

impl PiecewiseLinear {
    pub fn new(coord: impl Into<String>, points: Vec<[f64; 2]>) -> Result<Self, GeometryError> {
        let pl = Self { coord: coord.into(), points };
        pl.validate()?;
        Ok(pl)
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        if self.points.is_empty() {
            return Err(GeometryError::BadBreakpoints(format!("`{}` has no breakpoints", self.coord)));
        }
        if self.points.iter().flatten().any(|v| !v.is_finite()) {
            return Err(GeometryError::BadBreakpoints(format!("`{}` has a non-finite breakpoint", self.coord)));
        }
        if self.points.windows(2).any(|w| w[1][0] <= w[0][0]) {
            return Err(GeometryError::BadBreakpoints(format!(
                "`{}` breakpoints are not strictly increasing",
                self.coord
            )));
        }
        Ok(())
    }

    pub fn eval(&self, x: f64) -> f64 {
        let pts = &self.points;
        let first = pts[0];
        let last = pts[pts.len() - 1];
        if x <= first[0] {
            return first[1];
        }
        if x >= last[0] {
            return last[1];
        }
        // first index whose abscissa exceeds x; 1 <= k < len
        let k = pts.partition_point(|p| p[0] <= x);
        let [x0, y0] = pts[k - 1];
        let [x1, y1] = pts[k];
        if x == x0 {
            return y0;
        }
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    }
}

/// A partition-of-unity component: products and complements of piecewise-linear factors.
///
/// JSON is externally tagged, e.g. `{"pl": {"coord": "x", "points": [[3,0],[5,1]]}}`,
/// `{"product": [..]}`, `{"one_minus": [..]}` or `{"const": 0.5}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Component {
    Pl(PiecewiseLinear),
    Const(f64),
    Product(Vec<Component>),
    /// `1 - Σ terms`
    OneMinus(Vec<Component>),
}

impl Component {
    pub fn pl(coord: &str, points: &[[f64; 2]]) -> Self {
        Component::Pl(PiecewiseLinear { coord: coord.to_owned(), points: points.to_vec() })
    }

    pub fn eval(&self, state: &State) -> Result<f64, GeometryError> {
        Ok(match self {
            Component::Pl(pl) => {
                let x = state
                    .get(&pl.coord)
                    .ok_or_else(|| GeometryError::MissingCoordinate(pl.coord.clone()))?;
                pl.eval(x)
            }
            Component::Const(c) => *c,
            Component::Product(fs) => {
                let mut acc = 1.0;
                for f in fs {
                    acc *= f.eval(state)?;
                }
                acc
            }
            Component::OneMinus(ts) => {
                let mut acc = 0.0;
                for t in ts {
                    acc += t.eval(state)?;
                }
                1.0 - acc
            }
        })
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        match self {
            Component::Pl(pl) => pl.validate(),
            Component::Const(c) if !c.is_finite() => Err(GeometryError::BadBreakpoints("non-finite constant".into())),
            Component::Const(_) => Ok(()),
            Component::Product(fs) | Component::OneMinus(fs) => fs.iter().try_for_each(Component::validate),
        }
    }

    /// Coordinates this component reads.
    pub fn coords(&self, out: &mut BTreeSet<String>) {
        match self {
            Component::Pl(pl) => {
                out.insert(pl.coord.clone());
            }
            Component::Const(_) => {}
            Component::Product(fs) | Component::OneMinus(fs) => fs.iter().for_each(|f| f.coords(out)),
        }
    }

    /// Breakpoint abscissae per coordinate, used to place validation probes.
    pub fn breakpoints(&self, coord: &str, out: &mut Vec<f64>) {
        match self {
            Component::Pl(pl) if pl.coord == coord => out.extend(pl.points.iter().map(|p| p[0])),
            Component::Pl(_) | Component::Const(_) => {}
            Component::Product(fs) | Component::OneMinus(fs) => fs.iter().for_each(|f| f.breakpoints(coord, out)),
        }
    }

    pub fn rename_coords(&self, rename: &impl Fn(&str) -> String) -> Component {
        match self {
            Component::Pl(pl) => Component::Pl(PiecewiseLinear { coord: rename(&pl.coord), points: pl.points.clone() }),
            Component::Const(c) => Component::Const(*c),
            Component::Product(fs) => Component::Product(fs.iter().map(|f| f.rename_coords(rename)).collect()),
            Component::OneMinus(ts) => Component::OneMinus(ts.iter().map(|t| t.rename_coords(rename)).collect()),
        }
    }
}

/// JSON form of a partition: one component per vertex label.
pub type PartitionFile = IndexMap<String, Component>;

/// Component functions `φ_α`, one per vertex of `complex`, that are nonnegative and sum to one.
#[derive(Debug, Clone)]
pub struct PartitionOfUnity {
    complex: Complex,
    components: Vec<Component>,
    snap: f64,
    cover: Option<Cover>,
}

impl PartitionOfUnity {
    /// Vertices without a listed component get the constant zero.
    pub fn new(complex: &Complex, components: &PartitionFile) -> Result<Self, GeometryError> {
        let mut out = vec![Component::Const(0.0); complex.vertices().len()];
        for (label, comp) in components {
            let i = complex
                .vertices()
                .index_of(label)
                .ok_or_else(|| GeometryError::UnknownVertex(label.clone()))?;
            comp.validate()?;
            out[i] = comp.clone();
        }
        Ok(Self { complex: complex.clone(), components: out, snap: DEFAULT_SNAP, cover: None })
    }

    pub fn with_snap(mut self, snap: f64) -> Self {
        self.snap = snap;
        self
    }

    /// Attaches a cover; evaluation then rejects states outside every cover set and
    /// the validator checks the support condition on its samples.
    pub fn with_cover(mut self, cover: Cover) -> Self {
        self.cover = Some(cover);
        self
    }

    pub fn complex(&self) -> &Complex {
        &self.complex
    }

    pub fn snap(&self) -> f64 {
        self.snap
    }

    pub fn cover(&self) -> Option<&Cover> {
        self.cover.as_ref()
    }

    pub fn component(&self, label: &str) -> Option<&Component> {
        self.complex.vertices().index_of(label).map(|i| &self.components[i])
    }

    pub fn components(&self) -> impl Iterator<Item = (&str, &Component)> {
        self.complex.vertices().labels().iter().map(String::as_str).zip(&self.components)
    }

    pub fn to_file(&self) -> PartitionFile {
        self.components().map(|(l, c)| (l.to_owned(), c.clone())).collect()
    }

    pub fn coords(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.components.iter().for_each(|c| c.coords(&mut out));
        out
    }

    /// Raw component values in vertex order, without any axiom checks.
    pub fn raw(&self, state: &State) -> Result<Vec<f64>, GeometryError> {
        self.components.iter().map(|c| c.eval(state)).collect()
    }

    /// `φ(s) = Σ φ_α(s) e_α`.
    ///
    /// Component values are kept as computed (no rescaling): they must be
    /// nonnegative and sum to one within tolerance. Weights below the snap
    /// tolerance are zeroed before the support is checked against the complex.
    pub fn evaluate(&self, state: &State) -> Result<BarycentricPoint, GeometryError> {
        if let Some(cover) = &self.cover {
            if !cover.covers(state) {
                return Err(GeometryError::OutsideCover(state.clone()));
            }
        }
        let mut weights = self.raw(state)?;
        for (i, w) in weights.iter_mut().enumerate() {
            if !w.is_finite() || *w < -self.snap {
                return Err(GeometryError::NegativeWeight {
                    vertex: self.complex.vertices().label(i).to_owned(),
                    value: *w,
                });
            }
            if *w < self.snap {
                *w = 0.0;
            }
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > SUM_TOLERANCE {
            return Err(GeometryError::NotNormalized { sum: total });
        }
        BarycentricPoint::from_normalized(&self.complex, weights)
    }

    pub fn rename_coords(&self, rename: impl Fn(&str) -> String) -> Self {
        Self {
            complex: self.complex.clone(),
            components: self.components.iter().map(|c| c.rename_coords(&rename)).collect(),
            snap: self.snap,
            cover: None,
        }
    }

    /// Keeps the components of the vertices of `sub`, a subcomplex (by labels) of ours.
    pub fn restrict_to(&self, sub: &Complex) -> Result<Self, GeometryError> {
        let components = sub
            .vertices()
            .labels()
            .iter()
            .map(|l| {
                self.component(l)
                    .cloned()
                    .ok_or_else(|| GeometryError::UnknownVertex(l.clone()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self { complex: sub.clone(), components, snap: self.snap, cover: None })
    }
}

/// Product partition `χ_(α,i)(s) = φ_α(s) ψ_i(s)` over the product complex.
///
/// Both factors read the same joint state; give them disjoint coordinate names
/// (see [`PartitionOfUnity::rename_coords`]) to evaluate on a pair `(s1, s2)`.
pub fn product_partition(pu1: &PartitionOfUnity, pu2: &PartitionOfUnity) -> Result<PartitionOfUnity, GeometryError> {
    let (prod, _, _) = product(pu1.complex(), pu2.complex())?;
    let mut comps = PartitionFile::new();
    for (a, fa) in pu1.components() {
        for (b, fb) in pu2.components() {
            comps.insert(pair_label(a, b), Component::Product(vec![fa.clone(), fb.clone()]));
        }
    }
    Ok(PartitionOfUnity::new(&prod, &comps)?.with_snap(pu1.snap.max(pu2.snap)))
}

const AUDIT_CAP: usize = 50_000;

/// Grid of states inside `region`: per coordinate, the partition breakpoints in the
/// interval, midpoints between consecutive ones, and the interval ends (nudged
/// inward when open).
pub fn breakpoint_grid(region: &BoxRegion, pu: &PartitionOfUnity) -> Vec<State> {
    let axes: Vec<(String, Vec<f64>)> = region
        .bounds()
        .map(|(coord, iv)| (coord.to_owned(), axis_values(coord, iv, pu)))
        .collect();
    let mut out = vec![State::new()];
    for (coord, values) in &axes {
        if out.len() * values.len() > AUDIT_CAP {
            break;
        }
        out = out
            .iter()
            .flat_map(|s| values.iter().map(move |&v| s.clone().with(coord, v)))
            .collect();
    }
    out.retain(|s| region.contains(s));
    out
}

fn axis_values(coord: &str, iv: &Interval, pu: &PartitionOfUnity) -> Vec<f64> {
    let mut bps = Vec::new();
    for (_, c) in pu.components() {
        c.breakpoints(coord, &mut bps);
    }
    let nudge = |x: f64| 1e-9 * x.abs().max(1.0);
    let lo = if iv.lo.is_finite() {
        iv.lo + if iv.lo_open { nudge(iv.lo) } else { 0.0 }
    } else {
        bps.iter().copied().fold(f64::INFINITY, f64::min) - 1.0
    };
    let hi = if iv.hi.is_finite() {
        iv.hi - if iv.hi_open { nudge(iv.hi) } else { 0.0 }
    } else {
        bps.iter().copied().fold(f64::NEG_INFINITY, f64::max) + 1.0
    };
    let (lo, hi) = match (lo.is_finite(), hi.is_finite()) {
        (true, true) => (lo, hi),
        (true, false) => (lo, lo),
        (false, true) => (hi, hi),
        (false, false) => (0.0, 0.0),
    };
    let mut v: Vec<f64> = bps.into_iter().filter(|b| *b > lo && *b < hi).collect();
    v.push(lo);
    v.push(hi);
    v.sort_by(f64::total_cmp);
    v.dedup();
    let mids: Vec<f64> = v.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    v.extend(mids);
    v.sort_by(f64::total_cmp);
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::{make_complex, Simplex, VertexSet};

    const L: f64 = 8.0;

    fn edge() -> Complex {
        make_complex(VertexSet::new(["Str", "Cu"]).unwrap(), &[Simplex::new(["Str", "Cu"])]).unwrap()
    }

    pub(crate) fn racing_phi() -> PartitionOfUnity {
        let mut f = PartitionFile::new();
        f.insert("Str".into(), Component::pl("x", &[[3.0 * L / 8.0, 1.0], [5.0 * L / 8.0, 0.0]]));
        f.insert("Cu".into(), Component::pl("x", &[[3.0 * L / 8.0, 0.0], [5.0 * L / 8.0, 1.0]]));
        PartitionOfUnity::new(&edge(), &f).unwrap()
    }

    fn x(v: f64) -> State {
        State::from_pairs([("x", v)])
    }

    #[test]
    fn pl_interpolation_and_clamping() {
        let pl = PiecewiseLinear::new("x", vec![[0.0, 0.0], [1.0, 2.0], [3.0, 0.0]]).unwrap();
        assert_eq!(pl.eval(-5.0), 0.0);
        assert_eq!(pl.eval(0.5), 1.0);
        assert_eq!(pl.eval(1.0), 2.0);
        assert_eq!(pl.eval(2.0), 1.0);
        assert_eq!(pl.eval(9.0), 0.0);
        assert!(PiecewiseLinear::new("x", vec![[1.0, 0.0], [1.0, 1.0]]).is_err());
    }

    #[test]
    fn racing_phi_midpoint() {
        let p = racing_phi().evaluate(&x(L / 2.0)).unwrap();
        assert_eq!(p.weight("Str"), 0.5);
        assert_eq!(p.weight("Cu"), 0.5);
        let p0 = racing_phi().evaluate(&x(0.0)).unwrap();
        assert_eq!(p0.weight("Str"), 1.0);
        assert_eq!(p0.support(), Simplex::vertex("Str"));
    }

    #[test]
    fn sum_violation_is_reported() {
        let mut f = PartitionFile::new();
        f.insert("Str".into(), Component::Const(0.45));
        f.insert("Cu".into(), Component::Const(0.45));
        let pu = PartitionOfUnity::new(&edge(), &f).unwrap();
        assert!(matches!(pu.evaluate(&x(1.0)), Err(GeometryError::NotNormalized { .. })));
    }

    #[test]
    fn non_simplicial_support_is_reported() {
        let two_points = make_complex(VertexSet::new(["Str", "Cu"]).unwrap(), &[Simplex::vertex("Str"), Simplex::vertex("Cu")]).unwrap();
        let pu = PartitionOfUnity::new(&two_points, &racing_phi().to_file()).unwrap();
        assert!(matches!(pu.evaluate(&x(L / 2.0)), Err(GeometryError::SupportNotASimplex(_))));
        assert!(pu.evaluate(&x(0.0)).is_ok());
    }

    #[test]
    fn missing_coordinate() {
        assert!(matches!(racing_phi().evaluate(&State::new()), Err(GeometryError::MissingCoordinate(_))));
    }

    #[test]
    fn racing_product_partition_at_half_and_zero() {
        let phi = racing_phi();
        let psi = product_partition(&phi.rename_coords(|c| format!("{c}1")), &phi.rename_coords(|c| format!("{c}2"))).unwrap();
        let p = psi.evaluate(&State::from_pairs([("x1", L / 2.0), ("x2", 0.0)])).unwrap();
        assert_eq!(p.weight("(Str,Str)"), 0.5);
        assert_eq!(p.weight("(Cu,Str)"), 0.5);
        assert_eq!(p.weight("(Str,Cu)"), 0.0);
        assert_eq!(p.weight("(Cu,Cu)"), 0.0);
        let v = psi.evaluate(&State::from_pairs([("x1", L), ("x2", 0.0)])).unwrap();
        assert_eq!(v.support(), Simplex::vertex("(Cu,Str)"));
        assert_eq!(v.weight("(Cu,Str)"), 1.0);
    }

    #[test]
    fn component_json_shape() {
        let c: Component = serde_json::from_str(r#"{"one_minus": [{"pl": {"coord": "x", "points": [[3,0],[5,1]]}}]}"#).unwrap();
        assert_eq!(c.eval(&x(4.0)).unwrap(), 0.5);
        let c: Component = serde_json::from_str(r#"{"const": 0.25}"#).unwrap();
        assert_eq!(c, Component::Const(0.25));
    }
}
