use super::point::BarycentricPoint;
use super::GeometryError;
use crate::complex::Simplex;

/// Where an endpoint of a segment sits relative to the segment's carrier simplex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EndpointKind {
    /// In the open interior of the carrier.
    Interior,
    /// In the interior of one facet (exactly one carrier vertex has weight zero).
    Face(Simplex),
    /// On an intersection of several facets.
    FaceIntersection(Simplex),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SegmentClassification {
    /// The simplex whose interior contains the open segment.
    pub carrier: Simplex,
    pub start: EndpointKind,
    pub end: EndpointKind,
}

/// Classifies the straight segment `a → b`.
///
/// Every point strictly between `a` and `b` has support `supp(a) ∪ supp(b)`, so
/// the segment stays in the realisation iff that union is a simplex.
pub fn classify_segment(a: &BarycentricPoint, b: &BarycentricPoint) -> Result<SegmentClassification, GeometryError> {
    if a.complex() != b.complex() {
        return Err(GeometryError::ComplexMismatch);
    }
    let complex = a.complex();
    let union = a.support_mask() | b.support_mask();
    if !complex.contains_mask(union) {
        return Err(GeometryError::SegmentLeavesComplex(complex.vertices().simplex_of(union)));
    }
    let kind = |p: &BarycentricPoint| {
        let own = p.support_mask();
        match (union & !own).count_ones() {
            0 => EndpointKind::Interior,
            1 => EndpointKind::Face(complex.vertices().simplex_of(own)),
            _ => EndpointKind::FaceIntersection(complex.vertices().simplex_of(own)),
        }
    };
    Ok(SegmentClassification {
        carrier: complex.vertices().simplex_of(union),
        start: kind(a),
        end: kind(b),
    })
}

/// A piecewise-linear path through the realisation, parameterised by time in seconds.
#[derive(Debug, Clone)]
pub struct PlPath {
    waypoints: Vec<(f64, BarycentricPoint)>,
}

impl PlPath {
    pub fn new(waypoints: Vec<(f64, BarycentricPoint)>) -> Result<Self, GeometryError> {
        if waypoints.is_empty() {
            return Err(GeometryError::EmptyPath);
        }
        for w in waypoints.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(GeometryError::TimesNotIncreasing { at: w[1].0 });
            }
            classify_segment(&w[0].1, &w[1].1)?;
        }
        Ok(Self { waypoints })
    }

    pub fn waypoints(&self) -> &[(f64, BarycentricPoint)] {
        &self.waypoints
    }

    pub fn start_time(&self) -> f64 {
        self.waypoints[0].0
    }

    pub fn end_time(&self) -> f64 {
        self.waypoints[self.waypoints.len() - 1].0
    }

    /// Position at time `t`, clamped to the path's time span.
    pub fn at(&self, t: f64) -> BarycentricPoint {
        let w = &self.waypoints;
        if t <= w[0].0 {
            return w[0].1.clone();
        }
        let k = w.partition_point(|(tk, _)| *tk <= t);
        if k == w.len() {
            return w[k - 1].1.clone();
        }
        let (t0, p0) = &w[k - 1];
        let (t1, p1) = &w[k];
        if t == *t0 {
            return p0.clone();
        }
        BarycentricPoint::lerp(p0, p1, (t - t0) / (t1 - t0)).expect("segments were validated")
    }

    /// Samples at `start + k·dt` up to and including the end time. Waypoint times that
    /// are multiples of `dt` are hit exactly.
    pub fn sample(&self, dt: f64) -> Vec<(f64, BarycentricPoint)> {
        assert!(dt > 0.0);
        let t0 = self.start_time();
        let n = ((self.end_time() - t0) / dt + 1e-9).floor() as usize;
        (0..=n)
            .map(|k| {
                let t = t0 + k as f64 * dt;
                (t, self.at(t))
            })
            .collect()
    }

    pub fn segments(&self) -> Result<Vec<SegmentClassification>, GeometryError> {
        self.waypoints
            .windows(2)
            .map(|w| classify_segment(&w[0].1, &w[1].1))
            .collect()
    }
}
