//! Brute-force oracles shared by the property and acceptance tests. None of them
//! use the library's own closure, nerve or product code.
#![allow(dead_code)]

use std::collections::BTreeSet;

use modesheaf::complex::{Complex, Cover, Simplex, VertexSet};
use modesheaf::state::{BoxRegion, Interval, State};
use rand::Rng;

/// A complex as a set of sorted label lists.
pub type Sets = BTreeSet<Vec<String>>;

pub fn labels(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

fn members(mask: u64, n: usize) -> Vec<usize> {
    (0..n).filter(|i| mask >> i & 1 == 1).collect()
}

fn named(labels: &[String], idx: &[usize]) -> Vec<String> {
    let mut v: Vec<String> = idx.iter().map(|&i| labels[i].clone()).collect();
    v.sort();
    v
}

/// Every nonempty subset of some generator, by enumerating all subsets of the vertices.
pub fn closure_oracle(labels: &[String], gens: &[Vec<usize>]) -> Sets {
    let n = labels.len();
    (1u64..1 << n)
        .map(|m| members(m, n))
        .filter(|s| gens.iter().any(|g| s.iter().all(|i| g.contains(i))))
        .map(|s| named(labels, &s))
        .collect()
}

/// Sets of cover members (by index) sharing a sample point.
pub fn nerve_oracle(labels: &[String], intervals: &[(f64, f64)], samples: &[f64]) -> Sets {
    let n = labels.len();
    (1u64..1 << n)
        .map(|m| members(m, n))
        .filter(|s| samples.iter().any(|&x| s.iter().all(|&i| intervals[i].0 <= x && x <= intervals[i].1)))
        .map(|s| named(labels, &s))
        .collect()
}

/// Sets of pairs whose two projections are simplices of the factors.
pub fn product_oracle(l1: &[String], c1: &Sets, l2: &[String], c2: &Sets) -> Sets {
    let pairs: Vec<(usize, usize)> = (0..l1.len()).flat_map(|i| (0..l2.len()).map(move |j| (i, j))).collect();
    let n = pairs.len();
    let mut out = Sets::new();
    for m in 1u64..1 << n {
        let s = members(m, n);
        let a: BTreeSet<usize> = s.iter().map(|&k| pairs[k].0).collect();
        let b: BTreeSet<usize> = s.iter().map(|&k| pairs[k].1).collect();
        if c1.contains(&named(l1, &a.into_iter().collect::<Vec<_>>())) && c2.contains(&named(l2, &b.into_iter().collect::<Vec<_>>())) {
            let mut v: Vec<String> = s.iter().map(|&k| format!("({},{})", l1[pairs[k].0], l2[pairs[k].1])).collect();
            v.sort();
            out.insert(v);
        }
    }
    out
}

pub fn simplices_of(c: &Complex) -> Sets {
    c.simplices().iter().map(|s| s.labels().map(str::to_owned).collect()).collect()
}

pub fn build(labels: &[String], gens: &[Vec<usize>]) -> Complex {
    let gens: Vec<Simplex> = gens.iter().map(|g| Simplex::new(g.iter().map(|&i| labels[i].clone()))).collect();
    Complex::new(VertexSet::new(labels.iter().cloned()).unwrap(), &gens).unwrap()
}

/// One to four random nonempty generators over `n` vertices.
pub fn random_gens(rng: &mut impl Rng, n: usize) -> Vec<Vec<usize>> {
    let k = rng.gen_range(1..=4);
    (0..k)
        .map(|_| loop {
            let g: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.5)).collect();
            if !g.is_empty() {
                break g;
            }
        })
        .collect()
}

/// A random cover of `[0, 10]` by `n` closed intervals, with samples all lying in some interval.
pub fn random_cover(rng: &mut impl Rng, n: usize) -> (Vec<String>, Vec<(f64, f64)>, Vec<f64>) {
    let labels = labels("U", n);
    let intervals: Vec<(f64, f64)> = (0..n)
        .map(|_| {
            let a: f64 = rng.gen_range(0.0..10.0);
            let b: f64 = rng.gen_range(0.0..10.0);
            (a.min(b), a.max(b))
        })
        .collect();
    let mut samples: Vec<f64> = (0..12)
        .map(|_| rng.gen_range(0.0..10.0))
        .filter(|&x| intervals.iter().any(|&(lo, hi)| lo <= x && x <= hi))
        .collect();
    samples.push(0.5 * (intervals[0].0 + intervals[0].1));
    (labels, intervals, samples)
}

pub fn make_cover(labels: &[String], intervals: &[(f64, f64)], samples: &[f64]) -> Cover {
    let sets = labels
        .iter()
        .zip(intervals)
        .map(|(l, &(lo, hi))| (l.clone(), BoxRegion::new().with("a", Interval::closed(lo, hi))))
        .collect();
    Cover::new("[0,10]", sets, samples.iter().map(|&x| State::from_pairs([("a", x)])).collect())
}

/// Number of `m × n` 0/1 matrices with no zero row and no zero column, by
/// inclusion-exclusion over empty rows.
pub fn full_relations(m: u32, n: u32) -> i64 {
    (0..=m)
        .map(|i| {
            let sign = if i % 2 == 0 { 1 } else { -1 };
            sign * binom(m, i) * (2i64.pow(m - i) - 1).pow(n)
        })
        .sum()
}

fn binom(n: u32, k: u32) -> i64 {
    (0..k).fold(1i64, |acc, i| acc * (n - i) as i64 / (i + 1) as i64)
}

/// Product simplex count from the factors alone: each pair of simplices `(A, B)`
/// contributes the subsets of `A × B` projecting onto both.
pub fn product_count(c1: &Sets, c2: &Sets) -> i64 {
    c1.iter().flat_map(|a| c2.iter().map(move |b| full_relations(a.len() as u32, b.len() as u32))).sum()
}

/// Simplices of `c` whose open interior contains the point with weights `w` (vertex order).
pub fn interiors_containing(c: &Complex, w: &[f64]) -> Vec<Simplex> {
    let v = c.vertices();
    c.simplices()
        .into_iter()
        .filter(|s| (0..v.len()).all(|i| (w[i] > 0.0) == s.contains(v.label(i))))
        .collect()
}
