mod common;

use common::*;
use modesheaf::complex::{nerve, product, Complex, Simplex, VertexSet};
use modesheaf::environment::TrackEnvironment;
use modesheaf::geometry::{belief, interior_support, product_partition, BarycentricPoint, Component, PartitionFile, PartitionOfUnity};
use modesheaf::modes::{tran, TransitionReason};
use modesheaf::scenario::Scenario;
use modesheaf::state::State;
use proptest::collection::vec;
use proptest::prelude::*;

fn gens(max_n: usize) -> impl Strategy<Value = (usize, Vec<Vec<usize>>)> {
    (1..=max_n).prop_flat_map(|n| (Just(n), vec(vec(0..n, 1..=n), 1..=4)))
}

fn cover_input() -> impl Strategy<Value = (Vec<(f64, f64)>, Vec<f64>)> {
    (1usize..=6).prop_flat_map(|n| {
        (
            vec((0.0..10.0f64, 0.0..10.0f64).prop_map(|(a, b)| (a.min(b), a.max(b))), n),
            vec(0.0..10.0f64, 1..12),
        )
    })
}

/// A complex, a simplex of it, and positive weights for that simplex.
fn point_input() -> impl Strategy<Value = (usize, Vec<Vec<usize>>, usize, Vec<f64>)> {
    gens(6).prop_flat_map(|(n, g)| {
        let k = g.len();
        (Just(n), Just(g), 0..k, vec(0.001..1.0f64, 6))
    })
}

fn racing_phi(coord: &str) -> PartitionOfUnity {
    let edge = Complex::new(VertexSet::new(["Str", "Cu"]).unwrap(), &[Simplex::new(["Str", "Cu"])]).unwrap();
    let mut f = PartitionFile::new();
    f.insert("Str".into(), Component::pl(coord, &[[3.0, 1.0], [5.0, 0.0]]));
    f.insert("Cu".into(), Component::pl(coord, &[[3.0, 0.0], [5.0, 1.0]]));
    PartitionOfUnity::new(&edge, &f).unwrap()
}

/// Hat functions on the path a - b - c over `coord`.
fn hats(coord: &str) -> PartitionOfUnity {
    let path = Complex::new(VertexSet::new(["a", "b", "c"]).unwrap(), &[Simplex::new(["a", "b"]), Simplex::new(["b", "c"])]).unwrap();
    let mut f = PartitionFile::new();
    f.insert("a".into(), Component::pl(coord, &[[0.0, 1.0], [1.0, 0.0]]));
    f.insert("b".into(), Component::pl(coord, &[[0.0, 0.0], [1.0, 1.0], [2.0, 0.0]]));
    f.insert("c".into(), Component::pl(coord, &[[1.0, 0.0], [2.0, 1.0]]));
    PartitionOfUnity::new(&path, &f).unwrap()
}

proptest! {
    #[test]
    fn downward_closure_matches_enumeration((n, g) in gens(6)) {
        let l = labels("v", n);
        let c = build(&l, &g);
        prop_assert_eq!(simplices_of(&c), closure_oracle(&l, &g));
    }

    #[test]
    fn nerve_matches_enumeration((intervals, raw) in cover_input()) {
        let l = labels("U", intervals.len());
        let mut samples: Vec<f64> = raw.into_iter().filter(|&x| intervals.iter().any(|&(lo, hi)| lo <= x && x <= hi)).collect();
        samples.push(0.5 * (intervals[0].0 + intervals[0].1));
        let c = nerve(&make_cover(&l, &intervals, &samples)).unwrap();
        prop_assert_eq!(simplices_of(&c), nerve_oracle(&l, &intervals, &samples));
    }

    #[test]
    fn product_matches_enumeration((n1, g1) in gens(3), (n2, g2) in gens(3)) {
        let (l1, l2) = (labels("a", n1), labels("b", n2));
        let (c1, c2) = (build(&l1, &g1), build(&l2, &g2));
        let (p, pi1, pi2) = product(&c1, &c2).unwrap();
        prop_assert_eq!(simplices_of(&p), product_oracle(&l1, &simplices_of(&c1), &l2, &simplices_of(&c2)));
        prop_assert!(pi1.is_simplicial() && pi2.is_simplicial());
    }

    #[test]
    fn product_size_matches_count((n1, g1) in gens(4), (n2, g2) in gens(4)) {
        let (l1, l2) = (labels("a", n1), labels("b", n2));
        let (c1, c2) = (build(&l1, &g1), build(&l2, &g2));
        let p = product(&c1, &c2).unwrap().0;
        prop_assert_eq!(p.len() as i64, product_count(&simplices_of(&c1), &simplices_of(&c2)));
    }

    #[test]
    fn interior_is_unique((n, g, pick, raw) in point_input()) {
        let l = labels("v", n);
        let c = build(&l, &g);
        let w: Vec<f64> = (0..n).map(|i| if g[pick].contains(&i) { raw[i] } else { 0.0 }).collect();
        let p = BarycentricPoint::new(&c, w).unwrap();
        let found = interiors_containing(&c, p.weights());
        let expected = Simplex::new(g[pick].iter().map(|&i| l[i].clone()));
        prop_assert_eq!(found, vec![expected.clone()]);
        prop_assert_eq!(interior_support(&p), expected);
    }

    #[test]
    fn belief_is_additive((n, g, pick, raw) in point_input(), split in any::<u64>()) {
        let l = labels("v", n);
        let c = build(&l, &g);
        let w: Vec<f64> = (0..n).map(|i| if g[pick].contains(&i) { raw[i] } else { 0.0 }).collect();
        let p = BarycentricPoint::new(&c, w).unwrap();
        let x = Simplex::new((0..n).filter(|i| split >> i & 1 == 1).map(|i| l[i].clone()));
        let y = Simplex::new((0..n).filter(|i| split >> (i + 8) & 1 == 1 && split >> i & 1 == 0).map(|i| l[i].clone()));
        let all = Simplex::new(l.iter().cloned());
        prop_assert!((belief(&p, &x.union(&y)) - belief(&p, &x) - belief(&p, &y)).abs() <= 1e-12);
        prop_assert!((belief(&p, &all.difference(&x)) - (1.0 - belief(&p, &x))).abs() <= 1e-12);
    }

    #[test]
    fn product_partition_marginals(x1 in -1.0..9.0f64, y2 in -0.5..2.5f64) {
        let phi = racing_phi("x1");
        let psi = hats("y2");
        let chi = product_partition(&phi, &psi).unwrap();
        let s = State::from_pairs([("x1", x1), ("y2", y2)]);
        let p = chi.evaluate(&s).unwrap();
        let (a, b) = (phi.evaluate(&s).unwrap(), psi.evaluate(&s).unwrap());
        for alpha in ["Str", "Cu"] {
            let m: f64 = ["a", "b", "c"].iter().map(|i| p.weight(&format!("({alpha},{i})"))).sum();
            prop_assert!((m - a.weight(alpha)).abs() <= 1e-9);
        }
        for i in ["a", "b", "c"] {
            let m: f64 = ["Str", "Cu"].iter().map(|alpha| p.weight(&format!("({alpha},{i})"))).sum();
            prop_assert!((m - b.weight(i)).abs() <= 1e-9);
        }
    }

    #[test]
    fn tran_refuses_unrelated_modes(x in 0.0..8.0f64, v in 0.0..=120.0f64) {
        let sc = Scenario::load(format!("{}/../../scenarios/single_car.json", env!("CARGO_MANIFEST_DIR"))).unwrap();
        let sys = sc.system();
        let s = State::from_pairs([("x", x), ("v", v)]);
        for (from, to) in [("Str", "Cu"), ("Cu", "Str")] {
            let o = tran(sys, sys.package(&Simplex::vertex(from)).unwrap(), &s, &Simplex::vertex(to));
            prop_assert!(!o.is_ok());
            prop_assert_eq!(o.reason, TransitionReason::Unrelated);
        }
    }

    #[test]
    fn advance_keeps_cars_on_the_track(cmds in vec((0.0..=150.0f64, 0.001..5.0f64), 1..50)) {
        let mut env = TrackEnvironment::new(8.0, 2);
        for (v, dt) in cmds {
            let before = [env.position(0), env.position(1)];
            env.oracle_power(0, v);
            env.oracle_power(1, 120.0 - v.min(120.0));
            env.advance(dt);
            for (car, &x0) in before.iter().enumerate() {
                prop_assert!(env.position(car) >= x0);
                prop_assert!(env.position(car) <= 8.0);
                prop_assert!((0.0..=120.0).contains(&env.speed(car)));
            }
        }
    }
}
