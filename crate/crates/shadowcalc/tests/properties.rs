mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;

use shadowcalc::branching::{enumerate_branchings, exhaustive_branchings};
use shadowcalc::build::{branching_holds, remove_region, shadow_of_diagram};
use shadowcalc::group::{cyclic_reduce, free_reduce, is_trivial_group, smith_diagonal, Budget, GroupPresentation, GroupVerdict};
use shadowcalc::link::braid_diagram;
use shadowcalc::poly::{parse_polyhedron, HalfInt};
use shadowcalc::volume::{slope_length, volume_bounds, V_OCT};

/// Braid words on 2–4 strands in which every generator occurs at least
/// twice, 2–10 letters.
fn braid_word() -> impl Strategy<Value = (usize, Vec<(usize, bool)>)> {
    (2usize..=4).prop_flat_map(|n| {
        let base = proptest::collection::vec(any::<bool>(), 2 * (n - 1));
        let extra = proptest::collection::vec((0..n - 1, any::<bool>()), 0..=(10 - 2 * (n - 1)));
        (Just(n), base, extra)
            .prop_map(|(n, signs, extra)| {
                let mut w: Vec<(usize, bool)> = signs.into_iter().enumerate().map(|(i, s)| (i / 2, s)).collect();
                w.extend(extra);
                (n, w)
            })
            .prop_flat_map(|(n, w)| (Just(n), Just(w).prop_shuffle()))
    })
}

fn det(m: &[Vec<i64>]) -> i128 {
    if m.is_empty() {
        return 1;
    }
    (0..m.len())
        .map(|j| {
            let minor: Vec<Vec<i64>> =
                m[1..].iter().map(|r| r.iter().enumerate().filter(|(k, _)| *k != j).map(|(_, x)| *x).collect()).collect();
            let s = if j % 2 == 0 { 1 } else { -1 };
            s * m[0][j] as i128 * det(&minor)
        })
        .sum()
}

fn word() -> impl Strategy<Value = Vec<i32>> {
    proptest::collection::vec(prop_oneof![-3i32..=-1, 1i32..=3], 0..8)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn halfint_text_round_trip(t in -1000i64..1000) {
        let h = HalfInt::from_twice(t);
        prop_assert_eq!(HalfInt::parse(&h.pretty()), Some(h));
        prop_assert_eq!(h.to_f64() * 2.0, t as f64);
    }

    #[test]
    fn reduction_is_idempotent(w in word()) {
        let r = free_reduce(&w);
        prop_assert!(r.windows(2).all(|p| p[0] != -p[1]));
        prop_assert_eq!(free_reduce(&r), r.clone());
        let c = cyclic_reduce(&w);
        prop_assert!(c.len() <= r.len());
        prop_assert!(c.len() < 2 || c[0] != -c[c.len() - 1]);
        // exponent sums survive reduction
        for g in 1..=3 {
            let sum = |v: &[i32]| v.iter().filter(|x| x.abs() == g).map(|x| x.signum()).sum::<i32>();
            prop_assert_eq!(sum(&w), sum(&c));
        }
    }

    #[test]
    fn smith_form_matches_determinant(m in proptest::collection::vec(proptest::collection::vec(-4i64..=4, 3), 3)) {
        let d = smith_diagonal(m.clone(), 3);
        prop_assert!(d.windows(2).all(|p| p[1] % p[0] == 0), "{:?}", d);
        let det = det(&m);
        if det == 0 {
            prop_assert!(d.len() < 3);
        } else {
            prop_assert_eq!(d.len(), 3);
            prop_assert_eq!(d.iter().map(|x| *x as i128).product::<i128>(), det.abs());
        }
    }

    #[test]
    fn trivial_verdicts_are_sound(rels in proptest::collection::vec(word(), 0..4), gens in 1usize..=3) {
        let rels: Vec<Vec<i32>> = rels.into_iter().map(|r| r.into_iter().filter(|x| x.unsigned_abs() as usize <= gens).collect()).collect();
        let g = GroupPresentation::new(gens, rels);
        let h1 = g.abelianization();
        match is_trivial_group(&g, Budget::default()) {
            GroupVerdict::Trivial => prop_assert!(h1.is_trivial()),
            GroupVerdict::Nontrivial { h1: h } => {
                prop_assert!(!h.is_trivial());
                prop_assert_eq!(&h, &h1);
            }
            GroupVerdict::Unknown => prop_assert!(h1.is_trivial()),
        }
        // more relators than generators never beat a free factor
        prop_assert!(h1.free_rank + g.relators.len() >= gens);
    }

    #[test]
    fn slope_length_is_exact(g2 in -400i64..400, k in 0usize..40) {
        let s = slope_length(g2, k);
        let sq = (g2 * g2) as f64 + (k * k) as f64;
        prop_assert!((s * s - sq).abs() <= 1e-9 * sq.max(1.0));
        let r = s.round();
        if r * r == sq {
            prop_assert_eq!(s, r);
        }
    }

    #[test]
    fn volume_window_is_monotone(c in 1usize..12, a in 6.3f64..80.0, b in 6.3f64..80.0) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let (x, y) = (volume_bounds(c, lo), volume_bounds(c, hi));
        prop_assert_eq!(x.upper_strict, 2.0 * c as f64 * V_OCT);
        let (lx, ly) = (x.lower.unwrap(), y.lower.unwrap());
        prop_assert!(0.0 < lx && lx <= ly && ly < y.upper_strict);
        prop_assert!(!x.certificate || y.certificate);
        if y.certificate {
            let gap = c as f64 - ly / (2.0 * V_OCT);
            prop_assert!(gap > 0.0 && gap < 1.0);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn braid_shadows((n, w) in braid_word()) {
        let d = braid_diagram(n, &w).unwrap();
        let s = shadow_of_diagram(&d).unwrap();
        let m = &s.mapping_cylinder.polyhedron;
        prop_assert!(m.is_valid() && branching_holds(m));
        let p = &s.polyhedron;
        prop_assert!(p.is_valid() && branching_holds(p));
        prop_assert!(p.complexity_c() + 2 <= d.crossing_number(), "c = {} for {} crossings", p.complexity_c(), d.crossing_number());
        prop_assert_eq!(p.euler_characteristic(), p.euler_characteristic_cw());
        let text = p.to_asp();
        prop_assert_eq!(parse_polyhedron(&text).unwrap().to_asp(), text);
        let q = p.canonicalize();
        prop_assert_eq!(q.complexity_c(), p.complexity_c());
        prop_assert_eq!(q.euler_characteristic(), p.euler_characteristic());
        for r in p.regions.keys() {
            if let Ok(x) = remove_region(p, r) {
                prop_assert!(x.is_valid(), "{} removed: {:?}", r, x.validate().messages());
            }
        }
    }

    #[test]
    fn branchings_close_under_negation((n, w) in braid_word()) {
        let p = shadow_of_diagram(&braid_diagram(n, &w).unwrap()).unwrap().mapping_cylinder.polyhedron;
        prop_assume!(p.regions.len() <= 14);
        let fast: BTreeSet<_> = enumerate_branchings(&p).unwrap().into_iter().collect();
        prop_assert!(!fast.is_empty());
        let slow: BTreeSet<_> = exhaustive_branchings(&p).into_iter().collect();
        prop_assert_eq!(&fast, &slow);
        let neg: BTreeSet<_> = fast.iter().map(|b| b.negated()).collect();
        prop_assert_eq!(neg, fast);
    }
}

#[test]
fn fixtures_close_under_negation() {
    for (name, text) in common::asp_texts() {
        let p = parse_polyhedron(&text).unwrap();
        let all: BTreeSet<_> = enumerate_branchings(&p).unwrap().into_iter().collect();
        for b in &all {
            assert_eq!(&b.negated().negated(), b, "{name}");
            assert!(all.contains(&b.negated()), "{name}");
        }
    }
}
