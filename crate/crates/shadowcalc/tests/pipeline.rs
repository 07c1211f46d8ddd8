mod common;

use std::f64::consts::PI;

use shadowcalc::build::{branching_holds, cap_boundary, excise_vertex, resolve_type3};
use shadowcalc::census::{classify_model, model, simply_connected, CappingPattern};
use shadowcalc::group::{is_trivial_group, pi1_presentation, Budget, GroupVerdict};
use shadowcalc::link::is_admissible;
use shadowcalc::poly::HalfInt;
use shadowcalc::script::run_script;
use shadowcalc::volume::{fiber_census, sl_of, surgery_presentation_bound, volume_window, VolumeError, V_OCT};

#[test]
fn diagram_shadows() {
    // (file, crossings, c)
    let want = [
        ("diagrams/figure-eight.pd", 4, 2),
        ("diagrams/hopf.pd", 2, 0),
        ("diagrams/trefoil.pd", 3, 0),
        ("diagrams/unknot-two-kinks.pd", 2, 1),
        ("diagrams/unknot.pd", 0, 0),
    ];
    for (f, cr, c) in want {
        let s = common::shadow(f);
        let p = &s.polyhedron;
        assert_eq!(s.diagram.crossing_number(), cr, "{f}");
        assert!(is_admissible(&s.diagram).admissible, "{f}");
        assert!(p.is_valid(), "{f}: {:?}", p.validate().messages());
        assert!(branching_holds(p) && branching_holds(&s.mapping_cylinder.polyhedron), "{f}");
        assert_eq!(p.complexity_c(), c, "{f}");
        let fc = fiber_census(p, p.branching.as_ref().unwrap()).unwrap();
        assert_eq!((fc.signature.ii2, fc.signature.ii3), (c, 0), "{f}");
        // one definite fold per link component
        assert_eq!(fc.i0_families, s.diagram.components.len(), "{f}");
    }
}

#[test]
fn surgery_bounds() {
    assert_eq!(surgery_presentation_bound(&common::diagram("diagrams/figure-eight.pd")), Ok(2));
    assert_eq!(surgery_presentation_bound(&common::diagram("diagrams/trefoil.pd")), Ok(0));
    assert!(matches!(surgery_presentation_bound(&common::diagram("diagrams/unknot.pd")), Err(VolumeError::Diagram(_))));
}

#[test]
fn capped_shadow_is_simply_connected() {
    // the contractible shadow of an admissible knot diagram
    for f in ["diagrams/figure-eight.pd", "diagrams/trefoil.pd", "diagrams/unknot-two-kinks.pd"] {
        let p = common::shadow(f).polyhedron;
        assert_eq!(is_trivial_group(&pi1_presentation(&p), Budget::default()), GroupVerdict::Trivial, "{f}");
    }
    // a shadow of S³ again, though not of a diagram
    let stein = common::poly("polyhedra/torus-link-stein.asp");
    assert_eq!(is_trivial_group(&pi1_presentation(&stein), Budget::default()), GroupVerdict::Trivial);
    // an uncapped neighbourhood carries the free group of its singular graph
    let v = is_trivial_group(&pi1_presentation(&model("27-i").unwrap()), Budget::default());
    assert!(matches!(v, GroupVerdict::Nontrivial { .. }), "{v:?}");
}

#[test]
fn abalone_certificate() {
    let r = volume_window(&common::poly("polyhedra/abalone.asp")).unwrap();
    assert_eq!(r.c, 1);
    let ks: Vec<_> = r.sl.iter().map(|s| (s.g2, s.k)).collect();
    assert_eq!(ks, [(8, 5), (10, 1)]);
    assert_eq!(r.sl_min, 89f64.sqrt());
    assert!(r.certificate && 89f64.sqrt() > 2.0 * PI * 2f64.sqrt());
    let lower = 2.0 * V_OCT * (1.0 - 4.0 * PI * PI / 89.0).powf(1.5);
    assert!((r.volume.lower.unwrap() - lower).abs() < 1e-12);
}

#[test]
fn figure_eight_windows() {
    let natural = volume_window(&common::poly("polyhedra/figure-eight-closed.asp")).unwrap();
    assert_eq!(natural.sl_min, 8f64.sqrt());
    assert_eq!(natural.volume.lower, None);
    assert!(!natural.certificate);
    let r = volume_window(&common::poly("polyhedra/figure-eight-sl10.asp")).unwrap();
    assert_eq!((r.c, r.sl_min), (2, 10.0));
    assert!((r.volume.lower.unwrap() - 6.90024570338).abs() < 1e-9);
    assert!((r.volume.upper_strict - 14.6554495068).abs() < 1e-9);
    // 10 < 2π·2
    assert!(!r.certificate);
}

#[test]
fn slopes_need_special_polyhedra() {
    assert_eq!(sl_of(&common::poly("polyhedra/torus-link-stein.asp")).unwrap_err(), VolumeError::NotSpecial);
    let open = common::shadow("diagrams/figure-eight.pd").polyhedron;
    assert_eq!(volume_window(&open).unwrap_err(), VolumeError::NotSpecial);
}

#[test]
fn census_with_towers() {
    let towers = |id: &str| {
        let r = classify_model(id, true).unwrap();
        assert!(r.iter().all(|v| v.verdict != GroupVerdict::Unknown), "{id}");
        simply_connected(&r)
    };
    let both = CappingPattern { disks: vec![], towers: vec!["l1".into(), "l2".into()] };
    for id in ["27-i", "32-ii", "32-iii"] {
        assert!(towers(id).contains(&both), "{id}");
    }
    assert!(towers("32-i").is_empty());
}

#[test]
fn capped_models_keep_c() {
    for id in ["27-ii", "32-iv"] {
        let m = model(id).unwrap();
        let q = cap_boundary(&cap_boundary(&m, "l1", HalfInt::ZERO).unwrap(), "l2", HalfInt::ZERO).unwrap();
        assert!(q.is_valid());
        assert_eq!(q.complexity_c(), 1);
    }
}

#[test]
fn resolving_type3_boundaries() {
    let t = common::poly("polyhedra/trefoil-two-holes.asp");
    let one = resolve_type3(&t, "H1").unwrap();
    let two = resolve_type3(&one, "H2").unwrap();
    assert_eq!(t.true_vertices().len() + 4, two.true_vertices().len());
    assert!(two.is_valid() && branching_holds(&two));
    assert!(two.boundary.is_empty());
    let x = excise_vertex(&common::poly("polyhedra/abalone.asp"), "v").unwrap();
    assert_eq!((x.true_vertices().len(), x.boundary_vertices().len()), (0, 4));
}

#[test]
fn scripts_chain_operations() {
    let p = common::shadow("diagrams/figure-eight.pd").polyhedron;
    let l = p.boundary.keys().next().unwrap().clone();
    let q = run_script(&p, &format!("# close the link component\ntower {l} height 2 gleams 1,1/2\n")).unwrap();
    assert_eq!(q.complexity_c(), 2);
    assert!(q.is_valid());
    let err = run_script(&p, "cap nowhere 0").unwrap_err();
    assert!(err.to_string().starts_with("line 1:"), "{err}");
}
