use std::f64::consts::{PI, TAU};
use std::sync::OnceLock;

use proptest::prelude::*;
use shyp::expansion::{
    build_expansion_datum, chain_lipschitz_ratio, is_refinement, limit_net, refine_datum, verify_expansion,
    ExpansionDatum,
};
use shyp::geometry::{Point, Space};
use shyp::groups::Letter;
use shyp::zoo::limit::subsample;
use shyp::zoo::{default_schottky, make_cyclic_hyperbolic, make_free_boundary, make_zn_projective, ActionSystem};
use shyp::Error;

fn schottky() -> &'static (ActionSystem, ExpansionDatum) {
    static S: OnceLock<(ActionSystem, ExpansionDatum)> = OnceLock::new();
    S.get_or_init(|| {
        let s = default_schottky();
        let d = build_expansion_datum(&s, 1.5).unwrap();
        (s, d)
    })
}

// arc-length derivative of x ↦ k·x in the chart θ = 2·atan(x)
fn scaling_derivative(k: f64, theta: f64) -> f64 {
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    k / (c * c + k * k * s * s)
}

#[test]
fn cyclic_datum() {
    let s = make_cyclic_hyperbolic(2.0).unwrap();
    let d = build_expansion_datum(&s, 1.5).unwrap();
    assert_eq!(d.len(), 2);
    assert!(d.lambda >= 1.5);
    assert!(d.lipschitz <= 4.05 && d.lipschitz >= 4.0);
    let space = &s.space;
    let zero = Point::angle(0.0);
    let inf = Point::angle(PI);
    let (i0, _) = d.best_region(space, &zero).unwrap();
    let (i1, _) = d.best_region(space, &inf).unwrap();
    assert_ne!(i0, i1);
    // γ = x ↦ 4x expands at 0, so the region around 0 carries s = γ⁻¹
    assert_eq!(d.letters[i0], Letter::from_char('A').unwrap());
    assert_eq!(d.letters[i1], Letter::from_char('a').unwrap());
    for (alpha, k) in [(i0, 4.0), (i1, 0.25)] {
        for j in 0..2000 {
            let t = j as f64 * TAU / 2000.0;
            if d.regions[alpha].contains(space, &Point::angle(t)) {
                assert!(scaling_derivative(k, t) >= d.lambda - 1e-9);
            }
        }
    }
}

#[test]
fn free_boundary_datum() {
    let s = make_free_boundary(2, 2.0).unwrap();
    let d = build_expansion_datum(&s, 2.0).unwrap();
    assert_eq!(d.len(), 4);
    assert_eq!(d.lebesgue, 0.5);
    assert!((d.delta - 0.225).abs() < 1e-15);
    assert_eq!(d.lipschitz, 2.0);
    assert_eq!(d.lambda, 2.0);
    let r = verify_expansion(&s, &d, &limit_net(&s));
    assert!(r.passed());
    assert_eq!(r.check("ball").unwrap().passed, true);
    assert!(r.check("ball").unwrap().samples > 0);
}

#[test]
fn unreachable_lambda_has_witness() {
    let s = make_cyclic_hyperbolic(2.0).unwrap();
    match build_expansion_datum(&s, 100.0) {
        Err(Error::Uncoverable { witness, best }) => {
            assert!(!witness.is_empty());
            assert!(best < 100.0);
        }
        other => panic!("expected an uncoverable witness, got {other:?}"),
    }
    assert!(build_expansion_datum(&make_free_boundary(2, 2.0).unwrap(), 3.0).is_err());
    assert!(build_expansion_datum(&s, 1.0).is_err());
}

#[test]
fn cyclic_verification() {
    let s = make_cyclic_hyperbolic(2.0).unwrap();
    let d = build_expansion_datum(&s, 1.5).unwrap();
    let r = verify_expansion(&s, &d, &limit_net(&s));
    assert!(r.passed(), "{:?}", r.checks);
    assert!(r.min_expansion >= 1.5);
    for name in ["symmetric", "inverse", "lebesgue", "lipschitz", "expansion", "ball"] {
        assert!(r.check(name).is_some(), "{name}");
    }
}

#[test]
fn oversized_delta_fails_lebesgue() {
    let s = make_cyclic_hyperbolic(2.0).unwrap();
    let mut d = build_expansion_datum(&s, 1.5).unwrap();
    d.delta = 2.0 * d.lebesgue;
    let r = verify_expansion(&s, &d, &limit_net(&s));
    let leb = r.check("lebesgue").unwrap();
    assert!(!leb.passed);
    assert!(leb.witness.is_some());
    assert!(leb.slack < 0.0);
}

#[test]
fn schottky_and_zn_verify() {
    let (s, d) = schottky();
    assert!(verify_expansion(s, d, &subsample(&limit_net(s), 300)).passed());
    let z = make_zn_projective(&[vec![9.0, 1.0, 3.0], vec![9.0, 3.0, 1.0]]).unwrap();
    let zd = build_expansion_datum(&z, 1.5).unwrap();
    assert!(verify_expansion(&z, &zd, &limit_net(&z)).passed());
    // only g₁⁻¹ expands at e₀, and g_j⁻¹ carries no region for j ≥ 2
    let e0 = Point::line(&[1.0, 0.0, 0.0]);
    let at_e0: Vec<Letter> = (0..zd.len()).filter(|a| zd.regions[*a].contains(&z.space, &e0)).map(|a| zd.letters[a]).collect();
    assert_eq!(at_e0, vec![Letter::from_char('a').unwrap()]);
    let b_inv = Letter::from_char('B').unwrap();
    assert!((0..zd.len()).all(|a| zd.letters[a] != b_inv.inv() || zd.regions[a].is_empty_shape()));
}

#[test]
fn refinements() {
    let s = make_cyclic_hyperbolic(2.0).unwrap();
    let d = build_expansion_datum(&s, 1.5).unwrap();
    let d1 = refine_datum(&d, 0.1).unwrap();
    let d2 = refine_datum(&d1, 0.05).unwrap();
    assert_eq!(d2.delta, 0.05);
    assert!(is_refinement(&d, &d1) && is_refinement(&d1, &d2) && is_refinement(&d, &d2));
    assert!(!is_refinement(&d2, &d1));
    assert_eq!(refine_datum(&d1, 0.1), Err(Error::Refinement { new: 0.1, old: 0.1 }));
    assert_eq!(d2.refines, vec![d.delta, 0.1]);
}

#[test]
fn chain_lipschitz_bound() {
    let (s, d) = schottky();
    let net = subsample(&limit_net(s), 64);
    for k in 1..=5 {
        assert!(chain_lipschitz_ratio(s, d, k, &net) <= 1.0 + 1e-9, "k = {k}");
    }
    let c = make_cyclic_hyperbolic(2.0).unwrap();
    let cd = build_expansion_datum(&c, 1.5).unwrap();
    for k in 1..=5 {
        assert!(chain_lipschitz_ratio(&c, &cd, k, &limit_net(&c)) <= 1.0 + 1e-9);
    }
}

#[test]
fn deterministic_construction() {
    let s = default_schottky();
    assert_eq!(build_expansion_datum(&s, 1.5).unwrap(), schottky().1);
}

proptest! {
    #[test]
    fn inverse_letters_expand_on_regions(t in 0.0f64..TAU, h in 1e-6f64..1e-2) {
        let (s, d) = schottky();
        let space = &s.space;
        let x = Point::angle(t);
        let y = Point::angle(t + h);
        for alpha in 0..d.len() {
            let u = &d.regions[alpha];
            if u.contains(space, &x) && u.contains(space, &y) && u.margin(space, &x) > h {
                let f = d.inverse_map(s, alpha);
                let ratio = space.dist(&f.apply(&x), &f.apply(&y)) / space.dist(&x, &y);
                prop_assert!(ratio >= d.lambda - 1e-9);
            }
        }
    }

    #[test]
    fn letters_are_lipschitz(t in 0.0f64..TAU, h in 1e-6f64..1e-2) {
        let (s, d) = schottky();
        let (x, y) = (Point::angle(t), Point::angle(t + h));
        for l in s.letters() {
            let r = Space::Circle.dist(&s.apply_letter(l, &x), &s.apply_letter(l, &y)) / Space::Circle.dist(&x, &y);
            prop_assert!(r <= d.lipschitz * (1.0 + 1e-9));
        }
    }
}
