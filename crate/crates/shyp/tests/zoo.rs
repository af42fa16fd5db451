use std::f64::consts::{PI, TAU};

use proptest::prelude::*;
use shyp::geometry::{Point, Space};
use shyp::groups::Letter;
use shyp::num::Mat2;
use shyp::zoo::limit::{reduced_words, subsample};
use shyp::zoo::maps::{chart, unchart};
use shyp::zoo::{
    circle_matrix, default_schottky, isometric_arcs, make_covered_cyclic, make_cyclic_hyperbolic, make_free_boundary,
    make_product, make_schottky, make_zn_projective, perturb, Bump, LimitSet, Perturbation,
};

fn schottky() -> &'static shyp::zoo::ActionSystem {
    static S: std::sync::OnceLock<shyp::zoo::ActionSystem> = std::sync::OnceLock::new();
    S.get_or_init(default_schottky)
}

fn letter(c: char) -> Letter {
    Letter::from_char(c).unwrap()
}

fn angle(p: &Point) -> f64 {
    p.as_angle().unwrap()
}

fn inside(t: f64, arc: (f64, f64)) -> bool {
    (t - arc.0).rem_euclid(TAU) < arc.1
}

#[test]
fn cyclic_evaluation() {
    let s = make_cyclic_hyperbolic(2.0).unwrap();
    let g = s.alphabet.parse("a").unwrap();
    assert_eq!(angle(&s.apply(&g, &Point::angle(0.0)).unwrap()), 0.0);
    let y = s.apply(&g, &Point::angle(chart(1.0))).unwrap();
    assert!((unchart(angle(&y)) - 4.0).abs() < 1e-12);
    let x = Point::angle(0.7);
    assert_eq!(s.apply(&s.alphabet.identity(), &x).unwrap(), x);
}

#[test]
fn cyclic_expansion_factor() {
    let s = make_cyclic_hyperbolic(2.0).unwrap();
    let g = s.alphabet.parse("a").unwrap();
    assert!((s.expansion_factor(&g, &Point::angle(0.0)).unwrap() - 4.0).abs() < 1e-12);
    let t = chart(1.0);
    let e = s.expansion_factor(&g, &Point::angle(t)).unwrap();
    // central differences on θ ↦ 2·atan(4·tan(θ/2))
    let f = |th: f64| 2.0 * (4.0 * (th / 2.0).tan()).atan();
    let mut h = 1e-2;
    let mut fd = 0.0;
    for _ in 0..6 {
        fd = (f(t + h) - f(t - h)) / (2.0 * h);
        h /= 10.0;
    }
    assert!((fd - 8.0 / 17.0).abs() < 1e-8);
    assert!((e - 8.0 / 17.0).abs() < 1e-12);
}

#[test]
fn cyclic_rejects_small_multiplier() {
    assert!(make_cyclic_hyperbolic(1.0).is_err());
    assert!(make_cyclic_hyperbolic(0.5).is_err());
}

#[test]
fn cyclic_limit_and_arcs() {
    let s = make_cyclic_hyperbolic(2.0).unwrap();
    let LimitSet::Finite(pts) = &s.limit else { panic!("cyclic limit set is finite") };
    assert_eq!(pts, &vec![Point::Angle(0.0), Point::Angle(PI)]);
    let mats: Vec<Mat2> = s.letters().iter().map(|l| circle_matrix(&s, *l).unwrap()).collect();
    let arcs: Vec<(f64, f64)> = isometric_arcs(&mats).into_iter().map(Option::unwrap).collect();
    assert!(!inside(arcs[0].0, arcs[1]) && !inside(arcs[1].0, arcs[0]));
}

#[test]
fn covered_cyclic_points_and_lift() {
    let base = make_cyclic_hyperbolic(2.0).unwrap();
    let s = make_covered_cyclic(&base, 3).unwrap();
    let LimitSet::Finite(pts) = &s.limit else { panic!("cover limit set is finite") };
    assert_eq!(pts.len(), 6);
    for j in 0..6 {
        let want = j as f64 * PI / 3.0;
        assert!(pts.iter().any(|p| Space::Circle.dist(p, &Point::angle(want)) < 1e-12));
    }
    let a = letter('a');
    let g = circle_matrix(&base, a).unwrap();
    for i in 0..1000 {
        let psi = i as f64 * TAU / 1000.0;
        let up = angle(&s.apply_letter(a, &Point::angle(psi)));
        let down = shyp::zoo::maps::mobius_apply(&g, 3.0 * psi);
        assert!(Space::Circle.dist(&Point::angle(3.0 * up), &Point::angle(down)) < 1e-9);
    }
    for p in pts {
        assert!(Space::Circle.dist(&s.apply_letter(a, p), p) < 1e-9);
    }
    let e_lift = s.stretch(a, &Point::angle(0.0)).0;
    let e_base = base.stretch(a, &Point::angle(0.0)).0;
    assert!((e_lift - e_base).abs() < 1e-9);
    assert!(make_covered_cyclic(&base, 1).is_err());
    assert!(make_covered_cyclic(&make_free_boundary(2, 2.0).unwrap(), 3).is_err());
}

#[test]
fn schottky_arcs_disjoint_and_net_size() {
    let s = default_schottky();
    let mats: Vec<Mat2> = s.letters().iter().map(|l| circle_matrix(&s, *l).unwrap()).collect();
    let arcs: Vec<(f64, f64)> = isometric_arcs(&mats).into_iter().map(Option::unwrap).collect();
    for i in 0..4 {
        for j in 0..4 {
            if i != j {
                assert!(!inside(arcs[i].0, arcs[j]), "arcs {i} and {j} overlap");
            }
        }
    }
    let net = shyp::expansion::limit_net(&s);
    assert_eq!(net.len(), 4 * 3usize.pow(7));
}

#[test]
fn schottky_ping_pong_on_net() {
    let s = default_schottky();
    let mats: Vec<Mat2> = s.letters().iter().map(|l| circle_matrix(&s, *l).unwrap()).collect();
    let arcs: Vec<(f64, f64)> = isometric_arcs(&mats).into_iter().map(Option::unwrap).collect();
    let net = subsample(&shyp::expansion::limit_net(&s), 500);
    for l in s.letters() {
        let (own, other) = (arcs[l.index()], arcs[l.inv().index()]);
        for x in &net {
            if !inside(angle(x), own) {
                assert!(inside(angle(&s.apply_letter(l, x)), other));
            }
        }
    }
}

#[test]
fn schottky_net_is_invariant() {
    let s = default_schottky();
    let LimitSet::Schottky(lim) = &s.limit else { panic!("schottky limit") };
    for w in reduced_words(2, 6).iter().step_by(7) {
        let x = lim.point(w, lim.attracting[w[5].index()]);
        for l in s.letters() {
            let y = s.apply_letter(l, &Point::Angle(x));
            let mut v = vec![l];
            v.extend_from_slice(w);
            let v = shyp::groups::free_reduce(&v);
            let want = lim.point(&v, lim.attracting[w[5].index()]);
            assert!(Space::Circle.dist(&y, &Point::Angle(want)) < 1e-9);
        }
    }
}

#[test]
fn schottky_rank_one_is_cyclic() {
    let g = Mat2::new(2.0, 0.0, 0.0, 0.5);
    let s = make_schottky(&[g]).unwrap();
    let net = shyp::expansion::limit_net(&s);
    assert_eq!(net.len(), 2);
    assert!(net.iter().any(|p| Space::Circle.dist(p, &Point::angle(0.0)) < 1e-12));
    assert!(net.iter().any(|p| Space::Circle.dist(p, &Point::angle(PI)) < 1e-12));
}

#[test]
fn schottky_rejects_overlapping_arcs() {
    let close = shyp::zoo::symmetric_schottky_generators(2, 1.05);
    assert!(make_schottky(&close).is_err());
}

#[test]
fn free_boundary_exact_factor() {
    let s = make_free_boundary(2, 2.0).unwrap();
    let space = &s.space;
    let a = letter('a');
    let x = Point::word(&[a, letter('b'), letter('b'), letter('a')]);
    let y = Point::word(&[a, letter('b'), letter('a'), letter('a')]);
    let (fx, fy) = (s.apply_letter(a.inv(), &x), s.apply_letter(a.inv(), &y));
    assert_eq!(space.dist(&fx, &fy), 2.0 * space.dist(&x, &y));
    assert_eq!(s.stretch(a.inv(), &x).0, 2.0);
    for l in s.letters() {
        assert_eq!(s.apply_letter(l, &s.apply_letter(l.inv(), &x)), x);
    }
    assert!(make_free_boundary(2, 3.0).is_err());
    assert!(make_free_boundary(1, 2.0).is_err());
}

#[test]
fn zn_projective_factor_and_invariance() {
    let s = make_zn_projective(&[vec![9.0, 1.0, 3.0], vec![9.0, 3.0, 1.0]]).unwrap();
    let e0 = Point::line(&[1.0, 0.0, 0.0]);
    let g1_inv = s.alphabet.parse("A").unwrap();
    assert!((s.expansion_factor(&g1_inv, &e0).unwrap() - 3.0).abs() < 1e-12);
    // finite differences along the slower direction at e0
    let h = 1e-6;
    let y = Point::line(&[1.0, 0.0, h]);
    let ratio = s.space.dist(&s.apply(&g1_inv, &e0).unwrap(), &s.apply(&g1_inv, &y).unwrap()) / s.space.dist(&e0, &y);
    assert!((ratio - 3.0).abs() < 1e-6);
    let LimitSet::Finite(pts) = &s.limit else { panic!("finite") };
    for l in s.letters() {
        for p in pts {
            assert!(s.space.dist(&s.apply_letter(l, p), p) < 1e-15);
        }
    }
    assert!(make_zn_projective(&[vec![1.0, 9.0, 3.0], vec![9.0, 3.0, 1.0]]).is_err());
}

#[test]
fn product_components_and_swap() {
    let c = make_cyclic_hyperbolic(2.0).unwrap();
    let p = make_product(&c, &c, true).unwrap();
    let x = Point::part(0, Point::angle(1.0));
    let y = Point::part(1, Point::angle(1.0));
    let a = p.alphabet.parse("a").unwrap();
    let fx = p.apply(&a, &x).unwrap();
    assert_eq!(fx, Point::part(0, c.apply_letter(letter('a'), &Point::angle(1.0))));
    assert_eq!(p.apply(&a, &y).unwrap(), y);
    let swap2 = p.alphabet.parse("cc").unwrap();
    assert_eq!(p.apply(&swap2, &x).unwrap(), x);
    let sw = p.alphabet.parse("c").unwrap();
    assert_eq!(p.apply(&sw, &x).unwrap(), Point::part(1, Point::angle(1.0)));
    let z = make_zn_projective(&[vec![9.0, 1.0, 3.0], vec![9.0, 3.0, 1.0]]).unwrap();
    assert!(make_product(&c, &z, false).is_err());
    assert!(make_product(&c, &default_schottky(), true).is_err());
}

#[test]
fn zero_jitter_is_identical() {
    let s = default_schottky();
    let p = perturb(&s, &Perturbation::MatrixJitter { magnitude: 0.0, seed: 7 }).unwrap();
    assert_eq!(p.maps, s.maps);
    let net = subsample(&shyp::expansion::limit_net(&s), 40);
    for (f, g) in s.maps.iter().zip(&p.maps) {
        assert_eq!(shyp::zoo::lipschitz_sample(&s.space, f, g, &net).unwrap(), 0.0);
    }
}

#[test]
fn translate_conjugacy_closed_form() {
    let c = make_cyclic_hyperbolic(2.0).unwrap();
    let t = 1e-3;
    let p = perturb(&c, &Perturbation::Translate(t)).unwrap();
    let a = letter('a');
    let y = unchart(angle(&p.apply_letter(a, &Point::angle(chart(1.0)))));
    assert!((y - (4.0 - 3.0 * t)).abs() < 1e-12);
    let fixed = unchart(angle(&p.apply_letter(a, &Point::angle(chart(t)))));
    assert!((fixed - t).abs() < 1e-15);
}

#[test]
fn steep_bump_is_refused() {
    assert!(Bump::new(1.0, 0.1, 0.5).is_err());
    assert!(Bump::new(1.0, 0.5, 1e-3).is_ok());
    let s = default_schottky();
    assert!(perturb(&s, &Perturbation::BumpCompose(vec![Bump { center: 1.0, width: 0.1, height: 0.5 }])).is_err());
}

#[test]
fn jitter_distance_scales_with_magnitude() {
    let s = default_schottky();
    let d = shyp::expansion::build_expansion_datum(&s, 1.5).unwrap();
    let net = shyp::expansion::limit_net(&s);
    let k = shyp::stability::k_net(&s.space, &d, &net, 40);
    let realized = |m: f64| {
        let p = perturb(&s, &Perturbation::MatrixJitter { magnitude: m, seed: 7 }).unwrap();
        s.maps
            .iter()
            .zip(&p.maps)
            .map(|(f, g)| shyp::zoo::lipschitz_sample(&s.space, f, g, &k).unwrap())
            .fold(0.0, f64::max)
    };
    let (r4, r5) = (realized(1e-4), realized(1e-5));
    // frozen at 2.34e-3 for seed 7 on this K-net
    assert!((r4 - 2.34e-3).abs() < 0.05e-3, "{r4}");
    assert!((r4 / r5 - 10.0).abs() < 0.2);
}

proptest! {
    #[test]
    fn inverse_letters_cancel_on_circle(t in 0.0f64..TAU) {
        let s = schottky();
        let x = Point::angle(t);
        for l in s.letters() {
            prop_assert!(s.space.dist(&s.apply_letter(l.inv(), &s.apply_letter(l, &x)), &x) < 1e-9);
        }
    }

    #[test]
    fn covered_lift_inverts(t in 0.0f64..TAU) {
        let s = make_covered_cyclic(&make_cyclic_hyperbolic(2.0).unwrap(), 3).unwrap();
        let x = Point::angle(t);
        prop_assert!(s.inverse_defect(&[x]) < 1e-9);
    }

    #[test]
    fn bump_inverse(t in 0.0f64..TAU, h in -0.05f64..0.05) {
        let b = Bump::new(1.0, 0.5, h).unwrap();
        let y = b.apply(t);
        prop_assert!(Space::Circle.dist(&Point::angle(b.inverse(y)), &Point::angle(t)) < 1e-12);
    }

    #[test]
    fn apply_is_a_homomorphism(u in "[abAB]{0,6}", v in "[abAB]{0,6}", t in 0.0f64..TAU) {
        let s = schottky();
        let (g, h) = (s.alphabet.parse(&u).unwrap(), s.alphabet.parse(&v).unwrap());
        let x = Point::angle(t);
        let gh = s.alphabet.multiply(&g, &h).unwrap();
        let lhs = s.apply(&gh, &x).unwrap();
        let rhs = s.apply(&g, &s.apply(&h, &x).unwrap()).unwrap();
        prop_assert!(s.space.dist(&lhs, &rhs) < 1e-6);
    }
}
