use std::f64::consts::TAU;
use std::sync::OnceLock;

use shyp::coding::shyp_certificate;
use shyp::expansion::{build_expansion_datum, limit_net, verify_expansion, ExpansionDatum};
use shyp::geometry::{Point, Space};
use shyp::num::Mat2;
use shyp::stability::{
    check_displacement, check_injectivity, code_independence, conjugacy_map, conjugacy_point, continuity_modulus,
    k_net, lipschitz_distance, perturbation_epsilon, perturbed_datum, PerturbedSystem,
};
use shyp::zoo::limit::subsample;
use shyp::zoo::maps::{chart, unchart};
use shyp::zoo::{
    default_schottky, make_cyclic_hyperbolic, perturb, ActionSystem, Bump, GenMap, Perturbation, Step,
};
use shyp::Error;

const TOL: f64 = 1e-9;

struct Base {
    system: ActionSystem,
    datum: ExpansionDatum,
    n: usize,
    net: Vec<Point>,
    k: Vec<Point>,
}

fn schottky() -> &'static Base {
    static S: OnceLock<Base> = OnceLock::new();
    S.get_or_init(|| {
        let system = default_schottky();
        let datum = build_expansion_datum(&system, 1.5).unwrap();
        let full = limit_net(&system);
        let cert = shyp_certificate(&system, &datum, &subsample(&full, 20), 12, 200, 4).unwrap();
        let k = k_net(&system.space, &datum, &full, 40);
        Base { n: cert.n.unwrap(), net: subsample(&full, 50), k, system, datum }
    })
}

fn cyclic() -> Base {
    let system = make_cyclic_hyperbolic(2.0).unwrap();
    let datum = build_expansion_datum(&system, 1.5).unwrap();
    let net = limit_net(&system);
    let k = k_net(&system.space, &datum, &net, 40);
    Base { system, datum, n: 2, net, k }
}

fn with(base: &Base, p: ActionSystem) -> PerturbedSystem {
    PerturbedSystem::new(&base.system, p, &base.datum, base.n, base.k.clone()).unwrap()
}

fn jitter(base: &Base, magnitude: f64) -> PerturbedSystem {
    with(base, perturb(&base.system, &Perturbation::MatrixJitter { magnitude, seed: 7 }).unwrap())
}

fn mock(lambda: f64, lipschitz: f64, delta: f64) -> ExpansionDatum {
    let mut d = build_expansion_datum(&make_cyclic_hyperbolic(2.0).unwrap(), 1.5).unwrap();
    d.lambda = lambda;
    d.lipschitz = lipschitz;
    d.delta = delta;
    d
}

#[test]
fn epsilon_formula() {
    assert!((perturbation_epsilon(&mock(1.5, 4.0, 0.1), 2) - 1.0 / 1920.0).abs() < 1e-18);
    // 2/(2·1.1) < 1, so the first branch of the min is active
    assert!((perturbation_epsilon(&mock(3.0, 1.1, 2.0), 1) - 1.0 / 1.1).abs() < 1e-15);
    assert_eq!(perturbation_epsilon(&mock(3.0, 1.1, 3.0), 1), 1.0);
    let tiny = perturbation_epsilon(&mock(1.0 + 1e-9, 4.0, 0.1), 2);
    assert!(tiny > 0.0 && tiny < 2e-12);
}

#[test]
fn lipschitz_distance_examples() {
    let s = Space::Circle;
    let grid: Vec<Point> = (0..200).map(|i| Point::angle(i as f64 * TAU / 200.0)).collect();
    let id = GenMap { steps: vec![] };
    assert_eq!(lipschitz_distance(&s, &id, &id, &grid).unwrap(), 0.0);
    let t = 0.01;
    // a rotation by t/2 of the vector moves chart angles by t
    let rot = GenMap::single(Step::Mobius(Mat2::rotation(t / 2.0)));
    assert!((lipschitz_distance(&s, &id, &rot, &grid).unwrap() - t).abs() < 1e-9);
    assert!(lipschitz_distance(&s, &id, &rot, &grid[..1]).is_err());

    let c = cyclic();
    let p = perturb(&c.system, &Perturbation::Translate(1e-3)).unwrap();
    let d = lipschitz_distance(&c.system.space, &c.system.maps[0], &p.maps[0], &c.k).unwrap();
    // frozen at 1.29e-2 on the 40-point K-net of {0, ∞}
    assert!((d - 1.29e-2).abs() < 0.01e-2, "{d}");
}

#[test]
fn identity_conjugacy() {
    let b = schottky();
    let ps = jitter(b, 0.0);
    assert_eq!(ps.max_realized(), 0.0);
    for x in &b.net[..10] {
        let e = conjugacy_point(&ps, &b.datum, x, TOL, 200).unwrap();
        assert!(b.system.space.dist(&e.phi, x) < 1e-12);
        assert!(e.diameter < TOL && e.rate_slack >= 0.0);
    }
    let table = conjugacy_map(&ps, &b.datum, &b.net, TOL, 200).unwrap();
    assert!(table.complete());
    assert!(table.displacement < 1e-12);
    assert!(table.max_residual() < 1e-12);
    assert!(check_injectivity(&table, &b.system, &b.datum, 1e-7).passed);
    let again = conjugacy_map(&ps, &b.datum, &b.net, TOL, 200).unwrap();
    assert_eq!(table, again);
}

#[test]
fn translated_cyclic_fixed_point() {
    let c = cyclic();
    let t = 1e-4;
    let ps = with(&c, perturb(&c.system, &Perturbation::Translate(t)).unwrap());
    let e = conjugacy_point(&ps, &c.datum, &Point::angle(0.0), TOL, 200).unwrap();
    assert!((unchart(e.phi.as_angle().unwrap()) - t).abs() < 1e-9);
    let table = conjugacy_map(&ps, &c.datum, &c.net, TOL, 200).unwrap();
    assert!(table.max_residual() < 1e-9);
    let disp = check_displacement(&table, &c.datum);
    assert!((disp.max - chart(t)).abs() < 1e-9);
    assert!(disp.below_epsilon && disp.below_fifth);
}

#[test]
fn large_translation_is_refused() {
    let c = cyclic();
    let ps = with(&c, perturb(&c.system, &Perturbation::Translate(1e-3)).unwrap());
    match conjugacy_point(&ps, &c.datum, &Point::angle(0.0), TOL, 200) {
        Err(Error::NotAdmissible { letter, distance, epsilon }) => {
            assert!(letter == "a" || letter == "A");
            assert!(distance >= epsilon);
        }
        other => panic!("expected refusal, got {other:?}"),
    }
}

#[test]
fn diagonal_change_keeps_fixed_points() {
    let c = cyclic();
    let ps = with(&c, make_cyclic_hyperbolic(2.0 + 1e-6).unwrap());
    let table = conjugacy_map(&ps, &c.datum, &c.net, TOL, 200).unwrap();
    for e in &table.entries {
        assert!(c.system.space.dist(&e.x, &e.phi) < 1e-12);
    }
}

#[test]
fn mismatched_systems_are_rejected() {
    let c = cyclic();
    let other = default_schottky();
    assert!(matches!(
        PerturbedSystem::new(&c.system, other, &c.datum, 2, c.k.clone()),
        Err(Error::SpaceMismatch)
    ));
}

#[test]
fn jitter_run() {
    let b = schottky();
    let ps = jitter(b, 1e-7);
    assert!(ps.max_realized() < ps.epsilon / 10.0);
    let table = conjugacy_map(&ps, &b.datum, &b.net, TOL, 200).unwrap();
    assert!(table.complete());
    assert!(table.max_diameter() < TOL);
    assert!(table.max_residual() < 1e-6);
    assert!(table.entries.iter().all(|e| e.rate_slack >= 0.0));
    let disp = check_displacement(&table, &b.datum);
    assert!(disp.below_epsilon && disp.below_fifth);
    assert!(disp.max > 0.0);
    assert!(check_injectivity(&table, &b.system, &b.datum, 1e-7).passed);
    let gap = code_independence(&ps, &b.datum, &b.net[3], TOL, 200).unwrap().unwrap();
    assert!(gap <= 2.0 * TOL);
    let pd = perturbed_datum(&b.datum, &ps, &table, b.datum.delta / 5.0).unwrap();
    assert!(verify_expansion(&ps.perturbed, &pd, &table.image()).passed());
    assert!(pd.delta < 0.8 * b.datum.delta);
}

#[test]
fn displacement_decreases_with_magnitude() {
    let b = schottky();
    let mut last = f64::INFINITY;
    for m in [1e-6, 1e-7, 1e-8] {
        let ps = jitter(b, m);
        let table = conjugacy_map(&ps, &b.datum, &b.net[..20], TOL, 200).unwrap();
        let d = check_displacement(&table, &b.datum).max;
        assert!(d * 2.0 <= last * 1.5, "{m}: {d} after {last}");
        last = d;
    }
}

#[test]
fn inadmissible_jitter_names_generator() {
    let b = schottky();
    let ps = jitter(b, 1e-4);
    match ps.admissible() {
        Err(Error::NotAdmissible { letter, distance, epsilon }) => {
            assert!("abAB".contains(letter.as_str()));
            assert!(distance >= epsilon);
        }
        other => panic!("expected refusal, got {other:?}"),
    }
    assert!(conjugacy_map(&ps, &b.datum, &b.net, TOL, 200).is_err());
}

#[test]
fn bump_run() {
    let b = schottky();
    let bump = Bump::new(1.0, 0.5, 1e-7).unwrap();
    let ps = with(b, perturb(&b.system, &Perturbation::BumpCompose(vec![bump])).unwrap());
    assert!(ps.max_realized() < ps.epsilon / 10.0);
    let table = conjugacy_map(&ps, &b.datum, &b.net, TOL, 200).unwrap();
    assert!(table.complete() && table.max_residual() < 1e-6);
    assert!(table.entries.iter().any(|e| e.x != e.phi));
    assert!(check_injectivity(&table, &b.system, &b.datum, 1e-7).passed);
}

#[test]
fn collapsed_table_is_not_injective() {
    let b = schottky();
    let ps = jitter(b, 0.0);
    let mut table = conjugacy_map(&ps, &b.datum, &b.net[..10], TOL, 200).unwrap();
    table.entries[1].phi = table.entries[0].phi.clone();
    let inj = check_injectivity(&table, &b.system, &b.datum, 1e-7);
    assert!(!inj.passed);
    assert_eq!(inj.worst, Some((0, 1)));
    assert!(inj.witness.is_some());
}

#[test]
fn identity_perturbed_datum() {
    let b = schottky();
    let ps = jitter(b, 0.0);
    let table = conjugacy_map(&ps, &b.datum, &b.net, TOL, 200).unwrap();
    let pd = perturbed_datum(&b.datum, &ps, &table, b.datum.delta / 5.0).unwrap();
    assert_eq!(pd.lambda, b.datum.lambda - ps.epsilon);
    assert_eq!(pd.lipschitz, b.datum.lipschitz + ps.epsilon);
    for (u, v) in b.datum.regions.iter().zip(&pd.regions) {
        for x in &b.net {
            assert!(v.margin(&b.system.space, x) < u.margin(&b.system.space, x));
        }
    }
    assert!(verify_expansion(&ps.perturbed, &pd, &table.image()).passed());
    assert!(matches!(perturbed_datum(&b.datum, &ps, &table, 0.9 * b.datum.delta), Err(Error::Parameter(_))));
}

#[test]
fn modulus_pairs() {
    let b = schottky();
    let ps = jitter(b, 1e-7);
    let full = limit_net(&b.system);
    for k in [5, 10] {
        let m = continuity_modulus(&ps, &b.datum, &full, k, TOL, 16).unwrap();
        assert!(m.passed && m.pairs > 0, "{m:?}");
        assert!(m.spread < m.epsilon_prime);
    }
}
