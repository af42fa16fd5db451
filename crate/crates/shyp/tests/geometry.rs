use proptest::prelude::*;
use shyp::geometry::{hausdorff_distance, set_diameter, Point, Region, Shape, Space};
use shyp::groups::Letter;
use shyp::Error;
use std::f64::consts::PI;

fn letters(s: &str) -> Vec<Letter> {
    s.chars().map(|c| Letter::from_char(c).unwrap()).collect()
}

// chord-length oracle for arc length
fn chord_arc(a: f64, b: f64) -> f64 {
    let (dx, dy) = (a.cos() - b.cos(), a.sin() - b.sin());
    2.0 * ((dx * dx + dy * dy).sqrt() / 2.0).min(1.0).asin()
}

#[test]
fn circle_distance_examples() {
    let s = Space::Circle;
    assert!((s.dist(&Point::angle(0.0), &Point::angle(PI)) - PI).abs() < 1e-15);
    assert!((s.dist(&Point::angle(0.1), &Point::angle(2.0 * PI - 0.1)) - 0.2).abs() < 1e-12);
    assert_eq!(s.dist(&Point::angle(1.0), &Point::angle(1.0)), 0.0);
}

#[test]
fn free_boundary_distance_examples() {
    let s = Space::FreeBoundary { rank: 2, a: 2.0 };
    let x = Point::word(&letters("abab"));
    let y = Point::word(&letters("abbb"));
    assert_eq!(s.dist(&x, &y), 0.25);
    let z = Point::word(&letters("bab"));
    assert_eq!(s.dist(&x, &z), 1.0);
    assert_eq!(s.dist(&x, &x), 0.0);
}

#[test]
fn projective_distance_example() {
    let s = Space::Projective { n: 2 };
    let d = s.dist(&Point::line(&[1.0, 0.0, 0.0]), &Point::line(&[1.0, 1.0, 0.0]));
    assert!((d - PI / 4.0).abs() < 1e-15);
    let d = s.dist(&Point::line(&[1.0, 0.0, 0.0]), &Point::line(&[-1.0, 0.0, 0.0]));
    assert!(d.abs() < 1e-15);
    let d = s.dist(&Point::line(&[1.0, 0.0, 0.0]), &Point::line(&[0.0, 0.0, 1.0]));
    assert!((d - PI / 2.0).abs() < 1e-15);
}

#[test]
fn mismatched_points_are_rejected() {
    let s = Space::Circle;
    assert_eq!(s.distance(&Point::angle(0.0), &Point::line(&[1.0, 0.0])), Err(Error::SpaceMismatch));
    let p = Space::Projective { n: 2 };
    assert!(p.distance(&Point::line(&[1.0, 0.0]), &Point::line(&[1.0, 0.0, 0.0])).is_err());
}

#[test]
fn disjoint_union_gap() {
    let s = Space::union(vec![Space::Circle, Space::Circle]);
    let x = Point::part(0, Point::angle(0.0));
    let y = Point::part(1, Point::angle(0.0));
    assert!((s.dist(&x, &y) - (PI + 1.0)).abs() < 1e-15);
    let z = Point::part(0, Point::angle(0.5));
    assert!((s.dist(&x, &z) - 0.5).abs() < 1e-15);
}

#[test]
fn arc_region_margin_and_shrink() {
    let s = Space::Circle;
    let u = Region::new(0, Shape::Arc { start: 0.0, len: 1.0 });
    let x = Point::angle(0.5);
    assert!((u.margin(&s, &x) - 0.5).abs() < 1e-15);
    assert!(u.ball_contained(&s, &x, 0.4));
    assert!(!u.ball_contained(&s, &x, 0.6));
    let v = u.shrink(0.2);
    assert!(v.contains(&s, &Point::angle(0.21)));
    assert!(v.contains(&s, &Point::angle(0.79)));
    assert!(!v.contains(&s, &Point::angle(0.19)));
    assert!(!v.contains(&s, &Point::angle(0.81)));
    assert!(!u.contains(&s, &Point::angle(3.0)));
}

#[test]
fn hausdorff_example() {
    let s = Space::Circle;
    let a = [Point::angle(0.0), Point::angle(PI)];
    let b = [Point::angle(0.1), Point::angle(PI)];
    assert!((hausdorff_distance(&s, &a, &b).unwrap() - 0.1).abs() < 1e-12);
    assert_eq!(hausdorff_distance(&s, &a, &[]), Err(Error::EmptySet));
}

#[test]
fn diameter_of_quarter_points() {
    let s = Space::Circle;
    let v: Vec<Point> = (0..4).map(|i| Point::angle(i as f64 * PI / 2.0)).collect();
    assert!((set_diameter(&s, &v) - PI).abs() < 1e-12);
}

fn word_strategy() -> impl Strategy<Value = Vec<Letter>> {
    (0u16..4, prop::collection::vec(0u16..3, 7)).prop_map(|(first, steps)| {
        let mut w = vec![Letter(first)];
        for k in steps {
            let back = w.last().unwrap().inv().0;
            let next = (0..4).filter(|l| *l != back).nth(k as usize).unwrap();
            w.push(Letter(next));
        }
        w
    })
}

fn unit3() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, 3).prop_filter("nonzero", |v| v.iter().map(|x| x * x).sum::<f64>() > 1e-3)
}

proptest! {
    #[test]
    fn circle_matches_chord_oracle(a in -10.0f64..10.0, b in -10.0f64..10.0) {
        let d = Space::Circle.dist(&Point::angle(a), &Point::angle(b));
        prop_assert!((d - chord_arc(a, b)).abs() < 1e-7);
        prop_assert!((0.0..=PI).contains(&d));
    }

    #[test]
    fn circle_triangle(a in 0.0f64..7.0, b in 0.0f64..7.0, c in 0.0f64..7.0) {
        let s = Space::Circle;
        let (x, y, z) = (Point::angle(a), Point::angle(b), Point::angle(c));
        prop_assert!(s.dist(&x, &z) <= s.dist(&x, &y) + s.dist(&y, &z) + 1e-12);
        prop_assert_eq!(s.dist(&x, &y), s.dist(&y, &x));
    }

    #[test]
    fn projective_triangle(u in unit3(), v in unit3(), w in unit3()) {
        let s = Space::Projective { n: 2 };
        let (x, y, z) = (Point::line(&u), Point::line(&v), Point::line(&w));
        prop_assert!(s.dist(&x, &z) <= s.dist(&x, &y) + s.dist(&y, &z) + 1e-12);
        prop_assert!(s.dist(&x, &y) <= PI / 2.0 + 1e-15);
    }

    #[test]
    fn projective_scale_invariant(u in unit3(), k in 0.1f64..10.0, neg in any::<bool>()) {
        let s = Space::Projective { n: 2 };
        let f = if neg { -k } else { k };
        let v: Vec<f64> = u.iter().map(|x| x * f).collect();
        prop_assert!(s.dist(&Point::line(&u), &Point::line(&v)) < 1e-7);
    }

    #[test]
    fn free_boundary_ultrametric(u in word_strategy(), v in word_strategy(), w in word_strategy()) {
        let s = Space::FreeBoundary { rank: 2, a: 2.0 };
        let (x, y, z) = (Point::word(&u), Point::word(&v), Point::word(&w));
        prop_assert!(s.dist(&x, &z) <= s.dist(&x, &y).max(s.dist(&y, &z)));
    }

    #[test]
    fn arc_margin_is_one_lipschitz(start in 0.0f64..6.0, len in 0.1f64..6.0, a in 0.0f64..7.0, b in 0.0f64..7.0) {
        let s = Space::Circle;
        let u = Region::new(0, Shape::Arc { start, len });
        let (x, y) = (Point::angle(a), Point::angle(b));
        prop_assert!((u.margin(&s, &x) - u.margin(&s, &y)).abs() <= s.dist(&x, &y) + 1e-12);
    }

    #[test]
    fn shrink_adds(start in 0.0f64..6.0, len in 0.5f64..6.0, r in 0.0f64..0.2, q in 0.0f64..0.2, a in 0.0f64..7.0) {
        let s = Space::Circle;
        let u = Region::new(0, Shape::Arc { start, len });
        let x = Point::angle(a);
        let m = u.shrink(r).shrink(q).margin(&s, &x);
        prop_assert!((m - u.shrink(r + q).margin(&s, &x)).abs() < 1e-12);
        prop_assert_eq!(u.shrink(r).contains(&s, &x), u.ball_contained(&s, &x, r) && u.margin(&s, &x) > r);
    }

    #[test]
    fn circle_midpoint_halves(a in 0.0f64..7.0, b in 0.0f64..7.0) {
        let s = Space::Circle;
        let (x, y) = (Point::angle(a), Point::angle(b));
        let m = s.midpoint(&x, &y).unwrap();
        let d = s.dist(&x, &y);
        prop_assert!((s.dist(&x, &m) - d / 2.0).abs() < 1e-9);
        prop_assert!((s.dist(&y, &m) - d / 2.0).abs() < 1e-9);
    }

    #[test]
    fn hausdorff_symmetric_and_bounded(a in prop::collection::vec(0.0f64..7.0, 1..6), b in prop::collection::vec(0.0f64..7.0, 1..6)) {
        let s = Space::Circle;
        let pa: Vec<Point> = a.iter().map(|t| Point::angle(*t)).collect();
        let pb: Vec<Point> = b.iter().map(|t| Point::angle(*t)).collect();
        let h = hausdorff_distance(&s, &pa, &pb).unwrap();
        prop_assert_eq!(h, hausdorff_distance(&s, &pb, &pa).unwrap());
        prop_assert!(h <= PI);
        prop_assert_eq!(hausdorff_distance(&s, &pa, &pa).unwrap(), 0.0);
    }
}
