//! Metric spaces, points, regions carried as margin functions, and Hausdorff distances.

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use crate::groups::Letter;
use crate::num::{self, PI, TAU};
use crate::{Error, Result};

/// The concrete metric spaces of the crate.
#[derive(Clone, Debug, PartialEq)]
pub enum Space {
    /// Arc length on the circle of circumference 2π.
    Circle,
    /// Angle between lines in ℝⁿ⁺¹.
    Projective { n: usize },
    /// Ends of the free group of rank `rank` with `d = a^(-common prefix)`.
    FreeBoundary { rank: usize, a: f64 },
    /// The circle covering the base circle `degree` times, with its own arc length.
    CoveredCircle { degree: usize },
    /// Components at mutual distance `gap`.
    DisjointUnion { parts: Vec<Space>, gap: f64 },
}

/// Canonically normalized point coordinates.
#[derive(Clone, Debug, PartialEq)]
pub enum Point {
    Angle(f64),
    Line(Vec<f64>),
    Word(Vec<Letter>),
    Part(usize, Box<Point>),
}

impl Point {
    pub fn angle(t: f64) -> Point {
        Point::Angle(num::wrap(t))
    }

    /// Unit representative with first nonzero coordinate positive.
    pub fn line(v: &[f64]) -> Point {
        let n = num::norm(v);
        let mut u: Vec<f64> = v.iter().map(|x| x / n).collect();
        if let Some(first) = u.iter().find(|x| x.abs() > 1e-300) {
            if *first < 0.0 {
                for x in u.iter_mut() {
                    *x = -*x;
                }
            }
        }
        Point::Line(u)
    }

    pub fn word(letters: &[Letter]) -> Point {
        Point::Word(crate::groups::free_reduce(letters))
    }

    pub fn part(i: usize, p: Point) -> Point {
        Point::Part(i, Box::new(p))
    }

    pub fn as_angle(&self) -> Option<f64> {
        match self {
            Point::Angle(t) => Some(*t),
            _ => None,
        }
    }

    pub fn label(&self) -> String {
        let mut s = String::new();
        match self {
            Point::Angle(t) => {
                let _ = write!(s, "{t:.12}");
            }
            Point::Line(v) => {
                s.push('[');
                for (i, x) in v.iter().enumerate() {
                    if i > 0 {
                        s.push(',');
                    }
                    let _ = write!(s, "{x:.12}");
                }
                s.push(']');
            }
            Point::Word(w) => s.extend(w.iter().map(|l| l.to_char())),
            Point::Part(i, p) => {
                let _ = write!(s, "{i}:{}", p.label());
            }
        }
        s
    }
}

fn arc_distance(x: f64, y: f64) -> f64 {
    let u = num::modulo((x - y).abs(), TAU);
    u.min(TAU - u)
}

fn common_prefix(a: &[Letter], b: &[Letter]) -> usize {
    a.iter().zip(b).take_while(|(x, y)| x == y).count()
}

impl Space {
    /// Disjoint union with the default gap of largest diameter plus one.
    pub fn union(parts: Vec<Space>) -> Space {
        let gap = parts.iter().map(|p| p.diameter()).fold(0.0, f64::max) + 1.0;
        Space::DisjointUnion { parts, gap }
    }

    pub fn diameter(&self) -> f64 {
        match self {
            Space::Circle | Space::CoveredCircle { .. } => PI,
            Space::Projective { .. } => PI / 2.0,
            Space::FreeBoundary { .. } => 1.0,
            Space::DisjointUnion { parts, gap } => {
                if parts.len() > 1 {
                    *gap
                } else {
                    parts.iter().map(|p| p.diameter()).fold(0.0, f64::max)
                }
            }
        }
    }

    /// True when balls are metric balls of a geodesic space.
    pub fn is_geodesic(&self) -> bool {
        matches!(self, Space::Circle | Space::CoveredCircle { .. } | Space::Projective { .. })
    }

    /// Check that a point carries this space's coordinates.
    pub fn check(&self, x: &Point) -> Result<()> {
        let ok = match (self, x) {
            (Space::Circle | Space::CoveredCircle { .. }, Point::Angle(_)) => true,
            (Space::Projective { n }, Point::Line(v)) => v.len() == n + 1,
            (Space::FreeBoundary { rank, .. }, Point::Word(w)) => w.iter().all(|l| l.generator() < *rank),
            (Space::DisjointUnion { parts, .. }, Point::Part(i, p)) => {
                *i < parts.len() && parts[*i].check(p).is_ok()
            }
            _ => false,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::SpaceMismatch)
        }
    }

    pub fn distance(&self, x: &Point, y: &Point) -> Result<f64> {
        Ok(match (self, x, y) {
            (Space::Circle | Space::CoveredCircle { .. }, Point::Angle(a), Point::Angle(b)) => arc_distance(*a, *b),
            (Space::Projective { n }, Point::Line(u), Point::Line(v)) => {
                if u.len() != n + 1 || v.len() != n + 1 {
                    return Err(Error::SpaceMismatch);
                }
                line_angle(u, v)
            }
            (Space::FreeBoundary { a, .. }, Point::Word(u), Point::Word(v)) => {
                let k = common_prefix(u, v);
                if k == u.len().min(v.len()) {
                    0.0
                } else {
                    num::powi(*a, -(k as i32))
                }
            }
            (Space::DisjointUnion { parts, gap }, Point::Part(i, p), Point::Part(j, q)) => {
                if *i >= parts.len() || *j >= parts.len() {
                    return Err(Error::SpaceMismatch);
                }
                if i == j {
                    parts[*i].distance(p, q)?
                } else {
                    *gap
                }
            }
            _ => return Err(Error::SpaceMismatch),
        })
    }

    /// Distance with mismatched inputs mapped to `+∞`.
    pub fn dist(&self, x: &Point, y: &Point) -> f64 {
        self.distance(x, y).unwrap_or(f64::INFINITY)
    }

    /// A point halfway along a geodesic, for geodesic kinds.
    pub fn midpoint(&self, x: &Point, y: &Point) -> Option<Point> {
        match (self, x, y) {
            (Space::Circle | Space::CoveredCircle { .. }, Point::Angle(a), Point::Angle(b)) => {
                let d = num::wrap_signed(b - a);
                Some(Point::angle(a + d / 2.0))
            }
            (Space::Projective { .. }, Point::Line(u), Point::Line(v)) => {
                let s = if num::dot(u, v) < 0.0 { -1.0 } else { 1.0 };
                let m: Vec<f64> = u.iter().zip(v).map(|(p, q)| p + s * q).collect();
                if num::norm(&m) < 1e-300 {
                    return None;
                }
                Some(Point::line(&m))
            }
            _ => None,
        }
    }

    /// Move `x` by `t` along direction `dir`; used to sample neighborhoods.
    pub fn offset(&self, x: &Point, t: f64, dir: &[f64]) -> Point {
        match (self, x) {
            (Space::Circle | Space::CoveredCircle { .. }, Point::Angle(a)) => Point::angle(a + t),
            (Space::Projective { .. }, Point::Line(u)) => {
                let mut w: Vec<f64> = dir.iter().take(u.len()).copied().collect();
                w.resize(u.len(), 0.0);
                let c = num::dot(&w, u);
                for (wi, ui) in w.iter_mut().zip(u) {
                    *wi -= c * ui;
                }
                let n = num::norm(&w);
                if n < 1e-12 {
                    return x.clone();
                }
                let v: Vec<f64> = u
                    .iter()
                    .zip(&w)
                    .map(|(ui, wi)| num::cos(t.abs()) * ui + num::sin(t.abs()) * wi / n)
                    .collect();
                Point::line(&v)
            }
            (Space::DisjointUnion { parts, .. }, Point::Part(i, p)) => Point::part(*i, parts[*i].offset(p, t, dir)),
            _ => x.clone(),
        }
    }
}

/// Angle between the lines spanned by unit vectors.
pub fn line_angle(u: &[f64], v: &[f64]) -> f64 {
    let c = num::dot(u, v).abs();
    if c > 0.9 {
        // small angles: use the norm of the rejection for accuracy
        let s = if num::dot(u, v) < 0.0 { -1.0 } else { 1.0 };
        let diff: f64 = u.iter().zip(v).map(|(p, q)| (p - s * q) * (p - s * q)).sum();
        2.0 * libm::asin((num::sqrt(diff) / 2.0).min(1.0))
    } else {
        num::acos(c)
    }
}

/// Shapes whose margin functions are computed exactly or conservatively.
#[derive(Clone, Debug, PartialEq)]
pub enum Shape {
    Empty,
    Whole,
    /// Open arc `(start, start + len)` on a circle.
    Arc { start: f64, len: f64 },
    /// Boundary points with the given prefix; the closed ball of radius `a^(-depth)`.
    Cylinder { prefix: Vec<Letter>, a: f64 },
    Ball { center: Point, radius: f64 },
    /// Open neighborhood of a finite set.
    Near { points: Vec<Point>, radius: f64 },
    /// A shape inside one component of a disjoint union.
    Within { part: usize, inner: Box<Shape> },
    Meet(Vec<Shape>),
}

impl Shape {
    fn margin(&self, space: &Space, x: &Point) -> f64 {
        match self {
            Shape::Empty => f64::NEG_INFINITY,
            Shape::Whole => f64::INFINITY,
            Shape::Arc { start, len } => {
                let Point::Angle(t) = x else { return f64::NEG_INFINITY };
                if *len >= TAU {
                    return f64::INFINITY;
                }
                if *len <= 0.0 {
                    return f64::NEG_INFINITY;
                }
                let u = num::modulo(t - start, TAU);
                if u < *len {
                    u.min(len - u)
                } else {
                    -(u - len).min(TAU - u)
                }
            }
            Shape::Cylinder { prefix, a } => {
                let Point::Word(w) = x else { return f64::NEG_INFINITY };
                if w.len() >= prefix.len() && w[..prefix.len()] == prefix[..] {
                    num::powi(*a, -(prefix.len() as i32))
                } else {
                    0.0
                }
            }
            Shape::Ball { center, radius } => radius - space.dist(center, x),
            Shape::Near { points, radius } => {
                radius - points.iter().map(|p| space.dist(p, x)).fold(f64::INFINITY, f64::min)
            }
            Shape::Within { part, inner } => {
                let (Space::DisjointUnion { parts, gap }, Point::Part(i, p)) = (space, x) else {
                    return f64::NEG_INFINITY;
                };
                if i == part {
                    inner.margin(&parts[*i], p).min(*gap)
                } else {
                    0.0
                }
            }
            Shape::Meet(v) => v.iter().map(|s| s.margin(space, x)).fold(f64::INFINITY, f64::min),
        }
    }
}

/// A cover member carried by its margin function `margin(x) - shift`.
#[derive(Clone, Debug, PartialEq)]
pub struct Region {
    pub label: usize,
    pub shape: Shape,
    pub shift: f64,
}

impl Region {
    pub fn new(label: usize, shape: Shape) -> Self {
        Region { label, shape, shift: 0.0 }
    }

    pub fn margin(&self, space: &Space, x: &Point) -> f64 {
        self.shape.margin(space, x) - self.shift
    }

    pub fn contains(&self, space: &Space, x: &Point) -> bool {
        self.margin(space, x) > 0.0
    }

    /// `B_r(x) ⊂ U`.
    pub fn ball_contained(&self, space: &Space, x: &Point, r: f64) -> bool {
        self.margin(space, x) >= r
    }

    /// `U^r = {x : B_r(x) ⊂ U}`.
    pub fn shrink(&self, r: f64) -> Region {
        Region { label: self.label, shape: self.shape.clone(), shift: self.shift + r }
    }

    pub fn is_empty_shape(&self) -> bool {
        matches!(self.shape, Shape::Empty)
    }
}

/// Hausdorff distance of two finite point sets.
pub fn hausdorff_distance(space: &Space, a: &[Point], b: &[Point]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySet);
    }
    for p in a.iter().chain(b) {
        space.check(p)?;
    }
    let directed = |p: &[Point], q: &[Point]| {
        p.iter()
            .map(|x| q.iter().map(|y| space.dist(x, y)).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    Ok(directed(a, b).max(directed(b, a)))
}

/// Minimum distance from `x` to a finite set.
pub fn distance_to_set(space: &Space, x: &Point, set: &[Point]) -> f64 {
    set.iter().map(|y| space.dist(x, y)).fold(f64::INFINITY, f64::min)
}

/// Diameter of a finite set.
pub fn set_diameter(space: &Space, set: &[Point]) -> f64 {
    let mut d: f64 = 0.0;
    for i in 0..set.len() {
        for j in i + 1..set.len() {
            d = d.max(space.dist(&set[i], &set[j]));
        }
    }
    d
}
