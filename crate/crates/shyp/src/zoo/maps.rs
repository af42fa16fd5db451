//! Elementary self-maps and their local stretch.

use alloc::boxed::Box;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::geometry::{Point, Space};
use crate::groups::Letter;
use crate::num::{self, Mat2, MatN, PI, TAU};
use crate::{Error, Result};

/// Möbius action of a 2×2 matrix on the circle through the angle-doubling chart
/// `θ = 2·atan(x)`, `x = v₁/v₀`.
pub fn mobius_apply(m: &Mat2, t: f64) -> f64 {
    let v = [num::cos(t / 2.0), num::sin(t / 2.0)];
    let w = m.apply(v);
    num::wrap(2.0 * num::atan2(w[1], w[0]))
}

/// Arc-length derivative `|det M| / |Mv|²` at angle `t`.
pub fn mobius_derivative(m: &Mat2, t: f64) -> f64 {
    let v = [num::cos(t / 2.0), num::sin(t / 2.0)];
    let w = m.apply(v);
    m.det().abs() / (w[0] * w[0] + w[1] * w[1])
}

/// Chart angle of a real number (`∞` maps to π).
pub fn chart(x: f64) -> f64 {
    if x.is_infinite() {
        PI
    } else {
        num::wrap(2.0 * num::atan(x))
    }
}

/// Real coordinate of a chart angle.
pub fn unchart(t: f64) -> f64 {
    let t = num::wrap(t);
    if (t - PI).abs() < 1e-15 {
        f64::INFINITY
    } else {
        num::tan(t / 2.0)
    }
}

/// Angle of the line spanned by `v`.
pub fn vector_angle(v: [f64; 2]) -> f64 {
    num::wrap(2.0 * num::atan2(v[1], v[0]))
}

/// Attracting and repelling fixed angles of a hyperbolic matrix.
pub fn fixed_angles(m: &Mat2) -> Option<(f64, f64)> {
    let m = m.normalized();
    let tr = m.trace();
    let disc = tr * tr - 4.0 * m.det();
    if disc <= 0.0 {
        return None;
    }
    let s = num::sqrt(disc);
    let big = (tr + tr.signum() * s) / 2.0;
    let small = m.det() / big;
    Some((eigen_angle(&m, big), eigen_angle(&m, small)))
}

fn eigen_angle(m: &Mat2, mu: f64) -> f64 {
    let [[a, b], [c, d]] = m.0;
    let v1 = [b, mu - a];
    let v2 = [mu - d, c];
    let n1 = v1[0] * v1[0] + v1[1] * v1[1];
    let n2 = v2[0] * v2[0] + v2[1] * v2[1];
    if n1 >= n2 {
        vector_angle(v1)
    } else {
        vector_angle(v2)
    }
}

/// The open arc where `m` expands arc length: `{|Mv| < 1}` for `|det M| = 1`.
/// Returns `(start, len)`.
pub fn isometric_arc(m: &Mat2) -> Option<(f64, f64)> {
    let m = m.normalized();
    let g = m.transpose().mul(&m);
    let q00 = g.0[0][0] - 1.0;
    let q11 = g.0[1][1] - 1.0;
    let q01 = g.0[0][1];
    let a = (q00 + q11) / 2.0;
    let b = (q00 - q11) / 2.0;
    let c = q01;
    let r = num::sqrt(b * b + c * c);
    if r <= a.abs() {
        return None;
    }
    let t0 = num::atan2(c, b);
    let half = num::acos(a / r);
    let centre = t0 + PI;
    Some((num::wrap(centre - half), 2.0 * half))
}

/// A smooth bump post-composed with a circle map.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bump {
    pub center: f64,
    pub width: f64,
    pub height: f64,
}

fn bump_profile(u: f64) -> f64 {
    if u.abs() >= 1.0 {
        0.0
    } else {
        num::exp(1.0 - 1.0 / (1.0 - u * u))
    }
}

fn bump_slope(u: f64) -> f64 {
    if u.abs() >= 1.0 {
        0.0
    } else {
        let q = 1.0 - u * u;
        bump_profile(u) * (-2.0 * u / (q * q))
    }
}

/// Largest `|ψ'|` of the bump profile.
pub fn bump_max_slope() -> f64 {
    (0..=4000)
        .map(|i| bump_slope(i as f64 / 4000.0).abs())
        .fold(0.0, f64::max)
}

impl Bump {
    pub fn new(center: f64, width: f64, height: f64) -> Result<Self> {
        if !(width > 0.0 && width < PI) {
            return Err(Error::Parameter("bump width must lie in (0, π)".into()));
        }
        if height.abs() / width * bump_max_slope() * 1.001 >= 1.0 {
            return Err(Error::NotInjective("bump too steep".into()));
        }
        Ok(Bump { center, width, height })
    }

    fn lifted(&self, t: f64) -> f64 {
        let u = num::wrap_signed(t - self.center) / self.width;
        t + self.height * bump_profile(u)
    }

    pub fn apply(&self, t: f64) -> f64 {
        num::wrap(self.lifted(t))
    }

    pub fn derivative(&self, t: f64) -> f64 {
        let u = num::wrap_signed(t - self.center) / self.width;
        1.0 + self.height / self.width * bump_slope(u)
    }

    pub fn inverse(&self, y: f64) -> f64 {
        let h = self.height.abs() + 1e-12;
        let (mut lo, mut hi) = (y - h, y + h);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.lifted(mid) < y {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-17 {
                break;
            }
        }
        num::wrap(0.5 * (lo + hi))
    }
}

/// Lift of a circle homeomorphism through the `k`-fold covering `ψ ↦ kψ`,
/// tabulated by monotone continuation from a fixed point.
#[derive(Clone, Debug, PartialEq)]
pub struct Lift {
    pub base: Mat2,
    pub degree: usize,
    anchor: f64,
    table: Vec<f64>,
}

impl Lift {
    pub fn new(base: Mat2, degree: usize, anchor: f64, steps: usize) -> Self {
        let h = TAU / steps as f64;
        let mut table = Vec::with_capacity(steps + 1);
        table.push(anchor);
        let mut prev = mobius_apply(&base, anchor);
        for j in 1..=steps {
            let img = mobius_apply(&base, anchor + j as f64 * h);
            let last = table[j - 1];
            table.push(last + num::wrap_signed(img - prev));
            prev = img;
        }
        Lift { base, degree, anchor, table }
    }

    /// The real-line lift `Γ` of the base map.
    pub fn lift_real(&self, t: f64) -> f64 {
        let steps = self.table.len() - 1;
        let h = TAU / steps as f64;
        let rel = t - self.anchor;
        let turns = num::floor(rel / TAU);
        let r = rel - turns * TAU;
        let j = ((r / h) as usize).min(steps - 1);
        let tj = self.anchor + j as f64 * h;
        let base_j = mobius_apply(&self.base, tj);
        let img = mobius_apply(&self.base, self.anchor + r);
        self.table[j] + num::wrap_signed(img - base_j) + turns * TAU
    }

    pub fn apply(&self, psi: f64) -> f64 {
        let k = self.degree as f64;
        num::wrap(self.lift_real(k * psi) / k)
    }

    pub fn derivative(&self, psi: f64) -> f64 {
        mobius_derivative(&self.base, num::wrap(self.degree as f64 * psi))
    }
}

/// One elementary map.
#[derive(Clone, Debug, PartialEq)]
pub enum Step {
    Mobius(Mat2),
    Lift(Arc<Lift>),
    /// Left multiplication on the free-group boundary, with scaling `a`.
    Shift { letter: Letter, a: f64 },
    /// Projective linear map.
    Linear(MatN),
    Bump(Bump),
    BumpInverse(Bump),
    /// Acts on one component of a disjoint union, identity elsewhere.
    Part { part: usize, step: Box<Step> },
    /// Exchanges components 0 and 1.
    Swap,
}

impl Step {
    pub fn apply(&self, x: &Point) -> Point {
        match (self, x) {
            (Step::Mobius(m), Point::Angle(t)) => Point::Angle(mobius_apply(m, *t)),
            (Step::Lift(l), Point::Angle(t)) => Point::Angle(l.apply(*t)),
            (Step::Bump(b), Point::Angle(t)) => Point::Angle(b.apply(*t)),
            (Step::BumpInverse(b), Point::Angle(t)) => Point::Angle(b.inverse(*t)),
            (Step::Shift { letter, .. }, Point::Word(w)) => {
                let mut out = Vec::with_capacity(w.len() + 1);
                if w.first() == Some(&letter.inv()) {
                    out.extend_from_slice(&w[1..]);
                } else {
                    out.push(*letter);
                    out.extend_from_slice(w);
                }
                Point::Word(out)
            }
            (Step::Linear(m), Point::Line(v)) => Point::line(&m.apply(v)),
            (Step::Part { part, step }, Point::Part(i, p)) => {
                if i == part {
                    Point::Part(*i, Box::new(step.apply(p)))
                } else {
                    x.clone()
                }
            }
            (Step::Swap, Point::Part(i, p)) => Point::Part(1 - (*i).min(1), p.clone()),
            _ => x.clone(),
        }
    }

    /// Local scaling for one-dimensional and boundary kinds.
    fn factor(&self, x: &Point) -> f64 {
        match (self, x) {
            (Step::Mobius(m), Point::Angle(t)) => mobius_derivative(m, *t),
            (Step::Lift(l), Point::Angle(t)) => l.derivative(*t),
            (Step::Bump(b), Point::Angle(t)) => b.derivative(*t),
            (Step::BumpInverse(b), Point::Angle(t)) => 1.0 / b.derivative(b.inverse(*t)),
            (Step::Shift { letter, a }, Point::Word(w)) => {
                if w.first() == Some(&letter.inv()) {
                    *a
                } else {
                    1.0 / a
                }
            }
            (Step::Part { part, step }, Point::Part(i, p)) => {
                if i == part {
                    step.factor(p)
                } else {
                    1.0
                }
            }
            _ => 1.0,
        }
    }
}

/// Minimal and maximal directional stretch of a projective linear map at a line.
pub fn projective_stretch(m: &MatN, u: &[f64]) -> (f64, f64) {
    let n = m.n;
    let au = m.apply(u);
    let r = num::norm(&au);
    let w: Vec<f64> = au.iter().map(|x| x / r).collect();
    // orthonormal basis of u⊥
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for k in 0..n {
        let mut e = alloc::vec![0.0; n];
        e[k] = 1.0;
        let c = num::dot(&e, u);
        for (ei, ui) in e.iter_mut().zip(u) {
            *ei -= c * ui;
        }
        for b in &basis {
            let c = num::dot(&e, b);
            for (ei, bi) in e.iter_mut().zip(b) {
                *ei -= c * bi;
            }
        }
        let nn = num::norm(&e);
        if nn > 1e-8 {
            basis.push(e.iter().map(|x| x / nn).collect());
        }
        if basis.len() == n - 1 {
            break;
        }
    }
    let cols: Vec<Vec<f64>> = basis
        .iter()
        .map(|b| {
            let ab = m.apply(b);
            let c = num::dot(&ab, &w);
            ab.iter().zip(&w).map(|(x, wi)| (x - c * wi) / r).collect()
        })
        .collect();
    let k = cols.len();
    let mut gram = alloc::vec![0.0; k * k];
    for i in 0..k {
        for j in 0..k {
            gram[i * k + j] = num::dot(&cols[i], &cols[j]);
        }
    }
    let ev = num::sym_eigenvalues(k, &gram);
    (num::sqrt(ev[0].max(0.0)), num::sqrt(ev[k - 1].max(0.0)))
}

/// A generator map as a composition of steps, first step applied first.
#[derive(Clone, Debug, PartialEq)]
pub struct GenMap {
    pub steps: Vec<Step>,
}

impl GenMap {
    pub fn single(step: Step) -> Self {
        GenMap { steps: alloc::vec![step] }
    }

    pub fn apply(&self, x: &Point) -> Point {
        let mut y = x.clone();
        for s in &self.steps {
            y = s.apply(&y);
        }
        y
    }

    /// `(inf, sup)` of directional stretch at `x`.
    pub fn stretch(&self, x: &Point) -> (f64, f64) {
        if let Some(m) = self.linear() {
            if let Point::Line(u) = x {
                return projective_stretch(&m, u);
            }
        }
        let mut y = x.clone();
        let mut f = 1.0;
        for s in &self.steps {
            f *= s.factor(&y);
            y = s.apply(&y);
        }
        (f, f)
    }

    /// Combined matrix when every step is projective linear.
    pub fn linear(&self) -> Option<MatN> {
        let mut acc: Option<MatN> = None;
        for s in &self.steps {
            let Step::Linear(m) = s else { return None };
            acc = Some(match acc {
                None => m.clone(),
                Some(a) => m.mul(&a),
            });
        }
        acc
    }

    /// Check the map is defined on points of `space`.
    pub fn compatible(&self, space: &Space) -> bool {
        self.steps.iter().all(|s| match (s, space) {
            (Step::Mobius(_) | Step::Bump(_) | Step::BumpInverse(_), Space::Circle) => true,
            (Step::Lift(_) | Step::Bump(_) | Step::BumpInverse(_), Space::CoveredCircle { .. }) => true,
            (Step::Shift { .. }, Space::FreeBoundary { .. }) => true,
            (Step::Linear(m), Space::Projective { n }) => m.n == n + 1,
            (Step::Part { .. } | Step::Swap, Space::DisjointUnion { .. }) => true,
            _ => false,
        })
    }
}
