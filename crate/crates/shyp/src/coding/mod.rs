//! Codes and rays of Λ-points, nested neighborhoods, expansivity and quasigeodesics.

use alloc::string::String;
use alloc::vec::Vec;

use crate::expansion::ExpansionDatum;
use crate::geometry::{self, Point, Space};
use crate::groups::{Alphabet, Distance, Letter, Word};
use crate::num;
use crate::zoo::ActionSystem;
use crate::{tol, Error, Result};

mod hyperbolicity;

pub use hyperbolicity::{
    coding_agreement, coding_map, fellow_travel_distance, n_equivalence, recurrence_witness, related,
    shyp_certificate, Certificate, PointCertificate, Recurrence,
};

/// How the first index of a code is chosen.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Policy {
    /// `B_η(x) ⊂ U_{α(0)}`, chosen greedily.
    Special,
    /// A prescribed `α(0)`, with no condition at `x`.
    Initial(usize),
}

/// A code `(α, p)`: `p₀ = x`, `p_{i+1} = ρ(s_{α(i)}⁻¹) p_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct Code {
    pub alpha: Vec<usize>,
    /// `depth + 1` points.
    pub points: Vec<Point>,
    pub special: bool,
}

impl Code {
    pub fn depth(&self) -> usize {
        self.alpha.len()
    }
}

fn check_eta(datum: &ExpansionDatum, eta: f64) -> Result<()> {
    if !(eta > 0.0 && eta <= datum.delta) {
        return Err(Error::Parameter(alloc::format!("eta must lie in (0, {}], got {eta}", datum.delta)));
    }
    Ok(())
}

/// Regions admissible at `p` (`B_η(p) ⊂ U_α`), best margin first, ties by index.
fn admissible(space: &Space, datum: &ExpansionDatum, p: &Point, eta: f64, reversed: bool) -> Vec<(usize, f64)> {
    let mut v: Vec<(usize, f64)> = datum
        .regions
        .iter()
        .enumerate()
        .map(|(i, r)| (i, r.margin(space, p)))
        .filter(|(_, m)| *m >= eta)
        .collect();
    v.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .unwrap_or(core::cmp::Ordering::Equal)
            .then(if reversed { b.0.cmp(&a.0) } else { a.0.cmp(&b.0) })
    });
    v
}

fn step(system: &ActionSystem, datum: &ExpansionDatum, alpha: usize, p: &Point) -> Point {
    let q = datum.inverse_map(system, alpha).apply(p);
    system.limit.snap(&system.space, &q)
}

/// Greedy code: maximal margin at each step, ties to the smallest index.
pub fn make_code(
    system: &ActionSystem,
    datum: &ExpansionDatum,
    eta: f64,
    x: &Point,
    policy: Policy,
    depth: usize,
) -> Result<Code> {
    greedy(system, datum, eta, x, policy, depth, false)
}

/// As [`make_code`] with ties broken towards the largest index.
pub fn make_code_reversed(
    system: &ActionSystem,
    datum: &ExpansionDatum,
    eta: f64,
    x: &Point,
    policy: Policy,
    depth: usize,
) -> Result<Code> {
    greedy(system, datum, eta, x, policy, depth, true)
}

fn greedy(
    system: &ActionSystem,
    datum: &ExpansionDatum,
    eta: f64,
    x: &Point,
    policy: Policy,
    depth: usize,
    reversed: bool,
) -> Result<Code> {
    check_eta(datum, eta)?;
    system.space.check(x)?;
    let space = &system.space;
    let mut alpha = Vec::with_capacity(depth);
    let mut points = Vec::with_capacity(depth + 1);
    points.push(system.limit.snap(space, x));
    for i in 0..depth {
        let p = &points[i];
        let a = match (i, policy) {
            (0, Policy::Initial(a)) => {
                if a >= datum.len() {
                    return Err(Error::Parameter(alloc::format!("no region {a}")));
                }
                a
            }
            _ => match admissible(space, datum, p, eta, reversed).first() {
                Some((a, _)) => *a,
                None => return Err(Error::NoAdmissible { step: i, witness: p.label() }),
            },
        };
        let q = step(system, datum, a, p);
        alpha.push(a);
        points.push(q);
    }
    Ok(Code { alpha, points, special: policy == Policy::Special })
}

/// Every `(D, η)` code to the given depth, all first indices allowed.
#[derive(Clone, Debug, PartialEq)]
pub struct CodeSet {
    pub codes: Vec<Code>,
    pub truncated: bool,
}

/// Breadth-first enumeration of codes, keeping at most `cap` branches per level.
pub fn enumerate_codes(
    system: &ActionSystem,
    datum: &ExpansionDatum,
    eta: f64,
    x: &Point,
    depth: usize,
    cap: usize,
) -> Result<CodeSet> {
    check_eta(datum, eta)?;
    system.space.check(x)?;
    let cap = cap.max(1);
    let space = &system.space;
    let x0 = system.limit.snap(space, x);
    let mut special_ok: Vec<bool> = Vec::new();
    let mut frontier: Vec<Code> = Vec::new();
    for a in 0..datum.len() {
        frontier.push(Code { alpha: Vec::new(), points: alloc::vec![x0.clone()], special: false });
        special_ok.push(datum.regions[a].ball_contained(space, &x0, eta));
    }
    let mut truncated = false;
    if depth == 0 {
        frontier.truncate(1);
        return Ok(CodeSet { codes: frontier, truncated: datum.len() > 1 });
    }
    let mut next = Vec::new();
    for (a, mut c) in frontier.into_iter().enumerate() {
        let q = step(system, datum, a, &c.points[0]);
        c.alpha.push(a);
        c.points.push(q);
        c.special = special_ok[a];
        next.push(c);
    }
    if next.len() > cap {
        next.truncate(cap);
        truncated = true;
    }
    let mut frontier = next;
    for _ in 1..depth {
        let mut next = Vec::new();
        for c in &frontier {
            let p = c.points.last().expect("codes hold a point");
            for (a, _) in admissible(space, datum, p, eta, false) {
                let mut d = c.clone();
                d.points.push(step(system, datum, a, p));
                d.alpha.push(a);
                next.push(d);
            }
        }
        if next.len() > cap {
            next.truncate(cap);
            truncated = true;
        }
        frontier = next;
    }
    Ok(CodeSet { codes: frontier, truncated })
}

/// Check a code against the datum: orbit relation and ball conditions.
pub fn validate_code(system: &ActionSystem, datum: &ExpansionDatum, eta: f64, code: &Code) -> bool {
    let space = &system.space;
    for (i, &a) in code.alpha.iter().enumerate() {
        let p = &code.points[i];
        if (i > 0 || code.special) && !datum.regions[a].ball_contained(space, p, eta) {
            return false;
        }
        let q = datum.inverse_map(system, a).apply(p);
        if space.dist(&q, &code.points[i + 1]) > tol::SNAP {
            return false;
        }
    }
    true
}

/// `c_i = s_{α(0)} ⋯ s_{α(i)}` in canonical form.
pub fn ray(alphabet: &Alphabet, datum: &ExpansionDatum, code: &Code) -> Result<Vec<Word>> {
    let mut out = Vec::with_capacity(code.depth());
    let mut w = alphabet.identity();
    for &a in &code.alpha {
        w = alphabet.push(&w, datum.letters[a])?;
        out.push(w.clone());
    }
    Ok(out)
}

/// Letters `s_{α(0)}, …, s_{α(i)}` without reduction.
pub fn ray_letters(datum: &ExpansionDatum, code: &Code, i: usize) -> Vec<Letter> {
    code.alpha[..=i].iter().map(|a| datum.letters[*a]).collect()
}

/// A finite sample of the closed ball `B̄_r(center)`.
pub fn ball_net(space: &Space, center: &Point, r: f64, count: usize) -> Vec<Point> {
    let count = count.max(2);
    match (space, center) {
        (Space::Circle | Space::CoveredCircle { .. }, Point::Angle(t)) => (0..count)
            .map(|k| Point::angle(t + r * (2.0 * k as f64 / (count - 1) as f64 - 1.0)))
            .collect(),
        (Space::Projective { n }, Point::Line(_)) => {
            let mut out = alloc::vec![center.clone()];
            for k in 0..count - 1 {
                let mut dir = alloc::vec![0.0; n + 1];
                let th = num::TAU * k as f64 / (count - 1) as f64;
                for (j, d) in dir.iter_mut().enumerate() {
                    *d = num::cos(th * (j + 1) as f64 + j as f64);
                }
                let rad = if k % 2 == 0 { r } else { r / 2.0 };
                out.push(space.offset(center, rad, &dir));
            }
            out
        }
        (Space::FreeBoundary { rank, a }, Point::Word(w)) => {
            let mut m = 0usize;
            while m < w.len() && num::powi(*a, -(m as i32)) >= r {
                m += 1;
            }
            let stem = &w[..m.min(w.len())];
            let mut out = alloc::vec![center.clone()];
            for tail in crate::zoo::limit::reduced_words(*rank, 3) {
                if out.len() >= count {
                    break;
                }
                if let (Some(l), Some(f)) = (stem.last(), tail.first()) {
                    if *f == l.inv() {
                        continue;
                    }
                }
                let mut v = stem.to_vec();
                v.extend_from_slice(&tail);
                let last = *v.last().expect("nonempty");
                while v.len() < w.len().max(m + 3) {
                    v.push(last);
                }
                out.push(Point::Word(v));
            }
            out
        }
        (Space::DisjointUnion { parts, .. }, Point::Part(i, p)) if *i < parts.len() => {
            ball_net(&parts[*i], p, r, count).into_iter().map(|q| Point::part(*i, q)).collect()
        }
        _ => alloc::vec![center.clone()],
    }
}

/// One level of the nested images `ρ(c_i)[B_η(p_{i+1})]`.
#[derive(Clone, Debug, PartialEq)]
pub struct NestedStep {
    pub index: usize,
    pub diameter: f64,
    /// `2Lη/λ^i`.
    pub bound: f64,
    /// `η − max d(ρ(s_{α(i)})z, p_i)` over the net of `B_η(p_{i+1})`; `+∞` at level 0.
    pub nest_slack: f64,
    /// `d(ρ(c_i)p_{i+1}, x)`.
    pub center_error: f64,
}

impl NestedStep {
    pub fn shrinks(&self) -> bool {
        self.diameter <= self.bound
    }

    pub fn nested(&self) -> bool {
        self.nest_slack >= -tol::TOL
    }
}

/// Push ball nets through the code and measure containment and diameter at every level.
pub fn nested_images(system: &ActionSystem, datum: &ExpansionDatum, code: &Code, eta: f64) -> Vec<NestedStep> {
    let space = &system.space;
    let x = &code.points[0];
    let mut out = Vec::with_capacity(code.depth());
    for i in 0..code.depth() {
        let centre = &code.points[i + 1];
        let ball = ball_net(space, centre, eta, tol::BALL_NET);
        let letters = ray_letters(datum, code, i);
        let image: Vec<Point> = ball.iter().map(|z| system.apply_letters(&letters, z)).collect();
        let nest_slack = if i == 0 {
            f64::INFINITY
        } else {
            let g = &system.maps[datum.letters[code.alpha[i]].index()];
            let p = &code.points[i];
            ball.iter().map(|z| eta - space.dist(&g.apply(z), p)).fold(f64::INFINITY, f64::min)
        };
        let center_error = space.dist(&system.apply_letters(&letters, centre), x);
        out.push(NestedStep {
            index: i,
            diameter: geometry::set_diameter(space, &image),
            bound: 2.0 * datum.lipschitz * eta / num::powi(datum.lambda, i as i32),
            nest_slack,
            center_error,
        });
    }
    out
}

/// `n` with `d(ρ(c_{n-1})⁻¹x, ρ(c_{n-1})⁻¹y) ≥ δ(1 − 1e-6)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Witness {
    pub n: usize,
    pub separation: f64,
}

/// Follow a greedy code of `x` and apply the same inverse letters to `y` until they separate.
pub fn expansivity_witness(system: &ActionSystem, datum: &ExpansionDatum, x: &Point, y: &Point) -> Result<Witness> {
    let space = &system.space;
    let target = datum.delta * (1.0 - tol::EXPANSIVITY_SLACK);
    let mut p = system.limit.snap(space, x);
    let mut q = y.clone();
    for n in 0..=tol::MAX_DEPTH {
        let d = space.distance(&p, &q)?;
        if d >= target {
            return Ok(Witness { n, separation: d });
        }
        if d == 0.0 {
            break;
        }
        let Some((a, _)) = admissible(space, datum, &p, datum.delta, false).first().copied() else {
            return Err(Error::NoAdmissible { step: n, witness: p.label() });
        };
        let f = datum.inverse_map(system, a);
        p = system.limit.snap(space, &f.apply(&p));
        q = f.apply(&q);
    }
    Err(Error::NotFound(tol::MAX_DEPTH))
}

/// Outcome of the quasigeodesic sandwich on a ray.
#[derive(Clone, Debug, PartialEq)]
pub struct QuasiGeodesic {
    /// `log λ / log L`.
    pub slope: f64,
    pub pairs: usize,
    /// Pairs whose distance exceeded the search cap.
    pub unknown: usize,
    /// Smallest of `d − slope(i−j)` and `(i−j) − d`.
    pub worst_slack: f64,
    pub witness: Option<(usize, usize, usize)>,
}

impl QuasiGeodesic {
    pub fn passed(&self) -> bool {
        self.worst_slack >= -tol::TRIANGLE_SLACK
    }
}

/// Check `slope·(i−j) ≤ d_Σ(c_i, c_j) ≤ i−j` on all pairs of the ray.
pub fn quasigeodesic_check(
    alphabet: &Alphabet,
    datum: &ExpansionDatum,
    ray: &[Word],
    cap: usize,
) -> Result<QuasiGeodesic> {
    let slope = num::ln(datum.lambda) / num::ln(datum.lipschitz);
    let mut out = QuasiGeodesic { slope, pairs: 0, unknown: 0, worst_slack: f64::INFINITY, witness: None };
    for i in 0..ray.len() {
        for j in 0..i {
            out.pairs += 1;
            let Distance::Exact(d) = alphabet.word_metric(&ray[j], &ray[i], cap)? else {
                out.unknown += 1;
                continue;
            };
            let k = (i - j) as f64;
            let s = (d as f64 - slope * k).min(k - d as f64);
            if s < out.worst_slack {
                out.worst_slack = s;
                out.witness = Some((i, j, d));
            }
        }
    }
    Ok(out)
}

/// Letters of a canonical word as a string.
pub fn word_label(alphabet: &Alphabet, w: &Word) -> String {
    alphabet.format(w)
}
