//! Expansion data `(I, U, Σ, δ, L, λ)`: construction, verification and refinement.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::geometry::{Point, Region, Shape, Space};
use crate::groups::{Letter, Presentation};
use crate::num::{self, TAU};
use crate::zoo::{self, limit, ActionSystem, GenMap, LimitSet};
use crate::{tol, Error, Result};

/// A finite cover of Λ by regions on which the inverse of the attached letter expands.
#[derive(Clone, Debug, PartialEq)]
pub struct ExpansionDatum {
    /// `U_α`, with `regions[α].label == α`.
    pub regions: Vec<Region>,
    /// `s_α`.
    pub letters: Vec<Letter>,
    pub delta: f64,
    pub lipschitz: f64,
    pub lambda: f64,
    /// Sampled Lebesgue number of the cover over the Λ-net.
    pub lebesgue: f64,
    /// δ of every datum this one trivially refines, oldest first.
    pub refines: Vec<f64>,
}

impl ExpansionDatum {
    pub fn len(&self) -> usize {
        self.regions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.regions.is_empty()
    }

    /// Index of the region of largest margin at `x`, ties to the smallest index.
    pub fn best_region(&self, space: &Space, x: &Point) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for (i, r) in self.regions.iter().enumerate() {
            let m = r.margin(space, x);
            if best.map_or(true, |(_, b)| m > b) {
                best = Some((i, m));
            }
        }
        best
    }

    /// `ρ(s_α⁻¹)`.
    pub fn inverse_map<'a>(&self, system: &'a ActionSystem, alpha: usize) -> &'a GenMap {
        &system.maps[self.letters[alpha].inv().index()]
    }
}

/// The default finite net of Λ.
pub fn limit_net(system: &ActionSystem) -> Vec<Point> {
    net_of(&system.limit)
}

fn net_of(l: &LimitSet) -> Vec<Point> {
    match l {
        LimitSet::Schottky(_) => l.net(tol::NET_DEPTH),
        LimitSet::FreeBoundary { .. } => l.net(tol::BOUNDARY_NET_DEPTH),
        LimitSet::Union(parts) => {
            let mut out = Vec::new();
            for (i, p) in parts.iter().enumerate() {
                out.extend(net_of(p).into_iter().map(|x| Point::part(i, x)));
            }
            out
        }
        _ => l.net(0),
    }
}

/// Points of the closed `r`-neighborhood of `net`, offset along coordinate directions.
pub fn neighborhood_sample(space: &Space, net: &[Point], r: f64) -> Vec<Point> {
    let mut out = Vec::new();
    for x in net {
        out.extend(offsets(space, x, r));
    }
    out
}

fn offsets(space: &Space, x: &Point, r: f64) -> Vec<Point> {
    let fr = [-1.0, -0.5, 0.0, 0.5, 1.0];
    match (space, x) {
        (Space::Circle | Space::CoveredCircle { .. }, _) => fr.iter().map(|f| space.offset(x, f * r, &[])).collect(),
        (Space::Projective { n }, _) => {
            let mut out = alloc::vec![x.clone()];
            for j in 0..=*n {
                let mut e = alloc::vec![0.0; n + 1];
                e[j] = 1.0;
                for f in [0.5, 1.0] {
                    out.push(space.offset(x, f * r, &e));
                    let neg: Vec<f64> = e.iter().map(|v| -v).collect();
                    out.push(space.offset(x, f * r, &neg));
                }
            }
            out
        }
        (Space::DisjointUnion { parts, .. }, Point::Part(i, p)) if *i < parts.len() => {
            offsets(&parts[*i], p, r).into_iter().map(|q| Point::part(*i, q)).collect()
        }
        _ => alloc::vec![x.clone()],
    }
}

/// Arcs `(start, len)` of a grid superlevel set `{f > level}` on a circle.
fn superlevel_arcs(f: impl Fn(f64) -> f64, level: f64, grid: usize) -> Vec<(f64, f64)> {
    let h = TAU / grid as f64;
    let mask: Vec<bool> = (0..grid).map(|j| f(j as f64 * h) > level).collect();
    if mask.iter().all(|m| *m) {
        return alloc::vec![(0.0, TAU)];
    }
    let Some(first_out) = mask.iter().position(|m| !*m) else { return Vec::new() };
    let mut arcs = Vec::new();
    let mut run: Option<usize> = None;
    for k in 1..=grid {
        let j = (first_out + k) % grid;
        match (mask[j], run) {
            (true, None) => run = Some(k),
            (false, Some(s)) => {
                let start = (first_out + s) % grid;
                arcs.push((start as f64 * h, (k - 1 - s) as f64 * h));
                run = None;
            }
            _ => {}
        }
    }
    arcs
}

fn circle_regions(system: &ActionSystem, net: &[Point], level: f64) -> Vec<(Letter, Shape)> {
    let mut out = Vec::new();
    for s in system.letters() {
        let f = &system.maps[s.inv().index()];
        let arcs = superlevel_arcs(|t| f.stretch(&Point::Angle(t)).0, level, tol::CIRCLE_GRID);
        for (start, len) in arcs {
            let shape = if len >= TAU {
                Shape::Whole
            } else {
                let cut = tol::SCHOTTKY_SHRINK * len;
                Shape::Arc { start: num::wrap(start + cut), len: len - 2.0 * cut }
            };
            let r = Region::new(0, shape.clone());
            if net.iter().any(|x| r.contains(&system.space, x)) {
                out.push((s, shape));
            }
        }
    }
    out
}

fn projective_regions(system: &ActionSystem, net: &[Point], level: f64) -> Vec<(Letter, Shape)> {
    let space = &system.space;
    let mut out = Vec::new();
    for x in net {
        let mut best: Option<(Letter, f64)> = None;
        for s in system.letters() {
            let e = system.maps[s.inv().index()].stretch(x).0;
            if best.map_or(true, |(_, b)| e > b) {
                best = Some((s, e));
            }
        }
        let Some((s, e)) = best else { continue };
        if e <= level {
            continue;
        }
        let f = &system.maps[s.inv().index()];
        let others = net.iter().filter(|y| *y != x).map(|y| space.dist(x, y)).fold(f64::INFINITY, f64::min);
        let cap = (num::PI / 4.0).min(others / 2.0);
        let ok = |r: f64| {
            (1..=8).all(|k| {
                offsets(space, x, r * k as f64 / 8.0)
                    .iter()
                    .all(|y| f.stretch(y).0 > level)
            })
        };
        let radius = if ok(cap) {
            cap
        } else {
            let (mut lo, mut hi) = (0.0, cap);
            for _ in 0..40 {
                let mid = 0.5 * (lo + hi);
                if ok(mid) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            lo
        };
        out.push((s, Shape::Ball { center: x.clone(), radius: radius * (1.0 - tol::SCHOTTKY_SHRINK) }));
    }
    out
}

fn sup_stretch(system: &ActionSystem, pts: &[Point]) -> f64 {
    let mut l: f64 = 0.0;
    for s in system.letters() {
        let f = &system.maps[s.index()];
        for y in pts {
            l = l.max(f.stretch(y).1);
        }
    }
    l
}

/// Build a datum with expansion factor `lambda_target` from the system's default Λ-net.
pub fn build_expansion_datum(system: &ActionSystem, lambda_target: f64) -> Result<ExpansionDatum> {
    if !(lambda_target > 1.0) {
        return Err(Error::Parameter(format!("expansion factor must exceed 1, got {lambda_target}")));
    }
    let net = limit_net(system);
    if net.is_empty() {
        return Err(Error::EmptySet);
    }
    let space = &system.space;
    for x in &net {
        let best = system
            .letters()
            .iter()
            .map(|s| system.maps[s.inv().index()].stretch(x).0)
            .fold(0.0, f64::max);
        let need = match space {
            Space::FreeBoundary { .. } => lambda_target,
            _ => lambda_target * tol::SAFETY,
        };
        if best < need && !matches!(system.alphabet.kind, Presentation::Product { .. }) {
            return Err(Error::Uncoverable { witness: x.label(), best });
        }
    }
    let level = lambda_target * tol::SAFETY;
    let (pairs, ball_cap, exact_l): (Vec<(Letter, Shape)>, f64, Option<f64>) = match space {
        Space::Circle | Space::CoveredCircle { .. } => (circle_regions(system, &net, level), f64::INFINITY, None),
        Space::Projective { .. } => (projective_regions(system, &net, level), f64::INFINITY, None),
        Space::FreeBoundary { a, .. } => {
            if *a < lambda_target {
                return Err(Error::Uncoverable { witness: "boundary".into(), best: *a });
            }
            let pairs = system
                .letters()
                .into_iter()
                .map(|s| (s, Shape::Cylinder { prefix: alloc::vec![s], a: *a }))
                .collect();
            (pairs, num::powi(*a, -2), Some(*a))
        }
        Space::DisjointUnion { .. } => return product_datum(system, lambda_target),
    };
    let regions: Vec<Region> = pairs
        .iter()
        .enumerate()
        .map(|(i, (_, s))| Region::new(i, s.clone()))
        .collect();
    let letters: Vec<Letter> = pairs.iter().map(|(l, _)| *l).collect();
    let mut lebesgue = f64::INFINITY;
    for x in &net {
        let best = regions.iter().map(|r| r.margin(space, x)).fold(f64::NEG_INFINITY, f64::max);
        if best <= 0.0 {
            return Err(Error::Uncoverable { witness: x.label(), best: 0.0 });
        }
        lebesgue = lebesgue.min(best);
    }
    let delta = tol::LEBESGUE_FRACTION * lebesgue.min(ball_cap);
    let lipschitz = match exact_l {
        Some(l) => l,
        None => tol::SAFETY * sup_stretch(system, &neighborhood_sample(space, &net, delta)),
    };
    Ok(ExpansionDatum {
        regions,
        letters,
        delta,
        lipschitz: lipschitz.max(lambda_target),
        lambda: lambda_target,
        lebesgue,
        refines: Vec::new(),
    })
}

fn product_datum(system: &ActionSystem, lambda_target: f64) -> Result<ExpansionDatum> {
    let Presentation::Product { left, right, swap } = system.alphabet.kind else {
        return Err(Error::Unsupported("disjoint unions need a product presentation".into()));
    };
    let mut regions = Vec::new();
    let mut letters = Vec::new();
    let (mut delta, mut lip, mut leb) = (f64::INFINITY, 0.0f64, f64::INFINITY);
    for (part, offset) in [(0usize, 0usize), (1, left)] {
        let comp = zoo::component_system(system, part)?;
        let d = build_expansion_datum(&comp, lambda_target)?;
        for (r, l) in d.regions.iter().zip(&d.letters) {
            regions.push(Region {
                label: regions.len(),
                shape: Shape::Within { part, inner: Box::new(r.shape.clone()) },
                shift: r.shift,
            });
            letters.push(Letter::new(l.generator() + offset, l.is_inverse()));
        }
        delta = delta.min(d.delta);
        lip = lip.max(d.lipschitz);
        leb = leb.min(d.lebesgue);
    }
    if swap {
        let g = left + right;
        for inv in [false, true] {
            regions.push(Region::new(regions.len(), Shape::Empty));
            letters.push(Letter::new(g, inv));
        }
    }
    Ok(ExpansionDatum { regions, letters, delta, lipschitz: lip, lambda: lambda_target, lebesgue: leb, refines: Vec::new() })
}

/// One line of a verification report.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub samples: usize,
    /// Smallest margin by which the inequality held; negative on failure.
    pub slack: f64,
    pub witness: Option<String>,
    pub note: Option<String>,
}

impl Check {
    fn new(name: &str) -> Self {
        Check { name: name.into(), passed: true, samples: 0, slack: f64::INFINITY, witness: None, note: None }
    }

    fn record(&mut self, slack: f64, witness: impl FnOnce() -> String) {
        self.samples += 1;
        if slack < self.slack {
            self.slack = slack;
            if slack < 0.0 {
                self.witness = Some(witness());
            }
        }
        if slack < 0.0 {
            self.passed = false;
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerificationReport {
    pub checks: Vec<Check>,
    /// Smallest sampled ratio `d(fx, fy) / d(x, y)` inside the regions.
    pub min_expansion: f64,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Sampled check of the datum against the system on the given Λ-net.
pub fn verify_expansion(system: &ActionSystem, datum: &ExpansionDatum, net: &[Point]) -> VerificationReport {
    let space = &system.space;
    let mut checks = Vec::new();

    let mut sym = Check::new("symmetric");
    for s in system.letters() {
        sym.record(if system.alphabet.contains(s.inv()) { 1.0 } else { -1.0 }, || s.to_char().into());
    }
    for (a, s) in datum.letters.iter().enumerate() {
        sym.record(if system.alphabet.contains(*s) { 1.0 } else { -1.0 }, || format!("region {a}"));
    }
    checks.push(sym);

    let mut inv = Check::new("inverse");
    for s in system.letters() {
        for x in net {
            let y = system.apply_letter(s.inv(), &system.apply_letter(s, x));
            inv.record(tol::TOL - space.dist(&y, x), || format!("{} at {}", s.to_char(), x.label()));
        }
    }
    checks.push(inv);

    let mut leb = Check::new("lebesgue");
    for x in net {
        let best = datum.regions.iter().map(|r| r.margin(space, x)).fold(f64::NEG_INFINITY, f64::max);
        leb.record(best - datum.delta, || x.label());
    }
    checks.push(leb);

    let hood = neighborhood_sample(space, net, datum.delta);
    let mut lip = Check::new("lipschitz");
    for s in system.letters() {
        let f = &system.maps[s.index()];
        for (i, x) in hood.iter().enumerate() {
            let mut partners: Vec<Point> = offsets(space, x, datum.delta / 64.0);
            if i + 1 < hood.len() {
                partners.push(hood[(i * 7919 + 1) % hood.len()].clone());
            }
            let fx = f.apply(x);
            for y in &partners {
                let d = space.dist(x, y);
                if d == 0.0 || !d.is_finite() {
                    continue;
                }
                let fd = space.dist(&fx, &f.apply(y));
                lip.record(datum.lipschitz * d - fd + tol::TOL * d, || {
                    format!("{} at {} / {}", s.to_char(), x.label(), y.label())
                });
            }
        }
    }
    checks.push(lip);

    let mut exp = Check::new("expansion");
    let mut min_expansion = f64::INFINITY;
    for (a, region) in datum.regions.iter().enumerate() {
        if region.is_empty_shape() {
            continue;
        }
        let f = datum.inverse_map(system, a);
        let inside: Vec<&Point> = hood.iter().filter(|x| region.contains(space, x)).collect();
        for (i, x) in inside.iter().enumerate() {
            let m = region.margin(space, x);
            let mut partners: Vec<Point> = offsets(space, x, (m * 0.5).min(datum.delta))
                .into_iter()
                .filter(|y| region.contains(space, y))
                .collect();
            if matches!(space, Space::FreeBoundary { .. }) && i + 1 < inside.len() {
                partners.push(inside[(i * 7919 + 1) % inside.len()].clone());
                partners.push(inside[i + 1].clone());
            }
            let fx = f.apply(x);
            for y in &partners {
                let d = space.dist(x, y);
                if d == 0.0 {
                    continue;
                }
                let fd = space.dist(&fx, &f.apply(y));
                min_expansion = min_expansion.min(fd / d);
                exp.record(fd - datum.lambda * d + tol::TOL, || format!("region {a} at {}", x.label()));
            }
        }
    }
    checks.push(exp);

    let mut ball = Check::new("ball");
    if space.is_geodesic() {
        ball.note = Some("automatic on geodesic spaces".into());
    } else {
        ball_check(system, datum, net, &mut ball);
    }
    checks.push(ball);

    VerificationReport { checks, min_expansion }
}

/// `B_{λη}(f x) ⊂ f(B_η(x))` for `η ∈ {δ, δ/2, δ/4}`, tested against the net.
fn ball_check(system: &ActionSystem, datum: &ExpansionDatum, net: &[Point], check: &mut Check) {
    let space = &system.space;
    for (a, region) in datum.regions.iter().enumerate() {
        if region.is_empty_shape() {
            continue;
        }
        let f = datum.inverse_map(system, a);
        let g = &system.maps[datum.letters[a].index()];
        for eta in [datum.delta, datum.delta / 2.0, datum.delta / 4.0] {
            for x in net {
                if !region.ball_contained(space, x, eta) {
                    continue;
                }
                let fx = f.apply(x);
                for z in net {
                    if space.dist(z, &fx) >= datum.lambda * eta {
                        continue;
                    }
                    let back = g.apply(z);
                    let d = space.dist(&back, x);
                    check.record(eta - d, || format!("region {a}, eta {eta}, at {}", x.label()));
                }
            }
        }
    }
}

/// Trivial refinement: the same datum with a strictly smaller δ.
pub fn refine_datum(datum: &ExpansionDatum, delta_new: f64) -> Result<ExpansionDatum> {
    if !(delta_new > 0.0 && delta_new < datum.delta) {
        return Err(Error::Refinement { new: delta_new, old: datum.delta });
    }
    let mut out = datum.clone();
    out.refines.push(datum.delta);
    out.delta = delta_new;
    Ok(out)
}

/// `coarse ≺ fine`: `fine` is `coarse` with a strictly smaller δ.
pub fn is_refinement(coarse: &ExpansionDatum, fine: &ExpansionDatum) -> bool {
    fine.regions == coarse.regions
        && fine.letters == coarse.letters
        && fine.lipschitz == coarse.lipschitz
        && fine.lambda == coarse.lambda
        && fine.delta < coarse.delta
}

/// Largest `d(ρ(g)x, ρ(g)y) / (L^k d(x, y))` over words of length `k` and sampled pairs.
pub fn chain_lipschitz_ratio(system: &ActionSystem, datum: &ExpansionDatum, k: usize, net: &[Point]) -> f64 {
    let space = &system.space;
    let rank = system.alphabet.rank();
    let words = limit::reduced_words(rank.max(1), k);
    let r = datum.delta / num::powi(datum.lipschitz, k as i32 - 1);
    let pts = neighborhood_sample(space, net, r);
    let bound = num::powi(datum.lipschitz, k as i32);
    let mut worst: f64 = 0.0;
    for w in limit::subsample(&words, 64) {
        for x in limit::subsample(&pts, 64) {
            for y in offsets(space, &x, r / 8.0) {
                let d = space.dist(&x, &y);
                if d == 0.0 {
                    continue;
                }
                let fd = space.dist(&system.apply_letters(&w, &x), &system.apply_letters(&w, &y));
                worst = worst.max(fd / (bound * d));
            }
        }
    }
    worst
}
