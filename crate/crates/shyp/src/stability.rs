//! Small perturbations of an expanding action and the conjugacy `φ: Λ → Λ′`.

use alloc::format;
use alloc::vec::Vec;

use crate::coding::{ball_net, expansivity_witness, make_code, ray_letters, Code, Policy, Witness};
use crate::expansion::{neighborhood_sample, ExpansionDatum};
use crate::geometry::{Point, Region, Shape, Space};
use crate::num;
use crate::zoo::{self, limit, ActionSystem, GenMap};
use crate::{tol, Error, Result};

/// `(λ − 1)/2 · min{δ / ((N + 1) L^N), 1}`.
pub fn perturbation_epsilon(datum: &ExpansionDatum, n: usize) -> f64 {
    let inner = datum.delta / ((n as f64 + 1.0) * num::powi(datum.lipschitz, n as i32));
    (datum.lambda - 1.0) / 2.0 * inner.min(1.0)
}

/// Sampled `d_Lip,K`: sup displacement plus sup difference-quotient discrepancy over net pairs.
pub fn lipschitz_distance(space: &Space, f: &GenMap, g: &GenMap, k_net: &[Point]) -> Result<f64> {
    zoo::lipschitz_sample(space, f, g, k_net)
}

/// A finite sample of the closed neighborhood `K = N̄_δ(Λ)` built on `count` net points.
pub fn k_net(space: &Space, datum: &ExpansionDatum, net: &[Point], count: usize) -> Vec<Point> {
    neighborhood_sample(space, &limit::subsample(net, count), datum.delta)
}

/// A base action, a perturbation of it, the sampled `K` and the threshold `ε`.
#[derive(Clone, Debug)]
pub struct PerturbedSystem {
    pub base: ActionSystem,
    pub perturbed: ActionSystem,
    pub k_net: Vec<Point>,
    /// `d_Lip,K(ρ(s), ρ′(s))` per letter, in letter-index order.
    pub realized: Vec<f64>,
    pub epsilon: f64,
    /// Largest `d(ρ′(s⁻¹)ρ′(s)x, x)` over `K`.
    pub inverse_defect: f64,
}

impl PerturbedSystem {
    /// `ε` from `datum` and `n`, distances sampled on `k_net`.
    pub fn new(
        base: &ActionSystem,
        perturbed: ActionSystem,
        datum: &ExpansionDatum,
        n: usize,
        k_net: Vec<Point>,
    ) -> Result<Self> {
        if base.alphabet != perturbed.alphabet || base.space != perturbed.space {
            return Err(Error::SpaceMismatch);
        }
        let mut realized = Vec::with_capacity(base.maps.len());
        for (f, g) in base.maps.iter().zip(&perturbed.maps) {
            realized.push(lipschitz_distance(&base.space, f, g, &k_net)?);
        }
        Ok(PerturbedSystem {
            inverse_defect: perturbed.inverse_defect(&k_net),
            base: base.clone(),
            perturbed,
            k_net,
            realized,
            epsilon: perturbation_epsilon(datum, n),
        })
    }

    pub fn max_realized(&self) -> f64 {
        self.realized.iter().copied().fold(0.0, f64::max)
    }

    /// Refuse a perturbation whose realized distance reaches `ε`, naming the worst letter.
    pub fn admissible(&self) -> Result<()> {
        let worst = self
            .realized
            .iter()
            .enumerate()
            .fold(None::<(usize, f64)>, |b, (i, d)| match b {
                Some((_, bd)) if bd >= *d => b,
                _ => Some((i, *d)),
            });
        if let Some((i, d)) = worst {
            if !(d < self.epsilon) {
                let l = self.base.letters()[i];
                return Err(Error::NotAdmissible { letter: self.base.letter_name(l), distance: d, epsilon: self.epsilon });
            }
        }
        if !(self.inverse_defect <= tol::TOL) {
            return Err(Error::Parameter(format!("perturbed maps are not inverse on K ({})", self.inverse_defect)));
        }
        Ok(())
    }

    /// `λ′ = λ − ε`.
    pub fn lambda(&self, datum: &ExpansionDatum) -> f64 {
        datum.lambda - self.epsilon
    }

    /// `2δ(L + ε)/λ′^i`.
    pub fn diameter_bound(&self, datum: &ExpansionDatum, i: usize) -> f64 {
        2.0 * datum.delta * (datum.lipschitz + self.epsilon) / num::powi(self.lambda(datum), i as i32)
    }
}

/// One value `φ(x)` with its convergence diagnostics.
#[derive(Clone, Debug, PartialEq)]
pub struct ConjugacyEntry {
    pub x: Point,
    pub phi: Point,
    /// Index `i` of the returned `z_i`.
    pub iterations: usize,
    /// Diameter bound at the stopping index.
    pub diameter: f64,
    /// `d(z_i, z_{i−1})` at the stopping index.
    pub increment: f64,
    /// Smallest `bound_i − diam ρ′(c_i)[B_δ(p_{i+1})]` over the sampled balls, `+∞` when not measured.
    pub rate_slack: f64,
}

const RATE_NET: usize = 8;

/// `z_i = ρ′(c_i)(p_{i+1})` along a given code until the diameter bound drops below `tol`.
pub fn conjugacy_along(perturbed: &PerturbedSystem, datum: &ExpansionDatum, code: &Code, tol: f64) -> Result<ConjugacyEntry> {
    along(perturbed, datum, code, tol, true)
}

fn along(perturbed: &PerturbedSystem, datum: &ExpansionDatum, code: &Code, tol: f64, measure: bool) -> Result<ConjugacyEntry> {
    let space = &perturbed.base.space;
    let rho = &perturbed.perturbed;
    let x = code.points[0].clone();
    let mut prev: Option<Point> = None;
    let mut rate_slack = f64::INFINITY;
    for i in 0..code.depth() {
        let letters = ray_letters(datum, code, i);
        let z = rho.apply_letters(&letters, &code.points[i + 1]);
        let bound = perturbed.diameter_bound(datum, i);
        if measure {
            let image: Vec<Point> = ball_net(space, &code.points[i + 1], datum.delta, RATE_NET)
                .iter()
                .map(|w| rho.apply_letters(&letters, w))
                .collect();
            rate_slack = rate_slack.min(bound - crate::geometry::set_diameter(space, &image));
        }
        let increment = prev.as_ref().map_or(f64::INFINITY, |p| space.dist(p, &z));
        if bound < tol {
            return Ok(ConjugacyEntry { x, phi: z, iterations: i, diameter: bound, increment, rate_slack });
        }
        prev = Some(z);
    }
    Err(Error::NoConvergence { depth: code.depth(), diameter: perturbed.diameter_bound(datum, code.depth().saturating_sub(1)) })
}

fn depth_needed(perturbed: &PerturbedSystem, datum: &ExpansionDatum, tol: f64, max_depth: usize) -> Result<usize> {
    (0..=max_depth)
        .find(|i| perturbed.diameter_bound(datum, *i) < tol)
        .ok_or(Error::NoConvergence { depth: max_depth, diameter: perturbed.diameter_bound(datum, max_depth) })
}

/// `φ(x)` from the greedy special `δ`-code of `x`.
pub fn conjugacy_point(
    perturbed: &PerturbedSystem,
    datum: &ExpansionDatum,
    x: &Point,
    tol: f64,
    max_depth: usize,
) -> Result<ConjugacyEntry> {
    point(perturbed, datum, x, tol, max_depth, true)
}

fn point(
    perturbed: &PerturbedSystem,
    datum: &ExpansionDatum,
    x: &Point,
    tol: f64,
    max_depth: usize,
    measure: bool,
) -> Result<ConjugacyEntry> {
    perturbed.admissible()?;
    let depth = depth_needed(perturbed, datum, tol, max_depth)?;
    let code = make_code(&perturbed.base, datum, datum.delta, x, Policy::Special, depth + 1)?;
    along(perturbed, datum, &code, tol, measure)
}

/// `φ(x)` from a second `δ`-code starting at a different index; `None` when no other start works.
pub fn code_independence(
    perturbed: &PerturbedSystem,
    datum: &ExpansionDatum,
    x: &Point,
    tol: f64,
    max_depth: usize,
) -> Result<Option<f64>> {
    let main = conjugacy_point(perturbed, datum, x, tol, max_depth)?;
    let depth = depth_needed(perturbed, datum, tol, max_depth)?;
    let first = make_code(&perturbed.base, datum, datum.delta, x, Policy::Special, 1)?.alpha[0];
    for j in (0..datum.len()).filter(|j| *j != first) {
        let Ok(code) = make_code(&perturbed.base, datum, datum.delta, x, Policy::Initial(j), depth + 1) else {
            continue;
        };
        let alt = conjugacy_along(perturbed, datum, &code, tol)?;
        return Ok(Some(perturbed.base.space.dist(&main.phi, &alt.phi)));
    }
    Ok(None)
}

/// `φ` tabulated on a Λ-net.
#[derive(Clone, Debug, PartialEq)]
pub struct ConjugacyTable {
    pub entries: Vec<ConjugacyEntry>,
    /// Net indices where `φ` could not be computed.
    pub failures: Vec<(usize, Error)>,
    /// `max_x d(ρ′(s)φ(x), φ(ρ(s)x))` per letter.
    pub residuals: Vec<f64>,
    /// `max_x d(x, φ(x))`.
    pub displacement: f64,
    pub epsilon: f64,
    pub tol: f64,
}

impl ConjugacyTable {
    /// The sampled `Λ′`.
    pub fn image(&self) -> Vec<Point> {
        self.entries.iter().map(|e| e.phi.clone()).collect()
    }

    pub fn complete(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }

    pub fn max_diameter(&self) -> f64 {
        self.entries.iter().map(|e| e.diameter).fold(0.0, f64::max)
    }
}

/// `φ` over the net, with equivariance residuals and displacement.
pub fn conjugacy_map(
    perturbed: &PerturbedSystem,
    datum: &ExpansionDatum,
    net: &[Point],
    tol: f64,
    max_depth: usize,
) -> Result<ConjugacyTable> {
    perturbed.admissible()?;
    let space = &perturbed.base.space;
    let mut entries = Vec::with_capacity(net.len());
    let mut failures = Vec::new();
    for (i, x) in net.iter().enumerate() {
        match conjugacy_point(perturbed, datum, x, tol, max_depth) {
            Ok(e) => entries.push(e),
            Err(e) => failures.push((i, e)),
        }
    }
    let displacement = entries.iter().map(|e| space.dist(&e.x, &e.phi)).fold(0.0, f64::max);
    let mut table = ConjugacyTable { entries, failures, residuals: Vec::new(), displacement, epsilon: perturbed.epsilon, tol };
    table.residuals = check_equivariance(&table, perturbed, datum, max_depth)?;
    Ok(table)
}

/// `d(ρ′(s)φ(x), φ(ρ(s)x))` per letter, `φ(ρ(s)x)` computed directly rather than interpolated.
pub fn check_equivariance(
    table: &ConjugacyTable,
    perturbed: &PerturbedSystem,
    datum: &ExpansionDatum,
    max_depth: usize,
) -> Result<Vec<f64>> {
    let space = &perturbed.base.space;
    let letters = perturbed.base.letters();
    let mut out = alloc::vec![0.0f64; letters.len()];
    for e in &table.entries {
        for (k, s) in letters.iter().enumerate() {
            let y = perturbed.base.apply_letter(*s, &e.x);
            let phi_y = point(perturbed, datum, &y, table.tol, max_depth, false)?;
            let lhs = perturbed.perturbed.apply_letter(*s, &e.phi);
            out[k] = out[k].max(space.dist(&lhs, &phi_y.phi));
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Injectivity {
    pub passed: bool,
    /// Pairs at distance at least the resolution.
    pub pairs: usize,
    /// Smallest `d(φx, φy)` over those pairs and the pair realizing it.
    pub min_gap: f64,
    pub worst: Option<(usize, usize)>,
    /// Expansivity witness separating a collapsed pair under `ρ`.
    pub witness: Option<Witness>,
}

/// Distinct net points at distance `≥ resolution` must have images more than `2·tol` apart.
pub fn check_injectivity(
    table: &ConjugacyTable,
    base: &ActionSystem,
    datum: &ExpansionDatum,
    resolution: f64,
) -> Injectivity {
    let space = &base.space;
    let e = &table.entries;
    let mut out = Injectivity { passed: true, pairs: 0, min_gap: f64::INFINITY, worst: None, witness: None };
    for i in 0..e.len() {
        for j in i + 1..e.len() {
            if space.dist(&e[i].x, &e[j].x) < resolution {
                continue;
            }
            out.pairs += 1;
            let gap = space.dist(&e[i].phi, &e[j].phi);
            if gap < out.min_gap {
                out.min_gap = gap;
                out.worst = Some((i, j));
            }
        }
    }
    if out.min_gap <= 2.0 * table.tol {
        out.passed = false;
        if let Some((i, j)) = out.worst {
            out.witness = expansivity_witness(base, datum, &e[i].x, &e[j].x).ok();
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Displacement {
    pub max: f64,
    pub epsilon: f64,
    /// `δ/5`.
    pub fifth: f64,
    pub below_epsilon: bool,
    pub below_fifth: bool,
}

pub fn check_displacement(table: &ConjugacyTable, datum: &ExpansionDatum) -> Displacement {
    let fifth = datum.delta / 5.0;
    Displacement {
        max: table.displacement,
        epsilon: table.epsilon,
        fifth,
        below_epsilon: table.displacement < table.epsilon,
        below_fifth: table.displacement < fifth,
    }
}

/// Continuity of `φ` at scale `k`: Λ-pairs `x`, `y = ρ(c_k)q` with `q` the farthest net point in
/// `B_{δ₀−δ}(p_{k+1})`, `δ₀ = 3δ/2`, coded by `α(0..=k)` followed by a special code of `q`, must satisfy `d(φx, φy) < ε′ = 2δ₀(L + ε)/λ′^k`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Modulus {
    pub k: usize,
    pub epsilon_prime: f64,
    pub pairs: usize,
    /// Largest `d(x, y)` over the pairs.
    pub spread: f64,
    /// Largest `d(φx, φy)` over the pairs.
    pub worst: f64,
    pub passed: bool,
}

pub fn continuity_modulus(
    perturbed: &PerturbedSystem,
    datum: &ExpansionDatum,
    net: &[Point],
    k: usize,
    tol: f64,
    samples: usize,
) -> Result<Modulus> {
    let base = &perturbed.base;
    let space = &base.space;
    let radius = 0.5 * datum.delta;
    let epsilon_prime = 1.5 * perturbed.diameter_bound(datum, k);
    let depth = depth_needed(perturbed, datum, tol, tol::MAX_DEPTH)?;
    let mut out = Modulus { k, epsilon_prime, pairs: 0, spread: 0.0, worst: 0.0, passed: true };
    for x in limit::subsample(net, samples) {
        let code = make_code(base, datum, datum.delta, &x, Policy::Special, k + 1)?;
        let p = &code.points[k + 1];
        let q = net
            .iter()
            .map(|q| (space.dist(q, p), q))
            .filter(|(d, _)| *d > 0.0 && *d < radius)
            .max_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(core::cmp::Ordering::Equal));
        let Some((_, q)) = q else { continue };
        let a = point(perturbed, datum, &x, tol, tol::MAX_DEPTH, false)?;
        let tail = make_code(base, datum, datum.delta, q, Policy::Special, depth.saturating_sub(k).max(1))?;
        let mut points: Vec<Point> = (0..=k)
            .map(|i| base.apply_letters(&ray_letters(datum, &code, k)[i..], q))
            .collect();
        points.extend(tail.points);
        let mut alpha = code.alpha[..=k].to_vec();
        alpha.extend(tail.alpha);
        let y = points[0].clone();
        let b = along(perturbed, datum, &Code { alpha, points, special: true }, tol, false)?;
        out.pairs += 1;
        out.spread = out.spread.max(space.dist(&x, &y));
        out.worst = out.worst.max(space.dist(&a.phi, &b.phi));
    }
    out.passed = out.worst < epsilon_prime;
    Ok(out)
}

/// Datum for `ρ′`: `U′_α = U_α^r ∩ N_{δ−r}(Λ)`, `λ′ = λ − ε`, `L′ = L + ε`, and
/// `δ′ = 0.9·min(4δ/5, Lebesgue number of U′ over Λ′)`.
pub fn perturbed_datum(
    datum: &ExpansionDatum,
    perturbed: &PerturbedSystem,
    table: &ConjugacyTable,
    r: f64,
) -> Result<ExpansionDatum> {
    if !(r > 0.0 && r < 0.8 * datum.delta) {
        return Err(Error::Parameter(format!("r must lie in (0, {}), got {r}", 0.8 * datum.delta)));
    }
    perturbed.admissible()?;
    let space = &perturbed.base.space;
    let lam: Vec<Point> = table.entries.iter().map(|e| e.x.clone()).collect();
    let regions: Vec<Region> = datum
        .regions
        .iter()
        .map(|u| {
            if u.is_empty_shape() {
                return u.clone();
            }
            let near = Shape::Near { points: lam.clone(), radius: datum.delta + u.shift };
            Region { label: u.label, shape: Shape::Meet(alloc::vec![u.shape.clone(), near]), shift: u.shift + r }
        })
        .collect();
    let mut leb = f64::INFINITY;
    for y in table.image() {
        let best = regions.iter().map(|u| u.margin(space, &y)).fold(f64::NEG_INFINITY, f64::max);
        if !(best > 0.0) {
            return Err(Error::Uncovered { witness: y.label() });
        }
        leb = leb.min(best);
    }
    Ok(ExpansionDatum {
        regions,
        letters: datum.letters.clone(),
        delta: tol::LEBESGUE_FRACTION * leb.min(0.8 * datum.delta),
        lipschitz: datum.lipschitz + perturbed.epsilon,
        lambda: perturbed.lambda(datum),
        lebesgue: leb,
        refines: Vec::new(),
    })
}
