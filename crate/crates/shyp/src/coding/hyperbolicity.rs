//! Fellow travelling and `N`-equivalence of rays, certificates, recurrence and the coding map.

use alloc::collections::VecDeque;
use alloc::string::String;
use alloc::vec::Vec;

use super::{enumerate_codes, make_code, make_code_reversed, ray, Policy};
use crate::expansion::ExpansionDatum;
use crate::geometry::Point;
use crate::groups::{Alphabet, BoundaryWord, Distance, Presentation, Word};
use crate::zoo::ActionSystem;
use crate::{tol, Error, Result};

fn exact(alphabet: &Alphabet, u: &Word, v: &Word, cap: usize) -> Option<usize> {
    alphabet.word_metric(u, v, cap).ok().and_then(Distance::exact)
}

fn directed(alphabet: &Alphabet, a: &[Word], b: &[Word], cap: usize) -> Option<usize> {
    let mut worst = 0;
    for u in a {
        let best = b.iter().filter_map(|v| exact(alphabet, u, v, cap)).min()?;
        worst = worst.max(best);
    }
    Some(worst)
}

/// Hausdorff distance of the truncated ray images in the word metric.
pub fn fellow_travel_distance(alphabet: &Alphabet, a: &[Word], b: &[Word], cap: usize) -> Result<Distance> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySet);
    }
    match (directed(alphabet, a, b, cap), directed(alphabet, b, a, cap)) {
        (Some(x), Some(y)) => Ok(Distance::Exact(x.max(y))),
        _ => Ok(Distance::Unknown { cap }),
    }
}

/// `a ≈^N b` on truncation tails: the largest index sets `P`, `Q` of the tails whose images
/// are within Hausdorff distance `n`, accepted when both have at least `MIN_SUBSET` entries.
pub fn related(alphabet: &Alphabet, a: &[Word], b: &[Word], n: usize, cap: usize) -> bool {
    let ta = &a[a.len() / 2..];
    let tb = &b[b.len() / 2..];
    let mut d = alloc::vec![alloc::vec![usize::MAX; tb.len()]; ta.len()];
    for (i, u) in ta.iter().enumerate() {
        for (j, v) in tb.iter().enumerate() {
            if let Some(x) = exact(alphabet, u, v, cap) {
                d[i][j] = x;
            }
        }
    }
    let mut p = alloc::vec![true; ta.len()];
    let mut q = alloc::vec![true; tb.len()];
    loop {
        let mut changed = false;
        for i in 0..ta.len() {
            if p[i] && !(0..tb.len()).any(|j| q[j] && d[i][j] <= n) {
                p[i] = false;
                changed = true;
            }
        }
        for j in 0..tb.len() {
            if q[j] && !(0..ta.len()).any(|i| p[i] && d[i][j] <= n) {
                q[j] = false;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let count = |v: &[bool]| v.iter().filter(|x| **x).count();
    count(&p) >= tol::MIN_SUBSET && count(&q) >= tol::MIN_SUBSET
}

/// Shortest chain `a = r₀ ≈ r₁ ≈ … ≈ r_k = b` through the pool with `k ≤ max_chain`.
pub fn n_equivalence(
    alphabet: &Alphabet,
    pool: &[Vec<Word>],
    a: usize,
    b: usize,
    n: usize,
    max_chain: usize,
    cap: usize,
) -> Option<Vec<usize>> {
    if a >= pool.len() || b >= pool.len() {
        return None;
    }
    if a == b {
        return Some(alloc::vec![a]);
    }
    let mut prev: Vec<Option<usize>> = alloc::vec![None; pool.len()];
    let mut depth = alloc::vec![usize::MAX; pool.len()];
    depth[a] = 0;
    let mut queue = VecDeque::new();
    queue.push_back(a);
    while let Some(u) = queue.pop_front() {
        if depth[u] >= max_chain {
            continue;
        }
        for v in 0..pool.len() {
            if depth[v] != usize::MAX || !related(alphabet, &pool[u], &pool[v], n, cap) {
                continue;
            }
            depth[v] = depth[u] + 1;
            prev[v] = Some(u);
            if v == b {
                let mut chain = alloc::vec![b];
                let mut w = b;
                while let Some(p) = prev[w] {
                    chain.push(p);
                    w = p;
                }
                chain.reverse();
                return Some(chain);
            }
            queue.push_back(v);
        }
    }
    None
}

/// Certificate data at one Λ-point.
#[derive(Clone, Debug, PartialEq)]
pub struct PointCertificate {
    pub point: String,
    pub rays: usize,
    pub truncated: bool,
    /// Largest pairwise fellow-travel distance.
    pub fellow: Distance,
    /// Longest shortest `≈^N` chain over pairs, `None` when some pair has no chain.
    pub chain: Option<usize>,
    /// The pair of rays realizing `fellow`.
    pub worst_pair: Option<(String, String)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Certificate {
    pub points: Vec<PointCertificate>,
    pub n_max: usize,
    pub depth: usize,
    pub cap: usize,
    /// Largest fellow-travel distance over all points, when every distance was exact.
    pub n: Option<usize>,
    /// All rays at every point fellow-travel within `n_max`.
    pub fellow_ok: bool,
    /// All rays at every point are chain-equivalent under `≈^{n_max}`.
    pub equivalence_ok: bool,
    pub max_chain: Option<usize>,
    pub truncated: bool,
}

/// Desk-scale S-hyperbolicity certificate over a Λ-net.
pub fn shyp_certificate(
    system: &ActionSystem,
    datum: &ExpansionDatum,
    net: &[Point],
    depth: usize,
    cap: usize,
    n_max: usize,
) -> Result<Certificate> {
    let alphabet = &system.alphabet;
    let mut points = Vec::with_capacity(net.len());
    for x in net {
        let set = enumerate_codes(system, datum, datum.delta, x, depth, cap)?;
        let rays: Vec<Vec<Word>> = set.codes.iter().map(|c| ray(alphabet, datum, c)).collect::<Result<_>>()?;
        let mut fellow = Distance::Exact(0);
        let mut worst_pair = None;
        let mut chain = Some(0usize);
        for i in 0..rays.len() {
            for j in i + 1..rays.len() {
                let d = fellow_travel_distance(alphabet, &rays[i], &rays[j], tol::BFS_CAP)?;
                if d > fellow {
                    fellow = d;
                    let last = |r: &Vec<Word>| r.last().map(|w| alphabet.format(w)).unwrap_or_default();
                    worst_pair = Some((last(&rays[i]), last(&rays[j])));
                }
                chain = match (chain, n_equivalence(alphabet, &rays, i, j, n_max, tol::MAX_CHAIN, tol::BFS_CAP)) {
                    (Some(c), Some(v)) => Some(c.max(v.len() - 1)),
                    _ => None,
                };
            }
        }
        points.push(PointCertificate {
            point: x.label(),
            rays: rays.len(),
            truncated: set.truncated,
            fellow,
            chain,
            worst_pair,
        });
    }
    let n = points.iter().map(|p| p.fellow.exact()).collect::<Option<Vec<_>>>().map(|v| v.into_iter().max().unwrap_or(0));
    let max_chain = points.iter().map(|p| p.chain).collect::<Option<Vec<_>>>().map(|v| v.into_iter().max().unwrap_or(0));
    Ok(Certificate {
        fellow_ok: n.is_some_and(|n| n <= n_max),
        equivalence_ok: max_chain.is_some(),
        truncated: points.iter().any(|p| p.truncated),
        points,
        n_max,
        depth,
        cap,
        n,
        max_chain,
    })
}

/// Near returns of a code and the elements `h_j = c_{i_j} c_{i_1}⁻¹` they produce.
#[derive(Clone, Debug, PartialEq)]
pub struct Recurrence {
    pub indices: Vec<usize>,
    pub words: Vec<Word>,
    /// `d(p_{i_j+1}, p_{i_1+1})`.
    pub returns: Vec<f64>,
    /// `d(ρ(h_j)x, x)`.
    pub residuals: Vec<f64>,
}

/// Record-setting returns of a special code to its first point.
pub fn recurrence_witness(
    system: &ActionSystem,
    datum: &ExpansionDatum,
    x: &Point,
    eta: f64,
    depth: usize,
) -> Result<Recurrence> {
    let code = make_code(system, datum, eta, x, Policy::Special, depth)?;
    let alphabet = &system.alphabet;
    let rays = ray(alphabet, datum, &code)?;
    let space = &system.space;
    let base = &code.points[1];
    let c1_inv = alphabet.inverse(&rays[0])?;
    let mut out = Recurrence { indices: alloc::vec![0], words: Vec::new(), returns: Vec::new(), residuals: Vec::new() };
    let mut best = f64::INFINITY;
    for i in 1..code.depth() {
        let d = space.dist(&code.points[i + 1], base);
        if d < eta && d < best {
            best = d;
            let h = alphabet.multiply(&rays[i], &c1_inv)?;
            let y = system.apply(&h, &code.points[0])?;
            out.indices.push(i);
            out.returns.push(d);
            out.residuals.push(space.dist(&y, &code.points[0]));
            out.words.push(h);
        }
    }
    if out.words.is_empty() {
        return Err(Error::NotFound(depth));
    }
    Ok(out)
}

fn coding_depth(x: &Point, prefix_depth: usize) -> usize {
    let want = 2 * prefix_depth + 2;
    match x {
        Point::Word(w) => want.min(w.len().saturating_sub(1)),
        _ => want,
    }
}

fn check_hyperbolic(system: &ActionSystem) -> Result<()> {
    match system.alphabet.kind {
        Presentation::Free { .. } | Presentation::Cyclic => Ok(()),
        _ => Err(Error::NotHyperbolic),
    }
}

/// `π(x)`: the stabilized prefix of the ray of a greedy special code.
pub fn coding_map(system: &ActionSystem, datum: &ExpansionDatum, x: &Point, prefix_depth: usize) -> Result<BoundaryWord> {
    check_hyperbolic(system)?;
    let code = make_code(system, datum, datum.delta, x, Policy::Special, coding_depth(x, prefix_depth))?;
    system.alphabet.boundary_prefix(&ray(&system.alphabet, datum, &code)?, prefix_depth)
}

/// Common prefix length of `π(x)` computed from the greedy code, the reversed-tie code,
/// and a code with a different first index.
pub fn coding_agreement(system: &ActionSystem, datum: &ExpansionDatum, x: &Point, prefix_depth: usize) -> Result<usize> {
    check_hyperbolic(system)?;
    let depth = coding_depth(x, prefix_depth);
    let alphabet = &system.alphabet;
    let main = make_code(system, datum, datum.delta, x, Policy::Special, depth)?;
    let first = main.alpha.first().copied().unwrap_or(0);
    let other = if datum.len() > 1 { (first + 1) % datum.len() } else { first };
    let codes = [
        make_code_reversed(system, datum, datum.delta, x, Policy::Special, depth)?,
        make_code(system, datum, datum.delta, x, Policy::Initial(other), depth)?,
    ];
    let w0 = alphabet.boundary_prefix(&ray(alphabet, datum, &main)?, prefix_depth)?;
    let mut agree = w0.depth;
    for c in &codes {
        let w = alphabet.boundary_prefix(&ray(alphabet, datum, c)?, prefix_depth)?;
        let k = w0.prefix.iter().zip(&w.prefix).take_while(|(a, b)| a == b).count();
        agree = agree.min(k);
    }
    Ok(agree)
}
