//! Concrete actions: cyclic and Schottky groups on the circle, covers, free groups on
//! their boundary, ℤⁿ on projective space, products, and their perturbations.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::geometry::{Point, Space};
use crate::groups::{Alphabet, Letter, Presentation, Word};
use crate::num::{self, Mat2, MatN, PI, TAU};
use crate::{tol, Error, Result};

pub mod limit;
pub mod maps;
mod perturb;

pub use limit::{LimitSet, SchottkyLimit};
pub use maps::{Bump, GenMap, Lift, Step};
pub use perturb::{lipschitz_sample, mobius_real, perturb, Perturbation};

/// A finitely generated group acting on a metric space, with a description of Λ.
#[derive(Clone, Debug, PartialEq)]
pub struct ActionSystem {
    pub name: String,
    pub alphabet: Alphabet,
    pub space: Space,
    /// One map per letter, indexed by `Letter::index`.
    pub maps: Vec<GenMap>,
    pub limit: LimitSet,
}

impl ActionSystem {
    pub fn letters(&self) -> Vec<Letter> {
        self.alphabet.letters()
    }

    pub fn apply_letter(&self, l: Letter, x: &Point) -> Point {
        self.maps[l.index()].apply(x)
    }

    /// `ρ(g)x`, applying the rightmost letter first.
    pub fn apply(&self, g: &Word, x: &Point) -> Result<Point> {
        self.space.check(x)?;
        let letters = self.alphabet.spell(g);
        if letters.iter().any(|l| !self.alphabet.contains(*l)) {
            return Err(Error::AlphabetMismatch);
        }
        Ok(self.apply_letters(&letters, x))
    }

    pub fn apply_letters(&self, letters: &[Letter], x: &Point) -> Point {
        let mut y = x.clone();
        for l in letters.iter().rev() {
            y = self.apply_letter(*l, &y);
        }
        y
    }

    /// Infimum of directional stretch of `ρ(g)` at `x`.
    pub fn expansion_factor(&self, g: &Word, x: &Point) -> Result<f64> {
        self.space.check(x)?;
        let letters = self.alphabet.spell(g);
        Ok(self.stretch_letters(&letters, x).0)
    }

    /// `(inf, sup)` of directional stretch of the composite map at `x`.
    pub fn stretch_letters(&self, letters: &[Letter], x: &Point) -> (f64, f64) {
        let mut steps = Vec::new();
        for l in letters.iter().rev() {
            steps.extend(self.maps[l.index()].steps.iter().cloned());
        }
        GenMap { steps }.stretch(x)
    }

    pub fn stretch(&self, l: Letter, x: &Point) -> (f64, f64) {
        self.maps[l.index()].stretch(x)
    }

    pub fn letter_name(&self, l: Letter) -> String {
        format!("{}", l.to_char())
    }

    /// Largest `d(ρ(s⁻¹)ρ(s)x, x)` over letters and the given points.
    pub fn inverse_defect(&self, pts: &[Point]) -> f64 {
        let mut worst: f64 = 0.0;
        for l in self.letters() {
            for x in pts {
                let y = self.apply_letter(l.inv(), &self.apply_letter(l, x));
                worst = worst.max(self.space.dist(&y, x));
            }
        }
        worst
    }
}

fn cyclic_alphabet_maps(m: &Mat2) -> Vec<GenMap> {
    alloc::vec![GenMap::single(Step::Mobius(*m)), GenMap::single(Step::Mobius(m.inverse()))]
}

/// `γ: x ↦ m²x` on ℝ∪{∞}, fixed at chart angles 0 (repelling) and π (attracting).
pub fn make_cyclic_hyperbolic(m: f64) -> Result<ActionSystem> {
    if !(m > 1.0) {
        return Err(Error::Parameter(format!("multiplier must exceed 1, got {m}")));
    }
    let g = Mat2::new(1.0 / m, 0.0, 0.0, m);
    Ok(ActionSystem {
        name: format!("cyclic(m={m})"),
        alphabet: Alphabet::cyclic(),
        space: Space::Circle,
        maps: cyclic_alphabet_maps(&g),
        limit: LimitSet::Finite(alloc::vec![Point::Angle(0.0), Point::Angle(PI)]),
    })
}

/// Cyclic group generated by an arbitrary hyperbolic matrix.
pub fn make_cyclic_from_matrix(g: Mat2) -> Result<ActionSystem> {
    let g = g.normalized();
    let (a, r) = maps::fixed_angles(&g).ok_or_else(|| Error::Parameter("matrix is not hyperbolic".into()))?;
    Ok(ActionSystem {
        name: "cyclic".into(),
        alphabet: Alphabet::cyclic(),
        space: Space::Circle,
        maps: cyclic_alphabet_maps(&g),
        limit: LimitSet::Finite(alloc::vec![Point::Angle(r), Point::Angle(a)]),
    })
}

/// Matrix of the first generator of a cyclic circle system.
pub fn circle_matrix(system: &ActionSystem, l: Letter) -> Option<Mat2> {
    match system.maps.get(l.index())?.steps.as_slice() {
        [Step::Mobius(m)] => Some(*m),
        _ => None,
    }
}

/// Lift of a cyclic circle system to the `k`-fold covering circle.
pub fn make_covered_cyclic(base: &ActionSystem, k: usize) -> Result<ActionSystem> {
    if k < 2 {
        return Err(Error::Parameter("cover degree must be at least 2".into()));
    }
    let a = Letter::new(0, false);
    let (Presentation::Cyclic, Space::Circle, Some(g)) = (&base.alphabet.kind, &base.space, circle_matrix(base, a))
    else {
        return Err(Error::Unsupported("covers need a cyclic system on the circle".into()));
    };
    let (att, rep) = maps::fixed_angles(&g).ok_or_else(|| Error::Parameter("matrix is not hyperbolic".into()))?;
    let up = Lift::new(g, k, rep, tol::LIFT_STEPS);
    let down = Lift::new(g.inverse(), k, rep, tol::LIFT_STEPS);
    let mut pts = Vec::new();
    for t in [rep, att] {
        for j in 0..k {
            pts.push(Point::angle((t + TAU * j as f64) / k as f64));
        }
    }
    Ok(ActionSystem {
        name: format!("covered-cyclic(k={k})"),
        alphabet: Alphabet::cyclic(),
        space: Space::CoveredCircle { degree: k },
        maps: alloc::vec![GenMap::single(Step::Lift(Arc::new(up))), GenMap::single(Step::Lift(Arc::new(down)))],
        limit: LimitSet::Finite(pts),
    })
}

/// Isometric arcs `(start, len)` per letter: where that letter's map expands.
pub fn isometric_arcs(mats: &[Mat2]) -> Vec<Option<(f64, f64)>> {
    mats.iter().map(maps::isometric_arc).collect()
}

fn arcs_overlap(a: (f64, f64), b: (f64, f64)) -> bool {
    let inside = |t: f64, arc: (f64, f64)| num::modulo(t - arc.0, TAU) < arc.1;
    inside(a.0, b) || inside(b.0, a)
}

/// Schottky group from generator matrices, validated by ping-pong on isometric arcs.
pub fn make_schottky(gens: &[Mat2]) -> Result<ActionSystem> {
    make_schottky_with(gens, 6)
}

/// As [`make_schottky`], with the period bound of the snapping pool.
pub fn make_schottky_with(gens: &[Mat2], max_period: usize) -> Result<ActionSystem> {
    if gens.is_empty() {
        return Err(Error::Parameter("no generators".into()));
    }
    let mut mats = Vec::new();
    for g in gens {
        let g = g.normalized();
        if g.trace().abs() <= 2.0 {
            return Err(Error::PingPong("generator is not hyperbolic".into()));
        }
        mats.push(g);
        mats.push(g.inverse());
    }
    let arcs = isometric_arcs(&mats);
    for (i, a) in arcs.iter().enumerate() {
        let Some(a) = a else {
            return Err(Error::PingPong(format!("letter {} has no isometric arc", Letter(i as u16))));
        };
        for (j, b) in arcs.iter().enumerate().skip(i + 1) {
            if let Some(b) = b {
                if arcs_overlap(*a, *b) {
                    return Err(Error::PingPong(format!(
                        "arcs of {} and {} overlap",
                        Letter(i as u16),
                        Letter(j as u16)
                    )));
                }
            }
        }
    }
    let rank = gens.len();
    let limit = if rank == 1 {
        let (a, r) = maps::fixed_angles(&mats[0]).ok_or_else(|| Error::PingPong("not hyperbolic".into()))?;
        LimitSet::Finite(alloc::vec![Point::Angle(r), Point::Angle(a)])
    } else {
        LimitSet::Schottky(Arc::new(SchottkyLimit::new(mats.clone(), max_period)))
    };
    Ok(ActionSystem {
        name: format!("schottky(rank={rank})"),
        alphabet: if rank == 1 { Alphabet::cyclic() } else { Alphabet::free(rank) },
        space: Space::Circle,
        maps: mats.iter().map(|m| GenMap::single(Step::Mobius(*m))).collect(),
        limit,
    })
}

/// Symmetric rank-`rank` Schottky generators: conjugates of `[[c, s], [s, c]]`,
/// `c = cosh t`, by rotations spreading the axes evenly.
pub fn symmetric_schottky_generators(rank: usize, cosh_t: f64) -> Vec<Mat2> {
    let s = num::sqrt(cosh_t * cosh_t - 1.0);
    let base = Mat2::new(cosh_t, s, s, cosh_t);
    (0..rank)
        .map(|j| {
            let r = Mat2::rotation(PI / 2.0 * j as f64 / rank as f64);
            r.mul(&base).mul(&r.inverse())
        })
        .collect()
}

/// The default rank-2 Schottky system.
pub fn default_schottky() -> ActionSystem {
    make_schottky(&symmetric_schottky_generators(2, 1.6)).expect("default generators play ping-pong")
}

/// Isometric arcs of a Schottky system shrunk by `fraction` of their length at each end.
pub fn schottky_regions(system: &ActionSystem, fraction: f64) -> Vec<(Letter, f64, f64)> {
    let mut out = Vec::new();
    for l in system.letters() {
        let Some(m) = circle_matrix(system, l) else { continue };
        if let Some((s, len)) = maps::isometric_arc(&m) {
            out.push((l.inv(), s + fraction * len, len * (1.0 - 2.0 * fraction)));
        }
    }
    out
}

/// Free group of rank `k` on its boundary with visual parameter `a`.
pub fn make_free_boundary(k: usize, a: f64) -> Result<ActionSystem> {
    if k < 2 || !(a > 1.0 && a <= 2.0) {
        return Err(Error::Parameter(format!("need k >= 2 and 1 < a <= 2, got k={k}, a={a}")));
    }
    let maps = (0..2 * k)
        .map(|i| GenMap::single(Step::Shift { letter: Letter(i as u16), a }))
        .collect();
    Ok(ActionSystem {
        name: format!("free-boundary(k={k},a={a})"),
        alphabet: Alphabet::free(k),
        space: Space::FreeBoundary { rank: k, a },
        maps,
        limit: LimitSet::FreeBoundary { rank: k, depth: tol::BOUNDARY_DEPTH },
    })
}

/// ℤⁿ acting on Pⁿ(ℝ) by bi-proximal diagonal matrices.
pub fn make_zn_projective(diagonals: &[Vec<f64>]) -> Result<ActionSystem> {
    let n = diagonals.len();
    if n == 0 {
        return Err(Error::Parameter("no generators".into()));
    }
    for (j, d) in diagonals.iter().enumerate() {
        if d.len() != n + 1 {
            return Err(Error::Parameter(format!("diagonal {j} needs {} entries", n + 1)));
        }
        let m: Vec<f64> = d.iter().map(|x| x.abs()).collect();
        let top = m[0];
        let bottom = m[j + 1];
        let ok = m.iter().enumerate().all(|(i, v)| i == 0 || *v < top)
            && m.iter().enumerate().all(|(i, v)| i == j + 1 || *v > bottom);
        if !ok {
            return Err(Error::Parameter(format!("diagonal {j} is not bi-proximal")));
        }
    }
    let mut maps = Vec::new();
    for d in diagonals {
        let g = MatN::diagonal(d);
        let inv = MatN::diagonal(&d.iter().map(|x| 1.0 / x).collect::<Vec<_>>());
        maps.push(GenMap::single(Step::Linear(g)));
        maps.push(GenMap::single(Step::Linear(inv)));
    }
    let pts = (0..=n)
        .map(|i| {
            let mut e = alloc::vec![0.0; n + 1];
            e[i] = 1.0;
            Point::Line(e)
        })
        .collect();
    Ok(ActionSystem {
        name: format!("zn-projective(n={n})"),
        alphabet: Alphabet::free_abelian(n),
        space: Space::Projective { n },
        maps,
        limit: LimitSet::Finite(pts),
    })
}

fn free_rank(system: &ActionSystem) -> Result<usize> {
    match system.alphabet.kind {
        Presentation::Free { rank } => Ok(rank),
        Presentation::Cyclic => Ok(1),
        _ => Err(Error::Unsupported("product components must be free or cyclic".into())),
    }
}

/// `Γ₁ × Γ₂` acting on the disjoint union, each factor on its own component.
pub fn make_product(first: &ActionSystem, second: &ActionSystem, with_swap: bool) -> Result<ActionSystem> {
    for s in [first, second] {
        if !matches!(s.space, Space::Circle | Space::FreeBoundary { .. } | Space::CoveredCircle { .. }) {
            return Err(Error::Unsupported("product components must be circles or boundaries".into()));
        }
    }
    if with_swap && (first.space != second.space || first.maps != second.maps) {
        return Err(Error::Unsupported("swap needs two copies of the same system".into()));
    }
    let (r1, r2) = (free_rank(first)?, free_rank(second)?);
    let mut maps = Vec::new();
    for (part, sys) in [(0usize, first), (1usize, second)] {
        for m in &sys.maps {
            maps.push(GenMap {
                steps: m.steps.iter().map(|s| Step::Part { part, step: Box::new(s.clone()) }).collect(),
            });
        }
    }
    if with_swap {
        maps.push(GenMap::single(Step::Swap));
        maps.push(GenMap::single(Step::Swap));
    }
    Ok(ActionSystem {
        name: format!("product({},{}{})", first.name, second.name, if with_swap { ",swap" } else { "" }),
        alphabet: Alphabet::product(r1, r2, with_swap),
        space: Space::union(alloc::vec![first.space.clone(), second.space.clone()]),
        maps,
        limit: LimitSet::Union(alloc::vec![first.limit.clone(), second.limit.clone()]),
    })
}

/// Component `part` of a product system, as a standalone system.
pub fn component_system(system: &ActionSystem, part: usize) -> Result<ActionSystem> {
    let (Presentation::Product { left, right, .. }, Space::DisjointUnion { parts, .. }, LimitSet::Union(limits)) =
        (&system.alphabet.kind, &system.space, &system.limit)
    else {
        return Err(Error::Unsupported("not a product system".into()));
    };
    let (offset, rank) = match part {
        0 => (0, *left),
        1 => (*left, *right),
        _ => return Err(Error::Parameter(format!("no component {part}"))),
    };
    let mut maps = Vec::new();
    for m in &system.maps[2 * offset..2 * (offset + rank)] {
        let mut steps = Vec::new();
        for s in &m.steps {
            let Step::Part { step, .. } = s else {
                return Err(Error::Unsupported("component map is not local".into()));
            };
            steps.push((**step).clone());
        }
        maps.push(GenMap { steps });
    }
    Ok(ActionSystem {
        name: format!("{}[{part}]", system.name),
        alphabet: if rank == 1 { Alphabet::cyclic() } else { Alphabet::free(rank) },
        space: parts[part].clone(),
        maps,
        limit: limits[part].clone(),
    })
}
