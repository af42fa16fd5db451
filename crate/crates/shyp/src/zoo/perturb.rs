use alloc::format;
use alloc::vec::Vec;

use super::maps::{chart, mobius_apply, unchart, Bump, GenMap, Step};
use super::{ActionSystem, LimitSet};
use crate::geometry::{Point, Space};
use crate::num::{self, Mat2, MatN};
use crate::{Error, Result};

/// Families of perturbed generator maps.
#[derive(Clone, Debug, PartialEq)]
pub enum Perturbation {
    /// Uniform noise of the given magnitude on matrix entries, then renormalized.
    MatrixJitter { magnitude: f64, seed: u64 },
    /// Post-compose each generator with a bump; one entry is reused for all generators.
    BumpCompose(Vec<Bump>),
    /// Conjugate by the translation `x ↦ x + t` of the real chart.
    Translate(f64),
}

fn jitter_mat2(m: &Mat2, magnitude: f64, rng: &mut rand_chacha::ChaCha8Rng) -> Mat2 {
    let mut r = m.0;
    for row in r.iter_mut() {
        for v in row.iter_mut() {
            *v += num::uniform(rng, -magnitude, magnitude);
        }
    }
    Mat2(r).normalized()
}

fn jitter_matn(m: &MatN, magnitude: f64, rng: &mut rand_chacha::ChaCha8Rng) -> MatN {
    let mut out = m.clone();
    for v in out.data.iter_mut() {
        *v += num::uniform(rng, -magnitude, magnitude);
    }
    let d = out.det().abs();
    let s = num::pow(d, -1.0 / out.n as f64);
    for v in out.data.iter_mut() {
        *v *= s;
    }
    out
}

/// Perturbed copy of `system`. Λ of the result is unknown unless the family is a conjugacy.
pub fn perturb(system: &ActionSystem, family: &Perturbation) -> Result<ActionSystem> {
    let mut out = system.clone();
    out.limit = LimitSet::Unknown;
    let rank = system.alphabet.rank();
    match family {
        Perturbation::MatrixJitter { magnitude, seed } => {
            if !(*magnitude >= 0.0) {
                return Err(Error::Parameter("jitter magnitude must be nonnegative".into()));
            }
            out.name = format!("{}+jitter({magnitude},{seed})", system.name);
            if *magnitude == 0.0 {
                out.limit = system.limit.clone();
                return Ok(out);
            }
            let mut rng = num::rng(*seed);
            for g in 0..rank {
                let (fwd, inv) = match system.maps[2 * g].steps.as_slice() {
                    [Step::Mobius(m)] => {
                        let j = jitter_mat2(m, *magnitude, &mut rng);
                        (Step::Mobius(j), Step::Mobius(j.inverse()))
                    }
                    [Step::Linear(m)] => {
                        let j = jitter_matn(m, *magnitude, &mut rng);
                        let ji = j.inverse().ok_or_else(|| Error::Parameter("singular jitter".into()))?;
                        (Step::Linear(j), Step::Linear(ji))
                    }
                    _ => return Err(Error::Unsupported("jitter needs matrix generators".into())),
                };
                out.maps[2 * g] = GenMap::single(fwd);
                out.maps[2 * g + 1] = GenMap::single(inv);
            }
        }
        Perturbation::BumpCompose(bumps) => {
            if bumps.is_empty() {
                return Err(Error::Parameter("no bumps".into()));
            }
            if !matches!(system.space, Space::Circle | Space::CoveredCircle { .. }) {
                return Err(Error::Unsupported("bumps act on circles".into()));
            }
            out.name = format!("{}+bump", system.name);
            for g in 0..rank {
                let b = bumps[g.min(bumps.len() - 1)];
                let b = Bump::new(b.center, b.width, b.height)?;
                let mut fwd = system.maps[2 * g].steps.clone();
                fwd.push(Step::Bump(b));
                let mut inv = alloc::vec![Step::BumpInverse(b)];
                inv.extend(system.maps[2 * g + 1].steps.iter().cloned());
                out.maps[2 * g] = GenMap { steps: fwd };
                out.maps[2 * g + 1] = GenMap { steps: inv };
            }
        }
        Perturbation::Translate(t) => {
            let tr = Mat2::new(1.0, 0.0, *t, 1.0);
            let ti = tr.inverse();
            out.name = format!("{}+translate({t})", system.name);
            for (i, m) in system.maps.iter().enumerate() {
                let [Step::Mobius(a)] = m.steps.as_slice() else {
                    return Err(Error::Unsupported("translation needs Möbius generators".into()));
                };
                out.maps[i] = GenMap::single(Step::Mobius(tr.mul(a).mul(&ti)));
            }
            if let LimitSet::Finite(pts) = &system.limit {
                let moved = pts
                    .iter()
                    .map(|p| match p {
                        Point::Angle(a) => Point::Angle(chart(unchart(*a) + t)),
                        q => q.clone(),
                    })
                    .collect();
                out.limit = LimitSet::Finite(moved);
            }
        }
    }
    Ok(out)
}

/// Sampled `d_Lip,K(f, g)` over a finite net of `K` with at least two points.
pub fn lipschitz_sample(space: &Space, f: &GenMap, g: &GenMap, net: &[Point]) -> Result<f64> {
    if net.len() < 2 {
        return Err(Error::Parameter("Lipschitz distance needs at least two net points".into()));
    }
    let fx: Vec<Point> = net.iter().map(|x| f.apply(x)).collect();
    let gx: Vec<Point> = net.iter().map(|x| g.apply(x)).collect();
    let mut sup0: f64 = 0.0;
    for (a, b) in fx.iter().zip(&gx) {
        sup0 = sup0.max(space.dist(a, b));
    }
    let mut sup1: f64 = 0.0;
    for i in 0..net.len() {
        for j in i + 1..net.len() {
            let d = space.dist(&net[i], &net[j]);
            if d <= 0.0 {
                continue;
            }
            let q = (space.dist(&fx[i], &fx[j]) - space.dist(&gx[i], &gx[j])).abs() / d;
            sup1 = sup1.max(q);
        }
    }
    Ok(sup0 + sup1)
}

/// Chart coordinate image, used by closed-form oracles.
pub fn mobius_real(m: &Mat2, x: f64) -> f64 {
    unchart(mobius_apply(m, chart(x)))
}
