//! Finite nets of limit sets and exact snapping where Λ is known.

use alloc::sync::Arc;
use alloc::vec::Vec;

use super::maps::{fixed_angles, mobius_apply};
use crate::geometry::{Point, Space};
use crate::groups::Letter;
use crate::num::{self, Mat2, TAU};
use crate::tol;

/// Λ of a Schottky group: letter matrices and a sorted pool of exactly computed points
/// (periodic points and the preperiodic points of the default net).
#[derive(Clone, Debug, PartialEq)]
pub struct SchottkyLimit {
    pub mats: Vec<Mat2>,
    pub attracting: Vec<f64>,
    pub pool: Vec<f64>,
}

/// Reduced words of a given length over `2·rank` letters, in lexicographic order.
pub fn reduced_words(rank: usize, len: usize) -> Vec<Vec<Letter>> {
    let mut out: Vec<Vec<Letter>> = alloc::vec![Vec::new()];
    for _ in 0..len {
        let mut next = Vec::with_capacity(out.len() * (2 * rank).max(1));
        for w in &out {
            for l in 0..2 * rank {
                let l = Letter(l as u16);
                if w.last() == Some(&l.inv()) {
                    continue;
                }
                let mut v = w.clone();
                v.push(l);
                next.push(v);
            }
        }
        out = next;
    }
    out
}

/// Reduced words whose first letter is not inverse to their last.
pub fn cyclically_reduced_words(rank: usize, len: usize) -> Vec<Vec<Letter>> {
    reduced_words(rank, len)
        .into_iter()
        .filter(|w| w.is_empty() || w[0] != w[w.len() - 1].inv() || w.len() == 1)
        .collect()
}

impl SchottkyLimit {
    pub fn new(mats: Vec<Mat2>, max_period: usize) -> Self {
        let attracting: Vec<f64> = mats.iter().map(|m| fixed_angles(m).map(|f| f.0).unwrap_or(0.0)).collect();
        let rank = mats.len() / 2;
        let mut pool = Vec::new();
        for p in 1..=max_period {
            for w in cyclically_reduced_words(rank, p) {
                let mut m = Mat2::IDENTITY;
                for l in &w {
                    m = m.mul(&mats[l.index()]).normalized();
                }
                if let Some((a, _)) = fixed_angles(&m) {
                    pool.push(a);
                }
            }
        }
        for len in 1..=tol::NET_DEPTH + 1 {
            for w in reduced_words(rank, len) {
                let tail = attracting[w[len - 1].index()];
                let mut t = tail;
                for l in w.iter().rev() {
                    t = mobius_apply(&mats[l.index()], t);
                }
                pool.push(t);
            }
        }
        pool.sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));
        pool.dedup_by(|a, b| (*a - *b).abs() < 1e-13);
        SchottkyLimit { mats, attracting, pool }
    }

    /// `ρ(w)` applied to the attracting fixed point of `tail`.
    pub fn point(&self, w: &[Letter], tail: f64) -> f64 {
        let mut t = tail;
        for l in w.iter().rev() {
            t = mobius_apply(&self.mats[l.index()], t);
        }
        t
    }

    fn snap(&self, t: f64) -> Option<f64> {
        if self.pool.is_empty() {
            return None;
        }
        let i = self.pool.partition_point(|p| *p < t);
        let n = self.pool.len();
        let cands = [self.pool[i % n], self.pool[(i + n - 1) % n]];
        let mut best = None;
        let mut bd = f64::INFINITY;
        for c in cands {
            let u = num::modulo((c - t).abs(), TAU);
            let d = u.min(TAU - u);
            if d < bd {
                bd = d;
                best = Some(c);
            }
        }
        if bd < tol::SNAP {
            best
        } else {
            None
        }
    }
}

/// A description of Λ able to produce finite nets.
#[derive(Clone, Debug, PartialEq)]
pub enum LimitSet {
    /// Finitely many exactly known points.
    Finite(Vec<Point>),
    Schottky(Arc<SchottkyLimit>),
    FreeBoundary { rank: usize, depth: usize },
    Union(Vec<LimitSet>),
    /// Not known in closed form (perturbed systems).
    Unknown,
}

impl LimitSet {
    /// A net indexed by word depth. Finite sets ignore the depth.
    pub fn net(&self, depth: usize) -> Vec<Point> {
        match self {
            LimitSet::Finite(p) => p.clone(),
            LimitSet::Schottky(s) => {
                let rank = s.mats.len() / 2;
                reduced_words(rank, depth.max(1))
                    .iter()
                    .map(|w| Point::Angle(s.point(w, s.attracting[w[w.len() - 1].index()])))
                    .collect()
            }
            LimitSet::FreeBoundary { rank, depth: m } => reduced_words(*rank, depth.max(1))
                .into_iter()
                .map(|mut w| {
                    let last = w[w.len() - 1];
                    while w.len() < *m {
                        w.push(last);
                    }
                    Point::Word(w)
                })
                .collect(),
            LimitSet::Union(parts) => {
                let mut out = Vec::new();
                for (i, p) in parts.iter().enumerate() {
                    out.extend(p.net(depth).into_iter().map(|x| Point::part(i, x)));
                }
                out
            }
            LimitSet::Unknown => Vec::new(),
        }
    }

    /// Periodic points of period `period` (Schottky only; other kinds return their net).
    pub fn periodic_net(&self, period: usize) -> Vec<Point> {
        match self {
            LimitSet::Schottky(s) => {
                let rank = s.mats.len() / 2;
                let mut out = Vec::new();
                for w in cyclically_reduced_words(rank, period) {
                    let mut m = Mat2::IDENTITY;
                    for l in &w {
                        m = m.mul(&s.mats[l.index()]).normalized();
                    }
                    if let Some((a, _)) = fixed_angles(&m) {
                        out.push(Point::Angle(a));
                    }
                }
                out
            }
            _ => self.net(period),
        }
    }

    /// Replace `x` by the exactly known Λ-point within the snapping radius.
    pub fn snap(&self, space: &Space, x: &Point) -> Point {
        match (self, x) {
            (LimitSet::Finite(pts), _) => {
                for p in pts {
                    if space.dist(p, x) < tol::SNAP {
                        return p.clone();
                    }
                }
                x.clone()
            }
            (LimitSet::Schottky(s), Point::Angle(t)) => s.snap(*t).map(Point::Angle).unwrap_or_else(|| x.clone()),
            (LimitSet::Union(parts), Point::Part(i, p)) => {
                let Space::DisjointUnion { parts: spaces, .. } = space else { return x.clone() };
                match (parts.get(*i), spaces.get(*i)) {
                    (Some(l), Some(sp)) => Point::part(*i, l.snap(sp, p)),
                    _ => x.clone(),
                }
            }
            _ => x.clone(),
        }
    }

    /// Exact membership where available.
    pub fn contains(&self, space: &Space, x: &Point) -> Option<bool> {
        match (self, x) {
            (LimitSet::Finite(pts), _) => Some(pts.iter().any(|p| space.dist(p, x) < tol::TOL)),
            (LimitSet::FreeBoundary { .. }, Point::Word(_)) => Some(true),
            (LimitSet::Union(parts), Point::Part(i, p)) => {
                let Space::DisjointUnion { parts: spaces, .. } = space else { return Some(false) };
                parts.get(*i).and_then(|l| l.contains(&spaces[*i], p))
            }
            _ => None,
        }
    }
}

/// Uniformly spread subsample of `n` entries.
pub fn subsample<T: Clone>(v: &[T], n: usize) -> Vec<T> {
    if v.len() <= n {
        return v.to_vec();
    }
    (0..n).map(|i| v[i * v.len() / n].clone()).collect()
}

/// Pseudo-random sample of `n` distinct entries.
pub fn random_sample<T: Clone>(v: &[T], n: usize, seed: u64) -> Vec<T> {
    let mut rng = num::rng(seed);
    let mut idx: Vec<usize> = (0..v.len()).collect();
    let n = n.min(v.len());
    for i in 0..n {
        let j = i + (num::uniform(&mut rng, 0.0, (v.len() - i) as f64) as usize).min(v.len() - i - 1);
        idx.swap(i, j);
    }
    idx[..n].iter().map(|&i| v[i].clone()).collect()
}
