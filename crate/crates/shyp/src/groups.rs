//! Words over symmetric generating sets, word metrics and boundary prefixes.

use alloc::collections::BTreeSet;
use alloc::collections::VecDeque;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::{Error, Result};

/// A generator or its formal inverse. Generator `g` is `2g`, its inverse `2g + 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Letter(pub u16);

impl Letter {
    pub fn new(generator: usize, inverse: bool) -> Self {
        Letter((generator as u16) << 1 | inverse as u16)
    }
    pub fn generator(self) -> usize {
        (self.0 >> 1) as usize
    }
    pub fn is_inverse(self) -> bool {
        self.0 & 1 == 1
    }
    pub fn inv(self) -> Self {
        Letter(self.0 ^ 1)
    }
    pub fn index(self) -> usize {
        self.0 as usize
    }
    /// `a` for the first generator, `A` for its inverse.
    pub fn to_char(self) -> char {
        let c = (b'a' + self.generator() as u8) as char;
        if self.is_inverse() {
            c.to_ascii_uppercase()
        } else {
            c
        }
    }
    pub fn from_char(c: char) -> Option<Self> {
        if !c.is_ascii_alphabetic() {
            return None;
        }
        let g = c.to_ascii_lowercase() as u8 - b'a';
        Some(Letter::new(g as usize, c.is_ascii_uppercase()))
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_char())
    }
}

/// How words are reduced and measured.
#[derive(Clone, Debug, PartialEq)]
pub enum Presentation {
    Free { rank: usize },
    FreeAbelian { rank: usize },
    Cyclic,
    /// `Γ₁ × Γ₂` of two free groups, optionally extended by the swap.
    Product { left: usize, right: usize, swap: bool },
    /// Free reduction only; distances are found by breadth-first search.
    Generic { rank: usize },
}

/// A symmetric generating set together with its presentation kind.
#[derive(Clone, Debug, PartialEq)]
pub struct Alphabet {
    pub kind: Presentation,
}

/// Canonical group element.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Word {
    Free(Vec<Letter>),
    Abelian(Vec<i64>),
    Cyclic(i64),
    /// `(u, v)·σ^swap` with component words in their own letters.
    Product { left: Vec<Letter>, right: Vec<Letter>, swap: bool },
}

/// Word distance, exact or beyond the search radius.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Distance {
    Exact(usize),
    Unknown { cap: usize },
}

impl Distance {
    pub fn exact(self) -> Option<usize> {
        match self {
            Distance::Exact(d) => Some(d),
            Distance::Unknown { .. } => None,
        }
    }
}

/// Stabilized prefix of a ray in a free or cyclic group.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct BoundaryWord {
    pub prefix: Vec<Letter>,
    pub depth: usize,
    pub stabilized: bool,
}

impl BoundaryWord {
    pub fn to_string_letters(&self) -> String {
        self.prefix.iter().map(|l| l.to_char()).collect()
    }
}

/// Append a letter with free cancellation.
pub fn push_reduced(w: &mut Vec<Letter>, l: Letter) {
    if w.last() == Some(&l.inv()) {
        w.pop();
    } else {
        w.push(l);
    }
}

pub fn free_reduce(letters: &[Letter]) -> Vec<Letter> {
    let mut w = Vec::with_capacity(letters.len());
    for &l in letters {
        push_reduced(&mut w, l);
    }
    w
}

fn free_mul(u: &[Letter], v: &[Letter]) -> Vec<Letter> {
    let mut w = u.to_vec();
    for &l in v {
        push_reduced(&mut w, l);
    }
    w
}

fn free_inv(u: &[Letter]) -> Vec<Letter> {
    u.iter().rev().map(|l| l.inv()).collect()
}

impl Alphabet {
    pub fn free(rank: usize) -> Self {
        Alphabet { kind: Presentation::Free { rank } }
    }
    pub fn free_abelian(rank: usize) -> Self {
        Alphabet { kind: Presentation::FreeAbelian { rank } }
    }
    pub fn cyclic() -> Self {
        Alphabet { kind: Presentation::Cyclic }
    }
    pub fn product(left: usize, right: usize, swap: bool) -> Self {
        Alphabet { kind: Presentation::Product { left, right, swap } }
    }
    pub fn generic(rank: usize) -> Self {
        Alphabet { kind: Presentation::Generic { rank } }
    }

    /// Number of generators; the symmetric set has twice as many letters.
    pub fn rank(&self) -> usize {
        match self.kind {
            Presentation::Free { rank }
            | Presentation::FreeAbelian { rank }
            | Presentation::Generic { rank } => rank,
            Presentation::Cyclic => 1,
            Presentation::Product { left, right, swap } => left + right + swap as usize,
        }
    }

    pub fn letters(&self) -> Vec<Letter> {
        (0..2 * self.rank()).map(|i| Letter(i as u16)).collect()
    }

    pub fn contains(&self, l: Letter) -> bool {
        l.generator() < self.rank()
    }

    /// The swap generator of a product, if present.
    pub fn swap_generator(&self) -> Option<usize> {
        match self.kind {
            Presentation::Product { left, right, swap: true } => Some(left + right),
            _ => None,
        }
    }

    pub fn identity(&self) -> Word {
        match self.kind {
            Presentation::Free { .. } | Presentation::Generic { .. } => Word::Free(Vec::new()),
            Presentation::FreeAbelian { rank } => Word::Abelian(alloc::vec![0; rank]),
            Presentation::Cyclic => Word::Cyclic(0),
            Presentation::Product { .. } => Word::Product {
                left: Vec::new(),
                right: Vec::new(),
                swap: false,
            },
        }
    }

    pub fn letter(&self, l: Letter) -> Result<Word> {
        if !self.contains(l) {
            return Err(Error::AlphabetMismatch);
        }
        Ok(match self.kind {
            Presentation::Free { .. } | Presentation::Generic { .. } => Word::Free(alloc::vec![l]),
            Presentation::FreeAbelian { rank } => {
                let mut v = alloc::vec![0; rank];
                v[l.generator()] = if l.is_inverse() { -1 } else { 1 };
                Word::Abelian(v)
            }
            Presentation::Cyclic => Word::Cyclic(if l.is_inverse() { -1 } else { 1 }),
            Presentation::Product { left, right, .. } => {
                let g = l.generator();
                if g < left {
                    Word::Product { left: alloc::vec![l], right: Vec::new(), swap: false }
                } else if g < left + right {
                    let c = Letter::new(g - left, l.is_inverse());
                    Word::Product { left: Vec::new(), right: alloc::vec![c], swap: false }
                } else {
                    Word::Product { left: Vec::new(), right: Vec::new(), swap: true }
                }
            }
        })
    }

    fn check(&self, w: &Word) -> Result<()> {
        let ok = match (&self.kind, w) {
            (Presentation::Free { rank } | Presentation::Generic { rank }, Word::Free(v)) => {
                v.iter().all(|l| l.generator() < *rank)
            }
            (Presentation::FreeAbelian { rank }, Word::Abelian(v)) => v.len() == *rank,
            (Presentation::Cyclic, Word::Cyclic(_)) => true,
            (Presentation::Product { left, right, swap }, Word::Product { left: u, right: v, swap: b }) => {
                u.iter().all(|l| l.generator() < *left)
                    && v.iter().all(|l| l.generator() < *right)
                    && (*swap || !*b)
            }
            _ => false,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::AlphabetMismatch)
        }
    }

    /// Canonical form of `uv`.
    pub fn multiply(&self, u: &Word, v: &Word) -> Result<Word> {
        self.check(u)?;
        self.check(v)?;
        Ok(match (u, v) {
            (Word::Free(a), Word::Free(b)) => Word::Free(free_mul(a, b)),
            (Word::Abelian(a), Word::Abelian(b)) => {
                Word::Abelian(a.iter().zip(b).map(|(x, y)| x + y).collect())
            }
            (Word::Cyclic(a), Word::Cyclic(b)) => Word::Cyclic(a + b),
            (
                Word::Product { left: u1, right: v1, swap: b1 },
                Word::Product { left: u2, right: v2, swap: b2 },
            ) => {
                let (x, y) = if *b1 { (v2, u2) } else { (u2, v2) };
                Word::Product {
                    left: free_mul(u1, x),
                    right: free_mul(v1, y),
                    swap: b1 ^ b2,
                }
            }
            _ => return Err(Error::AlphabetMismatch),
        })
    }

    pub fn inverse(&self, u: &Word) -> Result<Word> {
        self.check(u)?;
        Ok(match u {
            Word::Free(a) => Word::Free(free_inv(a)),
            Word::Abelian(a) => Word::Abelian(a.iter().map(|x| -x).collect()),
            Word::Cyclic(n) => Word::Cyclic(-n),
            Word::Product { left, right, swap } => {
                let (l, r) = (free_inv(left), free_inv(right));
                if *swap {
                    Word::Product { left: r, right: l, swap: true }
                } else {
                    Word::Product { left: l, right: r, swap: false }
                }
            }
        })
    }

    /// Append one letter.
    pub fn push(&self, u: &Word, l: Letter) -> Result<Word> {
        self.multiply(u, &self.letter(l)?)
    }

    /// Word length for kinds where the canonical form realizes it.
    pub fn length(&self, u: &Word) -> Option<usize> {
        match (&self.kind, u) {
            (Presentation::Generic { .. }, _) => None,
            (_, Word::Free(a)) => Some(a.len()),
            (_, Word::Abelian(a)) => Some(a.iter().map(|x| x.unsigned_abs() as usize).sum()),
            (_, Word::Cyclic(n)) => Some(n.unsigned_abs() as usize),
            (_, Word::Product { left, right, swap }) => Some(left.len() + right.len() + *swap as usize),
        }
    }

    /// `|u⁻¹v|_Σ`, by closed form where available and by search otherwise.
    pub fn word_metric(&self, u: &Word, v: &Word, cap: usize) -> Result<Distance> {
        let g = self.multiply(&self.inverse(u)?, v)?;
        match self.length(&g) {
            Some(n) => Ok(Distance::Exact(n)),
            None => Ok(self.bfs_length(&g, cap)),
        }
    }

    /// Breadth-first search for `g` in the Cayley graph up to radius `cap`.
    pub fn bfs_length(&self, g: &Word, cap: usize) -> Distance {
        let id = self.identity();
        if *g == id {
            return Distance::Exact(0);
        }
        let gens: Vec<Word> = self.letters().into_iter().filter_map(|l| self.letter(l).ok()).collect();
        let mut seen = BTreeSet::new();
        seen.insert(id.clone());
        let mut queue = VecDeque::new();
        queue.push_back((id, 0usize));
        while let Some((w, d)) = queue.pop_front() {
            if d == cap {
                continue;
            }
            for s in &gens {
                let Ok(n) = self.multiply(&w, s) else { continue };
                if n == *g {
                    return Distance::Exact(d + 1);
                }
                if seen.insert(n.clone()) {
                    queue.push_back((n, d + 1));
                }
            }
        }
        Distance::Unknown { cap }
    }

    /// Letters of a word in application order (leftmost first).
    pub fn spell(&self, u: &Word) -> Vec<Letter> {
        match u {
            Word::Free(a) => a.clone(),
            Word::Abelian(a) => {
                let mut out = Vec::new();
                for (g, &n) in a.iter().enumerate() {
                    let l = Letter::new(g, n < 0);
                    out.extend(core::iter::repeat(l).take(n.unsigned_abs() as usize));
                }
                out
            }
            Word::Cyclic(n) => {
                let l = Letter::new(0, *n < 0);
                core::iter::repeat(l).take(n.unsigned_abs() as usize).collect()
            }
            Word::Product { left, right, swap } => {
                let off = match self.kind {
                    Presentation::Product { left: k, .. } => k,
                    _ => 0,
                };
                let mut out = left.clone();
                out.extend(right.iter().map(|l| Letter::new(l.generator() + off, l.is_inverse())));
                if *swap {
                    if let Some(g) = self.swap_generator() {
                        out.push(Letter::new(g, false));
                    }
                }
                out
            }
        }
    }

    pub fn format(&self, u: &Word) -> String {
        self.spell(u).iter().map(|l| l.to_char()).collect()
    }

    /// Parse a string over the alphabet (`a`, `A` for `a⁻¹`, ...).
    pub fn parse(&self, s: &str) -> Result<Word> {
        let mut w = self.identity();
        for c in s.chars() {
            let l = Letter::from_char(c).ok_or_else(|| Error::Parse(s.into()))?;
            w = self.push(&w, l).map_err(|_| Error::Parse(s.into()))?;
        }
        Ok(w)
    }

    /// Stabilized reduced prefix of a ray, as a point of the free-group boundary.
    pub fn boundary_prefix(&self, ray: &[Word], depth: usize) -> Result<BoundaryWord> {
        match self.kind {
            Presentation::Free { .. } | Presentation::Cyclic => {}
            _ => return Err(Error::NotHyperbolic),
        }
        if ray.is_empty() {
            return Err(Error::EmptySet);
        }
        let words: Vec<Vec<Letter>> = ray[ray.len() / 2..].iter().map(|w| self.spell(w)).collect();
        let shortest = words.iter().map(|w| w.len()).min().unwrap_or(0);
        let mut k = 0;
        while k < depth && k < shortest && words.iter().all(|w| w[k] == words[0][k]) {
            k += 1;
        }
        let stabilized = k == depth || k == shortest;
        Ok(BoundaryWord { prefix: words[0][..k].to_vec(), depth: k, stabilized })
    }
}
