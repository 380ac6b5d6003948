//! Subgroups `H < GL2(Z/N)` and classes of level structures.
//!
//! A level structure on a curve with stored basis `(P, Q)` of `E[N]` is the
//! matrix `M` whose columns are the coordinates of `phi(e1)` and `phi(e2)`.
//! Precomposition `phi o h` is `M h`, an automorphism `u` acts as `U M`.
//! Matrices are `[a, b, c, d]` for `(a b; c d)` and are indexed by
//! `a N^3 + b N^2 + c N + d`.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{crt, factorize, gcd, inv_mod, legendre};

pub type Mat = [u32; 4];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LevelError {
    #[error("matrix {0:?} is not invertible mod {1}")]
    NotInvertible(Mat, u32),
    #[error("family {family} is not supported for N = {n}")]
    Unsupported { family: String, n: u32 },
    #[error("level {0} too large for the explicit element set")]
    TooLarge(u32),
    #[error("{0} is not in the normalizer of H")]
    NotInNormalizer(String),
    #[error("H is not of the form H' x B0(q^e) for q = {0}")]
    NotProductForm(u32),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Trivial,
    Borel,
    Full,
    SplitCartan,
    NonsplitCartan,
    TorsionPoint,
}

impl Family {
    pub fn parse(s: &str) -> Option<Family> {
        Some(match s {
            "trivial" => Family::Trivial,
            "borel" => Family::Borel,
            "full" => Family::Full,
            "split_cartan" | "split-cartan" => Family::SplitCartan,
            "nonsplit_cartan" | "nonsplit-cartan" => Family::NonsplitCartan,
            "torsion_point" | "torsion-point" => Family::TorsionPoint,
            _ => return None,
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Family::Trivial => "trivial",
            Family::Borel => "borel",
            Family::Full => "full",
            Family::SplitCartan => "split_cartan",
            Family::NonsplitCartan => "nonsplit_cartan",
            Family::TorsionPoint => "torsion_point",
        }
    }
}

/// Arithmetic in `M_2(Z/N)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Gl2 {
    pub n: u32,
}

impl Gl2 {
    pub fn new(n: u32) -> Self {
        Gl2 { n }
    }

    pub fn reduce(&self, m: [i64; 4]) -> Mat {
        let n = self.n as i64;
        m.map(|x| x.rem_euclid(n) as u32)
    }

    pub fn mul(&self, x: &Mat, y: &Mat) -> Mat {
        let n = self.n as u64;
        let [a, b, c, d] = x.map(|v| v as u64);
        let [e, f, g, h] = y.map(|v| v as u64);
        [
            ((a * e + b * g) % n) as u32,
            ((a * f + b * h) % n) as u32,
            ((c * e + d * g) % n) as u32,
            ((c * f + d * h) % n) as u32,
        ]
    }

    pub fn det(&self, m: &Mat) -> u32 {
        let n = self.n as i64;
        let [a, b, c, d] = m.map(|v| v as i64);
        (a * d - b * c).rem_euclid(n) as u32
    }

    pub fn is_invertible(&self, m: &Mat) -> bool {
        gcd(self.det(m) as u64, self.n as u64) == 1
    }

    pub fn inv(&self, m: &Mat) -> Option<Mat> {
        let di = inv_mod(self.det(m) as u64, self.n as u64)? as i64;
        let [a, b, c, d] = m.map(|v| v as i64);
        Some(self.reduce([d * di, -b * di, -c * di, a * di]))
    }

    pub fn scalar(&self, s: u64) -> Mat {
        let s = (s % self.n as u64) as u32;
        [s, 0, 0, s]
    }

    pub fn identity(&self) -> Mat {
        self.scalar(1)
    }

    pub fn index(&self, m: &Mat) -> usize {
        let n = self.n as usize;
        ((m[0] as usize * n + m[1] as usize) * n + m[2] as usize) * n + m[3] as usize
    }

    pub fn from_index(&self, mut i: usize) -> Mat {
        let n = self.n as usize;
        let d = (i % n) as u32;
        i /= n;
        let c = (i % n) as u32;
        i /= n;
        let b = (i % n) as u32;
        i /= n;
        [(i % n) as u32, b, c, d]
    }

    pub fn size(&self) -> usize {
        (self.n as usize).pow(4)
    }

    /// All invertible matrices, in index order.
    pub fn elements(&self) -> Vec<Mat> {
        (0..self.size())
            .map(|i| self.from_index(i))
            .filter(|m| self.is_invertible(m))
            .collect()
    }

    pub fn reduce_mod(&self, m: &Mat, q: u32) -> Mat {
        m.map(|x| x % q)
    }
}

/// `|GL2(Z/N)| = N^4 prod_{q | N} (1 - 1/q)(1 - 1/q^2)`.
pub fn gl2_order(n: u32) -> u64 {
    let mut out = (n as u64).pow(4);
    for (q, _) in factorize(n as u64) {
        out = out / q * (q - 1);
        out = out / (q * q) * (q * q - 1);
    }
    out
}

/// The cyclic structure of `ell` relative to `H`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KInfo {
    /// Order of `ell` in `(Z/N)^x / det H`.
    pub k: u32,
    /// Least `t >= 1` with `ell^t Id` in `H`.
    pub k_prime: u32,
    /// Least `t >= 1` with `ell^t Id` or `-ell^t Id` in `H`.
    pub k_prime_pm: u32,
}

#[derive(Clone, Debug)]
pub struct LevelSubgroup {
    pub n: u32,
    pub generators: Vec<Mat>,
    /// Sorted by index.
    pub elements: Vec<Mat>,
    member: Vec<bool>,
    /// `det H` as a sorted list of units.
    pub det_subgroup: Vec<u32>,
    det_member: Vec<bool>,
    pub family: Option<Family>,
}

/// Practical cap on the level (the explicit element set has `N^4` slots).
pub const MAX_LEVEL: u32 = 64;

impl LevelSubgroup {
    /// Closure of the generators under multiplication (finite group, so
    /// this also gives inverses). No generators gives `{Id}`.
    pub fn from_generators(n: u32, gens: &[Mat]) -> Result<Self, LevelError> {
        if n == 0 || n > MAX_LEVEL {
            return Err(LevelError::TooLarge(n));
        }
        let g = Gl2::new(n);
        let gens: Vec<Mat> = gens.iter().map(|m| m.map(|x| x % n)).collect();
        for m in &gens {
            if !g.is_invertible(m) {
                return Err(LevelError::NotInvertible(*m, n));
            }
        }
        let mut member = vec![false; g.size()];
        let id = g.identity();
        member[g.index(&id)] = true;
        let mut queue = VecDeque::from([id]);
        while let Some(x) = queue.pop_front() {
            for h in &gens {
                let y = g.mul(&x, h);
                let iy = g.index(&y);
                if !member[iy] {
                    member[iy] = true;
                    queue.push_back(y);
                }
            }
        }
        Ok(Self::from_member(n, gens, member, None))
    }

    fn from_member(n: u32, generators: Vec<Mat>, member: Vec<bool>, family: Option<Family>) -> Self {
        let g = Gl2::new(n);
        let elements: Vec<Mat> = member
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| g.from_index(i))
            .collect();
        let mut det_member = vec![false; n as usize];
        for m in &elements {
            det_member[g.det(m) as usize] = true;
        }
        let det_subgroup = (0..n).filter(|&d| det_member[d as usize]).collect();
        LevelSubgroup {
            n,
            generators,
            elements,
            member,
            det_subgroup,
            det_member,
            family,
        }
    }

    /// Subgroup given by a membership predicate on `GL2(Z/N)`, with a small
    /// deterministic generating set recorded.
    fn from_predicate(n: u32, family: Family, pred: impl Fn(&Mat) -> bool) -> Self {
        let g = Gl2::new(n);
        let mut member = vec![false; g.size()];
        for m in g.elements() {
            if pred(&m) {
                member[g.index(&m)] = true;
            }
        }
        let mut h = Self::from_member(n, Vec::new(), member, Some(family));
        h.generators = h.small_generating_set();
        h
    }

    /// Greedy generating set: walk the elements in index order, keeping
    /// those not already generated.
    fn small_generating_set(&self) -> Vec<Mat> {
        let mut gens: Vec<Mat> = Vec::new();
        let mut closure = LevelSubgroup::from_generators(self.n, &[]).unwrap();
        for m in &self.elements {
            if closure.order() == self.order() {
                break;
            }
            if !closure.contains(m) {
                gens.push(*m);
                closure = LevelSubgroup::from_generators(self.n, &gens).unwrap();
            }
        }
        gens
    }

    pub fn named(family: Family, n: u32) -> Result<Self, LevelError> {
        if n == 0 || n > MAX_LEVEL {
            return Err(LevelError::TooLarge(n));
        }
        let unsupported = || LevelError::Unsupported { family: family.name().into(), n };
        Ok(match family {
            Family::Trivial => Self::from_predicate(n, family, |_| true),
            Family::Full => Self::from_predicate(n, family, |m| *m == Gl2::new(n).identity()),
            Family::Borel => Self::from_predicate(n, family, |m| m[1] == 0),
            Family::SplitCartan => Self::from_predicate(n, family, |m| m[1] == 0 && m[2] == 0),
            Family::TorsionPoint => {
                Self::from_predicate(n, family, |m| m[1] == 0 && m[3] == 1 % n)
            }
            Family::NonsplitCartan => {
                if n < 2 {
                    return Err(unsupported());
                }
                let parts: Vec<(u32, u32, i64)> = factorize(n as u64)
                    .into_iter()
                    .map(|(q, e)| {
                        let qe = q.pow(e) as u32;
                        let eps = if q == 2 {
                            0
                        } else {
                            (2..q as i64).find(|&x| legendre(x, q) == -1).unwrap()
                        };
                        (q as u32, qe, eps)
                    })
                    .collect();
                Self::from_predicate(n, family, |m| {
                    parts.iter().all(|&(q, qe, eps)| {
                        let [a, b, c, d] = m.map(|x| (x % qe) as i64);
                        let qe = qe as i64;
                        if q == 2 {
                            // Multiplication by a + b w on Z[w]/2^e, w^2 + w + 1 = 0.
                            b == (-c).rem_euclid(qe) && d == (a - c).rem_euclid(qe)
                        } else {
                            d == a && b == (eps * c).rem_euclid(qe)
                        }
                    })
                })
            }
        })
    }

    /// The seven generators mod 8 of the index-8 subgroup of the worked
    /// example with two components.
    pub fn figure_one() -> Self {
        const GENS: [Mat; 7] = [
            [5, 6, 2, 1],
            [1, 2, 0, 1],
            [7, 0, 2, 7],
            [5, 0, 0, 5],
            [2, 7, 7, 1],
            [1, 4, 0, 1],
            [1, 0, 4, 1],
        ];
        Self::from_generators(8, &GENS).expect("generators are invertible")
    }

    pub fn gl2(&self) -> Gl2 {
        Gl2::new(self.n)
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn index_in_gl2(&self) -> u64 {
        gl2_order(self.n) / self.order() as u64
    }

    pub fn contains(&self, m: &Mat) -> bool {
        self.member[self.gl2().index(m)]
    }

    pub fn det_contains(&self, d: u64) -> bool {
        self.det_member[(d % self.n as u64) as usize]
    }

    pub fn contains_minus_one(&self) -> bool {
        self.contains(&self.gl2().scalar(self.n as u64 - 1))
    }

    pub fn contains_scalars(&self) -> bool {
        let g = self.gl2();
        (0..self.n as u64)
            .filter(|&s| gcd(s, self.n as u64) == 1)
            .all(|s| self.contains(&g.scalar(s)))
    }

    pub fn det_is_everything(&self) -> bool {
        (0..self.n as u64)
            .filter(|&s| gcd(s, self.n as u64) == 1)
            .all(|s| self.det_contains(s))
    }

    /// `g` normalizes `H` iff `g h g^-1` lies in `H` for every generator
    /// (conjugation is injective, so inclusion forces equality).
    pub fn normalizes(&self, g: &Mat) -> bool {
        let gl = self.gl2();
        let Some(gi) = gl.inv(g) else { return false };
        let gens: &[Mat] = if self.generators.is_empty() {
            &self.elements
        } else {
            &self.generators
        };
        gens.iter().all(|h| self.contains(&gl.mul(&gl.mul(g, h), &gi)))
    }

    pub fn normalizer(&self) -> Vec<Mat> {
        self.gl2().elements().into_iter().filter(|g| self.normalizes(g)).collect()
    }

    /// `k`, `k'` and `k'_pm` for the isogeny degree `ell` (a unit mod N).
    pub fn k_info(&self, ell: u64) -> KInfo {
        let n = self.n as u64;
        assert_eq!(gcd(ell, n), 1, "ell must be a unit mod N");
        if n == 1 {
            return KInfo { k: 1, k_prime: 1, k_prime_pm: 1 };
        }
        let g = self.gl2();
        let mut t = 1;
        let mut x = ell % n;
        while !self.det_contains(x) {
            x = x * ell % n;
            t += 1;
        }
        let k = t;
        let mut t = 1;
        let mut x = ell % n;
        while !self.contains(&g.scalar(x)) {
            x = x * ell % n;
            t += 1;
        }
        let k_prime = t;
        let mut t = 1;
        let mut x = ell % n;
        while !self.contains(&g.scalar(x)) && !self.contains(&g.scalar(n - x)) {
            x = x * ell % n;
            t += 1;
        }
        KInfo { k, k_prime, k_prime_pm: t }
    }

    /// Minimal representative of the class of the unit `e` in
    /// `(Z/N)^x / det H`.
    pub fn weil_class(&self, e: u64) -> u32 {
        let n = self.n as u64;
        if n == 1 {
            return 0;
        }
        self.det_subgroup
            .iter()
            .map(|&d| (e * d as u64 % n) as u32)
            .min()
            .unwrap()
    }

    /// Representatives of `R_H = (Z/N)^x / det H`, sorted.
    pub fn weil_classes(&self) -> Vec<u32> {
        let n = self.n as u64;
        if n == 1 {
            return vec![0];
        }
        let mut out: Vec<u32> = (1..n)
            .filter(|&e| gcd(e, n) == 1)
            .map(|e| self.weil_class(e))
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Decomposition `H = H' x B0(q^e)` at the prime `q`: returns
    /// `(N', q^e)` when `H` is exactly the set of matrices that are in its
    /// own image mod `N'` and lower triangular mod `q^e`.
    pub fn borel_factor(&self, q: u32) -> Result<(u32, u32), LevelError> {
        let qe = factorize(self.n as u64)
            .into_iter()
            .find(|&(r, _)| r == q as u64)
            .map(|(r, e)| r.pow(e) as u32)
            .ok_or(LevelError::NotProductForm(q))?;
        let m = self.n / qe;
        if self.elements.iter().any(|h| h[1] % qe != 0) {
            return Err(LevelError::NotProductForm(q));
        }
        let mut image = std::collections::HashSet::new();
        for h in &self.elements {
            image.insert(h.map(|x| x % m));
        }
        let borel_order = gl2_order(qe) / (qe as u64 + qe as u64 / q as u64);
        if image.len() as u64 * borel_order != self.order() as u64 {
            return Err(LevelError::NotProductForm(q));
        }
        Ok((m, qe))
    }
}

/// Canonical representative of the class of `m` under `U m h`, for `U` in
/// the automorphism matrices and `h` in `H`: the minimal index in the orbit.
pub fn canonical_class(aut_mats: &[Mat], m: &Mat, h: &LevelSubgroup) -> Mat {
    let g = h.gl2();
    let mut best = *m;
    let mut best_idx = g.index(m);
    for u in aut_mats {
        let um = g.mul(u, m);
        for x in &h.elements {
            let y = g.mul(&um, x);
            let iy = g.index(&y);
            if iy < best_idx {
                best_idx = iy;
                best = y;
            }
        }
    }
    best
}

/// `#{u : m^-1 U m in H}`.
pub fn aut_of_pair(aut_mats: &[Mat], m: &Mat, h: &LevelSubgroup) -> u32 {
    let g = h.gl2();
    let mi = g.inv(m).expect("level structure is invertible");
    aut_mats
        .iter()
        .filter(|u| h.contains(&g.mul(&g.mul(&mi, u), m)))
        .count() as u32
}

/// Builds the matrix mod `n` whose reductions mod the coprime factors are
/// the given matrices.
pub fn crt_matrix(parts: &[(Mat, u32)]) -> Mat {
    let mut out = [0u32; 4];
    for (i, slot) in out.iter_mut().enumerate() {
        let rs: Vec<(u64, u64)> = parts.iter().map(|(m, q)| (m[i] as u64, *q as u64)).collect();
        *slot = crt(&rs).0 as u32;
    }
    out
}
