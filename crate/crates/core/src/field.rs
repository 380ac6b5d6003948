//! Arithmetic in `F_p` and in even-degree extensions `F_{p^{2m}}`.
//!
//! An [`ExtField`] is `F_p[x]/(f)` for a monic irreducible `f` of degree
//! `2m`, chosen as the first irreducible polynomial in a fixed enumeration
//! so that every label derived from field elements is reproducible. The
//! quadratic subfield `F_{p^2}` has its own fixed model (the `m = 1` field)
//! and is embedded through a deterministic root of its modulus.
//!
//! Elements are plain coefficient vectors ([`Fe`]); all operations go
//! through the owning field, which carries the modulus.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use smallvec::SmallVec;
use thiserror::Error;

use crate::arith::{inv_mod, is_prime, prime_divisors};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("characteristic {0} is not supported (need p >= 5 and p < 2^32)")]
    Unsupported(u64),
    #[error("division by zero")]
    DivisionByZero,
    #[error("operands belong to different fields")]
    Mismatch,
    #[error("{n} does not divide the order of the multiplicative group")]
    NoRootOfUnity { n: u64 },
    #[error("element is not in mu_{n}")]
    NotInMuN { n: u64 },
}

/// Coefficient vector of a field element, constant term first.
///
/// The derived ordering is lexicographic starting from the constant term;
/// it is the tie-break order used wherever a deterministic choice between
/// field elements is needed.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Fe(pub SmallVec<[u64; 8]>);

impl Fe {
    pub fn coeffs(&self) -> &[u64] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }
}

impl fmt::Debug for Fe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0.as_slice())
    }
}

/// The prime field `F_p`, validated at construction.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PrimeField {
    p: u64,
}

impl PrimeField {
    pub fn new(p: u64) -> Result<Self, FieldError> {
        if !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        if p < 5 || p >= 1 << 32 {
            return Err(FieldError::Unsupported(p));
        }
        Ok(PrimeField { p })
    }

    pub fn p(&self) -> u64 {
        self.p
    }
}

/// `F_{p^{2m}} = F_p[x]/(f)`.
#[derive(Clone)]
pub struct ExtField {
    p: u64,
    degree: usize,
    /// Monic modulus, low coefficients first, length `degree + 1`.
    modulus: Vec<u64>,
    order: BigUint,
    /// `(x^i)^p` for `i < degree`: Frobenius as a linear map.
    frob_basis: Vec<Fe>,
    /// Quadratic subfield model and the image of its generator.
    quad: Option<Box<ExtField>>,
    quad_gen_image: Fe,
    /// Deterministic search results (non-residues, roots of unity), shared
    /// by clones.
    memo: Arc<Mutex<HashMap<(&'static str, u64), Fe>>>,
}

impl fmt::Debug for ExtField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}^{} mod {:?}", self.p, self.degree, self.modulus)
    }
}

impl PartialEq for ExtField {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.modulus == other.modulus
    }
}

impl ExtField {
    /// Builds `F_{p^{2m}}` with the first irreducible monic modulus in the
    /// enumeration `x^{2m} + sum c_i x^i`, where the coefficient vector is
    /// read as the base-`p` digits of 0, 1, 2, ...
    pub fn build(p: u64, m: usize) -> Result<Self, FieldError> {
        let pf = PrimeField::new(p)?;
        assert!(m >= 1, "extension half-degree must be positive");
        let p = pf.p();
        let degree = 2 * m;
        let modulus = first_irreducible(p, degree);
        let order = BigUint::from(p).pow(degree as u32);
        let mut field = ExtField {
            p,
            degree,
            modulus,
            order,
            frob_basis: Vec::new(),
            quad: None,
            quad_gen_image: Fe(SmallVec::new()),
            memo: Arc::default(),
        };
        let xp = field.pow_u64(&field.gen(), p);
        let mut basis = Vec::with_capacity(degree);
        let mut acc = field.one();
        for _ in 0..degree {
            basis.push(acc.clone());
            acc = field.mul(&acc, &xp);
        }
        field.frob_basis = basis;
        if m == 1 {
            field.quad_gen_image = field.gen();
        } else {
            let quad = ExtField::build(p, 1)?;
            // Root of the quadratic modulus t^2 + c1 t + c0 in the big field:
            // t = (-c1 + sqrt(c1^2 - 4 c0)) / 2, with the sqrt tie rule.
            let c0 = quad.modulus[0];
            let c1 = quad.modulus[1];
            let disc = (c1 as u128 * c1 as u128 + 4 * (p - c0) as u128) % p as u128;
            let r = field
                .sqrt(&field.from_u64(disc as u64))
                .expect("quadratic subfield always splits in an even-degree extension");
            let half = inv_mod(2, p).unwrap();
            let t = field.mul(
                &field.add(&field.from_u64((p - c1) % p), &r),
                &field.from_u64(half),
            );
            field.quad_gen_image = t;
            field.quad = Some(Box::new(quad));
        }
        Ok(field)
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }

    pub fn order(&self) -> &BigUint {
        &self.order
    }

    /// The model of `F_{p^2}` used for labels (this field itself when the
    /// degree is 2).
    pub fn quadratic_subfield(&self) -> &ExtField {
        self.quad.as_deref().unwrap_or(self)
    }

    pub fn zero(&self) -> Fe {
        Fe(SmallVec::from_elem(0, self.degree))
    }

    pub fn one(&self) -> Fe {
        self.from_u64(1)
    }

    /// The class of `x`.
    pub fn gen(&self) -> Fe {
        let mut v = self.zero();
        v.0[1] = 1;
        v
    }

    pub fn from_u64(&self, a: u64) -> Fe {
        let mut v = self.zero();
        v.0[0] = a % self.p;
        v
    }

    pub fn from_i64(&self, a: i64) -> Fe {
        self.from_u64(a.rem_euclid(self.p as i64) as u64)
    }

    pub fn from_coeffs(&self, c: &[u64]) -> Result<Fe, FieldError> {
        if c.len() != self.degree {
            return Err(FieldError::Mismatch);
        }
        Ok(Fe(c.iter().map(|&x| x % self.p).collect()))
    }

    pub fn is_one(&self, a: &Fe) -> bool {
        a.0[0] == 1 && a.0[1..].iter().all(|&c| c == 0)
    }

    pub fn check(&self, a: &Fe) -> Result<(), FieldError> {
        if a.0.len() == self.degree && a.0.iter().all(|&c| c < self.p) {
            Ok(())
        } else {
            Err(FieldError::Mismatch)
        }
    }

    /// Element number `n` in the fixed enumeration (base-`p` digits of `n`
    /// as coefficients).
    pub fn element(&self, mut n: u128) -> Fe {
        let mut v = self.zero();
        for c in v.0.iter_mut() {
            *c = (n % self.p as u128) as u64;
            n /= self.p as u128;
        }
        v
    }

    pub fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> Fe {
        Fe((0..self.degree).map(|_| rng.gen_range(0..self.p)).collect())
    }

    pub fn add(&self, a: &Fe, b: &Fe) -> Fe {
        let p = self.p;
        Fe(a.0
            .iter()
            .zip(b.0.iter())
            .map(|(&x, &y)| {
                let s = x + y;
                if s >= p {
                    s - p
                } else {
                    s
                }
            })
            .collect())
    }

    pub fn sub(&self, a: &Fe, b: &Fe) -> Fe {
        let p = self.p;
        Fe(a.0
            .iter()
            .zip(b.0.iter())
            .map(|(&x, &y)| if x >= y { x - y } else { x + p - y })
            .collect())
    }

    pub fn neg(&self, a: &Fe) -> Fe {
        let p = self.p;
        Fe(a.0.iter().map(|&x| if x == 0 { 0 } else { p - x }).collect())
    }

    pub fn mul_u64(&self, a: &Fe, k: u64) -> Fe {
        let p = self.p;
        let k = k % p;
        Fe(a.0.iter().map(|&x| (x * k) % p).collect())
    }

    pub fn mul(&self, a: &Fe, b: &Fe) -> Fe {
        let d = self.degree;
        let p = self.p;
        let mut prod: SmallVec<[u128; 16]> = SmallVec::from_elem(0, 2 * d - 1);
        for (i, &x) in a.0.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.0.iter().enumerate() {
                prod[i + j] += (x * y) as u128;
            }
        }
        let mut r: SmallVec<[u64; 16]> = prod.iter().map(|&c| (c % p as u128) as u64).collect();
        for i in (d..2 * d - 1).rev() {
            let c = r[i];
            if c == 0 {
                continue;
            }
            let shift = i - d;
            for j in 0..d {
                let t = (c * self.modulus[j]) % p;
                let v = &mut r[shift + j];
                *v = if *v >= t { *v - t } else { *v + p - t };
            }
            r[i] = 0;
        }
        Fe(r[..d].iter().copied().collect())
    }

    pub fn square(&self, a: &Fe) -> Fe {
        self.mul(a, a)
    }

    /// Inverse via the extended Euclidean algorithm on `F_p[x]`.
    pub fn inv(&self, a: &Fe) -> Result<Fe, FieldError> {
        if a.is_zero() {
            return Err(FieldError::DivisionByZero);
        }
        let p = self.p;
        let mut r0 = trim(self.modulus.clone());
        let mut r1 = trim(a.0.to_vec());
        let mut s0: Vec<u64> = vec![];
        let mut s1: Vec<u64> = vec![1];
        while !(r1.len() == 1 && r1[0] != 0) {
            let (q, r) = poly_divmod(&r0, &r1, p);
            let s2 = poly_sub(&s0, &poly_mul(&q, &s1, p), p);
            r0 = std::mem::replace(&mut r1, r);
            s0 = std::mem::replace(&mut s1, s2);
        }
        let c = inv_mod(r1[0], p).expect("nonzero constant");
        let mut out = self.zero();
        for (i, &s) in s1.iter().enumerate() {
            out.0[i] = s * c % p;
        }
        Ok(out)
    }

    pub fn div(&self, a: &Fe, b: &Fe) -> Result<Fe, FieldError> {
        Ok(self.mul(a, &self.inv(b)?))
    }

    pub fn pow_u64(&self, a: &Fe, mut e: u64) -> Fe {
        let mut base = a.clone();
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.square(&base);
            e >>= 1;
        }
        acc
    }

    pub fn pow(&self, a: &Fe, e: &BigUint) -> Fe {
        let mut acc = self.one();
        for i in (0..e.bits()).rev() {
            acc = self.square(&acc);
            if e.bit(i) {
                acc = self.mul(&acc, a);
            }
        }
        acc
    }

    /// Signed exponent; negative powers go through the inverse.
    pub fn pow_i64(&self, a: &Fe, e: i64) -> Result<Fe, FieldError> {
        if e >= 0 {
            Ok(self.pow_u64(a, e as u64))
        } else {
            Ok(self.pow_u64(&self.inv(a)?, e.unsigned_abs()))
        }
    }

    /// `a^p`, evaluated as a linear map on the coefficient vector.
    pub fn frobenius(&self, a: &Fe) -> Fe {
        let p = self.p;
        let mut acc: SmallVec<[u128; 8]> = SmallVec::from_elem(0, self.degree);
        for (i, &c) in a.0.iter().enumerate() {
            if c == 0 {
                continue;
            }
            for (j, &b) in self.frob_basis[i].0.iter().enumerate() {
                acc[j] += (c * b) as u128;
            }
        }
        Fe(acc.iter().map(|&x| (x % p as u128) as u64).collect())
    }

    /// `a^{p^k}`.
    pub fn frobenius_iter(&self, a: &Fe, k: usize) -> Fe {
        (0..k).fold(a.clone(), |x, _| self.frobenius(&x))
    }

    /// True iff `a` lies in the copy of `F_{p^2}`.
    pub fn in_quadratic_subfield(&self, a: &Fe) -> bool {
        &self.frobenius_iter(a, 2) == a
    }

    /// Embeds an element of the quadratic model `F_{p^2}` into this field.
    pub fn embed_quadratic(&self, a: &Fe) -> Fe {
        debug_assert_eq!(a.0.len(), 2);
        let lo = self.from_u64(a.0[0]);
        let hi = self.mul_u64(&self.quad_gen_image, a.0[1]);
        self.add(&lo, &hi)
    }

    /// Inverse of [`embed_quadratic`](Self::embed_quadratic) on the subfield;
    /// `None` for elements outside `F_{p^2}`.
    pub fn project_quadratic(&self, a: &Fe) -> Option<Fe> {
        let quad = self.quadratic_subfield();
        if self.degree == 2 {
            return Some(a.clone());
        }
        // a = c0 + c1 t with t = quad_gen_image; read c1 off a non-constant slot.
        let t = &self.quad_gen_image;
        let k = (1..self.degree).find(|&k| t.0[k] != 0)?;
        let c1 = a.0[k] * inv_mod(t.0[k], self.p).unwrap() % self.p;
        let rest = self.sub(a, &self.mul_u64(t, c1));
        if rest.0[1..].iter().any(|&c| c != 0) {
            return None;
        }
        quad.from_coeffs(&[rest.0[0], c1]).ok()
    }

    /// Euler criterion.
    pub fn is_square(&self, a: &Fe) -> bool {
        if a.is_zero() {
            return true;
        }
        let e = (&self.order - 1u32) >> 1;
        self.is_one(&self.pow(a, &e))
    }

    /// Square root with the deterministic tie rule: of the two roots the
    /// lexicographically smaller coefficient vector is returned.
    pub fn sqrt(&self, a: &Fe) -> Option<Fe> {
        let r = self.nth_root_prime(a, 2)?;
        let s = self.neg(&r);
        Some(if s < r { s } else { r })
    }

    /// Some `r`-th root of `a` for a prime `r`, by the generalized
    /// Tonelli–Shanks method in the Sylow `r`-subgroup.
    pub fn nth_root_prime(&self, a: &Fe, r: u64) -> Option<Fe> {
        if a.is_zero() {
            return Some(self.zero());
        }
        let qm1 = &self.order - 1u32;
        let rb = BigUint::from(r);
        if !(&qm1 % &rb).is_zero() {
            // r-th powering is a bijection: invert the exponent.
            let e = mod_inverse_big(&rb, &qm1)?;
            return Some(self.pow(a, &e));
        }
        if !self.is_one(&self.pow(a, &(&qm1 / &rb))) {
            return None;
        }
        let mut s = 0u32;
        let mut t = qm1.clone();
        while (&t % &rb).is_zero() {
            t /= &rb;
            s += 1;
        }
        let z = self.non_rth_power(r);
        let c = self.pow(&z, &t);
        let x = if t.is_one() {
            self.one()
        } else {
            let e = mod_inverse_big(&rb, &t).expect("r coprime to t");
            self.pow(a, &e)
        };
        // b = x^r / a lies in the Sylow subgroup generated by c.
        let b = self.div(&self.pow_u64(&x, r), a).ok()?;
        let k = self.sylow_log(&b, &c, r, s)?;
        if !(&k % &rb).is_zero() {
            return None;
        }
        let y = self.inv(&self.pow(&c, &(&k / &rb))).ok()?;
        let u = self.mul(&x, &y);
        debug_assert_eq!(self.pow_u64(&u, r), *a);
        Some(u)
    }

    /// First element (in the fixed enumeration) that is not an `r`-th power.
    pub fn non_rth_power(&self, r: u64) -> Fe {
        self.cached("non_power", r, || {
            let e = (&self.order - 1u32) / BigUint::from(r);
            (1u128..)
                .map(|n| self.element(n))
                .find(|z| !self.is_one(&self.pow(z, &e)))
                .expect("a non-residue exists")
        })
    }

    /// Computes `make()` once per field and key.
    pub fn cached(&self, tag: &'static str, key: u64, make: impl FnOnce() -> Fe) -> Fe {
        if let Some(z) = self.memo.lock().unwrap().get(&(tag, key)) {
            return z.clone();
        }
        let z = make();
        self.memo.lock().unwrap().insert((tag, key), z.clone());
        z
    }

    /// Discrete log of `b` to base `c`, where `c` has order `r^s`.
    fn sylow_log(&self, b: &Fe, c: &Fe, r: u64, s: u32) -> Option<BigUint> {
        let rb = BigUint::from(r);
        let gamma = self.pow(c, &rb.pow(s.saturating_sub(1)));
        let c_inv = self.inv(c).ok()?;
        let mut k = BigUint::zero();
        let mut rk = BigUint::one();
        for i in 0..s {
            let h = self.mul(b, &self.pow(&c_inv, &k));
            let h = self.pow(&h, &rb.pow(s - 1 - i));
            let mut digit = None;
            let mut g = self.one();
            for d in 0..r {
                if g == h {
                    digit = Some(d);
                    break;
                }
                g = self.mul(&g, &gamma);
            }
            k += &rk * BigUint::from(digit?);
            rk *= &rb;
        }
        Some(k)
    }

    /// A deterministic primitive `n`-th root of unity: the `(q-1)/n`-th power
    /// of the first element in the fixed enumeration for which that power
    /// has exact order `n`.
    pub fn primitive_nth_root(&self, n: u64) -> Result<Fe, FieldError> {
        let qm1 = &self.order - 1u32;
        if n == 0 || !(&qm1 % n).is_zero() {
            return Err(FieldError::NoRootOfUnity { n });
        }
        if n == 1 {
            return Ok(self.one());
        }
        Ok(self.cached("root_of_unity", n, || {
            let e = &qm1 / n;
            let primes = prime_divisors(n);
            (1u128..)
                .map(|idx| self.pow(&self.element(idx), &e))
                .find(|y| primes.iter().all(|&r| !self.is_one(&self.pow_u64(y, n / r))))
                .expect("F^x is cyclic")
        }))
    }

    /// Exponent `e in [0, n)` with `zeta^e = x`, by baby-step/giant-step.
    pub fn dlog_mu(&self, x: &Fe, zeta: &Fe, n: u64) -> Result<u64, FieldError> {
        if !self.is_one(&self.pow_u64(x, n)) {
            return Err(FieldError::NotInMuN { n });
        }
        let m = (n as f64).sqrt().ceil() as u64;
        let mut table = HashMap::with_capacity(m as usize);
        let mut acc = self.one();
        for j in 0..m {
            table.entry(acc.clone()).or_insert(j);
            acc = self.mul(&acc, zeta);
        }
        let giant = self.inv(&self.pow_u64(zeta, m))?;
        let mut y = x.clone();
        for i in 0..=m {
            if let Some(&j) = table.get(&y) {
                let e = (i * m + j) % n;
                return Ok(e);
            }
            y = self.mul(&y, &giant);
        }
        Err(FieldError::NotInMuN { n })
    }

    /// The order as a `u128`, when it fits.
    pub fn order_u128(&self) -> Option<u128> {
        self.order.to_u128()
    }
}

fn mod_inverse_big(a: &BigUint, m: &BigUint) -> Option<BigUint> {
    use num_bigint::BigInt;
    let a = BigInt::from(a.clone());
    let m = BigInt::from(m.clone());
    let e = a.extended_gcd(&m);
    if !e.gcd.is_one() {
        return None;
    }
    e.x.mod_floor(&m).to_biguint()
}

fn trim(mut v: Vec<u64>) -> Vec<u64> {
    while v.len() > 1 && *v.last().unwrap() == 0 {
        v.pop();
    }
    if v.is_empty() {
        v.push(0);
    }
    v
}

fn poly_sub(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let n = a.len().max(b.len());
    let out = (0..n)
        .map(|i| {
            let x = a.get(i).copied().unwrap_or(0);
            let y = b.get(i).copied().unwrap_or(0);
            (x + p - y) % p
        })
        .collect();
    trim(out)
}

fn poly_mul(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return vec![0];
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + x * y % p) % p;
        }
    }
    trim(out)
}

fn poly_divmod(a: &[u64], b: &[u64], p: u64) -> (Vec<u64>, Vec<u64>) {
    let b = trim(b.to_vec());
    let mut r = trim(a.to_vec());
    if r.len() < b.len() {
        return (vec![0], r);
    }
    let lead_inv = inv_mod(*b.last().unwrap(), p).expect("nonzero divisor");
    let mut q = vec![0u64; r.len() - b.len() + 1];
    while r.len() >= b.len() && !(r.len() == 1 && r[0] == 0) {
        let shift = r.len() - b.len();
        let c = r.last().unwrap() * lead_inv % p;
        q[shift] = c;
        for (j, &bj) in b.iter().enumerate() {
            r[shift + j] = (r[shift + j] + p - c * bj % p) % p;
        }
        r = trim(r);
        if shift == 0 {
            break;
        }
    }
    (trim(q), r)
}

fn poly_mulmod(a: &[u64], b: &[u64], f: &[u64], p: u64) -> Vec<u64> {
    poly_divmod(&poly_mul(a, b, p), f, p).1
}

fn poly_powmod(base: &[u64], mut e: u128, f: &[u64], p: u64) -> Vec<u64> {
    let mut acc = vec![1u64];
    let mut b = poly_divmod(base, f, p).1;
    while e > 0 {
        if e & 1 == 1 {
            acc = poly_mulmod(&acc, &b, f, p);
        }
        b = poly_mulmod(&b, &b, f, p);
        e >>= 1;
    }
    acc
}

fn poly_gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut x = trim(a.to_vec());
    let mut y = trim(b.to_vec());
    while !(y.len() == 1 && y[0] == 0) {
        let r = poly_divmod(&x, &y, p).1;
        x = y;
        y = r;
    }
    x
}

/// Rabin's irreducibility test for a monic `f` of degree `d` over `F_p`.
pub(crate) fn is_irreducible(f: &[u64], p: u64) -> bool {
    let d = f.len() - 1;
    let x = vec![0u64, 1];
    // x^{p^k} mod f by repeated p-th powering.
    let frob = |g: &[u64], k: usize| {
        let mut h = g.to_vec();
        for _ in 0..k {
            h = poly_powmod(&h, p as u128, f, p);
        }
        h
    };
    let xpd = frob(&x, d);
    if trim(poly_sub(&xpd, &x, p)) != vec![0] {
        return false;
    }
    for r in prime_divisors(d as u64) {
        let h = frob(&x, d / r as usize);
        let g = poly_gcd(f, &poly_sub(&h, &x, p), p);
        if g.len() > 1 {
            return false;
        }
    }
    true
}

fn first_irreducible(p: u64, degree: usize) -> Vec<u64> {
    for n in 0u128.. {
        let mut f = Vec::with_capacity(degree + 1);
        let mut k = n;
        for _ in 0..degree {
            f.push((k % p as u128) as u64);
            k /= p as u128;
        }
        if k != 0 {
            break;
        }
        f.push(1);
        if f[0] != 0 && is_irreducible(&f, p) {
            return f;
        }
    }
    unreachable!("irreducible polynomials of every degree exist")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn f529_uses_x2_plus_1() {
        let f = ExtField::build(23, 1).unwrap();
        assert_eq!(f.modulus(), &[1, 0, 1]);
        assert_eq!(f.order(), &BigUint::from(529u32));
    }

    #[test]
    fn build_rejects_bad_characteristic() {
        assert_eq!(ExtField::build(21, 1).unwrap_err(), FieldError::NotPrime(21));
        assert_eq!(ExtField::build(3, 1).unwrap_err(), FieldError::Unsupported(3));
        assert_eq!(ExtField::build(2, 1).unwrap_err(), FieldError::Unsupported(2));
    }

    #[test]
    fn order_of_13_4() {
        let f = ExtField::build(13, 2).unwrap();
        assert_eq!(f.order(), &BigUint::from(28561u32));
        assert!(is_irreducible(f.modulus(), 13));
        assert!(((f.order() - 1u32) % 12u32).is_zero());
    }

    #[test]
    fn inverse_of_5_mod_23() {
        let f = ExtField::build(23, 1).unwrap();
        assert_eq!(f.mul(&f.from_u64(5), &f.from_u64(14)), f.one());
        assert_eq!(f.inv(&f.from_u64(5)).unwrap(), f.from_u64(14));
        assert_eq!(f.inv(&f.zero()), Err(FieldError::DivisionByZero));
    }

    #[test]
    fn frobenius_conjugates_gaussian_integers() {
        let f = ExtField::build(23, 1).unwrap();
        for a in 0..23 {
            for b in 0..23 {
                let z = f.from_coeffs(&[a, b]).unwrap();
                let zbar = f.from_coeffs(&[a, (23 - b) % 23]).unwrap();
                assert_eq!(f.frobenius(&z), zbar);
                assert_eq!(f.pow_u64(&z, 23), zbar);
            }
        }
    }

    #[test]
    fn frobenius_has_order_2m() {
        let f = ExtField::build(13, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let a = f.random(&mut rng);
            assert_eq!(f.frobenius_iter(&a, 6), a);
            let fp = f.from_u64(7);
            assert_eq!(f.frobenius(&fp), fp);
        }
    }

    #[test]
    fn prime_field_ring_axioms_exhaustive() {
        for p in [5u64, 7, 11, 13] {
            let f = ExtField::build(p, 1).unwrap();
            let els: Vec<Fe> = (0..p).map(|a| f.from_u64(a)).collect();
            for a in &els {
                for b in &els {
                    for c in &els {
                        assert_eq!(f.add(&f.add(a, b), c), f.add(a, &f.add(b, c)));
                        assert_eq!(
                            f.mul(a, &f.add(b, c)),
                            f.add(&f.mul(a, b), &f.mul(a, c))
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn sqrt_examples() {
        let f = ExtField::build(23, 1).unwrap();
        assert_eq!(f.sqrt(&f.from_u64(4)), Some(f.from_u64(2)));
        assert_eq!(f.sqrt(&f.zero()), Some(f.zero()));
        // 5 is a non-residue mod 23 but a square in F_{23^2}.
        assert_eq!(crate::arith::legendre(5, 23), -1);
        let r = f.sqrt(&f.from_u64(5)).unwrap();
        assert_eq!(f.square(&r), f.from_u64(5));
    }

    #[test]
    fn sqrt_matches_euler_criterion() {
        let f = ExtField::build(11, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..300 {
            let a = f.random(&mut rng);
            match f.sqrt(&a) {
                Some(r) => assert_eq!(f.square(&r), a),
                None => assert!(!f.is_square(&a)),
            }
        }
    }

    #[test]
    fn cube_roots() {
        let f = ExtField::build(7, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let a = f.random(&mut rng);
            let c = f.pow_u64(&a, 3);
            let r = f.nth_root_prime(&c, 3).unwrap();
            assert_eq!(f.pow_u64(&r, 3), c);
        }
    }

    #[test]
    fn roots_of_unity() {
        let f = ExtField::build(23, 1).unwrap();
        assert_eq!(f.primitive_nth_root(1).unwrap(), f.one());
        assert_eq!(f.primitive_nth_root(2).unwrap(), f.from_i64(-1));
        let z8 = f.primitive_nth_root(8).unwrap();
        assert!(f.is_one(&f.pow_u64(&z8, 8)));
        assert!(!f.is_one(&f.pow_u64(&z8, 4)));
        assert!(f.primitive_nth_root(5).is_err());
        for n in [3u64, 6, 11, 12, 24, 48] {
            let z = f.primitive_nth_root(n).unwrap();
            for d in crate::arith::divisors(n) {
                if d < n {
                    assert!(!f.is_one(&f.pow_u64(&z, d)), "n={n} d={d}");
                }
            }
        }
    }

    #[test]
    fn dlog_round_trip() {
        let f = ExtField::build(23, 1).unwrap();
        let z = f.primitive_nth_root(8).unwrap();
        assert_eq!(f.dlog_mu(&f.one(), &z, 8), Ok(0));
        assert_eq!(f.dlog_mu(&f.pow_u64(&z, 3), &z, 8), Ok(3));
        for n in [8u64, 11, 24, 48] {
            let z = f.primitive_nth_root(n).unwrap();
            for e in 0..n {
                assert_eq!(f.dlog_mu(&f.pow_u64(&z, e), &z, n), Ok(e));
            }
        }
        assert_eq!(
            f.dlog_mu(&f.from_u64(5), &z, 8),
            Err(FieldError::NotInMuN { n: 8 })
        );
    }

    #[test]
    fn quadratic_embedding_round_trips() {
        let big = ExtField::build(19, 3).unwrap();
        let quad = big.quadratic_subfield().clone();
        for a in 0..19 {
            for b in [0u64, 1, 5, 18] {
                let x = quad.from_coeffs(&[a, b]).unwrap();
                let y = big.embed_quadratic(&x);
                assert!(big.in_quadratic_subfield(&y));
                assert_eq!(big.project_quadratic(&y), Some(x));
            }
        }
        // Embedding is a ring map.
        let x = quad.from_coeffs(&[3, 7]).unwrap();
        let y = quad.from_coeffs(&[11, 2]).unwrap();
        assert_eq!(
            big.embed_quadratic(&quad.mul(&x, &y)),
            big.mul(&big.embed_quadratic(&x), &big.embed_quadratic(&y))
        );
        assert_eq!(big.project_quadratic(&big.gen()), None);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn frobenius_is_a_ring_automorphism(seed in any::<u64>()) {
            let f = ExtField::build(31, 2).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..16 {
                let a = f.random(&mut rng);
                let b = f.random(&mut rng);
                prop_assert_eq!(f.frobenius(&f.mul(&a, &b)), f.mul(&f.frobenius(&a), &f.frobenius(&b)));
                prop_assert_eq!(f.frobenius(&f.add(&a, &b)), f.add(&f.frobenius(&a), &f.frobenius(&b)));
                if !a.is_zero() {
                    prop_assert!(f.is_one(&f.mul(&a, &f.inv(&a).unwrap())));
                }
                prop_assert_eq!(f.pow(&a, f.order()), a);
            }
        }
    }
}
