//! Exact integer polynomials: characteristic polynomials by multimodular
//! Hessenberg reduction, exact division, gcd, squarefree part, and
//! root inclusion disks.
//!
//! Polynomials are coefficient vectors, lowest degree first.

use num_bigint::{BigInt, BigUint, Sign};
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::arith::{inv_mod, is_prime, mul_mod};

pub type Poly = Vec<BigInt>;

pub fn trim(p: &mut Poly) {
    while p.len() > 1 && p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
    if p.is_empty() {
        p.push(BigInt::zero());
    }
}

pub fn degree(p: &Poly) -> usize {
    let mut d = p.len().saturating_sub(1);
    while d > 0 && p[d].is_zero() {
        d -= 1;
    }
    d
}

pub fn is_zero(p: &Poly) -> bool {
    p.iter().all(|c| c.is_zero())
}

pub fn derivative(p: &Poly) -> Poly {
    let mut out: Poly = p
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| c * BigInt::from(i))
        .collect();
    trim(&mut out);
    out
}

pub fn content(p: &Poly) -> BigInt {
    p.iter().fold(BigInt::zero(), |g, c| g.gcd(c))
}

/// Primitive part with positive leading coefficient.
pub fn primitive(p: &Poly) -> Poly {
    let mut out = p.clone();
    trim(&mut out);
    let c = content(&out);
    if c.is_zero() {
        return out;
    }
    let sign = if out.last().unwrap().is_negative() { -c } else { c };
    for x in out.iter_mut() {
        *x /= &sign;
    }
    out
}

pub fn mul(a: &Poly, b: &Poly) -> Poly {
    let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    trim(&mut out);
    out
}

/// Exact division over `Z`; `None` when `b` does not divide `a`.
pub fn div_exact(a: &Poly, b: &Poly) -> Option<Poly> {
    let db = degree(b);
    let lb = b[db].clone();
    if lb.is_zero() {
        return None;
    }
    let mut r = a.clone();
    trim(&mut r);
    if is_zero(&r) {
        return Some(vec![BigInt::zero()]);
    }
    let da = degree(&r);
    if da < db {
        return None;
    }
    let mut q = vec![BigInt::zero(); da - db + 1];
    for i in (0..=da - db).rev() {
        let (c, rem) = r[i + db].div_rem(&lb);
        if !rem.is_zero() {
            return None;
        }
        if !c.is_zero() {
            for j in 0..=db {
                r[i + j] -= &c * &b[j];
            }
        }
        q[i] = c;
    }
    is_zero(&r).then(|| {
        trim(&mut q);
        q
    })
}

/// Pseudo-remainder of `a` by `b`.
fn prem(a: &Poly, b: &Poly) -> Poly {
    let db = degree(b);
    let lb = b[db].clone();
    let mut r = a.clone();
    trim(&mut r);
    while !is_zero(&r) && degree(&r) >= db {
        let dr = degree(&r);
        let lr = r[dr].clone();
        for x in r.iter_mut() {
            *x *= &lb;
        }
        for j in 0..=db {
            r[dr - db + j] -= &lr * &b[j];
        }
        trim(&mut r);
        r = primitive_keep_sign(&r);
    }
    r
}

fn primitive_keep_sign(p: &Poly) -> Poly {
    let c = content(p);
    if c.is_zero() || c.is_one() {
        return p.clone();
    }
    p.iter().map(|x| x / &c).collect()
}

/// Gcd over `Q`, returned primitive with positive leading coefficient.
pub fn gcd(a: &Poly, b: &Poly) -> Poly {
    let mut x = primitive(a);
    let mut y = primitive(b);
    if is_zero(&x) {
        return y;
    }
    while !is_zero(&y) {
        let r = prem(&x, &y);
        x = y;
        y = if is_zero(&r) { r } else { primitive(&r) };
    }
    primitive(&x)
}

/// Squarefree part `p / gcd(p, p')`, primitive.
pub fn radical(p: &Poly) -> Poly {
    let g = gcd(p, &derivative(p));
    primitive(&div_exact(&primitive(p), &g).expect("gcd divides"))
}

/// `x^k - c`.
pub fn binomial(k: usize, c: &BigInt) -> Poly {
    let mut out = vec![BigInt::zero(); k + 1];
    out[0] = -c.clone();
    out[k] = BigInt::one();
    out
}

/// Primes below `2^31` in decreasing order, as needed.
pub fn modular_primes() -> impl Iterator<Item = u64> {
    (1u64 << 30..1u64 << 31).rev().filter(|&q| is_prime(q))
}

/// Characteristic polynomial of `a` mod the prime `q`, via reduction to
/// Hessenberg form by elementary similarities.
pub fn charpoly_mod(a: &[Vec<u32>], q: u64) -> Vec<u64> {
    let n = a.len();
    let mut h: Vec<Vec<u64>> = a.iter().map(|r| r.iter().map(|&x| x as u64 % q).collect()).collect();
    for m in 1..n.saturating_sub(1) {
        let piv = (m..n).find(|&i| h[i][m - 1] != 0);
        let Some(i) = piv else { continue };
        if i != m {
            h.swap(i, m);
            for row in h.iter_mut() {
                row.swap(i, m);
            }
        }
        let inv = inv_mod(h[m][m - 1], q).unwrap();
        for i in m + 1..n {
            let t = mul_mod(h[i][m - 1], inv, q);
            if t == 0 {
                continue;
            }
            // Row i -= t row m; column m += t column i.
            for j in 0..n {
                let v = mul_mod(t, h[m][j], q);
                h[i][j] = (h[i][j] + q - v) % q;
            }
            for row in h.iter_mut() {
                let v = mul_mod(t, row[i], q);
                row[m] = (row[m] + v) % q;
            }
        }
    }
    // p_0 = 1, p_{m+1} = (x - h_mm) p_m - sum_i h_im prod_{j=i+1..m} h_{j,j-1} p_i.
    let mut ps: Vec<Vec<u64>> = vec![vec![1]];
    for m in 0..n {
        let prev = &ps[m];
        let mut next = vec![0u64; m + 2];
        for (d, &c) in prev.iter().enumerate() {
            next[d + 1] = (next[d + 1] + c) % q;
            next[d] = (next[d] + q - mul_mod(h[m][m], c, q)) % q;
        }
        let mut t = 1u64;
        for i in (0..m).rev() {
            t = mul_mod(t, h[i + 1][i], q);
            let coef = mul_mod(t, h[i][m], q);
            if coef == 0 {
                continue;
            }
            for (d, &c) in ps[i].iter().enumerate() {
                next[d] = (next[d] + q - mul_mod(coef, c, q)) % q;
            }
        }
        ps.push(next);
    }
    ps.pop().unwrap()
}

/// Bound on the absolute values of charpoly coefficients:
/// `prod_j (1 + sum_i |a_ij|)`.
fn charpoly_bound(a: &[Vec<u32>]) -> BigUint {
    let n = a.len();
    (0..n)
        .map(|j| BigUint::from(1 + (0..n).map(|i| a[i][j] as u64).sum::<u64>()))
        .product()
}

fn symmetric_lift(r: &BigUint, m: &BigUint) -> BigInt {
    let half = m >> 1;
    if r > &half {
        BigInt::from_biguint(Sign::Plus, r.clone()) - BigInt::from_biguint(Sign::Plus, m.clone())
    } else {
        BigInt::from_biguint(Sign::Plus, r.clone())
    }
}

/// Incremental CRT of residue vectors into symmetric integers.
fn crt_vectors(residues: &[(Vec<u64>, u64)]) -> Vec<BigInt> {
    let len = residues[0].0.len();
    let mut acc: Vec<BigUint> = residues[0].0.iter().map(|&x| BigUint::from(x)).collect();
    let mut modulus = BigUint::from(residues[0].1);
    for (vals, q) in &residues[1..] {
        let qb = BigUint::from(*q);
        let m_mod_q = (&modulus % &qb).to_u64().unwrap();
        let inv = inv_mod(m_mod_q, *q).unwrap();
        for i in 0..len {
            let a_mod_q = (&acc[i] % &qb).to_u64().unwrap();
            let diff = (vals[i] + q - a_mod_q) % q;
            let t = mul_mod(diff, inv, *q);
            acc[i] += &modulus * BigUint::from(t);
        }
        modulus *= qb;
    }
    acc.iter().map(|x| symmetric_lift(x, &modulus)).collect()
}

/// Exact characteristic polynomial `det(xI - A)`.
pub fn charpoly(a: &[Vec<u32>]) -> Poly {
    let bound = charpoly_bound(a) << 1;
    let mut residues = Vec::new();
    let mut modulus = BigUint::one();
    for q in modular_primes() {
        residues.push((charpoly_mod(a, q), q));
        modulus *= BigUint::from(q);
        if modulus > bound {
            break;
        }
    }
    let mut out = crt_vectors(&residues);
    trim(&mut out);
    out
}

/// Whether `p(A) = 0` exactly, checked modulo enough primes to cover the
/// entry bound `sum |c_i| * (max column sum)^i`.
pub fn annihilates(p: &Poly, a: &[Vec<u32>]) -> bool {
    let n = a.len();
    let colmax: u64 = (0..n)
        .map(|j| (0..n).map(|i| a[i][j] as u64).sum::<u64>())
        .max()
        .unwrap_or(0)
        .max(1);
    let mut bound = BigUint::zero();
    let mut pow = BigUint::one();
    for c in p {
        bound += c.magnitude() * &pow;
        pow *= BigUint::from(colmax);
    }
    let bound = bound * BigUint::from(n as u64 + 1);
    let mut modulus = BigUint::one();
    for q in modular_primes() {
        let qb = BigInt::from(q);
        let coeffs: Vec<u64> = p
            .iter()
            .map(|c| c.mod_floor(&qb).to_u64().unwrap())
            .collect();
        let am: Vec<Vec<u64>> = a.iter().map(|r| r.iter().map(|&x| x as u64 % q).collect()).collect();
        // Horner: R = R A + c_i I.
        let mut r = vec![vec![0u64; n]; n];
        for &c in coeffs.iter().rev() {
            let mut next = vec![vec![0u64; n]; n];
            for i in 0..n {
                for k in 0..n {
                    let x = r[i][k];
                    if x == 0 {
                        continue;
                    }
                    for j in 0..n {
                        next[i][j] = (next[i][j] + mul_mod(x, am[k][j], q)) % q;
                    }
                }
                next[i][i] = (next[i][i] + c) % q;
            }
            r = next;
        }
        if r.iter().flatten().any(|&x| x != 0) {
            return false;
        }
        modulus *= BigUint::from(q);
        if modulus > bound {
            return true;
        }
    }
    unreachable!("prime supply exhausted")
}

/// Whether `p` is squarefree modulo some prime not dividing its leading
/// coefficient (a sufficient condition for squarefree over `Q`).
pub fn squarefree_mod_some_prime(p: &Poly) -> bool {
    let d = degree(p);
    if d == 0 {
        return true;
    }
    for q in modular_primes().take(8) {
        let qb = BigInt::from(q);
        let lc = p[d].mod_floor(&qb);
        if lc.is_zero() {
            continue;
        }
        let f: Vec<u64> = p[..=d].iter().map(|c| c.mod_floor(&qb).to_u64().unwrap()).collect();
        let df: Vec<u64> = (1..=d).map(|i| mul_mod(f[i], i as u64 % q, q)).collect();
        if gcd_mod(&f, &df, q).len() == 1 {
            return true;
        }
    }
    false
}

fn trim_mod(p: &mut Vec<u64>) {
    while p.len() > 1 && *p.last().unwrap() == 0 {
        p.pop();
    }
}

fn gcd_mod(a: &[u64], b: &[u64], q: u64) -> Vec<u64> {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    trim_mod(&mut x);
    trim_mod(&mut y);
    while !(y.len() == 1 && y[0] == 0) {
        // x mod y
        let dy = y.len() - 1;
        let inv = inv_mod(y[dy], q).unwrap();
        while x.len() > dy && !(x.len() == 1 && x[0] == 0) {
            let dx = x.len() - 1;
            let c = mul_mod(x[dx], inv, q);
            for j in 0..=dy {
                x[dx - dy + j] = (x[dx - dy + j] + q - mul_mod(c, y[j], q)) % q;
            }
            trim_mod(&mut x);
            if dx == 0 {
                break;
            }
        }
        std::mem::swap(&mut x, &mut y);
    }
    x
}

/// Evaluates `p` at a complex floating point number.
pub fn eval_f64(p: &Poly, z: Complex64) -> Complex64 {
    p.iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + big_to_f64(c))
}

pub fn big_to_f64(x: &BigInt) -> f64 {
    x.to_f64().unwrap_or(if x.is_negative() { f64::NEG_INFINITY } else { f64::INFINITY })
}

/// `log2 |x|` for a big integer (`-inf` for zero).
fn log2_big(x: &BigInt) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = x.bits();
    if bits <= 1000 {
        return x.abs().to_f64().unwrap().log2();
    }
    let shift = bits - 64;
    let top: BigInt = x.abs() >> shift;
    top.to_f64().unwrap().log2() + shift as f64
}

/// Splits a finite `f64` into `m * 2^e` with integer `m`.
fn dyadic(x: f64) -> (BigInt, i64) {
    if x == 0.0 {
        return (BigInt::zero(), 0);
    }
    let bits = x.to_bits();
    let sign = if bits >> 63 == 1 { -1i64 } else { 1 };
    let exp = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & ((1u64 << 52) - 1);
    let (m, e) = if exp == 0 { (frac, -1074) } else { (frac | (1 << 52), exp - 1075) };
    (BigInt::from(sign) * BigInt::from(m), e)
}

/// `log2 |p(z)|` evaluated exactly at the dyadic point `z` (the exact
/// binary value of the floating point input).
pub fn log2_abs_eval_exact(p: &Poly, z: Complex64) -> f64 {
    let (mr, er) = dyadic(z.re);
    let (mi, ei) = dyadic(z.im);
    let s = (-er.min(ei)).max(0) as u64;
    // z = (a + bi) / 2^s with integers a, b.
    let shift = |m: BigInt, e: i64| -> BigInt {
        let t = e + s as i64;
        if m.is_zero() {
            m
        } else {
            m << t as u64
        }
    };
    let a = shift(mr, er);
    let b = shift(mi, ei);
    // Horner on 2^{s n} p(z) = sum c_i (a + bi)^i 2^{s (n - i)}.
    let n = p.len() - 1;
    let mut re = BigInt::zero();
    let mut im = BigInt::zero();
    for (i, c) in p.iter().enumerate().rev() {
        let nr = &re * &a - &im * &b;
        let ni = &re * &b + &im * &a;
        re = nr + (c << (s * (n - i) as u64));
        im = ni;
    }
    let lr = log2_big(&re);
    let li = log2_big(&im);
    let m = lr.max(li);
    if m == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    m + 0.5 * ((2.0 * (lr - m)).exp2() + (2.0 * (li - m)).exp2()).log2() - (s * n as u64) as f64
}

/// Simultaneous root approximation (Aberth-Ehrlich) in double precision.
pub fn roots(p: &Poly) -> Vec<Complex64> {
    let d = degree(p);
    if d == 0 {
        return Vec::new();
    }
    let lc = big_to_f64(&p[d]);
    let c: Vec<Complex64> = p[..=d].iter().map(|x| Complex64::new(big_to_f64(x) / lc, 0.0)).collect();
    let dc: Vec<Complex64> = (1..=d).map(|i| c[i] * i as f64).collect();
    let eval = |cs: &[Complex64], z: Complex64| cs.iter().rev().fold(Complex64::new(0.0, 0.0), |a, &x| a * z + x);
    let radius = 1.0 + c[..d].iter().map(|x| x.norm()).fold(0.0, f64::max);
    let mut z: Vec<Complex64> = (0..d)
        .map(|k| {
            let t = 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / d as f64 + 0.4;
            Complex64::from_polar(radius * 0.5, t)
        })
        .collect();
    for _ in 0..500 {
        let mut moved = 0.0f64;
        for i in 0..d {
            let f = eval(&c, z[i]);
            if f.norm() == 0.0 {
                continue;
            }
            let ratio = f / eval(&dc, z[i]);
            let s: Complex64 = (0..d)
                .filter(|&j| j != i)
                .map(|j| Complex64::new(1.0, 0.0) / (z[i] - z[j]))
                .sum();
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * s);
            if step.is_finite() {
                z[i] -= step;
                moved = moved.max(step.norm() / (1.0 + z[i].norm()));
            }
        }
        if moved < 1e-15 {
            break;
        }
    }
    z
}

/// For a squarefree `p` and approximations `z` of all its roots, the
/// Weierstrass inclusion radii `d |p(z_j)| / |lc prod_{k != j} (z_j - z_k)|`:
/// every root of `p` lies in the union of the disks. The numerator is
/// evaluated exactly; the radii carry a small safety factor for the
/// floating point denominator.
pub fn inclusion_radii(p: &Poly, z: &[Complex64]) -> Vec<f64> {
    let d = degree(p);
    let llc = log2_big(&p[d]);
    (0..z.len())
        .map(|j| {
            let num = log2_abs_eval_exact(p, z[j]);
            if num == f64::NEG_INFINITY {
                return 0.0;
            }
            let den: f64 = llc
                + (0..z.len())
                    .filter(|&k| k != j)
                    .map(|k| (z[j] - z[k]).norm().log2())
                    .sum::<f64>();
            d as f64 * (num - den).exp2() * (1.0 + 1e-9)
        })
        .collect()
}
