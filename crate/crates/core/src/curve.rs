//! Short Weierstrass curves `y^2 = x^3 + ax + b` over an [`ExtField`].
//!
//! Supersingular curves are always used through their *canonical model*:
//! the twist over `F_{p^2}` on which the `p^2`-Frobenius acts as `[-p]`.
//! On such a model `E(F_{p^{2m}})` is exactly `E[n]` with
//! `n = |(-p)^m - 1|`, so torsion of any order dividing `n` is rational
//! and obtained by cofactor multiplication.

use num_bigint::BigUint;
use rand::Rng;
use thiserror::Error;

use crate::field::{ExtField, Fe, FieldError};
use crate::pairing::{point_coordinates, weil_pairing};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CurveError {
    #[error("singular curve (4a^3 + 27b^2 = 0)")]
    Singular,
    #[error("no twist with Frobenius -p found for j = {0:?}")]
    NoCanonicalTwist(Fe),
    #[error("E[{n}] is not rational over the working field")]
    TorsionNotRational { n: u64 },
    #[error("torsion basis search for N = {n} gave up after {tries} draws")]
    TorsionSearchExhausted { n: u64, tries: usize },
    #[error("point does not lie in the expected torsion subgroup")]
    NotTorsion,
    #[error(transparent)]
    Field(#[from] FieldError),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Point {
    Infinity,
    Affine(Fe, Fe),
}

impl Point {
    pub fn is_infinity(&self) -> bool {
        matches!(self, Point::Infinity)
    }

    pub fn x(&self) -> Option<&Fe> {
        match self {
            Point::Infinity => None,
            Point::Affine(x, _) => Some(x),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Curve {
    pub a: Fe,
    pub b: Fe,
}

impl Curve {
    pub fn new(f: &ExtField, a: Fe, b: Fe) -> Result<Self, CurveError> {
        let disc = f.add(
            &f.mul_u64(&f.pow_u64(&a, 3), 4),
            &f.mul_u64(&f.square(&b), 27),
        );
        if disc.is_zero() {
            return Err(CurveError::Singular);
        }
        Ok(Curve { a, b })
    }

    pub fn j_invariant(&self, f: &ExtField) -> Fe {
        let a3 = f.mul_u64(&f.pow_u64(&self.a, 3), 4);
        let den = f.add(&a3, &f.mul_u64(&f.square(&self.b), 27));
        f.mul_u64(&f.div(&a3, &den).expect("nonsingular"), 1728)
    }

    pub fn rhs(&self, f: &ExtField, x: &Fe) -> Fe {
        let x3 = f.mul(&f.square(x), x);
        f.add(&f.add(&x3, &f.mul(&self.a, x)), &self.b)
    }

    pub fn contains(&self, f: &ExtField, pt: &Point) -> bool {
        match pt {
            Point::Infinity => true,
            Point::Affine(x, y) => f.square(y) == self.rhs(f, x),
        }
    }

    pub fn neg(&self, f: &ExtField, pt: &Point) -> Point {
        match pt {
            Point::Infinity => Point::Infinity,
            Point::Affine(x, y) => Point::Affine(x.clone(), f.neg(y)),
        }
    }

    pub fn add(&self, f: &ExtField, p1: &Point, p2: &Point) -> Point {
        let (x1, y1, x2, y2) = match (p1, p2) {
            (Point::Infinity, _) => return p2.clone(),
            (_, Point::Infinity) => return p1.clone(),
            (Point::Affine(x1, y1), Point::Affine(x2, y2)) => (x1, y1, x2, y2),
        };
        let lambda = if x1 == x2 {
            if y1 != y2 || y1.is_zero() {
                return Point::Infinity;
            }
            let num = f.add(&f.mul_u64(&f.square(x1), 3), &self.a);
            f.div(&num, &f.mul_u64(y1, 2)).expect("y != 0")
        } else {
            f.div(&f.sub(y2, y1), &f.sub(x2, x1)).expect("x1 != x2")
        };
        let x3 = f.sub(&f.sub(&f.square(&lambda), x1), x2);
        let y3 = f.sub(&f.mul(&lambda, &f.sub(x1, &x3)), y1);
        Point::Affine(x3, y3)
    }

    pub fn double(&self, f: &ExtField, pt: &Point) -> Point {
        self.add(f, pt, pt)
    }

    pub fn sub(&self, f: &ExtField, p1: &Point, p2: &Point) -> Point {
        self.add(f, p1, &self.neg(f, p2))
    }

    /// Double-and-add.
    pub fn mul_u128(&self, f: &ExtField, k: u128, pt: &Point) -> Point {
        let mut acc = Point::Infinity;
        if k == 0 {
            return acc;
        }
        for i in (0..128 - k.leading_zeros()).rev() {
            acc = self.double(f, &acc);
            if (k >> i) & 1 == 1 {
                acc = self.add(f, &acc, pt);
            }
        }
        acc
    }

    pub fn mul_i64(&self, f: &ExtField, k: i64, pt: &Point) -> Point {
        let r = self.mul_u128(f, k.unsigned_abs() as u128, pt);
        if k < 0 {
            self.neg(f, &r)
        } else {
            r
        }
    }

    pub fn mul_big(&self, f: &ExtField, k: &BigUint, pt: &Point) -> Point {
        let mut acc = Point::Infinity;
        for i in (0..k.bits()).rev() {
            acc = self.double(f, &acc);
            if k.bit(i) {
                acc = self.add(f, &acc, pt);
            }
        }
        acc
    }

    pub fn random_point<R: Rng + ?Sized>(&self, f: &ExtField, rng: &mut R) -> Point {
        loop {
            let x = f.random(rng);
            if let Some(y) = f.sqrt(&self.rhs(f, &x)) {
                let y = if rng.gen::<bool>() { f.neg(&y) } else { y };
                return Point::Affine(x, y);
            }
        }
    }

    /// The `i`-th point in a fixed enumeration of `x`-coordinates (used for
    /// deterministic auxiliary points); `None` if `x_i` gives no point.
    pub fn enumerated_point(&self, f: &ExtField, i: u128) -> Option<Point> {
        let x = f.element(i);
        f.sqrt(&self.rhs(f, &x)).map(|y| Point::Affine(x, y))
    }

    /// Coefficient-wise `p`-power conjugate curve `E^sigma`.
    pub fn conjugate(&self, f: &ExtField) -> Curve {
        Curve {
            a: f.frobenius(&self.a),
            b: f.frobenius(&self.b),
        }
    }

    /// Order of `pt` given a multiple `n` of it.
    pub fn order_dividing(&self, f: &ExtField, pt: &Point, n: u64) -> u64 {
        let mut ord = n;
        for q in crate::arith::prime_divisors(n) {
            while ord % q == 0 && self.mul_u128(f, (ord / q) as u128, pt).is_infinity() {
                ord /= q;
            }
        }
        ord
    }

    /// Applies the automorphism/isomorphism `(x, y) -> (u^2 x, u^3 y)`.
    pub fn apply_scalar_iso(f: &ExtField, u: &Fe, pt: &Point) -> Point {
        match pt {
            Point::Infinity => Point::Infinity,
            Point::Affine(x, y) => {
                let u2 = f.square(u);
                let u3 = f.mul(&u2, u);
                Point::Affine(f.mul(&u2, x), f.mul(&u3, y))
            }
        }
    }
}

/// Frobenius `x -> x^p` on point coordinates (maps `E` to `E^sigma`).
pub fn frobenius_point(f: &ExtField, pt: &Point) -> Point {
    match pt {
        Point::Infinity => Point::Infinity,
        Point::Affine(x, y) => Point::Affine(f.frobenius(x), f.frobenius(y)),
    }
}

/// The fixed representative with a given `j`:
/// `j = 0 -> y^2 = x^3 + 1`, `j = 1728 -> y^2 = x^3 + x`, otherwise
/// `a = 3k, b = 2k` with `k = j / (1728 - j)`.
pub fn curve_from_j(f: &ExtField, j: &Fe) -> Curve {
    let j1728 = f.from_u64(1728);
    if j.is_zero() {
        Curve { a: f.zero(), b: f.one() }
    } else if *j == j1728 {
        Curve { a: f.one(), b: f.zero() }
    } else {
        let k = f.div(j, &f.sub(&j1728, j)).expect("j != 1728");
        Curve {
            a: f.mul_u64(&k, 3),
            b: f.mul_u64(&k, 2),
        }
    }
}

/// Exhaustive `#E(F_{p^2})` for a curve with coefficients in the quadratic
/// field model `quad` (degree 2). Uses the quadratic character through the
/// norm to `F_p`.
pub fn count_points_fp2(quad: &ExtField, a: &Fe, b: &Fe) -> u64 {
    assert_eq!(quad.degree(), 2);
    let p = quad.p();
    let e = Curve { a: a.clone(), b: b.clone() };
    let mut total: i64 = (p * p + 1) as i64;
    for i in 0..(p * p) as u128 {
        let x = quad.element(i);
        let r = e.rhs(quad, &x);
        if r.is_zero() {
            continue;
        }
        let norm = quad.mul(&r, &quad.frobenius(&r));
        total += crate::arith::legendre(norm.coeffs()[0] as i64, p) as i64;
    }
    total as u64
}

/// Supersingularity of a curve defined over `F_{p^2}` (coefficients in the
/// quadratic subfield of `f`): `#E(F_{p^2}) = 1 mod p`.
///
/// Exact point counting for `p < 200`; otherwise every sampled point of
/// `E(F_{p^2})` must be killed by one of the supersingular group orders
/// `(p+1)^2, (p-1)^2, p^2+1, p^2+p+1, p^2-p+1`.
pub fn is_supersingular<R: Rng + ?Sized>(f: &ExtField, e: &Curve, rng: &mut R) -> bool {
    let p = f.p();
    let (qa, qb) = match (f.project_quadratic(&e.a), f.project_quadratic(&e.b)) {
        (Some(a), Some(b)) => (a, b),
        _ => panic!("is_supersingular expects a curve over F_p^2"),
    };
    if p < 200 {
        return count_points_fp2(f.quadratic_subfield(), &qa, &qb) % p == 1;
    }
    let quad = f.quadratic_subfield().clone();
    let eq = Curve { a: qa, b: qb };
    let p = p as u128;
    let candidates = [
        (p + 1) * (p + 1),
        (p - 1) * (p - 1),
        p * p + 1,
        p * p + p + 1,
        p * p - p + 1,
    ];
    let samples: Vec<Point> = (0..12).map(|_| eq.random_point(&quad, rng)).collect();
    candidates
        .iter()
        .any(|&c| samples.iter().all(|pt| eq.mul_u128(&quad, c, pt).is_infinity()))
}

/// `Frob_{p^2}(R) + pR = O`.
pub fn frobenius_is_minus_p(f: &ExtField, e: &Curve, pt: &Point) -> bool {
    let fr = frobenius_point(f, &frobenius_point(f, pt));
    let pr = e.mul_u128(f, f.p() as u128, pt);
    e.add(f, &fr, &pr).is_infinity()
}

/// Generator of `F_{p^2}^* / (F_{p^2}^*)^6`: first element of the quadratic
/// model that is neither a square nor a cube, embedded into `f`.
fn twist_generator(f: &ExtField) -> Fe {
    f.cached("twist_generator", 6, || {
        let quad = f.quadratic_subfield();
        let qm1 = quad.order() - 1u32;
        let e2 = &qm1 / 2u32;
        let e3 = &qm1 / 3u32;
        let g = (1u128..)
            .map(|n| quad.element(n))
            .find(|z| !quad.is_one(&quad.pow(z, &e2)) && !quad.is_one(&quad.pow(z, &e3)))
            .expect("F_p2^* has elements of order divisible by 6");
        f.embed_quadratic(&g)
    })
}

/// The twist of `curve_from_j(j)` over `F_{p^2}` on which `Frob_{p^2} = [-p]`.
///
/// `j` is given in the quadratic field model. Twists are tried in a fixed
/// order (powers of a deterministic twisting element) and the first one
/// passing the Frobenius test on `checks` random points is returned.
pub fn canonical_model<R: Rng + ?Sized>(
    f: &ExtField,
    j_quad: &Fe,
    rng: &mut R,
) -> Result<Curve, CurveError> {
    let j = f.embed_quadratic(j_quad);
    let base = curve_from_j(f, &j);
    let g = twist_generator(f);
    let twists: Vec<Curve> = if j.is_zero() {
        (0..6)
            .map(|k| Curve { a: f.zero(), b: f.mul(&base.b, &f.pow_u64(&g, k)) })
            .collect()
    } else if j == f.from_u64(1728) {
        (0..4)
            .map(|k| Curve { a: f.mul(&base.a, &f.pow_u64(&g, k)), b: f.zero() })
            .collect()
    } else {
        (0..2)
            .map(|k| Curve {
                a: f.mul(&base.a, &f.pow_u64(&g, 2 * k)),
                b: f.mul(&base.b, &f.pow_u64(&g, 3 * k)),
            })
            .collect()
    };
    for e in twists {
        let ok = (0..4).all(|_| {
            let pt = e.random_point(f, rng);
            frobenius_is_minus_p(f, &e, &pt)
        });
        if ok {
            return Ok(e);
        }
    }
    Err(CurveError::NoCanonicalTwist(j_quad.clone()))
}

/// `n = |(-p)^m - 1|`, so that `E(F_{p^{2m}}) = E[n]` on a canonical model.
pub fn canonical_exponent(f: &ExtField) -> u128 {
    let m = (f.degree() / 2) as u32;
    let pm = (f.p() as u128).pow(m);
    if m % 2 == 0 {
        pm - 1
    } else {
        pm + 1
    }
}

/// Automorphism scalars `u` acting as `(x, y) -> (u^2 x, u^3 y)`:
/// `mu_6` for `j = 0`, `mu_4` for `j = 1728`, `{1, -1}` otherwise.
pub fn automorphism_scalars(f: &ExtField, e: &Curve) -> Vec<Fe> {
    let order = if e.a.is_zero() {
        6
    } else if e.b.is_zero() {
        4
    } else {
        2
    };
    let zeta = f.primitive_nth_root(order).expect("mu_6 and mu_4 lie in F_p2");
    let mut out = Vec::with_capacity(order as usize);
    let mut acc = f.one();
    for _ in 0..order {
        out.push(acc.clone());
        acc = f.mul(&acc, &zeta);
    }
    out
}

/// All isomorphisms `E1 -> E2` over `f`, as scalars `u` with
/// `a2 = u^4 a1` and `b2 = u^6 b1`. Empty when the `j`-invariants differ or
/// no suitable `u` lies in `f`.
pub fn isomorphisms_between(f: &ExtField, e1: &Curve, e2: &Curve) -> Vec<Fe> {
    if e1.j_invariant(f) != e2.j_invariant(f) {
        return Vec::new();
    }
    let one_u = if e1.a.is_zero() {
        // u^6 = b2/b1: find a cube root w that is a square, then u = sqrt(w).
        let r = f.div(&e2.b, &e1.b).expect("b1 != 0");
        f.nth_root_prime(&r, 3).and_then(|w| {
            let z3 = f.primitive_nth_root(3).expect("mu_3 in F_p2");
            let mut w = w;
            for _ in 0..3 {
                if let Some(u) = f.sqrt(&w) {
                    return Some(u);
                }
                w = f.mul(&w, &z3);
            }
            None
        })
    } else if e1.b.is_zero() {
        let r = f.div(&e2.a, &e1.a).expect("a1 != 0");
        f.sqrt(&r)
            .and_then(|s| f.sqrt(&s).or_else(|| f.sqrt(&f.neg(&s))))
    } else {
        let r = f
            .div(&f.mul(&e2.b, &e1.a), &f.mul(&e1.b, &e2.a))
            .expect("generic coefficients nonzero");
        f.sqrt(&r)
    };
    let Some(u) = one_u else {
        return Vec::new();
    };
    let mut out: Vec<Fe> = automorphism_scalars(f, e2)
        .iter()
        .map(|s| f.mul(&u, s))
        .collect();
    out.sort();
    out
}

/// A basis `(P, Q)` of `E[N]` together with `zeta = e_N(P, Q)`.
#[derive(Clone, Debug)]
pub struct TorsionBasis {
    pub n: u64,
    pub p: Point,
    pub q: Point,
    pub zeta: Fe,
}

/// Samples a basis of `E[N]` on a canonical model by cofactor
/// multiplication, accepting when the Weil pairing has exact order `N`.
pub fn torsion_basis<R: Rng + ?Sized>(
    f: &ExtField,
    e: &Curve,
    n: u64,
    rng: &mut R,
) -> Result<TorsionBasis, CurveError> {
    let exp = canonical_exponent(f);
    if exp % n as u128 != 0 {
        return Err(CurveError::TorsionNotRational { n });
    }
    if n == 1 {
        return Ok(TorsionBasis { n, p: Point::Infinity, q: Point::Infinity, zeta: f.one() });
    }
    let cof = exp / n as u128;
    let primes = crate::arith::prime_divisors(n);
    const TRIES: usize = 500;
    for _ in 0..TRIES {
        let p = e.mul_u128(f, cof, &e.random_point(f, rng));
        let q = e.mul_u128(f, cof, &e.random_point(f, rng));
        if p.is_infinity() || q.is_infinity() {
            continue;
        }
        let z = weil_pairing(f, e, &p, &q, n)?;
        if primes.iter().all(|&r| !f.is_one(&f.pow_u64(&z, n / r))) {
            return Ok(TorsionBasis { n, p, q, zeta: z });
        }
    }
    Err(CurveError::TorsionSearchExhausted { n, tries: TRIES })
}

/// A basis of `E[N]` whose Weil pairing is exactly the given primitive
/// root `zeta` (the second vector is rescaled).
pub fn normalized_torsion_basis<R: Rng + ?Sized>(
    f: &ExtField,
    e: &Curve,
    n: u64,
    zeta: &Fe,
    rng: &mut R,
) -> Result<TorsionBasis, CurveError> {
    let mut b = torsion_basis(f, e, n, rng)?;
    if n == 1 {
        return Ok(b);
    }
    let k = f.dlog_mu(&b.zeta, zeta, n)?;
    let kinv = crate::arith::inv_mod(k, n).ok_or(CurveError::NotTorsion)?;
    b.q = e.mul_u128(f, kinv as u128, &b.q);
    b.zeta = zeta.clone();
    debug_assert_eq!(weil_pairing(f, e, &b.p, &b.q, n).unwrap(), *zeta);
    Ok(b)
}

/// Matrix (columns = images of the basis vectors, entries mod N) of the
/// automorphism `u` on a normalized basis.
pub fn automorphism_matrix(
    f: &ExtField,
    e: &Curve,
    basis: &TorsionBasis,
    u: &Fe,
) -> Result<[u64; 4], CurveError> {
    if basis.n == 1 {
        return Ok([0, 0, 0, 0]);
    }
    let up = Curve::apply_scalar_iso(f, u, &basis.p);
    let uq = Curve::apply_scalar_iso(f, u, &basis.q);
    let (a, c) = point_coordinates(f, e, basis, &up)?;
    let (b, d) = point_coordinates(f, e, basis, &uq)?;
    Ok([a, b, c, d])
}
