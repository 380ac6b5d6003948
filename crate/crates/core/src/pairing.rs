//! Weil pairing by Miller's algorithm, and coordinates of torsion points.

use crate::curve::{CurveError, Curve, Point, TorsionBasis};
use crate::field::{ExtField, Fe};

/// Evaluates the Miller function `f_{n,P}` (divisor `n(P) - n(O)`) at `t`.
/// Returns `None` when any line or vertical vanishes at `t`.
fn miller(f: &ExtField, e: &Curve, pt: &Point, n: u64, t: &Point) -> Option<Fe> {
    let (xt, yt) = match t {
        Point::Infinity => return None,
        Point::Affine(x, y) => (x, y),
    };
    let mut acc = f.one();
    let mut v = pt.clone();
    // Line through v and w evaluated at t, divided by the vertical at v + w.
    let step = |v: &Point, w: &Point| -> Option<(Fe, Point)> {
        let (xv, yv) = match v {
            Point::Affine(x, y) => (x, y),
            Point::Infinity => return None,
        };
        let sum = e.add(f, v, w);
        let line = match (w, &sum) {
            (_, Point::Infinity) => f.sub(xt, xv),
            (Point::Affine(xw, yw), Point::Affine(xs, _)) => {
                let lambda = if xv == xw {
                    let num = f.add(&f.mul_u64(&f.square(xv), 3), &e.a);
                    f.div(&num, &f.mul_u64(yv, 2)).ok()?
                } else {
                    f.div(&f.sub(yw, yv), &f.sub(xw, xv)).ok()?
                };
                let l = f.sub(&f.sub(yt, yv), &f.mul(&lambda, &f.sub(xt, xv)));
                let vert = f.sub(xt, xs);
                if vert.is_zero() {
                    return None;
                }
                f.div(&l, &vert).ok()?
            }
            _ => return None,
        };
        if line.is_zero() {
            return None;
        }
        Some((line, sum))
    };
    for i in (0..63 - n.leading_zeros()).rev() {
        let (l, s) = step(&v, &v.clone())?;
        acc = f.mul(&f.square(&acc), &l);
        v = s;
        if (n >> i) & 1 == 1 {
            let (l, s) = step(&v, pt)?;
            acc = f.mul(&acc, &l);
            v = s;
        }
    }
    debug_assert!(v.is_infinity());
    Some(acc)
}

/// `e_N(P, Q)` as the quotient
/// `[f_P(Q+S) / f_P(S)] / [f_Q(P-S) / f_Q(-S)]`
/// with the auxiliary point `S` taken from a fixed enumeration of points and
/// re-chosen until no evaluation degenerates.
pub fn weil_pairing(
    f: &ExtField,
    e: &Curve,
    p: &Point,
    q: &Point,
    n: u64,
) -> Result<Fe, CurveError> {
    if !e.mul_u128(f, n as u128, p).is_infinity() || !e.mul_u128(f, n as u128, q).is_infinity() {
        return Err(CurveError::NotTorsion);
    }
    if n == 1 || p.is_infinity() || q.is_infinity() || p == q {
        return Ok(f.one());
    }
    // f_{n,P} = f_{d,P}^{n/d} when P has order d | n.
    let dp = e.order_dividing(f, p, n);
    let dq = e.order_dividing(f, q, n);
    let eval = |pt: &Point, d: u64, t: &Point| {
        miller(f, e, pt, d, t).map(|v| f.pow_u64(&v, n / d))
    };
    let mut idx = 1u128;
    loop {
        let s = loop {
            if let Some(s) = e.enumerated_point(f, idx) {
                idx += 1;
                break s;
            }
            idx += 1;
        };
        let qs = e.add(f, q, &s);
        let ps = e.sub(f, p, &s);
        let ms = e.neg(f, &s);
        let vals = (
            eval(p, dp, &qs),
            eval(p, dp, &s),
            eval(q, dq, &ps),
            eval(q, dq, &ms),
        );
        if let (Some(a), Some(b), Some(c), Some(d)) = vals {
            let num = f.mul(&a, &d);
            let den = f.mul(&b, &c);
            if let Ok(z) = f.div(&num, &den) {
                return Ok(z);
            }
        }
    }
}

/// Coordinates `(x, y)` of `R = xP + yQ` in a basis with `e_N(P, Q) = zeta`:
/// `x = log e(R, Q)` and `y = log e(P, R)`.
pub fn point_coordinates(
    f: &ExtField,
    e: &Curve,
    basis: &TorsionBasis,
    r: &Point,
) -> Result<(u64, u64), CurveError> {
    let n = basis.n;
    let x = f.dlog_mu(&weil_pairing(f, e, r, &basis.q, n)?, &basis.zeta, n)?;
    let y = f.dlog_mu(&weil_pairing(f, e, &basis.p, r, n)?, &basis.zeta, n)?;
    Ok((x, y))
}
