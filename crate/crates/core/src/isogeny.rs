//! Separable isogenies with a cyclic kernel, by Vélu's sum-over-kernel
//! formulas, and transport of torsion bases along them.

use crate::curve::{Curve, CurveError, Point, TorsionBasis};
use crate::field::{ExtField, Fe};
use crate::pairing::point_coordinates;

#[derive(Clone, Debug)]
struct VeluTerm {
    xq: Fe,
    yq: Fe,
    u: Fe,
    v: Fe,
    gxgy: Fe,
}

#[derive(Clone, Debug)]
pub struct Isogeny {
    pub domain: Curve,
    pub codomain: Curve,
    pub kernel_generator: Point,
    pub degree: u64,
    /// All `x`-coordinates of nonzero kernel points.
    kernel_xs: Vec<Fe>,
    terms: Vec<VeluTerm>,
}

/// Generators `Q, P, P + Q, ..., P + (l-1)Q` of the `l + 1` cyclic
/// subgroups of order `l` in `E[l] = <P, Q>`.
pub fn kernel_subgroups(
    f: &ExtField,
    e: &Curve,
    basis: &TorsionBasis,
) -> Vec<Point> {
    let l = basis.n;
    let mut out = Vec::with_capacity(l as usize + 1);
    out.push(basis.q.clone());
    let mut acc = basis.p.clone();
    for _ in 0..l {
        out.push(acc.clone());
        acc = e.add(f, &acc, &basis.q);
    }
    out
}

/// Vélu's isogeny with kernel `<k>`, where `k` has exact order `degree`.
pub fn velu(f: &ExtField, e: &Curve, k: &Point, degree: u64) -> Result<Isogeny, CurveError> {
    if degree < 2
        || !e.mul_u128(f, degree as u128, k).is_infinity()
        || e.order_dividing(f, k, degree) != degree
    {
        return Err(CurveError::NotTorsion);
    }
    let mut multiples = Vec::with_capacity(degree as usize);
    let mut acc = k.clone();
    for _ in 1..degree {
        multiples.push(acc.clone());
        acc = e.add(f, &acc, k);
    }
    let kernel_xs: Vec<Fe> = multiples.iter().map(|q| q.x().unwrap().clone()).collect();
    let mut terms = Vec::new();
    let mut v_sum = f.zero();
    let mut w_sum = f.zero();
    // i K for 1 <= i <= degree/2 is a set of representatives of (G \ O) / +-1.
    for (i, q) in multiples.iter().enumerate().take((degree / 2) as usize) {
        let Point::Affine(xq, yq) = q else { unreachable!() };
        let two_torsion = 2 * (i as u64 + 1) == degree;
        let gx = f.add(&f.mul_u64(&f.square(xq), 3), &e.a);
        let gy = f.neg(&f.mul_u64(yq, 2));
        let v = if two_torsion { gx.clone() } else { f.mul_u64(&gx, 2) };
        let u = f.square(&gy);
        v_sum = f.add(&v_sum, &v);
        w_sum = f.add(&w_sum, &f.add(&u, &f.mul(xq, &v)));
        terms.push(VeluTerm {
            xq: xq.clone(),
            yq: yq.clone(),
            u,
            v,
            gxgy: f.mul(&gx, &gy),
        });
    }
    let codomain = Curve::new(
        f,
        f.sub(&e.a, &f.mul_u64(&v_sum, 5)),
        f.sub(&e.b, &f.mul_u64(&w_sum, 7)),
    )?;
    Ok(Isogeny {
        domain: e.clone(),
        codomain,
        kernel_generator: k.clone(),
        degree,
        kernel_xs,
        terms,
    })
}

impl Isogeny {
    pub fn evaluate(&self, f: &ExtField, pt: &Point) -> Point {
        let (x, y) = match pt {
            Point::Infinity => return Point::Infinity,
            Point::Affine(x, y) => (x, y),
        };
        if self.kernel_xs.iter().any(|xq| xq == x) {
            return Point::Infinity;
        }
        let mut big_x = x.clone();
        let mut big_y = y.clone();
        let two_y = f.mul_u64(y, 2);
        for t in &self.terms {
            let d = f.inv(&f.sub(x, &t.xq)).expect("x outside kernel");
            let d2 = f.square(&d);
            let d3 = f.mul(&d2, &d);
            big_x = f.add(&big_x, &f.add(&f.mul(&t.v, &d), &f.mul(&t.u, &d2)));
            let corr = f.add(
                &f.mul(&f.mul(&t.u, &two_y), &d3),
                &f.mul(&f.sub(&f.mul(&t.v, &f.sub(y, &t.yq)), &t.gxgy), &d2),
            );
            big_y = f.sub(&big_y, &corr);
        }
        Point::Affine(big_x, big_y)
    }
}

/// Matrix, in `target_basis`, of the images under `u o alpha` of the vectors
/// of `source_basis`, where `u` is the isomorphism scalar from the codomain
/// of `alpha` onto `target`. Columns are the images of `P` and `Q`.
pub fn image_matrix(
    f: &ExtField,
    iso: &Isogeny,
    u: &Fe,
    target: &Curve,
    target_basis: &TorsionBasis,
    source_basis: &TorsionBasis,
) -> Result<[u64; 4], CurveError> {
    if target_basis.n == 1 {
        return Ok([0; 4]);
    }
    let ip = Curve::apply_scalar_iso(f, u, &iso.evaluate(f, &source_basis.p));
    let iq = Curve::apply_scalar_iso(f, u, &iso.evaluate(f, &source_basis.q));
    let (a, c) = point_coordinates(f, target, target_basis, &ip)?;
    let (b, d) = point_coordinates(f, target, target_basis, &iq)?;
    Ok([a, b, c, d])
}
