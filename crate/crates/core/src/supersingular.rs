//! Enumeration of the supersingular `j`-invariants of a characteristic.

use std::collections::{BTreeSet, VecDeque};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::arith::{legendre, mult_order};
use crate::curve::{canonical_model, curve_from_j, is_supersingular, torsion_basis, CurveError};
use crate::field::{ExtField, Fe};
use crate::isogeny::{kernel_subgroups, velu};

/// Class-number-one CM `j`-invariants with the fundamental discriminant of
/// their CM field; such a `j` is supersingular when `p` is inert.
const CM_SEEDS: &[(i64, i64)] = &[
    (-3, 0),
    (-3, 54000),
    (-3, -12288000),
    (-4, 1728),
    (-4, 287496),
    (-7, -3375),
    (-7, 16581375),
    (-8, 8000),
    (-11, -32768),
    (-19, -884736),
    (-43, -884736000),
    (-67, -147197952000),
    (-163, -262537412640768000),
];

/// A supersingular `j` in `F_p` to start the walk from.
pub fn seed_j(p: u64) -> Option<i64> {
    if p % 4 == 3 {
        return Some(1728);
    }
    if p % 3 == 2 {
        return Some(0);
    }
    CM_SEEDS
        .iter()
        .find(|&&(d, _)| legendre(d, p) == -1)
        .map(|&(_, j)| j)
}

/// Supersingular `j`-invariants of characteristic `p`, as elements of the
/// quadratic field model, sorted by coefficient vector.
///
/// Breadth-first walk over `l_enum`-isogenies from a seed curve; the walk is
/// connected, so it reaches every supersingular `j`.
pub fn enumerate_supersingular(p: u64, l_enum: u64, seed: u64) -> Result<Vec<Fe>, CurveError> {
    let m = mult_order((p as i64).wrapping_neg().rem_euclid(l_enum as i64) as u64, l_enum) as usize;
    let f = ExtField::build(p, m)?;
    let quad = f.quadratic_subfield().clone();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let start = match seed_j(p) {
        Some(j) => quad.from_i64(j.rem_euclid(p as i64)),
        None => scan_for_supersingular(&f, &mut rng).ok_or(CurveError::NoCanonicalTwist(quad.zero()))?,
    };
    let mut seen = BTreeSet::from([start.clone()]);
    let mut queue = VecDeque::from([start]);
    while let Some(j) = queue.pop_front() {
        let e = canonical_model(&f, &j, &mut rng)?;
        let b = torsion_basis(&f, &e, l_enum, &mut rng)?;
        for k in kernel_subgroups(&f, &e, &b) {
            let iso = velu(&f, &e, &k, l_enum)?;
            let j2 = f
                .project_quadratic(&iso.codomain.j_invariant(&f))
                .expect("supersingular j lies in F_p2");
            if seen.insert(j2.clone()) {
                queue.push_back(j2);
            }
        }
    }
    Ok(seen.into_iter().collect())
}

/// Exhaustive fallback: the first supersingular `j` in `F_p`.
fn scan_for_supersingular(f: &ExtField, rng: &mut ChaCha8Rng) -> Option<Fe> {
    let quad = f.quadratic_subfield();
    (0..f.p()).map(|j| quad.from_u64(j)).find(|j| {
        let e = curve_from_j(f, &f.embed_quadratic(j));
        is_supersingular(f, &e, rng)
    })
}

/// The isogeny degree used for enumeration when the graph under study has
/// degree `ell`: 3 when `ell = 2`, otherwise 2.
pub fn enumeration_degree(ell: u64) -> u64 {
    if ell == 2 {
        3
    } else {
        2
    }
}

/// Hex label of an `F_p2` element: `c0:c1` in lowercase hex.
pub fn j_label(j: &Fe) -> String {
    format!("{:x}:{:x}", j.coeffs()[0], j.coeffs()[1])
}

/// Inverse of [`j_label`].
pub fn parse_j_label(s: &str, p: u64) -> Option<[u64; 2]> {
    let (a, b) = s.split_once(':')?;
    let a = u64::from_str_radix(a, 16).ok()?;
    let b = u64::from_str_radix(b, 16).ok()?;
    (a < p && b < p).then_some([a, b])
}
