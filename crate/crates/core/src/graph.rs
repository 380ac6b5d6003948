//! Supersingular isogeny graphs with level structure.
//!
//! Construction is split in three layers so that graphs for different `H`
//! at the same level share their curves and bases:
//!
//! * [`CurveSet`]: one canonical (`Frob_{p^2} = [-p]`) model per
//!   supersingular `j`, over a field where every needed torsion is rational;
//! * [`LevelBases`]: a basis of `E[N]` per curve, normalized so that the
//!   Weil pairing is a fixed `zeta_N`, plus automorphism and Frobenius
//!   matrices;
//! * [`EdgeTable`]: for each curve and each of the `l + 1` kernels, the
//!   target curve and the matrix `T` of the isogeny on the bases.
//!
//! A vertex `(j, M)` then has out-edges to `(j', T M)` for every kernel.

use std::collections::HashMap;

use num_rational::Ratio;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::arith::{gcd, is_prime, lcm, mult_order};
use crate::curve::{
    automorphism_matrix, automorphism_scalars, canonical_model, frobenius_point,
    isomorphisms_between, normalized_torsion_basis, torsion_basis, Curve, CurveError, Point,
    TorsionBasis,
};
use crate::field::{ExtField, Fe, FieldError};
use crate::isogeny::{image_matrix, kernel_subgroups, velu};
use crate::level::{aut_of_pair, Gl2, KInfo, LevelError, LevelSubgroup, Mat};
use crate::pairing::point_coordinates;
use crate::supersingular::{enumerate_supersingular, enumeration_degree};

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("invalid parameters: {0}")]
    Params(String),
    #[error("invariant breach: {0}")]
    Breach(String),
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Level(#[from] LevelError),
}

/// Checks the standing hypotheses: `p >= 5` and `l` distinct primes, neither
/// dividing `N`.
pub fn validate_params(p: u64, ell: u64, n: u32) -> Result<(), GraphError> {
    if p < 5 || !is_prime(p) {
        return Err(GraphError::Params(format!("p = {p} must be a prime >= 5")));
    }
    if !is_prime(ell) {
        return Err(GraphError::Params(format!("l = {ell} must be prime")));
    }
    if p == ell {
        return Err(GraphError::Params("p and l must be distinct".into()));
    }
    if n == 0 || n as u64 % p == 0 || n as u64 % ell == 0 {
        return Err(GraphError::Params(format!("N = {n} must be coprime to p and l")));
    }
    Ok(())
}

fn rng_for(seed: u64, purpose: u64, level: u64, i: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((purpose << 56) ^ (level << 24) ^ i as u64);
    rng
}

/// Smallest `m` with `(-p)^m = 1 mod L`: over `F_{p^{2m}}` the canonical
/// models have all of `E[L]` rational.
pub fn field_half_degree(p: u64, l: u64) -> usize {
    if l <= 2 {
        return 1;
    }
    mult_order((l - p % l) % l, l) as usize
}

#[derive(Clone, Debug)]
pub struct CurveSet {
    pub p: u64,
    pub seed: u64,
    pub field: ExtField,
    /// Supersingular `j`-invariants in the quadratic model, sorted.
    pub js: Vec<Fe>,
    pub curves: Vec<Curve>,
    pub auts: Vec<Vec<Fe>>,
    index: HashMap<Fe, usize>,
}

impl CurveSet {
    /// `torsion` lists every torsion order that will be needed (levels and
    /// isogeny degrees); `ell` selects the enumeration degree.
    pub fn new(p: u64, ell: u64, torsion: &[u64], seed: u64) -> Result<Self, GraphError> {
        let js = enumerate_supersingular(p, enumeration_degree(ell), seed)?;
        let l = torsion.iter().fold(1u64, |a, &b| lcm(a, b));
        let field = ExtField::build(p, field_half_degree(p, l))?;
        let curves: Vec<Curve> = js
            .par_iter()
            .enumerate()
            .map(|(i, j)| canonical_model(&field, j, &mut rng_for(seed, 0, 0, i)))
            .collect::<Result<_, _>>()?;
        let auts = curves.iter().map(|e| automorphism_scalars(&field, e)).collect();
        let index = js.iter().enumerate().map(|(i, j)| (j.clone(), i)).collect();
        Ok(CurveSet { p, seed, field, js, curves, auts, index })
    }

    pub fn len(&self) -> usize {
        self.js.len()
    }

    pub fn is_empty(&self) -> bool {
        self.js.is_empty()
    }

    /// Index of the curve with the given `j` (big-field element).
    pub fn position_of(&self, j: &Fe) -> Option<usize> {
        let q = self.field.project_quadratic(j)?;
        self.index.get(&q).copied()
    }

    /// The isomorphism scalar from `e` onto the stored curve with the same
    /// `j`, and that curve's index.
    pub fn identify(&self, e: &Curve) -> Result<(usize, Fe), GraphError> {
        let f = &self.field;
        let t = self
            .position_of(&e.j_invariant(f))
            .ok_or_else(|| GraphError::Breach("codomain j is not in the supersingular list".into()))?;
        let u = isomorphisms_between(f, e, &self.curves[t])
            .into_iter()
            .next()
            .ok_or_else(|| GraphError::Breach("no isomorphism onto the canonical model".into()))?;
        Ok((t, u))
    }

    /// Eichler mass `sum 1/|Aut(E)|`.
    pub fn mass(&self) -> Ratio<i64> {
        self.auts
            .iter()
            .map(|a| Ratio::new(1, a.len() as i64))
            .sum()
    }
}

#[derive(Clone, Debug)]
pub struct LevelBases {
    pub n: u32,
    pub zeta: Fe,
    pub bases: Vec<TorsionBasis>,
    pub aut_mats: Vec<Vec<Mat>>,
    /// Per curve: index of the conjugate curve and the matrix of
    /// `u o sigma` on the bases.
    pub frobenius: Vec<(usize, Mat)>,
}

fn to_mat(m: [u64; 4]) -> Mat {
    m.map(|x| x as u32)
}

impl LevelBases {
    pub fn new(cs: &CurveSet, n: u32) -> Result<Self, GraphError> {
        let f = &cs.field;
        let zeta = f.primitive_nth_root(n as u64)?;
        let bases: Vec<TorsionBasis> = cs
            .curves
            .par_iter()
            .enumerate()
            .map(|(i, e)| {
                normalized_torsion_basis(f, e, n as u64, &zeta, &mut rng_for(cs.seed, 1, n as u64, i))
            })
            .collect::<Result<_, _>>()?;
        let aut_mats: Vec<Vec<Mat>> = cs
            .curves
            .par_iter()
            .zip(bases.par_iter())
            .zip(cs.auts.par_iter())
            .map(|((e, b), us)| {
                us.iter()
                    .map(|u| automorphism_matrix(f, e, b, u).map(to_mat))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<_, _>>()?;
        let frobenius: Vec<(usize, Mat)> = (0..cs.len())
            .into_par_iter()
            .map(|i| {
                let conj = cs.curves[i].conjugate(f);
                let (t, u) = cs.identify(&conj)?;
                if n == 1 {
                    return Ok((t, [0; 4]));
                }
                let img = |pt: &Point| Curve::apply_scalar_iso(f, &u, &frobenius_point(f, pt));
                let (a, c) = point_coordinates(f, &cs.curves[t], &bases[t], &img(&bases[i].p))?;
                let (b, d) = point_coordinates(f, &cs.curves[t], &bases[t], &img(&bases[i].q))?;
                Ok((t, to_mat([a, b, c, d])))
            })
            .collect::<Result<_, GraphError>>()?;
        Ok(LevelBases { n, zeta, bases, aut_mats, frobenius })
    }
}

/// Per source curve, the `l + 1` pairs `(target curve, T)`.
#[derive(Clone, Debug)]
pub struct EdgeTable {
    pub ell: u64,
    pub n: u32,
    pub edges: Vec<Vec<(usize, Mat)>>,
}

impl EdgeTable {
    pub fn new(cs: &CurveSet, lb: &LevelBases, ell: u64) -> Result<Self, GraphError> {
        let f = &cs.field;
        let n = lb.n;
        let g = Gl2::new(n);
        let edges = (0..cs.len())
            .into_par_iter()
            .map(|i| {
                let e = &cs.curves[i];
                let lb_ell = torsion_basis(f, e, ell, &mut rng_for(cs.seed, 2, ell, i))?;
                let mut out = Vec::with_capacity(ell as usize + 1);
                for k in kernel_subgroups(f, e, &lb_ell) {
                    let iso = velu(f, e, &k, ell)?;
                    let (t, u) = cs.identify(&iso.codomain)?;
                    let tm = to_mat(image_matrix(f, &iso, &u, &cs.curves[t], &lb.bases[t], &lb.bases[i])?);
                    if n > 1 && g.det(&tm) as u64 != ell % n as u64 {
                        return Err(GraphError::Breach(format!(
                            "isogeny matrix {tm:?} has determinant != l mod N"
                        )));
                    }
                    out.push((t, tm));
                }
                Ok(out)
            })
            .collect::<Result<Vec<_>, GraphError>>()?;
        Ok(EdgeTable { ell, n, edges })
    }
}

/// Curves, bases for each requested level, and the `l`-edge tables, built
/// once from a seed.
#[derive(Clone, Debug)]
pub struct Workspace {
    pub p: u64,
    pub ell: u64,
    pub cs: CurveSet,
    pub levels: Vec<(LevelBases, EdgeTable)>,
}

impl Workspace {
    pub fn new(p: u64, ell: u64, levels: &[u32], seed: u64) -> Result<Self, GraphError> {
        for &n in levels {
            validate_params(p, ell, n)?;
        }
        let mut torsion: Vec<u64> = levels.iter().map(|&n| n as u64).collect();
        torsion.push(ell);
        let cs = CurveSet::new(p, ell, &torsion, seed)?;
        let mut out = Vec::new();
        for &n in levels {
            let lb = LevelBases::new(&cs, n)?;
            let et = EdgeTable::new(&cs, &lb, ell)?;
            out.push((lb, et));
        }
        Ok(Workspace { p, ell, cs, levels: out })
    }

    pub fn level(&self, n: u32) -> Result<&(LevelBases, EdgeTable), GraphError> {
        self.levels
            .iter()
            .find(|(lb, _)| lb.n == n)
            .ok_or_else(|| GraphError::Params(format!("level {n} was not prepared")))
    }

    pub fn graph(&self, h: &LevelSubgroup) -> Result<IsogenyGraph, GraphError> {
        let (lb, et) = self.level(h.n)?;
        IsogenyGraph::assemble(&self.cs, lb, et, h)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vertex {
    pub index: usize,
    pub curve: usize,
    /// `j` in the quadratic model, `[c0, c1]`.
    pub j: [u64; 2],
    /// Canonical representative of the class.
    pub matrix: Mat,
    /// `|Aut(E, phi)|`.
    pub aut: u32,
    /// Minimal representative of the Weil invariant class in `R_H`.
    pub weil_exp: u32,
}

#[derive(Clone, Debug)]
pub struct IsogenyGraph {
    pub p: u64,
    pub ell: u64,
    pub h: LevelSubgroup,
    pub vertices: Vec<Vertex>,
    /// `adjacency[i][j]` counts edges from vertex `j` to vertex `i`.
    pub adjacency: Vec<Vec<u32>>,
    /// Per curve, matrix index to vertex id (`u32::MAX` off `GL2`).
    pub lookup: Vec<Vec<u32>>,
}

impl IsogenyGraph {
    pub fn assemble(
        cs: &CurveSet,
        lb: &LevelBases,
        et: &EdgeTable,
        h: &LevelSubgroup,
    ) -> Result<Self, GraphError> {
        let n = h.n;
        if lb.n != n || et.n != n {
            return Err(GraphError::Params("level mismatch".into()));
        }
        let g = Gl2::new(n);
        let gl2 = g.elements();
        let mut vertices = Vec::new();
        let mut lookup = Vec::with_capacity(cs.len());
        for c in 0..cs.len() {
            let mut table = vec![u32::MAX; g.size()];
            let auts = &lb.aut_mats[c];
            for m in &gl2 {
                if table[g.index(m)] != u32::MAX {
                    continue;
                }
                let id = vertices.len() as u32;
                for u in auts {
                    let um = g.mul(u, m);
                    for x in &h.elements {
                        table[g.index(&g.mul(&um, x))] = id;
                    }
                }
                let jq = cs.js[c].coeffs();
                vertices.push(Vertex {
                    index: id as usize,
                    curve: c,
                    j: [jq[0], jq[1]],
                    matrix: *m,
                    aut: aut_of_pair(auts, m, h),
                    weil_exp: h.weil_class(g.det(m) as u64),
                });
            }
            lookup.push(table);
        }
        let nv = vertices.len();
        let mut adjacency = vec![vec![0u32; nv]; nv];
        for v in &vertices {
            for (t, tm) in &et.edges[v.curve] {
                let w = lookup[*t][g.index(&g.mul(tm, &v.matrix))];
                if w == u32::MAX {
                    return Err(GraphError::Breach(format!(
                        "edge target of vertex {} is not invertible",
                        v.index
                    )));
                }
                adjacency[w as usize][v.index] += 1;
            }
        }
        let graph = IsogenyGraph {
            p: cs.p,
            ell: et.ell,
            h: h.clone(),
            vertices,
            adjacency,
            lookup,
        };
        graph.check_column_sums()?;
        Ok(graph)
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn k_info(&self) -> KInfo {
        self.h.k_info(self.ell)
    }

    pub fn check_column_sums(&self) -> Result<(), GraphError> {
        let n = self.len();
        for j in 0..n {
            let s: u64 = (0..n).map(|i| self.adjacency[i][j] as u64).sum();
            if s != self.ell + 1 {
                return Err(GraphError::Breach(format!(
                    "column {j} sums to {s}, expected {}",
                    self.ell + 1
                )));
            }
        }
        Ok(())
    }

    /// `sum 1/a_v`.
    pub fn mass(&self) -> Ratio<i64> {
        self.vertices.iter().map(|v| Ratio::new(1, v.aut as i64)).sum()
    }

    /// `(p - 1)/24 * [GL2 : H]`.
    pub fn expected_mass(&self) -> Ratio<i64> {
        Ratio::new(self.p as i64 - 1, 24) * Ratio::from_integer(self.h.index_in_gl2() as i64)
    }

    pub fn vertex_of(&self, curve: usize, m: &Mat) -> Option<usize> {
        let id = self.lookup.get(curve)?[self.h.gl2().index(m)];
        (id != u32::MAX).then_some(id as usize)
    }

    /// Adjoint for the form `H(v_i, v_j) = delta_ij a_i`:
    /// `A*[j][i] = a_i / a_j * A[i][j]`, which must be an integer.
    pub fn adjoint(&self) -> Result<Vec<Vec<u32>>, GraphError> {
        let n = self.len();
        let mut out = vec![vec![0u32; n]; n];
        for i in 0..n {
            for j in 0..n {
                let num = self.vertices[i].aut as u64 * self.adjacency[i][j] as u64;
                let den = self.vertices[j].aut as u64;
                if num % den != 0 {
                    return Err(GraphError::Breach(format!(
                        "adjoint entry ({j}, {i}) = {num}/{den} is not an integer"
                    )));
                }
                out[j][i] = (num / den) as u32;
            }
        }
        Ok(out)
    }

    /// Number of edges with multiplicity.
    pub fn edge_count(&self) -> u64 {
        self.adjacency.iter().flatten().map(|&x| x as u64).sum()
    }
}

/// Exact products and comparisons of small integer matrices.
pub fn mat_mul(a: &[Vec<u32>], b: &[Vec<u32>]) -> Vec<Vec<u64>> {
    let n = a.len();
    let mut out = vec![vec![0u64; n]; n];
    for i in 0..n {
        for k in 0..n {
            let x = a[i][k] as u64;
            if x == 0 {
                continue;
            }
            for j in 0..n {
                out[i][j] += x * b[k][j] as u64;
            }
        }
    }
    out
}

/// `P A P^-1 = A` for the vertex permutation `perm`.
pub fn is_automorphism(a: &[Vec<u32>], perm: &[usize]) -> bool {
    let n = a.len();
    (0..n).all(|i| (0..n).all(|j| a[perm[i]][perm[j]] == a[i][j]))
}

pub fn is_permutation(perm: &[usize]) -> bool {
    let mut seen = vec![false; perm.len()];
    for &x in perm {
        if x >= perm.len() || seen[x] {
            return false;
        }
        seen[x] = true;
    }
    true
}

/// Convenience: build `G(p, l, H)` from scratch.
pub fn build_graph(p: u64, ell: u64, h: &LevelSubgroup, seed: u64) -> Result<IsogenyGraph, GraphError> {
    if gcd(h.n as u64, p * ell) != 1 {
        return Err(GraphError::Params(format!("N = {} must be coprime to p and l", h.n)));
    }
    Workspace::new(p, ell, &[h.n], seed)?.graph(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::level::Family;

    #[test]
    fn p13_trivial_level_is_a_single_vertex_with_three_loops() {
        let h = LevelSubgroup::named(Family::Trivial, 1).unwrap();
        let g = build_graph(13, 2, &h, 1).unwrap();
        assert_eq!(g.adjacency, vec![vec![3]]);
    }

    #[test]
    fn p23_trivial_level() {
        let h = LevelSubgroup::named(Family::Trivial, 1).unwrap();
        let g = build_graph(23, 3, &h, 1).unwrap();
        assert_eq!(g.len(), 3);
        let mut auts: Vec<u32> = g.vertices.iter().map(|v| v.aut).collect();
        auts.sort();
        assert_eq!(auts, vec![2, 4, 6]);
        // 1/2 + 1/4 + 1/6 = 11/12 = 22/24.
        assert_eq!(g.mass(), Ratio::new(11, 12));
        assert_eq!(g.mass(), g.expected_mass());
    }

    #[test]
    fn mass_identity_small_levels() {
        for (p, ell) in [(23u64, 2u64), (29, 3), (37, 2)] {
            for fam in [Family::Borel, Family::Full, Family::TorsionPoint, Family::NonsplitCartan] {
                for n in [3u32, 5] {
                    if n as u64 == ell || n as u64 == p {
                        continue;
                    }
                    let h = LevelSubgroup::named(fam, n).unwrap();
                    let g = build_graph(p, ell, &h, 3).unwrap();
                    assert_eq!(g.mass(), g.expected_mass(), "{p} {ell} {fam:?} {n}");
                }
            }
        }
    }

    #[test]
    fn mass_matches_brute_force_pair_count() {
        // Oracle: sum over curves of |GL2 / H| / |Aut E| equals sum 1/a_v,
        // by counting all (E, phi) pairs directly.
        let h = LevelSubgroup::named(Family::Borel, 3).unwrap();
        let ws = Workspace::new(23, 2, &[3], 5).unwrap();
        let g = ws.graph(&h).unwrap();
        let cosets = crate::level::gl2_order(3) as i64 / h.order() as i64;
        let brute: Ratio<i64> = ws
            .cs
            .auts
            .iter()
            .map(|a| Ratio::new(cosets, a.len() as i64))
            .sum();
        assert_eq!(g.mass(), brute);
        assert_eq!(ws.cs.mass(), Ratio::new(22, 24));
    }

    #[test]
    fn full_level_generic_curve_contributes_half_of_gl2() {
        let h = LevelSubgroup::named(Family::Full, 3).unwrap();
        let ws = Workspace::new(23, 2, &[3], 2).unwrap();
        let g = ws.graph(&h).unwrap();
        for (c, a) in ws.cs.auts.iter().enumerate() {
            let count = g.vertices.iter().filter(|v| v.curve == c).count();
            assert_eq!(count * a.len(), 48, "curve {c}");
        }
    }

    #[test]
    fn deterministic_across_runs() {
        let h = LevelSubgroup::figure_one();
        let a = build_graph(23, 3, &h, 11).unwrap();
        let b = build_graph(23, 3, &h, 11).unwrap();
        assert_eq!(a.vertices, b.vertices);
        assert_eq!(a.adjacency, b.adjacency);
    }

    #[test]
    fn rejects_bad_parameters() {
        let h = LevelSubgroup::named(Family::Trivial, 1).unwrap();
        assert!(matches!(build_graph(23, 23, &h, 0), Err(GraphError::Params(_))));
        let b = LevelSubgroup::named(Family::Borel, 3).unwrap();
        assert!(matches!(build_graph(23, 3, &b, 0), Err(GraphError::Params(_))));
        assert!(matches!(build_graph(21, 2, &h, 0), Err(GraphError::Params(_))));
    }

    #[test]
    fn adjoint_is_integral_and_normal() {
        let h = LevelSubgroup::named(Family::Full, 3).unwrap();
        let g = build_graph(23, 2, &h, 4).unwrap();
        let s = g.adjoint().unwrap();
        assert_eq!(mat_mul(&g.adjacency, &s), mat_mul(&s, &g.adjacency));
    }
}
