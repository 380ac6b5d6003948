//! Vertex permutations induced by matricial, Frobenius and Atkin-Lehner
//! operators; quotients of full level graphs; the Borel/split Cartan
//! isomorphism.

use rayon::prelude::*;
use serde::Serialize;

use crate::arith::gcd;
use crate::curve::{Curve, Point, TorsionBasis};
use crate::field::ExtField;
use crate::graph::{is_automorphism, is_permutation, GraphError, IsogenyGraph, Workspace};
use crate::isogeny::{image_matrix, velu};
use crate::level::{crt_matrix, Family, Gl2, LevelError, LevelSubgroup, Mat};
use crate::pairing::point_coordinates;

#[derive(Clone, Debug, Serialize)]
pub struct GraphOperator {
    pub name: String,
    pub perm: Vec<usize>,
}

impl GraphOperator {
    pub fn is_automorphism(&self, g: &IsogenyGraph) -> bool {
        is_permutation(&self.perm) && is_automorphism(&g.adjacency, &self.perm)
    }

    pub fn then(&self, other: &GraphOperator) -> GraphOperator {
        GraphOperator {
            name: format!("{} {}", other.name, self.name),
            perm: self.perm.iter().map(|&i| other.perm[i]).collect(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.perm.iter().enumerate().all(|(i, &j)| i == j)
    }
}

fn lookup(g: &IsogenyGraph, curve: usize, m: &Mat) -> Result<usize, GraphError> {
    g.vertex_of(curve, m)
        .ok_or_else(|| GraphError::Breach(format!("matrix {m:?} is not a level structure")))
}

/// `<g>: (E, phi) -> (E, phi o g)` for `g` in the normalizer of `H`.
pub fn matricial(gr: &IsogenyGraph, m: &Mat) -> Result<GraphOperator, GraphError> {
    let h = &gr.h;
    let gl = h.gl2();
    let m = gl.reduce(m.map(|x| x as i64));
    if !gl.is_invertible(&m) || !h.normalizes(&m) {
        return Err(LevelError::NotInNormalizer(format!("{m:?}")).into());
    }
    let perm = gr
        .vertices
        .iter()
        .map(|v| lookup(gr, v.curve, &gl.mul(&v.matrix, &m)))
        .collect::<Result<_, _>>()?;
    Ok(GraphOperator { name: format!("<{m:?}>"), perm })
}

/// The diamond operator `<d>`, i.e. the scalar matrix `d Id`.
pub fn diamond(gr: &IsogenyGraph, d: u64) -> Result<GraphOperator, GraphError> {
    let n = gr.h.n;
    if gcd(d, n as u64) != 1 {
        return Err(GraphError::Params(format!("{d} is not a unit mod {n}")));
    }
    let mut op = matricial(gr, &gr.h.gl2().scalar(d))?;
    op.name = format!("<{d}>");
    Ok(op)
}

/// `<sigma>: (E, phi) -> (E^(p), Frob o phi)`.
pub fn frobenius(ws: &Workspace, gr: &IsogenyGraph) -> Result<GraphOperator, GraphError> {
    let (lb, _) = ws.level(gr.h.n)?;
    let gl = gr.h.gl2();
    let perm = gr
        .vertices
        .iter()
        .map(|v| {
            let (t, s) = &lb.frobenius[v.curve];
            lookup(gr, *t, &gl.mul(s, &v.matrix))
        })
        .collect::<Result<_, _>>()?;
    Ok(GraphOperator { name: "sigma".into(), perm })
}

fn column_point(f: &ExtField, e: &Curve, b: &TorsionBasis, x: u32, y: u32) -> Point {
    e.add(f, &e.mul_u128(f, x as u128, &b.p), &e.mul_u128(f, y as u128, &b.q))
}

/// First vector completing `(v1, v2)` to an invertible matrix mod `m`.
fn complement(v1: u32, v2: u32, m: u32) -> (u32, u32) {
    for x in 0..m {
        for y in 0..m {
            let det = (x as u64 * v2 as u64 + m as u64 * m as u64 - y as u64 * v1 as u64) % m as u64;
            if gcd(det, m as u64) == 1 {
                return (x, y);
            }
        }
    }
    unreachable!("column of an invertible matrix is unimodular")
}

/// Atkin-Lehner map at `q` for `H = H' x B0(q^e)`: quotient by the
/// distinguished cyclic subgroup of order `q^e`.
pub fn atkin_lehner(ws: &Workspace, gr: &IsogenyGraph, q: u32) -> Result<GraphOperator, GraphError> {
    let h = &gr.h;
    let (n1, qe) = h.borel_factor(q)?;
    let (lb, _) = ws.level(h.n)?;
    let f = &ws.cs.field;
    let gl = h.gl2();
    let perm = gr
        .vertices
        .par_iter()
        .map(|v| {
            let e = &ws.cs.curves[v.curve];
            let b = &lb.bases[v.curve];
            let m = v.matrix;
            let x2 = column_point(f, e, b, m[1], m[3]);
            let k = e.mul_u128(f, n1 as u128, &x2);
            let iso = velu(f, e, &k, qe as u64)?;
            let (t, u) = ws.cs.identify(&iso.codomain)?;
            let tm = image_matrix(f, &iso, &u, &ws.cs.curves[t], &lb.bases[t], b)?;
            let tm = gl.mul(&tm.map(|x| x as u32), &m);
            let (c1, c2) = (tm[0] % qe, tm[2] % qe);
            let (d1, d2) = complement(c1, c2, qe);
            let mq = [d1, c1, d2, c2];
            let new = if n1 == 1 {
                mq
            } else {
                crt_matrix(&[(tm.map(|x| x % n1), n1), (mq, qe)])
            };
            lookup(gr, t, &new)
        })
        .collect::<Result<_, GraphError>>()?;
    Ok(GraphOperator { name: format!("w_{q}"), perm })
}

#[derive(Clone, Debug, Serialize)]
pub struct QuotientReport {
    /// The projection is constant on every fibre and its columns agree.
    pub well_defined: bool,
    /// Every `H` vertex is hit, with the same curve.
    pub surjective: bool,
    pub adjacency_matches: bool,
    pub quotient: Vec<Vec<u32>>,
}

impl QuotientReport {
    pub fn passed(&self) -> bool {
        self.well_defined && self.surjective && self.adjacency_matches
    }
}

/// Quotient of the full level graph by the action of `H`, compared
/// entry by entry with the directly built `G(p, l, H)`.
pub fn quotient_graph(full: &IsogenyGraph, direct: &IsogenyGraph) -> Result<QuotientReport, GraphError> {
    if full.h.n != direct.h.n || full.h.order() != 1 && full.h.n > 1 {
        return Err(GraphError::Params("first graph must have full level structure".into()));
    }
    let proj: Vec<usize> = full
        .vertices
        .iter()
        .map(|v| lookup(direct, v.curve, &v.matrix))
        .collect::<Result<_, _>>()?;
    let nq = direct.len();
    let mut hit = vec![false; nq];
    let mut surjective = true;
    for (v, &w) in full.vertices.iter().zip(&proj) {
        hit[w] = true;
        surjective &= direct.vertices[w].curve == v.curve;
    }
    surjective &= hit.iter().all(|&b| b);
    let mut columns: Vec<Option<Vec<u32>>> = vec![None; nq];
    let mut well_defined = true;
    for v in 0..full.len() {
        let mut col = vec![0u32; nq];
        for u in 0..full.len() {
            col[proj[u]] += full.adjacency[u][v];
        }
        match &columns[proj[v]] {
            None => columns[proj[v]] = Some(col),
            Some(c) => well_defined &= *c == col,
        }
    }
    let mut quotient = vec![vec![0u32; nq]; nq];
    for (w, col) in columns.iter().enumerate() {
        if let Some(col) = col {
            for (u, &x) in col.iter().enumerate() {
                quotient[u][w] = x;
            }
        }
    }
    let adjacency_matches = quotient == direct.adjacency;
    Ok(QuotientReport { well_defined, surjective, adjacency_matches, quotient })
}

#[derive(Clone, Debug, Serialize)]
pub struct BorelCartanReport {
    pub borel_vertices: usize,
    pub cartan_vertices: usize,
    pub bijective: bool,
    pub adjacency_preserved: bool,
    pub map: Vec<usize>,
}

impl BorelCartanReport {
    pub fn passed(&self) -> bool {
        self.bijective && self.adjacency_preserved
    }
}

/// The map `(E, C) -> (E/NC, C/NC, E[N]/NC)` from `G(p, l, B0(N^2))` to
/// `G(p, l, T(N))`, checked to be a graph isomorphism.
pub fn borel_cartan(p: u64, ell: u64, n: u32, seed: u64) -> Result<BorelCartanReport, GraphError> {
    let n2 = n * n;
    let ws = Workspace::new(p, ell, &[n2, n], seed)?;
    let borel = ws.graph(&LevelSubgroup::named(Family::Borel, n2)?)?;
    let cartan = ws.graph(&LevelSubgroup::named(Family::SplitCartan, n)?)?;
    let (lb2, _) = ws.level(n2)?;
    let (lb1, _) = ws.level(n)?;
    let f = &ws.cs.field;
    let map: Vec<usize> = borel
        .vertices
        .par_iter()
        .map(|v| {
            let e = &ws.cs.curves[v.curve];
            let b = &lb2.bases[v.curve];
            let m = v.matrix;
            let x1 = column_point(f, e, b, m[0], m[2]);
            let x2 = column_point(f, e, b, m[1], m[3]);
            let k = e.mul_u128(f, n as u128, &x2);
            let iso = velu(f, e, &k, n as u64)?;
            let (t, u) = ws.cs.identify(&iso.codomain)?;
            let img = |pt: &Point| Curve::apply_scalar_iso(f, &u, &iso.evaluate(f, pt));
            let target = &ws.cs.curves[t];
            let y1 = img(&x2);
            let y2 = img(&e.mul_u128(f, n as u128, &x1));
            let (a, c) = point_coordinates(f, target, &lb1.bases[t], &y1)?;
            let (bb, d) = point_coordinates(f, target, &lb1.bases[t], &y2)?;
            lookup(&cartan, t, &[a, bb, c, d].map(|x| x as u32))
        })
        .collect::<Result<_, GraphError>>()?;
    let bijective = borel.len() == cartan.len() && is_permutation(&map);
    let adjacency_preserved = bijective
        && (0..borel.len()).all(|i| {
            (0..borel.len()).all(|j| borel.adjacency[i][j] == cartan.adjacency[map[i]][map[j]])
        });
    Ok(BorelCartanReport {
        borel_vertices: borel.len(),
        cartan_vertices: cartan.len(),
        bijective,
        adjacency_preserved,
        map,
    })
}

/// One matricial operator per determinant class of the normalizer.
pub fn normalizer_operators(gr: &IsogenyGraph) -> Result<Vec<GraphOperator>, GraphError> {
    let gl: Gl2 = gr.h.gl2();
    let mut seen = std::collections::BTreeSet::new();
    let mut out = Vec::new();
    for m in gr.h.normalizer() {
        if seen.insert(gl.det(&m)) {
            out.push(matricial(gr, &m)?);
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct IsomorphismReport {
    pub operators_are_automorphisms: bool,
    /// Orbits of the components under the operators.
    pub orbits: Vec<Vec<usize>>,
}

/// Joins components `G_i` that the matricial and Frobenius automorphisms
/// carry onto one another.
pub fn component_orbits(
    ws: &Workspace,
    gr: &IsogenyGraph,
    members: &[Vec<usize>],
) -> Result<IsomorphismReport, GraphError> {
    let mut ops = normalizer_operators(gr)?;
    ops.push(frobenius(ws, gr)?);
    let operators_are_automorphisms = ops.iter().all(|o| o.is_automorphism(gr));
    let mut comp_of = vec![0usize; gr.len()];
    for (i, mem) in members.iter().enumerate() {
        for &v in mem {
            comp_of[v] = i;
        }
    }
    let mut parent: Vec<usize> = (0..members.len()).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        p[x] = r;
        r
    }
    for op in &ops {
        for (i, mem) in members.iter().enumerate() {
            if let Some(&v) = mem.first() {
                let j = comp_of[op.perm[v]];
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut orbits: Vec<Vec<usize>> = Vec::new();
    for i in 0..members.len() {
        let r = find(&mut parent, i);
        match orbits.iter_mut().find(|o| o[0] == r) {
            Some(o) => o.push(i),
            None => orbits.push(vec![i]),
        }
    }
    Ok(IsomorphismReport { operators_are_automorphisms, orbits })
}
