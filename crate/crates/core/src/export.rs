//! Graph files: JSON (round-trips, validated on load), DOT and CSV.

use std::collections::HashMap;
use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::graph::{validate_params, GraphError, IsogenyGraph, Vertex};
use crate::level::{Family, LevelSubgroup, Mat};
use crate::supersingular::parse_j_label;

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct VertexRecord {
    pub index: usize,
    pub j: String,
    pub matrix: Mat,
    pub aut: u32,
    pub weil_exp: u32,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct GraphFile {
    pub p: u64,
    pub l: u64,
    #[serde(rename = "N")]
    pub n: u32,
    #[serde(rename = "H_generators")]
    pub h_generators: Vec<Mat>,
    pub vertices: Vec<VertexRecord>,
    pub adjacency: Vec<Vec<u32>>,
}

/// `j` label of a vertex: both coordinates in hex.
pub fn label(v: &Vertex) -> String {
    format!("{:x}:{:x}", v.j[0], v.j[1])
}

impl GraphFile {
    pub fn from_graph(g: &IsogenyGraph) -> Self {
        GraphFile {
            p: g.p,
            l: g.ell,
            n: g.h.n,
            h_generators: g.h.generators.clone(),
            vertices: g
                .vertices
                .iter()
                .map(|v| VertexRecord {
                    index: v.index,
                    j: label(v),
                    matrix: v.matrix,
                    aut: v.aut,
                    weil_exp: v.weil_exp,
                })
                .collect(),
            adjacency: g.adjacency.clone(),
        }
    }
}

pub fn to_json(g: &IsogenyGraph) -> String {
    serde_json::to_string_pretty(&GraphFile::from_graph(g)).expect("graph serializes") + "\n"
}

fn breach(msg: impl Into<String>) -> GraphError {
    GraphError::Breach(msg.into())
}

/// Recognizes the named families among subgroups given by generators.
fn detect_family(h: &LevelSubgroup) -> Option<Family> {
    [
        Family::Trivial,
        Family::Full,
        Family::Borel,
        Family::SplitCartan,
        Family::NonsplitCartan,
        Family::TorsionPoint,
    ]
    .into_iter()
    .find(|&f| {
        LevelSubgroup::named(f, h.n)
            .map(|named| named.elements == h.elements)
            .unwrap_or(false)
    })
}

/// Parses and validates a graph file. Structural defects (bad vertex
/// records, wrong column sums, broken mass identity, non-integral adjoint)
/// are reported as invariant breaches.
pub fn from_json(s: &str) -> Result<IsogenyGraph, GraphError> {
    let file: GraphFile = serde_json::from_str(s).map_err(|e| breach(format!("unreadable graph file: {e}")))?;
    validate_params(file.p, file.l, file.n)?;
    let mut h = LevelSubgroup::from_generators(file.n, &file.h_generators)?;
    h.family = detect_family(&h);
    let gl = h.gl2();
    let nv = file.vertices.len();
    if file.adjacency.len() != nv || file.adjacency.iter().any(|r| r.len() != nv) {
        return Err(breach(format!("adjacency is not {nv} x {nv}")));
    }
    let mut curve_ids: HashMap<[u64; 2], usize> = HashMap::new();
    let mut vertices = Vec::with_capacity(nv);
    for (i, r) in file.vertices.iter().enumerate() {
        if r.index != i {
            return Err(breach(format!("vertex {i} has index {}", r.index)));
        }
        let j = parse_j_label(&r.j, file.p).ok_or_else(|| breach(format!("bad j label {:?}", r.j)))?;
        let m = r.matrix;
        if m.iter().any(|&x| x >= file.n.max(1)) || !gl.is_invertible(&m) {
            return Err(breach(format!("vertex {i}: matrix {m:?} is not in GL2")));
        }
        if ![1, 2, 3, 4, 6].contains(&r.aut) {
            return Err(breach(format!("vertex {i}: impossible weight {}", r.aut)));
        }
        if r.weil_exp != h.weil_class(gl.det(&m) as u64) {
            return Err(breach(format!("vertex {i}: Weil class does not match det")));
        }
        let next = curve_ids.len();
        let curve = *curve_ids.entry(j).or_insert(next);
        vertices.push(Vertex { index: i, curve, j, matrix: m, aut: r.aut, weil_exp: r.weil_exp });
    }
    let g = IsogenyGraph {
        p: file.p,
        ell: file.l,
        h,
        vertices,
        adjacency: file.adjacency,
        lookup: Vec::new(),
    };
    g.check_column_sums()?;
    if g.mass() != g.expected_mass() {
        return Err(breach(format!(
            "mass {} differs from {}",
            g.mass(),
            g.expected_mass()
        )));
    }
    g.adjoint()?;
    Ok(g)
}

/// DOT digraph; parallel edges are repeated.
pub fn to_dot(g: &IsogenyGraph) -> String {
    let mut out = String::new();
    writeln!(out, "digraph G {{").unwrap();
    writeln!(out, "  // p = {}, l = {}, N = {}", g.p, g.ell, g.h.n).unwrap();
    for v in &g.vertices {
        let m = v.matrix;
        writeln!(
            out,
            "  v{} [label=\"{}\\n[{} {}; {} {}]\\nw={}\"];",
            v.index,
            label(v),
            m[0],
            m[1],
            m[2],
            m[3],
            v.weil_exp
        )
        .unwrap();
    }
    for (w, row) in g.adjacency.iter().enumerate() {
        for (v, &mult) in row.iter().enumerate() {
            for _ in 0..mult {
                writeln!(out, "  v{v} -> v{w};").unwrap();
            }
        }
    }
    writeln!(out, "}}").unwrap();
    out
}

/// Adjacency rows as CSV.
pub fn to_csv(g: &IsogenyGraph) -> String {
    let mut out = String::new();
    for row in &g.adjacency {
        let line: Vec<String> = row.iter().map(|x| x.to_string()).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}
