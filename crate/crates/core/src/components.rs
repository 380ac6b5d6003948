//! Weil invariant partition, the Cayley graph of `l` acting on
//! `(Z/N)^x / det H`, and the split of a graph into the preimages of its
//! cycles.

use std::collections::VecDeque;

use serde::Serialize;

use crate::arith::gcd;
use crate::graph::IsogenyGraph;
use crate::level::LevelSubgroup;

/// The oriented graph `xi -> xi * l` on `R_H`: a disjoint union of cycles.
#[derive(Clone, Debug, Serialize)]
pub struct CayleyGraph {
    pub n: u32,
    pub ell: u64,
    /// Minimal representatives of `R_H`.
    pub classes: Vec<u32>,
    /// Each cycle in orbit order, starting from its minimal class.
    pub cycles: Vec<Vec<u32>>,
    pub k: u32,
}

impl CayleyGraph {
    pub fn new(h: &LevelSubgroup, ell: u64) -> Self {
        let classes = h.weil_classes();
        let mut seen = vec![false; classes.len()];
        let pos = |c: u32| classes.binary_search(&c).unwrap();
        let mut cycles = Vec::new();
        for i in 0..classes.len() {
            if seen[i] {
                continue;
            }
            let mut cyc = Vec::new();
            let mut x = classes[i];
            while !seen[pos(x)] {
                seen[pos(x)] = true;
                cyc.push(x);
                x = h.weil_class(x as u64 * ell % h.n.max(1) as u64);
            }
            cycles.push(cyc);
        }
        let k = cycles[0].len() as u32;
        CayleyGraph { n: h.n, ell, classes, cycles, k }
    }

    /// Index of the cycle containing the class `c`.
    pub fn cycle_of(&self, c: u32) -> Option<usize> {
        self.cycles.iter().position(|cyc| cyc.contains(&c))
    }

    /// Whether every cycle has the same length `k`.
    pub fn is_uniform(&self) -> bool {
        self.cycles.iter().all(|c| c.len() as u32 == self.k)
    }

    /// The class following `c`.
    pub fn next(&self, h: &LevelSubgroup, c: u32) -> u32 {
        h.weil_class(c as u64 * self.ell % h.n.max(1) as u64)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ComponentReport {
    pub cayley: CayleyGraph,
    /// Vertex ids of `G_i`, one entry per Cayley cycle.
    pub members: Vec<Vec<usize>>,
    pub strongly_connected: Vec<bool>,
    /// Weakly connected components of the whole graph.
    pub connected_components: usize,
    /// Every edge `v -> w` has `w(w) = w(v) * l`: the Weil map is a graph
    /// morphism onto the Cayley graph, and each `G_i` is `k`-partite.
    pub weil_morphism: bool,
}

impl ComponentReport {
    pub fn n(&self) -> usize {
        self.members.len()
    }

    pub fn all_connected(&self) -> bool {
        self.strongly_connected.iter().all(|&b| b)
    }

    /// Whether each `G_i` is bipartite along its Weil partition (`k = 2`).
    pub fn bipartite(&self) -> bool {
        self.cayley.k == 2 && self.weil_morphism
    }
}

fn reach(adj_out: &[Vec<usize>], start: usize, allowed: &[bool]) -> Vec<bool> {
    let mut seen = vec![false; adj_out.len()];
    let mut queue = VecDeque::from([start]);
    seen[start] = true;
    while let Some(v) = queue.pop_front() {
        for &w in &adj_out[v] {
            if allowed[w] && !seen[w] {
                seen[w] = true;
                queue.push_back(w);
            }
        }
    }
    seen
}

/// Splits `G` into the preimages `G_i` of the Cayley cycles and checks
/// strong connectivity of each and the morphism property of the Weil map.
pub fn component_split(g: &IsogenyGraph) -> ComponentReport {
    let h = &g.h;
    let cayley = CayleyGraph::new(h, g.ell);
    let nv = g.len();
    let mut members = vec![Vec::new(); cayley.cycles.len()];
    for v in &g.vertices {
        let c = cayley.cycle_of(v.weil_exp).expect("Weil class is in R_H");
        members[c].push(v.index);
    }
    let mut out_adj = vec![Vec::new(); nv];
    let mut in_adj = vec![Vec::new(); nv];
    let mut weil_morphism = true;
    for (w, row) in g.adjacency.iter().enumerate() {
        for (v, &m) in row.iter().enumerate() {
            if m > 0 {
                out_adj[v].push(w);
                in_adj[w].push(v);
                if g.vertices[w].weil_exp != cayley.next(h, g.vertices[v].weil_exp) {
                    weil_morphism = false;
                }
            }
        }
    }
    let strongly_connected = members
        .iter()
        .map(|mem| {
            if mem.is_empty() {
                return false;
            }
            let mut allowed = vec![false; nv];
            for &v in mem {
                allowed[v] = true;
            }
            let f = reach(&out_adj, mem[0], &allowed);
            let b = reach(&in_adj, mem[0], &allowed);
            mem.iter().all(|&v| f[v] && b[v])
        })
        .collect();
    let undirected: Vec<Vec<usize>> = (0..nv)
        .map(|v| out_adj[v].iter().chain(&in_adj[v]).copied().collect())
        .collect();
    let everything = vec![true; nv];
    let mut assigned = vec![false; nv];
    let mut connected_components = 0;
    for v in 0..nv {
        if !assigned[v] {
            connected_components += 1;
            for (w, r) in reach(&undirected, v, &everything).into_iter().enumerate() {
                assigned[w] |= r;
            }
        }
    }
    ComponentReport {
        cayley,
        members,
        strongly_connected,
        connected_components,
        weil_morphism,
    }
}

/// Whether `p`, `l` and `det N(H)` generate `(Z/N)^x`, in which case all
/// `G_i` are isomorphic through diamond and Frobenius maps.
pub fn components_expected_isomorphic(h: &LevelSubgroup, p: u64, ell: u64) -> bool {
    let n = h.n as u64;
    if n <= 2 {
        return true;
    }
    let g = h.gl2();
    let mut gens: Vec<u64> = h.normalizer().iter().map(|m| g.det(m) as u64).collect();
    gens.push(p % n);
    gens.push(ell % n);
    gens.sort_unstable();
    gens.dedup();
    let mut reached = vec![false; n as usize];
    reached[1] = true;
    let mut queue = VecDeque::from([1u64]);
    while let Some(x) = queue.pop_front() {
        for &y in &gens {
            let z = x * y % n;
            if !reached[z as usize] {
                reached[z as usize] = true;
                queue.push_back(z);
            }
        }
    }
    (1..n).filter(|&x| gcd(x, n) == 1).all(|x| reached[x as usize])
}
