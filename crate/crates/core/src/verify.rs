//! The verification suite: every structural and spectral claim about a
//! graph, checked and reported by name.

use serde::Serialize;

use crate::components::{component_split, components_expected_isomorphic, ComponentReport};
use crate::graph::{mat_mul, GraphError, IsogenyGraph, Workspace};
use crate::modular::check_dimensions;
use crate::operators::{component_orbits, diamond, frobenius, matricial, quotient_graph};
use crate::spectral::{
    eigenvalues, gap_report, is_sub_multiset, multiset_distance, submatrix, verify_adjointness,
    GapReport, Verdict, SPECTRUM_TOL,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    /// Neither established nor refuted at the working precision.
    Inconclusive,
    Skipped,
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub status: Status,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub p: u64,
    pub l: u64,
    #[serde(rename = "N")]
    pub n: u32,
    pub vertices: usize,
    pub checks: Vec<Check>,
}

impl VerifyReport {
    /// True iff nothing failed or stayed inconclusive.
    pub fn passed(&self) -> bool {
        self.checks
            .iter()
            .all(|c| matches!(c.status, Status::Pass | Status::Skipped))
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks
            .iter()
            .filter(|c| matches!(c.status, Status::Fail | Status::Inconclusive))
            .collect()
    }

    pub fn status(&self, name: &str) -> Option<Status> {
        self.checks.iter().find(|c| c.name == name).map(|c| c.status)
    }
}

fn check(name: &'static str, ok: bool, detail: impl Into<String>) -> Check {
    Check {
        name,
        status: if ok { Status::Pass } else { Status::Fail },
        detail: detail.into(),
    }
}

fn skipped(name: &'static str, why: &str) -> Check {
    Check { name, status: Status::Skipped, detail: why.into() }
}

const NO_CURVES: &str = "needs curve data; run on a freshly built graph";

/// Runs the suite. `ws` gives access to the curves (Frobenius, component
/// isomorphisms); `full` is the full level graph for the quotient check.
pub fn verify(
    g: &IsogenyGraph,
    ws: Option<&Workspace>,
    full: Option<&IsogenyGraph>,
) -> Result<VerifyReport, GraphError> {
    let comps = component_split(g);
    let gap = gap_report(g, &comps);
    let mut checks = Vec::new();

    checks.push(match g.check_column_sums() {
        Ok(()) => check("column_sums", true, format!("every column sums to {}", g.ell + 1)),
        Err(e) => check("column_sums", false, e.to_string()),
    });
    checks.push(check(
        "mass_identity",
        g.mass() == g.expected_mass(),
        format!("mass {} expected {}", g.mass(), g.expected_mass()),
    ));
    adjoint_checks(g, &mut checks)?;
    checks.push(match gap.minimal_polynomial_squarefree {
        Some(b) => check("minimal_polynomial_squarefree", b, "rad(chi)(A) = 0 exactly"),
        None => skipped("minimal_polynomial_squarefree", "graph too large for the exact test"),
    });
    component_checks(g, &comps, &mut checks);
    spectral_checks(&gap, &mut checks);
    operator_checks(g, ws, &comps, &mut checks)?;
    checks.push(match check_dimensions(g, &comps) {
        Some(d) => check(
            "dimensions",
            d.matches,
            format!("{}: |V| - nk = {}, cusp forms {}", d.family, d.graph_side, d.modular_side),
        ),
        None => skipped("dimensions", "no dimension formula for this level structure"),
    });
    if let Some(full) = full {
        let q = quotient_graph(full, g)?;
        let sub = eigenvalues(&g.adjacency).eigenvalues;
        let big = eigenvalues(&full.adjacency).eigenvalues;
        let contained = is_sub_multiset(&sub, &big, SPECTRUM_TOL);
        checks.push(check(
            "quotient",
            q.passed() && contained,
            format!(
                "well defined {}, surjective {}, adjacency {}, spectrum contained {}",
                q.well_defined, q.surjective, q.adjacency_matches, contained
            ),
        ));
    }
    Ok(VerifyReport { p: g.p, l: g.ell, n: g.h.n, vertices: g.len(), checks })
}

fn adjoint_checks(g: &IsogenyGraph, checks: &mut Vec<Check>) -> Result<(), GraphError> {
    if g.lookup.is_empty() {
        let s = g.adjoint()?;
        let normal = mat_mul(&g.adjacency, &s) == mat_mul(&s, &g.adjacency);
        checks.push(skipped("adjointness", NO_CURVES));
        checks.push(check("normality", normal, "A A* = A* A"));
        return Ok(());
    }
    let r = verify_adjointness(g)?;
    let mut detail = format!(
        "A* = <l^-1> A {}, spectra of A and A* agree to {:.1e}",
        r.diamond_relation, r.spectrum_distance
    );
    if r.l_in_h {
        detail.push_str(&format!(", A = A* {}", r.self_adjoint));
    }
    checks.push(check(
        "adjointness",
        r.hermitian_identity
            && r.diamond_relation
            && r.spectrum_distance <= SPECTRUM_TOL
            && (!r.l_in_h || r.self_adjoint),
        detail,
    ));
    checks.push(check("normality", r.normal, "A A* = A* A"));
    Ok(())
}

fn component_checks(g: &IsogenyGraph, comps: &ComponentReport, checks: &mut Vec<Check>) {
    checks.push(check(
        "connectivity",
        comps.all_connected(),
        format!(
            "{} components of the Weil map, {} weakly connected pieces",
            comps.n(),
            comps.connected_components
        ),
    ));
    let k = comps.cayley.k as usize;
    let classes_per_component = comps.members.iter().all(|mem| {
        let mut ws: Vec<u32> = mem.iter().map(|&v| g.vertices[v].weil_exp).collect();
        ws.sort_unstable();
        ws.dedup();
        ws.len() == k
    });
    checks.push(check(
        "multipartition",
        comps.weil_morphism && classes_per_component && comps.cayley.is_uniform(),
        format!("each component is {k}-partite along the Weil classes"),
    ));
    checks.push(check(
        "weil_morphism",
        comps.weil_morphism,
        "every edge v -> w has w(w) = w(v)^l",
    ));
}

fn spectral_checks(gap: &GapReport, checks: &mut Vec<Check>) {
    checks.push(check(
        "trivial_eigenvalues",
        gap.trivial_ok(),
        format!("(l+1) zeta for zeta in mu_k, k = {}, each simple", gap.k_info.k),
    ));
    let violated = gap.components.iter().any(|c| c.bound == Verdict::Violated);
    let verified = gap.bound_ok();
    let certified = gap.components.iter().filter(|c| c.certified == Some(true)).count();
    checks.push(Check {
        name: "spectral_bound",
        status: if violated {
            Status::Fail
        } else if verified {
            Status::Pass
        } else {
            Status::Inconclusive
        },
        detail: format!(
            "eta = {:.6e}, {certified}/{} components certified on exact roots",
            gap.eta,
            gap.components.len()
        ),
    });
    let pm_ok = gap.components.iter().all(|c| c.angles_pm.passed());
    let worst = gap
        .components
        .iter()
        .map(|c| c.angles.max_residual)
        .fold(0.0, f64::max);
    checks.push(check(
        "angle_lattice",
        gap.angles_ok(),
        format!(
            "k' = {} (max residual {worst:.1e}); k'+- = {} holds: {pm_ok}",
            gap.k_info.k_prime, gap.k_info.k_prime_pm
        ),
    ));
}

fn operator_checks(
    g: &IsogenyGraph,
    ws: Option<&Workspace>,
    comps: &ComponentReport,
    checks: &mut Vec<Check>,
) -> Result<(), GraphError> {
    let names = ["weil_equivariance", "minus_one", "sigma_squared", "component_isomorphism"];
    if g.lookup.is_empty() {
        for name in names {
            checks.push(skipped(name, NO_CURVES));
        }
        return Ok(());
    }
    let gl = g.h.gl2();
    let class_of = |v: usize| g.h.weil_class(gl.det(&g.vertices[v].matrix) as u64);

    let mut seen = std::collections::BTreeSet::new();
    let mut count = 0;
    let mut ok = true;
    for m in g.h.normalizer() {
        let d = gl.det(&m);
        if !seen.insert(d) {
            continue;
        }
        count += 1;
        let op = matricial(g, &m)?;
        ok &= op.is_automorphism(g);
        ok &= (0..g.len()).all(|v| {
            let twisted = gl.det(&g.vertices[v].matrix) as u64 * d as u64 % g.h.n.max(1) as u64;
            class_of(op.perm[v]) == g.h.weil_class(twisted)
        });
    }
    checks.push(check(
        "weil_equivariance",
        ok,
        format!("{count} normalizer classes act as automorphisms twisting w by det g"),
    ));

    let n = g.h.n as u64;
    let minus_one_ok = n <= 2 || diamond(g, n - 1)?.is_identity();
    checks.push(check("minus_one", minus_one_ok, "<-1> is the identity"));

    let Some(ws) = ws else {
        checks.push(skipped("sigma_squared", NO_CURVES));
        checks.push(skipped("component_isomorphism", NO_CURVES));
        return Ok(());
    };
    let sigma = frobenius(ws, g)?;
    let sq = sigma.then(&sigma);
    let dp = if n <= 1 { sq.is_identity() } else { sq.perm == diamond(g, g.p % n)?.perm };
    let twist = (0..g.len()).all(|v| {
        class_of(sigma.perm[v]) == g.h.weil_class(gl.det(&g.vertices[v].matrix) as u64 * g.p % n.max(1))
    });
    checks.push(check(
        "sigma_squared",
        dp && twist && sigma.is_automorphism(g),
        format!("<sigma>^2 = <p> {dp}, w(sigma v) = w(v)^p {twist}"),
    ));

    if comps.n() <= 1 {
        checks.push(check("component_isomorphism", true, "single component"));
    } else if components_expected_isomorphic(&g.h, g.p, g.ell) {
        let iso = component_orbits(ws, g, &comps.members)?;
        let spectra: Vec<_> = comps
            .members
            .iter()
            .map(|m| eigenvalues(&submatrix(&g.adjacency, m)).eigenvalues)
            .collect();
        let same_shape = comps.members.iter().all(|m| m.len() == comps.members[0].len());
        let dist = spectra.iter().map(|s| multiset_distance(s, &spectra[0])).fold(0.0, f64::max);
        checks.push(check(
            "component_isomorphism",
            iso.operators_are_automorphisms && iso.orbits.len() == 1 && same_shape && dist <= SPECTRUM_TOL,
            format!("{} orbit(s) under operators, spectra agree to {dist:.1e}", iso.orbits.len()),
        ));
    } else {
        checks.push(skipped(
            "component_isomorphism",
            "p, l and det of the normalizer do not generate the units mod N",
        ));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::export::{from_json, to_json};
    use crate::level::{Family, LevelSubgroup};

    #[test]
    fn figure_one_passes() {
        let h = LevelSubgroup::figure_one();
        let ws = Workspace::new(23, 3, &[8], 1).unwrap();
        let g = ws.graph(&h).unwrap();
        let r = verify(&g, Some(&ws), None).unwrap();
        assert!(r.passed(), "{:#?}", r.failures());
        assert_eq!(r.status("component_isomorphism"), Some(Status::Pass));
    }

    #[test]
    fn borel_with_quotient() {
        let ws = Workspace::new(29, 2, &[5], 3).unwrap();
        let h = LevelSubgroup::named(Family::Borel, 5).unwrap();
        let g = ws.graph(&h).unwrap();
        let full = ws.graph(&LevelSubgroup::named(Family::Full, 5).unwrap()).unwrap();
        let r = verify(&g, Some(&ws), Some(&full)).unwrap();
        assert!(r.passed(), "{:#?}", r.failures());
        assert_eq!(r.status("dimensions"), Some(Status::Pass));
        assert_eq!(r.status("quotient"), Some(Status::Pass));
    }

    #[test]
    fn loaded_graph_skips_operator_checks() {
        let g = crate::graph::build_graph(23, 2, &LevelSubgroup::named(Family::Borel, 3).unwrap(), 1).unwrap();
        let h = from_json(&to_json(&g)).unwrap();
        let r = verify(&h, None, None).unwrap();
        assert!(r.passed(), "{:#?}", r.failures());
        assert_eq!(r.status("sigma_squared"), Some(Status::Skipped));
        assert_eq!(r.status("connectivity"), Some(Status::Pass));
    }
}
