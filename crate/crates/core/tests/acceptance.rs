//! Acceptance suite: one line per criterion, nonzero exit if any fails
//! other than a documented known failure.
//!
//! Run with `cargo test --test acceptance`.

use std::time::{Duration, Instant};

use ssgraph::arith::primes_in;
use ssgraph::components::component_split;
use ssgraph::export::{to_csv, to_json};
use ssgraph::graph::{build_graph, validate_params, GraphError, IsogenyGraph, Workspace};
use ssgraph::level::{Family, LevelSubgroup};
use ssgraph::modular::{dim_new_gamma0, dim_pnew_gamma0, genus_x0};
use ssgraph::operators::{borel_cartan, quotient_graph};
use ssgraph::spectral::{
    eigenvalues, eta_row, gap_report, is_sub_multiset, km_report, multiset_distance, submatrix,
    verify_adjointness, EtaRow,
};
use ssgraph::verify::{verify, Status};

const SEED: u64 = 1;
/// Spectra of isomorphic components and quotient containment.
const SPECTRUM_TOL: f64 = 1e-8;

const BUDGET_FIGURE: Duration = Duration::from_secs(10);
const BUDGET_COUNTS: Duration = Duration::from_secs(120);
const BUDGET_KM: Duration = Duration::from_secs(600);
const BUDGET_SCAN: Duration = Duration::from_secs(1800);

struct Outcome {
    ok: bool,
    detail: String,
    /// Set when the failure is exactly a documented counterexample.
    known: Option<&'static str>,
}

fn outcome(ok: bool, detail: impl Into<String>) -> Outcome {
    Outcome { ok, detail: detail.into(), known: None }
}

/// At p = 19 the trivial level graph for l = 2 has spectrum {3, 0}: the
/// nontrivial eigenvalue is a_2 = 0 of the weight 2 newform of level 19, so
/// eta = 2 sqrt 2 exactly and the strict inequality cannot hold.
const ETA_P19: &str = "p = 19 has nontrivial eigenvalue exactly 0, eta = 2 sqrt 2";

fn within(t: Instant, budget: Duration) -> (bool, String) {
    let e = t.elapsed();
    (e <= budget, format!("{:.1}s of {}s", e.as_secs_f64(), budget.as_secs()))
}

fn figure_one() -> Result<Outcome, GraphError> {
    let t = Instant::now();
    let h = LevelSubgroup::figure_one();
    let ws = Workspace::new(23, 3, &[8], SEED)?;
    let g = ws.graph(&h)?;
    let comps = component_split(&g);
    let r = verify(&g, Some(&ws), None)?;
    let cycles_ok = comps.cayley.cycles.len() == 2 && comps.cayley.cycles.iter().all(|c| c.len() == 2);
    let sizes: Vec<usize> = comps.members.iter().map(|m| m.len()).collect();
    let edges: Vec<u64> = comps
        .members
        .iter()
        .map(|m| submatrix(&g.adjacency, m).iter().flatten().map(|&x| x as u64).sum())
        .collect();
    let spectra: Vec<_> = comps
        .members
        .iter()
        .map(|m| eigenvalues(&submatrix(&g.adjacency, m)).eigenvalues)
        .collect();
    let dist = multiset_distance(&spectra[0], &spectra[spectra.len() - 1]);
    let (fast, time) = within(t, BUDGET_FIGURE);
    let ok = comps.connected_components == 2
        && comps.n() == 2
        && comps.bipartite()
        && comps.all_connected()
        && cycles_ok
        && sizes.windows(2).all(|w| w[0] == w[1])
        && edges.windows(2).all(|w| w[0] == w[1])
        && dist <= SPECTRUM_TOL
        && r.status("component_isomorphism") == Some(Status::Pass)
        && fast;
    Ok(outcome(
        ok,
        format!(
            "{} vertices, {} components of sizes {sizes:?}, edges {edges:?}, bipartite {}, spectra agree to {dist:.1e}, {time}",
            g.len(),
            comps.connected_components,
            comps.bipartite()
        ),
    ))
}

fn trivial_counts() -> Result<Outcome, GraphError> {
    let t = Instant::now();
    let trivial = LevelSubgroup::named(Family::Trivial, 1)?;
    let mut bad = Vec::new();
    let mut checked = 0;
    for p in primes_in(5, 200) {
        let g = build_graph(p, 2, &trivial, SEED)?;
        checked += 1;
        if g.len() as u64 != genus_x0(p) + 1 {
            bad.push(p);
        }
    }
    let at23 = build_graph(23, 2, &trivial, SEED)?.len();
    let (fast, time) = within(t, BUDGET_COUNTS);
    Ok(outcome(
        bad.is_empty() && at23 == 3 && fast,
        format!("{checked} primes, mismatches {bad:?}, |V| at 23 = {at23}, {time}"),
    ))
}

fn family_matrix() -> Vec<(Family, u32)> {
    vec![
        (Family::Trivial, 1),
        (Family::Borel, 3),
        (Family::Borel, 5),
        (Family::TorsionPoint, 5),
        (Family::Full, 3),
        (Family::NonsplitCartan, 5),
    ]
}

struct MatrixRun {
    cases: usize,
    mass: Vec<String>,
    spectral: Vec<String>,
    adjoint: Vec<String>,
    operators: Vec<String>,
    k_conventions: Vec<(u32, u32)>,
    inconclusive: usize,
}

/// Builds every graph of the test matrix once and collects failures for
/// the mass, spectral, adjoint and operator criteria.
fn run_matrix() -> Result<MatrixRun, GraphError> {
    let mut run = MatrixRun {
        cases: 0,
        mass: Vec::new(),
        spectral: Vec::new(),
        adjoint: Vec::new(),
        operators: Vec::new(),
        k_conventions: Vec::new(),
        inconclusive: 0,
    };
    for p in primes_in(5, 100) {
        for ell in [2u64, 3] {
            let cases: Vec<(Family, u32)> = family_matrix()
                .into_iter()
                .filter(|&(_, n)| validate_params(p, ell, n).is_ok())
                .collect();
            let mut levels: Vec<u32> = cases.iter().map(|&(_, n)| n).collect();
            levels.sort_unstable();
            levels.dedup();
            let ws = Workspace::new(p, ell, &levels, SEED)?;
            for (fam, n) in cases {
                run.cases += 1;
                let name = format!("({p},{ell},{}({n}))", fam.name());
                let g = ws.graph(&LevelSubgroup::named(fam, n)?)?;
                if g.mass() != g.expected_mass() {
                    run.mass.push(name.clone());
                }
                let r = verify(&g, Some(&ws), None)?;
                let ki = g.k_info();
                if !run.k_conventions.contains(&(ki.k_prime, ki.k_prime_pm)) {
                    run.k_conventions.push((ki.k_prime, ki.k_prime_pm));
                }
                for c in [
                    "column_sums",
                    "connectivity",
                    "trivial_eigenvalues",
                    "minimal_polynomial_squarefree",
                    "spectral_bound",
                    "angle_lattice",
                ] {
                    match r.status(c) {
                        Some(Status::Pass) => {}
                        Some(Status::Skipped) if c == "minimal_polynomial_squarefree" => {}
                        Some(Status::Inconclusive) => {
                            run.inconclusive += 1;
                            run.spectral.push(format!("{name} {c} inconclusive"));
                        }
                        s => run.spectral.push(format!("{name} {c} {s:?}")),
                    }
                }
                let a = verify_adjointness(&g)?;
                let symmetric_expected = a.l_in_h && p % 12 == 1;
                if !a.passed() || (symmetric_expected && !a.symmetric) {
                    run.adjoint.push(name.clone());
                }
                for c in ["weil_equivariance", "minus_one", "sigma_squared", "weil_morphism"] {
                    if r.status(c) != Some(Status::Pass) {
                        run.operators.push(format!("{name} {c}"));
                    }
                }
            }
        }
    }
    Ok(run)
}

fn quotients() -> Result<Outcome, GraphError> {
    let refused = matches!(Workspace::new(23, 3, &[3], SEED), Err(GraphError::Params(_)));
    let mut lines = Vec::new();
    let mut ok = true;
    for (p, ell) in [(23u64, 2u64), (29, 5)] {
        let ws = Workspace::new(p, ell, &[3], SEED)?;
        let full = ws.graph(&LevelSubgroup::named(Family::Full, 3)?)?;
        let big = eigenvalues(&full.adjacency).eigenvalues;
        for fam in [Family::Borel, Family::TorsionPoint] {
            let g = ws.graph(&LevelSubgroup::named(fam, 3)?)?;
            let q = quotient_graph(&full, &g)?;
            let sub = eigenvalues(&g.adjacency).eigenvalues;
            let contained = is_sub_multiset(&sub, &big, SPECTRUM_TOL);
            ok &= q.passed() && contained;
            lines.push(format!(
                "({p},{ell},{}) quotient {} spectrum {}",
                fam.name(),
                q.passed(),
                contained
            ));
        }
    }
    Ok(outcome(
        ok,
        format!(
            "(23,3,3) refused since l | N: {refused}; substitutes: {}",
            lines.join("; ")
        ),
    ))
}

fn borel_to_cartan() -> Result<Outcome, GraphError> {
    let mut ok = true;
    let mut lines = Vec::new();
    for (p, ell, n) in [(23u64, 3u64, 2u32), (31, 2, 3)] {
        let r = borel_cartan(p, ell, n, SEED)?;
        ok &= r.passed();
        lines.push(format!(
            "({p},{ell},{n}) {} -> {} vertices, adjacency {}",
            r.borel_vertices, r.cartan_vertices, r.adjacency_preserved
        ));
    }
    Ok(outcome(ok, lines.join("; ")))
}

fn dimensions() -> Result<Outcome, GraphError> {
    let mut bad = Vec::new();
    let trivial = LevelSubgroup::named(Family::Trivial, 1)?;
    for p in primes_in(5, 100) {
        let g = build_graph(p, 2, &trivial, SEED)?;
        if g.len() as i64 - 1 != genus_x0(p) as i64 {
            bad.push(format!("trivial {p}"));
        }
    }
    for (p, n) in [(23u64, 5u32), (31, 7), (41, 3)] {
        let g = build_graph(p, 2, &LevelSubgroup::named(Family::Borel, n)?, SEED)?;
        if g.len() as i64 - 1 != dim_pnew_gamma0(p, n as u64) {
            bad.push(format!("borel ({p},{n}): {} vs {}", g.len() - 1, dim_pnew_gamma0(p, n as u64)));
        }
    }
    for (p, n) in [(23u64, 5u32), (31, 7)] {
        let g = build_graph(p, 2, &LevelSubgroup::named(Family::NonsplitCartan, n)?, SEED)?;
        let rhs: i64 = ssgraph::arith::divisors(n as u64)
            .iter()
            .map(|&d| dim_new_gamma0(p * d * d))
            .sum();
        if g.len() as i64 - 1 != rhs {
            bad.push(format!("nonsplit ({p},{n}): {} vs {rhs}", g.len() - 1));
        }
    }
    Ok(outcome(bad.is_empty(), format!("mismatches {bad:?}")))
}

fn kesten_mckay() -> Result<Outcome, GraphError> {
    let t = Instant::now();
    let h = LevelSubgroup::named(Family::Borel, 3)?;
    let mut ks = Vec::new();
    for p in [101u64, 499, 1009] {
        let g = build_graph(p, 2, &h, SEED)?;
        let comps = component_split(&g);
        let gap = gap_report(&g, &comps);
        let nontrivial: Vec<_> = gap.components.iter().flat_map(|c| c.nontrivial.clone()).collect();
        let r = km_report(&nontrivial, 2, g.k_info().k_prime);
        ks.push((p, g.len(), r.ks));
    }
    let decreasing = ks.windows(2).all(|w| w[1].2 < w[0].2);
    let (fast, time) = within(t, BUDGET_KM);
    let shown: Vec<String> = ks.iter().map(|(p, n, d)| format!("p={p} |V|={n} KS={d:.4}")).collect();
    Ok(outcome(decreasing && fast, format!("{}, {time}", shown.join(", "))))
}

fn eta_rows(p_max: u64) -> Result<Vec<EtaRow>, GraphError> {
    let trivial = LevelSubgroup::named(Family::Trivial, 1)?;
    primes_in(5, p_max)
        .into_iter()
        .map(|p| build_graph(p, 2, &trivial, SEED).map(|g| eta_row(&g)))
        .collect()
}

fn eta_csv(rows: &[EtaRow]) -> String {
    let mut s = String::from(EtaRow::csv_header());
    s.push('\n');
    for r in rows {
        s.push_str(&r.csv_line());
        s.push('\n');
    }
    s
}

fn eta_scan() -> Result<Outcome, GraphError> {
    let t = Instant::now();
    let rows = eta_rows(2000)?;
    let below_bound: Vec<u64> = rows.iter().filter(|r| !r.satisfies_bound()).map(|r| r.p).collect();
    // A graph with one vertex has no nontrivial eigenvalue and eta = inf.
    let not_ramanujan: Vec<u64> = rows
        .iter()
        .filter(|r| r.n_vertices >= 2 && !r.below_ramanujan())
        .map(|r| r.p)
        .collect();
    let single: Vec<u64> = rows.iter().filter(|r| r.n_vertices < 2).map(|r| r.p).collect();
    let header_ok = EtaRow::csv_header().ends_with("ref_2loglogp");
    let (fast, time) = within(t, BUDGET_SCAN);
    let p19_exact = rows.iter().any(|r| r.p == 19 && r.n_vertices == 2 && r.eta == 2.0 * 2f64.sqrt());
    let mut o = outcome(
        below_bound.is_empty() && not_ramanujan.is_empty() && header_ok && fast,
        format!(
            "{} rows, bound violations {below_bound:?}, eta >= 2 sqrt 2 at {not_ramanujan:?}, one-vertex rows {single:?}, {time}",
            rows.len()
        ),
    );
    if below_bound.is_empty() && not_ramanujan == [19] && p19_exact && header_ok && fast {
        o.known = Some(ETA_P19);
    }
    Ok(o)
}

fn artifacts(threads: usize) -> Result<String, GraphError> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().expect("thread pool");
    pool.install(|| {
        let g: IsogenyGraph = build_graph(23, 3, &LevelSubgroup::figure_one(), SEED)?;
        let b = build_graph(41, 2, &LevelSubgroup::named(Family::Borel, 5)?, SEED)?;
        let comps = component_split(&b);
        let gap = serde_json::to_string(&gap_report(&b, &comps)).expect("report serializes");
        Ok(to_json(&g) + &to_csv(&g) + &to_json(&b) + &gap + &eta_csv(&eta_rows(120)?))
    })
}

fn determinism() -> Result<Outcome, GraphError> {
    let a = artifacts(1)?;
    let b = artifacts(1)?;
    let c = artifacts(4)?;
    Ok(outcome(
        a == b && a == c,
        format!("{} bytes, rerun identical {}, 4 threads identical {}", a.len(), a == b, a == c),
    ))
}

/// Prints the verdict line; returns (passed, failure is a known one).
fn report(i: u32, name: &str, r: Result<Outcome, GraphError>) -> (bool, bool) {
    match r {
        Ok(o) => {
            println!("criterion {i:>2} {} {name}: {}", if o.ok { "PASS" } else { "FAIL" }, o.detail);
            if let (false, Some(why)) = (o.ok, o.known) {
                println!("             known failure: {why}");
            }
            (o.ok, o.known.is_some())
        }
        Err(e) => {
            println!("criterion {i:>2} FAIL {name}: error {e}");
            (false, false)
        }
    }
}

fn main() {
    let mut passed = Vec::new();
    passed.push(report(1, "two-component worked example", figure_one()));
    passed.push(report(2, "trivial level vertex counts", trivial_counts()));

    let t = Instant::now();
    match run_matrix() {
        Ok(m) => {
            let secs = t.elapsed().as_secs_f64();
            passed.push(report(
                3,
                "mass identity",
                Ok(outcome(m.mass.is_empty(), format!("{} graphs, failures {:?}", m.cases, m.mass))),
            ));
            passed.push(report(
                4,
                "spectral suite",
                Ok(outcome(
                    m.spectral.is_empty(),
                    format!(
                        "{} graphs, failures {:?} ({} inconclusive), (k', k'+-) seen {:?}, matrix {secs:.1}s",
                        m.cases, m.spectral, m.inconclusive, m.k_conventions
                    ),
                )),
            ));
            passed.push(report(
                5,
                "adjoint and normality",
                Ok(outcome(m.adjoint.is_empty(), format!("{} graphs, failures {:?}", m.cases, m.adjoint))),
            ));
            passed.push(report(
                6,
                "automorphism relations",
                Ok(outcome(m.operators.is_empty(), format!("{} graphs, failures {:?}", m.cases, m.operators))),
            ));
        }
        Err(e) => {
            for (i, name) in [
                (3, "mass identity"),
                (4, "spectral suite"),
                (5, "adjoint and normality"),
                (6, "automorphism relations"),
            ] {
                passed.push(report(i, name, Err(GraphError::Breach(format!("matrix run: {e}")))));
            }
        }
    }
    passed.push(report(7, "quotient property", quotients()));
    passed.push(report(8, "Borel and Cartan graphs", borel_to_cartan()));
    passed.push(report(9, "dimension identities", dimensions()));
    passed.push(report(10, "Kesten-McKay convergence", kesten_mckay()));
    passed.push(report(11, "eta scan", eta_scan()));
    passed.push(report(12, "determinism", determinism()));

    let n = passed.iter().filter(|r| r.0).count();
    let known = passed.iter().filter(|r| !r.0 && r.1).count();
    println!("{n} of {} criteria passed, {known} known failure(s)", passed.len());
    if n + known < passed.len() {
        std::process::exit(1);
    }
}
