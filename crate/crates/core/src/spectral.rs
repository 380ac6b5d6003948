//! Spectra of isogeny graphs: eigenvalues with an exact cross-check,
//! adjointness, eigenvalue angles, the gap to `2 sqrt(l)`, and comparison
//! with the Kesten-McKay law.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::Pow;
use rayon::prelude::*;
use serde::Serialize;

use crate::components::{component_split, ComponentReport};
use crate::eigen::{self, sort_spectrum};
use crate::graph::{mat_mul, GraphError, IsogenyGraph};
use crate::level::KInfo;
use crate::operators::diamond;
use crate::poly::{self, Poly};

/// Largest dimension for which exact characteristic polynomials are used.
pub const EXACT_DIM: usize = 64;
/// Agreement between QR eigenvalues and exact roots.
pub const EXACT_MATCH_TOL: f64 = 1e-8;
/// Multiset comparison of floating point spectra.
pub const SPECTRUM_TOL: f64 = 1e-8;
/// Angle lattice tolerance, in radians.
pub const ANGLE_TOL: f64 = 1e-6;
/// Eigenvalues below this modulus have no meaningful phase.
pub const ZERO_CUT: f64 = 1e-7;
/// Distance within which a QR eigenvalue is taken to be `(l+1) zeta`.
pub const TRIVIAL_TOL: f64 = 1e-6;
/// Slack applied to floating point comparisons against the bound.
pub const BOUND_FLOAT_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    QrDoubleShift,
    ExactCharpoly,
}

#[derive(Clone, Debug, Serialize)]
pub struct Spectrum {
    pub eigenvalues: Vec<Complex64>,
    pub method: Method,
    /// `max |A v - lambda v| / |v|` over inverse-iteration eigenvectors
    /// (dimension at most [`EXACT_DIM`]).
    pub residual: Option<f64>,
    /// Largest distance from a QR eigenvalue to the nearest exact root
    /// (dimension at most [`EXACT_DIM`]).
    pub exact_deviation: Option<f64>,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Largest `|lambda - conj(mu)|` pairing each eigenvalue with its
    /// conjugate partner.
    pub fn conjugation_defect(&self) -> f64 {
        let conj: Vec<Complex64> = self.eigenvalues.iter().map(|z| z.conj()).collect();
        multiset_distance(&self.eigenvalues, &conj)
    }
}

pub fn to_f64(a: &[Vec<u32>]) -> Vec<Vec<f64>> {
    a.iter().map(|r| r.iter().map(|&x| x as f64).collect()).collect()
}

/// Greedy matching distance between two multisets of complex numbers
/// (`inf` if sizes differ).
pub fn multiset_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut used = vec![false; b.len()];
    let mut worst = 0.0f64;
    for x in a {
        let mut best = None;
        let mut bd = f64::INFINITY;
        for (j, y) in b.iter().enumerate() {
            if !used[j] && (x - y).norm() < bd {
                bd = (x - y).norm();
                best = Some(j);
            }
        }
        if let Some(j) = best {
            used[j] = true;
        }
        worst = worst.max(bd);
    }
    worst
}

/// Whether every element of `small` matches a distinct element of `big`.
pub fn is_sub_multiset(small: &[Complex64], big: &[Complex64], tol: f64) -> bool {
    let mut used = vec![false; big.len()];
    small.iter().all(|x| {
        let best = (0..big.len())
            .filter(|&j| !used[j])
            .min_by(|&i, &j| (big[i] - x).norm().partial_cmp(&(big[j] - x).norm()).unwrap());
        match best {
            Some(j) if (big[j] - x).norm() <= tol => {
                used[j] = true;
                true
            }
            _ => false,
        }
    })
}

fn solve_complex(mut m: Vec<Vec<Complex64>>, mut b: Vec<Complex64>) -> Option<Vec<Complex64>> {
    let n = b.len();
    for c in 0..n {
        let piv = (c..n).max_by(|&i, &j| m[i][c].norm().partial_cmp(&m[j][c].norm()).unwrap())?;
        if m[piv][c].norm() == 0.0 {
            return None;
        }
        m.swap(c, piv);
        b.swap(c, piv);
        for r in c + 1..n {
            let f = m[r][c] / m[c][c];
            if f.norm() == 0.0 {
                continue;
            }
            for k in c..n {
                let t = m[c][k];
                m[r][k] -= f * t;
            }
            let t = b[c];
            b[r] -= f * t;
        }
    }
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    for r in (0..n).rev() {
        let s: Complex64 = (r + 1..n).map(|k| m[r][k] * x[k]).sum();
        x[r] = (b[r] - s) / m[r][r];
    }
    Some(x)
}

/// Residual of an approximate eigenpair found by two steps of shifted
/// inverse iteration.
fn eigen_residual(a: &[Vec<f64>], lambda: Complex64) -> f64 {
    let n = a.len();
    let shift = lambda + Complex64::new(1e-10, 1e-10);
    let m: Vec<Vec<Complex64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| Complex64::new(a[i][j], 0.0) - if i == j { shift } else { Complex64::new(0.0, 0.0) })
                .collect()
        })
        .collect();
    let mut x: Vec<Complex64> = (0..n).map(|i| Complex64::new(1.0 + i as f64 * 0.01, 0.5)).collect();
    for _ in 0..2 {
        match solve_complex(m.clone(), x.clone()) {
            Some(y) => {
                let nrm = y.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                if !nrm.is_finite() || nrm == 0.0 {
                    return 0.0;
                }
                x = y.into_iter().map(|z| z / nrm).collect();
            }
            None => return 0.0,
        }
    }
    (0..n)
        .map(|i| {
            let ax: Complex64 = (0..n).map(|j| x[j] * a[i][j]).sum();
            (ax - lambda * x[i]).norm_sqr()
        })
        .sum::<f64>()
        .sqrt()
}

/// Eigenvalues of an integer matrix by double-shift QR, validated against
/// the exact characteristic polynomial when the dimension is small. If QR
/// does not converge, the roots of the exact polynomial are used.
pub fn eigenvalues(a: &[Vec<u32>]) -> Spectrum {
    let af = to_f64(a);
    let n = a.len();
    match eigen::eigenvalues(&af) {
        Ok(ev) => {
            let (residual, exact_deviation) = if n <= EXACT_DIM && n > 0 {
                let rad = poly::radical(&poly::charpoly(a));
                let roots = poly::roots(&rad);
                let dev = ev
                    .iter()
                    .map(|z| roots.iter().map(|r| (r - z).norm()).fold(f64::INFINITY, f64::min))
                    .fold(0.0, f64::max);
                let res = ev.iter().map(|&z| eigen_residual(&af, z)).fold(0.0, f64::max);
                (Some(res), Some(dev))
            } else {
                (None, None)
            };
            Spectrum { eigenvalues: ev, method: Method::QrDoubleShift, residual, exact_deviation }
        }
        Err(_) => {
            let cp = poly::charpoly(a);
            let mut ev = exact_roots_with_multiplicity(&cp);
            sort_spectrum(&mut ev);
            Spectrum { eigenvalues: ev, method: Method::ExactCharpoly, residual: None, exact_deviation: Some(0.0) }
        }
    }
}

/// Roots of `p` repeated according to the squarefree decomposition.
fn exact_roots_with_multiplicity(p: &Poly) -> Vec<Complex64> {
    let mut out = Vec::new();
    let mut cur = poly::primitive(p);
    while poly::degree(&cur) > 0 {
        let rad = poly::radical(&cur);
        out.extend(poly::roots(&rad));
        cur = poly::div_exact(&cur, &rad).expect("radical divides");
    }
    out
}

/// Principal submatrix on the given vertex ids.
pub fn submatrix(a: &[Vec<u32>], idx: &[usize]) -> Vec<Vec<u32>> {
    idx.iter().map(|&i| idx.iter().map(|&j| a[i][j]).collect()).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct AdjointReport {
    /// `a_w A[w][v] = a_v A*[v][w]` with integral `A*`.
    pub hermitian_identity: bool,
    /// `A* = <l^-1> A`.
    pub diamond_relation: bool,
    /// `A A* = A* A`.
    pub normal: bool,
    pub self_adjoint: bool,
    pub symmetric: bool,
    pub l_in_h: bool,
    /// Distance between the spectra of `A` and `A*`.
    pub spectrum_distance: f64,
}

impl AdjointReport {
    pub fn passed(&self) -> bool {
        self.hermitian_identity
            && self.diamond_relation
            && self.normal
            && self.spectrum_distance <= SPECTRUM_TOL
            && (!self.l_in_h || self.self_adjoint)
    }
}

pub fn verify_adjointness(g: &IsogenyGraph) -> Result<AdjointReport, GraphError> {
    let a = &g.adjacency;
    let s = g.adjoint()?;
    let n = g.len();
    let hermitian_identity = (0..n).all(|v| {
        (0..n).all(|w| {
            g.vertices[w].aut as u64 * a[w][v] as u64 == g.vertices[v].aut as u64 * s[v][w] as u64
        })
    });
    let nn = g.h.n as u64;
    let perm: Vec<usize> = if nn == 1 {
        (0..n).collect()
    } else {
        let inv = crate::arith::inv_mod(g.ell % nn, nn).expect("l is a unit mod N");
        diamond(g, inv)?.perm
    };
    let mut pinv = vec![0usize; n];
    for (i, &j) in perm.iter().enumerate() {
        pinv[j] = i;
    }
    let diamond_relation = (0..n).all(|i| (0..n).all(|j| s[i][j] == a[pinv[i]][j]));
    let normal = mat_mul(a, &s) == mat_mul(&s, a);
    let self_adjoint = s == *a;
    let symmetric = (0..n).all(|i| (0..n).all(|j| a[i][j] == a[j][i]));
    let gl = g.h.gl2();
    let l_in_h = g.h.contains(&gl.scalar(g.ell));
    let ea = eigen::eigenvalues(&to_f64(a)).unwrap_or_default();
    let es = eigen::eigenvalues(&to_f64(&s)).unwrap_or_default();
    Ok(AdjointReport {
        hermitian_identity,
        diamond_relation,
        normal,
        self_adjoint,
        symmetric,
        l_in_h,
        spectrum_distance: multiset_distance(&ea, &es),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct AngleReport {
    pub k_prime: u32,
    pub tested: usize,
    pub max_residual: f64,
    pub violations: Vec<(f64, f64)>,
}

impl AngleReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Distance (radians) from `arg z` to the lattice `Z pi / k'`.
pub fn angle_residual(z: Complex64, k_prime: u32) -> f64 {
    let step = std::f64::consts::PI / k_prime as f64;
    let t = z.arg() / step;
    (t - t.round()).abs() * step
}

pub fn classify_angles(ev: &[Complex64], k_prime: u32, tol: f64) -> AngleReport {
    let mut tested = 0;
    let mut max_residual = 0.0f64;
    let mut violations = Vec::new();
    for z in ev {
        if z.norm() < ZERO_CUT {
            continue;
        }
        tested += 1;
        let r = angle_residual(*z, k_prime);
        max_residual = max_residual.max(r);
        if r > tol {
            violations.push((z.arg(), r));
        }
    }
    AngleReport { k_prime, tested, max_residual, violations }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Verified,
    Violated,
    Inconclusive,
}

#[derive(Clone, Debug, Serialize)]
pub struct ComponentGap {
    pub component: usize,
    pub size: usize,
    pub k: u32,
    /// `|V(G_i)| - k`.
    pub d: i64,
    /// Numerical count of eigenvalues near each `(l+1) zeta`.
    pub trivial_counts: Vec<usize>,
    /// `x^k - (l+1)^k` divides the characteristic polynomial exactly once
    /// and is coprime to the cofactor (exact, small components only).
    pub trivial_exact: Option<bool>,
    pub max_nontrivial: Option<f64>,
    /// `2 sqrt(l) - max |lambda|` over nontrivial eigenvalues (`inf` when
    /// there are none).
    pub eta: f64,
    /// `log10` of `(4 sqrt l)^(-2 d k' + 1)`.
    pub log10_bound_gap: f64,
    pub log10_bound_gap_pm: f64,
    pub bound: Verdict,
    pub bound_pm: Verdict,
    /// Bound established with inclusion disks around exact roots.
    pub certified: Option<bool>,
    pub ramanujan: bool,
    pub angles: AngleReport,
    pub angles_pm: AngleReport,
    /// Nontrivial eigenvalues, for distribution statistics.
    #[serde(skip)]
    pub nontrivial: Vec<Complex64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct GapReport {
    pub ell: u64,
    pub k_info: KInfo,
    pub components: Vec<ComponentGap>,
    /// Minimum over components.
    pub eta: f64,
    /// Numerical multiplicity of `l + 1` in the whole spectrum.
    pub multiplicity_l_plus_1: usize,
    /// `rad(chi)(A) = 0`, exact (dimension at most [`EXACT_DIM`]).
    pub minimal_polynomial_squarefree: Option<bool>,
    #[serde(skip)]
    pub spectrum: Vec<Complex64>,
}

impl GapReport {
    pub fn trivial_ok(&self) -> bool {
        self.components.iter().all(|c| {
            c.trivial_counts.iter().all(|&x| x == 1) && c.trivial_exact.unwrap_or(true)
        })
    }

    pub fn bound_ok(&self) -> bool {
        self.components.iter().all(|c| c.bound == Verdict::Verified)
    }

    pub fn angles_ok(&self) -> bool {
        self.components.iter().all(|c| c.angles.passed())
    }
}

fn log10_gap(ell: u64, d: i64, k_prime: u32) -> f64 {
    (-2 * d * k_prime as i64 + 1) as f64 * (4.0 * (ell as f64).sqrt()).log10()
}

fn verdict(max: Option<f64>, bound: f64) -> Verdict {
    match max {
        None => Verdict::Verified,
        Some(m) if m + BOUND_FLOAT_TOL < bound => Verdict::Verified,
        Some(m) if m - BOUND_FLOAT_TOL >= bound => Verdict::Violated,
        Some(_) => Verdict::Inconclusive,
    }
}

/// Exact side of the component analysis: trivial factor and certified
/// modulus bound on the nontrivial factor.
fn exact_component(a: &[Vec<u32>], ell: u64, k: u32, bound: f64) -> (bool, Option<bool>) {
    let chi = poly::charpoly(a);
    let c = BigInt::from(ell + 1).pow(k);
    let f = poly::binomial(k as usize, &c);
    let Some(q) = poly::div_exact(&chi, &f) else {
        return (false, None);
    };
    let once = poly::degree(&poly::gcd(&q, &f)) == 0;
    if poly::degree(&q) == 0 {
        return (once, Some(true));
    }
    let rad = poly::radical(&q);
    let z = poly::roots(&rad);
    let r = poly::inclusion_radii(&rad, &z);
    let worst = z.iter().zip(&r).map(|(zi, ri)| zi.norm() + ri).fold(0.0, f64::max);
    let tight = r.iter().all(|&x| x < 1e-6);
    let certified = if !tight {
        None
    } else {
        Some(worst < bound * (1.0 - 8.0 * f64::EPSILON))
    };
    (once, certified)
}

/// Splits the graph into components and reports trivial eigenvalues,
/// the gap `eta`, the theorem bound and the angle lattice for each.
pub fn gap_report(g: &IsogenyGraph, comps: &ComponentReport) -> GapReport {
    let ell = g.ell;
    let ki = g.k_info();
    let k = comps.cayley.k;
    let two_sqrt = 2.0 * (ell as f64).sqrt();
    let components: Vec<ComponentGap> = comps
        .members
        .par_iter()
        .enumerate()
        .map(|(ci, mem)| {
            let sub = submatrix(&g.adjacency, mem);
            let spec = eigenvalues(&sub);
            let mut rest = spec.eigenvalues.clone();
            let mut trivial_counts = Vec::with_capacity(k as usize);
            for j in 0..k {
                let t = Complex64::from_polar(
                    (ell + 1) as f64,
                    2.0 * std::f64::consts::PI * j as f64 / k as f64,
                );
                trivial_counts.push(rest.iter().filter(|z| (*z - t).norm() < TRIVIAL_TOL).count());
                if let Some(pos) = (0..rest.len())
                    .min_by(|&a, &b| (rest[a] - t).norm().partial_cmp(&(rest[b] - t).norm()).unwrap())
                {
                    rest.remove(pos);
                }
            }
            let max_nontrivial = rest.iter().map(|z| z.norm()).reduce(f64::max);
            let eta = max_nontrivial.map_or(f64::INFINITY, |m| two_sqrt - m);
            let d = mem.len() as i64 - k as i64;
            let lg = log10_gap(ell, d, ki.k_prime);
            let lg_pm = log10_gap(ell, d, ki.k_prime_pm);
            let bound = two_sqrt - 10f64.powf(lg);
            let bound_pm = two_sqrt - 10f64.powf(lg_pm);
            let (trivial_exact, certified) = if mem.len() <= EXACT_DIM {
                let (once, cert) = exact_component(&sub, ell, k, bound);
                (Some(once), cert)
            } else {
                (None, None)
            };
            let mut bound_v = verdict(max_nontrivial, bound);
            if certified == Some(false) {
                bound_v = Verdict::Violated;
            } else if certified == Some(true) {
                bound_v = Verdict::Verified;
            }
            ComponentGap {
                component: ci,
                size: mem.len(),
                k,
                d,
                trivial_counts,
                trivial_exact,
                max_nontrivial,
                eta,
                log10_bound_gap: lg,
                log10_bound_gap_pm: lg_pm,
                bound: bound_v,
                bound_pm: verdict(max_nontrivial, bound_pm),
                certified,
                ramanujan: max_nontrivial.is_none_or(|m| m <= two_sqrt),
                angles: classify_angles(&rest, ki.k_prime, ANGLE_TOL),
                angles_pm: classify_angles(&rest, ki.k_prime_pm, ANGLE_TOL),
                nontrivial: rest,
            }
        })
        .collect();
    let eta = components.iter().map(|c| c.eta).fold(f64::INFINITY, f64::min);
    let whole = eigen::eigenvalues(&to_f64(&g.adjacency)).unwrap_or_default();
    let target = Complex64::new((ell + 1) as f64, 0.0);
    let multiplicity_l_plus_1 = whole.iter().filter(|z| (*z - target).norm() < TRIVIAL_TOL).count();
    let minimal_polynomial_squarefree = (g.len() <= EXACT_DIM).then(|| {
        let rad = poly::radical(&poly::charpoly(&g.adjacency));
        poly::squarefree_mod_some_prime(&rad) && poly::annihilates(&rad, &g.adjacency)
    });
    GapReport {
        ell,
        k_info: ki,
        components,
        eta,
        multiplicity_l_plus_1,
        minimal_polynomial_squarefree,
        spectrum: whole,
    }
}

/// Kesten-McKay density of `mu_l` at `x`.
pub fn km_density(ell: u64, x: f64) -> f64 {
    let l = ell as f64;
    let s = l - x * x / 4.0;
    if s <= 0.0 {
        return 0.0;
    }
    (l + 1.0) / std::f64::consts::PI * s.sqrt() / ((l + 1.0) * (l + 1.0) - x * x)
}

/// Cumulative distribution of `mu_l`, through `x = 2 sqrt(l) sin u` which
/// removes the square root singularities.
pub fn km_cdf(ell: u64, x: f64) -> f64 {
    let l = ell as f64;
    let edge = 2.0 * l.sqrt();
    if x <= -edge {
        return 0.0;
    }
    if x >= edge {
        return 1.0;
    }
    let lo = -std::f64::consts::FRAC_PI_2;
    let hi = (x / edge).asin();
    let g = |u: f64| {
        let c = u.cos();
        let s = u.sin();
        2.0 * l * (l + 1.0) * c * c / (std::f64::consts::PI * ((l + 1.0) * (l + 1.0) - 4.0 * l * s * s))
    };
    // Composite Simpson on a smooth periodic-like integrand.
    let n = 2000;
    let h = (hi - lo) / n as f64;
    let mut acc = g(lo) + g(hi);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * g(lo + i as f64 * h);
    }
    (acc * h / 3.0).clamp(0.0, 1.0)
}

/// Kolmogorov-Smirnov distance between the empirical law of `xs` and `mu_l`.
pub fn ks_distance(ell: u64, xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let m = v.len() as f64;
    v.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = km_cdf(ell, x);
            (f - i as f64 / m).max((i + 1) as f64 / m - f)
        })
        .fold(0.0, f64::max)
}

#[derive(Clone, Debug, Serialize)]
pub struct KmBucket {
    /// Multiple `j` of `pi / k'`.
    pub theta_index: u32,
    pub theta: f64,
    pub count: usize,
    pub ks: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct KmReport {
    pub ell: u64,
    pub k_prime: u32,
    pub buckets: Vec<KmBucket>,
    /// Bucket KS distances weighted by bucket size.
    pub ks: f64,
}

/// Buckets nontrivial eigenvalues by phase in `Z pi / k'` (mod `pi`), signs
/// their moduli along `e^{i theta}`, and compares each bucket with `mu_l`.
pub fn km_report(nontrivial: &[Complex64], ell: u64, k_prime: u32) -> KmReport {
    let step = std::f64::consts::PI / k_prime as f64;
    let mut samples: Vec<Vec<f64>> = vec![Vec::new(); k_prime as usize];
    for z in nontrivial {
        if z.norm() < ZERO_CUT {
            samples[0].push(0.0);
            continue;
        }
        let t = (z.arg() / step).round() as i64;
        let j = t.rem_euclid(2 * k_prime as i64);
        let sign = if j < k_prime as i64 { 1.0 } else { -1.0 };
        samples[(j % k_prime as i64) as usize].push(sign * z.norm());
    }
    let buckets: Vec<KmBucket> = samples
        .iter()
        .enumerate()
        .filter(|(_, s)| !s.is_empty())
        .map(|(j, s)| KmBucket {
            theta_index: j as u32,
            theta: j as f64 * step,
            count: s.len(),
            ks: ks_distance(ell, s),
        })
        .collect();
    let total: usize = buckets.iter().map(|b| b.count).sum();
    let ks = if total == 0 {
        f64::NAN
    } else {
        buckets.iter().map(|b| b.ks * b.count as f64).sum::<f64>() / total as f64
    };
    KmReport { ell, k_prime, buckets, ks }
}

#[derive(Clone, Debug, Serialize)]
pub struct EtaRow {
    pub p: u64,
    pub l: u64,
    pub n_vertices: usize,
    pub eta: f64,
    pub log_inv_eta: f64,
    /// `log10 (4 sqrt l)^(-2|V| - 1)`.
    pub log10_thm_bound: f64,
    pub ref_2loglogp: f64,
}

impl EtaRow {
    pub fn satisfies_bound(&self) -> bool {
        self.eta.is_infinite() || self.eta > 0.0 && self.eta.log10() >= self.log10_thm_bound
    }

    pub fn below_ramanujan(&self) -> bool {
        self.eta < 2.0 * (self.l as f64).sqrt()
    }

    pub fn csv_header() -> &'static str {
        "p,l,n_vertices,eta,log_inv_eta,thm_bound,ref_2loglogp"
    }

    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{:.12}",
            self.p,
            self.l,
            self.n_vertices,
            fmt_f(self.eta),
            fmt_f(self.log_inv_eta),
            fmt_pow10(self.log10_thm_bound),
            self.ref_2loglogp
        )
    }
}

fn fmt_f(x: f64) -> String {
    if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.12}")
    }
}

/// `10^e` in scientific notation without floating point underflow.
pub fn fmt_pow10(e: f64) -> String {
    let ex = e.floor();
    let mant = 10f64.powf(e - ex);
    format!("{mant:.6}e{}", ex as i64)
}

/// One row of the gap table for a built graph.
pub fn eta_row(g: &IsogenyGraph) -> EtaRow {
    let comps = component_split(g);
    let two_sqrt = 2.0 * (g.ell as f64).sqrt();
    let k = comps.cayley.k;
    let mut eta = f64::INFINITY;
    for mem in &comps.members {
        let sub = submatrix(&g.adjacency, mem);
        let mut ev = eigen::eigenvalues(&to_f64(&sub)).unwrap_or_default();
        for j in 0..k {
            let t = Complex64::from_polar((g.ell + 1) as f64, 2.0 * std::f64::consts::PI * j as f64 / k as f64);
            if let Some(pos) = (0..ev.len())
                .min_by(|&a, &b| (ev[a] - t).norm().partial_cmp(&(ev[b] - t).norm()).unwrap())
            {
                ev.remove(pos);
            }
        }
        if let Some(m) = ev.iter().map(|z| z.norm()).reduce(f64::max) {
            eta = eta.min(two_sqrt - m);
        }
    }
    let n = g.len();
    EtaRow {
        p: g.p,
        l: g.ell,
        n_vertices: n,
        eta,
        log_inv_eta: if eta.is_infinite() { f64::NEG_INFINITY } else { (1.0 / eta).ln() },
        log10_thm_bound: -(2.0 * n as f64 + 1.0) * (4.0 * (g.ell as f64).sqrt()).log10(),
        ref_2loglogp: 2.0 * (g.p as f64).ln().ln(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_graph;
    use crate::level::{Family, LevelSubgroup};

    #[test]
    fn single_vertex() {
        let s = eigenvalues(&[vec![3]]);
        assert_eq!(s.eigenvalues, vec![Complex64::new(3.0, 0.0)]);
        assert!(s.exact_deviation.unwrap() < 1e-12);
    }

    #[test]
    fn scaled_cycle_spectrum() {
        for k in 1..=6usize {
            let mut a = vec![vec![0u32; k]; k];
            for i in 0..k {
                a[(i + 1) % k][i] = 4;
            }
            let s = eigenvalues(&a);
            let expect: Vec<Complex64> = (0..k)
                .map(|j| Complex64::from_polar(4.0, 2.0 * std::f64::consts::PI * j as f64 / k as f64))
                .collect();
            assert!(multiset_distance(&s.eigenvalues, &expect) < 1e-10);
            assert!(s.exact_deviation.unwrap() < 1e-8);
            assert!(s.residual.unwrap() < 1e-8);
        }
    }

    #[test]
    fn p23_l3_trivial_level() {
        let g = build_graph(23, 3, &LevelSubgroup::named(Family::Trivial, 1).unwrap(), 1).unwrap();
        let s = eigenvalues(&g.adjacency);
        assert_eq!(s.len(), 3);
        assert!((s.eigenvalues[0] - Complex64::new(4.0, 0.0)).norm() < 1e-10);
        for z in &s.eigenvalues[1..] {
            assert!(z.norm() < 2.0 * 3f64.sqrt());
        }
        let comps = component_split(&g);
        let r = gap_report(&g, &comps);
        assert!(r.eta > 10f64.powf(-7.0 * (4.0 * 3f64.sqrt()).log10()));
        assert!(r.bound_ok() && r.trivial_ok() && r.angles_ok());
        assert_eq!(r.components[0].certified, Some(true));
        let adj = verify_adjointness(&g).unwrap();
        assert!(adj.passed() && adj.normal);
    }

    #[test]
    fn km_density_properties() {
        for ell in [2u64, 3, 5, 7] {
            let e = 2.0 * (ell as f64).sqrt();
            assert!(km_density(ell, e) < 1e-7);
            assert!(km_density(ell, -e) < 1e-7);
            assert_eq!(km_density(ell, 1.01 * e), 0.0);
            for x in [0.1, 0.7, 1.3] {
                assert!((km_density(ell, x) - km_density(ell, -x)).abs() < 1e-15);
            }
            assert!((km_cdf(ell, 0.0) - 0.5).abs() < 1e-12);
        }
    }

    fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
        let c = (a + b) / 2.0;
        let whole = (b - a) / 6.0 * (f(a) + 4.0 * f(c) + f(b));
        fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> f64 {
            let c = (a + b) / 2.0;
            let l = (c - a) / 6.0 * (f(a) + 4.0 * f((a + c) / 2.0) + f(c));
            let r = (b - c) / 6.0 * (f(c) + 4.0 * f((c + b) / 2.0) + f(b));
            if depth == 0 || (l + r - whole).abs() < 15.0 * tol {
                l + r + (l + r - whole) / 15.0
            } else {
                rec(f, a, c, l, tol / 2.0, depth - 1) + rec(f, c, b, r, tol / 2.0, depth - 1)
            }
        }
        rec(f, a, b, whole, tol, depth)
    }

    #[test]
    fn km_density_integrates_to_one() {
        // Oracle: adaptive quadrature of the closed-form density.
        for ell in [2u64, 3, 5, 7] {
            let e = 2.0 * (ell as f64).sqrt();
            let f = |x: f64| km_density(ell, x);
            let total = adaptive_simpson(&f, -e, e, 1e-13, 50);
            assert!((total - 1.0).abs() < 1e-9, "l = {ell}: {total}");
            assert!((km_cdf(ell, e * 0.999_999) - 1.0).abs() < 1e-6);
            let half = adaptive_simpson(&f, -e, 0.8, 1e-13, 50);
            assert!((km_cdf(ell, 0.8) - half).abs() < 1e-9);
        }
    }

    #[test]
    fn angles_of_full_level_spectrum() {
        let h = LevelSubgroup::named(Family::Full, 3).unwrap();
        let g = build_graph(23, 2, &h, 3).unwrap();
        let ki = g.k_info();
        assert_eq!(ki.k_prime, 2);
        let s = eigenvalues(&g.adjacency);
        let rep = classify_angles(&s.eigenvalues, ki.k_prime, ANGLE_TOL);
        assert!(rep.passed(), "{rep:?}");
        assert!(classify_angles(&[Complex64::new(0.0, 0.0)], 1, ANGLE_TOL).tested == 0);
    }

    #[test]
    fn real_spectrum_when_l_in_h() {
        let h = LevelSubgroup::named(Family::Borel, 5).unwrap();
        let g = build_graph(29, 2, &h, 3).unwrap();
        let adj = verify_adjointness(&g).unwrap();
        assert!(adj.l_in_h && adj.self_adjoint && adj.passed());
        let s = eigenvalues(&g.adjacency);
        assert!(classify_angles(&s.eigenvalues, 1, ANGLE_TOL).passed());
    }

    #[test]
    fn eta_row_formats() {
        let g = build_graph(13, 2, &LevelSubgroup::named(Family::Trivial, 1).unwrap(), 1).unwrap();
        let row = eta_row(&g);
        assert!(row.eta.is_infinite());
        assert!(row.satisfies_bound());
        assert!(row.csv_line().starts_with("13,2,1,inf,-inf,"));
        assert_eq!(fmt_pow10(-252.5), "3.162278e-253");
    }
}
