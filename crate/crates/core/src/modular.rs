//! Genus of `X_0(M)` and dimensions of spaces of weight 2 cusp forms,
//! compared with the kernel of the Weil map on isogeny graphs.

use serde::Serialize;

use crate::arith::{divisors, euler_phi, factorize, gcd, kronecker_prime};
use crate::components::ComponentReport;
use crate::graph::IsogenyGraph;
use crate::level::Family;

/// Genus of `X_0(M)` from the index, elliptic points and cusps.
pub fn genus_x0(m: u64) -> u64 {
    assert!(m >= 1);
    let f = factorize(m);
    let mu: u64 = f.iter().map(|&(q, e)| q.pow(e - 1) * (q + 1)).product();
    let nu2: u64 = if m % 4 == 0 {
        0
    } else {
        f.iter().map(|&(q, _)| (1 + kronecker_prime(-4, q)) as u64).product()
    };
    let nu3: u64 = if m % 9 == 0 {
        0
    } else {
        f.iter().map(|&(q, _)| (1 + kronecker_prime(-3, q)) as u64).product()
    };
    let nu_inf: u64 = divisors(m).iter().map(|&d| euler_phi(gcd(d, m / d))).sum();
    // 12 g = 12 + mu - 3 nu2 - 4 nu3 - 6 nu_inf
    let twelve_g = 12 + mu as i64 - 3 * nu2 as i64 - 4 * nu3 as i64 - 6 * nu_inf as i64;
    debug_assert!(twelve_g >= 0 && twelve_g % 12 == 0);
    (twelve_g / 12) as u64
}

/// `dim S_2^{p-new}(Gamma_0(pN)) = g(X_0(pN)) - 2 g(X_0(N))`.
pub fn dim_pnew_gamma0(p: u64, n: u64) -> i64 {
    genus_x0(p * n) as i64 - 2 * genus_x0(n) as i64
}

fn beta(m: u64) -> i64 {
    factorize(m)
        .iter()
        .map(|&(_, e)| match e {
            1 => -2,
            2 => 1,
            _ => 0,
        })
        .product()
}

/// `dim S_2^{new}(Gamma_0(M)) = sum_{d | M} beta(M/d) g(X_0(d))`.
pub fn dim_new_gamma0(m: u64) -> i64 {
    divisors(m)
        .iter()
        .map(|&d| beta(m / d) * genus_x0(d) as i64)
        .sum()
}

#[derive(Clone, Debug, Serialize)]
pub struct DimensionReport {
    pub family: String,
    /// `|V| - n k`.
    pub graph_side: i64,
    pub modular_side: i64,
    pub matches: bool,
}

/// Compares `|V| - n k` with the cusp form dimension of the matching case;
/// `None` for level structures outside trivial, Borel and non-split Cartan.
pub fn check_dimensions(g: &IsogenyGraph, comps: &ComponentReport) -> Option<DimensionReport> {
    let n = g.h.n as u64;
    let p = g.p;
    let family = if n == 1 { Some(Family::Trivial) } else { g.h.family };
    let modular_side = match family? {
        Family::Trivial => dim_pnew_gamma0(p, 1),
        Family::Borel => dim_pnew_gamma0(p, n),
        Family::NonsplitCartan => divisors(n).iter().map(|&d| dim_new_gamma0(p * d * d)).sum(),
        _ => return None,
    };
    let graph_side = g.len() as i64 - comps.n() as i64 * comps.cayley.k as i64;
    Some(DimensionReport {
        family: family?.name().to_string(),
        graph_side,
        modular_side,
        matches: graph_side == modular_side,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    /// Oracle: `Gamma_0(M) \ SL_2(Z)` as `P^1(Z/M)`, with elliptic points
    /// and cusps counted as fixed points of `S`, `ST` and orbits of `T`.
    fn genus_brute(m: u64) -> u64 {
        let units: Vec<u64> = (1..=m).filter(|&u| gcd(u, m) == 1).map(|u| u % m).collect();
        let canon = |c: u64, d: u64| -> (u64, u64) {
            units.iter().map(|&u| (u * c % m, u * d % m)).min().unwrap()
        };
        let mut pts = BTreeSet::new();
        for c in 0..m {
            for d in 0..m {
                if gcd(gcd(c, d), m) == 1 {
                    pts.insert(canon(c, d));
                }
            }
        }
        let pts: Vec<(u64, u64)> = pts.into_iter().collect();
        let act = |(c, d): (u64, u64), mat: [i64; 4]| -> (u64, u64) {
            let mm = m as i64;
            let x = (c as i64 * mat[0] + d as i64 * mat[2]).rem_euclid(mm) as u64;
            let y = (c as i64 * mat[1] + d as i64 * mat[3]).rem_euclid(mm) as u64;
            canon(x, y)
        };
        let s = [0, -1, 1, 0];
        let st = [0, -1, 1, 1];
        let t = [1, 1, 0, 1];
        let nu2 = pts.iter().filter(|&&x| act(x, s) == x).count() as i64;
        let nu3 = pts.iter().filter(|&&x| act(x, st) == x).count() as i64;
        let mut seen = BTreeSet::new();
        let mut cusps = 0i64;
        for &x in &pts {
            if seen.contains(&x) {
                continue;
            }
            cusps += 1;
            let mut y = x;
            while seen.insert(y) {
                y = act(y, t);
            }
        }
        let mu = pts.len() as i64;
        let twelve_g = 12 + mu - 3 * nu2 - 4 * nu3 - 6 * cusps;
        assert_eq!(twelve_g % 12, 0, "M = {m}");
        (twelve_g / 12) as u64
    }

    #[test]
    fn genus_table() {
        assert_eq!(genus_x0(1), 0);
        assert_eq!(genus_x0(11), 1);
        assert_eq!(genus_x0(23), 2);
        assert_eq!(genus_x0(37), 2);
        assert_eq!(genus_x0(64), 3);
    }

    #[test]
    fn genus_matches_permutation_count() {
        for m in 1..=100 {
            assert_eq!(genus_x0(m), genus_brute(m), "M = {m}");
        }
    }

    #[test]
    fn new_and_p_new_dimensions() {
        assert_eq!(dim_pnew_gamma0(23, 1), 2);
        assert_eq!(dim_pnew_gamma0(11, 1), 1);
        assert_eq!(dim_new_gamma0(11), 1);
        assert_eq!(dim_new_gamma0(22), 0);
        assert_eq!(dim_new_gamma0(1), 0);
        // g(X_0(2)) = 0, so the p-new part is the whole space.
        assert_eq!(dim_pnew_gamma0(23, 2), genus_x0(46) as i64);
        // Summing new dimensions over divisors recovers the genus with the
        // multiplicity of each old space.
        for m in 1..=60u64 {
            let total: i64 = divisors(m)
                .iter()
                .map(|&d| dim_new_gamma0(d) * divisors(m / d).len() as i64)
                .sum();
            assert_eq!(total, genus_x0(m) as i64, "M = {m}");
        }
    }
}
