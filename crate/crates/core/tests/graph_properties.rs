use num_rational::Ratio;
use proptest::prelude::*;
use ssgraph::components::component_split;
use ssgraph::export::{from_json, to_csv, to_json};
use ssgraph::graph::{build_graph, mat_mul};
use ssgraph::level::{Family, LevelSubgroup};
use ssgraph::verify::{verify, Status};

const PRIMES: [u64; 8] = [5, 7, 11, 13, 17, 19, 23, 29];

fn family() -> impl Strategy<Value = Family> {
    prop_oneof![
        Just(Family::Trivial),
        Just(Family::Borel),
        Just(Family::SplitCartan),
        Just(Family::NonsplitCartan),
        Just(Family::TorsionPoint),
    ]
}

/// Level 3 needs p != 3 and l != 3.
fn instance() -> impl Strategy<Value = (u64, u64, Family)> {
    (prop::sample::select(PRIMES.to_vec()), prop::sample::select(vec![2u64, 5]), family())
        .prop_filter("l != p", |(p, l, _)| p != l)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, ..ProptestConfig::default() })]

    #[test]
    fn regular_with_correct_mass((p, l, fam) in instance()) {
        let h = LevelSubgroup::named(fam, 3).unwrap();
        let g = build_graph(p, l, &h, 1).unwrap();
        for v in 0..g.len() {
            let col: u32 = (0..g.len()).map(|w| g.adjacency[w][v]).sum();
            prop_assert_eq!(col as u64, l + 1);
        }
        prop_assert_eq!(g.mass(), g.expected_mass());
        prop_assert!(g.mass() > Ratio::from_integer(0));
    }

    #[test]
    fn adjoint_commutes((p, l, fam) in instance()) {
        let h = LevelSubgroup::named(fam, 3).unwrap();
        let g = build_graph(p, l, &h, 1).unwrap();
        let star = g.adjoint().unwrap();
        prop_assert_eq!(mat_mul(&g.adjacency, &star), mat_mul(&star, &g.adjacency));
    }

    #[test]
    fn file_round_trip((p, l, fam) in instance()) {
        let h = LevelSubgroup::named(fam, 3).unwrap();
        let g = build_graph(p, l, &h, 1).unwrap();
        let text = to_json(&g);
        let back = from_json(&text).unwrap();
        prop_assert_eq!(&back.adjacency, &g.adjacency);
        prop_assert_eq!(&back.vertices, &g.vertices);
        prop_assert_eq!(to_json(&back), text);
    }

    #[test]
    fn seed_does_not_change_graph((p, l, fam) in instance(), seed in 2u64..1000) {
        let h = LevelSubgroup::named(fam, 3).unwrap();
        let a = build_graph(p, l, &h, 1).unwrap();
        let b = build_graph(p, l, &h, seed).unwrap();
        prop_assert_eq!(a.adjacency.len(), b.adjacency.len());
        prop_assert_eq!(a.edge_count(), b.edge_count());
        let sizes = |g| {
            let mut s: Vec<usize> = component_split(g).members.iter().map(Vec::len).collect();
            s.sort_unstable();
            s
        };
        prop_assert_eq!(sizes(&a), sizes(&b));
    }
}

#[test]
fn built_graphs_verify() {
    for (p, l, fam, n) in [
        (23, 2, Family::Borel, 3),
        (29, 3, Family::SplitCartan, 5),
        (31, 2, Family::TorsionPoint, 5),
        (19, 2, Family::Full, 3),
    ] {
        let h = LevelSubgroup::named(fam, n).unwrap();
        let g = build_graph(p, l, &h, 1).unwrap();
        let r = verify(&g, None, None).unwrap();
        assert!(r.passed(), "({p},{l},{fam:?},{n}): {:?}", r.failures());
        assert_eq!(r.status("column_sums"), Some(Status::Pass));
    }
}

#[test]
fn tampered_file_is_a_breach() {
    let h = LevelSubgroup::named(Family::Borel, 3).unwrap();
    let g = build_graph(23, 2, &h, 1).unwrap();
    let text = to_json(&g).replacen("\"aut\": 2,", "\"aut\": 5,", 1);
    assert!(from_json(&text).is_err());
}

#[test]
fn csv_has_one_row_per_vertex() {
    let g = build_graph(37, 2, &LevelSubgroup::named(Family::Trivial, 1).unwrap(), 1).unwrap();
    let csv = to_csv(&g);
    assert_eq!(csv.lines().count(), g.len());
    assert!(csv.lines().all(|r| r.split(',').count() == g.len()));
}
