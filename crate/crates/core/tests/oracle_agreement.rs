//! Solver output checked against the exhaustive reference solver.

use mistr::lattice::{difference_set, equivalent, LatticePoint, PointSet};
use mistr::oracle::{brute_force_solve, check_solution};
use mistr::rng::stream;
use mistr::search::{mistr, MistrParams};
use proptest::prelude::*;

fn small_set() -> impl Strategy<Value = PointSet> {
    prop::collection::hash_set((0i64..16, 0i64..16), 2..=8)
        .prop_map(|pts| PointSet::new(pts.into_iter().map(|(x, y)| LatticePoint::from([x, y]))).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn exact_results_match_an_oracle_class(v in small_set(), seed in any::<u64>()) {
        let w = difference_set(&v).unwrap();
        let classes = brute_force_solve(&w, 8).unwrap();
        let r = mistr(&w, &MistrParams::with_projections(10), &mut stream(seed, 3)).unwrap();
        prop_assert_eq!(r.exact, check_solution(&r.recovered, &w));
        if r.exact {
            prop_assert!(classes.contains_class_of(&r.recovered));
        }
        if classes.len() == 1 && classes.k == Some(v.len()) {
            prop_assert!(r.exact);
            prop_assert!(equivalent(&r.recovered, &v).unwrap());
        }
    }

    #[test]
    fn oracle_finds_the_generating_set(v in small_set()) {
        let w = difference_set(&v).unwrap();
        let classes = brute_force_solve(&w, 8).unwrap();
        let k = classes.k.unwrap();
        // a smaller homometric set can pre-empt the generating one
        prop_assert!(k <= v.len());
        if k == v.len() {
            prop_assert!(classes.contains_class_of(&v));
        }
        for s in &classes.solutions {
            prop_assert!(check_solution(s, &w));
            prop_assert_eq!(s, &s.canonical());
        }
        for (i, a) in classes.solutions.iter().enumerate() {
            for b in &classes.solutions[i + 1..] {
                prop_assert!(!equivalent(a, b).unwrap());
            }
        }
    }

    #[test]
    fn trivial_ambiguities_do_not_matter(v in small_set(), shift in (-50i64..50, -50i64..50), flip in any::<bool>()) {
        let moved = v.translate(&LatticePoint::from([shift.0, shift.1]));
        let moved = if flip { moved.negate() } else { moved };
        let w = difference_set(&v).unwrap();
        prop_assert_eq!(&difference_set(&moved).unwrap(), &w);
        let a = mistr(&w, &MistrParams::default(), &mut stream(1, 3)).unwrap();
        prop_assert!(a.exact);
        prop_assert!(equivalent(&a.recovered, &moved).unwrap() || brute_force_solve(&w, 8).unwrap().len() > 1);
    }
}

#[test]
fn worked_example_class_is_found() {
    let v = PointSet::new(
        [[-2i64, 0], [-1, -1], [-1, 0], [0, 2], [1, -1], [1, 0], [2, 1]].map(LatticePoint::from),
    )
    .unwrap();
    let classes = brute_force_solve(&difference_set(&v).unwrap(), 7).unwrap();
    assert!(classes.contains_class_of(&v));
}
