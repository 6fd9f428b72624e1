//! End-to-end behaviour through the public API.

use mistr::format::{parse_point_set, write_point_set};
use mistr::harness::{records_to_csv, run_experiment, ExperimentConfig};
use mistr::lattice::{difference_set, equivalent, LatticePoint, PointSet};
use mistr::projection::{select_decorrelated_directions, Direction};
use mistr::rng::stream;
use mistr::scene::{generate, SceneModel, SceneParams};
use mistr::search::{mistr, mistr_with_directions, MistrParams};

fn example() -> PointSet {
    PointSet::new([[-2i64, 0], [-1, -2], [-1, 0], [0, 2], [1, -1], [1, 0], [2, 1]].map(LatticePoint::from)).unwrap()
}

#[test]
fn worked_example_with_consistent_directions() {
    let dirs: Vec<Direction> = [[0.911, 0.413], [0.974, -0.228], [0.0266, 0.9996]]
        .iter()
        .map(|z| Direction::new(z.to_vec()).unwrap())
        .collect();
    let w = difference_set(&example()).unwrap();
    let r = mistr_with_directions(&w, &dirs, &MistrParams::with_projections(3)).unwrap();
    assert!(r.exact && !r.refined);
    assert_eq!(r.depth_used, 3);
    assert_eq!(r.stats.nodes_explored, 2);
    assert!(equivalent(&r.recovered, &example()).unwrap());
}

#[test]
fn sampled_directions_reproduce_the_solver() {
    // the solver draws directions in the same order as the standalone sampler
    let w = difference_set(&example()).unwrap();
    let r = mistr(&w, &MistrParams::default(), &mut stream(8, 3)).unwrap();
    let dirs = select_decorrelated_directions(r.depth_used, 2, &mut stream(8, 3)).unwrap();
    let again = mistr_with_directions(&w, &dirs, &MistrParams::default()).unwrap();
    assert_eq!(again.recovered, r.recovered);
    assert_eq!(again.stats.counters(), r.stats.counters());
}

#[test]
fn gaussian_scenes_recovered_in_three_dimensions() {
    let params = SceneParams::new(SceneModel::Gaussian, 60, 40.0, 3);
    for seed in 0..20 {
        let v = generate(&params, &mut stream(seed, 0)).unwrap();
        let text = write_point_set(&v);
        assert_eq!(parse_point_set(&text).unwrap(), v);
        let r = mistr(&difference_set(&v).unwrap(), &MistrParams::default(), &mut stream(seed, 3)).unwrap();
        assert!(r.exact, "seed {seed}");
        assert!(equivalent(&r.recovered, &v).unwrap());
    }
}

#[test]
fn experiment_csv_is_byte_identical() {
    let cfg = ExperimentConfig::parse("name = det\nexperiment = recovery-prob\nd = 2\nn = 40\ns = 10, 20\nprojections = 2, 30\ntrials = 6\nseed = 3\n").unwrap();
    let a = records_to_csv(&run_experiment(&cfg).unwrap().records);
    let b = records_to_csv(&run_experiment(&cfg).unwrap().records);
    assert_eq!(a, b);
    assert_eq!(a.lines().count(), 1 + 2 * 2 * 6);
}

#[test]
fn noiseless_equivalence_implies_exact() {
    let cfg = ExperimentConfig::parse("experiment = collab-depth\ntheta = 0.45\ns = 40\ntrials = 20\n").unwrap();
    for r in run_experiment(&cfg).unwrap().records {
        assert!(!r.equivalent || r.exact);
    }
}
