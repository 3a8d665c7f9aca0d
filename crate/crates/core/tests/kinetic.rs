use proptest::prelude::*;
use sclaw_core::kinetic::*;
use sclaw_core::model::*;

fn field(cells: usize, lo: f64, hi: f64) -> impl Strategy<Value = ScalarField> {
    prop::collection::vec(lo..hi, cells)
        .prop_map(move |v| ScalarField::new(TorusGrid::new(cells).unwrap(), v).unwrap())
}

fn pair(cells: usize) -> impl Strategy<Value = (ScalarField, ScalarField)> {
    (field(cells, -1.5, 1.5), field(cells, -1.5, 1.5))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn indicator_non_increasing(u in -3.0f64..3.0) {
        let g = XiGrid::covering(-4.0, 4.0, 1e-2).unwrap();
        let f = kinetic_indicator(u, &g);
        prop_assert!(f.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn brackets_sum_to_l1((u, v) in pair(24)) {
        let dxi = 1e-3;
        let (plus, minus) = bracket_identity(&u, &v, dxi).unwrap();
        let l1 = u.l1_distance(&v).unwrap();
        prop_assert!((plus + minus - l1).abs() <= 2.0 * dxi);
    }

    #[test]
    fn doubling_functional_non_negative_and_matches_quadrature((u, v) in pair(16)) {
        let moll = MollifierPair::new(0.1, 0.05).unwrap();
        let closed = doubling_functional(&u, &v, &moll).unwrap();
        let brute = doubling_functional_brute_force(&u, &v, &moll).unwrap();
        prop_assert!(closed >= 0.0);
        prop_assert!((closed - brute).abs() <= 1e-6, "{closed} vs {brute}");
    }

    #[test]
    fn error_term_within_mollification_envelope((u, v) in pair(40)) {
        let moll = MollifierPair::new(0.1, 0.05).unwrap();
        let e = error_term(&u, &v, &moll).unwrap();
        let bound = 4.0 * moll.delta() + 2.0 * l1_modulus(&v, moll.gamma());
        prop_assert!(e.abs() <= bound, "{e} > {bound}");
        let h2 = mollification_error(&u, &v, &moll).unwrap();
        prop_assert!(h2.abs() <= 4.0 * moll.delta());
    }
}

#[test]
fn envelope_rejects_paths_outside_its_range() {
    let grid = TorusGrid::new(16).unwrap();
    let moll = MollifierPair::new(0.1, 0.1).unwrap();
    let env = GammaEnvelope::validate(2.0, &moll, 1.0, 21).unwrap();
    let u = ScalarField::constant(grid, 3.0).unwrap();
    let traj = Trajectory::new(vec![0.0, 1.0], vec![u.clone(), u]).unwrap();
    let err = bound_check_i(&traj, &traj, &moll, 0.1, &FluxModel::burgers(), &env);
    assert!(err.is_err());
}

#[test]
fn silent_noise_gives_zero_martingale() {
    let grid = TorusGrid::new(16).unwrap();
    let moll = MollifierPair::new(0.1, 0.1).unwrap();
    let noise = NoiseModel::new(vec![NoiseMode::additive(0.0)], 10.0).unwrap();
    let u = ScalarField::constant(grid, 1.0).unwrap();
    let traj = Trajectory::new(vec![0.0, 0.5, 1.0], vec![u.clone(), u.clone(), u]).unwrap();
    let path = NoisePath::generate(NoiseKey::new(0, 0, 0), 2, 1, 0.5);
    let s = martingale_sample(&traj, &traj, &path, &moll, 0.1, &noise).unwrap();
    assert_eq!((s.terminal, s.sup_square, s.quadratic_variation), (0.0, 0.0, 0.0));
}
