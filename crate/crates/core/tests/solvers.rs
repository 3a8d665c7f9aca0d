use proptest::prelude::*;
use sclaw_core::model::*;
use sclaw_core::rate::Control;
use sclaw_core::solvers::*;

fn field_strategy(cells: usize) -> impl Strategy<Value = ScalarField> {
    prop::collection::vec(-2.0f64..2.0, cells)
        .prop_map(move |v| ScalarField::new(TorusGrid::new(cells).unwrap(), v).unwrap())
}

fn stable_dt(u: &ScalarField, flux: &FluxModel) -> f64 {
    let s = flux.max_speed_on(u.min(), u.max()).max(1e-12);
    0.45 * u.grid().dx() / s
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn deterministic_step_conserves_mean(u in field_strategy(40), scale in 0.1f64..1.0) {
        let flux = FluxModel::burgers();
        let dt = stable_dt(&u, &flux) / scale;
        let next = deterministic_step(&u, &flux, scale, dt).unwrap();
        let m = u.mean();
        prop_assert!((next.mean() - m).abs() <= 1e-12 * (1.0 + m.abs()));
    }

    #[test]
    fn monotone_scheme_contracts_l1(u in field_strategy(32), v in field_strategy(32)) {
        let flux = FluxModel::burgers();
        let dt = stable_dt(&u, &flux).min(stable_dt(&v, &flux));
        let (mut a, mut b) = (u, v);
        let mut d = a.l1_distance(&b).unwrap();
        for _ in 0..40 {
            a = deterministic_step(&a, &flux, 1.0, dt).unwrap();
            b = deterministic_step(&b, &flux, 1.0, dt).unwrap();
            let next = a.l1_distance(&b).unwrap();
            prop_assert!(next <= d + 1e-10, "{next} > {d}");
            d = next;
        }
    }

    #[test]
    fn paths_are_pure_functions_of_key(seed in any::<u64>(), path in 0u64..10_000) {
        let grid = TorusGrid::new(16).unwrap();
        let eta = make_initial(InitialKind::Sine { mean: 1.0, amp: 0.3, mode: 1 }, grid).unwrap();
        let noise = NoiseModel::new(vec![NoiseMode::new(0.5, Profile::Cos(1), 1.0, 0.2)], 10.0).unwrap();
        let cfg = SimConfig::new(0.3, grid, 1.0 / 32.0).unwrap().with_seed(seed);
        let a = solve_scaled_spde(&eta, &cfg, &FluxModel::burgers(), &noise, path).unwrap();
        let b = solve_scaled_spde(&eta, &cfg, &FluxModel::burgers(), &noise, path).unwrap();
        prop_assert_eq!(a, b);
    }
}

#[test]
fn burgers_shock_moves_at_rankine_hugoniot_speed() {
    let grid = TorusGrid::new(400).unwrap();
    let x0 = 0.25;
    let mut u = make_initial(InitialKind::Riemann { u_left: 1.0, u_right: 0.0, x0 }, grid).unwrap();
    let flux = FluxModel::burgers();
    let dt = 0.45 * grid.dx();
    let steps = (0.5 / dt).ceil() as usize;
    let dt = 0.5 / steps as f64;
    for _ in 0..steps {
        u = deterministic_step(&u, &flux, 1.0, dt).unwrap();
    }
    // Right-most downward crossing of 1/2 is the shock.
    let vals = u.values();
    let i = (0..grid.cells() - 1)
        .rev()
        .find(|&i| vals[i] >= 0.5 && vals[i + 1] < 0.5)
        .unwrap();
    let x = grid.center(i) + grid.dx() * (vals[i] - 0.5) / (vals[i] - vals[i + 1]);
    assert!((x - (x0 + 0.25)).abs() <= 2.0 * grid.dx(), "shock at {x}");
}

#[test]
fn strang_and_lie_endpoints_approach_each_other() {
    let grid = TorusGrid::new(32).unwrap();
    let eta = make_initial(InitialKind::Sine { mean: 1.0, amp: 0.5, mode: 1 }, grid).unwrap();
    let noise = NoiseModel::new(vec![NoiseMode::new(0.5, Profile::Cos(1), 1.0, 0.3)], 10.0).unwrap();
    let flux = FluxModel::burgers();
    let fine = NoisePath::generate(NoiseKey::new(3, STREAM_COUPLED, 0), 1024, 1, 1.0 / 1024.0);
    let mut gaps = Vec::new();
    for factor in [8, 4, 2] {
        let path = fine.coarsen(factor);
        let cfg = SimConfig::new(0.5, grid, path.dt()).unwrap();
        let lie = solve_scaled_spde_with_path(&eta, &cfg, &flux, &noise, &path).unwrap();
        let cfg = cfg.with_splitting(Splitting::Strang);
        let strang = solve_scaled_spde_with_path(&eta, &cfg, &flux, &noise, &path).unwrap();
        gaps.push(lie.last().l1_distance(strang.last()).unwrap());
    }
    assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
}

#[test]
fn skeleton_rk4_is_fourth_order() {
    let grid = TorusGrid::new(4).unwrap();
    let eta = ScalarField::constant(grid, 1.0).unwrap();
    let noise = NoiseModel::new(vec![NoiseMode::new(1.0, Profile::Constant, 0.0, 1.0)], 10.0).unwrap();
    let h = Control::constant(1, 1, &[2.0]);
    let exact = 2.0f64.exp();
    let errs: Vec<f64> = [4, 8, 16, 32]
        .iter()
        .map(|&s| (solve_skeleton(&eta, &h, &noise, s).unwrap().last().values()[0] - exact).abs())
        .collect();
    for w in errs.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!((order - 4.0).abs() < 0.3, "{errs:?}");
    }
}

#[test]
fn silent_noise_gives_bitwise_scaling_identity() {
    let grid = TorusGrid::new(64).unwrap();
    let eta = make_initial(InitialKind::Sine { mean: 1.0, amp: 0.4, mode: 2 }, grid).unwrap();
    let flux = FluxModel::burgers();
    let silent = NoiseModel::silent();
    for eps in [1.0, 0.3, 0.05] {
        let cfg = SimConfig::new(eps, grid, 1.0 / 128.0).unwrap();
        let base = solve_base_small_time_on_stream(&eta, &cfg, &flux, &silent, STREAM_SCALING_BASE, 0).unwrap();
        let scaled = solve_scaled_endpoint_on_stream(&eta, &cfg, &flux, &silent, STREAM_SCALING_SCALED, 0).unwrap();
        assert!(base.l1_distance(&scaled).unwrap() <= 1e-12);
    }
}

#[test]
fn numerical_failures_name_path_and_step() {
    let grid = TorusGrid::new(16).unwrap();
    let eta = ScalarField::constant(grid, 1.0).unwrap();
    let noise = NoiseModel::new(vec![NoiseMode::new(1e150, Profile::Constant, 0.0, 1.0)], 10.0).unwrap();
    let cfg = SimConfig::new(1.0, grid, 1.0 / 8.0).unwrap();
    let err = solve_flux_free(&eta, &cfg, &noise, 7).unwrap_err();
    let msg = err.to_string();
    assert!(msg.contains("path 7") && msg.contains("step"), "{msg}");
}
