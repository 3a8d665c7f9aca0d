//! End-to-end acceptance run: one line per criterion, non-zero exit on any
//! failure.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use sclaw::config::{parse_config, Config};
use sclaw_core::harness::{
    certificate_run, exp_equiv_scan, moment_scan, scaling_check, Functional, Models,
    ScalingOutcome,
};
use sclaw_core::kinetic::{
    bracket_identity, doubling_functional, doubling_functional_brute_force, mollification_error,
    GammaEnvelope, MollifierPair,
};
use sclaw_core::model::{
    make_initial, FluxModel, InitialKind, NoiseMode, NoiseModel, Profile, ScalarField,
    TorusGrid, Trajectory,
};
use sclaw_core::rate::{rate_estimate, skeleton_residual, Control, OptConfig, RateValue, DEFAULT_LAMBDA_LADDER};
use sclaw_core::solvers::deterministic_step;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn reference() -> Config {
    let text = std::fs::read_to_string(root().join("configs/burgers2mode.json")).unwrap();
    parse_config(&text).unwrap()
}

fn random_field(rng: &mut StdRng, grid: TorusGrid, amp: f64) -> ScalarField {
    let v = (0..grid.cells()).map(|_| rng.random_range(-amp..amp)).collect();
    ScalarField::new(grid, v).unwrap()
}

fn entropy_shock() -> Verdict {
    let grid = TorusGrid::new(400).unwrap();
    let x0 = 0.25;
    let mut u = make_initial(InitialKind::Riemann { u_left: 1.0, u_right: 0.0, x0 }, grid).unwrap();
    let flux = FluxModel::burgers();
    let steps = (0.5 / (0.45 * grid.dx())).ceil() as usize;
    let dt = 0.5 / steps as f64;
    for _ in 0..steps {
        u = deterministic_step(&u, &flux, 1.0, dt).unwrap();
    }
    let v = u.values();
    let i = (0..v.len() - 1).rev().find(|&i| v[i] >= 0.5 && v[i + 1] < 0.5).unwrap();
    let x = grid.center(i) + grid.dx() * (v[i] - 0.5) / (v[i] - v[i + 1]);
    let err = (x - (x0 + 0.25)).abs();
    verdict(err <= 2.0 * grid.dx(), format!("shock at {x:.5}, |x - x_RH| = {err:.2e} (limit {:.2e})", 2.0 * grid.dx()))
}

fn l1_contraction() -> Verdict {
    let mut rng = StdRng::seed_from_u64(2);
    let grid = TorusGrid::new(100).unwrap();
    let flux = FluxModel::burgers();
    let mut violations = 0;
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let mut a = random_field(&mut rng, grid, 1.5);
        let mut b = random_field(&mut rng, grid, 1.5);
        let s = a.sup_norm().max(b.sup_norm());
        let steps = (0.5 / (0.45 * grid.dx() / s)).ceil() as usize;
        let dt = 0.5 / steps as f64;
        let mut d = a.l1_distance(&b).unwrap();
        for _ in 0..steps {
            a = deterministic_step(&a, &flux, 1.0, dt).unwrap();
            b = deterministic_step(&b, &flux, 1.0, dt).unwrap();
            let next = a.l1_distance(&b).unwrap();
            worst = worst.max(next - d);
            if next > d + 1e-10 {
                violations += 1;
            }
            d = next;
        }
    }
    verdict(violations == 0, format!("{violations} violations, largest increase {worst:.2e}"))
}

fn bracket() -> Verdict {
    let mut rng = StdRng::seed_from_u64(3);
    let grid = TorusGrid::new(64).unwrap();
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let u = random_field(&mut rng, grid, 2.0);
        let v = random_field(&mut rng, grid, 2.0);
        let (plus, minus) = bracket_identity(&u, &v, 1e-3).unwrap();
        let dx = grid.dx();
        let (mut dp, mut dm) = (0.0, 0.0);
        for (a, b) in u.values().iter().zip(v.values()) {
            dp += (a - b).max(0.0) * dx;
            dm += (b - a).max(0.0) * dx;
        }
        worst = worst.max((plus - dp).abs()).max((minus - dm).abs());
    }
    verdict(worst <= 2e-3, format!("max |quadrature - direct| = {worst:.2e} (limit 2e-3)"))
}

fn mollifier_bound() -> Verdict {
    let mut rng = StdRng::seed_from_u64(4);
    let moll = MollifierPair::new(0.1, 0.05).unwrap();
    let grid = TorusGrid::new(64).unwrap();
    let mut violations = 0;
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let u = random_field(&mut rng, grid, 1.5);
        let v = random_field(&mut rng, grid, 1.5);
        let h2 = mollification_error(&u, &v, &moll).unwrap().abs();
        worst = worst.max(h2 / (4.0 * moll.delta()));
        if h2 > 4.0 * moll.delta() {
            violations += 1;
        }
    }
    let small = TorusGrid::new(16).unwrap();
    let mut gap: f64 = 0.0;
    for _ in 0..20 {
        let u = random_field(&mut rng, small, 1.5);
        let v = random_field(&mut rng, small, 1.5);
        let closed = doubling_functional(&u, &v, &moll).unwrap();
        let brute = doubling_functional_brute_force(&u, &v, &moll).unwrap();
        gap = gap.max((closed - brute).abs());
    }
    verdict(
        violations == 0 && gap <= 1e-6,
        format!("{violations} violations of |H2| <= 4 delta (worst ratio {worst:.3}); closed form vs quadrature {gap:.2e}"),
    )
}

fn certificates() -> (Verdict, Verdict) {
    let cfg = reference();
    let sim = cfg.sim().unwrap().with_epsilon(0.1).unwrap();
    let models = cfg.models().unwrap();
    let moll = MollifierPair::new(0.1, 0.1).unwrap();
    let env = GammaEnvelope::validate(models.flux.q0(), &moll, cfg.mollifier.envelope_range, cfg.mollifier.envelope_lattice).unwrap();
    let run = certificate_run(50, &sim, &models, &moll, &env).unwrap();
    let summarize = |names: &[&str]| {
        let rs: Vec<_> = run.reports.iter().filter(|r| names.contains(&r.name.as_str())).collect();
        let bad = rs.iter().filter(|r| !r.pass).count();
        let worst = rs.iter().map(|r| r.lhs.abs() / r.rhs).fold(0.0, f64::max);
        (bad, worst, rs.len())
    };
    let (bj, wj, nj) = summarize(&["J1", "J2"]);
    let (bi, wi, ni) = summarize(&["I"]);
    (
        verdict(bj == 0 && nj == 100, format!("{bj}/{nj} J1/J2 violations, worst lhs/rhs {wj:.3}")),
        verdict(env.check.pass && bi == 0 && ni == 50, format!("{bi}/{ni} I violations, worst lhs/rhs {wi:.2e}, envelope C(q0) = {}", env.constant)),
    )
}

fn scaling() -> Verdict {
    let cfg = reference();
    let sim = cfg.sim().unwrap();
    let eta = cfg.eta().unwrap();

    let exact_models = Models {
        eta: eta.clone(),
        flux: FluxModel::burgers(),
        noise: NoiseModel::silent(),
    };
    let exact = scaling_check(0.1, &[Functional::Mass, Functional::L2Norm, Functional::MaxVal], 200, &sim, &exact_models).unwrap();
    let diff = exact
        .iter()
        .map(|r| match r.outcome {
            ScalingOutcome::Exact { difference } => difference,
            ScalingOutcome::Ks { .. } => f64::INFINITY,
        })
        .fold(0.0, f64::max);

    let additive = Models {
        eta,
        flux: FluxModel::zero(),
        noise: NoiseModel::new(
            vec![
                NoiseMode::new(0.5, Profile::Constant, 1.0, 0.0),
                NoiseMode::new(1.0, Profile::Cos(1), 1.0, 0.0),
            ],
            10.0,
        )
        .unwrap(),
    };
    let functionals = [Functional::Mass, Functional::L2Norm];
    let mut notes = Vec::new();
    let mut ks_pass = true;
    for f in functionals {
        let mut ok = false;
        for attempt in 0..2 {
            let s = sim.with_seed(sim.seed + attempt);
            let r = scaling_check(0.1, &[f], 2000, &s, &additive).unwrap()[0];
            let p = match r.outcome {
                ScalingOutcome::Ks { p_value, .. } => p_value,
                ScalingOutcome::Exact { .. } => f64::NAN,
            };
            notes.push(format!("{} p = {p:.3}{}", f.name(), if attempt > 0 { " (rerun)" } else { "" }));
            if p > 0.01 {
                ok = true;
                break;
            }
        }
        ks_pass &= ok;
    }
    verdict(diff <= 1e-12 && ks_pass, format!("exact branch max diff {diff:.1e}; KS {}", notes.join(", ")))
}

fn trend() -> Verdict {
    let cfg = reference();
    let table = exp_equiv_scan(&[0.5, 0.2, 0.1, 0.05], 0.05, 5000, &cfg.sim().unwrap(), &cfg.models().unwrap()).unwrap();
    let rows: Vec<String> = table
        .rows
        .iter()
        .map(|r| format!("eps {}: hits {} eps_log_p {:.4}", r.epsilon, r.estimate.hits, r.eps_log_p))
        .collect();
    verdict(table.strictly_decreasing_with_hits(), rows.join("; "))
}

fn rate_oracle() -> Verdict {
    let grid = TorusGrid::new(8).unwrap();
    let eta = ScalarField::constant(grid, 0.0).unwrap();
    let steps = 64;
    let times: Vec<f64> = (0..=steps).map(|n| n as f64 / steps as f64).collect();
    let snaps = times.iter().map(|&t| ScalarField::constant(grid, 0.7 * t).unwrap()).collect();
    let target = Trajectory::new(times, snaps).unwrap();
    let noise = NoiseModel::new(vec![NoiseMode::additive(1.0)], 10.0).unwrap();
    let opt = OptConfig::default();
    let res = rate_estimate(&target, &eta, &noise, 1, &DEFAULT_LAMBDA_LADDER, &opt).unwrap();
    let i_hat = res.i_hat.finite().unwrap_or(f64::INFINITY);

    // Brute-force oracle over constant controls.
    let (c_best, _) = (0..=2000)
        .map(|i| i as f64 * 1e-3)
        .map(|c| (c, skeleton_residual(&Control::constant(1, 1, &[c]), &eta, &target, &noise).unwrap()))
        .fold((f64::NAN, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
    let oracle = 0.5 * c_best * c_best;

    let silent = NoiseModel::new(vec![NoiseMode::additive(0.0)], 10.0).unwrap();
    let inf = rate_estimate(&target, &eta, &silent, 1, &DEFAULT_LAMBDA_LADDER, &opt).unwrap();
    let pass = (i_hat - 0.245).abs() <= 1e-3 && (oracle - 0.245).abs() <= 1e-3 && inf.i_hat == RateValue::Infinite && !inf.feasible;
    verdict(
        pass,
        format!("I_hat = {i_hat:.6} (residual {:.1e}), oracle {oracle:.6}, frozen skeleton -> {}", res.residual, inf.i_hat),
    )
}

fn moments() -> Verdict {
    let cfg = reference();
    let table = moment_scan(&[1.0, 0.5, 0.1], &[2.0], 500, &cfg.sim().unwrap(), &cfg.models().unwrap()).unwrap();
    let ((_, ru), (_, rv)) = table.spread(0);
    verdict(
        table.all_finite() && ru < 2.0 && rv < 2.0,
        format!("max/min ratio u {ru:.3}, v {rv:.3}"),
    )
}

fn determinism() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let config = root().join("configs/burgers2mode.json");
    let mut manifests = Vec::new();
    for threads in ["1", "8"] {
        let out = dir.path().join(format!("t{threads}"));
        let status = Command::new(env!("CARGO_BIN_EXE_sclaw"))
            .env("SCLAW_THREADS", threads)
            .args(["scan", "--quiet", "--config"])
            .arg(&config)
            .arg("--out")
            .arg(&out)
            .status()
            .unwrap();
        if !status.success() {
            return verdict(false, format!("scan exited with {status} at {threads} threads"));
        }
        manifests.push(std::fs::read(out.join("manifest.json")).unwrap());
        manifests.push(std::fs::read(out.join("scan.csv")).unwrap());
    }
    let same = manifests[0] == manifests[2] && manifests[1] == manifests[3];
    verdict(same, if same { "scan.csv and manifest hashes identical at 1 and 8 threads" } else { "outputs differ" })
}

fn report(id: &str, what: &str, budget: Duration, f: impl FnOnce() -> Verdict) -> bool {
    let t = Instant::now();
    let v = f();
    let took = t.elapsed();
    let in_time = took <= budget;
    let pass = v.pass && in_time;
    println!(
        "criterion {id:>2} {} {what}: {} [{:.2} s, budget {} s]",
        if pass { "PASS" } else { "FAIL" },
        v.detail,
        took.as_secs_f64(),
        budget.as_secs()
    );
    pass
}

fn main() {
    // `cargo test -- <filter>` style arguments are accepted and ignored.
    let secs = Duration::from_secs;
    let mut all = true;
    all &= report("1", "entropy shock speed", secs(1), entropy_shock);
    all &= report("2", "L1 contraction", secs(30), l1_contraction);
    all &= report("3", "bracket identity", secs(10), bracket);
    all &= report("4", "mollifier bound and closed form", secs(60), mollifier_bound);

    let t = Instant::now();
    let (j, i) = certificates();
    let took = t.elapsed();
    let in_time = took <= secs(180);
    for (id, what, v) in [("5", "pathwise J certificates", j), ("6", "pathwise I certificate", i)] {
        let pass = v.pass && in_time;
        println!(
            "criterion {id:>2} {} {what}: {} [{:.2} s shared, budget 180 s]",
            if pass { "PASS" } else { "FAIL" },
            v.detail,
            took.as_secs_f64()
        );
        all &= pass;
    }

    all &= report("7", "scaling in law", secs(120), scaling);
    all &= report("8", "exponential-equivalence trend", secs(300), trend);
    all &= report("9", "rate function oracle", secs(60), rate_oracle);
    all &= report("10", "uniform moments", secs(120), moments);
    all &= report("11", "thread-count determinism", secs(300), determinism);
    println!("acceptance: {}", if all { "all criteria passed" } else { "FAILED" });
    if !all {
        std::process::exit(1);
    }
}
