use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::config::{parse_config, require, Config, TargetSection};
use crate::error::{CliError, CliResult};
use crate::output::{emit_plot_data, Artifacts, PlotKind, PlotTable};
use sclaw_core::harness::{
    certificate_run, exp_equiv_scan, fmt_f64, l1l1_distance, moment_scan, scaling_check,
    MomentTable, ScalingOutcome, ScanTable,
};
use sclaw_core::kinetic::{
    bound_reports_csv, error_term, l1_modulus, martingale_diagnostic, mollification_error,
    shift_error, GammaEnvelope, MollifierPair, MIN_MARTINGALE_PATHS,
};
use sclaw_core::model::{validate_flux, validate_noise, InequalityCheck, ScalarField, Trajectory};
use sclaw_core::rate::{rate_estimate, Control};
use sclaw_core::solvers::{coupled_pair, solve_skeleton};

#[derive(Debug, Parser)]
#[command(name = "sclaw", version, about = "Small-noise experiments for stochastic scalar conservation laws")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON configuration document.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "sclaw-out")]
    pub out: PathBuf,
    /// Overrides `sim.seed`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub quiet: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Certify the flux, noise and envelope hypotheses.
    Validate,
    /// One coupled (u, v) path pair.
    Simulate,
    /// Tail probability at `sim.epsilon`.
    Tail,
    /// Exponential-equivalence scan over `harness.ladder`, plus optional moments.
    Scan,
    /// Scaling-in-law check at `sim.epsilon`.
    Scaling,
    /// Pathwise doubling certificates and the martingale diagnostic.
    Doubling,
    /// Penalty estimate of the rate function at `rate.target`.
    Rate,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Validate => "validate",
            Command::Simulate => "simulate",
            Command::Tail => "tail",
            Command::Scan => "scan",
            Command::Scaling => "scaling",
            Command::Doubling => "doubling",
            Command::Rate => "rate",
        }
    }
}

/// Result of a command: artifacts, a console summary, and a failure to
/// report once the artifacts are on disk.
struct Outcome {
    artifacts: Artifacts,
    summary: String,
    failure: Option<CliError>,
}

impl Outcome {
    fn ok(artifacts: Artifacts, summary: String) -> Self {
        Self {
            artifacts,
            summary,
            failure: None,
        }
    }
}

/// Entry point shared by the binary and the tests; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn thread_count() -> CliResult<usize> {
    match std::env::var("SCLAW_THREADS") {
        Err(_) => Ok(0),
        Ok(s) => s
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n >= 1)
            .ok_or_else(|| CliError::Config(format!("SCLAW_THREADS must be a positive integer, got {s:?}"))),
    }
}

pub fn load_config(cli: &Cli) -> CliResult<Config> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::Config("missing flag: --config".into()))?;
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut cfg = parse_config(&text)?;
    if let Some(seed) = cli.seed {
        cfg.sim.seed = seed;
    }
    Ok(cfg)
}

fn execute(cli: &Cli) -> CliResult<()> {
    let cfg = load_config(cli)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(thread_count()?)
        .build()
        .map_err(|e| CliError::Config(format!("cannot start worker pool: {e}")))?;
    let outcome = pool.install(|| dispatch(cli.command, &cfg))?;
    outcome
        .artifacts
        .write(&cli.out, cfg.to_json(), cfg.sim.seed)?;
    if !cli.quiet {
        print!("{}", outcome.summary);
        println!("{}: wrote {} under {}", cli.command.name(), outcome.artifacts.names().collect::<Vec<_>>().join(", "), cli.out.display());
    }
    match outcome.failure {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

fn dispatch(cmd: Command, cfg: &Config) -> CliResult<Outcome> {
    match cmd {
        Command::Validate => validate(cfg),
        Command::Simulate => simulate(cfg),
        Command::Tail => tail(cfg),
        Command::Scan => scan(cfg),
        Command::Scaling => scaling(cfg),
        Command::Doubling => doubling(cfg),
        Command::Rate => rate(cfg),
    }
}

fn check_row(out: &mut String, c: &InequalityCheck) {
    let _ = writeln!(
        out,
        "{},{},{},{}",
        c.name,
        c.pass,
        fmt_f64(c.worst_ratio),
        c.samples
    );
}

fn envelope(cfg: &Config, moll: &MollifierPair) -> CliResult<GammaEnvelope> {
    let flux = cfg.flux()?;
    Ok(GammaEnvelope::validate(
        flux.q0(),
        moll,
        cfg.mollifier.envelope_range,
        cfg.mollifier.envelope_lattice,
    )?)
}

fn validate(cfg: &Config) -> CliResult<Outcome> {
    let (range, n) = (cfg.model.validation_range, cfg.model.lattice_n);
    let flux = validate_flux(&cfg.flux()?, range, n)?;
    let noise_model = cfg.noise()?;
    let noise = validate_noise(&noise_model, range, n)?;
    let env = envelope(cfg, &cfg.mollifier()?)?;
    let mut csv = String::from("check,pass,worst_ratio,samples\n");
    for c in flux.checks().into_iter().chain(noise.checks()).chain([&env.check]) {
        check_row(&mut csv, c);
    }
    let mut summary = csv.clone();
    let _ = writeln!(
        summary,
        "D0 = {}, D1 = {}, C(q0) = {}",
        fmt_f64(noise.d0),
        fmt_f64(noise.d1),
        fmt_f64(env.constant)
    );
    let mut art = Artifacts::new();
    art.add("validate.csv", csv);
    let mut outcome = Outcome::ok(art, summary);
    if !(flux.pass() && noise.pass() && env.check.pass) {
        outcome.failure = Some(CliError::Bound("a hypothesis certificate failed".into()));
    }
    Ok(outcome)
}

fn simulate(cfg: &Config) -> CliResult<Outcome> {
    let models = cfg.models()?;
    let sim = cfg.sim()?;
    let (u, v) = coupled_pair(&models.eta, &sim, &models.flux, &models.noise, cfg.sim.path)?;
    let d = l1l1_distance(&u, &v)?;
    let mut art = Artifacts::new();
    art.add("u.csv", u.to_csv());
    art.add("v.csv", v.to_csv());
    let summary = format!(
        "path,epsilon,l1l1_distance\n{},{},{}\n",
        cfg.sim.path,
        fmt_f64(sim.epsilon),
        fmt_f64(d)
    );
    art.add("simulate.csv", summary.clone());
    Ok(Outcome::ok(art, summary))
}

fn scan_table(cfg: &Config, ladder: &[f64]) -> CliResult<ScanTable> {
    let iota = require(&cfg.harness.iota, "harness.iota")?;
    let n = require(&cfg.harness.n, "harness.n")?;
    let models = cfg.models()?;
    Ok(exp_equiv_scan(ladder, iota, n, &cfg.sim()?, &models)?)
}

fn tail(cfg: &Config) -> CliResult<Outcome> {
    let table = scan_table(cfg, &[cfg.sim.epsilon])?;
    let csv = table.to_csv();
    let mut art = Artifacts::new();
    art.add("tail.csv", csv.clone());
    Ok(Outcome::ok(art, csv))
}

fn moment_plot(table: &MomentTable) -> PlotTable {
    let mut columns = vec!["epsilon".to_string()];
    for p in &table.p_list {
        columns.push(format!("u_p{}", fmt_f64(*p)));
        columns.push(format!("v_p{}", fmt_f64(*p)));
    }
    let rows = table
        .rows
        .iter()
        .map(|r| {
            let mut row = vec![r.epsilon];
            for j in 0..table.p_list.len() {
                row.push(r.u[j]);
                row.push(r.v[j]);
            }
            row
        })
        .collect();
    PlotTable { columns, rows }
}

fn scan(cfg: &Config) -> CliResult<Outcome> {
    let ladder = require(&cfg.harness.ladder, "harness.ladder")?;
    let table = scan_table(cfg, &ladder)?;
    let mut art = Artifacts::new();
    art.add("scan.csv", table.to_csv());
    art.add("schedule.csv", table.schedule_csv());
    let plot = PlotTable {
        columns: vec!["epsilon".into(), "eps_log_p".into()],
        rows: table.rows.iter().map(|r| vec![r.epsilon, r.eps_log_p]).collect(),
    };
    emit_plot_data(&mut art, &plot, PlotKind::EpsLogP)?;
    let mut summary = table.to_csv();
    let _ = writeln!(
        summary,
        "trend strictly decreasing with hits: {}",
        table.strictly_decreasing_with_hits()
    );

    if let Some(m_ladder) = &cfg.harness.moment_ladder {
        let p_list = cfg.harness.moment_p.clone().unwrap_or_else(|| vec![2.0]);
        let n = match cfg.harness.moment_n {
            Some(n) => n,
            None => require(&cfg.harness.n, "harness.n")?,
        };
        let models = cfg.models()?;
        let moments = moment_scan(m_ladder, &p_list, n, &cfg.sim()?, &models)?;
        emit_plot_data(&mut art, &moment_plot(&moments), PlotKind::MomentScan)?;
        let mut spread = String::from("p,u_max,u_ratio,v_max,v_ratio\n");
        for (j, p) in p_list.iter().enumerate() {
            let ((um, ur), (vm, vr)) = moments.spread(j);
            let _ = writeln!(
                spread,
                "{},{},{},{},{}",
                fmt_f64(*p),
                fmt_f64(um),
                fmt_f64(ur),
                fmt_f64(vm),
                fmt_f64(vr)
            );
        }
        summary.push_str(&spread);
        art.add("moment_spread.csv", spread);
    }
    Ok(Outcome::ok(art, summary))
}

fn scaling(cfg: &Config) -> CliResult<Outcome> {
    let n = require(&cfg.harness.scaling_n, "harness.scaling_n")?;
    let alpha = cfg.harness.alpha.unwrap_or(0.01);
    let models = cfg.models()?;
    let results = scaling_check(cfg.sim.epsilon, &cfg.functionals()?, n, &cfg.sim()?, &models)?;
    let mut csv = String::from("functional,method,statistic,p_value,difference,pass\n");
    for r in &results {
        let (method, stat, p, diff) = match r.outcome {
            ScalingOutcome::Ks { statistic, p_value } => ("ks", statistic, p_value, f64::NAN),
            ScalingOutcome::Exact { difference } => ("exact", f64::NAN, f64::NAN, difference),
        };
        let _ = writeln!(
            csv,
            "{},{method},{},{},{},{}",
            r.functional.name(),
            fmt_f64(stat),
            fmt_f64(p),
            fmt_f64(diff),
            r.pass(alpha)
        );
    }
    let mut art = Artifacts::new();
    art.add("scaling.csv", csv.clone());
    Ok(Outcome::ok(art, csv))
}

fn error_ladder(cfg: &Config, u: &ScalarField, v: &ScalarField) -> CliResult<PlotTable> {
    let mut rows = Vec::with_capacity(cfg.mollifier.ladder.len());
    for &[gamma, delta] in &cfg.mollifier.ladder {
        let moll = MollifierPair::new(gamma, delta)
            .map_err(|e| CliError::Config(format!("invalid value at mollifier.ladder: {e}")))?;
        rows.push(vec![
            delta,
            error_term(u, v, &moll)?.abs(),
            shift_error(u, v, &moll)?.abs(),
            mollification_error(u, v, &moll)?.abs(),
            4.0 * delta + 2.0 * l1_modulus(v, gamma),
        ]);
    }
    Ok(PlotTable {
        columns: ["delta", "abs_error_term", "abs_h1", "abs_h2", "bound"]
            .map(String::from)
            .to_vec(),
        rows,
    })
}

fn doubling(cfg: &Config) -> CliResult<Outcome> {
    let n = require(&cfg.harness.certificate_paths, "harness.certificate_paths")?;
    let models = cfg.models()?;
    let sim = cfg.sim()?;
    let moll = cfg.mollifier()?;
    let env = envelope(cfg, &moll)?;
    let run = certificate_run(n, &sim, &models, &moll, &env)?;
    let mut art = Artifacts::new();
    art.add("bounds.csv", bound_reports_csv(&run.reports));
    let violations = run.violations();
    let mut summary = format!(
        "bound reports: {} ({} violations)\n",
        run.reports.len(),
        violations
    );
    if n as usize >= MIN_MARTINGALE_PATHS {
        let m = martingale_diagnostic(&run.martingale)?;
        let text = format!(
            "n,mean_terminal,ci_lo,ci_hi,mean_covers_zero,doob_ratio,doob_ratio_se,doob_pass\n{},{},{},{},{},{},{},{}\n",
            m.n,
            fmt_f64(m.mean_terminal),
            fmt_f64(m.ci_lo),
            fmt_f64(m.ci_hi),
            m.mean_covers_zero,
            fmt_f64(m.doob_ratio),
            fmt_f64(m.doob_ratio_se),
            m.doob_pass
        );
        summary.push_str(&text);
        art.add("martingale.csv", text);
    }
    if !cfg.mollifier.ladder.is_empty() {
        let (u, v) = coupled_pair(&models.eta, &sim, &models.flux, &models.noise, 0)?;
        let table = error_ladder(cfg, u.last(), v.last())?;
        emit_plot_data(&mut art, &table, PlotKind::ErrorLadder)?;
    }
    let mut outcome = Outcome::ok(art, summary);
    if violations > 0 {
        outcome.failure = Some(CliError::Bound(format!(
            "{violations} pathwise bound violations"
        )));
    }
    Ok(outcome)
}

fn rate_target(cfg: &Config, eta: &ScalarField) -> CliResult<Trajectory> {
    let target = require(&cfg.rate.target, "rate.target")?;
    let steps = cfg.rate.steps;
    if steps == 0 {
        return Err(CliError::Config("invalid value at rate.steps: must be >= 1".into()));
    }
    match target {
        TargetSection::Drift { slope } => {
            let times: Vec<f64> = (0..=steps).map(|n| n as f64 / steps as f64).collect();
            let snaps = times
                .iter()
                .map(|&t| {
                    ScalarField::new(eta.grid(), eta.values().iter().map(|x| x + slope * t).collect())
                })
                .collect::<sclaw_core::Result<_>>()?;
            Ok(Trajectory::new(times, snaps)?)
        }
        TargetSection::Control { levels } => {
            let noise = cfg.noise()?;
            if levels.len() != noise.len() {
                return Err(CliError::Config(format!(
                    "invalid value at rate.target.levels: {} levels for {} noise modes",
                    levels.len(),
                    noise.len()
                )));
            }
            Ok(solve_skeleton(eta, &Control::constant(levels.len(), 1, &levels), &noise, steps)?)
        }
    }
}

fn rate(cfg: &Config) -> CliResult<Outcome> {
    let eta = cfg.eta()?;
    let noise = cfg.noise()?;
    let target = rate_target(cfg, &eta)?;
    let res = rate_estimate(&target, &eta, &noise, cfg.rate.bins, &cfg.rate.lambda_ladder, &cfg.opt()?)?;
    let mut art = Artifacts::new();
    let report = res.report();
    art.add("rate.txt", report.clone());
    art.add("control.csv", res.control_csv());
    let summary = report.split("\n\n").next().unwrap_or("").to_string() + "\n";
    let mut outcome = Outcome::ok(art, summary);
    if !res.feasible {
        outcome.failure = Some(CliError::Infeasible {
            residual: res.residual,
        });
    }
    Ok(outcome)
}
