//! Command line front end: configuration, seeded experiment runs, CSV/JSON output.

pub mod config;
mod output;

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;

use crate::ensemble::{column_stats, map_paths, squared_norm};
use crate::error::{Error, Result};
use crate::integrator::galerkin::GalerkinSpec;
use crate::integrator::{build_heat_model, integrate, integrate_observed};
use crate::model::{check_conditions, presets, SdeModel};
use crate::noise::{JumpMeasureSpec, MarkSampler, NoiseRealization};
use crate::pullback::{bounded_solution, model_horizon, second_moment_curve, PullbackSettings};
use crate::recurrence::profile::RecurrenceClass;
use crate::recurrence::{almost_periods, distributional_almost_period_test, shift_coupling_gap, DistributionalSettings, ScanSettings};
use crate::seed::derive_seed;
use crate::stability::{fit_decay_rate, gap_experiment, ultimate_bound_check};
use config::{ExperimentConfig, RecurrenceConfig, RunConfig, StabilityConfig};
pub use output::{Output, Summary};

#[derive(Debug, Parser)]
#[command(name = "levy-recur", version, about = "Recurrent solutions of Lévy-driven semilinear SDEs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Experiment configuration (TOML).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Master seed; overrides run.seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads for path ensembles.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Output directory; overrides output.dir.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate hypotheses, thresholds and constants.
    Check(Common),
    /// Sample paths and second moments from run.y0.
    Simulate(Common),
    /// Bounded solution by pullback and its second-moment curve.
    Bounded(Common),
    /// Almost-period scan and distributional recurrence test.
    Recurrence(Common),
    /// Same-noise gap curve, decay fit and ultimate bound.
    Stability(Common),
    /// Scalar equation with quasi-periodic, Levitan, stationary and almost automorphic coefficients.
    Example61(Common),
    /// Stochastic heat equation on (0,1), spectral Galerkin truncation.
    Example62(Common),
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::Check(c)
            | Command::Simulate(c)
            | Command::Bounded(c)
            | Command::Recurrence(c)
            | Command::Stability(c)
            | Command::Example61(c)
            | Command::Example62(c) => c,
        }
    }
}

/// Parses arguments, runs the command and returns the process exit status.
pub fn main_entry() -> i32 {
    let cli = Cli::parse();
    match execute(&cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(command: &Command) -> Result<i32> {
    let common = command.common();
    let cfg = match &common.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::empty(),
    };
    let dir = common
        .out
        .clone()
        .or_else(|| cfg.output.dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("results"));
    let out = Output::new(dir, &cfg.output.formats)?;
    let run = || -> Result<i32> {
        match command {
            Command::Check(_) => run_check(&cfg.model()?, &out, "check"),
            Command::Simulate(_) => run_simulate(&cfg.model()?, &with_seed(cfg.run()?, common.seed), &out),
            Command::Bounded(_) => run_bounded(&cfg.model()?, &with_seed(cfg.run()?, common.seed), &out, "bounded"),
            Command::Recurrence(_) => {
                let rc = cfg.recurrence.as_ref().ok_or_else(|| missing("recurrence"))?;
                run_recurrence(&cfg.model()?, &with_seed(cfg.run()?, common.seed), rc, &out, "recurrence")
            }
            Command::Stability(_) => {
                let sc = cfg.stability.as_ref().ok_or_else(|| missing("stability"))?;
                run_stability(&cfg.model()?, &with_seed(cfg.run()?, common.seed), sc, &out, "stability")
            }
            Command::Example61(_) => run_example61(&cfg, common.seed, &out),
            Command::Example62(_) => run_example62(&cfg, common.seed, &out),
        }
    };
    match common.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::input(format!("thread pool: {e}")))?
            .install(run),
        None => run(),
    }
}

fn missing(section: &str) -> Error {
    Error::Config { path: section.into(), msg: "missing section".into() }
}

fn with_seed(run: &RunConfig, seed: Option<u64>) -> RunConfig {
    let mut r = run.clone();
    if let Some(s) = seed {
        r.seed = s;
    }
    r
}

fn settings(run: &RunConfig) -> PullbackSettings {
    PullbackSettings::new(run.tol, run.step)
}

pub fn run_check(model: &SdeModel, out: &Output, name: &str) -> Result<i32> {
    let report = check_conditions(model);
    let mut s = Summary::new();
    let src = "model::check_conditions";
    for (key, c) in report.checks() {
        s.add(&format!("{key}_pass"), c.pass, src);
        s.add(&format!("{key}_slack"), c.slack, src);
    }
    let lp = &report.lipschitz;
    s.add("lipschitz_f", lp.f, src);
    s.add("lipschitz_g", lp.g, src);
    s.add("lipschitz_F_2", lp.small_jump_2, src);
    s.add("lipschitz_G_2", lp.large_jump_2, src);
    s.add("probe_max_ratio_2", lp.probe_max_2, src);
    s.add("K", model.semigroup.k, "model.semigroup");
    s.add("omega", model.semigroup.omega, "model.semigroup");
    s.add("L", model.lipschitz_l, "model");
    s.add("A0", model.a0, "model");
    s.add("b", model.b(), "model.jumps.large_rate");
    s.add("p", model.moment_p, "model");
    let c = model.constants()?;
    let src = "model::TheoremConstants";
    s.add("c_p", c.c_p, src);
    s.add("d_p", c.d_p, src);
    s.add("kunita_alpha", c.alpha_kunita, src);
    s.add("theta_2", c.theta_2, src);
    s.add("theta_p", c.theta_p, src);
    s.add("theta_limit_2plus", c.theta_limit_2plus, src);
    s.add("r", c.radius_r, src);
    s.add("compat_c", c.compat_c, src);
    s.add("compat_alpha", c.compat_alpha, src);
    s.add("stability_margin", c.stability_margin, src);
    let pass = report.all_pass();
    s.add("all_pass", pass, src);
    out.json(&format!("{name}.json"), &s)?;
    Ok(if pass { 0 } else { 3 })
}

pub fn run_simulate(model: &SdeModel, run: &RunConfig, out: &Output) -> Result<i32> {
    let y0 = run.y0.clone().unwrap_or_else(|| vec![0.0; model.dim()]);
    let grid = run.grid();
    let window = (run.t0, run.t1);
    let noise = NoiseRealization::sample(&model.wiener, &model.jumps, window, run.step, derive_seed(run.seed, 0))?;
    let path = integrate(model, &noise, run.t0, run.t1, &y0, run.step)?;
    out.csv("path.csv", &path.to_csv(8))?;
    out.csv("noise.csv", &noise.to_csv())?;
    let rows = map_paths(run.n_paths, run.seed, |_, s| {
        let n = NoiseRealization::sample(&model.wiener, &model.jumps, window, run.step, s)?;
        let xs = integrate_observed(model, &n, run.t0, &y0, run.step, &grid)?;
        Ok(xs.iter().map(|x| squared_norm(x)).collect::<Vec<f64>>())
    })?;
    let m = column_stats(&rows);
    out.csv("moments.csv", &output::curve_csv("t,second_moment,se", &grid, &m))?;
    let mut s = Summary::new();
    s.add("n_paths", run.n_paths, "run");
    s.add("seed", run.seed, "run");
    s.add("final_second_moment", m.last().map(|x| x.mean), "ensemble::column_stats");
    s.add("final_second_moment_se", m.last().map(|x| x.se), "ensemble::column_stats");
    out.json("simulate.json", &s)?;
    Ok(0)
}

pub fn run_bounded(model: &SdeModel, run: &RunConfig, out: &Output, name: &str) -> Result<i32> {
    let set = settings(run);
    let grid = run.grid();
    let horizon = model_horizon(model, run.tol)?;
    let path = bounded_solution(model, (run.t0, run.t1), &set, derive_seed(run.seed, 0))?;
    out.csv(&format!("{name}_path.csv"), &path.to_csv(8))?;
    let curve = second_moment_curve(model, &grid, &set, run.n_paths, run.seed)?;
    out.csv(&format!("{name}_moments.csv"), &output::curve_csv("t,second_moment,se", &grid, &curve))?;
    let r = model.constants()?.radius_r;
    let mut s = Summary::new();
    s.add("T_pull", horizon, "pullback::pullback_horizon");
    s.add("tol", run.tol, "run");
    s.add("stability_margin", model.margin(), "model::stability_margin");
    s.add("r", r, "model::compute_radius");
    let worst = curve.iter().map(|m| m.mean - 3.0 * m.se).fold(f64::NEG_INFINITY, f64::max);
    let within = r.map(|r| curve.iter().all(|m| m.mean <= r * r + 3.0 * m.se));
    s.add("max_second_moment_minus_3se", worst, "pullback::second_moment_curve");
    s.add("within_ball", within, "pullback::second_moment_curve");
    out.json(&format!("{name}.json"), &s)?;
    Ok(0)
}

pub fn run_recurrence(model: &SdeModel, run: &RunConfig, rc: &RecurrenceConfig, out: &Output, name: &str) -> Result<i32> {
    let profiles: Vec<_> = model.profiles().into_iter().filter(|p| p.class() <= RecurrenceClass::AlmostPeriodic).collect();
    let scan = ScanSettings {
        epsilon: rc.epsilon,
        scan_window: rc.scan_window,
        tau_step: rc.tau_step,
        sup_horizon: rc.sup_horizon,
        t_step: rc.t_step,
    };
    let report = almost_periods(&profiles, &scan)?;
    out.json(&format!("{name}_scan.json"), &report)?;
    let tau = match rc.tau {
        Some(t) => t,
        None => report
            .candidate_taus
            .first()
            .map(|c| c.0)
            .ok_or_else(|| Error::InsufficientData("no ε-almost period in the scan window".into()))?,
    };
    let set = DistributionalSettings {
        n_paths: run.n_paths,
        n_bootstrap: rc.n_bootstrap,
        n_observed: rc.n_observed,
        pullback: settings(run),
    };
    let d = distributional_almost_period_test(model, tau, &run.grid(), &set, run.seed)?;
    let mut csv = String::from("t,beta,bootstrap_err,bootstrap_sd\n");
    for i in 0..d.times.len() {
        csv.push_str(&format!("{:.17e},{:.17e},{:.17e},{:.17e}\n", d.times[i], d.beta[i], d.bootstrap_error[i], d.bootstrap_sd[i]));
    }
    out.csv(&format!("{name}_beta.csv"), &csv)?;
    // β(law ξ(t), law ξ(t+τ)) ≤ E|ξ^τ(t) − ξ(t)| ≤ √(coupling bound); None when (L) fails
    let coupling = match shift_coupling_gap(model, tau, &run.grid(), run.n_paths, &settings(run), derive_seed(run.seed, 2)) {
        Ok(c) => Some(c),
        Err(Error::Threshold(_)) => None,
        Err(e) => return Err(e),
    };
    let excess = coupling.as_ref().map(|c| {
        d.beta
            .iter()
            .zip(&d.bootstrap_error)
            .map(|(b, f)| b - c.theoretical_bound.sqrt() - 3.0 * f)
            .fold(f64::NEG_INFINITY, f64::max)
    });
    let mut s = Summary::new();
    s.add("epsilon", rc.epsilon, "recurrence::almost_periods");
    s.add("n_almost_periods", report.candidate_taus.len(), "recurrence::almost_periods");
    s.add("max_gap", report.max_gap, "recurrence::almost_periods");
    s.add("relatively_dense", report.relatively_dense, "recurrence::almost_periods");
    s.add("tau", tau, "recurrence::almost_periods");
    s.add("max_beta", d.max_beta, "recurrence::distributional_almost_period_test");
    s.add("max_ratio_to_bootstrap", d.max_ratio, "recurrence::distributional_almost_period_test");
    s.add("within_3_bootstrap", d.max_ratio <= 3.0, "recurrence::distributional_almost_period_test");
    s.add("coupling_sup_gap", coupling.as_ref().map(|c| c.measured_sup_gap), "recurrence::shift_coupling_gap");
    s.add("coupling_bound", coupling.as_ref().map(|c| c.theoretical_bound), "model::compat_gap_bound");
    s.add("beta_threshold_excess", excess, "recurrence::shift_coupling_gap");
    s.add("beta_below_threshold", excess.map(|e| e <= 0.0), "recurrence::shift_coupling_gap");
    out.json(&format!("{name}.json"), &s)?;
    Ok(0)
}

pub fn run_stability(model: &SdeModel, run: &RunConfig, sc: &StabilityConfig, out: &Output, name: &str) -> Result<i32> {
    let set = settings(run);
    let curve = gap_experiment(model, &sc.y0a, &sc.y0b, sc.horizon, sc.n_points, run.n_paths, &set, run.seed)?;
    out.csv(&format!("{name}_gap.csv"), &curve.to_csv())?;
    let margin = model.margin();
    let k2 = model.semigroup.k.powi(2);
    let g0 = curve.gap[0].mean;
    let bound_ok = curve
        .times
        .iter()
        .zip(&curve.gap)
        .all(|(t, g)| g.mean <= 5.0 * k2 * g0 * (-margin * t).exp() + 3.0 * g.se);
    let fit = fit_decay_rate(&curve.times, &curve.gap)?;
    let ub = ultimate_bound_check(model, sc.horizon, run.n_paths, &sc.y0a, &set, derive_seed(run.seed, 1))?;
    let mut s = Summary::new();
    s.add("stability_margin", margin, "model::stability_margin");
    s.add("gap_bound_holds", bound_ok, "stability::gap_experiment");
    s.add("fitted_rate", fit.rate, "stability::fit_decay_rate");
    s.add("fitted_rate_se", fit.rate_se, "stability::fit_decay_rate");
    s.add("fit_r_squared", fit.r_squared, "stability::fit_decay_rate");
    s.add("rate_at_least_margin", fit.rate >= margin - 2.0 * fit.rate_se, "stability::fit_decay_rate");
    s.add("tail_second_moment", ub.tail_second_moment, "stability::ultimate_bound_check");
    s.add("r_plus_1", ub.r_plus_1, "stability::ultimate_bound_check");
    s.add("ultimate_bound_pass", ub.pass, "stability::ultimate_bound_check");
    out.json(&format!("{name}.json"), &s)?;
    Ok(0)
}

fn preset_run(cfg: &ExperimentConfig, seed: Option<u64>, n_paths: usize, t1: f64, step: f64) -> RunConfig {
    let run = cfg.run.clone().unwrap_or(RunConfig {
        t0: 0.0,
        t1,
        step,
        n_paths,
        seed: 42,
        tol: 1e-3,
        y0: None,
        n_points: 41,
    });
    with_seed(&run, seed)
}

fn example_scan(cfg: &ExperimentConfig) -> RecurrenceConfig {
    cfg.recurrence.clone().unwrap_or(RecurrenceConfig {
        epsilon: 0.05,
        scan_window: 100.0,
        tau_step: 1e-3,
        sup_horizon: 30.0,
        t_step: 0.05,
        n_bootstrap: 20,
        tau: None,
        n_observed: 1,
    })
}

pub fn run_example61(cfg: &ExperimentConfig, seed: Option<u64>, out: &Output) -> Result<i32> {
    let b = cfg.preset.b.unwrap_or(1.0);
    let small = cfg.preset.small_rate.unwrap_or(1.0);
    if b > 1.0 {
        return Err(Error::threshold(format!("b = {b} exceeds 1; the large-jump moment condition fails")));
    }
    let zero_jumps = cfg.preset.zero_jumps.unwrap_or(false);
    let tune = |mut m: SdeModel| {
        if zero_jumps {
            m.jumps.small_rate = 0.0;
            m.jumps.large_rate = 0.0;
        }
        m
    };
    let model = tune(presets::example61(small, b));
    let check = run_check(&model, out, "check")?;
    // the equation as written has the zero solution; the pipeline adds forcing
    let forced = tune(presets::example61_forced(small, b));
    let run = preset_run(cfg, seed, 500, 10.0, 1e-2);
    run_bounded(&forced, &run, out, "bounded")?;
    run_recurrence(&forced, &run, &example_scan(cfg), out, "recurrence")?;
    let sc = cfg.stability.clone().unwrap_or(StabilityConfig { y0a: vec![10.0], y0b: vec![0.0], horizon: 10.0, n_points: 101 });
    run_stability(&forced, &run, &sc, out, "stability")?;
    Ok(check)
}

pub fn heat_jumps(b: f64, small_rate: f64, n_modes: usize) -> JumpMeasureSpec {
    let weights: Vec<f64> = (1..=n_modes).map(|k| 1.0 / (k * k) as f64).collect();
    JumpMeasureSpec {
        small_rate,
        small_mark: MarkSampler::FiniteRank {
            mode_weights: weights.clone(),
            radius: Box::new(MarkSampler::UniformShell { lo: 0.2, hi: 1.0, symmetric: true }),
        },
        truncation_delta: 0.2,
        large_rate: b,
        large_mark: MarkSampler::FiniteRank {
            mode_weights: weights,
            radius: Box::new(MarkSampler::UniformShell { lo: 1.0, hi: 1.5, symmetric: true }),
        },
    }
}

pub fn run_example62(cfg: &ExperimentConfig, seed: Option<u64>, out: &Output) -> Result<i32> {
    let p = &cfg.preset;
    let n = p.n_modes.unwrap_or(8);
    let spec = GalerkinSpec { n_modes: n, collocation_points: p.collocation_points.unwrap_or(4 * n) };
    let mut jumps = heat_jumps(p.b.unwrap_or(0.5), p.small_rate.unwrap_or(0.5), n);
    if p.zero_jumps.unwrap_or(false) {
        jumps.small_rate = 0.0;
        jumps.large_rate = 0.0;
    }
    let model = build_heat_model(spec, p.q_scale.unwrap_or(0.01), p.q_decay.unwrap_or(2.0), jumps)?;
    let check = run_check(&model, out, "check")?;
    let run = preset_run(cfg, seed, 200, 2.0, 1e-3);
    run_bounded(&model, &run, out, "bounded")?;
    run_recurrence(&model, &run, &example_scan(cfg), out, "recurrence")?;
    let mut y0a = vec![0.0; n];
    y0a[0] = 1.0;
    let sc = cfg.stability.clone().unwrap_or(StabilityConfig { y0a, y0b: vec![0.0; n], horizon: 1.0, n_points: 51 });
    run_stability(&model, &run, &sc, out, "stability")?;
    Ok(check)
}
