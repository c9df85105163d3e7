use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::fbf::write_field;
use super::generate::{generate_data, DataFamily, DataSpec};
use crate::error::{Error, Result};
use crate::operators::{gaussian_kernel, kernel_physical, poisson_kernel_2d, KernelOptions, MultiplierSpec, PointLattice};
use crate::scaling::{
    check_besov_embedding, check_besov_maximality, check_heat_extension_equivalence, check_norm_criticality, check_solution_covariance,
    test_family, RatioSweep,
};
use crate::solver::{estimate_constants_sweep, Solver, SolverConfig, MIN_PROBES};
use crate::spaces::{holder_check, parabolic_morrey_norm, NormReport, SupOptions};

type ClosedForm = fn(&[f64], f64) -> f64;

/// Pipelines the runner knows.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Solve,
    VerifyKernel,
    VerifyScaling,
    VerifyNorms,
    VerifyEquivalence,
    EstimateConstants,
}

fn default_kernel_times() -> Vec<f64> {
    vec![0.5, 1.0, 2.0]
}

/// Physical-space kernel evaluation parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KernelRun {
    pub rho: f64,
    #[serde(default = "default_kernel_times")]
    pub times: Vec<f64>,
    pub points: usize,
    pub spacing: f64,
}

impl Default for KernelRun {
    fn default() -> Self {
        Self {
            rho: 0.0,
            times: default_kernel_times(),
            points: 64,
            spacing: 0.125,
        }
    }
}

fn default_data() -> DataSpec {
    DataSpec::new(DataFamily::GaussianBump, 1e-3).with_forces(1e-3, 1e-3)
}

/// One experiment: a command plus the solver fields at the top level.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    #[serde(flatten)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default = "default_data")]
    pub data: DataSpec,
    #[serde(default = "two")]
    pub lambda: f64,
    #[serde(default = "twenty")]
    pub probes: usize,
    #[serde(default = "twenty")]
    pub family_size: usize,
    #[serde(default)]
    pub kernel: KernelRun,
    /// Second exponent of the parabolic space in the equivalence sweep.
    #[serde(default = "seven")]
    pub equivalence_q: f64,
    #[serde(default = "one")]
    pub besov_beta: f64,
    #[serde(default = "one_and_quarter")]
    pub embedding_p: f64,
    #[serde(default = "three_and_half")]
    pub maximality_q: f64,
}

fn one() -> f64 {
    1.0
}
fn one_and_quarter() -> f64 {
    1.25
}
fn two() -> f64 {
    2.0
}
fn seven() -> f64 {
    7.0
}
fn three_and_half() -> f64 {
    3.5
}
fn twenty() -> usize {
    20
}

impl RunConfig {
    pub fn new(command: Command, solver: SolverConfig) -> Self {
        Self {
            command,
            solver,
            seed: 0,
            out: None,
            data: default_data(),
            lambda: 2.0,
            probes: 20,
            family_size: 20,
            kernel: KernelRun::default(),
            equivalence_q: 7.0,
            besov_beta: 1.0,
            embedding_p: 1.25,
            maximality_q: 3.5,
        }
    }

    /// Checks everything the chosen pipeline depends on.
    pub fn validate(&self) -> Result<()> {
        match self.command {
            Command::VerifyKernel => {
                let k = &self.kernel;
                if !(1.0..=2.0).contains(&self.solver.alpha) {
                    return Err(Error::InvalidParameter(format!(
                        "fractional order {} outside [1, 2]",
                        self.solver.alpha
                    )));
                }
                if k.times.is_empty() || k.times.iter().any(|t| !(*t > 0.0)) {
                    return Err(Error::InvalidParameter("kernel times must be positive".into()));
                }
                PointLattice::new(self.solver.dim, k.points, k.spacing)?;
                Ok(())
            }
            _ => {
                self.solver.validate()?;
                if self.command == Command::EstimateConstants && self.probes < MIN_PROBES {
                    return Err(Error::InvalidParameter(format!("need at least {MIN_PROBES} probes")));
                }
                if self.family_size == 0 {
                    return Err(Error::InvalidParameter("empty test family".into()));
                }
                Ok(())
            }
        }
    }
}

/// Exit status and a one-line summary.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub code: i32,
    pub message: String,
}

impl RunOutcome {
    fn checks(passed: bool, message: String) -> Self {
        Self {
            code: if passed { 0 } else { 1 },
            message,
        }
    }
}

/// Reads a JSON config and runs it; `out` and `seed` override the file.
pub fn run_from_path(path: &Path, out: Option<PathBuf>, seed: Option<u64>) -> RunOutcome {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            return RunOutcome {
                code: 2,
                message: format!("cannot read config {}: {e}", path.display()),
            }
        }
    };
    let mut cfg: RunConfig = match serde_json::from_str(&text) {
        Ok(c) => c,
        Err(e) => {
            return RunOutcome {
                code: 2,
                message: format!("invalid config: {e}"),
            }
        }
    };
    if let Some(o) = out {
        cfg.out = Some(o);
    }
    if let Some(s) = seed {
        cfg.seed = s;
    }
    run(&cfg)
}

/// Executes the configured pipeline: 0 when every check passes, 1 on a failed
/// check or a failed solve, 2 on an invalid configuration.
pub fn run(cfg: &RunConfig) -> RunOutcome {
    if let Err(e) = cfg.validate() {
        return RunOutcome {
            code: 2,
            message: format!("invalid config: {e}"),
        };
    }
    let out = cfg.out.clone().unwrap_or_else(|| PathBuf::from("fracbq-out"));
    if let Err(e) = fs::create_dir_all(&out) {
        return RunOutcome {
            code: 2,
            message: format!("cannot create {}: {e}", out.display()),
        };
    }
    let result = match cfg.command {
        Command::Solve => solve(cfg, &out),
        Command::VerifyKernel => verify_kernel(cfg, &out),
        Command::VerifyScaling => verify_scaling(cfg, &out),
        Command::VerifyNorms => verify_norms(cfg, &out),
        Command::VerifyEquivalence => verify_equivalence(cfg, &out),
        Command::EstimateConstants => constants(cfg, &out),
    };
    match result {
        Ok(o) => o,
        Err(e @ (Error::IndexConstraint(_) | Error::InvalidParameter(_) | Error::InvalidGrid(_))) => RunOutcome {
            code: 2,
            message: format!("invalid config: {e}"),
        },
        Err(e) => RunOutcome {
            code: 1,
            message: e.to_string(),
        },
    }
}

fn write_json(path: PathBuf, value: &serde_json::Value) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(value)?)?;
    Ok(())
}

fn problem(cfg: &RunConfig) -> Result<(Solver, crate::solver::ProblemData)> {
    let solver = Solver::new(cfg.solver.clone())?;
    let data = generate_data(&cfg.data, cfg.seed, solver.grid(), solver.times())?;
    Ok((solver, data))
}

fn solve(cfg: &RunConfig, out: &Path) -> Result<RunOutcome> {
    let (solver, data) = problem(cfg)?;
    write_field(&data.u0, out.join("u0.fbf"))?;
    write_field(&data.theta0, out.join("theta0.fbf"))?;
    let (state, diag) = solver.picard(&data)?;
    let snaps = out.join("snapshots");
    fs::create_dir_all(&snaps)?;
    for i in 0..state.times().len() {
        write_field(state.velocity.snapshot(i), snaps.join(format!("velocity_{i:04}.fbf")))?;
        write_field(state.temperature.snapshot(i), snaps.join(format!("temperature_{i:04}.fbf")))?;
    }
    let mut w = csv::Writer::from_path(out.join("residuals.csv"))?;
    w.write_record(["iteration", "residual"])?;
    for (i, r) in diag.residuals.iter().enumerate() {
        w.write_record([(i + 1).to_string(), r.to_string()])?;
    }
    w.flush()?;
    write_json(
        out.join("diagnostics.json"),
        &json!({ "config": cfg, "times": state.times(), "diagnostics": diag }),
    )?;
    let msg = format!(
        "converged in {} iterations, ‖U‖_E = {:.3e} (3δ = {:.3e}), contraction {:.3}",
        diag.iterations,
        diag.final_norm,
        3.0 * cfg.solver.smallness,
        diag.contraction
    );
    Ok(RunOutcome::checks(diag.bound_holds, msg))
}

fn verify_kernel(cfg: &RunConfig, out: &Path) -> Result<RunOutcome> {
    let alpha = cfg.solver.alpha;
    let dim = cfg.solver.dim;
    let k = &cfg.kernel;
    let spec = MultiplierSpec::radial_power(k.rho);
    let lattice = PointLattice::new(dim, k.points, k.spacing)?;
    let opts = KernelOptions::default();
    let closed_form: Option<(&str, ClosedForm)> = if k.rho == 0.0 && alpha == 2.0 {
        Some(("gaussian", gaussian_kernel))
    } else if k.rho == 0.0 && alpha == 1.0 && dim == 2 {
        Some(("poisson", poisson_kernel_2d))
    } else {
        None
    };
    let mut w = csv::Writer::from_path(out.join("kernel_oracle.csv"))?;
    let mut header = vec!["t".to_string()];
    header.extend((1..=dim).map(|a| format!("x{a}")));
    header.extend(["value", "oracle", "abs_error"].map(String::from));
    w.write_record(&header)?;
    let mut worst = 0.0f64;
    for (i, &t) in k.times.iter().enumerate() {
        let sample = kernel_physical(&spec, alpha, t, &lattice, opts)?;
        sample.write_csv(fs::File::create(out.join(format!("kernel_{i}.csv")))?)?;
        let oracle: Vec<f64> = match closed_form {
            Some((_, f)) => sample.points.iter().map(|x| f(x, t)).collect(),
            None => {
                // Self-similar profile: K_t(x) = t^{-(d+ρ)/α} K_1(t^{-1/α} x).
                let c = t.powf(-1.0 / alpha);
                let unit = kernel_physical(&spec, alpha, 1.0, &lattice.scaled(c), opts)?;
                let amp = t.powf(-(dim as f64 + k.rho) / alpha);
                unit.values.iter().map(|v| amp * v).collect()
            }
        };
        let peak = oracle.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for ((x, v), o) in sample.points.iter().zip(&sample.values).zip(&oracle) {
            worst = worst.max((v - o).abs() / peak);
            let mut rec = vec![t.to_string()];
            rec.extend(x.iter().map(|c| c.to_string()));
            rec.extend([v.to_string(), o.to_string(), (v - o).abs().to_string()]);
            w.write_record(&rec)?;
        }
    }
    w.flush()?;
    let oracle_name = closed_form.map_or("self-similarity", |c| c.0);
    let pass = worst < 1e-6;
    write_json(
        out.join("kernel_report.json"),
        &json!({ "config": cfg, "oracle": oracle_name, "max_relative_error": worst, "pass": pass }),
    )?;
    Ok(RunOutcome::checks(
        pass,
        format!("kernel vs {oracle_name}: max relative error {worst:.3e}"),
    ))
}

fn verify_scaling(cfg: &RunConfig, out: &Path) -> Result<RunOutcome> {
    let (solver, data) = problem(cfg)?;
    let covariance = check_solution_covariance(&data, cfg.lambda, &cfg.solver)?;
    let (state, _) = solver.picard(&data)?;
    let criticality = check_norm_criticality(&data, &state, cfg.lambda, &cfg.solver)?;
    let pass = covariance.pass && criticality.pass;
    write_json(
        out.join("scaling_report.json"),
        &json!({ "config": cfg, "covariance": covariance, "criticality": criticality, "pass": pass }),
    )?;
    Ok(RunOutcome::checks(
        pass,
        format!(
            "λ = {}: covariance deviation {:.3e}, largest norm deviation {:.3e}",
            cfg.lambda,
            covariance.max_deviation(),
            criticality.max_deviation()
        ),
    ))
}

fn verify_norms(cfg: &RunConfig, out: &Path) -> Result<RunOutcome> {
    let (solver, data) = problem(cfg)?;
    let (state, _) = solver.picard(&data)?;
    let fam = *solver.family();
    let a = fam.alpha;
    let n = solver.grid().n();
    let opts = cfg.solver.norm_options();
    let velocity = NormReport::with_refinement(
        "velocity parabolic Morrey",
        &[("p", fam.p), ("q", fam.velocity_resolution_q()), ("alpha", a)],
        n,
        &opts,
        |o| parabolic_morrey_norm(&state.velocity, fam.p, fam.velocity_resolution_q(), a, o),
    )?;
    let temperature = NormReport::with_refinement(
        "temperature parabolic Morrey",
        &[("p", fam.temperature_p), ("q", fam.temperature_resolution_q()), ("alpha", a)],
        n,
        &opts,
        |o| parabolic_morrey_norm(&state.temperature, fam.temperature_p, fam.temperature_resolution_q(), a, o),
    )?;
    let holder = holder_check(
        &state.velocity,
        &state.temperature,
        (fam.p, fam.velocity_resolution_q()),
        (fam.temperature_p, fam.temperature_resolution_q()),
        a,
        &SupOptions::parabolic(),
    )?;
    let pass = holder.ratio.is_none_or(|r| r <= 1.0 + 1e-9);
    write_json(
        out.join("norms.json"),
        &json!({ "config": cfg, "norms": [velocity, temperature], "holder": holder, "pass": pass }),
    )?;
    Ok(RunOutcome::checks(pass, format!("Hölder ratio {:?}", holder.ratio)))
}

fn write_sweep(sweep: &RatioSweep, path: PathBuf) -> Result<()> {
    sweep.write_csv(fs::File::create(path)?)
}

fn verify_equivalence(cfg: &RunConfig, out: &Path) -> Result<RunOutcome> {
    let s = &cfg.solver;
    let grid = s.grid()?;
    let family = test_family(&grid, cfg.family_size, cfg.seed);
    let equiv = check_heat_extension_equivalence(&family, s.alpha, s.p, cfg.equivalence_q)?;
    let embedding = check_besov_embedding(&family, cfg.besov_beta, s.alpha, cfg.embedding_p)?;
    let maximality = check_besov_maximality(&family, s.alpha, cfg.maximality_q)?;
    write_sweep(&equiv, out.join("equivalence.csv"))?;
    write_sweep(&embedding, out.join("embedding.csv"))?;
    write_sweep(&maximality, out.join("maximality.csv"))?;
    let one_sided = 1.0 / equiv.min;
    let pass = one_sided <= 1.05
        && equiv.spread() < 20.0
        && embedding.all_finite()
        && embedding.spread() < 10.0
        && maximality.all_finite()
        && maximality.spread() < 10.0;
    write_json(
        out.join("equivalence.json"),
        &json!({
            "config": cfg,
            "equivalence": { "min": equiv.min, "max": equiv.max, "spread": equiv.spread(), "one_sided": one_sided },
            "embedding": { "min": embedding.min, "max": embedding.max, "spread": embedding.spread() },
            "maximality": { "min": maximality.min, "max": maximality.max, "spread": maximality.spread() },
            "pass": pass,
        }),
    )?;
    Ok(RunOutcome::checks(
        pass,
        format!(
            "equivalence spread {:.2} (one-sided {:.4}), embedding spread {:.2}, maximality spread {:.2}",
            equiv.spread(),
            one_sided,
            embedding.spread(),
            maximality.spread()
        ),
    ))
}

fn constants(cfg: &RunConfig, out: &Path) -> Result<RunOutcome> {
    let mut weights = vec![1.0, 4.0, 16.0, cfg.solver.weight];
    weights.dedup();
    let mut sweep = estimate_constants_sweep(&cfg.solver, &weights, cfg.probes, cfg.seed)?;
    let main = if sweep.len() == 4 {
        sweep.pop().expect("four weights")
    } else {
        sweep[2].clone()
    };
    let ratios: Vec<f64> = sweep.windows(2).map(|p| p[0].linear / p[1].linear).collect();
    let pass = main.linear < 1.0 / 3.0 && ratios.iter().all(|r| (3.5..=4.5).contains(r));
    write_json(
        out.join("constants.json"),
        &json!({ "config": cfg, "estimate": main, "weight_sweep": sweep, "ratios": ratios, "pass": pass }),
    )?;
    Ok(RunOutcome::checks(
        pass,
        format!("C_L = {:.3e}, C_B = {:.3e}, weight ratios {:?}", main.linear, main.bilinear, ratios),
    ))
}
