//! Rescaling maps on nested lattices and the invariance, equivalence and
//! embedding checks built on the norm estimators.

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::io::{random_profile, DataFamily};
use crate::par;
use crate::solver::{BoussinesqState, ProblemData, Solver, SolverConfig};
use crate::spaces::{
    besov_norm, heat_extension, parabolic_morrey_norm, sobolev_morrey_norm, tlm_norm, IndexFamily, LogTimeGrid, SupOptions, Trajectory,
};
use crate::spectral::{Field, ScalarField, SpectralGrid};

/// Dilations that map the lattice onto a nested lattice without interpolation.
pub fn check_lambda(lambda: f64) -> Result<()> {
    if lambda == 1.0 || lambda == 2.0 || lambda == 0.5 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "dilation {lambda} is not lattice-compatible; use 2 or 1/2"
        )))
    }
}

/// The grid carrying `x -> f(λx)`: same node count, box length `L/λ`.
pub fn rescaled_grid(grid: &SpectralGrid, lambda: f64) -> Result<SpectralGrid> {
    check_lambda(lambda)?;
    SpectralGrid::new(grid.dim(), grid.n(), grid.length() / lambda)
}

/// `amp · f(λ ·)` as an exact relabeling of samples.
pub fn rescale_field<F: Field>(f: &F, lambda: f64, amp: f64) -> Result<F> {
    let grid = rescaled_grid(f.grid(), lambda)?;
    let comps = f
        .scalar_components()
        .into_iter()
        .map(|c| ScalarField::new(grid.clone(), c.samples().iter().map(|v| amp * v).collect()))
        .collect::<Result<Vec<_>>>()?;
    F::from_scalar_components(comps)
}

/// `amp · ψ(λ^α t, λ x)`: times divided by `λ^α`.
pub fn rescale_trajectory<F: Field>(psi: &Trajectory<F>, lambda: f64, alpha: f64, amp: f64) -> Result<Trajectory<F>> {
    let c = lambda.powf(alpha);
    let times = psi.times().iter().map(|t| t / c).collect();
    let snaps = psi
        .snapshots()
        .iter()
        .map(|s| rescale_field(s, lambda, amp))
        .collect::<Result<Vec<_>>>()?;
    Trajectory::new(times, snaps)
}

/// `u_λ = λ^{α-1} u(λ^α t, λx)`, `θ_λ = λ^{2α-1} θ(λ^α t, λx)`.
pub fn rescale_state(state: &BoussinesqState, lambda: f64, alpha: f64) -> Result<BoussinesqState> {
    BoussinesqState::new(
        rescale_trajectory(&state.velocity, lambda, alpha, lambda.powf(alpha - 1.0))?,
        rescale_trajectory(&state.temperature, lambda, alpha, lambda.powf(2.0 * alpha - 1.0))?,
    )
}

/// Data weights: `u₀` by `λ^{α-1}`, `θ₀` and `f` by `λ^{2α-1}`, `g` by `λ^{3α-1}`.
pub fn rescale_data(data: &ProblemData, lambda: f64, alpha: f64) -> Result<ProblemData> {
    Ok(ProblemData {
        u0: rescale_field(&data.u0, lambda, lambda.powf(alpha - 1.0))?,
        theta0: rescale_field(&data.theta0, lambda, lambda.powf(2.0 * alpha - 1.0))?,
        force: data
            .force
            .as_ref()
            .map(|f| rescale_trajectory(f, lambda, alpha, lambda.powf(2.0 * alpha - 1.0)))
            .transpose()?,
        source: data
            .source
            .as_ref()
            .map(|g| rescale_trajectory(g, lambda, alpha, lambda.powf(3.0 * alpha - 1.0)))
            .transpose()?,
    })
}

/// Solver configuration on the dilated box and time horizon.
pub fn rescale_config(config: &SolverConfig, lambda: f64) -> Result<SolverConfig> {
    check_lambda(lambda)?;
    Ok(SolverConfig {
        length: config.length / lambda,
        t_end: config.t_end / lambda.powf(config.alpha),
        ..config.clone()
    })
}

/// One compared quantity.
#[derive(Clone, Debug, Serialize)]
pub struct ScalingEntry {
    pub quantity: String,
    pub before: f64,
    pub after: f64,
    pub deviation: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ScalingReport {
    pub lambda: f64,
    pub tolerance: f64,
    pub entries: Vec<ScalingEntry>,
    pub pass: bool,
}

impl ScalingReport {
    fn new(lambda: f64, tolerance: f64) -> Self {
        Self {
            lambda,
            tolerance,
            entries: Vec::new(),
            pass: true,
        }
    }

    fn push(&mut self, quantity: &str, before: f64, after: f64, deviation: f64) {
        let pass = deviation < self.tolerance || deviation == 0.0;
        self.pass &= pass;
        self.entries.push(ScalingEntry {
            quantity: quantity.into(),
            before,
            after,
            deviation,
            pass,
        });
    }

    fn push_pair(&mut self, quantity: &str, before: f64, after: f64) {
        self.push(quantity, before, after, relative_gap(before, after));
    }

    pub fn max_deviation(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, e| m.max(e.deviation))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

fn relative_gap(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

/// Solves with the original and with the rescaled data and compares the
/// rescaled solution against the solution of the rescaled problem.
pub fn check_solution_covariance(data: &ProblemData, lambda: f64, config: &SolverConfig) -> Result<ScalingReport> {
    let tolerance = 1e-3;
    let mut report = ScalingReport::new(lambda, tolerance);
    let base = Solver::new(config.clone())?;
    let (sol, _) = base.picard(data)?;
    let scaled = Solver::new(rescale_config(config, lambda)?)?;
    let (sol_scaled, _) = scaled.picard(&rescale_data(data, lambda, config.alpha)?)?;
    let mapped = rescale_state(&sol, lambda, config.alpha)?;
    let diff = scaled.e_norm(&mapped.combine(1.0, &sol_scaled, -1.0)?)?;
    let before = scaled.e_norm(&mapped)?;
    let after = scaled.e_norm(&sol_scaled)?;
    let dev = if diff == 0.0 { 0.0 } else { diff / before.max(after) };
    report.push("solution (composite norm)", before, after, dev);
    let l2 = mapped.combine(1.0, &sol_scaled, -1.0)?.final_l2();
    let dev_l2 = if l2 == 0.0 { 0.0 } else { l2 / sol_scaled.final_l2() };
    report.push("solution at final time (L2)", mapped.final_l2(), sol_scaled.final_l2(), dev_l2);
    Ok(report)
}

/// The eight scale-invariant quantities of one problem instance.
#[derive(Clone, Debug, Serialize)]
pub struct CriticalNorms {
    pub initial_velocity: f64,
    pub initial_temperature: f64,
    pub force: f64,
    pub source: f64,
    pub velocity: f64,
    pub temperature: f64,
    pub data: f64,
    pub solution: f64,
}

impl CriticalNorms {
    fn entries(&self) -> [(&'static str, f64); 8] {
        [
            ("initial velocity (thermic)", self.initial_velocity),
            ("initial temperature (thermic)", self.initial_temperature),
            ("velocity force (Sobolev-Morrey)", self.force),
            ("temperature source (Sobolev-Morrey)", self.source),
            ("velocity (parabolic Morrey)", self.velocity),
            ("temperature (parabolic Morrey)", self.temperature),
            ("data (composite)", self.data),
            ("solution (composite)", self.solution),
        ]
    }
}

/// Evaluates every critical norm of `(data, state)` for the exponent family.
pub fn critical_norms(
    data: &ProblemData,
    state: &BoussinesqState,
    family: &IndexFamily,
    weight: f64,
    opts: &SupOptions,
) -> Result<CriticalNorms> {
    let a = family.alpha;
    let log_times = LogTimeGrid::default();
    let spatial = SupOptions::spatial();
    let initial_velocity = tlm_norm(&data.u0, family.velocity_sigma(), family.p, family.q, a, &log_times, &spatial)?.value;
    let initial_temperature = tlm_norm(
        &data.theta0,
        family.temperature_sigma(),
        family.temperature_p,
        family.temperature_q,
        a,
        &log_times,
        &spatial,
    )?
    .value;
    let force = match &data.force {
        Some(f) => sobolev_morrey_norm(f, family.gamma, family.force_p, family.force_q, a, opts)?,
        None => 0.0,
    };
    let source = match &data.source {
        Some(g) => sobolev_morrey_norm(g, family.delta, family.source_p, family.source_q, a, opts)?,
        None => 0.0,
    };
    let velocity = parabolic_morrey_norm(&state.velocity, family.p, family.velocity_resolution_q(), a, opts)?;
    let temperature = parabolic_morrey_norm(&state.temperature, family.temperature_p, family.temperature_resolution_q(), a, opts)?;
    Ok(CriticalNorms {
        initial_velocity,
        initial_temperature,
        force,
        source,
        velocity,
        temperature,
        data: initial_velocity + weight * initial_temperature + force + weight * source,
        solution: velocity + weight * temperature,
    })
}

/// Compares every critical norm before and after the dilation `λ`.
pub fn check_norm_criticality(data: &ProblemData, state: &BoussinesqState, lambda: f64, config: &SolverConfig) -> Result<ScalingReport> {
    check_lambda(lambda)?;
    let family = config.validate()?;
    let opts = config.norm_options();
    let before = critical_norms(data, state, &family, config.weight, &opts)?;
    let after = critical_norms(
        &rescale_data(data, lambda, config.alpha)?,
        &rescale_state(state, lambda, config.alpha)?,
        &family,
        config.weight,
        &opts,
    )?;
    let mut report = ScalingReport::new(lambda, 0.03);
    for ((name, b), (_, a)) in before.entries().into_iter().zip(after.entries()) {
        report.push_pair(name, b, a);
    }
    Ok(report)
}

/// One member of a ratio sweep.
#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub id: usize,
    pub family: String,
    pub numerator: f64,
    pub denominator: f64,
    pub ratio: Option<f64>,
}

/// Ratio statistics over a family of test functions.
#[derive(Clone, Debug, Serialize)]
pub struct RatioSweep {
    pub name: String,
    pub rows: Vec<SweepRow>,
    pub min: f64,
    pub max: f64,
    pub skipped: usize,
}

impl RatioSweep {
    fn from_rows(name: &str, rows: Vec<SweepRow>) -> Self {
        let ratios: Vec<f64> = rows.iter().filter_map(|r| r.ratio).collect();
        let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
        let max = ratios.iter().copied().fold(0.0, f64::max);
        let skipped = rows.len() - ratios.len();
        Self {
            name: name.into(),
            rows,
            min,
            max,
            skipped,
        }
    }

    /// `max / min` over the finite ratios.
    pub fn spread(&self) -> f64 {
        self.max / self.min
    }

    pub fn all_finite(&self) -> bool {
        self.rows.iter().filter_map(|r| r.ratio).all(f64::is_finite)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["id", "family", "numerator", "denominator", "ratio"])?;
        for r in &self.rows {
            let ratio = r.ratio.map(|v| v.to_string()).unwrap_or_default();
            w.write_record([
                r.id.to_string(),
                r.family.clone(),
                r.numerator.to_string(),
                r.denominator.to_string(),
                ratio,
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Seeded mean-free test functions of unit sup norm cycling through the data families.
pub fn test_family(grid: &SpectralGrid, count: usize, seed: u64) -> Vec<(DataFamily, ScalarField)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let fam = DataFamily::ALL[i % DataFamily::ALL.len()];
            let max_mode = 1 + (i / DataFamily::ALL.len()) % 4;
            let f = random_profile(fam, grid, max_mode, &mut rng);
            let mean = f.mean();
            let f = f.zip_with(&f, |x, _| x - mean).expect("same grid");
            let m = f.max_abs();
            (fam, if m > 0.0 { f.scale(1.0 / m) } else { f })
        })
        .collect()
}

/// Heat extension on `{0} ∪` the thermic log grid.
pub fn heat_extension_on_log_grid(f: &ScalarField, alpha: f64, times: &LogTimeGrid) -> Result<Trajectory<ScalarField>> {
    let mut t = vec![0.0];
    t.extend(times.nodes());
    heat_extension(f, alpha, t)
}

fn sweep<E>(name: &str, family: &[(DataFamily, ScalarField)], eval: E) -> Result<RatioSweep>
where
    E: Fn(&ScalarField) -> Result<(f64, f64)> + Sync + Send,
{
    let rows = par::map_range(family.len(), |i| -> Result<SweepRow> {
        let (num, den) = eval(&family[i].1)?;
        let ratio = if den > 0.0 && num > 0.0 { Some(num / den) } else { None };
        Ok(SweepRow {
            id: i,
            family: family[i].0.to_string(),
            numerator: num,
            denominator: den,
            ratio,
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(RatioSweep::from_rows(name, rows))
}

/// Two-sided comparison of the thermic norm with the parabolic Morrey norm
/// of the heat extension; ratios are `thermic / parabolic`. Both use balls.
pub fn check_heat_extension_equivalence(family: &[(DataFamily, ScalarField)], alpha: f64, p: f64, q: f64) -> Result<RatioSweep> {
    let dim = family.first().map(|f| f.1.grid().dim()).unwrap_or(2);
    let thermic_q = crate::spaces::thermic_partner(alpha, dim, p, q)?;
    let times = LogTimeGrid::default();
    let spatial = SupOptions::spatial();
    let parabolic = SupOptions::parabolic().with_geometry(crate::spaces::Geometry::Ball);
    sweep("thermic/parabolic", family, |f| {
        let thermic = tlm_norm(f, -alpha / p, p, thermic_q, alpha, &times, &spatial)?.value;
        let ext = heat_extension_on_log_grid(f, alpha, &times)?;
        Ok((thermic, parabolic_morrey_norm(&ext, p, q, alpha, &parabolic)?))
    })
}

/// Ratios `‖e^{-tΛ} f‖_{M^{p,q}_α} / ‖f‖_{Besov}` with `q = (d+α)/β`, `1 ≤ p < α/β`.
pub fn check_besov_embedding(family: &[(DataFamily, ScalarField)], beta: f64, alpha: f64, p: f64) -> Result<RatioSweep> {
    if !(p >= 1.0 && p < alpha / beta) {
        return Err(Error::IndexConstraint(format!("need 1 <= p < α/β = {}, got p = {p}", alpha / beta)));
    }
    let dim = family.first().map(|f| f.1.grid().dim()).unwrap_or(2) as f64;
    let q = (dim + alpha) / beta;
    let times = LogTimeGrid::default();
    let opts = SupOptions::parabolic();
    sweep("parabolic/besov", family, |f| {
        let ext = heat_extension_on_log_grid(f, alpha, &times)?;
        Ok((
            parabolic_morrey_norm(&ext, p, q, alpha, &opts)?,
            besov_norm(f, beta, alpha, &times)?,
        ))
    })
}

/// Ratios `‖f‖_{Besov} / ‖e^{-tΛ} f‖_{M^{1,q}_α}` (boxes) with `β = (d+α)/q`.
pub fn check_besov_maximality(family: &[(DataFamily, ScalarField)], alpha: f64, q: f64) -> Result<RatioSweep> {
    let dim = family.first().map(|f| f.1.grid().dim()).unwrap_or(2) as f64;
    if !(q >= 1.0) {
        return Err(Error::IndexConstraint(format!("need q >= 1, got {q}")));
    }
    let beta = (dim + alpha) / q;
    let times = LogTimeGrid::default();
    let opts = SupOptions::parabolic();
    sweep("besov/parabolic", family, |f| {
        let ext = heat_extension_on_log_grid(f, alpha, &times)?;
        Ok((
            besov_norm(f, beta, alpha, &times)?,
            parabolic_morrey_norm(&ext, 1.0, q, alpha, &opts)?,
        ))
    })
}
