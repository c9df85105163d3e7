//! Mild solutions by Picard iteration on the Duhamel formulation, with an
//! exponential time-differencing integrator as an independent reference.

mod constants;
mod duhamel;
mod etd;
mod picard;
mod terms;

use serde::{Deserialize, Serialize};

pub use constants::{estimate_constants, estimate_constants_sweep, ConstantEstimate, MIN_PROBES};
pub use duhamel::duhamel;
pub use etd::etd_reference_solve;
pub use picard::{picard_solve, residual, PicardDiagnostics};

use crate::error::{Error, Result};
use crate::spaces::{derived_indices, graded_times, Geometry, IndexFamily, SupOptions, Trajectory};
use crate::spectral::{divergence, make_grid, Field, ScalarField, SpectralGrid, VectorField};

fn default_grading() -> f64 {
    3.0
}

fn default_sign() -> f64 {
    1.0
}

fn default_true() -> bool {
    true
}

fn default_geometry() -> Geometry {
    Geometry::Box
}

/// Solver parameters; field names follow the run-config JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub alpha: f64,
    #[serde(rename = "d")]
    pub dim: usize,
    pub n: usize,
    #[serde(rename = "L")]
    pub length: f64,
    #[serde(rename = "T")]
    pub t_end: f64,
    /// Number of time nodes, including `t = 0`.
    #[serde(rename = "nt")]
    pub nodes: usize,
    pub p: f64,
    pub gamma: f64,
    pub delta_force: f64,
    /// Weight of the temperature part of the composite norm.
    #[serde(rename = "weight_c")]
    pub weight: f64,
    #[serde(rename = "smallness_delta")]
    pub smallness: f64,
    pub tol: f64,
    pub max_iter: usize,
    /// Geometric grading of the time steps (0 gives a uniform grid).
    #[serde(default = "default_grading")]
    pub grading: f64,
    /// Sign in front of `div(θu)` in the temperature equation.
    #[serde(default = "default_sign")]
    pub temperature_sign: f64,
    /// Keep the buoyancy coupling `P(θ e_d)`.
    #[serde(default = "default_true")]
    pub coupling: bool,
    /// Keep the quadratic terms.
    #[serde(default = "default_true")]
    pub nonlinear: bool,
    #[serde(default = "default_geometry")]
    pub norm_geometry: Geometry,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            alpha: 1.5,
            dim: 2,
            n: 64,
            length: 2.0 * std::f64::consts::PI,
            t_end: 1.0,
            nodes: 64,
            p: 6.0,
            gamma: 0.5,
            delta_force: 0.5,
            weight: 16.0,
            smallness: 0.05,
            tol: 1e-10,
            max_iter: 60,
            grading: default_grading(),
            temperature_sign: 1.0,
            coupling: true,
            nonlinear: true,
            norm_geometry: Geometry::Box,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<IndexFamily> {
        let family = derived_indices(self.alpha, self.dim, self.p, self.gamma, self.delta_force)?;
        if !(self.weight >= 1.0) {
            return Err(Error::InvalidParameter(format!("norm weight {} must be >= 1", self.weight)));
        }
        if !(self.smallness > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "smallness budget {} must be positive",
                self.smallness
            )));
        }
        if !(self.tol > 0.0) || self.max_iter == 0 {
            return Err(Error::InvalidParameter("tolerance must be positive and max_iter at least 1".into()));
        }
        if self.temperature_sign.abs() != 1.0 {
            return Err(Error::InvalidParameter("temperature_sign must be +1 or -1".into()));
        }
        make_grid(self.dim, self.n, self.length)?;
        self.times()?;
        Ok(family)
    }

    pub fn grid(&self) -> Result<SpectralGrid> {
        make_grid(self.dim, self.n, self.length)
    }

    pub fn times(&self) -> Result<Vec<f64>> {
        if self.nodes < 2 {
            return Err(Error::InvalidParameter("need at least two time nodes".into()));
        }
        graded_times(self.t_end, self.nodes - 1, self.grading)
    }

    /// Same configuration with every time step halved.
    pub fn refined_in_time(&self) -> Self {
        Self {
            nodes: 2 * (self.nodes - 1) + 1,
            ..self.clone()
        }
    }

    pub fn norm_options(&self) -> SupOptions {
        SupOptions::parabolic().with_geometry(self.norm_geometry)
    }
}

/// Velocity and temperature trajectories on a shared time grid.
#[derive(Clone, Debug)]
pub struct BoussinesqState {
    pub velocity: Trajectory<VectorField>,
    pub temperature: Trajectory<ScalarField>,
}

impl BoussinesqState {
    pub fn new(velocity: Trajectory<VectorField>, temperature: Trajectory<ScalarField>) -> Result<Self> {
        velocity.ensure_compatible(&temperature)?;
        Ok(Self { velocity, temperature })
    }

    pub fn zeros(grid: &SpectralGrid, times: &[f64]) -> Result<Self> {
        Ok(Self {
            velocity: Trajectory::from_fn(times.to_vec(), |_| VectorField::zeros(grid))?,
            temperature: Trajectory::from_fn(times.to_vec(), |_| ScalarField::zeros(grid))?,
        })
    }

    pub fn times(&self) -> &[f64] {
        self.velocity.times()
    }

    pub fn grid(&self) -> &SpectralGrid {
        self.velocity.grid()
    }

    /// `a * self + b * other`.
    pub fn combine(&self, a: f64, other: &Self, b: f64) -> Result<Self> {
        Ok(Self {
            velocity: self.velocity.combine(a, &other.velocity, b)?,
            temperature: self.temperature.combine(a, &other.temperature, b)?,
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.combine(1.0, other, 1.0)
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            velocity: self.velocity.scaled(c),
            temperature: self.temperature.scaled(c),
        }
    }

    /// Largest `|div u|` over all velocity snapshots.
    pub fn max_divergence(&self) -> f64 {
        self.velocity.snapshots().iter().fold(0.0f64, |m, u| m.max(divergence(u).max_abs()))
    }

    /// Discrete `L^2` norm of the final snapshot (velocity and temperature together).
    pub fn final_l2(&self) -> f64 {
        (self.velocity.last().l2_norm().powi(2) + self.temperature.last().l2_norm().powi(2)).sqrt()
    }
}

/// Initial data and forces; forces are sampled on the solver's time grid.
#[derive(Clone, Debug)]
pub struct ProblemData {
    pub u0: VectorField,
    pub theta0: ScalarField,
    pub force: Option<Trajectory<VectorField>>,
    pub source: Option<Trajectory<ScalarField>>,
}

impl ProblemData {
    pub fn unforced(u0: VectorField, theta0: ScalarField) -> Self {
        Self {
            u0,
            theta0,
            force: None,
            source: None,
        }
    }

    pub fn zeros(grid: &SpectralGrid) -> Self {
        Self::unforced(VectorField::zeros(grid), ScalarField::zeros(grid))
    }

    /// Multiplies every datum by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            u0: self.u0.scale(c),
            theta0: self.theta0.scale(c),
            force: self.force.as_ref().map(|f| f.scaled(c)),
            source: self.source.as_ref().map(|g| g.scaled(c)),
        }
    }

    pub(crate) fn check(&self, grid: &SpectralGrid, times: &[f64]) -> Result<()> {
        grid.ensure_same(self.u0.grid())?;
        grid.ensure_same(self.theta0.grid())?;
        let same_times = |t: &[f64]| t.len() == times.len() && t.iter().zip(times).all(|(a, b)| (a - b).abs() <= 1e-12 * b.abs().max(1.0));
        if let Some(f) = &self.force {
            grid.ensure_same(f.grid())?;
            if !same_times(f.times()) {
                return Err(Error::GridMismatch);
            }
        }
        if let Some(g) = &self.source {
            grid.ensure_same(g.grid())?;
            if !same_times(g.times()) {
                return Err(Error::GridMismatch);
            }
        }
        let div = divergence(&self.u0).max_abs();
        if div > 1e-10 * self.u0.max_abs().max(1.0) {
            return Err(Error::NotDivergenceFree(div));
        }
        Ok(())
    }
}

/// Solver bound to one configuration: grid, time nodes and exponent family.
pub struct Solver {
    config: SolverConfig,
    grid: SpectralGrid,
    times: Vec<f64>,
    family: IndexFamily,
    rates: Vec<f64>,
}

impl Solver {
    pub fn new(config: SolverConfig) -> Result<Self> {
        let family = config.validate()?;
        let grid = config.grid()?;
        let times = config.times()?;
        let rates = duhamel::decay_rates(&grid, config.alpha);
        Ok(Self {
            config,
            grid,
            times,
            family,
            rates,
        })
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    pub fn grid(&self) -> &SpectralGrid {
        &self.grid
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn family(&self) -> &IndexFamily {
        &self.family
    }

    /// Composite norm `‖u‖_{M^{p,(d+α)/(α-1)}_α} + c ‖θ‖_{M^{p_θ,(d+α)/(2α-1)}_α}`.
    pub fn e_norm(&self, state: &BoussinesqState) -> Result<f64> {
        let (u, th) = self.e_norm_parts(state)?;
        Ok(u + self.config.weight * th)
    }

    /// Velocity and (unweighted) temperature parts of the composite norm.
    pub fn e_norm_parts(&self, state: &BoussinesqState) -> Result<(f64, f64)> {
        let f = &self.family;
        let o = self.config.norm_options();
        let u = crate::spaces::parabolic_morrey_norm(&state.velocity, f.p, f.velocity_resolution_q(), f.alpha, &o)?;
        let th = crate::spaces::parabolic_morrey_norm(&state.temperature, f.temperature_p, f.temperature_resolution_q(), f.alpha, &o)?;
        Ok((u, th))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_json_names() {
        let cfg = SolverConfig::default();
        let v: serde_json::Value = serde_json::to_value(&cfg).unwrap();
        for key in [
            "alpha",
            "d",
            "n",
            "L",
            "T",
            "nt",
            "p",
            "gamma",
            "delta_force",
            "weight_c",
            "smallness_delta",
            "tol",
            "max_iter",
        ] {
            assert!(v.get(key).is_some(), "{key}");
        }
        let minimal = r#"{"alpha":1.5,"d":2,"n":32,"L":6.283185307179586,"T":1.0,"nt":16,"p":6.0,"gamma":0.5,
            "delta_force":0.5,"weight_c":16.0,"smallness_delta":0.01,"tol":1e-10,"max_iter":40}"#;
        let back: SolverConfig = serde_json::from_str(minimal).unwrap();
        assert_eq!(back.temperature_sign, 1.0);
        assert!(back.coupling && back.nonlinear);
    }

    #[test]
    fn config_validation() {
        assert!(SolverConfig::default().validate().is_ok());
        let bad_p = SolverConfig {
            p: 5.0,
            ..SolverConfig::default()
        };
        assert!(bad_p.validate().unwrap_err().to_string().contains("(3α-2)/(α-1)"));
        assert!(SolverConfig {
            weight: 0.5,
            ..SolverConfig::default()
        }
        .validate()
        .is_err());
        assert!(SolverConfig {
            smallness: 0.0,
            ..SolverConfig::default()
        }
        .validate()
        .is_err());
        assert!(SolverConfig {
            n: 7,
            ..SolverConfig::default()
        }
        .validate()
        .is_err());
        assert!(SolverConfig {
            temperature_sign: 0.5,
            ..SolverConfig::default()
        }
        .validate()
        .is_err());
        let r = SolverConfig::default().refined_in_time();
        assert_eq!(r.nodes, 127);
    }

    #[test]
    fn data_checks() {
        let cfg = SolverConfig {
            n: 16,
            nodes: 9,
            ..SolverConfig::default()
        };
        let g = cfg.grid().unwrap();
        let t = cfg.times().unwrap();
        let mut d = ProblemData::zeros(&g);
        assert!(d.check(&g, &t).is_ok());
        d.u0 = VectorField::from_fn(&g, |x| vec![x[0].sin(), 0.0]);
        assert!(matches!(d.check(&g, &t), Err(Error::NotDivergenceFree(_))));
        let mut d = ProblemData::zeros(&g);
        d.source = Some(Trajectory::from_fn(crate::spaces::uniform_times(1.0, 8).unwrap(), |_| ScalarField::zeros(&g)).unwrap());
        assert!(matches!(d.check(&g, &t), Err(Error::GridMismatch)));
    }
}
