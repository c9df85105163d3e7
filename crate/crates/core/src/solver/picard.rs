use serde::Serialize;

use super::{BoussinesqState, ProblemData, Solver, SolverConfig};
use crate::error::{Error, Result};

/// Record of one Picard run.
#[derive(Clone, Debug, Serialize)]
pub struct PicardDiagnostics {
    /// Composite norm of successive iterate differences.
    pub residuals: Vec<f64>,
    pub iterations: usize,
    /// Largest ratio of consecutive differences over the tail of the run.
    pub contraction: f64,
    /// `‖L(U)‖_E / ‖U‖_E` at the computed solution.
    pub linear_constant: f64,
    /// `‖B(U,U)‖_E / ‖U‖_E²` at the computed solution.
    pub bilinear_constant: f64,
    /// `‖U₀ + F‖_E`.
    pub data_norm: f64,
    pub final_norm: f64,
    /// `‖U - (U₀ + F + L(U) + B(U,U))‖_E`.
    pub final_residual: f64,
    pub within_budget: bool,
    /// `‖U‖_E ≤ 3δ`.
    pub bound_holds: bool,
    /// `9 C_B δ + C_L`: predicted contraction when below one.
    pub predicted_contraction: f64,
}

const DIVERGENCE_STREAK: usize = 3;

impl Solver {
    /// `U₀ + F`.
    pub fn data_term(&self, data: &ProblemData) -> Result<BoussinesqState> {
        self.initial_term(data)?.add(&self.force_term(data)?)
    }

    /// `U₀ + F + L(U) + B(U,U)` for a precomputed `U₀ + F`.
    pub fn picard_map(&self, base: &BoussinesqState, u: &BoussinesqState) -> Result<BoussinesqState> {
        base.add(&self.apply_linear(u)?)?.add(&self.apply_bilinear(u, u)?)
    }

    /// Fixed point of `U = U₀ + F + L(U) + B(U,U)` by successive substitution.
    pub fn picard(&self, data: &ProblemData) -> Result<(BoussinesqState, PicardDiagnostics)> {
        let base = self.data_term(data)?;
        let data_norm = self.e_norm(&base)?;
        let mut u = base.clone();
        let mut residuals = Vec::new();
        let mut streak = 0;
        let mut converged = data_norm == 0.0;
        if converged {
            residuals.push(0.0);
        }
        while !converged && residuals.len() < self.config.max_iter {
            let next = self.picard_map(&base, &u)?;
            let diff = self.e_norm(&next.combine(1.0, &u, -1.0)?)?;
            if !diff.is_finite() {
                residuals.push(diff);
                return Err(self.diverged(residuals));
            }
            if let Some(&prev) = residuals.last() {
                streak = if diff >= prev { streak + 1 } else { 0 };
            }
            residuals.push(diff);
            u = next;
            converged = diff < self.config.tol;
            if streak >= DIVERGENCE_STREAK {
                return Err(self.diverged(residuals));
            }
        }
        if !converged {
            return Err(self.diverged(residuals));
        }
        let contraction = contraction_factor(&residuals);
        let final_norm = self.e_norm(&u)?;
        let (linear_constant, bilinear_constant) = if final_norm > 0.0 {
            let l = self.e_norm(&self.apply_linear(&u)?)? / final_norm;
            let b = self.e_norm(&self.apply_bilinear(&u, &u)?)? / (final_norm * final_norm);
            (l, b)
        } else {
            (0.0, 0.0)
        };
        let final_residual = self.residual(&u, data)?;
        let delta = self.config.smallness;
        let diag = PicardDiagnostics {
            iterations: residuals.len(),
            residuals,
            contraction,
            linear_constant,
            bilinear_constant,
            data_norm,
            final_norm,
            final_residual,
            within_budget: data_norm <= delta,
            bound_holds: final_norm <= 3.0 * delta,
            predicted_contraction: 9.0 * bilinear_constant * delta + linear_constant,
        };
        Ok((u, diag))
    }

    /// `‖U - (U₀ + F + L(U) + B(U,U))‖_E`.
    pub fn residual(&self, state: &BoussinesqState, data: &ProblemData) -> Result<f64> {
        let base = self.data_term(data)?;
        let image = self.picard_map(&base, state)?;
        self.e_norm(&state.combine(1.0, &image, -1.0)?)
    }

    fn diverged(&self, residuals: Vec<f64>) -> Error {
        Error::NonConvergence {
            contraction: contraction_factor(&residuals),
            iterations: residuals.len(),
            residuals,
        }
    }
}

/// Largest ratio of consecutive residuals over the last few iterations
/// (ignoring ratios once the residual sits at round-off level).
fn contraction_factor(residuals: &[f64]) -> f64 {
    let floor = residuals.first().copied().unwrap_or(0.0) * 1e-12;
    let ratios: Vec<f64> = residuals
        .windows(2)
        .filter(|w| w[0] > floor && w[0] > 0.0)
        .map(|w| w[1] / w[0])
        .collect();
    if ratios.is_empty() {
        return 0.0;
    }
    let tail = &ratios[ratios.len().saturating_sub(4)..];
    tail.iter().fold(0.0f64, |m, r| if r.is_nan() { f64::INFINITY } else { m.max(*r) })
}

pub fn picard_solve(data: &ProblemData, config: &SolverConfig) -> Result<(BoussinesqState, PicardDiagnostics)> {
    Solver::new(config.clone())?.picard(data)
}

pub fn residual(state: &BoussinesqState, data: &ProblemData, config: &SolverConfig) -> Result<f64> {
    Solver::new(config.clone())?.residual(state, data)
}
