use std::f64::consts::{LN_2, PI};

use serde::{Deserialize, Serialize};

use super::morrey::{check_exponents, morrey_norm_with, unit_morrey};
use super::regions::SupOptions;
use crate::error::{Error, Result};
use crate::operators::heat_propagate;
use crate::par;
use crate::spectral::{Field, ScalarField};

/// Dyadic time nodes `2^{min_exp + i/per_octave}` for the thermic norms.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogTimeGrid {
    pub min_exp: i32,
    pub max_exp: i32,
    pub per_octave: usize,
}

impl Default for LogTimeGrid {
    fn default() -> Self {
        Self {
            min_exp: -12,
            max_exp: 6,
            per_octave: 8,
        }
    }
}

impl LogTimeGrid {
    fn validate(&self) -> Result<()> {
        if self.per_octave == 0 || self.min_exp >= self.max_exp {
            return Err(Error::InvalidParameter("empty thermic time grid".into()));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        (self.max_exp - self.min_exp) as usize * self.per_octave + 1
    }

    pub fn is_empty(&self) -> bool {
        self.per_octave == 0 || self.min_exp >= self.max_exp
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.len())
            .map(|i| 2f64.powf(self.min_exp as f64 + i as f64 / self.per_octave as f64))
            .collect()
    }

    /// Trapezoid weights for `∫ g(t) dt/t` in the variable `log t`.
    pub fn log_weights(&self) -> Vec<f64> {
        let du = LN_2 / self.per_octave as f64;
        let n = self.len();
        (0..n).map(|i| if i == 0 || i + 1 == n { 0.5 * du } else { du }).collect()
    }

    /// Twice as many nodes per octave over the same range.
    pub fn doubled(&self) -> Self {
        Self {
            per_octave: 2 * self.per_octave,
            ..*self
        }
    }

    pub fn t_min(&self) -> f64 {
        2f64.powi(self.min_exp)
    }

    pub fn t_max(&self) -> f64 {
        2f64.powi(self.max_exp)
    }
}

fn sup_magnitude<F: Field>(f: &F) -> f64 {
    f.pointwise_magnitude().into_iter().fold(0.0, f64::max)
}

/// Thermic Besov norm `sup_t t^{β/α} ‖e^{-t(-Δ)^{α/2}} f‖_∞` over the time grid.
pub fn besov_norm<F: Field>(f: &F, beta: f64, alpha: f64, times: &LogTimeGrid) -> Result<f64> {
    if !(beta > 0.0) {
        return Err(Error::InvalidParameter(format!("Besov regularity {beta} must be positive")));
    }
    times.validate()?;
    let nodes = times.nodes();
    let vals = par::map_slice(&nodes, |&t| -> Result<f64> {
        Ok(t.powf(beta / alpha) * sup_magnitude(&heat_propagate(f, t, alpha)?))
    });
    vals.into_iter().try_fold(0.0f64, |m, v| Ok(m.max(v?)))
}

/// Pointwise profile `x -> (∫ t^{-σp/α} |e^{-t(-Δ)^{α/2}} f(x)|^p dt/t)^{1/p}`.
pub fn tlm_profile<F: Field>(f: &F, sigma: f64, p: f64, alpha: f64, times: &LogTimeGrid) -> Result<ScalarField> {
    if !(sigma < 0.0) {
        return Err(Error::InvalidParameter(format!("regularity index {sigma} must be negative")));
    }
    if !(p >= 1.0) {
        return Err(Error::InvalidParameter(format!("integrability exponent {p} must be >= 1")));
    }
    times.validate()?;
    let nodes = times.nodes();
    let weights = times.log_weights();
    let a = -sigma * p / alpha;
    let grid = f.grid().clone();
    let terms = par::map_range(nodes.len(), |i| -> Result<Vec<f64>> {
        let t = nodes[i];
        let c = weights[i] * t.powf(a);
        Ok(heat_propagate(f, t, alpha)?
            .pointwise_magnitude()
            .into_iter()
            .map(|v| c * v.powf(p))
            .collect())
    });
    let mut acc = vec![0.0; grid.len()];
    for term in terms {
        for (x, y) in acc.iter_mut().zip(term?) {
            *x += y;
        }
    }
    ScalarField::new(grid, acc.into_iter().map(|v| v.powf(1.0 / p)).collect())
}

/// Thermic norm value with a bound on the truncated part of the time integral.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ThermicValue {
    pub value: f64,
    /// Upper bound on the norm of the part of the profile coming from
    /// `t < t_min` and `t > t_max`; infinite when the data carry a mean.
    pub tail_bound: f64,
}

fn is_mean_free<F: Field>(f: &F) -> bool {
    f.scalar_components()
        .iter()
        .all(|c| c.mean().abs() <= 1e-12 * c.max_abs().max(f64::MIN_POSITIVE))
}

/// `∫_{T}^∞ t^{a-1} e^{-c(t-T)} dt` by Simpson's rule on a truncated range.
fn upper_tail_integral(a: f64, c: f64, t_max: f64) -> f64 {
    let span = 60.0 / c;
    let m = 4000;
    let h = span / m as f64;
    let g = |s: f64| (t_max + s).powf(a - 1.0) * (-c * s).exp();
    let mut acc = g(0.0) + g(span);
    for i in 1..m {
        acc += g(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * h / 3.0
}

/// Triebel-Lizorkin-Morrey (thermic) norm: the Morrey `M^{p,q}` norm of [`tlm_profile`].
pub fn tlm_norm<F: Field>(f: &F, sigma: f64, p: f64, q: f64, alpha: f64, times: &LogTimeGrid, opts: &SupOptions) -> Result<ThermicValue> {
    check_exponents(p, q)?;
    let profile = tlm_profile(f, sigma, p, alpha, times)?;
    let value = morrey_norm_with(&profile, p, q, opts)?;
    let a = -sigma * p / alpha;
    let sup0 = sup_magnitude(f);
    let lower = sup0.powf(p) * times.t_min().powf(a) / a;
    let upper = if sup0 == 0.0 {
        0.0
    } else if is_mean_free(f) {
        let kappa = (2.0 * PI / f.grid().length()).powf(alpha);
        let at_end = sup_magnitude(&heat_propagate(f, times.t_max(), alpha)?);
        at_end.powf(p) * upper_tail_integral(a, p * kappa, times.t_max())
    } else {
        f64::INFINITY
    };
    let pointwise = (lower + upper).powf(1.0 / p);
    let tail_bound = if pointwise == 0.0 {
        0.0
    } else {
        pointwise * unit_morrey(&profile, p, q, opts)?
    };
    Ok(ThermicValue { value, tail_bound })
}
