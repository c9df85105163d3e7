use num_complex::Complex64;

use super::trajectory::Trajectory;
use crate::error::{Error, Result};
use crate::par;
use crate::spectral::{ScalarField, SpectralGrid, Spectrum};

/// Sub-cell quadrature points per axis for ordinary and near-singular cells.
const COARSE_SUB: usize = 3;
const FINE_SUB: usize = 12;

/// Discrete parabolic Riesz potential on a uniform time grid.
///
/// The kernel `(|t-s|^{1/α} + |x-y|)^{-(d+α-β)}` is averaged over each
/// space-time cell, so the diagonal singularity is integrated rather than
/// sampled. Spatial convolution is periodic with minimal-image offsets.
pub struct RieszOperator {
    grid: SpectralGrid,
    times: Vec<f64>,
    weights: Vec<f64>,
    /// Kernel spectra per time-offset index, prescaled by the domain volume.
    kernels: Vec<Spectrum>,
}

fn cell_average(tau: f64, off: &[i64], dt: f64, h: f64, alpha: f64, power: f64, sub: usize) -> f64 {
    let dim = off.len();
    let total = sub.pow(dim as u32 + 1);
    let mut acc = 0.0;
    let mut y = vec![0.0; dim];
    for k in 0..total {
        let mut rest = k;
        let st = (rest % sub) as f64;
        rest /= sub;
        let s = tau + dt * ((st + 0.5) / sub as f64 - 0.5);
        for a in 0..dim {
            let sa = (rest % sub) as f64;
            rest /= sub;
            y[a] = h * (off[a] as f64 + (sa + 0.5) / sub as f64 - 0.5);
        }
        let r = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        acc += (s.abs().powf(1.0 / alpha) + r).powf(-power);
    }
    acc / total as f64
}

impl RieszOperator {
    pub fn new(grid: &SpectralGrid, times: &[f64], beta: f64, alpha: f64) -> Result<Self> {
        let d = grid.dim() as f64;
        if !(beta > 0.0 && beta < d + alpha) {
            return Err(Error::InvalidParameter(format!(
                "Riesz order {beta} must lie in (0, d+α) = (0, {})",
                d + alpha
            )));
        }
        let nt = times.len();
        let dt = (times[nt - 1] - times[0]) / (nt - 1) as f64;
        if times.windows(2).any(|w| ((w[1] - w[0]) - dt).abs() > 1e-9 * dt) {
            return Err(Error::InvalidParameter(
                "parabolic Riesz potential needs a uniform time grid".into(),
            ));
        }
        let power = d + alpha - beta;
        let h = grid.spacing();
        let n = grid.n() as i64;
        let volume = grid.length().powi(grid.dim() as i32);
        let kernels = (0..nt)
            .map(|k| {
                let tau = k as f64 * dt;
                let mut vals = vec![Complex64::new(0.0, 0.0); grid.len()];
                grid.for_each_node_mut(&mut vals, |idx, v| {
                    let off: Vec<i64> = idx
                        .iter()
                        .map(|&i| if (i as i64) < n / 2 { i as i64 } else { i as i64 - n })
                        .collect();
                    let near = k <= 1 && off.iter().all(|o| o.abs() <= 1);
                    let sub = if near { FINE_SUB } else { COARSE_SUB };
                    *v = Complex64::new(cell_average(tau, &off, dt, h, alpha, power, sub), 0.0);
                });
                grid.forward_complex(&mut vals);
                vals.iter_mut().for_each(|c| *c *= volume);
                Spectrum::new(grid.clone(), vals)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            grid: grid.clone(),
            times: times.to_vec(),
            weights: super::trajectory::trapezoid_weights(times),
            kernels,
        })
    }

    pub fn apply(&self, psi: &Trajectory<ScalarField>) -> Result<Trajectory<ScalarField>> {
        self.grid.ensure_same(psi.grid())?;
        if psi.times().len() != self.times.len() {
            return Err(Error::GridMismatch);
        }
        let specs: Vec<Spectrum> = psi.snapshots().iter().map(|s| s.forward()).collect();
        let nt = self.times.len();
        let out = par::map_range(nt, |i| {
            let mut acc = vec![Complex64::new(0.0, 0.0); self.grid.len()];
            for (j, s) in specs.iter().enumerate() {
                let k = &self.kernels[i.abs_diff(j)];
                let w = self.weights[j];
                for ((a, x), y) in acc.iter_mut().zip(k.coeffs()).zip(s.coeffs()) {
                    *a += w * x * y;
                }
            }
            Spectrum::new(self.grid.clone(), acc).expect("grid-sized buffer").inverse()
        });
        Trajectory::new(self.times.clone(), out)
    }
}

/// `I_β ψ` evaluated on the trajectory's own time grid.
pub fn parabolic_riesz(psi: &Trajectory<ScalarField>, beta: f64, alpha: f64) -> Result<Trajectory<ScalarField>> {
    RieszOperator::new(psi.grid(), psi.times(), beta, alpha)?.apply(psi)
}
