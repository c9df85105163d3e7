use num_complex::Complex64;

use super::duhamel::linear_weights;
use super::{BoussinesqState, ProblemData, Solver, SolverConfig};
use crate::error::{Error, Result};
use crate::operators::leray_spectra;
use crate::par;
use crate::spaces::Trajectory;
use crate::spectral::{Field, ScalarField, Spectrum, VectorField};

const BLOW_UP: f64 = 1e6;

impl Solver {
    /// Second-order exponential time differencing (Cox–Matthews) of the
    /// projected differential system, on the solver's time grid.
    pub fn etd_reference(&self, data: &ProblemData) -> Result<BoussinesqState> {
        data.check(&self.grid, &self.times)?;
        let mut v: Vec<Spectrum> = data.u0.components().iter().map(|c| c.forward()).collect();
        v.push(data.theta0.forward());
        let data_norm = self.data_scale(data);
        let mut out = vec![self.to_fields(&v)?];
        let mut n_prev = self.nonlinearity(&v, data, 0)?;
        for j in 0..self.times.len() - 1 {
            let h = self.times[j + 1] - self.times[j];
            let weights: Vec<(f64, f64, f64)> = self
                .rates
                .iter()
                .map(|r| {
                    let z = r * h;
                    let (w0, w1) = linear_weights(z);
                    ((-z).exp(), h * (w0 + w1), h * w1)
                })
                .collect();
            let mut a = v.clone();
            for (ac, nc) in a.iter_mut().zip(&n_prev) {
                let nc = nc.coeffs();
                par::for_each_mut(ac.coeffs_mut(), |m, c| *c = weights[m].0 * *c + weights[m].1 * nc[m]);
            }
            let n_mid = self.nonlinearity(&a, data, j + 1)?;
            for ((ac, nm), np) in a.iter_mut().zip(&n_mid).zip(&n_prev) {
                let (nm, np) = (nm.coeffs(), np.coeffs());
                par::for_each_mut(ac.coeffs_mut(), |m, c| *c += weights[m].2 * (nm[m] - np[m]));
            }
            v = a;
            let fields = self.to_fields(&v)?;
            let norm = state_l2(&fields);
            if !norm.is_finite() || norm > BLOW_UP * data_norm.max(f64::MIN_POSITIVE) {
                return Err(Error::Unstable {
                    step: j + 1,
                    norm,
                    data_norm,
                });
            }
            out.push(fields);
            if j + 2 < self.times.len() {
                n_prev = self.nonlinearity(&v, data, j + 1)?;
            }
        }
        let (vel, temp): (Vec<VectorField>, Vec<ScalarField>) = out.into_iter().unzip();
        BoussinesqState::new(
            Trajectory::new(self.times.clone(), vel)?,
            Trajectory::new(self.times.clone(), temp)?,
        )
    }

    /// Right-hand side without the dissipative part, at node `i`.
    fn nonlinearity(&self, v: &[Spectrum], data: &ProblemData, i: usize) -> Result<Vec<Spectrum>> {
        let dim = self.grid.dim();
        let (u, theta) = self.to_fields(v)?;
        let mut total: Vec<Spectrum> = if self.config.coupling {
            self.linear_source(&theta, dim)
        } else {
            vec![Spectrum::zeros(&self.grid); dim + 1]
        };
        if self.config.nonlinear {
            accumulate(&mut total, self.bilinear_source(&u, &u, &theta)?);
        }
        if let Some(f) = &data.force {
            let mut fs: Vec<Spectrum> = f.snapshot(i).components().iter().map(|c| c.forward()).collect();
            leray_spectra(&mut fs);
            fs.push(Spectrum::zeros(&self.grid));
            accumulate(&mut total, fs);
        }
        if let Some(g) = &data.source {
            let mut gs = vec![Spectrum::zeros(&self.grid); dim];
            gs.push(g.snapshot(i).forward());
            accumulate(&mut total, gs);
        }
        Ok(total)
    }

    fn to_fields(&self, v: &[Spectrum]) -> Result<(VectorField, ScalarField)> {
        let dim = self.grid.dim();
        let u = VectorField::new(v[..dim].iter().map(|s| s.inverse()).collect())?;
        Ok((u, v[dim].inverse()))
    }

    fn data_scale(&self, data: &ProblemData) -> f64 {
        let mut s = state_l2(&(data.u0.clone(), data.theta0.clone()));
        if let Some(f) = &data.force {
            s = s.max(f.snapshots().iter().fold(0.0f64, |m, x| m.max(x.l2_norm())));
        }
        if let Some(g) = &data.source {
            s = s.max(g.snapshots().iter().fold(0.0f64, |m, x| m.max(x.l2_norm())));
        }
        s
    }
}

fn accumulate(total: &mut [Spectrum], extra: Vec<Spectrum>) {
    for (t, e) in total.iter_mut().zip(extra) {
        t.coeffs_mut()
            .iter_mut()
            .zip(e.coeffs())
            .for_each(|(x, y): (&mut Complex64, &Complex64)| *x += y);
    }
}

fn state_l2(s: &(VectorField, ScalarField)) -> f64 {
    (s.0.l2_norm().powi(2) + s.1.l2_norm().powi(2)).sqrt()
}

pub fn etd_reference_solve(data: &ProblemData, config: &SolverConfig) -> Result<BoussinesqState> {
    Solver::new(config.clone())?.etd_reference(data)
}
