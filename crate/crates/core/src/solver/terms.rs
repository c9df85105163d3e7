use num_complex::Complex64;

use super::duhamel::duhamel_coeffs;
use super::{BoussinesqState, ProblemData, Solver};
use crate::error::Result;
use crate::operators::{dealiased_product, derivative_coeffs, div_tensor_spectra, leray_spectra};
use crate::par;
use crate::spaces::{heat_extension, Trajectory};
use crate::spectral::{ScalarField, Spectrum, VectorField};

/// Per-snapshot source spectra: `d` velocity components followed by the temperature.
pub(crate) type Sources = Vec<Vec<Spectrum>>;

impl Solver {
    /// `U₀(t) = (e^{-tΛ} u₀, e^{-tΛ} θ₀)` on the solver's time grid.
    pub fn initial_term(&self, data: &ProblemData) -> Result<BoussinesqState> {
        data.check(&self.grid, &self.times)?;
        BoussinesqState::new(
            heat_extension(&data.u0, self.config.alpha, self.times.clone())?,
            heat_extension(&data.theta0, self.config.alpha, self.times.clone())?,
        )
    }

    /// Duhamel integrals of `P f` and `g`.
    pub fn force_term(&self, data: &ProblemData) -> Result<BoussinesqState> {
        data.check(&self.grid, &self.times)?;
        let dim = self.grid.dim();
        let sources: Sources = par::map_range(self.times.len(), |i| {
            let mut s: Vec<Spectrum> = match &data.force {
                Some(f) => f.snapshot(i).components().iter().map(|c| c.forward()).collect(),
                None => vec![Spectrum::zeros(&self.grid); dim],
            };
            leray_spectra(&mut s);
            s.push(match &data.source {
                Some(g) => g.snapshot(i).forward(),
                None => Spectrum::zeros(&self.grid),
            });
            s
        });
        self.integrate(sources)
    }

    /// Linear coupling: velocity part `∫ e^{-(t-s)Λ} P(θ e_d) ds`, temperature part zero.
    pub fn apply_linear(&self, state: &BoussinesqState) -> Result<BoussinesqState> {
        self.check_state(state)?;
        if !self.config.coupling {
            return BoussinesqState::zeros(&self.grid, &self.times);
        }
        let dim = self.grid.dim();
        let sources: Sources = par::map_range(self.times.len(), |i| self.linear_source(state.temperature.snapshot(i), dim));
        self.integrate(sources)
    }

    /// Quadratic term with velocity part `-∫ e^{-(t-s)Λ} P div(u ⊗ v) ds` and temperature
    /// part `±∫ e^{-(t-s)Λ} div(u η) ds`, where `u` is the velocity of `a` and `(v, η)` is `b`.
    pub fn apply_bilinear(&self, a: &BoussinesqState, b: &BoussinesqState) -> Result<BoussinesqState> {
        self.check_state(a)?;
        self.check_state(b)?;
        if !self.config.nonlinear {
            return BoussinesqState::zeros(&self.grid, &self.times);
        }
        let sources = par::map_range(self.times.len(), |i| {
            self.bilinear_source(a.velocity.snapshot(i), b.velocity.snapshot(i), b.temperature.snapshot(i))
        })
        .into_iter()
        .collect::<Result<Sources>>()?;
        self.integrate(sources)
    }

    pub(crate) fn check_state(&self, state: &BoussinesqState) -> Result<()> {
        self.grid.ensure_same(state.grid())?;
        let probe = Trajectory::new(self.times.clone(), vec![ScalarField::zeros(&self.grid); self.times.len()])?;
        probe.ensure_compatible(&state.velocity)
    }

    pub(crate) fn linear_source(&self, theta: &ScalarField, dim: usize) -> Vec<Spectrum> {
        let mut s = vec![Spectrum::zeros(&self.grid); dim];
        s[dim - 1] = theta.forward();
        leray_spectra(&mut s);
        s.push(Spectrum::zeros(&self.grid));
        s
    }

    pub(crate) fn bilinear_source(&self, u: &VectorField, v: &VectorField, eta: &ScalarField) -> Result<Vec<Spectrum>> {
        let mut s = div_tensor_spectra(u, v)?;
        leray_spectra(&mut s);
        for c in s.iter_mut() {
            c.coeffs_mut().iter_mut().for_each(|x| *x = -*x);
        }
        let mut t = Spectrum::zeros(&self.grid);
        for (i, ui) in u.components().iter().enumerate() {
            let prod = dealiased_product(ui, eta)?;
            let d = derivative_coeffs(&prod, i);
            t.coeffs_mut()
                .iter_mut()
                .zip(d)
                .for_each(|(x, y)| *x += y * self.config.temperature_sign);
        }
        s.push(t);
        Ok(s)
    }

    /// Duhamel-integrates per-snapshot source spectra into a state.
    pub(crate) fn integrate(&self, sources: Sources) -> Result<BoussinesqState> {
        let ncomp = self.grid.dim() + 1;
        let mut fields: Vec<Vec<ScalarField>> = Vec::with_capacity(ncomp);
        for c in 0..ncomp {
            let per_time: Vec<Vec<Complex64>> = sources.iter().map(|s| s[c].coeffs().to_vec()).collect();
            let d = duhamel_coeffs(&self.times, &self.rates, &per_time);
            fields.push(par::map_slice(&d, |coeffs| {
                Spectrum::new(self.grid.clone(), coeffs.clone()).expect("grid-sized").inverse()
            }));
        }
        let temperature = fields.pop().expect("temperature component");
        let velocity = (0..self.times.len())
            .map(|i| VectorField::new(fields.iter().map(|c| c[i].clone()).collect()))
            .collect::<Result<Vec<_>>>()?;
        BoussinesqState::new(
            Trajectory::new(self.times.clone(), velocity)?,
            Trajectory::new(self.times.clone(), temperature)?,
        )
    }
}
