use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::par;
use crate::spaces::Trajectory;
use crate::spectral::{Field, ScalarField, SpectralGrid, Spectrum};

/// Weights `(w0, w1)` of `∫_0^h e^{-λ(h-τ)} s(τ) dτ` for `s` linear between
/// `s(0)` and `s(h)`, as functions of `z = λh` (divided by `h`).
pub(crate) fn linear_weights(z: f64) -> (f64, f64) {
    if z < 0.05 {
        // Taylor series of (1 - e^{-z}(1+z))/z^2 and (1 - e^{-z})/z.
        let mut w0 = 0.0;
        let mut phi1 = 0.0;
        let mut zp = 1.0;
        let mut fact = 1.0;
        for k in 0..10 {
            fact *= (k + 1) as f64;
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            phi1 += sign * zp / fact;
            w0 += sign * (k + 1) as f64 * zp / (fact * (k + 2) as f64);
            zp *= z;
        }
        (w0, phi1 - w0)
    } else {
        let e = (-z).exp();
        let phi1 = -(-z).exp_m1() / z;
        let w0 = (1.0 - e * (1.0 + z)) / (z * z);
        (w0, phi1 - w0)
    }
}

/// `|k|^α` per storage index.
pub(crate) fn decay_rates(grid: &SpectralGrid, alpha: f64) -> Vec<f64> {
    grid.ksq().iter().map(|k2| k2.powf(alpha / 2.0)).collect()
}

/// Exponential-quadrature Duhamel integral on per-time spectra: returns
/// `D(t_j) = ∫_0^{t_j} e^{-(t_j-s)|k|^α} ŝ(s) ds` with `ŝ` piecewise linear.
pub(crate) fn duhamel_coeffs(times: &[f64], rates: &[f64], source: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
    let modes = rates.len();
    let mut out = vec![vec![Complex64::new(0.0, 0.0); modes]; times.len()];
    for j in 0..times.len() - 1 {
        let h = times[j + 1] - times[j];
        let (prev, next) = out.split_at_mut(j + 1);
        let prev = &prev[j];
        let (sj, sj1) = (&source[j], &source[j + 1]);
        par::for_each_mut(&mut next[0], |m, c| {
            let z = rates[m] * h;
            let (w0, w1) = linear_weights(z);
            *c = (-z).exp() * prev[m] + h * (w0 * sj[m] + w1 * sj1[m]);
        });
    }
    out
}

/// Duhamel integral `t -> ∫_0^t e^{-(t-s)(-Δ)^{α/2}} source(s) ds` of a trajectory.
pub fn duhamel<F: Field>(source: &Trajectory<F>, alpha: f64) -> Result<Trajectory<F>> {
    if !(1.0..=2.0).contains(&alpha) {
        return Err(Error::InvalidParameter(format!("fractional order {alpha} outside [1, 2]")));
    }
    let grid = source.grid().clone();
    let rates = decay_rates(&grid, alpha);
    let ncomp = source.snapshot(0).scalar_components().len();
    let mut per_comp: Vec<Vec<ScalarField>> = Vec::with_capacity(ncomp);
    for c in 0..ncomp {
        let spectra: Vec<Vec<Complex64>> = par::map_slice(source.snapshots(), |s| s.scalar_components()[c].forward().into_coeffs());
        let d = duhamel_coeffs(source.times(), &rates, &spectra);
        per_comp.push(par::map_slice(&d, |coeffs| {
            Spectrum::new(grid.clone(), coeffs.clone()).expect("grid-sized").inverse()
        }));
    }
    let snapshots = (0..source.len())
        .map(|i| F::from_scalar_components(per_comp.iter().map(|c| c[i].clone()).collect()))
        .collect::<Result<Vec<_>>>()?;
    Trajectory::new(source.times().to_vec(), snapshots)
}
