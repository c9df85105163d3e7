//! Fourier-multiplier operators and physical-space kernels.
//!
//! All negative-order multipliers zero the mean: on the torus `(-Δ)^{-s}` only
//! makes sense on mean-free functions.

use std::f64::consts::PI;
use std::fmt;
use std::io::Write;
use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::par;
use crate::spectral::{dealias_in_place, Field, ScalarField, SpectralGrid, Spectrum, VectorField};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

fn norm_sq(k: &[f64]) -> f64 {
    k.iter().map(|v| v * v).sum()
}

/// `(-Δ)^{α/2}`: multiplier `|k|^α`, mean removed. Vector input is handled
/// component-wise.
pub fn fractional_laplacian<F: Field>(field: &F, alpha: f64) -> Result<F> {
    if !(alpha > 0.0) {
        return Err(Error::InvalidParameter(format!("fractional order {alpha} must be positive")));
    }
    Ok(field.map(|c| c.apply_symbol(|k, _| Complex64::new(norm_sq(k).powf(alpha / 2.0), 0.0))))
}

fn check_heat_args(t: f64, alpha: f64) -> Result<()> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidParameter(format!("heat time {t} must be >= 0")));
    }
    if !(1.0..=2.0).contains(&alpha) {
        return Err(Error::InvalidParameter(format!("fractional order {alpha} outside [1, 2]")));
    }
    Ok(())
}

/// Semigroup `e^{-t(-Δ)^{α/2}}`, multiplier `exp(-t|k|^α)`.
pub fn heat_propagate<F: Field>(field: &F, t: f64, alpha: f64) -> Result<F> {
    check_heat_args(t, alpha)?;
    if t == 0.0 {
        return Ok(field.clone());
    }
    Ok(field.map(|c| {
        let mut s = c.forward();
        heat_spectrum(&mut s, t, alpha);
        s.inverse()
    }))
}

/// Multiplies a spectrum by `exp(-t|k|^α)` in place.
pub fn heat_spectrum(spec: &mut Spectrum, t: f64, alpha: f64) {
    let grid = spec.grid().clone();
    let ksq = grid.ksq();
    par::for_each_mut(spec.coeffs_mut(), |i, c| *c *= (-t * ksq[i].powf(alpha / 2.0)).exp());
}

/// Wavevector with Nyquist components removed, matching the derivative
/// multipliers so that `div ∘ P = 0` holds exactly on the lattice.
fn effective_k(k: &[f64], idx: &[usize], nyq: usize, out: &mut [f64]) {
    for a in 0..k.len() {
        out[a] = if idx[a] == nyq { 0.0 } else { k[a] };
    }
}

/// Applies `I - k k^T / |k|^2` to a set of component spectra in place.
/// The zero mode (and pure-Nyquist modes) are left unchanged.
pub fn leray_spectra(specs: &mut [Spectrum]) {
    let dim = specs.len();
    let grid = specs[0].grid().clone();
    let nyq = grid.nyquist();
    let n = grid.n();
    let kax = grid.axis_wavenumbers();
    let len = grid.len();
    let mut packed: Vec<Vec<Complex64>> = (0..len / n).map(|_| Vec::new()).collect();
    // Row-wise gather so each worker owns disjoint memory.
    par::for_each_mut(&mut packed, |row, buf| {
        let base = row * n;
        buf.reserve(n * dim);
        for j in 0..n {
            for s in specs.iter() {
                buf.push(s.coeffs()[base + j]);
            }
        }
        let idx0 = grid.unflat(base);
        let mut idx = idx0.clone();
        let mut k = vec![0.0; dim];
        let mut ke = vec![0.0; dim];
        for j in 0..n {
            idx[dim - 1] = j;
            for a in 0..dim {
                k[a] = kax[idx[a]];
            }
            effective_k(&k, &idx, nyq, &mut ke);
            let k2: f64 = ke.iter().map(|v| v * v).sum();
            if k2 == 0.0 {
                continue;
            }
            let v = &mut buf[j * dim..(j + 1) * dim];
            let dot: Complex64 = v.iter().zip(&ke).map(|(c, kk)| c * kk).sum();
            for a in 0..dim {
                v[a] -= dot * (ke[a] / k2);
            }
        }
    });
    for (row, buf) in packed.into_iter().enumerate() {
        for j in 0..n {
            for (a, s) in specs.iter_mut().enumerate() {
                s.coeffs_mut()[row * n + j] = buf[j * dim + a];
            }
        }
    }
}

/// Leray projector onto divergence-free fields.
pub fn leray_project(v: &VectorField) -> VectorField {
    let mut specs: Vec<Spectrum> = v.components().iter().map(|c| c.forward()).collect();
    leray_spectra(&mut specs);
    VectorField::new(specs.iter().map(|s| s.inverse()).collect()).expect("same grid")
}

/// Rejects fields whose zero mode exceeds `1e-12` of their sup norm.
pub fn ensure_mean_free(field: &ScalarField) -> Result<()> {
    let mean = field.mean();
    let scale = field.max_abs();
    if mean.abs() > 1e-12 * scale.max(f64::MIN_POSITIVE) && scale > 0.0 {
        return Err(Error::NonZeroMean { mean, scale });
    }
    Ok(())
}

/// `(-Δ)^{-γ/2}`: multiplier `|k|^{-γ}` for `k ≠ 0`, zero mode dropped.
pub fn riesz_smoothing<F: Field>(field: &F, gamma: f64) -> Result<F> {
    if !(gamma > 0.0) {
        return Err(Error::InvalidParameter(format!("smoothing order {gamma} must be positive")));
    }
    field.try_map(|c| {
        ensure_mean_free(c)?;
        Ok(c.apply_symbol(|k, _| {
            let k2 = norm_sq(k);
            if k2 == 0.0 {
                ZERO
            } else {
                Complex64::new(k2.powf(-gamma / 2.0), 0.0)
            }
        }))
    })
}

/// Spectrum of the dealiased product `a * b`.
pub(crate) fn dealiased_product(a: &ScalarField, b: &ScalarField) -> Result<Spectrum> {
    let prod = a.zip_with(b, |x, y| x * y)?;
    let mut s = prod.forward();
    dealias_in_place(&mut s);
    Ok(s)
}

/// Multiplies a spectrum by `i k'_axis` (Nyquist removed).
pub(crate) fn derivative_coeffs(spec: &Spectrum, axis: usize) -> Vec<Complex64> {
    let mut s = spec.clone();
    crate::spectral::differentiate_spectrum(&mut s, axis);
    s.into_coeffs()
}

/// Spectra of `div(a ⊗ b)_j = Σ_i ∂_i (a_i b_j)`, products dealiased.
pub(crate) fn div_tensor_spectra(a: &VectorField, b: &VectorField) -> Result<Vec<Spectrum>> {
    let grid = a.grid().clone();
    let dim = a.components().len();
    let mut out = Vec::with_capacity(dim);
    for j in 0..dim {
        let mut acc = Spectrum::zeros(&grid);
        for i in 0..dim {
            let prod = dealiased_product(a.component(i), b.component(j))?;
            let d = derivative_coeffs(&prod, i);
            acc.coeffs_mut().iter_mut().zip(d).for_each(|(x, y)| *x += y);
        }
        out.push(acc);
    }
    Ok(out)
}

/// Pressure from `(-Δ) p = div(div(u ⊗ u) - f - θ e_d)`, mean-free.
pub fn pressure_from_state(u: &VectorField, theta: &ScalarField, f: &VectorField) -> Result<ScalarField> {
    let grid = u.grid().clone();
    grid.ensure_same(theta.grid())?;
    grid.ensure_same(f.grid())?;
    let rhs = pressure_rhs(u, theta, f)?;
    let mut p = rhs;
    let ksq = grid.ksq();
    par::for_each_mut(p.coeffs_mut(), |i, c| {
        *c = if ksq[i] == 0.0 { ZERO } else { *c / ksq[i] };
    });
    Ok(p.inverse())
}

/// Spectrum of `div(div(u ⊗ u) - f - θ e_d)`.
pub fn pressure_rhs(u: &VectorField, theta: &ScalarField, f: &VectorField) -> Result<Spectrum> {
    let grid = u.grid().clone();
    let dim = grid.dim();
    let g = div_tensor_spectra(u, u)?;
    let mut rhs = Spectrum::zeros(&grid);
    for (j, mut gj) in g.into_iter().enumerate() {
        let fj = f.component(j).forward();
        gj.coeffs_mut().iter_mut().zip(fj.coeffs()).for_each(|(x, y)| *x -= y);
        if j == dim - 1 {
            let th = theta.forward();
            gj.coeffs_mut().iter_mut().zip(th.coeffs()).for_each(|(x, y)| *x -= y);
        }
        let d = derivative_coeffs(&gj, j);
        rhs.coeffs_mut().iter_mut().zip(d).for_each(|(x, y)| *x += y);
    }
    Ok(rhs)
}

/// What a multiplier does at `k = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ZeroMode {
    Zero,
    Identity,
}

type SymbolFn = dyn Fn(&[f64]) -> Complex64 + Send + Sync;

/// A Fourier symbol `σ(k)` with its homogeneity degree.
#[derive(Clone)]
pub struct MultiplierSpec {
    pub name: String,
    /// Homogeneity degree `ρ`.
    pub degree: f64,
    pub zero_mode: ZeroMode,
    symbol: Arc<SymbolFn>,
}

impl fmt::Debug for MultiplierSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MultiplierSpec")
            .field("name", &self.name)
            .field("degree", &self.degree)
            .field("zero_mode", &self.zero_mode)
            .finish()
    }
}

impl MultiplierSpec {
    pub fn new<F>(name: impl Into<String>, degree: f64, zero_mode: ZeroMode, symbol: F) -> Self
    where
        F: Fn(&[f64]) -> Complex64 + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            degree,
            zero_mode,
            symbol: Arc::new(symbol),
        }
    }

    /// `σ(ξ) = |ξ|^ρ`.
    pub fn radial_power(rho: f64) -> Self {
        let zm = if rho == 0.0 { ZeroMode::Identity } else { ZeroMode::Zero };
        Self::new(format!("|xi|^{rho}"), rho, zm, move |k| {
            let r2: f64 = k.iter().map(|v| v * v).sum();
            Complex64::new(r2.powf(rho / 2.0), 0.0)
        })
    }

    /// Entry `(j, k)` of the Leray projector, degree 0.
    pub fn leray_entry(j: usize, l: usize) -> Self {
        Self::new(format!("P[{j}{l}]"), 0.0, ZeroMode::Zero, move |k| {
            let r2: f64 = k.iter().map(|v| v * v).sum();
            let delta = if j == l { 1.0 } else { 0.0 };
            Complex64::new(delta - k[j] * k[l] / r2, 0.0)
        })
    }

    /// `(P div)` entry: `(δ_{jl} - ξ_j ξ_l / |ξ|^2) i ξ_m`, degree 1.
    pub fn leray_div(j: usize, l: usize, m: usize) -> Self {
        Self::new(format!("P[{j}{l}] d{m}"), 1.0, ZeroMode::Zero, move |k| {
            let r2: f64 = k.iter().map(|v| v * v).sum();
            let delta = if j == l { 1.0 } else { 0.0 };
            Complex64::new(0.0, (delta - k[j] * k[l] / r2) * k[m])
        })
    }

    /// Force kernel symbol `|ξ|^γ P_{jl}(ξ)`, degree `γ`.
    pub fn force_entry(gamma: f64, j: usize, l: usize) -> Self {
        Self::new(format!("|xi|^{gamma} P[{j}{l}]"), gamma, ZeroMode::Zero, move |k| {
            let r2: f64 = k.iter().map(|v| v * v).sum();
            let delta = if j == l { 1.0 } else { 0.0 };
            Complex64::new(r2.powf(gamma / 2.0) * (delta - k[j] * k[l] / r2), 0.0)
        })
    }

    /// Symbol value with the zero-mode policy applied.
    pub fn eval(&self, k: &[f64]) -> Complex64 {
        if k.iter().all(|&v| v == 0.0) {
            match self.zero_mode {
                ZeroMode::Zero => ZERO,
                ZeroMode::Identity => Complex64::new(1.0, 0.0),
            }
        } else {
            (self.symbol)(k)
        }
    }

    /// Applies the multiplier to a scalar field.
    pub fn apply(&self, field: &ScalarField) -> ScalarField {
        field.apply_symbol(|k, _| self.eval(k))
    }
}

/// Regular lattice of sample points `x_j = (j - n/2) h` centred on the origin.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointLattice {
    pub dim: usize,
    pub points_per_axis: usize,
    pub spacing: f64,
}

impl PointLattice {
    pub fn new(dim: usize, points_per_axis: usize, spacing: f64) -> Result<Self> {
        if dim < 2 || points_per_axis < 2 || !points_per_axis.is_multiple_of(2) || !(spacing > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "point lattice needs d >= 2, an even point count and positive spacing (got {dim}, {points_per_axis}, {spacing})"
            )));
        }
        Ok(Self {
            dim,
            points_per_axis,
            spacing,
        })
    }

    pub fn len(&self) -> usize {
        self.points_per_axis.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Offsets of point `flat` in lattice units.
    pub fn offsets(&self, mut flat: usize) -> Vec<i64> {
        let n = self.points_per_axis;
        let mut out = vec![0i64; self.dim];
        for a in (0..self.dim).rev() {
            out[a] = (flat % n) as i64 - (n / 2) as i64;
            flat /= n;
        }
        out
    }

    pub fn point(&self, flat: usize) -> Vec<f64> {
        self.offsets(flat).into_iter().map(|o| o as f64 * self.spacing).collect()
    }

    /// Same lattice with spacing multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            spacing: self.spacing * c,
            ..self.clone()
        }
    }
}

/// Oversampling factors of the kernel evaluator.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KernelOptions {
    /// Internal grid spacing is the point spacing divided by this.
    pub refine: usize,
    /// Internal box side is the point extent multiplied by this.
    pub oversize: usize,
}

impl Default for KernelOptions {
    fn default() -> Self {
        Self { refine: 4, oversize: 4 }
    }
}

/// Values of `K^ρ_t`, the inverse transform of `σ_ρ(ξ) e^{-t|ξ|^α}`.
#[derive(Clone, Debug, Serialize)]
pub struct KernelSample {
    pub symbol: String,
    pub alpha: f64,
    pub rho: f64,
    pub t: f64,
    pub points: Vec<Vec<f64>>,
    pub values: Vec<f64>,
}

impl KernelSample {
    /// `|K_t(x)| (t^{1/α} + |x|)^{d+ρ}`.
    pub fn normalized(&self) -> Vec<f64> {
        let d = self.points.first().map_or(0, |p| p.len()) as f64;
        let s = self.t.powf(1.0 / self.alpha);
        self.points
            .iter()
            .zip(&self.values)
            .map(|(x, v)| {
                let r = x.iter().map(|c| c * c).sum::<f64>().sqrt();
                v.abs() * (s + r).powf(d + self.rho)
            })
            .collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// CSV with columns `t, x1..xd, value, normalized`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let d = self.points.first().map_or(0, |p| p.len());
        let mut header = vec!["t".to_string()];
        header.extend((1..=d).map(|a| format!("x{a}")));
        header.push("value".into());
        header.push("normalized".into());
        w.write_record(&header)?;
        for ((x, v), nv) in self.points.iter().zip(&self.values).zip(self.normalized()) {
            let mut rec = vec![format!("{:e}", self.t)];
            rec.extend(x.iter().map(|c| format!("{c:e}")));
            rec.push(format!("{v:e}"));
            rec.push(format!("{nv:e}"));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn check_kernel_args(spec: &MultiplierSpec, dim: usize, alpha: f64, t: f64) -> Result<()> {
    if !(spec.degree > -(dim as f64)) {
        return Err(Error::InvalidParameter(format!(
            "kernel degree {} must exceed -d = -{dim}",
            spec.degree
        )));
    }
    if !(t > 0.0) {
        return Err(Error::InvalidParameter(format!("kernel time {t} must be positive")));
    }
    if !(1.0..=2.0).contains(&alpha) {
        return Err(Error::InvalidParameter(format!("fractional order {alpha} outside [1, 2]")));
    }
    Ok(())
}

/// Periodized kernel `K^ρ_t` on a whole grid, origin at node 0.
pub fn kernel_on_grid(spec: &MultiplierSpec, alpha: f64, t: f64, grid: &SpectralGrid) -> Result<ScalarField> {
    check_kernel_args(spec, grid.dim(), alpha, t)?;
    let mut coeffs = vec![ZERO; grid.len()];
    let kax = grid.axis_wavenumbers();
    let dim = grid.dim();
    grid.for_each_node_mut(&mut coeffs, |idx, c| {
        let mut k = [0.0f64; 8];
        for a in 0..dim {
            k[a] = kax[idx[a]];
        }
        let k = &k[..dim];
        let r2: f64 = k.iter().map(|v| v * v).sum();
        *c = spec.eval(k) * (-t * r2.powf(alpha / 2.0)).exp();
    });
    grid.inverse_complex(&mut coeffs);
    let vol = grid.length().powi(dim as i32);
    Ok(ScalarField::from_raw(
        grid.clone(),
        coeffs.into_iter().map(|c| c.re / vol).collect(),
    ))
}

/// Kernel values on a point lattice via an oversampled inverse transform:
/// the internal grid is `refine`× finer and `oversize`× larger than the
/// point extent.
pub fn kernel_physical(spec: &MultiplierSpec, alpha: f64, t: f64, points: &PointLattice, opts: KernelOptions) -> Result<KernelSample> {
    if opts.refine < 4 || opts.oversize < 4 {
        return Err(Error::InvalidParameter("kernel oversampling factors must be at least 4".into()));
    }
    let n = opts.refine * opts.oversize * points.points_per_axis;
    let length = (opts.oversize * points.points_per_axis) as f64 * points.spacing;
    let grid = SpectralGrid::new(points.dim, n, length)?;
    let field = kernel_on_grid(spec, alpha, t, &grid)?;
    let mut idx = vec![0usize; points.dim];
    let (pts, vals): (Vec<_>, Vec<_>) = (0..points.len())
        .map(|p| {
            let off = points.offsets(p);
            for a in 0..points.dim {
                idx[a] = (off[a] * opts.refine as i64).rem_euclid(n as i64) as usize;
            }
            (points.point(p), field.samples()[grid.flat(&idx)])
        })
        .unzip();
    Ok(KernelSample {
        symbol: spec.name.clone(),
        alpha,
        rho: spec.degree,
        t,
        points: pts,
        values: vals,
    })
}

/// Discrete `L^p` norm of the periodized kernel on `grid`.
pub fn kernel_lp_norm(spec: &MultiplierSpec, alpha: f64, t: f64, grid: &SpectralGrid, p: f64) -> Result<f64> {
    Ok(kernel_on_grid(spec, alpha, t, grid)?.lp_norm(p))
}

/// Closed-form heat kernel (`α = 2`) in dimension `d`.
pub fn gaussian_kernel(x: &[f64], t: f64) -> f64 {
    let d = x.len() as f64;
    let r2: f64 = x.iter().map(|v| v * v).sum();
    (4.0 * PI * t).powf(-d / 2.0) * (-r2 / (4.0 * t)).exp()
}

/// Closed-form Poisson kernel (`α = 1`) in dimension 2.
pub fn poisson_kernel_2d(x: &[f64], t: f64) -> f64 {
    let r2: f64 = x.iter().map(|v| v * v).sum();
    t / (2.0 * PI * (t * t + r2).powf(1.5))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{divergence, gradient, make_grid};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn torus(n: usize) -> SpectralGrid {
        make_grid(2, n, 2.0 * PI).unwrap()
    }

    fn random_vector(grid: &SpectralGrid, seed: u64) -> VectorField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let comps = (0..grid.dim())
            .map(|_| {
                let s = (0..grid.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
                ScalarField::new(grid.clone(), s).unwrap()
            })
            .collect();
        VectorField::new(comps).unwrap()
    }

    #[test]
    fn fractional_laplacian_eigenfunctions() {
        let g = torus(32);
        let c = ScalarField::constant(&g, 3.0);
        assert!(fractional_laplacian(&c, 1.5).unwrap().max_abs() < 1e-14);
        let f = ScalarField::from_fn(&g, |x| x[0].cos());
        assert!(fractional_laplacian(&f, 1.5).unwrap().max_abs_diff(&f) < 1e-13);
        let f2 = ScalarField::from_fn(&g, |x| (2.0 * x[0]).cos());
        let got = fractional_laplacian(&f2, 1.5).unwrap();
        assert!(got.max_abs_diff(&f2.scale(2f64.powf(1.5))) < 1e-12);
        assert!((2f64.powf(1.5) - 2.828427).abs() < 1e-6);
        assert!(fractional_laplacian(&f, 0.0).is_err());
        assert!(fractional_laplacian(&f, -1.0).is_err());
    }

    #[test]
    fn heat_identity_and_eigen_decay() {
        let g = torus(32);
        let f = ScalarField::from_fn(&g, |x| x[0].cos() + 0.5 * (3.0 * x[1]).sin());
        assert!(heat_propagate(&f, 0.0, 1.5).unwrap().max_abs_diff(&f) == 0.0);
        let c = ScalarField::from_fn(&g, |x| x[0].cos());
        let out = heat_propagate(&c, 1.0, 1.5).unwrap();
        assert!(out.max_abs_diff(&c.scale((-1.0f64).exp())) < 1e-13);
        assert!(((-1.0f64).exp() - 0.3678794).abs() < 1e-7);
        assert!(heat_propagate(&c, -0.1, 1.5).is_err());
        assert!(heat_propagate(&c, 0.1, 2.5).is_err());
        assert!(heat_propagate(&c, 0.1, 0.5).is_err());
    }

    #[test]
    fn heat_gaussian_convolution_closed_form() {
        // exp(-|x|^2/(2 s^2)) convolved with the α=2 kernel at time t is
        // (s^2/(s^2+2t))^{d/2} exp(-|x|^2/(2(s^2+2t))).
        let (s, t, len) = (0.5f64, 0.1f64, 20.0f64);
        let g = make_grid(2, 128, len).unwrap();
        let c = len / 2.0;
        let r2 = |x: &[f64]| (x[0] - c).powi(2) + (x[1] - c).powi(2);
        let f = ScalarField::from_fn(&g, |x| (-r2(x) / (2.0 * s * s)).exp());
        let got = heat_propagate(&f, t, 2.0).unwrap();
        let s2 = s * s + 2.0 * t;
        let want = ScalarField::from_fn(&g, |x| (s * s / s2) * (-r2(x) / (2.0 * s2)).exp());
        assert!(got.max_abs_diff(&want) < 1e-8 * want.max_abs());
    }

    #[test]
    fn heat_norms_nonincreasing() {
        let g = torus(32);
        let v = random_vector(&g, 4);
        let f = v.component(0).clone();
        let mut prev = (f.max_abs(), f.l2_norm());
        for t in [0.01, 0.1, 0.5, 1.0, 3.0] {
            let h = heat_propagate(&f, t, 1.5).unwrap();
            let cur = (h.max_abs(), h.l2_norm());
            assert!(cur.0 <= prev.0 + 1e-12 && cur.1 <= prev.1 + 1e-12);
            prev = cur;
        }
    }

    #[test]
    fn leray_examples() {
        let g = torus(32);
        let v = VectorField::from_fn(&g, |x| vec![-x[0].sin() * x[1].cos(), x[0].cos() * x[1].sin()]);
        let pv = leray_project(&v);
        for a in 0..2 {
            assert!(pv.component(a).max_abs_diff(v.component(a)) < 1e-13);
        }
        let h = ScalarField::from_fn(&g, |x| (x[0] + x[1]).sin());
        assert!(leray_project(&gradient(&h)).max_abs() < 1e-13);
        let w = VectorField::from_fn(&g, |x| vec![(x[0] + x[1]).sin(), 0.0]);
        let pw = leray_project(&w);
        let half = ScalarField::from_fn(&g, |x| (x[0] + x[1]).sin() / 2.0);
        assert!(pw.component(0).max_abs_diff(&half) < 1e-13);
        assert!(pw.component(1).max_abs_diff(&half.scale(-1.0)) < 1e-13);
    }

    #[test]
    fn leray_algebra_on_random_fields() {
        let g = torus(32);
        for seed in 0..5 {
            let v = random_vector(&g, seed);
            let pv = leray_project(&v);
            assert!(divergence(&pv).max_abs() < 1e-12);
            let ppv = leray_project(&pv);
            for a in 0..2 {
                assert!(ppv.component(a).max_abs_diff(pv.component(a)) < 1e-12);
            }
            let hp = heat_propagate(&pv, 0.3, 1.5).unwrap();
            let ph = leray_project(&heat_propagate(&v, 0.3, 1.5).unwrap());
            for a in 0..2 {
                assert!(hp.component(a).max_abs_diff(ph.component(a)) < 1e-12);
            }
        }
    }

    #[test]
    fn riesz_smoothing_examples() {
        let g = torus(32);
        let c1 = ScalarField::from_fn(&g, |x| x[0].cos());
        assert!(riesz_smoothing(&c1, 0.5).unwrap().max_abs_diff(&c1) < 1e-13);
        let c2 = ScalarField::from_fn(&g, |x| (2.0 * x[0]).cos());
        assert!(riesz_smoothing(&c2, 1.0).unwrap().max_abs_diff(&c2.scale(0.5)) < 1e-13);
        let mixed = ScalarField::from_fn(&g, |x| (3.0 * x[0]).sin() + (x[0] + 2.0 * x[1]).cos());
        let back = fractional_laplacian(&riesz_smoothing(&mixed, 0.7).unwrap(), 0.7).unwrap();
        assert!(back.max_abs_diff(&mixed) < 1e-12);
        let biased = ScalarField::from_fn(&g, |x| 1.0 + x[0].cos());
        assert!(matches!(riesz_smoothing(&biased, 1.0), Err(Error::NonZeroMean { .. })));
        assert!(riesz_smoothing(&c1, 0.0).is_err());
    }

    #[test]
    fn pressure_examples() {
        let g = torus(32);
        let zero_v = VectorField::zeros(&g);
        let zero_s = ScalarField::zeros(&g);
        assert!(pressure_from_state(&zero_v, &zero_s, &zero_v).unwrap().max_abs() == 0.0);
        let theta = ScalarField::from_fn(&g, |x| x[1].sin());
        let p = pressure_from_state(&zero_v, &theta, &zero_v).unwrap();
        let want = ScalarField::from_fn(&g, |x| -x[1].cos());
        assert!(p.max_abs_diff(&want) < 1e-13);
    }

    #[test]
    fn pressure_residual_random_bandlimited() {
        let g = torus(32);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut band = |g: &SpectralGrid| {
            let modes: Vec<(f64, f64, f64, f64)> = (0..6)
                .map(|_| {
                    (
                        rng.random_range(-4..=4) as f64,
                        rng.random_range(-4..=4) as f64,
                        rng.random_range(-1.0..1.0),
                        rng.random_range(0.0..6.0),
                    )
                })
                .collect();
            ScalarField::from_fn(g, move |x| {
                modes.iter().map(|(a, b, c, ph)| c * (a * x[0] + b * x[1] + ph).cos()).sum()
            })
        };
        let u = VectorField::new(vec![band(&g), band(&g)]).unwrap();
        let f = VectorField::new(vec![band(&g), band(&g)]).unwrap();
        let th = band(&g);
        let p = pressure_from_state(&u, &th, &f).unwrap();
        let rhs = pressure_rhs(&u, &th, &f).unwrap();
        let lhs = fractional_laplacian(&p, 2.0).unwrap().forward();
        let scale = rhs.coeffs().iter().fold(0.0f64, |m, c| m.max(c.norm()));
        let res = lhs
            .coeffs()
            .iter()
            .zip(rhs.coeffs())
            .skip(1)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).norm()));
        assert!(res < 1e-10 * scale, "residual {res} vs {scale}");
    }

    #[test]
    fn eigenfunction_property_random_modes() {
        let g = torus(16);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10 {
            let m = [rng.random_range(-7..=7) as f64, rng.random_range(-7..=7) as f64];
            let kk = (m[0] * m[0] + m[1] * m[1]).sqrt();
            let f = ScalarField::from_fn(&g, |x| (m[0] * x[0] + m[1] * x[1]).cos());
            let lap = fractional_laplacian(&f, 1.3).unwrap();
            assert!(lap.max_abs_diff(&f.scale(kk.powf(1.3))) < 1e-12 * (1.0 + kk.powf(1.3)));
            let h = heat_propagate(&f, 0.2, 1.3).unwrap();
            assert!(h.max_abs_diff(&f.scale((-0.2 * kk.powf(1.3)).exp())) < 1e-12);
            if kk > 0.0 {
                let r = riesz_smoothing(&f, 0.8).unwrap();
                assert!(r.max_abs_diff(&f.scale(kk.powf(-0.8))) < 1e-12);
            }
        }
    }

    #[test]
    fn semigroup_composition() {
        let g = torus(32);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for seed in 0..5 {
            let f = random_vector(&g, 100 + seed);
            let (s, t) = (rng.random_range(0.0..2.0), rng.random_range(0.0..2.0));
            let a = heat_propagate(&heat_propagate(&f, s, 1.5).unwrap(), t, 1.5).unwrap();
            let b = heat_propagate(&f, s + t, 1.5).unwrap();
            for c in 0..2 {
                assert!(a.component(c).max_abs_diff(b.component(c)) < 1e-12);
            }
        }
    }

    #[test]
    fn kernel_argument_checks() {
        let pts = PointLattice::new(2, 8, 0.5).unwrap();
        let o = KernelOptions::default();
        assert!(kernel_physical(&MultiplierSpec::radial_power(-2.0), 1.5, 1.0, &pts, o).is_err());
        assert!(kernel_physical(&MultiplierSpec::radial_power(0.0), 1.5, 0.0, &pts, o).is_err());
        assert!(kernel_physical(
            &MultiplierSpec::radial_power(0.0),
            1.5,
            1.0,
            &pts,
            KernelOptions { refine: 2, oversize: 4 }
        )
        .is_err());
        assert!(kernel_physical(&MultiplierSpec::radial_power(-1.0), 1.5, 1.0, &pts, o).is_ok());
    }

    #[test]
    fn gaussian_kernel_oracle_small_grid() {
        let pts = PointLattice::new(2, 32, 0.25).unwrap();
        let ks = kernel_physical(&MultiplierSpec::radial_power(0.0), 2.0, 0.5, &pts, KernelOptions::default()).unwrap();
        let peak = ks.max_abs();
        let err = ks
            .points
            .iter()
            .zip(&ks.values)
            .fold(0.0f64, |m, (x, v)| m.max((v - gaussian_kernel(x, 0.5)).abs()));
        assert!(err < 1e-6 * peak, "err {err}");
    }

    #[test]
    fn poisson_closed_form_matches_radial_quadrature() {
        // K(r) = (1/2π) ∫_0^∞ ρ e^{-tρ} J0(ρ r) dρ with J0 by its integral form;
        // checks the closed form independently of the FFT evaluator.
        let t = 0.7;
        let j0 = |z: f64| {
            let m = 400;
            let h = PI / m as f64;
            (0..m).map(|i| (z * ((i as f64 + 0.5) * h).sin()).cos()).sum::<f64>() * h / PI
        };
        for r in [0.0, 0.3, 1.0, 2.5] {
            let (m, top) = (8000, 60.0 / t);
            let h = top / m as f64;
            let radial: f64 = (0..m)
                .map(|i| {
                    let rho = (i as f64 + 0.5) * h;
                    rho * (-t * rho).exp() * j0(rho * r)
                })
                .sum::<f64>()
                * h
                / (2.0 * PI);
            let closed = poisson_kernel_2d(&[r, 0.0], t);
            assert!(
                (radial - closed).abs() < 1e-5 * poisson_kernel_2d(&[0.0, 0.0], t),
                "r={r}: {radial} vs {closed}"
            );
        }
    }

    #[test]
    fn kernel_csv_has_header_and_rows() {
        let pts = PointLattice::new(2, 4, 1.0).unwrap();
        let ks = kernel_physical(&MultiplierSpec::radial_power(0.0), 2.0, 1.0, &pts, KernelOptions::default()).unwrap();
        let mut buf = Vec::new();
        ks.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t,x1,x2,value,normalized"));
        assert_eq!(text.lines().count(), 17);
    }

    #[test]
    fn leray_kernel_entries_are_real_and_odd() {
        let pts = PointLattice::new(2, 16, 0.5).unwrap();
        let ks = kernel_physical(&MultiplierSpec::leray_div(0, 1, 0), 1.5, 1.0, &pts, KernelOptions::default()).unwrap();
        assert!(ks.values.iter().all(|v| v.is_finite()));
        // Odd symbol: K(-x) = -K(x) for points with both reflections in the lattice.
        let n = pts.points_per_axis;
        let get = |i: usize, j: usize| ks.values[i * n + j];
        for i in 1..n {
            for j in 1..n {
                assert!((get(i, j) + get(n - i, n - j)).abs() < 1e-12 * ks.max_abs().max(1e-300));
            }
        }
    }
}
