//! Periodic grids, the discrete Fourier transform, spectral differentiation
//! and dealiasing.
//!
//! The torus `[0, L)^d` stands in for `R^d`. Samples are stored row-major with
//! axis 0 slowest. Wavenumber index `m` on each axis runs over
//! `-n/2+1 ..= n/2`, physical wavenumber `k = m * 2π / L`.
//!
//! The forward transform carries the `1/n^d` factor, so the zero mode is the
//! field mean and `inverse(forward(f)) = f`.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Mul, Sub};
use std::sync::{Arc, OnceLock};

use ndarray::{ArrayViewMut, Axis, IxDyn, Zip};
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::par;

struct GridInner {
    dim: usize,
    n: usize,
    length: f64,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    axis_k: Vec<f64>,
    ksq: OnceLock<Vec<f64>>,
}

/// Uniform periodic grid with `n` samples per axis on `[0, L)^d`.
#[derive(Clone)]
pub struct SpectralGrid(Arc<GridInner>);

impl fmt::Debug for SpectralGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralGrid")
            .field("d", &self.0.dim)
            .field("n", &self.0.n)
            .field("L", &self.0.length)
            .finish()
    }
}

impl PartialEq for SpectralGrid {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.dim == other.0.dim && self.0.n == other.0.n && self.0.length.to_bits() == other.0.length.to_bits())
    }
}

impl SpectralGrid {
    /// Builds a grid; rejects odd `n`, `n < 8`, `L <= 0` and `d < 2`.
    pub fn new(dim: usize, n: usize, length: f64) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidGrid(format!("dimension {dim} < 2")));
        }
        if !n.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!("odd number of samples per axis ({n})")));
        }
        if n < 8 {
            return Err(Error::InvalidGrid(format!("{n} samples per axis, need at least 8")));
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::InvalidGrid(format!("side length {length} must be positive")));
        }
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let dk = 2.0 * PI / length;
        let axis_k = (0..n).map(|i| wave_index(i, n) as f64 * dk).collect();
        Ok(Self(Arc::new(GridInner {
            dim,
            n,
            length,
            forward,
            inverse,
            axis_k,
            ksq: OnceLock::new(),
        })))
    }

    pub fn dim(&self) -> usize {
        self.0.dim
    }

    pub fn n(&self) -> usize {
        self.0.n
    }

    pub fn length(&self) -> f64 {
        self.0.length
    }

    /// Grid spacing `L / n`.
    pub fn spacing(&self) -> f64 {
        self.0.length / self.0.n as f64
    }

    /// Volume of one grid cell, `(L/n)^d`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.0.dim as i32)
    }

    /// Total number of nodes, `n^d`.
    pub fn len(&self) -> usize {
        self.0.n.pow(self.0.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Wavenumber spacing `2π / L`.
    pub fn dk(&self) -> f64 {
        2.0 * PI / self.0.length
    }

    /// Physical wavenumber for storage index `i` along any axis.
    pub fn axis_wavenumber(&self, i: usize) -> f64 {
        self.0.axis_k[i]
    }

    pub fn axis_wavenumbers(&self) -> &[f64] {
        &self.0.axis_k
    }

    /// Integer lattice index (`-n/2+1 ..= n/2`) for storage index `i`.
    pub fn wave_index(&self, i: usize) -> i64 {
        wave_index(i, self.0.n)
    }

    /// Storage index of the Nyquist mode.
    pub fn nyquist(&self) -> usize {
        self.0.n / 2
    }

    /// Storage index for lattice index `m` (taken modulo `n`).
    pub fn storage_index(&self, m: i64) -> usize {
        m.rem_euclid(self.0.n as i64) as usize
    }

    /// `|k|^2` per flat index, cached on first use.
    pub fn ksq(&self) -> &[f64] {
        self.0.ksq.get_or_init(|| {
            let mut out = vec![0.0; self.len()];
            let k = &self.0.axis_k;
            self.for_each_node_mut(&mut out, |idx, v| {
                *v = idx.iter().map(|&i| k[i] * k[i]).sum();
            });
            out
        })
    }

    /// Flat index of a multi-index.
    pub fn flat(&self, idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, &i| acc * self.0.n + i)
    }

    /// Multi-index of a flat index.
    pub fn unflat(&self, mut flat: usize) -> Vec<usize> {
        let n = self.0.n;
        let mut idx = vec![0; self.0.dim];
        for a in (0..self.0.dim).rev() {
            idx[a] = flat % n;
            flat /= n;
        }
        idx
    }

    /// Coordinates of node `idx`, `x_a = i_a * L / n`.
    pub fn node_position(&self, idx: &[usize]) -> Vec<f64> {
        let h = self.spacing();
        idx.iter().map(|&i| i as f64 * h).collect()
    }

    /// Runs `f(multi_index, &mut value)` over a node-indexed buffer, parallel over rows.
    pub fn for_each_node_mut<T, F>(&self, data: &mut [T], f: F)
    where
        T: Send,
        F: Fn(&[usize], &mut T) + Sync + Send,
    {
        assert_eq!(data.len(), self.len());
        let n = self.0.n;
        let dim = self.0.dim;
        par::for_each_chunk_mut(data, n, |row, chunk| {
            let mut idx = vec![0usize; dim];
            let mut r = row;
            for a in (0..dim - 1).rev() {
                idx[a] = r % n;
                r /= n;
            }
            for (j, v) in chunk.iter_mut().enumerate() {
                idx[dim - 1] = j;
                f(&idx, v);
            }
        });
    }

    fn fft_in_place(&self, data: &mut [Complex64], inverse: bool) {
        let fft = if inverse { &self.0.inverse } else { &self.0.forward };
        let shape = vec![self.0.n; self.0.dim];
        let mut view = ArrayViewMut::from_shape(IxDyn(&shape), data).expect("grid-shaped buffer");
        for axis in 0..self.0.dim {
            let lanes = Zip::from(view.lanes_mut(Axis(axis)));
            let run = |mut lane: ndarray::ArrayViewMut1<Complex64>| {
                if let Some(s) = lane.as_slice_mut() {
                    fft.process(s);
                } else {
                    let mut buf: Vec<Complex64> = lane.iter().copied().collect();
                    fft.process(&mut buf);
                    lane.iter_mut().zip(buf).for_each(|(o, b)| *o = b);
                }
            };
            #[cfg(feature = "parallel")]
            lanes.par_for_each(run);
            #[cfg(not(feature = "parallel"))]
            lanes.for_each(run);
        }
    }

    /// Forward transform of a complex buffer in place, normalized by `1/n^d`.
    pub fn forward_complex(&self, data: &mut [Complex64]) {
        assert_eq!(data.len(), self.len());
        self.fft_in_place(data, false);
        let norm = 1.0 / self.len() as f64;
        par::for_each_mut(data, |_, c| *c *= norm);
    }

    /// Unnormalized inverse transform of a complex buffer in place.
    pub fn inverse_complex(&self, data: &mut [Complex64]) {
        assert_eq!(data.len(), self.len());
        self.fft_in_place(data, true);
    }

    /// Checks that another grid is the same discretization.
    pub fn ensure_same(&self, other: &SpectralGrid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }
}

fn wave_index(i: usize, n: usize) -> i64 {
    if i <= n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

/// Validated constructor used throughout the crate.
pub fn make_grid(dim: usize, n: usize, length: f64) -> Result<SpectralGrid> {
    SpectralGrid::new(dim, n, length)
}

/// Complex spectral coefficients indexed by the wavenumber lattice.
#[derive(Clone, Debug)]
pub struct Spectrum {
    grid: SpectralGrid,
    coeffs: Vec<Complex64>,
}

impl Spectrum {
    pub fn new(grid: SpectralGrid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::InvalidParameter(format!(
                "{} coefficients for a grid of {} nodes",
                coeffs.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, coeffs })
    }

    pub fn zeros(grid: &SpectralGrid) -> Self {
        Self {
            grid: grid.clone(),
            coeffs: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    pub fn grid(&self) -> &SpectralGrid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// Coefficient at integer lattice wavenumber `m`.
    pub fn at(&self, m: &[i64]) -> Complex64 {
        let idx: Vec<usize> = m.iter().map(|&mi| self.grid.storage_index(mi)).collect();
        self.coeffs[self.grid.flat(&idx)]
    }

    /// Multiplies every coefficient by `symbol(k, multi_index)`.
    pub fn apply<F>(&mut self, symbol: F)
    where
        F: Fn(&[f64], &[usize]) -> Complex64 + Sync + Send,
    {
        let grid = self.grid.clone();
        let kax = grid.axis_wavenumbers();
        let dim = grid.dim();
        grid.for_each_node_mut(&mut self.coeffs, |idx, c| {
            let mut k = [0.0f64; 8];
            for a in 0..dim {
                k[a] = kax[idx[a]];
            }
            *c *= symbol(&k[..dim], idx);
        });
    }

    /// Back to physical space; the imaginary part is discarded.
    pub fn inverse(&self) -> ScalarField {
        let mut buf = self.coeffs.clone();
        self.grid.inverse_complex(&mut buf);
        ScalarField {
            grid: self.grid.clone(),
            samples: buf.into_iter().map(|c| c.re).collect(),
        }
    }

    /// Largest violation of `c(-k) = conj(c(k))`.
    pub fn conjugate_symmetry_defect(&self) -> f64 {
        let g = &self.grid;
        let n = g.n();
        let mut worst = 0.0f64;
        for flat in 0..g.len() {
            let idx = g.unflat(flat);
            let neg: Vec<usize> = idx.iter().map(|&i| (n - i) % n).collect();
            let d = (self.coeffs[flat] - self.coeffs[g.flat(&neg)].conj()).norm();
            worst = worst.max(d);
        }
        worst
    }
}

/// Zeroes every mode with some `|m_j| > floor(n/3)` (two-thirds rule).
pub fn dealias(spec: &Spectrum) -> Spectrum {
    let mut out = spec.clone();
    dealias_in_place(&mut out);
    out
}

pub fn dealias_in_place(spec: &mut Spectrum) {
    let grid = spec.grid.clone();
    let cutoff = (grid.n() / 3) as i64;
    grid.for_each_node_mut(&mut spec.coeffs, |idx, c| {
        if idx.iter().any(|&i| wave_index(i, grid.n()).abs() > cutoff) {
            *c = Complex64::new(0.0, 0.0);
        }
    });
}

/// Real samples on a grid.
#[derive(Clone, Debug)]
pub struct ScalarField {
    grid: SpectralGrid,
    samples: Vec<f64>,
}

impl ScalarField {
    /// Wraps samples; rejects a length mismatch or non-finite values.
    pub fn new(grid: SpectralGrid, samples: Vec<f64>) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::InvalidParameter(format!(
                "{} samples for a grid of {} nodes",
                samples.len(),
                grid.len()
            )));
        }
        if let Some(bad) = samples.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!("non-finite sample {bad}")));
        }
        Ok(Self { grid, samples })
    }

    pub(crate) fn from_raw(grid: SpectralGrid, samples: Vec<f64>) -> Self {
        debug_assert_eq!(samples.len(), grid.len());
        Self { grid, samples }
    }

    pub fn zeros(grid: &SpectralGrid) -> Self {
        Self {
            grid: grid.clone(),
            samples: vec![0.0; grid.len()],
        }
    }

    pub fn constant(grid: &SpectralGrid, c: f64) -> Self {
        Self {
            grid: grid.clone(),
            samples: vec![c; grid.len()],
        }
    }

    /// Samples `f(x)` at every node.
    pub fn from_fn<F>(grid: &SpectralGrid, f: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Sync + Send,
    {
        let h = grid.spacing();
        let dim = grid.dim();
        let mut samples = vec![0.0; grid.len()];
        grid.for_each_node_mut(&mut samples, |idx, v| {
            let mut x = [0.0f64; 8];
            for a in 0..dim {
                x[a] = idx[a] as f64 * h;
            }
            *v = f(&x[..dim]);
        });
        Self {
            grid: grid.clone(),
            samples,
        }
    }

    pub fn grid(&self) -> &SpectralGrid {
        &self.grid
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn samples_mut(&mut self) -> &mut [f64] {
        &mut self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn forward(&self) -> Spectrum {
        let mut buf: Vec<Complex64> = self.samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.grid.forward_complex(&mut buf);
        Spectrum {
            grid: self.grid.clone(),
            coeffs: buf,
        }
    }

    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.samples.len() as f64
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Discrete `L^p` norm, `(h^d Σ |f|^p)^{1/p}`.
    pub fn lp_norm(&self, p: f64) -> f64 {
        let s: f64 = self.samples.iter().map(|v| v.abs().powf(p)).sum();
        (s * self.grid.cell_volume()).powf(1.0 / p)
    }

    pub fn l2_norm(&self) -> f64 {
        let s: f64 = self.samples.iter().map(|v| v * v).sum();
        (s * self.grid.cell_volume()).sqrt()
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            grid: self.grid.clone(),
            samples: self.samples.iter().map(|v| c * v).collect(),
        }
    }

    /// Pointwise combination of two fields on the same grid.
    pub fn zip_with<F>(&self, other: &Self, f: F) -> Result<Self>
    where
        F: Fn(f64, f64) -> f64,
    {
        self.grid.ensure_same(&other.grid)?;
        Ok(Self {
            grid: self.grid.clone(),
            samples: self.samples.iter().zip(&other.samples).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    /// `self += c * other`.
    pub fn axpy(&mut self, c: f64, other: &Self) -> Result<()> {
        self.grid.ensure_same(&other.grid)?;
        self.samples.iter_mut().zip(&other.samples).for_each(|(a, b)| *a += c * b);
        Ok(())
    }

    /// Applies a Fourier multiplier and returns to physical space.
    pub fn apply_symbol<F>(&self, symbol: F) -> Self
    where
        F: Fn(&[f64], &[usize]) -> Complex64 + Sync + Send,
    {
        let mut s = self.forward();
        s.apply(symbol);
        s.inverse()
    }

    /// Max abs difference to another field.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.samples
            .iter()
            .zip(&other.samples)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
    }
}

impl Add for &ScalarField {
    type Output = ScalarField;
    fn add(self, rhs: Self) -> ScalarField {
        self.zip_with(rhs, |a, b| a + b).expect("same grid")
    }
}

impl Sub for &ScalarField {
    type Output = ScalarField;
    fn sub(self, rhs: Self) -> ScalarField {
        self.zip_with(rhs, |a, b| a - b).expect("same grid")
    }
}

impl Mul<f64> for &ScalarField {
    type Output = ScalarField;
    fn mul(self, c: f64) -> ScalarField {
        self.scale(c)
    }
}

/// `d`-component vector field sharing one grid.
#[derive(Clone, Debug)]
pub struct VectorField {
    components: Vec<ScalarField>,
}

impl VectorField {
    pub fn new(components: Vec<ScalarField>) -> Result<Self> {
        let first = components
            .first()
            .ok_or_else(|| Error::InvalidParameter("vector field with no components".into()))?;
        for c in &components[1..] {
            first.grid.ensure_same(&c.grid)?;
        }
        Ok(Self { components })
    }

    pub fn zeros(grid: &SpectralGrid) -> Self {
        Self {
            components: (0..grid.dim()).map(|_| ScalarField::zeros(grid)).collect(),
        }
    }

    pub fn from_fn<F>(grid: &SpectralGrid, f: F) -> Self
    where
        F: Fn(&[f64]) -> Vec<f64> + Sync + Send,
    {
        let comps = (0..grid.dim()).map(|a| ScalarField::from_fn(grid, |x| f(x)[a])).collect();
        Self { components: comps }
    }

    pub fn grid(&self) -> &SpectralGrid {
        &self.components[0].grid
    }

    pub fn components(&self) -> &[ScalarField] {
        &self.components
    }

    pub fn components_mut(&mut self) -> &mut [ScalarField] {
        &mut self.components
    }

    pub fn into_components(self) -> Vec<ScalarField> {
        self.components
    }

    pub fn component(&self, a: usize) -> &ScalarField {
        &self.components[a]
    }

    /// Pointwise Euclidean magnitude.
    pub fn magnitude(&self) -> ScalarField {
        let len = self.grid().len();
        let samples = (0..len)
            .map(|i| self.components.iter().map(|c| c.samples[i] * c.samples[i]).sum::<f64>().sqrt())
            .collect();
        ScalarField::from_raw(self.grid().clone(), samples)
    }

    pub fn max_abs(&self) -> f64 {
        self.components.iter().fold(0.0f64, |m, c| m.max(c.max_abs()))
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            components: self.components.iter().map(|f| f.scale(c)).collect(),
        }
    }
}

/// Common interface of scalar and vector fields; multipliers act component-wise.
pub trait Field: Clone + Send + Sync + fmt::Debug {
    fn grid(&self) -> &SpectralGrid;
    fn scalar_components(&self) -> Vec<&ScalarField>;
    fn from_scalar_components(components: Vec<ScalarField>) -> Result<Self>;
    fn zeros_like(&self) -> Self;

    /// Applies `f` to every scalar component.
    fn try_map<F>(&self, f: F) -> Result<Self>
    where
        F: Fn(&ScalarField) -> Result<ScalarField>,
    {
        let comps = self.scalar_components().into_iter().map(f).collect::<Result<Vec<_>>>()?;
        Self::from_scalar_components(comps)
    }

    fn map<F>(&self, f: F) -> Self
    where
        F: Fn(&ScalarField) -> ScalarField,
    {
        let comps = self.scalar_components().into_iter().map(f).collect();
        Self::from_scalar_components(comps).expect("component count preserved")
    }

    /// Pointwise Euclidean magnitude (absolute value for scalars).
    fn pointwise_magnitude(&self) -> Vec<f64> {
        let comps = self.scalar_components();
        let len = self.grid().len();
        if comps.len() == 1 {
            return comps[0].samples.iter().map(|v| v.abs()).collect();
        }
        (0..len)
            .map(|i| comps.iter().map(|c| c.samples[i] * c.samples[i]).sum::<f64>().sqrt())
            .collect()
    }

    fn combine(&self, a: f64, other: &Self, b: f64) -> Result<Self> {
        let comps = self
            .scalar_components()
            .into_iter()
            .zip(other.scalar_components())
            .map(|(x, y)| x.zip_with(y, |u, v| a * u + b * v))
            .collect::<Result<Vec<_>>>()?;
        Self::from_scalar_components(comps)
    }

    fn scaled(&self, c: f64) -> Self {
        self.map(|f| f.scale(c))
    }

    fn max_abs(&self) -> f64 {
        self.scalar_components().iter().fold(0.0f64, |m, c| m.max(c.max_abs()))
    }

    /// Discrete L² norm summed over components.
    fn l2_norm(&self) -> f64 {
        self.scalar_components().iter().map(|c| c.l2_norm().powi(2)).sum::<f64>().sqrt()
    }
}

impl Field for ScalarField {
    fn grid(&self) -> &SpectralGrid {
        &self.grid
    }
    fn scalar_components(&self) -> Vec<&ScalarField> {
        vec![self]
    }
    fn from_scalar_components(mut components: Vec<ScalarField>) -> Result<Self> {
        if components.len() != 1 {
            return Err(Error::InvalidParameter("scalar field needs exactly one component".into()));
        }
        Ok(components.pop().unwrap())
    }
    fn zeros_like(&self) -> Self {
        ScalarField::zeros(&self.grid)
    }
}

impl Field for VectorField {
    fn grid(&self) -> &SpectralGrid {
        VectorField::grid(self)
    }
    fn scalar_components(&self) -> Vec<&ScalarField> {
        self.components.iter().collect()
    }
    fn from_scalar_components(components: Vec<ScalarField>) -> Result<Self> {
        VectorField::new(components)
    }
    fn zeros_like(&self) -> Self {
        Self {
            components: self.components.iter().map(|c| ScalarField::zeros(&c.grid)).collect(),
        }
    }
}

fn derivative_symbol(grid: &SpectralGrid, axis: usize) -> impl Fn(&[f64], &[usize]) -> Complex64 + Sync + Send {
    let nyq = grid.nyquist();
    move |k: &[f64], idx: &[usize]| {
        if idx[axis] == nyq {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(0.0, k[axis])
        }
    }
}

/// `∂_axis f` by multiplication with `i k_axis`; the Nyquist mode is zeroed.
pub fn spectral_derivative(field: &ScalarField, axis: usize) -> Result<ScalarField> {
    if axis >= field.grid.dim() {
        return Err(Error::InvalidParameter(format!(
            "axis {axis} out of range for dimension {}",
            field.grid.dim()
        )));
    }
    Ok(field.apply_symbol(derivative_symbol(&field.grid, axis)))
}

/// Derivative of a spectrum in place (no round trip).
pub fn differentiate_spectrum(spec: &mut Spectrum, axis: usize) {
    let sym = derivative_symbol(&spec.grid, axis);
    spec.apply(sym);
}

pub fn gradient(field: &ScalarField) -> VectorField {
    let spec = field.forward();
    let comps = (0..field.grid.dim())
        .map(|a| {
            let mut s = spec.clone();
            differentiate_spectrum(&mut s, a);
            s.inverse()
        })
        .collect();
    VectorField { components: comps }
}

pub fn divergence(v: &VectorField) -> ScalarField {
    let grid = v.grid().clone();
    let mut acc = Spectrum::zeros(&grid);
    for (a, c) in v.components.iter().enumerate() {
        let mut s = c.forward();
        differentiate_spectrum(&mut s, a);
        acc.coeffs.iter_mut().zip(&s.coeffs).for_each(|(x, y)| *x += y);
    }
    acc.inverse()
}

/// Spectral Laplacian, multiplier `-|k|^2` with Nyquist-axis factors dropped
/// so that it equals `divergence(gradient(f))` exactly.
pub fn laplacian(field: &ScalarField) -> ScalarField {
    let nyq = field.grid.nyquist();
    field.apply_symbol(move |k, idx| {
        let s: f64 = k.iter().zip(idx).filter(|(_, &i)| i != nyq).map(|(kk, _)| kk * kk).sum();
        Complex64::new(-s, 0.0)
    })
}
