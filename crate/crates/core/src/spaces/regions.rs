//! Region sums behind every Morrey-type sup.
//!
//! A norm estimate is `max r^{-e} (∑_R w |ψ|^p)^{1/p}` over a finite family of
//! regions `R` (center × radius, plus a time center for parabolic norms). The
//! family depends only on the grid, the time nodes and [`SupOptions`], never
//! on the exponents, so several densities can be compared region by region.

use serde::{Deserialize, Serialize};

use crate::par;
use crate::spectral::SpectralGrid;

/// Shape of the spatial section of a region.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Geometry {
    /// Euclidean balls; parabolic regions `|t-s|^{1/α} + |x-y| <= r`.
    Ball,
    /// Cubes `|x-y|_∞ <= r`; parabolic regions add `|t-s| <= r^α`.
    Box,
}

/// Discretization of the sup over centers.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupOptions {
    pub geometry: Geometry,
    /// Spatial center stride in nodes; `None` means `max(n/16, 1)`.
    pub center_stride: Option<usize>,
    /// Every `time_stride`-th time node is a time center.
    pub time_stride: usize,
}

impl SupOptions {
    /// Default for spatial Morrey norms (balls).
    pub fn spatial() -> Self {
        Self {
            geometry: Geometry::Ball,
            center_stride: None,
            time_stride: 4,
        }
    }

    /// Default for parabolic norms (boxes).
    pub fn parabolic() -> Self {
        Self {
            geometry: Geometry::Box,
            center_stride: None,
            time_stride: 4,
        }
    }

    pub fn with_geometry(self, geometry: Geometry) -> Self {
        Self { geometry, ..self }
    }

    /// Every node is a center.
    pub fn exhaustive(self) -> Self {
        Self {
            center_stride: Some(1),
            time_stride: 1,
            ..self
        }
    }

    pub fn stride(&self, n: usize) -> usize {
        self.center_stride.unwrap_or((n / 16).max(1)).max(1)
    }

    /// Halves both strides; the refined center set contains the coarse one.
    pub fn refined(self, n: usize) -> Self {
        Self {
            center_stride: Some((self.stride(n) / 2).max(1)),
            time_stride: (self.time_stride / 2).max(1),
            ..self
        }
    }
}

/// Minimal-image offsets sorted by Euclidean length (lattice units).
struct BallOffsets {
    dist: Vec<f64>,
    offsets: Vec<i64>,
}

impl BallOffsets {
    fn new(grid: &SpectralGrid) -> Self {
        let (n, dim) = (grid.n(), grid.dim());
        let mut items: Vec<(f64, Vec<i64>)> = (0..grid.len())
            .map(|j| {
                let o: Vec<i64> = grid
                    .unflat(j)
                    .into_iter()
                    .map(|i| if i < n / 2 { i as i64 } else { i as i64 - n as i64 })
                    .collect();
                let d = o.iter().map(|&v| (v * v) as f64).sum::<f64>().sqrt();
                (d, o)
            })
            .collect();
        items.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut offsets = Vec::with_capacity(items.len() * dim);
        let dist = items
            .into_iter()
            .map(|(d, o)| {
                offsets.extend(o);
                d
            })
            .collect();
        Self { dist, offsets }
    }

    /// Node indices around `center`, nearest first.
    fn order(&self, grid: &SpectralGrid, center: &[usize]) -> Vec<usize> {
        let (n, dim) = (grid.n() as i64, grid.dim());
        let mut idx = vec![0usize; dim];
        self.offsets
            .chunks(dim)
            .map(|o| {
                for a in 0..dim {
                    idx[a] = (center[a] as i64 + o[a]).rem_euclid(n) as usize;
                }
                grid.flat(&idx)
            })
            .collect()
    }

    /// Number of offsets within `rho` lattice units.
    fn count(&self, rho: f64) -> usize {
        self.dist.partition_point(|&d| d <= rho + 1e-9)
    }
}

/// Periodic sums over windows `[i-m, i+m]^d` at every node.
pub(crate) fn box_window_sum(n: usize, dim: usize, data: &[f64], m: usize) -> Vec<f64> {
    let len = data.len();
    let w = 2 * m + 1;
    let mut cur = data.to_vec();
    let mut lane = vec![0.0; n];
    let mut prefix = vec![0.0; 3 * n + 1];
    for a in 0..dim {
        let stride = n.pow((dim - 1 - a) as u32);
        let mut next = vec![0.0; len];
        for outer in 0..len / (stride * n) {
            for inner in 0..stride {
                let base = outer * stride * n + inner;
                for j in 0..n {
                    lane[j] = cur[base + j * stride];
                }
                if w >= n {
                    let total: f64 = lane.iter().sum();
                    for j in 0..n {
                        next[base + j * stride] = total;
                    }
                } else if w <= 16 {
                    for j in 0..n {
                        let mut s = 0.0;
                        for o in 0..w {
                            s += lane[(j + n + o - m) % n];
                        }
                        next[base + j * stride] = s;
                    }
                } else {
                    prefix[0] = 0.0;
                    for k in 0..3 * n {
                        prefix[k + 1] = prefix[k] + lane[k % n];
                    }
                    for j in 0..n {
                        let start = j + n - m;
                        next[base + j * stride] = prefix[start + w] - prefix[start];
                    }
                }
            }
        }
        cur = next;
    }
    cur
}

/// A finite family of (parabolic) regions on one grid and time grid.
pub(crate) struct Regions {
    grid: SpectralGrid,
    times: Vec<f64>,
    weights: Vec<f64>,
    alpha: Option<f64>,
    geometry: Geometry,
    centers: Vec<Vec<usize>>,
    time_centers: Vec<usize>,
    radii: Vec<f64>,
    ball: Option<BallOffsets>,
}

fn center_lattice(grid: &SpectralGrid, stride: usize) -> Vec<Vec<usize>> {
    let per_axis: Vec<usize> = (0..grid.n()).step_by(stride).collect();
    let dim = grid.dim();
    let total = per_axis.len().pow(dim as u32);
    (0..total)
        .map(|mut f| {
            let mut c = vec![0usize; dim];
            for a in (0..dim).rev() {
                c[a] = per_axis[f % per_axis.len()];
                f /= per_axis.len();
            }
            c
        })
        .collect()
}

impl Regions {
    /// Regions of the spatial Morrey sup.
    pub(crate) fn spatial(grid: &SpectralGrid, opts: &SupOptions) -> Self {
        Self::build(grid, vec![0.0], vec![1.0], None, opts)
    }

    /// Regions of the parabolic sup over the given time nodes.
    pub(crate) fn parabolic(grid: &SpectralGrid, times: &[f64], weights: Vec<f64>, alpha: f64, opts: &SupOptions) -> Self {
        Self::build(grid, times.to_vec(), weights, Some(alpha), opts)
    }

    fn build(grid: &SpectralGrid, times: Vec<f64>, weights: Vec<f64>, alpha: Option<f64>, opts: &SupOptions) -> Self {
        let h = grid.spacing();
        let half = (grid.n() / 2) as f64 * h;
        let cover = match opts.geometry {
            Geometry::Ball => half * (grid.dim() as f64).sqrt(),
            Geometry::Box => half,
        };
        let span = times.last().unwrap() - times[0];
        let mut radii = vec![h];
        loop {
            let r = *radii.last().unwrap();
            let time_ok = alpha.is_none_or(|a| r.powf(a) >= span);
            if r >= cover * (1.0 - 1e-12) && time_ok {
                break;
            }
            radii.push(2.0 * r);
        }
        let time_centers = if alpha.is_some() {
            (0..times.len()).step_by(opts.time_stride.max(1)).collect()
        } else {
            vec![0]
        };
        let ball = (opts.geometry == Geometry::Ball).then(|| BallOffsets::new(grid));
        Self {
            grid: grid.clone(),
            times,
            weights,
            alpha,
            geometry: opts.geometry,
            centers: center_lattice(grid, opts.stride(grid.n())),
            time_centers,
            radii,
            ball,
        }
    }

    pub(crate) fn len(&self) -> usize {
        self.time_centers.len() * self.centers.len() * self.radii.len()
    }

    /// Radius of region `i` (layout: time center, space center, radius).
    pub(crate) fn radius(&self, i: usize) -> f64 {
        self.radii[i % self.radii.len()]
    }

    /// Homogeneous dimension of the regions: `d` or `d + α`.
    pub(crate) fn homogeneous_dim(&self) -> f64 {
        self.grid.dim() as f64 + self.alpha.unwrap_or(0.0)
    }

    fn in_time_window(&self, dt: f64, r: f64) -> bool {
        match self.alpha {
            None => true,
            Some(a) => dt <= r.powf(a) * (1.0 + 1e-9),
        }
    }

    /// `∑_R w |ψ|^p` for every region, with node densities given per time node.
    pub(crate) fn sums(&self, densities: &[Vec<f64>]) -> Vec<f64> {
        assert_eq!(densities.len(), self.times.len());
        let vol = self.grid.cell_volume();
        let nr = self.radii.len();
        let nc = self.centers.len();
        let ntc = self.time_centers.len();
        let mut out = vec![0.0; self.len()];
        match self.geometry {
            Geometry::Ball => {
                let ball = self.ball.as_ref().unwrap();
                let h = self.grid.spacing();
                let per_center = par::map_range(nc, |ci| {
                    let order = ball.order(&self.grid, &self.centers[ci]);
                    let prefixes: Vec<Vec<f64>> = densities
                        .iter()
                        .map(|den| {
                            let mut acc = 0.0;
                            let mut v = Vec::with_capacity(order.len() + 1);
                            v.push(0.0);
                            for &j in &order {
                                acc += den[j];
                                v.push(acc);
                            }
                            v
                        })
                        .collect();
                    let mut local = vec![0.0; ntc * nr];
                    for (ti, &tc) in self.time_centers.iter().enumerate() {
                        for (ri, &r) in self.radii.iter().enumerate() {
                            let mut s = 0.0;
                            for (si, pre) in prefixes.iter().enumerate() {
                                let dt = (self.times[si] - self.times[tc]).abs();
                                if !self.in_time_window(dt, r) {
                                    continue;
                                }
                                let rho = match self.alpha {
                                    None => r,
                                    Some(a) => (r - dt.powf(1.0 / a)).max(0.0),
                                };
                                s += self.weights[si] * pre[ball.count(rho / h)];
                            }
                            local[ti * nr + ri] = s * vol;
                        }
                    }
                    local
                });
                for (ci, local) in per_center.into_iter().enumerate() {
                    for ti in 0..ntc {
                        for ri in 0..nr {
                            out[(ti * nc + ci) * nr + ri] = local[ti * nr + ri];
                        }
                    }
                }
            }
            Geometry::Box => {
                let (n, dim) = (self.grid.n(), self.grid.dim());
                let h = self.grid.spacing();
                let flat_centers: Vec<usize> = self.centers.iter().map(|c| self.grid.flat(c)).collect();
                for (ri, &r) in self.radii.iter().enumerate() {
                    let m = (r / h + 1e-9).floor() as usize;
                    let windows: Vec<Vec<f64>> = par::map_slice(densities, |den| {
                        let w = box_window_sum(n, dim, den, m);
                        flat_centers.iter().map(|&c| w[c]).collect()
                    });
                    let block = par::map_range(ntc * nc, |k| {
                        let (ti, ci) = (k / nc, k % nc);
                        let tc = self.time_centers[ti];
                        let mut s = 0.0;
                        for (si, win) in windows.iter().enumerate() {
                            let dt = (self.times[si] - self.times[tc]).abs();
                            if self.in_time_window(dt, r) {
                                s += self.weights[si] * win[ci];
                            }
                        }
                        s * vol
                    });
                    for (k, v) in block.into_iter().enumerate() {
                        out[k * nr + ri] = v;
                    }
                }
            }
        }
        out
    }

    /// `max_R r^{-e} sum_R^{1/p}` with `e = hom_dim (1/p - 1/q)`.
    pub(crate) fn sup(&self, sums: &[f64], p: f64, q: f64) -> f64 {
        let e = self.homogeneous_dim() * (1.0 / p - 1.0 / q);
        let scales: Vec<f64> = self.radii.iter().map(|r| r.powf(-e)).collect();
        let nr = self.radii.len();
        sums.iter()
            .enumerate()
            .fold(0.0f64, |m, (i, &s)| m.max(scales[i % nr] * s.max(0.0).powf(1.0 / p)))
    }

    /// Region-wise normalized values `r^{-e} sum^{1/p}`.
    pub(crate) fn normalized(&self, sums: &[f64], p: f64, q: f64) -> Vec<f64> {
        let e = self.homogeneous_dim() * (1.0 / p - 1.0 / q);
        sums.iter()
            .enumerate()
            .map(|(i, &s)| self.radius(i).powf(-e) * s.max(0.0).powf(1.0 / p))
            .collect()
    }
}
