use crate::error::{Error, Result};
use crate::operators::heat_propagate;
use crate::par;
use crate::spectral::{Field, SpectralGrid};

/// Minimum number of time nodes in a trajectory.
pub const MIN_TIMES: usize = 8;

/// Time-indexed fields on one spatial grid.
#[derive(Clone, Debug)]
pub struct Trajectory<F> {
    times: Vec<f64>,
    snapshots: Vec<F>,
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.len() < MIN_TIMES {
        return Err(Error::InvalidParameter(format!(
            "trajectory needs at least {MIN_TIMES} times (got {})",
            times.len()
        )));
    }
    if !(times[0] >= 0.0) || times.windows(2).any(|w| !(w[1] > w[0])) || !times.iter().all(|t| t.is_finite()) {
        return Err(Error::InvalidParameter(
            "trajectory times must be finite, >= 0 and strictly increasing".into(),
        ));
    }
    Ok(())
}

impl<F: Field> Trajectory<F> {
    pub fn new(times: Vec<f64>, snapshots: Vec<F>) -> Result<Self> {
        check_times(&times)?;
        if snapshots.len() != times.len() {
            return Err(Error::InvalidParameter(format!(
                "{} snapshots for {} times",
                snapshots.len(),
                times.len()
            )));
        }
        let g = snapshots[0].grid();
        for s in &snapshots[1..] {
            g.ensure_same(s.grid())?;
        }
        Ok(Self { times, snapshots })
    }

    /// Samples `f(t)` at every time, in parallel.
    pub fn from_fn<G>(times: Vec<f64>, f: G) -> Result<Self>
    where
        G: Fn(f64) -> F + Sync + Send,
    {
        check_times(&times)?;
        let snapshots = par::map_slice(&times, |&t| f(t));
        Self::new(times, snapshots)
    }

    pub fn try_from_fn<G>(times: Vec<f64>, f: G) -> Result<Self>
    where
        G: Fn(f64) -> Result<F> + Sync + Send,
    {
        check_times(&times)?;
        let snapshots = par::map_slice(&times, |&t| f(t)).into_iter().collect::<Result<Vec<_>>>()?;
        Self::new(times, snapshots)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn snapshots(&self) -> &[F] {
        &self.snapshots
    }

    pub fn snapshots_mut(&mut self) -> &mut [F] {
        &mut self.snapshots
    }

    pub fn into_snapshots(self) -> Vec<F> {
        self.snapshots
    }

    pub fn snapshot(&self, i: usize) -> &F {
        &self.snapshots[i]
    }

    pub fn last(&self) -> &F {
        self.snapshots.last().expect("non-empty trajectory")
    }

    pub fn grid(&self) -> &SpectralGrid {
        self.snapshots[0].grid()
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Applies `f` to every snapshot in parallel, keeping the time grid.
    pub fn map<G, H>(&self, f: H) -> Trajectory<G>
    where
        G: Field,
        H: Fn(&F) -> G + Sync + Send,
    {
        Trajectory {
            times: self.times.clone(),
            snapshots: par::map_slice(&self.snapshots, f),
        }
    }

    pub fn try_map<G, H>(&self, f: H) -> Result<Trajectory<G>>
    where
        G: Field,
        H: Fn(&F) -> Result<G> + Sync + Send,
    {
        let snapshots = par::map_slice(&self.snapshots, f).into_iter().collect::<Result<Vec<_>>>()?;
        Ok(Trajectory {
            times: self.times.clone(),
            snapshots,
        })
    }

    pub fn scaled(&self, c: f64) -> Self {
        self.map(|s| s.scaled(c))
    }

    /// `a * self + b * other` snapshot-wise.
    pub fn combine(&self, a: f64, other: &Self, b: f64) -> Result<Self> {
        self.ensure_compatible(other)?;
        let snapshots = par::map_range(self.len(), |i| self.snapshots[i].combine(a, &other.snapshots[i], b))
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            times: self.times.clone(),
            snapshots,
        })
    }

    pub fn zeros_like(&self) -> Self {
        self.map(|s| s.zeros_like())
    }

    /// Same time grid and same spatial grid.
    pub fn ensure_compatible<G: Field>(&self, other: &Trajectory<G>) -> Result<()> {
        self.grid().ensure_same(other.grid())?;
        if self.times.len() != other.times.len()
            || self
                .times
                .iter()
                .zip(&other.times)
                .any(|(a, b)| (a - b).abs() > 1e-12 * a.abs().max(1.0))
        {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }

    /// Trapezoid weights of the time nodes.
    pub fn time_weights(&self) -> Vec<f64> {
        trapezoid_weights(&self.times)
    }

    /// Largest pointwise magnitude over all snapshots.
    pub fn max_abs(&self) -> f64 {
        self.snapshots.iter().fold(0.0f64, |m, s| m.max(s.max_abs()))
    }

    /// Largest snapshot-wise difference in sup norm.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        Ok(self.combine(1.0, other, -1.0)?.max_abs())
    }
}

pub fn trapezoid_weights(times: &[f64]) -> Vec<f64> {
    let n = times.len();
    (0..n)
        .map(|i| {
            let left = if i > 0 { times[i] - times[i - 1] } else { 0.0 };
            let right = if i + 1 < n { times[i + 1] - times[i] } else { 0.0 };
            0.5 * (left + right)
        })
        .collect()
}

/// `intervals + 1` nodes on `[0, t_end]` with step sizes growing geometrically
/// by the factor `exp(grading / intervals)`. Doubling `intervals` nests the grid.
pub fn graded_times(t_end: f64, intervals: usize, grading: f64) -> Result<Vec<f64>> {
    if !(t_end > 0.0) || intervals + 1 < MIN_TIMES || !(grading >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "graded time grid needs T > 0, at least {} intervals and grading >= 0",
            MIN_TIMES - 1
        )));
    }
    if grading == 0.0 {
        return uniform_times(t_end, intervals);
    }
    let denom = grading.exp_m1();
    Ok((0..=intervals)
        .map(|i| {
            if i == intervals {
                t_end
            } else {
                t_end * (grading * i as f64 / intervals as f64).exp_m1() / denom
            }
        })
        .collect())
}

pub fn uniform_times(t_end: f64, intervals: usize) -> Result<Vec<f64>> {
    if !(t_end > 0.0) || intervals + 1 < MIN_TIMES {
        return Err(Error::InvalidParameter("uniform time grid needs T > 0 and enough intervals".into()));
    }
    Ok((0..=intervals).map(|i| t_end * i as f64 / intervals as f64).collect())
}

/// The heat extension `t -> e^{-t(-Δ)^{α/2}} f` sampled at `times`.
pub fn heat_extension<F: Field>(f: &F, alpha: f64, times: Vec<f64>) -> Result<Trajectory<F>> {
    Trajectory::try_from_fn(times, |t| heat_propagate(f, t, alpha))
}
