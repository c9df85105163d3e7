use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{BoussinesqState, Solver, SolverConfig};
use crate::error::{Error, Result};
use crate::io::{curl_velocity, random_profile, DataFamily};
use crate::spaces::heat_extension;

/// Empirical operator norms of the linear and bilinear terms.
#[derive(Clone, Debug, Serialize)]
pub struct ConstantEstimate {
    /// `max ‖L(U)‖_E / ‖U‖_E`.
    pub linear: f64,
    /// `max ‖B(U,V)‖_E / (‖U‖_E ‖V‖_E)`.
    pub bilinear: f64,
    pub weight: f64,
    pub probes: usize,
    /// Probes dropped for having zero norm.
    pub skipped: usize,
}

pub const MIN_PROBES: usize = 20;

impl Solver {
    /// Seeded probe family: heat extensions of random divergence-free
    /// velocities and mean-free temperatures with mixed families.
    pub fn probe_family(&self, count: usize, seed: u64) -> Result<Vec<BoussinesqState>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let alpha = self.config.alpha;
        (0..count)
            .map(|i| {
                let family = DataFamily::ALL[i % DataFamily::ALL.len()];
                let max_mode = rng.random_range(1..=4);
                let amp = rng.random_range(0.5e-3..1e-3);
                let u0 = curl_velocity(family, &self.grid, max_mode, &mut rng)?.scale(amp);
                let th = random_profile(family, &self.grid, max_mode, &mut rng);
                let mean = th.mean();
                let th0 = th.zip_with(&th, |x, _| (x - mean) * amp)?;
                BoussinesqState::new(
                    heat_extension(&u0, alpha, self.times.clone())?,
                    heat_extension(&th0, alpha, self.times.clone())?,
                )
            })
            .collect()
    }

    /// Estimates the operator norms over a probe family. Each probe also
    /// enters with its velocity removed, which realizes the sup of
    /// `‖L(U)‖_E / ‖U‖_E` along the ray `u → 0`.
    pub fn estimate_constants_on(&self, probes: &[BoussinesqState]) -> Result<ConstantEstimate> {
        Ok(self.estimate_for_weights(probes, &[self.config.weight])?.remove(0))
    }

    /// Same estimate for several weights `𝔠`: the velocity and temperature
    /// parts of every norm are computed once and recombined per weight.
    pub fn estimate_for_weights(&self, probes: &[BoussinesqState], weights: &[f64]) -> Result<Vec<ConstantEstimate>> {
        if probes.len() < MIN_PROBES {
            return Err(Error::InvalidParameter(format!(
                "need at least {MIN_PROBES} probes, got {}",
                probes.len()
            )));
        }
        if weights.iter().any(|w| !(*w >= 1.0)) {
            return Err(Error::InvalidParameter(format!("weights {weights:?} must be at least 1")));
        }
        let mut parts = Vec::with_capacity(probes.len());
        let mut kept = Vec::new();
        for p in probes {
            let (a, b) = self.e_norm_parts(p)?;
            if a + b > 0.0 && (a + b).is_finite() {
                parts.push((a, b));
                kept.push(p);
            } else {
                parts.push((0.0, 0.0));
            }
        }
        let skipped = probes.len() - kept.len();
        let parts: Vec<(f64, f64)> = parts.into_iter().filter(|(a, b)| a + b > 0.0).collect();
        // (image parts, source parts) for every linear and bilinear evaluation.
        let mut linear = Vec::new();
        for (p, &pp) in kept.iter().zip(&parts) {
            linear.push((self.e_norm_parts(&self.apply_linear(p)?)?, pp));
            let thermal = BoussinesqState::new(p.velocity.zeros_like(), p.temperature.clone())?;
            linear.push((self.e_norm_parts(&self.apply_linear(&thermal)?)?, (0.0, pp.1)));
        }
        let mut bilinear = Vec::new();
        for i in 0..kept.len() {
            let j = (i + 1) % kept.len();
            for k in [j, i] {
                bilinear.push((self.e_norm_parts(&self.apply_bilinear(kept[i], kept[k])?)?, parts[i], parts[k]));
            }
        }
        Ok(weights
            .iter()
            .map(|&w| {
                let e = |(a, b): (f64, f64)| a + w * b;
                let lin = linear
                    .iter()
                    .filter(|(_, s)| e(*s) > 0.0)
                    .fold(0.0f64, |m, (img, s)| m.max(e(*img) / e(*s)));
                let bil = bilinear.iter().fold(0.0f64, |m, (img, a, b)| m.max(e(*img) / (e(*a) * e(*b))));
                ConstantEstimate {
                    linear: lin,
                    bilinear: bil,
                    weight: w,
                    probes: kept.len(),
                    skipped,
                }
            })
            .collect())
    }
}

/// Constant estimates on `count` seeded probes.
pub fn estimate_constants(config: &SolverConfig, count: usize, seed: u64) -> Result<ConstantEstimate> {
    let s = Solver::new(config.clone())?;
    let probes = s.probe_family(count, seed)?;
    s.estimate_constants_on(&probes)
}

/// Constant estimates for each weight in `weights`, sharing one probe family.
pub fn estimate_constants_sweep(config: &SolverConfig, weights: &[f64], count: usize, seed: u64) -> Result<Vec<ConstantEstimate>> {
    let s = Solver::new(config.clone())?;
    let probes = s.probe_family(count, seed)?;
    s.estimate_for_weights(&probes, weights)
}
