use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::solver::ProblemData;
use crate::spaces::Trajectory;
use crate::spectral::{spectral_derivative, ScalarField, SpectralGrid, VectorField};

/// Families of seeded test data.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DataFamily {
    GaussianBump,
    MultiMode,
    RandomBandlimited,
}

impl DataFamily {
    pub const ALL: [DataFamily; 3] = [DataFamily::GaussianBump, DataFamily::MultiMode, DataFamily::RandomBandlimited];
}

impl FromStr for DataFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian-bump" => Ok(Self::GaussianBump),
            "multi-mode" => Ok(Self::MultiMode),
            "random-bandlimited" => Ok(Self::RandomBandlimited),
            other => Err(Error::InvalidParameter(format!("unknown data family `{other}`"))),
        }
    }
}

impl fmt::Display for DataFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::GaussianBump => "gaussian-bump",
            Self::MultiMode => "multi-mode",
            Self::RandomBandlimited => "random-bandlimited",
        })
    }
}

fn default_max_mode() -> usize {
    4
}

/// What to generate: family, sup-norm amplitudes and spectral band.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DataSpec {
    pub family: DataFamily,
    /// Sup norm of `u₀` and of `θ₀`.
    pub amplitude: f64,
    #[serde(default)]
    pub force_amplitude: f64,
    #[serde(default)]
    pub source_amplitude: f64,
    /// Largest wave index used by the multi-mode and band-limited families.
    #[serde(default = "default_max_mode")]
    pub max_mode: usize,
}

impl DataSpec {
    pub fn new(family: DataFamily, amplitude: f64) -> Self {
        Self {
            family,
            amplitude,
            force_amplitude: 0.0,
            source_amplitude: 0.0,
            max_mode: default_max_mode(),
        }
    }

    pub fn with_forces(mut self, force_amplitude: f64, source_amplitude: f64) -> Self {
        self.force_amplitude = force_amplitude;
        self.source_amplitude = source_amplitude;
        self
    }
}

/// Seeded scalar profile of the given family, normalized to unit sup norm.
pub fn random_profile(family: DataFamily, grid: &SpectralGrid, max_mode: usize, rng: &mut ChaCha8Rng) -> ScalarField {
    let l = grid.length();
    let dim = grid.dim();
    let f = match family {
        DataFamily::GaussianBump => {
            let center: Vec<f64> = (0..dim).map(|_| rng.random_range(0.3..0.7) * l).collect();
            let width = rng.random_range(0.08..0.15) * l;
            ScalarField::from_fn(grid, |x| {
                let r2: f64 = x
                    .iter()
                    .zip(&center)
                    .map(|(xi, ci)| {
                        let d = xi - ci;
                        let d = d - l * (d / l).round();
                        d * d
                    })
                    .sum();
                (-r2 / (2.0 * width * width)).exp()
            })
        }
        DataFamily::MultiMode => {
            let k0 = 2.0 * std::f64::consts::PI / l;
            let top = max_mode.clamp(1, grid.nyquist().saturating_sub(1).max(1)) as i64;
            let count = rng.random_range(3..=5);
            let modes: Vec<(Vec<f64>, f64, f64)> = (0..count)
                .map(|_| {
                    let mut m: Vec<i64> = (0..dim).map(|_| rng.random_range(-top..=top)).collect();
                    if m.iter().all(|&v| v == 0) {
                        m[0] = 1;
                    }
                    let norm = m.iter().map(|&v| (v * v) as f64).sum::<f64>().sqrt();
                    let k = m.iter().map(|&v| v as f64 * k0).collect();
                    (k, rng.random_range(-1.0..1.0) / norm, rng.random_range(0.0..std::f64::consts::TAU))
                })
                .collect();
            ScalarField::from_fn(grid, |x| {
                modes
                    .iter()
                    .map(|(k, a, ph)| a * (k.iter().zip(x).map(|(ki, xi)| ki * xi).sum::<f64>() + ph).cos())
                    .sum()
            })
        }
        DataFamily::RandomBandlimited => {
            let samples: Vec<f64> = (0..grid.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
            let raw = ScalarField::new(grid.clone(), samples).expect("grid-sized");
            let band = max_mode.max(1) as i64;
            let mut spec = raw.forward();
            let kmin = grid.dk();
            spec.apply(|k, idx| {
                let inside = idx.iter().all(|&i| grid.wave_index(i).abs() <= band);
                let k2: f64 = k.iter().map(|v| v * v).sum();
                if inside && k2 > 0.0 {
                    num_complex::Complex64::new((k2.sqrt() / kmin).powf(-1.0), 0.0)
                } else {
                    num_complex::Complex64::new(0.0, 0.0)
                }
            });
            spec.inverse()
        }
    };
    normalized(&f)
}

fn normalized(f: &ScalarField) -> ScalarField {
    let m = f.max_abs();
    if m > 0.0 {
        f.scale(1.0 / m)
    } else {
        f.clone()
    }
}

fn mean_free(f: &ScalarField) -> ScalarField {
    let mean = f.mean();
    normalized(&f.zip_with(f, |x, _| x - mean).expect("same grid"))
}

/// Divergence-free velocity in curl form, unit sup norm.
pub fn curl_velocity(family: DataFamily, grid: &SpectralGrid, max_mode: usize, rng: &mut ChaCha8Rng) -> Result<VectorField> {
    let dim = grid.dim();
    let comps = match dim {
        2 => {
            let psi = random_profile(family, grid, max_mode, rng);
            vec![spectral_derivative(&psi, 1)?, spectral_derivative(&psi, 0)?.scale(-1.0)]
        }
        3 => {
            let a: Vec<ScalarField> = (0..3).map(|_| random_profile(family, grid, max_mode, rng)).collect();
            let d = |c: usize, axis: usize| spectral_derivative(&a[c], axis);
            vec![
                d(2, 1)?.zip_with(&d(1, 2)?, |x, y| x - y)?,
                d(0, 2)?.zip_with(&d(2, 0)?, |x, y| x - y)?,
                d(1, 0)?.zip_with(&d(0, 1)?, |x, y| x - y)?,
            ]
        }
        _ => return Err(Error::InvalidParameter(format!("curl-form data need d = 2 or 3, got {dim}"))),
    };
    let v = VectorField::new(comps)?;
    let m = v.max_abs();
    Ok(if m > 0.0 { v.scale(1.0 / m) } else { v })
}

/// Seeded initial data and forces on `grid`, forces sampled at `times`.
/// `f(t) = a_f cos(t) w` with `w` divergence-free, `g(t) = a_g e^{-t} h` with `h` mean-free.
pub fn generate_data(spec: &DataSpec, seed: u64, grid: &SpectralGrid, times: &[f64]) -> Result<ProblemData> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u0 = curl_velocity(spec.family, grid, spec.max_mode, &mut rng)?.scale(spec.amplitude);
    let theta0 = mean_free(&random_profile(spec.family, grid, spec.max_mode, &mut rng)).scale(spec.amplitude);
    let w = curl_velocity(spec.family, grid, spec.max_mode, &mut rng)?;
    let h = mean_free(&random_profile(spec.family, grid, spec.max_mode, &mut rng));
    let force = if spec.force_amplitude != 0.0 {
        Some(Trajectory::from_fn(times.to_vec(), |t| w.scale(spec.force_amplitude * t.cos()))?)
    } else {
        None
    };
    let source = if spec.source_amplitude != 0.0 {
        Some(Trajectory::from_fn(times.to_vec(), |t| {
            h.scale(spec.source_amplitude * (-t).exp())
        })?)
    } else {
        None
    };
    Ok(ProblemData { u0, theta0, force, source })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::uniform_times;
    use crate::spectral::{divergence, make_grid};

    #[test]
    fn families_are_divergence_free_and_mean_free() {
        for dim in [2, 3] {
            let g = make_grid(dim, 16, 2.0 * std::f64::consts::PI).unwrap();
            for fam in DataFamily::ALL {
                let d = generate_data(&DataSpec::new(fam, 0.5), 3, &g, &uniform_times(1.0, 8).unwrap()).unwrap();
                assert!(divergence(&d.u0).max_abs() < 1e-12, "{fam}");
                assert!((d.u0.max_abs() - 0.5).abs() < 1e-12);
                assert!(d.theta0.mean().abs() < 1e-14);
            }
        }
    }

    #[test]
    fn zero_amplitude_and_determinism() {
        let g = make_grid(2, 16, 1.0).unwrap();
        let t = uniform_times(1.0, 8).unwrap();
        let z = generate_data(&DataSpec::new(DataFamily::MultiMode, 0.0), 1, &g, &t).unwrap();
        assert_eq!(z.u0.max_abs() + z.theta0.max_abs(), 0.0);
        let spec = DataSpec::new(DataFamily::GaussianBump, 1.0).with_forces(0.1, 0.2);
        let a = generate_data(&spec, 7, &g, &t).unwrap();
        let b = generate_data(&spec, 7, &g, &t).unwrap();
        assert_eq!(a.theta0.samples(), b.theta0.samples());
        assert_eq!(
            a.force.unwrap().last().component(1).samples(),
            b.force.unwrap().last().component(1).samples()
        );
        let c = generate_data(&spec, 8, &g, &t).unwrap();
        assert_ne!(a.theta0.samples(), c.theta0.samples());
    }

    #[test]
    fn family_names_round_trip() {
        for fam in DataFamily::ALL {
            assert_eq!(fam.to_string().parse::<DataFamily>().unwrap(), fam);
            let json = serde_json::to_string(&fam).unwrap();
            assert_eq!(json, format!("\"{fam}\""));
        }
        assert!("plane-wave".parse::<DataFamily>().is_err());
    }
}
