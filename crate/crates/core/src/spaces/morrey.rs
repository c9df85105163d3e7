use serde::Serialize;

use super::regions::{Regions, SupOptions};
use super::trajectory::Trajectory;
use crate::error::{Error, Result};
use crate::operators::riesz_smoothing;
use crate::spectral::{Field, ScalarField};

pub(crate) fn check_exponents(p: f64, q: f64) -> Result<()> {
    if !(p >= 1.0) || !(q >= p) || !q.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "Morrey exponents need 1 <= p <= q < inf (got p = {p}, q = {q})"
        )));
    }
    Ok(())
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(1.0..=2.0).contains(&alpha) {
        return Err(Error::InvalidParameter(format!("fractional order {alpha} outside [1, 2]")));
    }
    Ok(())
}

fn power_density(mag: &[f64], p: f64) -> Vec<f64> {
    mag.iter().map(|v| v.powf(p)).collect()
}

/// Spatial Morrey norm `M^{p,q}` with the default (ball) sup discretization.
pub fn morrey_norm<F: Field>(f: &F, p: f64, q: f64) -> Result<f64> {
    morrey_norm_with(f, p, q, &SupOptions::spatial())
}

pub fn morrey_norm_with<F: Field>(f: &F, p: f64, q: f64, opts: &SupOptions) -> Result<f64> {
    check_exponents(p, q)?;
    let regions = Regions::spatial(f.grid(), opts);
    let sums = regions.sums(&[power_density(&f.pointwise_magnitude(), p)]);
    Ok(regions.sup(&sums, p, q))
}

/// Parabolic Morrey norm `M^{p,q}_α` of a trajectory (zero outside its time span).
pub fn parabolic_morrey_norm<F: Field>(psi: &Trajectory<F>, p: f64, q: f64, alpha: f64, opts: &SupOptions) -> Result<f64> {
    check_exponents(p, q)?;
    check_alpha(alpha)?;
    let regions = Regions::parabolic(psi.grid(), psi.times(), psi.time_weights(), alpha, opts);
    let dens: Vec<Vec<f64>> = psi.snapshots().iter().map(|s| power_density(&s.pointwise_magnitude(), p)).collect();
    let sums = regions.sums(&dens);
    Ok(regions.sup(&sums, p, q))
}

/// Sobolev-Morrey norm: the parabolic Morrey norm after `(-Δ)^{-γ/2}` per snapshot.
pub fn sobolev_morrey_norm<F: Field>(psi: &Trajectory<F>, gamma: f64, p: f64, q: f64, alpha: f64, opts: &SupOptions) -> Result<f64> {
    let smoothed = psi.try_map(|s| riesz_smoothing(s, gamma))?;
    parabolic_morrey_norm(&smoothed, p, q, alpha, opts)
}

/// Outcome of a parabolic Hölder comparison.
#[derive(Clone, Debug, Serialize)]
pub struct HolderReport {
    pub p: f64,
    pub q: f64,
    pub product_norm: f64,
    pub left_norm: f64,
    pub right_norm: f64,
    /// `None` when both sides vanish.
    pub ratio: Option<f64>,
    /// Largest region-wise ratio of the three local quantities.
    pub worst_region_ratio: f64,
    pub notice: Option<String>,
}

/// Compares `‖fg‖_{M^{p,q}_α}` against `‖f‖_{M^{p1,q1}_α} ‖g‖_{M^{p2,q2}_α}`
/// with `1/p = 1/p1 + 1/p2`, `1/q = 1/q1 + 1/q2`.
#[allow(clippy::too_many_arguments)]
pub fn holder_check<F: Field, G: Field>(
    f: &Trajectory<F>,
    g: &Trajectory<G>,
    (p1, q1): (f64, f64),
    (p2, q2): (f64, f64),
    alpha: f64,
    opts: &SupOptions,
) -> Result<HolderReport> {
    check_exponents(p1, q1)?;
    check_exponents(p2, q2)?;
    check_alpha(alpha)?;
    f.ensure_compatible(g)?;
    let p = 1.0 / (1.0 / p1 + 1.0 / p2);
    let q = 1.0 / (1.0 / q1 + 1.0 / q2);
    if p < 1.0 {
        return Err(Error::InvalidParameter(format!("product exponent p = {p} falls below 1")));
    }
    let regions = Regions::parabolic(f.grid(), f.times(), f.time_weights(), alpha, opts);
    let mags_f: Vec<Vec<f64>> = f.snapshots().iter().map(|s| s.pointwise_magnitude()).collect();
    let mags_g: Vec<Vec<f64>> = g.snapshots().iter().map(|s| s.pointwise_magnitude()).collect();
    let dens = |mags: &[Vec<f64>], e: f64| -> Vec<Vec<f64>> { mags.iter().map(|m| power_density(m, e)).collect() };
    let prod: Vec<Vec<f64>> = mags_f
        .iter()
        .zip(&mags_g)
        .map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x * y).powf(p)).collect())
        .collect();
    let s_fg = regions.sums(&prod);
    let s_f = regions.sums(&dens(&mags_f, p1));
    let s_g = regions.sums(&dens(&mags_g, p2));
    let n_fg = regions.normalized(&s_fg, p, q);
    let n_f = regions.normalized(&s_f, p1, q1);
    let n_g = regions.normalized(&s_g, p2, q2);
    let worst = n_fg
        .iter()
        .zip(n_f.iter().zip(&n_g))
        .filter(|(a, _)| **a > 0.0)
        .fold(0.0f64, |m, (a, (b, c))| m.max(a / (b * c)));
    let max = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(*x));
    let (lhs, nf, ng) = (max(&n_fg), max(&n_f), max(&n_g));
    let (ratio, notice) = if nf * ng > 0.0 {
        (Some(lhs / (nf * ng)), None)
    } else {
        (None, Some("degenerate input: both sides vanish (0/0)".to_string()))
    };
    Ok(HolderReport {
        p,
        q,
        product_norm: lhs,
        left_norm: nf,
        right_norm: ng,
        ratio,
        worst_region_ratio: worst,
        notice,
    })
}

/// Morrey norm of a constant field equal to one, used to turn pointwise
/// bounds into norm bounds.
pub(crate) fn unit_morrey(field: &ScalarField, p: f64, q: f64, opts: &SupOptions) -> Result<f64> {
    morrey_norm_with(&ScalarField::constant(field.grid(), 1.0), p, q, opts)
}
