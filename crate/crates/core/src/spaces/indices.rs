use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const REL_TOL: f64 = 1e-12;

/// Exponents of the critical framework for one choice of `(α, d, p, γ, δ)`.
///
/// Velocity data live in a thermic space built on `M^{p,q}`, temperature data
/// on `M^{p_θ,q_θ}`; the forces `f` and `g` are measured in Sobolev-Morrey
/// spaces with exponents `(force_p, force_q)` and `(source_p, source_q)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndexFamily {
    pub alpha: f64,
    pub dim: usize,
    pub p: f64,
    pub q: f64,
    pub temperature_p: f64,
    pub temperature_q: f64,
    pub force_p: f64,
    pub force_q: f64,
    pub source_p: f64,
    pub source_q: f64,
    pub gamma: f64,
    pub delta: f64,
}

impl IndexFamily {
    /// Smallest admissible `p` (excluded): `(3α-2)/(α-1)`.
    pub fn lower_bound(alpha: f64) -> f64 {
        (3.0 * alpha - 2.0) / (alpha - 1.0)
    }

    /// Largest admissible `p` (included): `(d+α)/(α-1)`.
    pub fn upper_bound(alpha: f64, dim: usize) -> f64 {
        (dim as f64 + alpha) / (alpha - 1.0)
    }

    /// Second exponent of the velocity resolution space, `(d+α)/(α-1)`.
    pub fn velocity_resolution_q(&self) -> f64 {
        (self.dim as f64 + self.alpha) / (self.alpha - 1.0)
    }

    /// Second exponent of the temperature resolution space, `(d+α)/(2α-1)`.
    pub fn temperature_resolution_q(&self) -> f64 {
        (self.dim as f64 + self.alpha) / (2.0 * self.alpha - 1.0)
    }

    /// Regularity index of the velocity data space, `-α/p`.
    pub fn velocity_sigma(&self) -> f64 {
        -self.alpha / self.p
    }

    pub fn temperature_sigma(&self) -> f64 {
        -self.alpha / self.temperature_p
    }

    /// The worked family used as the default throughout the crate.
    pub fn reference() -> Self {
        derived_indices(1.5, 2, 6.0, 0.5, 0.5).expect("reference family is admissible")
    }
}

fn morrey_partner(dim: f64, alpha: f64, p: f64, level: f64) -> f64 {
    let base = level / (dim + alpha);
    1.0 / (base - (alpha / dim) * (1.0 / p - base))
}

fn leq(a: f64, b: f64) -> bool {
    a <= b * (1.0 + REL_TOL)
}

/// Computes every exponent from `(α, d, p, γ, δ)` and checks the range and
/// ordering constraints.
pub fn derived_indices(alpha: f64, dim: usize, p: f64, gamma: f64, delta: f64) -> Result<IndexFamily> {
    if !(alpha > 1.0 && alpha < 2.0) {
        return Err(Error::IndexConstraint(format!("alpha = {alpha} must lie in (1, 2)")));
    }
    if dim < 2 {
        return Err(Error::IndexConstraint(format!("dimension {dim} must be at least 2")));
    }
    if !(gamma > 0.0 && gamma < alpha) {
        return Err(Error::IndexConstraint(format!("gamma = {gamma} must lie in (0, alpha)")));
    }
    if !(delta > 0.0 && delta < alpha) {
        return Err(Error::IndexConstraint(format!("delta = {delta} must lie in (0, alpha)")));
    }
    let lo = IndexFamily::lower_bound(alpha);
    let hi = IndexFamily::upper_bound(alpha, dim);
    if !(p > lo * (1.0 + REL_TOL)) {
        return Err(Error::IndexConstraint(format!("p = {p} must exceed (3α-2)/(α-1) = {lo}")));
    }
    if !leq(p, hi) {
        return Err(Error::IndexConstraint(format!("p = {p} must not exceed (d+α)/(α-1) = {hi}")));
    }
    let d = dim as f64;
    let q = morrey_partner(d, alpha, p, alpha - 1.0);
    let tp = (alpha - 1.0) / (2.0 * alpha - 1.0) * p;
    let tq = morrey_partner(d, alpha, tp, 2.0 * alpha - 1.0);
    let fp = (alpha - 1.0) / (2.0 * alpha - 1.0 - gamma) * p;
    let fq = (d + alpha) / (2.0 * alpha - 1.0 - gamma);
    let sp = (alpha - 1.0) / (3.0 * alpha - 1.0 - delta) * p;
    let sq = (d + alpha) / (3.0 * alpha - 1.0 - delta);
    for (name, a, b) in [
        ("p <= q", p, q),
        ("temperature p <= q", tp, tq),
        ("force p <= q", fp, fq),
        ("source p <= q", sp, sq),
    ] {
        if !(b > 0.0) || !b.is_finite() || !leq(a, b) {
            return Err(Error::IndexConstraint(format!("{name} fails ({a} vs {b})")));
        }
    }
    Ok(IndexFamily {
        alpha,
        dim,
        p,
        q,
        temperature_p: tp,
        temperature_q: tq,
        force_p: fp,
        force_q: fq,
        source_p: sp,
        source_q: sq,
        gamma,
        delta,
    })
}

/// Second Morrey exponent `Q` of the thermic space equivalent to the
/// heat extension in `M^{p,q}_α`: `d/Q = (d+α)/q - α/p`. Requires
/// `p > α q/(d+α)` and `p <= Q`.
pub fn thermic_partner(alpha: f64, dim: usize, p: f64, q: f64) -> Result<f64> {
    let d = dim as f64;
    if !(p >= 1.0 && leq(p, q)) {
        return Err(Error::IndexConstraint(format!("need 1 <= p <= q (got p = {p}, q = {q})")));
    }
    if !(p > alpha * q / (d + alpha) * (1.0 + REL_TOL)) {
        return Err(Error::IndexConstraint(format!(
            "p = {p} must exceed α q/(d+α) = {}",
            alpha * q / (d + alpha)
        )));
    }
    let inv = ((d + alpha) / q - alpha / p) / d;
    let big_q = 1.0 / inv;
    if !(inv > 0.0) || !leq(p, big_q) {
        return Err(Error::IndexConstraint(format!(
            "thermic exponent {big_q} incompatible with p = {p}"
        )));
    }
    Ok(big_q)
}
