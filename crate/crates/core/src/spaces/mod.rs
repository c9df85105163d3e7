//! Norm estimators for Morrey-type, thermic and Sobolev-Morrey spaces, the
//! parabolic Riesz potential and the exponent bookkeeping.
//!
//! Every sup is taken over a finite region family (see [`SupOptions`]); the
//! reported value is therefore a lower estimate of the continuum norm, and
//! [`NormReport::refinement_gap`] shows how much a finer center set adds.

mod indices;
mod morrey;
mod regions;
mod riesz;
mod thermic;
mod trajectory;

use std::collections::BTreeMap;

use serde::Serialize;

pub use indices::{derived_indices, thermic_partner, IndexFamily};
pub use morrey::{holder_check, morrey_norm, morrey_norm_with, parabolic_morrey_norm, sobolev_morrey_norm, HolderReport};
pub use regions::{Geometry, SupOptions};
pub use riesz::{parabolic_riesz, RieszOperator};
pub use thermic::{besov_norm, tlm_norm, tlm_profile, LogTimeGrid, ThermicValue};
pub use trajectory::{graded_times, heat_extension, trapezoid_weights, uniform_times, Trajectory, MIN_TIMES};

use crate::error::Result;

/// JSON record of one norm evaluation.
#[derive(Clone, Debug, Serialize)]
pub struct NormReport {
    pub norm_name: String,
    pub params: BTreeMap<String, f64>,
    pub value: f64,
    /// Increase of the estimate when both center strides are halved.
    pub refinement_gap: Option<f64>,
    pub tail_bound: Option<f64>,
}

impl NormReport {
    pub fn new(norm_name: impl Into<String>, params: &[(&str, f64)], value: f64) -> Self {
        Self {
            norm_name: norm_name.into(),
            params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            value,
            refinement_gap: None,
            tail_bound: None,
        }
    }

    /// Evaluates `eval` with `opts` and with the refined options, recording the gap.
    pub fn with_refinement<E>(norm_name: impl Into<String>, params: &[(&str, f64)], n: usize, opts: &SupOptions, eval: E) -> Result<Self>
    where
        E: Fn(&SupOptions) -> Result<f64>,
    {
        let coarse = eval(opts)?;
        let fine = eval(&opts.refined(n))?;
        let mut rep = Self::new(norm_name, params, coarse);
        rep.refinement_gap = Some(fine - coarse);
        Ok(rep)
    }

    pub fn with_tail(mut self, tail: f64) -> Self {
        self.tail_bound = Some(tail);
        self
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}
