//! Exact Gaussian free field samplers and the conditional-decomposition
//! machinery, plus scalar helpers for tails and extreme values.

mod boxmarkov;
mod cond;
mod cov;
mod io;
mod seq;

pub use boxmarkov::BoxMarkovSampler;
pub use cond::{conditional_split, ConditionalSplit};
pub use cov::{CovarianceModel, FieldSample, Provenance, SamplerKind};
pub use io::{read_sample_binary, write_sample_binary, write_sample_csv};
pub use seq::SequentialSampler;

use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::potential::{green_quadrature, GreenEvaluator};

/// Default cap for dense covariance factorizations.
pub const DEFAULT_SAMPLER_CAP: usize = 5000;

/// Upper tail of a standard Gaussian.
pub fn std_normal_tail(t: f64) -> f64 {
    0.5 * erfc(t / std::f64::consts::SQRT_2)
}

/// P[phi_0 >= h] for the field in the evaluator's dimension: the field at a
/// point is centered Gaussian with variance g(0).
pub fn tail_density(eval: &GreenEvaluator, h: f64) -> Result<f64> {
    let g0 = eval.green_zero()?.value;
    Ok(std_normal_tail(h / g0.sqrt()))
}

/// The elementary two-sided tail bracket for a standard Gaussian:
/// (1/h - 1/h^3) e^{-h^2/2} <= sqrt(2 pi) P[xi > h] <= (1/h) e^{-h^2/2}.
/// Returns (lower, upper); requires h > 0.
pub fn gaussian_tail_bounds(h: f64) -> Result<(f64, f64)> {
    if h <= 0.0 {
        return Err(Error::InvalidArgument(
            "tail bracket requires h > 0".into(),
        ));
    }
    let pref = (-0.5 * h * h).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let lower = ((1.0 / h - 1.0 / (h * h * h)) * pref).max(0.0);
    let upper = pref / h;
    Ok((lower, upper))
}

/// h_as(d) scaled by (1 + eps): the common growth scale
/// sqrt(2 g(0) log d) of the critical levels.
pub fn h_as(eval: &GreenEvaluator, eps: f64) -> Result<f64> {
    let d = eval.d();
    let g0 = eval.green_zero()?.value;
    Ok((1.0 + eps) * (2.0 * g0 * (d as f64).ln()).sqrt())
}

/// Extreme-value bounds for the maximum over a k-point set.
#[derive(Debug, Clone, Copy)]
pub struct MaxFieldBounds {
    /// E[max] <= sqrt(2 g(0) log k).
    pub expectation_bound: f64,
    /// The threshold c_1 * alpha the tail bound applies to, with
    /// c_1 = sup_d sqrt(2 g(0)) (attained at d = 3).
    pub btis_threshold: f64,
    /// exp(-(alpha - sqrt(log k))^2), present only in the validity range
    /// alpha > sqrt(log k).
    pub btis_tail_bound: Option<f64>,
}

/// Gaussian concentration constant c_1 = sup over dimensions of
/// sqrt(2 g(0)), attained in the lowest transient dimension.
pub fn btis_c1() -> f64 {
    let g0_d3 = green_quadrature(3, &[], 1e-10)
        .expect("d=3 quadrature")
        .value;
    (2.0 * g0_d3).sqrt()
}

pub fn max_field_bounds(eval: &GreenEvaluator, k: usize, alpha: f64) -> Result<MaxFieldBounds> {
    if k < 2 {
        return Err(Error::InvalidArgument(
            "extreme-value bounds need |K| >= 2".into(),
        ));
    }
    let g0 = eval.green_zero()?.value;
    let logk = (k as f64).ln();
    let expectation_bound = (2.0 * g0 * logk).sqrt();
    let tail = if alpha > logk.sqrt() {
        let delta = alpha - logk.sqrt();
        Some((-delta * delta).exp())
    } else {
        None
    };
    Ok(MaxFieldBounds {
        expectation_bound,
        btis_threshold: btis_c1() * alpha,
        btis_tail_bound: tail,
    })
}
