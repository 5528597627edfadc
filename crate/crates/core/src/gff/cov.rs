//! Dense covariance model and the reference sampler.

use std::sync::Arc;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::Region;
use crate::potential::{green_matrix, GreenEvaluator};
use crate::rng::{replica_rng, standard_normal};

/// Which sampler produced a field realization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SamplerKind {
    Dense,
    Sequential,
    BoxMarkov,
}

/// Seed provenance: the same triple always reproduces the same values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub sampler: SamplerKind,
    pub master_seed: u64,
    pub replica: u64,
}

/// One realization of the field on a region.
#[derive(Debug, Clone)]
pub struct FieldSample {
    pub region: Arc<Region>,
    pub values: Vec<f64>,
    pub provenance: Provenance,
}

impl FieldSample {
    pub fn value_at(&self, idx: usize) -> f64 {
        self.values[idx]
    }
}

/// Region covariance g(x - y) with its Cholesky factor.
#[derive(Debug, Clone)]
pub struct CovarianceModel {
    pub region: Arc<Region>,
    pub cov: DMatrix<f64>,
    factor: DMatrix<f64>,
    /// Set when the factorization needed the one-shot diagonal jitter.
    pub jittered: bool,
}

/// Factor a covariance matrix, allowing one diagonal jitter of
/// 1e-10 * max diagonal before declaring the matrix broken (a true Green
/// covariance is positive definite; repeat failure means an upstream bug).
pub(crate) fn cholesky_with_jitter(cov: &DMatrix<f64>) -> Result<(DMatrix<f64>, bool)> {
    if let Some(ch) = cov.clone().cholesky() {
        return Ok((ch.unpack(), false));
    }
    let scale = (0..cov.nrows())
        .map(|i| cov[(i, i)])
        .fold(0.0f64, f64::max);
    let mut jittered = cov.clone();
    for i in 0..cov.nrows() {
        jittered[(i, i)] += 1e-10 * scale;
    }
    match jittered.cholesky() {
        Some(ch) => Ok((ch.unpack(), true)),
        None => Err(Error::Factorization(
            "covariance not positive definite even after jitter".into(),
        )),
    }
}

impl CovarianceModel {
    /// Build the model for a region, capping the dense size.
    pub fn build(eval: &GreenEvaluator, region: &Region, cap: usize) -> Result<CovarianceModel> {
        if region.len() > cap {
            return Err(Error::CapExceeded {
                requested: region.len(),
                cap,
            });
        }
        if region.dim() != eval.d() {
            return Err(Error::DimensionMismatch {
                left: eval.d(),
                right: region.dim(),
            });
        }
        let cov = green_matrix(eval, region)?;
        let (factor, jittered) = cholesky_with_jitter(&cov)?;
        Ok(CovarianceModel {
            region: Arc::new(region.clone()),
            cov,
            factor,
            jittered,
        })
    }

    pub fn len(&self) -> usize {
        self.region.len()
    }

    pub fn is_empty(&self) -> bool {
        self.region.is_empty()
    }

    /// Lower-triangular factor L with L L^T = cov.
    pub fn factor(&self) -> &DMatrix<f64> {
        &self.factor
    }

    /// Draw one replica from its deterministic stream.
    pub fn sample_one(&self, master_seed: u64, replica: u64) -> FieldSample {
        let n = self.len();
        let mut rng = replica_rng(master_seed, replica);
        let z: Vec<f64> = (0..n).map(|_| standard_normal(&mut rng)).collect();
        let mut values = vec![0.0; n];
        // values = L z
        for i in 0..n {
            let mut acc = 0.0;
            for j in 0..=i {
                acc += self.factor[(i, j)] * z[j];
            }
            values[i] = acc;
        }
        FieldSample {
            region: Arc::clone(&self.region),
            values,
            provenance: Provenance {
                sampler: SamplerKind::Dense,
                master_seed,
                replica,
            },
        }
    }

    /// n i.i.d. replicas, replica-parallel, scheduling independent.
    pub fn sample(&self, n: u64, master_seed: u64) -> Vec<FieldSample> {
        (0..n)
            .into_par_iter()
            .map(|r| self.sample_one(master_seed, r))
            .collect()
    }
}
