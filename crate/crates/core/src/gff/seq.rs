//! Sequential conditional sampler: one point at a time along a chosen
//! enumeration, each step an independent Gaussian innovation plus the
//! conditional mean given the already-discovered points.
//!
//! The innovation variance at step n is the Green function killed off the
//! complement of the first n-1 points, and the conditional-mean weights are
//! exactly the hitting distribution onto them; both come out of the Cholesky
//! factor of the covariance permuted into the enumeration order, so the
//! sampler is exact for every ordering.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gff::cov::{cholesky_with_jitter, CovarianceModel, FieldSample, Provenance, SamplerKind};
use crate::rng::{replica_rng, standard_normal};

#[derive(Debug, Clone)]
pub struct SequentialSampler {
    model: CovarianceModel,
    /// ordering[k] = region index visited at step k
    ordering: Vec<usize>,
    /// Cholesky factor of the permuted covariance.
    factor: DMatrix<f64>,
    /// Covariance permuted into the ordering.
    cov_perm: DMatrix<f64>,
}

impl SequentialSampler {
    pub fn new(model: &CovarianceModel, ordering: &[usize]) -> Result<SequentialSampler> {
        let n = model.len();
        if ordering.len() != n {
            return Err(Error::InvalidArgument(format!(
                "ordering length {} != region size {n}",
                ordering.len()
            )));
        }
        let mut seen = vec![false; n];
        for &i in ordering {
            if i >= n || seen[i] {
                return Err(Error::InvalidArgument(
                    "ordering is not a permutation of the region indices".into(),
                ));
            }
            seen[i] = true;
        }
        let mut cov_perm = DMatrix::<f64>::zeros(n, n);
        for (a, &i) in ordering.iter().enumerate() {
            for (b, &j) in ordering.iter().enumerate() {
                cov_perm[(a, b)] = model.cov[(i, j)];
            }
        }
        let (factor, _) = cholesky_with_jitter(&cov_perm)?;
        Ok(SequentialSampler {
            model: model.clone(),
            ordering: ordering.to_vec(),
            factor,
            cov_perm,
        })
    }

    pub fn len(&self) -> usize {
        self.ordering.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ordering.is_empty()
    }

    pub fn ordering(&self) -> &[usize] {
        &self.ordering
    }

    /// Innovation variance of step k: the killed Green value
    /// g_{K_k^c}(x_k, x_k), never above g(0).
    pub fn step_variance(&self, k: usize) -> f64 {
        let l = self.factor[(k, k)];
        l * l
    }

    /// Conditional-mean weights of step k on steps 0..k; these equal the
    /// hitting distribution of the walk from x_k onto the discovered set.
    pub fn shift_coefficients(&self, k: usize) -> Vec<f64> {
        if k == 0 {
            return Vec::new();
        }
        let gkk = self.cov_perm.view((0, 0), (k, k)).into_owned();
        let rhs = DVector::from_fn(k, |j, _| self.cov_perm[(j, k)]);
        let chol = gkk
            .cholesky()
            .expect("leading principal block of a PD matrix");
        let w = chol.solve(&rhs);
        w.iter().copied().collect()
    }

    /// Draw a replica: returns the field in region order together with the
    /// per-step innovations psi (in step order).
    pub fn sample_with_innovations(&self, master_seed: u64, replica: u64) -> (FieldSample, Vec<f64>) {
        let n = self.len();
        let mut rng = replica_rng(master_seed, replica);
        let z: Vec<f64> = (0..n).map(|_| standard_normal(&mut rng)).collect();
        let mut perm_values = vec![0.0; n];
        let mut psi = vec![0.0; n];
        for i in 0..n {
            let mut acc = 0.0;
            for j in 0..=i {
                acc += self.factor[(i, j)] * z[j];
            }
            perm_values[i] = acc;
            psi[i] = self.factor[(i, i)] * z[i];
        }
        let mut values = vec![0.0; n];
        for (step, &region_idx) in self.ordering.iter().enumerate() {
            values[region_idx] = perm_values[step];
        }
        (
            FieldSample {
                region: self.model.region.clone(),
                values,
                provenance: Provenance {
                    sampler: SamplerKind::Sequential,
                    master_seed,
                    replica,
                },
            },
            psi,
        )
    }

    pub fn sample_one(&self, master_seed: u64, replica: u64) -> FieldSample {
        self.sample_with_innovations(master_seed, replica).0
    }

    pub fn sample(&self, n: u64, master_seed: u64) -> Vec<FieldSample> {
        (0..n)
            .into_par_iter()
            .map(|r| self.sample_one(master_seed, r))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{ball, LatticePoint, Norm, Region};
    use crate::potential::{hit_distribution, GreenEvaluator};
    use crate::stats::RunningStat;

    #[test]
    fn single_point_law() {
        let eval = GreenEvaluator::quadrature(3).unwrap();
        let region = Region::singleton(LatticePoint::origin(3));
        let model = CovarianceModel::build(&eval, &region, 10).unwrap();
        let s = SequentialSampler::new(&model, &[0]).unwrap();
        assert!((s.step_variance(0) - 1.51638605915198).abs() < 1e-8);
        let (sample, psi) = s.sample_with_innovations(3, 0);
        assert_eq!(sample.values[0], psi[0]);
    }

    #[test]
    fn step_variances_never_exceed_g0() {
        let eval = GreenEvaluator::quadrature(3).unwrap();
        let region = ball(&LatticePoint::origin(3), 1.0, Norm::Linf, 100).unwrap();
        let model = CovarianceModel::build(&eval, &region, 100).unwrap();
        let g0 = model.cov[(0, 0)];
        let ordering: Vec<usize> = (0..region.len()).collect();
        let s = SequentialSampler::new(&model, &ordering).unwrap();
        for k in 0..region.len() {
            let v = s.step_variance(k);
            assert!(v <= g0 + 1e-10);
            assert!(v > 0.0);
        }
        // the first step has the free variance, later ones strictly less
        assert!((s.step_variance(0) - g0).abs() < 1e-12);
        assert!(s.step_variance(5) < g0);
    }

    #[test]
    fn shift_coefficients_are_hitting_probabilities() {
        let eval = GreenEvaluator::quadrature(3).unwrap();
        // K_3 = {0, e1}, next point e1+e2
        let pts = vec![
            LatticePoint::origin(3),
            LatticePoint::new(vec![1, 0, 0]),
            LatticePoint::new(vec![1, 1, 0]),
        ];
        let region = Region::from_points_ordered(pts.clone()).unwrap();
        let model = CovarianceModel::build(&eval, &region, 10).unwrap();
        let s = SequentialSampler::new(&model, &[0, 1, 2]).unwrap();
        let w = s.shift_coefficients(2);
        let k = Region::from_points_ordered(pts[..2].to_vec()).unwrap();
        let h = hit_distribution(&eval, &k, &pts[2]).unwrap();
        for (a, b) in w.iter().zip(&h.probs) {
            assert!((a - b).abs() < 1e-8, "{a} vs {b}");
        }
    }

    #[test]
    fn ordering_invariance_of_the_law() {
        let eval = GreenEvaluator::quadrature(3).unwrap();
        let region = ball(&LatticePoint::origin(3), 1.0, Norm::L1, 100).unwrap();
        let model = CovarianceModel::build(&eval, &region, 100).unwrap();
        let k = region.len();
        let natural: Vec<usize> = (0..k).collect();
        let reversed: Vec<usize> = (0..k).rev().collect();
        let s1 = SequentialSampler::new(&model, &natural).unwrap();
        let s2 = SequentialSampler::new(&model, &reversed).unwrap();
        let n = 60_000u64;
        let a = s1.sample(n, 21);
        let b = s2.sample(n, 22);
        for i in 0..k {
            for j in i..k {
                let mut ca = RunningStat::new();
                let mut cb = RunningStat::new();
                for s in &a {
                    ca.push(s.values[i] * s.values[j]);
                }
                for s in &b {
                    cb.push(s.values[i] * s.values[j]);
                }
                let se = (ca.se() * ca.se() + cb.se() * cb.se()).sqrt();
                assert!(
                    (ca.mean() - cb.mean()).abs() < 4.0 * se,
                    "entry ({i},{j}): {} vs {}",
                    ca.mean(),
                    cb.mean()
                );
            }
        }
    }

    #[test]
    fn non_permutation_rejected() {
        let eval = GreenEvaluator::quadrature(3).unwrap();
        let region = ball(&LatticePoint::origin(3), 1.0, Norm::L1, 100).unwrap();
        let model = CovarianceModel::build(&eval, &region, 100).unwrap();
        assert!(SequentialSampler::new(&model, &[0, 0, 1]).is_err());
        assert!(SequentialSampler::new(&model, &[0, 1]).is_err());
    }
}
