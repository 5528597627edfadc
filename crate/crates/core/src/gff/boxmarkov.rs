//! Box sampler through the domain Markov property: draw the inner-boundary
//! shell exactly from its dense covariance, draw the interior as a
//! zero-boundary field, and add the harmonic extension of the shell values.
//!
//! The zero-boundary field has precision matrix I - P restricted to the
//! interior (the inverse of the killed Green matrix), which is sparse; its
//! Cholesky factor both samples the field and solves the harmonic extension.
//! Totals are exact: shell exact + interior conditional law = field law on
//! the whole box.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gff::cov::{cholesky_with_jitter, CovarianceModel, FieldSample, Provenance, SamplerKind};
use crate::lattice::{ball, boundary, BoundaryKind, LatticePoint, Norm, Region};
use crate::potential::GreenEvaluator;
use crate::rng::{replica_rng, standard_normal};

#[derive(Debug, Clone)]
pub struct BoxMarkovSampler {
    pub region: Arc<Region>,
    shell: Region,
    interior: Option<Region>,
    shell_model: CovarianceModel,
    /// Cholesky factor of (I - P_interior); present when the interior is
    /// nonempty.
    interior_precision_factor: Option<DMatrix<f64>>,
    /// interior index -> (shell neighbor indices) with weight 1/2d.
    shell_coupling: Vec<Vec<usize>>,
    /// interior position in the full region / shell position in full region
    interior_pos: Vec<usize>,
    shell_pos: Vec<usize>,
}

impl BoxMarkovSampler {
    /// Sampler for the l-inf ball of the given radius. `interior_cap` guards
    /// the dense factorization of the interior precision matrix.
    pub fn for_ball(
        eval: &GreenEvaluator,
        center: &LatticePoint,
        radius: f64,
        shell_cap: usize,
        interior_cap: usize,
    ) -> Result<BoxMarkovSampler> {
        let region = ball(center, radius, Norm::Linf, 20_000_000)?;
        BoxMarkovSampler::for_region(eval, &region, shell_cap, interior_cap)
    }

    /// General form: any region whose interior boundary its own shell. The
    /// shell is sampled densely; the interior must be the complement of the
    /// shell inside the region.
    pub fn for_region(
        eval: &GreenEvaluator,
        region: &Region,
        shell_cap: usize,
        interior_cap: usize,
    ) -> Result<BoxMarkovSampler> {
        let shell = boundary(region, BoundaryKind::Interior)?;
        let interior_pts: Vec<LatticePoint> = region
            .iter()
            .filter(|p| !shell.contains(p))
            .cloned()
            .collect();
        let shell_model = CovarianceModel::build(eval, &shell, shell_cap)?;
        let interior = if interior_pts.is_empty() {
            None
        } else {
            Some(Region::from_points(interior_pts)?)
        };

        let (factor, coupling, interior_pos) = match &interior {
            None => (None, Vec::new(), Vec::new()),
            Some(int) => {
                if int.len() > interior_cap {
                    return Err(Error::CapExceeded {
                        requested: int.len(),
                        cap: interior_cap,
                    });
                }
                let n = int.len();
                let inv_2d = 1.0 / (2.0 * eval.d() as f64);
                let mut a = DMatrix::<f64>::identity(n, n);
                let mut coupling = vec![Vec::new(); n];
                for (i, p) in int.iter().enumerate() {
                    for q in p.neighbors() {
                        if let Some(j) = int.position(&q) {
                            a[(i, j)] -= inv_2d;
                        } else if let Some(sj) = shell.position(&q) {
                            coupling[i].push(sj);
                        }
                    }
                }
                let (l, _) = cholesky_with_jitter(&a)?;
                let pos = int
                    .iter()
                    .map(|p| region.position(p).expect("interior point in region"))
                    .collect();
                (Some(l), coupling, pos)
            }
        };
        let shell_pos = shell
            .iter()
            .map(|p| region.position(p).expect("shell point in region"))
            .collect();
        Ok(BoxMarkovSampler {
            region: Arc::new(region.clone()),
            shell,
            interior,
            shell_model,
            interior_precision_factor: factor,
            shell_coupling: coupling,
            interior_pos,
            shell_pos,
        })
    }

    pub fn shell(&self) -> &Region {
        &self.shell
    }

    pub fn interior(&self) -> Option<&Region> {
        self.interior.as_ref()
    }

    /// Harmonic extension of shell values into the interior: solves
    /// (I - P_int) s = (1/2d) * sum of adjacent shell values.
    pub fn harmonic_extension(&self, shell_values: &[f64]) -> Vec<f64> {
        let Some(l) = &self.interior_precision_factor else {
            return Vec::new();
        };
        let n = l.nrows();
        let d2 = 1.0 / (2.0 * self.region.dim() as f64);
        let mut rhs = DVector::<f64>::zeros(n);
        for i in 0..n {
            let mut acc = 0.0;
            for &sj in &self.shell_coupling[i] {
                acc += shell_values[sj];
            }
            rhs[i] = acc * d2;
        }
        let y = l.solve_lower_triangular(&rhs).expect("factor invertible");
        let s = l
            .transpose()
            .solve_upper_triangular(&y)
            .expect("factor invertible");
        s.iter().copied().collect()
    }

    pub fn sample_one(&self, master_seed: u64, replica: u64) -> FieldSample {
        let mut rng = replica_rng(master_seed, replica);
        let ns = self.shell.len();
        // shell: exact dense draw (reuse the dense factor directly so the
        // stream layout is: shell normals first, then interior normals)
        let zs: Vec<f64> = (0..ns).map(|_| standard_normal(&mut rng)).collect();
        let lf = self.shell_model.factor();
        let mut shell_values = vec![0.0; ns];
        for i in 0..ns {
            let mut acc = 0.0;
            for j in 0..=i {
                acc += lf[(i, j)] * zs[j];
            }
            shell_values[i] = acc;
        }

        let mut values = vec![0.0; self.region.len()];
        for (si, &pos) in self.shell_pos.iter().enumerate() {
            values[pos] = shell_values[si];
        }

        if let Some(l) = &self.interior_precision_factor {
            let n = l.nrows();
            // zero-boundary field: solve L^T w = z so that w has covariance
            // (L L^T)^{-1} = killed Green matrix
            let z = DVector::from_fn(n, |_, _| standard_normal(&mut rng));
            let w = l
                .transpose()
                .solve_upper_triangular(&z)
                .expect("factor invertible");
            let shift = self.harmonic_extension(&shell_values);
            for (i, &pos) in self.interior_pos.iter().enumerate() {
                values[pos] = w[i] + shift[i];
            }
        }

        FieldSample {
            region: Arc::clone(&self.region),
            values,
            provenance: Provenance {
                sampler: SamplerKind::BoxMarkov,
                master_seed,
                replica,
            },
        }
    }

    pub fn sample(&self, n: u64, master_seed: u64) -> Vec<FieldSample> {
        (0..n)
            .into_par_iter()
            .map(|r| self.sample_one(master_seed, r))
            .collect()
    }
}
