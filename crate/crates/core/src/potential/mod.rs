//! Simple-random-walk potential theory: free and killed Green functions,
//! hitting distributions, equilibrium measures, capacity, and checkers for
//! the high-dimensional Green-function bounds.

mod bounds;
mod green;
mod table;
mod walk;

pub use bounds::{verify_bounds, BoundCheckRow, BoundsReport};
pub use green::{
    adaptive_simpson, asymptotic_green_constant, green_quadrature, green_truncated_solve,
    GreenValue,
};
pub use table::{
    green_matrix, hit_distribution, hit_distribution_dirichlet, hit_distribution_with,
    hitting_prob, potential_table, DirichletHit, HitDistribution, PotentialTable,
    DEFAULT_DENSE_CAP,
};
pub use walk::{mc_green, mc_hit_distribution, HitEstimate, WalkEstimate, MAX_WALK_DIM};

use std::collections::HashMap;
use std::sync::Mutex;

use crate::error::{Error, Result};
use crate::lattice::LatticePoint;

/// How the free Green function is evaluated.
#[derive(Debug, Clone)]
pub enum GreenMethod {
    /// Adaptive quadrature of the Bessel-product representation (default).
    Quadrature,
    /// Visit counting along truncated walks with an analytic tail correction.
    MonteCarlo { walks: u64, radius: f64 },
    /// Zero-boundary linear solve on a box, with the truncation bracket
    /// folded into the reported error bound.
    TruncatedSolve { radius: i64 },
}

/// Evaluator for g(x) = g(x, 0) in a fixed dimension, with a memo table
/// keyed by the coordinate multiset (g is invariant under sign flips and
/// coordinate permutations, which the key canonicalizes away).
#[derive(Debug)]
pub struct GreenEvaluator {
    d: usize,
    method: GreenMethod,
    tolerance: f64,
    seed: u64,
    cache: Mutex<HashMap<Vec<u64>, GreenValue>>,
}

impl GreenEvaluator {
    pub fn new(d: usize, method: GreenMethod, tolerance: f64, seed: u64) -> Result<GreenEvaluator> {
        if d < 3 {
            return Err(Error::RecurrentDimension { d });
        }
        if tolerance <= 0.0 {
            return Err(Error::InvalidArgument("tolerance must be positive".into()));
        }
        Ok(GreenEvaluator {
            d,
            method,
            tolerance,
            seed,
            cache: Mutex::new(HashMap::new()),
        })
    }

    /// Quadrature evaluator at the default absolute tolerance 1e-8.
    pub fn quadrature(d: usize) -> Result<GreenEvaluator> {
        GreenEvaluator::new(d, GreenMethod::Quadrature, 1e-8, 0)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    /// g(x), memoized on the canonical coordinate multiset.
    pub fn green(&self, x: &LatticePoint) -> Result<GreenValue> {
        if x.dim() != self.d {
            return Err(Error::DimensionMismatch {
                left: self.d,
                right: x.dim(),
            });
        }
        let key = canonical_orders(x);
        if let Some(v) = self.cache.lock().unwrap().get(&key) {
            return Ok(*v);
        }
        let v = match &self.method {
            GreenMethod::Quadrature => green_quadrature(self.d, &key, self.tolerance)?,
            GreenMethod::MonteCarlo { walks, radius } => {
                let est = walk::mc_green(self.d, x.coords(), *walks, *radius, self.seed)?;
                let bound = 3.0 * est.se + est.bias_bound;
                if bound > self.tolerance {
                    return Err(Error::ToleranceUnattainable {
                        tolerance: self.tolerance,
                        detail: format!(
                            "monte carlo bound {bound:e} after {} walks",
                            est.walks
                        ),
                    });
                }
                GreenValue {
                    value: est.value,
                    error_bound: bound,
                }
            }
            GreenMethod::TruncatedSolve { radius } => {
                let v = green_truncated_solve(self.d, x.coords(), *radius, 1e-11)?;
                if v.error_bound > self.tolerance {
                    return Err(Error::ToleranceUnattainable {
                        tolerance: self.tolerance,
                        detail: format!(
                            "truncation bracket {:e} at radius {radius}",
                            v.error_bound
                        ),
                    });
                }
                v
            }
        };
        self.cache.lock().unwrap().insert(key, v);
        Ok(v)
    }

    /// g(a - b).
    pub fn green_diff(&self, a: &LatticePoint, b: &LatticePoint) -> Result<GreenValue> {
        self.green(&a.sub(b)?)
    }

    /// g(0).
    pub fn green_zero(&self) -> Result<GreenValue> {
        self.green(&LatticePoint::origin(self.d))
    }
}

/// Nonzero absolute coordinates, sorted descending: the orbit invariant of
/// x under the symmetries of g.
fn canonical_orders(x: &LatticePoint) -> Vec<u64> {
    let mut v: Vec<u64> = x
        .coords()
        .iter()
        .filter(|&&c| c != 0)
        .map(|&c| c.unsigned_abs())
        .collect();
    v.sort_unstable_by(|a, b| b.cmp(a));
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetry_under_signs_and_permutations() {
        let eval = GreenEvaluator::quadrature(4).unwrap();
        let a = eval
            .green(&LatticePoint::new(vec![2, -1, 0, 0]))
            .unwrap()
            .value;
        let b = eval
            .green(&LatticePoint::new(vec![0, 1, 0, -2]))
            .unwrap()
            .value;
        assert_eq!(a, b); // same cache key, bit-identical
    }

    #[test]
    fn n0_term_lower_bound() {
        // the n=0 term of the series contributes 1, so g(0) >= 1 in any d
        for d in [3usize, 7, 40] {
            let eval = GreenEvaluator::quadrature(d).unwrap();
            assert!(eval.green_zero().unwrap().value >= 1.0);
        }
    }

    #[test]
    fn monte_carlo_method_within_tolerance() {
        let eval = GreenEvaluator::new(
            3,
            GreenMethod::MonteCarlo {
                walks: 300_000,
                radius: 30.0,
            },
            5e-3,
            2024,
        )
        .unwrap();
        let v = eval.green_zero().unwrap();
        assert!((v.value - 1.51638605915).abs() < 5e-3);
    }

    #[test]
    fn dimension_check() {
        let eval = GreenEvaluator::quadrature(3).unwrap();
        assert!(eval.green(&LatticePoint::origin(4)).is_err());
        assert!(GreenEvaluator::quadrature(2).is_err());
    }
}
