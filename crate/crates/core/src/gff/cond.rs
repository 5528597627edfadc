//! Conditional decomposition of the field over a finite conditioning set:
//! the field at a target point splits into a shift (hitting-distribution
//! average of the conditioned values) plus an independent centered field
//! whose covariance is the Green function killed on the conditioning set.

use nalgebra::DMatrix;

use crate::error::Result;
use crate::lattice::Region;
use crate::potential::{green_matrix, hit_distribution_with, GreenEvaluator};

#[derive(Debug, Clone)]
pub struct ConditionalSplit {
    pub conditioning: Region,
    pub targets: Region,
    /// Row x: the weights p^K_{x, .} of the conditional mean. Rows of
    /// points inside the conditioning set are indicators.
    pub shift_coeffs: DMatrix<f64>,
    /// Covariance of the independent remainder: g killed on K. Rows and
    /// columns of conditioned points vanish.
    pub killed_cov: DMatrix<f64>,
}

/// Build the split. Targets may overlap the conditioning set.
pub fn conditional_split(
    eval: &GreenEvaluator,
    conditioning: &Region,
    targets: &Region,
) -> Result<ConditionalSplit> {
    let nk = conditioning.len();
    let nt = targets.len();
    let g_kk = green_matrix(eval, conditioning)?;

    let mut shift = DMatrix::<f64>::zeros(nt, nk);
    for (t, x) in targets.iter().enumerate() {
        let h = hit_distribution_with(eval, conditioning, &g_kk, x)?;
        for (j, p) in h.probs.iter().enumerate() {
            shift[(t, j)] = *p;
        }
    }

    // g_{K^c}(x, y) = g(x, y) - sum_z p^K_{x,z} g(z, y)
    let mut g_tt = DMatrix::<f64>::zeros(nt, nt);
    let mut g_kt = DMatrix::<f64>::zeros(nk, nt);
    for (t, x) in targets.iter().enumerate() {
        for (u, y) in targets.iter().enumerate().skip(t) {
            let v = eval.green_diff(x, y)?.value;
            g_tt[(t, u)] = v;
            g_tt[(u, t)] = v;
        }
    }
    for (j, z) in conditioning.iter().enumerate() {
        for (u, y) in targets.iter().enumerate() {
            g_kt[(j, u)] = eval.green_diff(z, y)?.value;
        }
    }
    let mut killed = g_tt - &shift * g_kt;
    // symmetrize and pin the conditioned rows/columns to zero
    killed = 0.5 * (&killed + killed.transpose());
    for (t, x) in targets.iter().enumerate() {
        if conditioning.contains(x) {
            for u in 0..nt {
                killed[(t, u)] = 0.0;
                killed[(u, t)] = 0.0;
            }
        }
    }
    Ok(ConditionalSplit {
        conditioning: conditioning.clone(),
        targets: targets.clone(),
        shift_coeffs: shift,
        killed_cov: killed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{ball, LatticePoint, Norm};
    use rand::Rng;
    use rand::SeedableRng;

    fn eval3() -> GreenEvaluator {
        GreenEvaluator::quadrature(3).unwrap()
    }

    #[test]
    fn conditioned_point_is_pinned() {
        let eval = eval3();
        let k = ball(&LatticePoint::origin(3), 1.0, Norm::L1, 100).unwrap();
        let split = conditional_split(&eval, &k, &k).unwrap();
        for t in 0..k.len() {
            assert_eq!(split.killed_cov[(t, t)], 0.0);
            let row: Vec<f64> = (0..k.len()).map(|j| split.shift_coeffs[(t, j)]).collect();
            for (j, v) in row.iter().enumerate() {
                if j == t {
                    assert_eq!(*v, 1.0);
                } else {
                    assert_eq!(*v, 0.0);
                }
            }
        }
    }

    #[test]
    fn singleton_conditioning_coefficient() {
        let eval = eval3();
        let k = Region::singleton(LatticePoint::origin(3));
        let t = Region::singleton(LatticePoint::new(vec![1, 0, 0]));
        let split = conditional_split(&eval, &k, &t).unwrap();
        let want = 0.516386059151978 / 1.516386059151978;
        assert!((split.shift_coeffs[(0, 0)] - want).abs() < 1e-8);
        // remainder variance g(0) - g(e1)^2/g(0)
        let g0 = 1.516386059151978;
        let g1 = 0.516386059151978;
        assert!((split.killed_cov[(0, 0)] - (g0 - g1 * g1 / g0)).abs() < 1e-8);
    }

    #[test]
    fn shift_rows_are_subprobabilities() {
        let eval = eval3();
        let k = ball(&LatticePoint::origin(3), 1.0, Norm::L1, 100).unwrap();
        let targets = ball(&LatticePoint::origin(3), 2.0, Norm::Linf, 1000).unwrap();
        let split = conditional_split(&eval, &k, &targets).unwrap();
        for t in 0..targets.len() {
            let mut row_sum = 0.0;
            for j in 0..k.len() {
                assert!(split.shift_coeffs[(t, j)] >= 0.0);
                row_sum += split.shift_coeffs[(t, j)];
            }
            assert!(row_sum <= 1.0 + 1e-9);
        }
    }

    #[test]
    fn killed_cov_matches_schur_complement() {
        // independent route: Gaussian conditional covariance on the joint
        // region equals the killed Green matrix
        let eval = eval3();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(31);
        for _ in 0..6 {
            let mut kpts = Vec::new();
            while kpts.len() < 3 {
                let p = LatticePoint::new(vec![
                    rng.gen_range(-2i64..=2),
                    rng.gen_range(-2i64..=2),
                    rng.gen_range(-2i64..=2),
                ]);
                if !kpts.contains(&p) {
                    kpts.push(p);
                }
            }
            let k = Region::from_points(kpts.clone()).unwrap();
            let mut tpts = Vec::new();
            while tpts.len() < 3 {
                let p = LatticePoint::new(vec![
                    rng.gen_range(-3i64..=3),
                    rng.gen_range(-3i64..=3),
                    rng.gen_range(-3i64..=3),
                ]);
                if !tpts.contains(&p) && !k.contains(&p) {
                    tpts.push(p);
                }
            }
            let targets = Region::from_points(tpts).unwrap();
            let split = conditional_split(&eval, &k, &targets).unwrap();

            let g_kk = green_matrix(&eval, &k).unwrap();
            let mut g_kt = DMatrix::<f64>::zeros(k.len(), targets.len());
            for (j, z) in k.iter().enumerate() {
                for (u, y) in targets.iter().enumerate() {
                    g_kt[(j, u)] = eval.green_diff(z, y).unwrap().value;
                }
            }
            let mut g_tt = DMatrix::<f64>::zeros(targets.len(), targets.len());
            for (t, x) in targets.iter().enumerate() {
                for (u, y) in targets.iter().enumerate() {
                    g_tt[(t, u)] = eval.green_diff(x, y).unwrap().value;
                }
            }
            let chol = g_kk.cholesky().unwrap();
            let schur = &g_tt - g_kt.transpose() * chol.solve(&g_kt);
            for t in 0..targets.len() {
                for u in 0..targets.len() {
                    assert!(
                        (split.killed_cov[(t, u)] - schur[(t, u)]).abs() < 1e-6,
                        "({t},{u}): {} vs {}",
                        split.killed_cov[(t, u)],
                        schur[(t, u)]
                    );
                }
            }
        }
    }

    #[test]
    fn killed_cov_matches_killed_box_solve() {
        // second independent route: expected visits before hitting K,
        // computed by a matrix-free solve of (I - P) on a large box minus K;
        // truncation only lowers it, by at most the box re-entry mass
        let eval = eval3();
        let k = Region::from_points(vec![
            LatticePoint::origin(3),
            LatticePoint::new(vec![1, 0, 0]),
        ])
        .unwrap();
        let targets = Region::from_points(vec![
            LatticePoint::new(vec![0, 1, 0]),
            LatticePoint::new(vec![-1, 0, 0]),
        ])
        .unwrap();
        let split = conditional_split(&eval, &k, &targets).unwrap();

        let big = ball(&LatticePoint::origin(3), 14.0, Norm::Linf, 100_000).unwrap();
        let pts: Vec<_> = big.iter().filter(|p| !k.contains(p)).cloned().collect();
        let boxed = Region::from_points(pts).unwrap();
        let n = boxed.len();
        let adj: Vec<Vec<usize>> = boxed
            .iter()
            .map(|p| {
                p.neighbors()
                    .into_iter()
                    .filter_map(|q| boxed.position(&q))
                    .collect()
            })
            .collect();
        let apply = |v: &[f64], out: &mut [f64]| {
            for i in 0..n {
                let s: f64 = adj[i].iter().map(|&j| v[j]).sum();
                out[i] = v[i] - s / 6.0;
            }
        };
        let solve_col = |y: usize| -> Vec<f64> {
            let mut b = vec![0.0; n];
            b[y] = 1.0;
            let mut sol = vec![0.0; n];
            let mut res = b.clone();
            let mut p = b.clone();
            let mut ap = vec![0.0; n];
            let mut rs: f64 = 1.0;
            for _ in 0..4000 {
                if rs.sqrt() < 1e-11 {
                    break;
                }
                apply(&p, &mut ap);
                let denom: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
                let alpha = rs / denom;
                for i in 0..n {
                    sol[i] += alpha * p[i];
                    res[i] -= alpha * ap[i];
                }
                let rs_new: f64 = res.iter().map(|v| v * v).sum();
                let beta = rs_new / rs;
                rs = rs_new;
                for i in 0..n {
                    p[i] = res[i] + beta * p[i];
                }
            }
            sol
        };
        // truncation bound: re-entry visits after leaving the radius-14 box
        let bound = 0.04;
        for (u, y) in targets.iter().enumerate() {
            let col = solve_col(boxed.position(y).unwrap());
            for (t, x) in targets.iter().enumerate() {
                let killed_box = col[boxed.position(x).unwrap()];
                let exact = split.killed_cov[(t, u)];
                assert!(killed_box <= exact + 1e-7, "({t},{u})");
                assert!(exact - killed_box < bound, "({t},{u}): {exact} vs {killed_box}");
            }
        }
    }
}
