//! Dense potential theory for a finite set: killed Green matrix, equilibrium
//! measure, capacity, and hitting distributions.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::lattice::{LatticePoint, Region};
use crate::potential::GreenEvaluator;

/// Default cap on |K| for dense solves.
pub const DEFAULT_DENSE_CAP: usize = 5000;

/// Solved potential-theory quantities for a finite set K.
#[derive(Debug, Clone)]
pub struct PotentialTable {
    pub region: Region,
    /// (I - P_K)^{-1}: expected visits before exiting K.
    pub killed_green: DMatrix<f64>,
    /// Free Green function restricted to K x K.
    pub green_on_k: DMatrix<f64>,
    /// Equilibrium measure e_K, the escape probabilities.
    pub eq_measure: DVector<f64>,
    /// cap(K) = sum of the equilibrium measure.
    pub capacity: f64,
}

/// Build the table for K. The killed Green matrix inverts I - P_K where P_K
/// is the one-step kernel restricted to K; the equilibrium measure solves
/// the last-exit system green_on_k * e = 1.
pub fn potential_table(eval: &GreenEvaluator, k: &Region, cap: usize) -> Result<PotentialTable> {
    if k.len() > cap {
        return Err(Error::CapExceeded {
            requested: k.len(),
            cap,
        });
    }
    if k.dim() != eval.d() {
        return Err(Error::DimensionMismatch {
            left: eval.d(),
            right: k.dim(),
        });
    }
    let n = k.len();
    let inv_2d = 1.0 / (2.0 * eval.d() as f64);

    // I - P_K
    let mut a = DMatrix::<f64>::identity(n, n);
    for (i, p) in k.iter().enumerate() {
        for q in p.neighbors() {
            if let Some(j) = k.position(&q) {
                a[(i, j)] -= inv_2d;
            }
        }
    }
    let lu = a.clone().lu();
    let killed = lu
        .try_inverse()
        .ok_or_else(|| Error::Factorization("I - P_K singular (substochastic kernel bug)".into()))?;
    let killed_green = 0.5 * (&killed + killed.transpose());

    let green_on_k = green_matrix(eval, k)?;
    let chol = green_on_k.clone().cholesky().ok_or_else(|| {
        Error::Factorization("Green matrix on K not positive definite".into())
    })?;
    let ones = DVector::from_element(n, 1.0);
    let mut e = chol.solve(&ones);
    for v in e.iter_mut() {
        if *v < 0.0 {
            if *v < -1e-8 {
                return Err(Error::InvariantFailure(format!(
                    "equilibrium measure entry {v} < 0"
                )));
            }
            *v = 0.0;
        }
    }
    let capacity = e.sum();
    Ok(PotentialTable {
        region: k.clone(),
        killed_green,
        green_on_k,
        eq_measure: e,
        capacity,
    })
}

/// Dense matrix of free Green values g(x - y) over a region.
pub fn green_matrix(eval: &GreenEvaluator, k: &Region) -> Result<DMatrix<f64>> {
    let n = k.len();
    let mut g = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = eval.green_diff(k.point(i), k.point(j))?.value;
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
    }
    Ok(g)
}

/// First-hit distribution of K from x plus the escape mass.
#[derive(Debug, Clone)]
pub struct HitDistribution {
    /// p_y = P_x[H_K < inf, X_{H_K} = y], ordered like the region.
    pub probs: Vec<f64>,
    /// 1 - sum(probs) = P_x[H_K = inf].
    pub escape: f64,
}

/// Hitting distribution by the last-exit identity: for y in K,
/// g(x, y) = sum_z p^K_{x,z} g(z, y), so the row solves the dense system
/// G_K p = g(x, .). Exact up to quadrature tolerance, any dimension.
pub fn hit_distribution(eval: &GreenEvaluator, k: &Region, x: &LatticePoint) -> Result<HitDistribution> {
    let table_free = green_matrix(eval, k)?;
    hit_distribution_with(eval, k, &table_free, x)
}

/// Same as [`hit_distribution`] with a precomputed Green matrix on K.
pub fn hit_distribution_with(
    eval: &GreenEvaluator,
    k: &Region,
    green_on_k: &DMatrix<f64>,
    x: &LatticePoint,
) -> Result<HitDistribution> {
    if x.dim() != k.dim() {
        return Err(Error::DimensionMismatch {
            left: x.dim(),
            right: k.dim(),
        });
    }
    let n = k.len();
    if let Some(i) = k.position(x) {
        let mut probs = vec![0.0; n];
        probs[i] = 1.0;
        return Ok(HitDistribution { probs, escape: 0.0 });
    }
    let chol = green_on_k
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Factorization("Green matrix on K not positive definite".into()))?;
    let mut rhs = DVector::<f64>::zeros(n);
    for j in 0..n {
        rhs[j] = eval.green_diff(x, k.point(j))?.value;
    }
    let mut p = chol.solve(&rhs);
    for v in p.iter_mut() {
        if *v < 0.0 {
            if *v < -1e-7 {
                return Err(Error::InvariantFailure(format!(
                    "hitting probability {v} < 0 beyond numerical slack"
                )));
            }
            *v = 0.0;
        }
    }
    let total: f64 = p.iter().sum();
    if total > 1.0 + 1e-7 {
        return Err(Error::InvariantFailure(format!(
            "hitting probabilities sum to {total} > 1"
        )));
    }
    Ok(HitDistribution {
        probs: p.iter().copied().collect(),
        escape: (1.0 - total).max(0.0),
    })
}

/// P_x[H_K < inf] via the entrance-probability identity
/// sum_y g(x,y) e_K(y); equals 1 exactly for x in K.
pub fn hitting_prob(eval: &GreenEvaluator, x: &LatticePoint, table: &PotentialTable) -> Result<f64> {
    if table.region.contains(x) {
        return Ok(1.0);
    }
    let mut acc = 0.0;
    for (j, y) in table.region.iter().enumerate() {
        acc += eval.green_diff(x, y)?.value * table.eq_measure[j];
    }
    Ok(acc.clamp(0.0, 1.0))
}

/// Hitting distribution through an explicit Dirichlet solve on an enclosing
/// box (independent route, used as a cross-check of the last-exit solve).
///
/// The solve runs on box \ K with value 1 on the target, 0 on the rest of K,
/// and 0 outside the box; the reported `truncation_bound` is the re-entry
/// mass cap(K) * sup_{z on the box shell} g(z - K).
pub struct DirichletHit {
    pub probs: Vec<f64>,
    pub escape: f64,
    pub truncation_bound: f64,
}

pub fn hit_distribution_dirichlet(
    eval: &GreenEvaluator,
    k: &Region,
    x: &LatticePoint,
    box_radius: i64,
    cap_hint: f64,
) -> Result<DirichletHit> {
    let d = eval.d();
    if d > 5 {
        return Err(Error::InvalidArgument(
            "dirichlet box solve is desk-scale only (d <= 5)".into(),
        ));
    }
    if k.position(x).is_some() {
        let mut probs = vec![0.0; k.len()];
        probs[k.position(x).unwrap()] = 1.0;
        return Ok(DirichletHit {
            probs,
            escape: 0.0,
            truncation_bound: 0.0,
        });
    }
    let r = box_radius;
    let side = (2 * r + 1) as usize;
    let n: usize = side.pow(d as u32);
    if n > 5_000_000 {
        return Err(Error::CapExceeded {
            requested: n,
            cap: 5_000_000,
        });
    }
    let idx_of = |p: &LatticePoint| -> Option<usize> {
        let mut idx = 0usize;
        for &c in p.coords().iter().rev() {
            if c.abs() > r {
                return None;
            }
            idx = idx * side + (c + r) as usize;
        }
        Some(idx)
    };
    if idx_of(x).is_none() {
        return Err(Error::InvalidArgument("start point outside box".into()));
    }
    for p in k.iter() {
        if idx_of(p).is_none() {
            return Err(Error::InvalidArgument("target set outside box".into()));
        }
    }
    // mark K cells
    let mut in_k = vec![false; n];
    for p in k.iter() {
        in_k[idx_of(p).unwrap()] = true;
    }
    let inv_2d = 1.0 / (2.0 * d as f64);
    let strides: Vec<usize> = (0..d).map(|a| side.pow(a as u32)).collect();
    let apply = |v: &[f64], out: &mut [f64]| {
        let mut coords = vec![-r; d];
        for (i, o) in out.iter_mut().enumerate() {
            if in_k[i] {
                *o = v[i];
                continue;
            }
            let mut rem = i;
            for cc in coords.iter_mut() {
                *cc = (rem % side) as i64 - r;
                rem /= side;
            }
            let mut acc = 0.0;
            for a in 0..d {
                if coords[a] + 1 <= r {
                    let jj = i + strides[a];
                    if !in_k[jj] {
                        acc += v[jj];
                    }
                }
                if coords[a] - 1 >= -r {
                    let jj = i - strides[a];
                    if !in_k[jj] {
                        acc += v[jj];
                    }
                }
            }
            *o = v[i] - inv_2d * acc;
        }
    };
    let xsidx = idx_of(x).unwrap();
    let mut probs = Vec::with_capacity(k.len());
    for t in 0..k.len() {
        // rhs: (1/2d) * #(neighbors equal to the target)
        let mut b = vec![0.0; n];
        for nb in k.point(t).neighbors() {
            if let Some(i) = idx_of(&nb) {
                if !in_k[i] {
                    b[i] += inv_2d;
                }
            }
        }
        // CG
        let mut sol = vec![0.0; n];
        let mut res = b.clone();
        let mut p = b.clone();
        let mut ap = vec![0.0; n];
        let mut rs: f64 = res.iter().map(|v| v * v).sum();
        let rs0 = rs.sqrt().max(1e-30);
        for _ in 0..40_000 {
            if rs.sqrt() <= 1e-11 * rs0.max(1.0) {
                break;
            }
            apply(&p, &mut ap);
            let denom: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
            if denom <= 0.0 {
                break;
            }
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
        probs.push(sol[xsidx]);
    }
    let total: f64 = probs.iter().sum();
    // re-entry mass via the shell distance to K
    let far = k
        .iter()
        .map(|p| p.coords().iter().map(|c| c.abs()).max().unwrap())
        .max()
        .unwrap();
    let dist = ((r - far) as u64).max(1);
    let g_shell = eval
        .green(&shifted_point(d, dist as i64))?
        .value;
    let truncation_bound = cap_hint * g_shell;
    Ok(DirichletHit {
        probs,
        escape: (1.0 - total).max(0.0),
        truncation_bound,
    })
}

fn shifted_point(d: usize, dist: i64) -> LatticePoint {
    let mut c = vec![0i64; d];
    c[0] = dist;
    LatticePoint::new(c)
}
