//! Lower-bound (good-site) renormalization calculator on the embedded
//! two-dimensional sublattice: slowly growing scales, sprinkling amounts
//! delta_n, extreme-value cutoffs beta_n, and the bad-crossing recursion
//! q_{n+1} <= c_0' l_n^2 (q_n^2 + eps_n) propagated in log space.

use serde::{Deserialize, Serialize};

use crate::constants::ConstantsLedger;
use crate::error::{Error, Result};
use crate::gff::btis_c1;
use crate::stats::log_add_exp;

/// Scale growth exponent a = 1/10.
pub const SCALE_EXPONENT: f64 = 0.1;

#[derive(Debug, Clone, Default)]
pub struct LbOverrides {
    pub big_l0: Option<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LBSchedule {
    pub d: usize,
    pub eps: f64,
    pub a: f64,
    pub big_l0: u64,
    /// c_1 = sup_d sqrt(2 g(0)), the Gaussian concentration constant.
    pub c_1: f64,
    pub constants: std::collections::BTreeMap<String, crate::constants::ConstantEntry>,
}

/// Build the schedule; the default base scale is ceil((c_0 / c_1') d).
pub fn lb_schedule(
    d: usize,
    eps: f64,
    ledger: &ConstantsLedger,
    overrides: &LbOverrides,
) -> Result<LBSchedule> {
    if d < 5 {
        return Err(Error::InvalidArgument(
            "the lower-bound scheme needs d >= 5 (exponent d/2 - 2 > 0)".into(),
        ));
    }
    if eps <= 0.0 {
        return Err(Error::InvalidArgument("eps must be positive".into()));
    }
    let c_0 = ledger.get("c_0")?;
    let c_1p = ledger.get("c_1_prime")?;
    let big_l0 = overrides
        .big_l0
        .unwrap_or_else(|| ((c_0 / c_1p) * d as f64).ceil() as u64)
        .max(2);
    Ok(LBSchedule {
        d,
        eps,
        a: SCALE_EXPONENT,
        big_l0,
        c_1: btis_c1(),
        constants: ledger.snapshot(),
    })
}

/// The scale pair at one level: L_n (log plus exact while it fits) and
/// l_n = 20 ceil(L_n^a).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LbScaleRow {
    pub n: u32,
    pub ln_big_l: f64,
    /// Exact L_n while representable.
    pub big_l_exact: Option<u128>,
    pub ln_l: f64,
    pub l_exact: Option<u128>,
}

/// Generate scales L_0, ..., L_{n_max}; the ratio l_n = 20 ceil(L_n^a) is
/// computed exactly while L_n fits in integers and through logs beyond
/// (where the ceiling shifts ln l by under 1e-15 and nothing downstream can
/// see it).
pub fn lb_scales(s: &LBSchedule, n_max: u32) -> Vec<LbScaleRow> {
    let mut rows = Vec::with_capacity(n_max as usize + 1);
    let mut ln_big = (s.big_l0 as f64).ln();
    let mut exact: Option<u128> = Some(s.big_l0 as u128);
    for n in 0..=n_max {
        let (ln_l, l_exact) = match exact {
            Some(bl) => {
                let l = 20u128 * ((bl as f64).powf(s.a).ceil() as u128);
                ((l as f64).ln(), Some(l))
            }
            None => {
                let ln_ceil = s.a * ln_big; // ceil invisible at this scale
                ((20.0f64).ln() + ln_ceil, None)
            }
        };
        rows.push(LbScaleRow {
            n,
            ln_big_l: ln_big,
            big_l_exact: exact,
            ln_l,
            l_exact,
        });
        ln_big += ln_l;
        exact = match (exact, l_exact) {
            (Some(bl), Some(l)) => bl.checked_mul(l),
            _ => None,
        };
    }
    rows
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LbRow {
    pub n: u32,
    pub ln_big_l: f64,
    pub ln_l: f64,
    /// Extreme-value cutoff beta_n.
    pub beta: f64,
    /// ln of the sprinkling amount delta_n.
    pub ln_delta: f64,
    /// ln of the BTIS failure mass eps_n.
    pub ln_eps: f64,
    /// ln q_n along the propagation.
    pub log_q: f64,
    /// The target bound -3 ln l_n.
    pub log_q_bound: f64,
    pub within_bound: bool,
    /// The step condition 2 c_0' l_n^{-4} l_{n+1}^3 <= 1.
    pub step_condition_ok: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DualityReport {
    /// c d^2 P[(G)^c] + 3 sum_n l_n q_n.
    pub value: f64,
    pub verdict: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LBTrace {
    pub rows: Vec<LbRow>,
    /// Seed condition q_0 <= l_0^{-3}.
    pub seed_ok: bool,
    /// Step condition at every level.
    pub all_steps_ok: bool,
    /// sum delta_n over the trace (plus a ratio-test remainder when the
    /// terms are decreasing); +inf when the late terms grow.
    pub delta_sum: f64,
    /// sum delta_n <= eps.
    pub delta_sum_ok: bool,
    /// The polynomial convergence test a (d/2 - 2) > 2: L_n^2 loses to
    /// l_n^{-(d/2-2)} only when the dimension clears this bar, so the sum
    /// can only settle for d above it.
    pub delta_converge_predicted: bool,
    /// q_n <= l_n^{-3} at every level.
    pub propagation_ok: bool,
    /// Preconditions imply propagation: the inductive step re-verified
    /// numerically rather than trusted. False marks an internal
    /// inconsistency.
    pub consistent: bool,
    /// Index from which delta_n decreases monotonically, if any.
    pub delta_decreasing_from: Option<u32>,
    pub duality: Option<DualityReport>,
    pub conditional_on: Vec<String>,
}

/// ln |K_1| for the union of hypercubes over the l1-dilated 2-D box of
/// radius 3 L_n: exact dilated-square count times 2^d.
pub fn ln_k1_exact(d: usize, ln_big_l: f64, big_l_exact: Option<u128>) -> f64 {
    match big_l_exact {
        Some(bl) if bl < (1u128 << 40) => {
            let side = 6.0 * bl as f64 + 1.0;
            (side * side + 4.0 * side).ln() + d as f64 * (2.0f64).ln()
        }
        _ => {
            // side^2 dominates: ln(side^2 (1 + 4/side))
            let ln_side = (6.0f64).ln() + ln_big_l;
            2.0 * ln_side + (4.0 * (-ln_side).exp()).ln_1p() + d as f64 * (2.0f64).ln()
        }
    }
}

/// Propagate the bad-crossing recursion from ln q_0 = `log_q0`.
///
/// `log_p_good_complement`, when given, is ln P[(G_0)^c] for the good event
/// at the target level; the duality chain c d^2 P[(G)^c] + 3 sum l_n q_n is
/// then evaluated and its verdict (< 1, percolation of good sites) reported.
pub fn lb_propagate(
    s: &LBSchedule,
    log_q0: f64,
    n_max: u32,
    log_p_good_complement: Option<f64>,
) -> Result<LBTrace> {
    if n_max > 64 {
        return Err(Error::InvalidArgument("n_max <= 64".into()));
    }
    let c = get(&s.constants, "c")?;
    let c_0p = get(&s.constants, "c_0_prime")?;
    let d = s.d as f64;
    let scales = lb_scales(s, n_max + 1);

    let seed_bound = -3.0 * scales[0].ln_l;
    if log_q0 > seed_bound {
        return Err(Error::SeedCondition(format!(
            "seed estimate must satisfy q_0 <= l_0^(-3): log q_0 = {log_q0:.6} > {seed_bound:.6}"
        )));
    }

    let mut rows: Vec<LbRow> = Vec::with_capacity(n_max as usize + 1);
    let mut lq = log_q0;
    let mut all_steps = true;
    let mut prop_ok = true;
    let mut ln_deltas = Vec::new();
    for n in 0..=n_max {
        let sc = &scales[n as usize];
        let sc_next = &scales[n as usize + 1];
        let ln_k1 = ln_k1_exact(s.d, sc.ln_big_l, sc.big_l_exact);
        // beta_n = c_1 (sqrt(ln(2 c_0' l_n^2 l_{n+1}^3)) + sqrt(ln |K_1|))
        let ln_union = (2.0 * c_0p).ln() + 2.0 * sc.ln_l + 3.0 * sc_next.ln_l;
        let beta = s.c_1 * (ln_union.sqrt() + ln_k1.sqrt());
        // delta_n = 2 c beta_n L_n^2 2^d l_n^{-(d/2-2)}
        let ln_delta = (2.0 * c).ln() + beta.ln() + 2.0 * sc.ln_big_l + d * (2.0f64).ln()
            - (d / 2.0 - 2.0) * sc.ln_l;
        // eps_n from concentration: exp(-(beta/c_1 - sqrt(ln |K_1|))^2)
        let gap = beta / s.c_1 - ln_k1.sqrt();
        let ln_eps = -gap * gap;
        // step condition 2 c_0' l_n^{-4} l_{n+1}^3 <= 1
        let step_ok = (2.0 * c_0p).ln() - 4.0 * sc.ln_l + 3.0 * sc_next.ln_l <= 0.0;
        all_steps &= step_ok;
        let bound = -3.0 * sc.ln_l;
        let within = lq <= bound + 1e-12;
        prop_ok &= within;
        rows.push(LbRow {
            n,
            ln_big_l: sc.ln_big_l,
            ln_l: sc.ln_l,
            beta,
            ln_delta,
            ln_eps,
            log_q: lq,
            log_q_bound: bound,
            within_bound: within,
            step_condition_ok: step_ok,
        });
        ln_deltas.push(ln_delta);
        // recursion step
        lq = (c_0p).ln() + 2.0 * sc.ln_l + log_add_exp(2.0 * lq, ln_eps);
    }

    // delta sum with a geometric remainder when the tail is decreasing;
    // growing late terms mean divergence
    let mut log_sum = f64::NEG_INFINITY;
    for &ld in &ln_deltas {
        log_sum = log_add_exp(log_sum, ld);
    }
    let len = ln_deltas.len();
    let delta_sum = if len >= 2 && ln_deltas[len - 1] < ln_deltas[len - 2] {
        let log_r = ln_deltas[len - 1] - ln_deltas[len - 2];
        let r = log_r.exp();
        log_add_exp(log_sum, ln_deltas[len - 1] + log_r - (1.0 - r).ln()).exp()
    } else if len >= 2 {
        f64::INFINITY
    } else {
        log_sum.exp()
    };
    let delta_decreasing_from = (1..len)
        .find(|&i| (i..len).all(|j| ln_deltas[j] < ln_deltas[j - 1]))
        .map(|i| i as u32);
    let delta_converge_predicted = s.a * (d / 2.0 - 2.0) > 2.0;

    let duality = log_p_good_complement.map(|lp| {
        let mut bad_sum = 0.0;
        for row in &rows {
            bad_sum += 3.0 * (row.ln_l + row.log_q).exp();
        }
        let value = c * d * d * lp.exp() + bad_sum;
        DualityReport {
            value,
            verdict: value < 1.0,
        }
    });

    let seed_ok = log_q0 <= seed_bound;
    let delta_sum_ok = delta_sum <= s.eps;
    let preconditions = seed_ok && all_steps;
    Ok(LBTrace {
        rows,
        seed_ok,
        all_steps_ok: all_steps,
        delta_sum,
        delta_sum_ok,
        delta_converge_predicted,
        propagation_ok: prop_ok,
        consistent: (!preconditions || prop_ok)
            && (!(preconditions && delta_converge_predicted) || delta_sum_ok),
        delta_decreasing_from,
        duality,
        conditional_on: s
            .constants
            .iter()
            .filter(|(_, e)| e.placeholder)
            .map(|(k, _)| k.clone())
            .collect(),
    })
}

fn get(
    snapshot: &std::collections::BTreeMap<String, crate::constants::ConstantEntry>,
    name: &str,
) -> Result<f64> {
    snapshot
        .get(name)
        .map(|e| e.value)
        .ok_or_else(|| Error::MissingConstant { name: name.into() })
}
