//! Deterministic evaluation of the two renormalization schemes, exact in
//! log space: the crossing-probability upper-bound recursion on geometric
//! scales, and the good-site lower-bound recursion on slowly growing
//! two-dimensional scales.

mod lb;
mod ub;

pub use lb::{
    lb_propagate, lb_scales, lb_schedule, ln_k1_exact, DualityReport, LBSchedule, LBTrace, LbRow,
    LbOverrides, LbScaleRow, SCALE_EXPONENT,
};
pub use ub::{
    alpha_n, decay_floor, default_seed_width, implied_c2, ln_embedding_count_exact,
    local_conn_rate, m_n, min_default_dimension, seed_box_log_cardinality, ub_final_chain,
    ub_propagate, ub_schedule, ub_sequences, UBSchedule, UBTrace, UbFinalReport, UbOverrides,
    UbPropagation, UbPropagationRow, UbRow,
};

use serde::Serialize;

use crate::error::Result;

/// Flatten any serializable per-level row list into CSV (header from the
/// first row's JSON field names; values in field order).
pub fn rows_to_csv<T: Serialize, W: std::io::Write>(w: &mut W, rows: &[T]) -> Result<()> {
    if rows.is_empty() {
        return Ok(());
    }
    let first = serde_json::to_value(&rows[0])?;
    let obj = first
        .as_object()
        .ok_or_else(|| crate::error::Error::InvalidArgument("rows must be objects".into()))?;
    let keys: Vec<String> = obj.keys().cloned().collect();
    write!(w, "{}\r\n", keys.join(","))?;
    for row in rows {
        let v = serde_json::to_value(row)?;
        let o = v.as_object().unwrap();
        let cells: Vec<String> = keys
            .iter()
            .map(|k| match &o[k] {
                serde_json::Value::String(s) => s.replace(',', ";"),
                other => other.to_string(),
            })
            .collect();
        write!(w, "{}\r\n", cells.join(","))?;
    }
    Ok(())
}
