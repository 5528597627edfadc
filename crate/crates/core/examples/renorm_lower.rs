//! The lower-bound (good-site) renormalization calculator: slowly growing
//! 2-D scales, sprinkling amounts, concentration cutoffs, bad-crossing
//! propagation, and the final duality chain.
//!
//!     cargo run --release --example renorm_lower

use gffperc::constants::ConstantsLedger;
use gffperc::renorm::{lb_propagate, lb_scales, lb_schedule, LbOverrides};

fn main() {
    let ledger = ConstantsLedger::with_defaults();
    let d = 60;
    let eps = 0.5;
    let schedule = lb_schedule(d, eps, &ledger, &LbOverrides::default()).unwrap();
    println!("d = {d}, base scale L_0 = {}", schedule.big_l0);

    println!("\nscales L_n and ratios l_n = 20 ceil(L_n^(1/10)):");
    for row in lb_scales(&schedule, 6) {
        match (row.big_l_exact, row.l_exact) {
            (Some(big), Some(l)) => println!("  n = {}: L = {big}, l = {l}", row.n),
            _ => println!(
                "  n = {}: ln L = {:.2}, ln l = {:.3}",
                row.n, row.ln_big_l, row.ln_l
            ),
        }
    }

    let l0 = lb_scales(&schedule, 0)[0].ln_l;
    let trace = lb_propagate(&schedule, -3.0 * l0, 40, Some(-30.0)).unwrap();
    println!("\npropagation of the bad-crossing bound from q_0 = l_0^(-3):");
    for row in trace.rows.iter().take(5) {
        println!(
            "  n = {}: log q = {:>10.2}  target {:>8.2}  beta = {:.1}  ln delta = {:.1}",
            row.n, row.log_q, row.log_q_bound, row.beta, row.ln_delta
        );
    }
    println!("  ... all {} levels within bound: {}", trace.rows.len(), trace.propagation_ok);
    println!(
        "\nsprinkling sum: {:.3e} <= eps = {eps}: {} (convergence predicted: {})",
        trace.delta_sum, trace.delta_sum_ok, trace.delta_converge_predicted
    );
    if let Some(from) = trace.delta_decreasing_from {
        println!("delta_n decreasing from n = {from}");
    }
    if let Some(dual) = &trace.duality {
        println!(
            "duality chain c d^2 P[(G)^c] + 3 sum l_n q_n = {:.3e} < 1: {}",
            dual.value, dual.verdict
        );
    }
    println!("conditional on placeholder constants: {:?}", trace.conditional_on);
}
