//! The upper-bound renormalization calculator: scale schedule, sprinkled
//! level sequence, squared-decay propagation, and the final union-bound
//! chain, all in log space.
//!
//!     cargo run --release --example renorm_upper

use gffperc::constants::ConstantsLedger;
use gffperc::renorm::{
    default_seed_width, min_default_dimension, ub_final_chain, ub_propagate, ub_schedule,
    ub_sequences, UbOverrides,
};

fn main() {
    let ledger = ConstantsLedger::with_defaults();
    let eps = 1.0;

    let n = default_seed_width(eps, 1.0, 1.0);
    println!("seed width N(eps = {eps}) with unit constants: {n}");
    println!(
        "smallest d admitting the default scales L_0 = l_0 = d: {}",
        min_default_dimension(n)
    );

    // the real parameter regime
    let d = 100_000;
    let schedule = ub_schedule(d, eps, &ledger, &UbOverrides::default()).unwrap();
    println!(
        "\nd = {d}: k_0 = {:.3}, h_0 = h_as(1 + eps/2) = {:.4}",
        schedule.k0, schedule.h0
    );
    let trace = ub_sequences(&schedule, 40).unwrap();
    println!(
        "sprinkling sum h_inf - h_0 = {:.3e} <= eps/2 = {}: {}",
        trace.h_infty_minus_h0,
        eps / 2.0,
        trace.sprinkling_verdict
    );

    let prop = ub_propagate(&schedule, -schedule.k0, 40).unwrap();
    println!("\npropagation from the edge seed log p_0 = -k_0:");
    for row in prop.rows.iter().take(6) {
        println!(
            "  n = {:>2}: log p = {:>14.1}   bound {:>14.1}   within: {}",
            row.n, row.log_p, row.log_bound, row.within_bound
        );
    }
    println!("  ... all {} levels within bound: {}", prop.rows.len(), prop.all_within_bound);

    let final_rep = ub_final_chain(&schedule, &prop, &ledger).unwrap();
    println!("\nfinal chain ln(2^d |Lambda_n| p_n):");
    for (i, v) in final_rep.chain.iter().take(5).enumerate() {
        println!("  n = {i}: {v:.1}");
    }
    println!(
        "strictly decreasing: {}, tends to zero: {}",
        final_rep.strictly_decreasing, final_rep.tends_to_zero
    );
    println!(
        "seed estimate {:.1} vs requirement {:.1} (meets: {}) vs -k_0 {:.1} (meets: {})",
        final_rep.seed_estimate_log,
        final_rep.seed_requirement_log,
        final_rep.seed_meets_requirement,
        -schedule.k0,
        final_rep.seed_meets_k0
    );
    println!(
        "path complexity: c_6 = {}, N_0 = {}, ell = {:.4}, ln C_d = {:.3e}",
        final_rep.c_6, final_rep.n_0, final_rep.ell, final_rep.log_complexity_cd
    );
    println!("conditional on placeholder constants: {:?}", final_rep.conditional_on);
}
