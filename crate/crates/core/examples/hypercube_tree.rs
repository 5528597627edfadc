//! Tree embedded in the hypercube, the alpha-coefficient recursion, the
//! pathwise branching-domination coupling, and the Chernoff tail check.
//!
//!     cargo run --release --example hypercube_tree

use gffperc::hypercube::{
    alpha_coefficients, chernoff_check, embed_tree, gw_domination_check, GWParams,
};
use gffperc::potential::GreenEvaluator;

fn main() {
    let d = 15;
    let eval = GreenEvaluator::quadrature(d).unwrap();
    let tree = embed_tree(d, 3, 4).unwrap();
    println!(
        "tree in {{0,1}}^{d}: depth 3, branching 4, {} nodes (4 + 16 + 64)",
        tree.len()
    );

    let gw = GWParams::from_formula(d, 0.3).unwrap();
    println!(
        "formula parameters at eps = 0.3: depth b = {}, survival p = d^(-0.55) = {:.4},",
        gw.b_formula, gw.p
    );
    println!(
        "substantial threshold floor(d^eps/b)^(b-1) = {} -> clamped to {} at this d",
        gw.raw_threshold, gw.threshold
    );
    println!("(the formula regime needs d >= b^(1/eps) ~ 1.8e5; the tree knobs stay toy-scale)");

    let alpha = alpha_coefficients(&eval, &tree).unwrap();
    println!(
        "\nalpha sums: max {:.5} (cap 2), identity residual {:.1e}",
        alpha.max_sum, alpha.identity_residual
    );
    println!(
        "hitting probabilities: max {:.5}, times d = {:.3}",
        alpha.max_hit_prob, alpha.hit_prob_times_d
    );

    let rep = gw_domination_check(&eval, &tree, &gw, 20_000, 5, 1.0).unwrap();
    println!("\npathwise coupling over {} samples:", rep.samples);
    println!(
        "  floor {:.3}, trigger {:.4}, target {:.4}",
        rep.floor, rep.trigger, rep.target
    );
    println!(
        "  inclusion applicable {} times, violations: {}",
        rep.applicable, rep.violations
    );
    println!(
        "  marginal P[psi >= trigger | above floor] = {:.4} +- {:.4} (gaussian oracle {:.4})",
        rep.marginal_freq, rep.marginal_se, rep.marginal_predicted
    );
    println!(
        "  against the formula p = {:.4}: beats it: {} (expected only for large d)",
        rep.p_formula, rep.marginal_beats_formula
    );

    let c = chernoff_check(100, 0.1, 0.5).unwrap();
    println!(
        "\nchernoff at (n, p, delta) = (100, 0.1, 0.5): exact {:.5} <= bound {:.5}",
        c.exact_tail, c.bound
    );
}
