//! Killed Green matrices, equilibrium measures, capacities and hitting
//! distributions for small sets, with the Monte Carlo cross-check.
//!
//!     cargo run --release --example potential_tables

use gffperc::lattice::{ball, LatticePoint, Norm, Region};
use gffperc::potential::{
    hit_distribution, hitting_prob, mc_hit_distribution, potential_table, GreenEvaluator,
};

fn main() {
    let eval = GreenEvaluator::quadrature(3).unwrap();
    let g0 = eval.green_zero().unwrap().value;

    let origin = LatticePoint::origin(3);
    let singleton = Region::singleton(origin.clone());
    let t = potential_table(&eval, &singleton, 100).unwrap();
    println!("cap({{0}}) = {:.6} = 1/g(0) = {:.6}", t.capacity, 1.0 / g0);

    let b1 = ball(&origin, 1.0, Norm::L1, 100).unwrap();
    let t1 = potential_table(&eval, &b1, 100).unwrap();
    println!("cap(B_1(0,1)) = {:.6} ({} points)", t1.capacity, b1.len());
    print!("equilibrium measure:");
    for e in t1.eq_measure.iter() {
        print!(" {e:.4}");
    }
    println!();

    // hitting distribution of the singleton from points along the axis
    println!("\nP_x[H_0 < inf] = g(x)/g(0):");
    for r in [1i64, 2, 3] {
        let x = LatticePoint::new(vec![r, 0, 0]);
        let h = hit_distribution(&eval, &singleton, &x).unwrap();
        let gx = eval.green(&x).unwrap().value;
        println!(
            "  x = {r}e_1: solve {:.6}   g(x)/g(0) {:.6}   escape {:.6}",
            h.probs[0],
            gx / g0,
            h.escape
        );
    }

    // entrance identity against Monte Carlo
    let k = ball(&origin, 1.0, Norm::L1, 100).unwrap();
    let table = potential_table(&eval, &k, 100).unwrap();
    let x = LatticePoint::new(vec![4, 0, 0]);
    let exact = hitting_prob(&eval, &x, &table).unwrap();
    let eq: Vec<f64> = table.eq_measure.iter().copied().collect();
    let targets: Vec<Vec<i64>> = k.iter().map(|p| p.coords().to_vec()).collect();
    let mc = mc_hit_distribution(3, &targets, x.coords(), 1_000_000, 40.0, 11, Some(&eq)).unwrap();
    println!(
        "\nP_4e1[H_K < inf]: entrance identity {exact:.6}, monte carlo {:.6} +- {:.6}",
        mc.total.value, mc.total.se
    );
}
