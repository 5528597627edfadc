//! Free Green function of simple random walk, three ways: Bessel-product
//! quadrature, truncated visit-counting Monte Carlo, and a zero-boundary
//! box solve.
//!
//!     cargo run --release --example green_function

use gffperc::lattice::LatticePoint;
use gffperc::potential::{green_quadrature, green_truncated_solve, mc_green, GreenEvaluator};

fn main() {
    println!("g(0) across dimensions (quadrature):");
    for d in [3usize, 4, 5, 10, 20, 50, 100] {
        let g = green_quadrature(d, &[], 1e-10).unwrap();
        let expansion = 1.0 + 1.0 / (2.0 * d as f64);
        println!(
            "  d = {d:>3}: g(0) = {:.9}   1 + 1/2d = {expansion:.9}   residual {:+.2e}",
            g.value,
            g.value - expansion
        );
    }

    println!("\nthree evaluators at d = 3, x = 0:");
    let quad = green_quadrature(3, &[], 1e-10).unwrap();
    println!("  quadrature      {:.8} +- {:.1e}", quad.value, quad.error_bound);
    let mc = mc_green(3, &[0, 0, 0], 2_000_000, 30.0, 7).unwrap();
    println!(
        "  monte carlo     {:.8} +- {:.1e} (se), bias bound {:.1e}",
        mc.value, mc.se, mc.bias_bound
    );
    let ts = green_truncated_solve(3, &[0, 0, 0], 20, 1e-11).unwrap();
    println!("  truncated solve {:.8} +- {:.1e}", ts.value, ts.error_bound);

    println!("\ndecay along the axis (d = 3):");
    let eval = GreenEvaluator::quadrature(3).unwrap();
    for r in [1i64, 2, 4, 8, 16] {
        let x = LatticePoint::new(vec![r, 0, 0]);
        let g = eval.green(&x).unwrap().value;
        println!(
            "  g({r:>2} e_1) = {:.7}   r * g = {:.5}  (leading constant 3/2pi = {:.5})",
            g,
            r as f64 * g,
            3.0 / (2.0 * std::f64::consts::PI)
        );
    }
}
