//! Conditional decomposition over a finite set: hitting-distribution shifts
//! plus an independent field with killed covariance, checked against the
//! Gaussian conditional law.
//!
//!     cargo run --release --example conditional_field

use gffperc::gff::conditional_split;
use gffperc::lattice::{ball, LatticePoint, Norm, Region};
use gffperc::potential::GreenEvaluator;

fn main() {
    let eval = GreenEvaluator::quadrature(3).unwrap();
    let g0 = eval.green_zero().unwrap().value;

    // condition on the origin, look at its neighbor
    let k = Region::singleton(LatticePoint::origin(3));
    let target = Region::singleton(LatticePoint::new(vec![1, 0, 0]));
    let split = conditional_split(&eval, &k, &target).unwrap();
    let g1 = eval.green(&LatticePoint::new(vec![1, 0, 0])).unwrap().value;
    println!("conditioning on phi_0, target e_1:");
    println!(
        "  shift coefficient {:.6}  (g(e_1)/g(0) = {:.6})",
        split.shift_coeffs[(0, 0)],
        g1 / g0
    );
    println!(
        "  remainder variance {:.6}  (g(0) - g(e_1)^2/g(0) = {:.6})",
        split.killed_cov[(0, 0)],
        g0 - g1 * g1 / g0
    );

    // condition on a small ball, targets on a larger shell
    let kball = ball(&LatticePoint::origin(3), 1.0, Norm::L1, 100).unwrap();
    let targets = ball(&LatticePoint::origin(3), 2.0, Norm::Linf, 1000).unwrap();
    let split = conditional_split(&eval, &kball, &targets).unwrap();
    println!(
        "\nconditioning set {} points, targets {} points",
        kball.len(),
        targets.len()
    );
    let mut max_row = 0.0f64;
    let mut pinned = 0;
    for t in 0..targets.len() {
        let row: f64 = (0..kball.len()).map(|j| split.shift_coeffs[(t, j)]).sum();
        max_row = max_row.max(row);
        if split.killed_cov[(t, t)] == 0.0 {
            pinned += 1;
        }
    }
    println!("  max shift row sum {max_row:.6} (hit probability from the target)");
    println!("  {pinned} targets inside the conditioning set are pinned to zero variance");

    // the split is the Gaussian conditional law: residual of the
    // killed-vs-Schur comparison
    let mut worst = 0.0f64;
    for t in 0..targets.len() {
        for u in 0..targets.len() {
            let mut rhs = eval
                .green_diff(targets.point(t), targets.point(u))
                .unwrap()
                .value;
            for j in 0..kball.len() {
                rhs -= split.shift_coeffs[(t, j)]
                    * eval.green_diff(kball.point(j), targets.point(u)).unwrap().value;
            }
            worst = worst.max((split.killed_cov[(t, u)] - rhs).abs());
        }
    }
    println!("  defining-identity residual {worst:.2e}");
}
