//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line
//! (run with `cargo test --test acceptance -- --nocapture` to see them all).
//!
//! Every tolerance below is pinned in code; Monte Carlo criteria run under
//! fixed master seeds, so each verdict is deterministic and reproducible.

use std::time::Instant;

use gffperc::constants::ConstantsLedger;
use gffperc::gff::{
    gaussian_tail_bounds, h_as, std_normal_tail, tail_density, BoxMarkovSampler, CovarianceModel,
    SequentialSampler,
};
use gffperc::hypercube::{
    alpha_coefficients, chernoff_check, embed_tree, good_event_mc, gw_domination_check, GWParams,
};
use gffperc::lattice::{ball, LatticePoint, Norm, Region};
use gffperc::levelset::{flip_identity_check, mc_crossing_prob, Geometry};
use gffperc::potential::{
    green_quadrature, hitting_prob, mc_green, mc_hit_distribution, potential_table,
    GreenEvaluator,
};
use gffperc::renorm::{
    lb_propagate, lb_scales, lb_schedule, ub_final_chain, ub_propagate, ub_schedule,
    ub_sequences, LbOverrides, UbOverrides,
};
use gffperc::stats::RunningStat;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn verdict(criterion: u32, pass: bool, detail: &str) {
    println!(
        "[criterion {criterion:02}] {} {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {criterion} failed: {detail}");
}

/// 1. Free Green function: quadrature and Monte Carlo (1e7 truncated walks
/// plus analytic tail) agree within 5e-4; the value is 1.5164 +- 5e-4;
/// runtime below 60 s.
#[test]
fn criterion_01_green_oracle_agreement() {
    let start = Instant::now();
    let quad = green_quadrature(3, &[], 1e-9).unwrap().value;
    let mc = mc_green(3, &[0, 0, 0], 10_000_000, 30.0, 20_2501).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let diff = (quad - mc.value).abs();
    let pass = diff <= 5e-4 && (quad - 1.5164).abs() <= 5e-4 && elapsed < 60.0;
    verdict(
        1,
        pass,
        &format!(
            "quad {quad:.6} vs mc {:.6} (diff {diff:.2e}, se {:.2e}, bias bound {:.2e}), {elapsed:.1}s",
            mc.value, mc.se, mc.bias_bound
        ),
    );
}

/// 2. g(0) = 1 + 1/2d + o(1/d): residual within 2/d^2 on d in {10,20,50,100}
/// and shrinking with d.
#[test]
fn criterion_02_g0_expansion() {
    let mut residuals = Vec::new();
    let mut pass = true;
    for d in [10usize, 20, 50, 100] {
        let g0 = green_quadrature(d, &[], 1e-10).unwrap().value;
        let resid = (g0 - 1.0 - 1.0 / (2.0 * d as f64)).abs();
        pass &= resid <= 2.0 / (d as f64 * d as f64);
        residuals.push((d, resid));
    }
    pass &= residuals[3].1 < residuals[0].1;
    verdict(
        2,
        pass,
        &format!(
            "residuals {:?}",
            residuals
                .iter()
                .map(|(d, r)| format!("d={d}:{r:.2e}"))
                .collect::<Vec<_>>()
        ),
    );
}

/// 3. Potential-theory identities within 3 Monte Carlo standard errors on 20
/// random instances (|K| <= 5, d in {3,4,5}); equilibrium measures
/// nonnegative; capacity monotone and subadditive on 50 random pairs.
#[test]
fn criterion_03_potential_identities() {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let mut pass = true;
    let mut worst_z = 0.0f64;
    for inst in 0..20u64 {
        let d = [3usize, 4, 5][rng.gen_range(0..3)];
        let eval = GreenEvaluator::quadrature(d).unwrap();
        // random small K near the origin
        let ksize = rng.gen_range(2..=5);
        let mut pts: Vec<LatticePoint> = Vec::new();
        while pts.len() < ksize {
            let p = LatticePoint::new((0..d).map(|_| rng.gen_range(-2i64..=2)).collect());
            if !pts.contains(&p) {
                pts.push(p);
            }
        }
        let k = Region::from_points(pts).unwrap();
        let table = potential_table(&eval, &k, 100).unwrap();
        pass &= table.eq_measure.iter().all(|&e| e >= 0.0);

        // strong-Markov split of g between two points of K, Monte Carlo on
        // the left, killed table plus exit sum on the right
        let i = rng.gen_range(0..k.len());
        let j = rng.gen_range(0..k.len());
        let (x, y) = (k.point(i).clone(), k.point(j).clone());
        let mc = mc_green(
            d,
            x.sub(&y).unwrap().coords(),
            200_000,
            30.0,
            1000 + inst,
        )
        .unwrap();
        let mut rhs = table.killed_green[(i, j)];
        let inv2d = 1.0 / (2.0 * d as f64);
        for (w, pw) in k.iter().enumerate() {
            for z in pw.neighbors() {
                if !k.contains(&z) {
                    rhs += table.killed_green[(i, w)]
                        * inv2d
                        * eval.green_diff(&z, &y).unwrap().value;
                }
            }
        }
        let z1 = (mc.value - rhs).abs() / (3.0 * mc.se + mc.bias_bound);
        worst_z = worst_z.max(z1);
        pass &= z1 <= 1.0;

        // entrance identity from an exterior point
        let mut x_out = LatticePoint::new((0..d).map(|_| rng.gen_range(-4i64..=4)).collect());
        while k.contains(&x_out) {
            x_out = LatticePoint::new((0..d).map(|_| rng.gen_range(-4i64..=4)).collect());
        }
        let eq: Vec<f64> = table.eq_measure.iter().copied().collect();
        let targets: Vec<Vec<i64>> = k.iter().map(|p| p.coords().to_vec()).collect();
        let hit = mc_hit_distribution(
            d,
            &targets,
            x_out.coords(),
            200_000,
            30.0,
            5000 + inst,
            Some(&eq),
        )
        .unwrap();
        let rhs2 = hitting_prob(&eval, &x_out, &table).unwrap();
        let z2 = (hit.total.value - rhs2).abs() / (3.0 * hit.total.se + hit.total.bias_bound);
        worst_z = worst_z.max(z2);
        pass &= z2 <= 1.0;
    }

    // capacity monotonicity and subadditivity, exact on solved tables
    let eval3 = GreenEvaluator::quadrature(3).unwrap();
    for trial in 0..50 {
        let mut pts: Vec<LatticePoint> = Vec::new();
        while pts.len() < 4 {
            let p = LatticePoint::new((0..3).map(|_| rng.gen_range(-2i64..=2)).collect());
            if !pts.contains(&p) {
                pts.push(p);
            }
        }
        let small = Region::from_points(pts[..2].to_vec()).unwrap();
        let big = Region::from_points(pts.clone()).unwrap();
        let ts = potential_table(&eval3, &small, 100).unwrap();
        let tb = potential_table(&eval3, &big, 100).unwrap();
        pass &= ts.capacity <= tb.capacity + 1e-9;

        let shift = LatticePoint::new(vec![
            rng.gen_range(0i64..=3),
            rng.gen_range(0i64..=3),
            rng.gen_range(0i64..=3),
        ]);
        let other = small.translate(&shift).unwrap();
        let uni = small.union(&other).unwrap();
        let tu = potential_table(&eval3, &uni, 100).unwrap();
        let to = potential_table(&eval3, &other, 100).unwrap();
        pass &= tu.capacity <= ts.capacity + to.capacity + 1e-9;
        let _ = trial;
    }
    verdict(3, pass, &format!("worst identity z-score {worst_z:.2}"));
}

/// 4. Sampler equivalence on the 3x3x3 box in d = 3: dense, sequential
/// under two orderings, and box-Markov agree entrywise within 4 combined
/// standard errors at 2e5 samples each; runtime below 5 minutes.
#[test]
fn criterion_04_sampler_equivalence() {
    let start = Instant::now();
    let n = 200_000u64;
    let eval = GreenEvaluator::quadrature(3).unwrap();
    let region = ball(&LatticePoint::origin(3), 1.0, Norm::Linf, 100).unwrap();
    let model = CovarianceModel::build(&eval, &region, 100).unwrap();
    let k = region.len();

    let natural: Vec<usize> = (0..k).collect();
    let mut shuffled: Vec<usize> = (0..k).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(44);
    for i in (1..k).rev() {
        shuffled.swap(i, rng.gen_range(0..=i));
    }
    let seq1 = SequentialSampler::new(&model, &natural).unwrap();
    let seq2 = SequentialSampler::new(&model, &shuffled).unwrap();
    let boxm = BoxMarkovSampler::for_ball(&eval, &LatticePoint::origin(3), 1.0, 100, 100).unwrap();

    // second-moment matrices per sampler
    let mut moments: Vec<Vec<f64>> = Vec::new();
    let collect = |samples: Vec<gffperc::gff::FieldSample>| -> Vec<f64> {
        let mut acc = vec![0.0f64; k * k];
        for s in &samples {
            for i in 0..k {
                for j in i..k {
                    acc[i * k + j] += s.values[i] * s.values[j];
                }
            }
        }
        for v in acc.iter_mut() {
            *v /= samples.len() as f64;
        }
        acc
    };
    moments.push(collect(model.sample(n, 4000)));
    moments.push(collect(seq1.sample(n, 4001)));
    moments.push(collect(seq2.sample(n, 4002)));
    moments.push(collect(boxm.sample(n, 4003)));

    let mut pass = true;
    let mut worst = 0.0f64;
    for a in 0..moments.len() {
        for b in (a + 1)..moments.len() {
            for i in 0..k {
                for j in i..k {
                    let var = model.cov[(i, i)] * model.cov[(j, j)]
                        + model.cov[(i, j)] * model.cov[(i, j)];
                    let se_single = (var / n as f64).sqrt();
                    let pair_se = (2.0f64).sqrt() * se_single;
                    let diff = (moments[a][i * k + j] - moments[b][i * k + j]).abs();
                    let z = diff / pair_se;
                    worst = worst.max(z);
                    pass &= z <= 4.0;
                }
            }
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    pass &= elapsed < 300.0;
    verdict(
        4,
        pass,
        &format!("worst pairwise z {worst:.2} across 6 sampler pairs, {elapsed:.0}s"),
    );
}

/// 5. Elementary Gaussian tail bracket holds exactly for h in
/// {1, 1.5, 2, 3, 5}.
#[test]
fn criterion_05_tail_bracket() {
    let mut pass = true;
    for h in [1.0f64, 1.5, 2.0, 3.0, 5.0] {
        let (lo, hi) = gaussian_tail_bounds(h).unwrap();
        let truth = std_normal_tail(h);
        pass &= lo <= truth && truth <= hi;
    }
    verdict(5, pass, "erfc tails inside the (1/h - 1/h^3, 1/h) bracket");
}

/// 6. Upper-bound recursion as arithmetic: zero bound violations over a
/// 20-point k_0 grid up to n = 30, and the final union-bound chain strictly
/// decreasing for the standard parameter choice with any ledger constants
/// >= 1; runtime below 1 s.
#[test]
fn criterion_06_ub_recursion() {
    let start = Instant::now();
    let mut pass = true;
    let b = gffperc::renorm::decay_floor();
    let base_ledger = ConstantsLedger::with_defaults();
    for i in 0..20 {
        let k0 = b + 0.1 + (50.0 - 0.1) * i as f64 / 19.0;
        let s = ub_schedule(
            3,
            1.0,
            &base_ledger,
            &UbOverrides {
                big_l0: Some(3),
                l0: Some(400),
                n: Some(1),
                k0: Some(k0),
                h0: Some(0.0),
            },
        )
        .unwrap();
        let prop = ub_propagate(&s, -k0, 30).unwrap();
        pass &= prop.all_within_bound;
    }
    for c2 in [1.0f64, 3.0, 12.0] {
        let mut ledger = ConstantsLedger::with_defaults();
        ledger.set("c_2", c2).unwrap();
        for d in [3usize, 6, 12] {
            let s = ub_schedule(
                d,
                1.0,
                &ledger,
                &UbOverrides {
                    big_l0: Some(d as u64),
                    l0: Some(20 * ((d as f64).sqrt().ceil() as u64 + 1)),
                    n: Some(1),
                    k0: None,
                    h0: Some(0.0),
                },
            )
            .unwrap();
            let prop = ub_propagate(&s, -s.k0, 30).unwrap();
            let rep = ub_final_chain(&s, &prop, &ledger).unwrap();
            pass &= rep.strictly_decreasing && rep.tends_to_zero;
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    pass &= elapsed < 1.0;
    verdict(
        6,
        pass,
        &format!("k_0 grid clean, chains decreasing, {elapsed:.3}s"),
    );
}

/// 7. Sprinkling sum: with L_0 = l_0 = d and unit constants, h_inf - h_0
/// stays within eps/2 for all d above a computed threshold, re-checked at
/// the threshold and one above.
#[test]
fn criterion_07_ub_sprinkling_sum() {
    let ledger = ConstantsLedger::with_defaults();
    let mut pass = true;
    let mut report = String::new();
    for eps in [0.5f64, 1.0, 2.0] {
        let n = gffperc::renorm::default_seed_width(eps, 1.0, 1.0);
        let verdict_at = |d: usize| -> Option<bool> {
            let s = ub_schedule(
                d,
                eps,
                &ledger,
                &UbOverrides {
                    big_l0: Some(d as u64),
                    l0: Some(d as u64),
                    n: None,
                    k0: None,
                    h0: Some(0.0),
                },
            )
            .ok()?;
            Some(ub_sequences(&s, 48).ok()?.sprinkling_verdict)
        };
        // scan upward from the scale-constraint floor for the first d where
        // the verdict holds, then demand it persists
        let d_min = gffperc::renorm::min_default_dimension(n) as usize;
        let mut threshold = None;
        let mut d = d_min;
        while d < d_min + 200_000 {
            if verdict_at(d) == Some(true) {
                threshold = Some(d);
                break;
            }
            d += (d / 64).max(1);
        }
        let t = match threshold {
            Some(t) => t,
            None => {
                pass = false;
                continue;
            }
        };
        pass &= verdict_at(t) == Some(true);
        pass &= verdict_at(t + 1) == Some(true);
        report.push_str(&format!("eps={eps}: threshold d={t}; "));
    }
    verdict(7, pass, &report);
}

/// 8. Lower-bound recursion as arithmetic at d in {40, 60, 100} with unit
/// constants and the seed q_0 = l_0^{-3}: whenever the preconditions hold
/// the propagation and sprinkling verdicts must hold - any mismatch is a
/// failure.
#[test]
fn criterion_08_lb_recursion() {
    let ledger = ConstantsLedger::with_defaults();
    let mut pass = true;
    let mut detail = String::new();
    for d in [40usize, 60, 100] {
        let s = lb_schedule(d, 0.5, &ledger, &LbOverrides::default()).unwrap();
        let l0 = lb_scales(&s, 0)[0].ln_l;
        let trace = lb_propagate(&s, -3.0 * l0, 40, None).unwrap();
        // internal consistency is the criterion
        pass &= trace.consistent;
        // preconditions do hold at these dimensions, so propagation must
        pass &= trace.seed_ok && trace.all_steps_ok && trace.propagation_ok;
        // the sprinkling-sum verdict must match its own convergence test
        if trace.delta_converge_predicted {
            pass &= trace.delta_sum_ok;
        } else {
            pass &= !trace.delta_sum_ok;
        }
        detail.push_str(&format!(
            "d={d}: delta_sum {:.2e} (predicted converge: {}); ",
            trace.delta_sum, trace.delta_converge_predicted
        ));
    }
    verdict(8, pass, &detail);
}

/// 9. Branching-domination coupling at d = 15 (depth 3, branching 4,
/// eps = 0.3, 1e4 samples): alpha sums capped by 2 exactly, zero pathwise
/// inclusion violations, and the exact binomial tail never beats the
/// Chernoff bound on a 100-point grid; runtime below 10 minutes.
#[test]
fn criterion_09_gw_domination() {
    let start = Instant::now();
    let eval = GreenEvaluator::quadrature(15).unwrap();
    let tree = embed_tree(15, 3, 4).unwrap();
    let gw = GWParams::from_formula(15, 0.3).unwrap();
    let alpha = alpha_coefficients(&eval, &tree).unwrap();
    let mut pass = alpha.max_sum <= 2.0 && alpha.identity_residual < 1e-10;

    let rep = gw_domination_check(&eval, &tree, &gw, 10_000, 90_210, 1.0).unwrap();
    pass &= rep.violations == 0;
    pass &= rep.applicable > 0;

    let mut grid_ok = true;
    for n in [10u64, 40, 100, 400, 1000] {
        for p in [0.02f64, 0.1, 0.3, 0.6] {
            for delta in [0.1f64, 0.3, 0.5, 0.7, 0.9] {
                let c = chernoff_check(n, p, delta).unwrap();
                grid_ok &= c.exact_tail <= c.bound + 1e-14;
            }
        }
    }
    pass &= grid_ok;
    let elapsed = start.elapsed().as_secs_f64();
    pass &= elapsed < 600.0;
    verdict(
        9,
        pass,
        &format!(
            "max alpha sum {:.4}, hit prob * d {:.3}, {} applicable, {} violations, {elapsed:.0}s",
            alpha.max_sum, alpha.hit_prob_times_d, rep.applicable, rep.violations
        ),
    );
}

/// 10. Level-sweep machinery: common-random-number sweeps exactly monotone
/// in h, and the flip identity P[A at h] = P[flipped A at -h] within 3
/// combined standard errors on three geometries in d = 3.
#[test]
fn criterion_10_monotone_and_flip() {
    let eval = GreenEvaluator::quadrature(3).unwrap();
    let mut pass = true;
    let grid: Vec<f64> = (-6..=6).map(|i| i as f64 * 0.5).collect();
    for geom in [
        Geometry::BoxToSphere { l: 2 },
        Geometry::Annulus { l: 1 },
        Geometry::PointToL1Sphere { r: 4 },
    ] {
        let est = mc_crossing_prob(&eval, geom, &grid, 2000, 777).unwrap();
        for w in est.windows(2) {
            pass &= w[1].estimate.value <= w[0].estimate.value;
        }
        let flip = flip_identity_check(&eval, geom, 0.0, 4000, 778).unwrap();
        pass &= flip.difference.abs() <= 3.0 * flip.joint_se;
    }
    verdict(10, pass, "CRN sweeps monotone, flip identity within 3 se");
}

/// 11. Density trend: P[phi_0 >= h_as(d)] inside [d^{-1.6}, d^{-0.9}] for
/// every d in {3, ..., 100} by the erfc oracle.
///
/// The measured exponent -ln P / ln d decreases from about 2.43 at d = 3 to
/// about 1.46 at d = 100 and only enters the stated window at d = 28; the
/// criterion is evaluated verbatim and reports the deviating range rather
/// than widening the window.
#[test]
fn criterion_11_density_trend() {
    let mut violations = Vec::new();
    for d in 3usize..=100 {
        let eval = GreenEvaluator::quadrature(d).unwrap();
        let h = h_as(&eval, 0.0).unwrap();
        let p = tail_density(&eval, h).unwrap();
        let lo = (d as f64).powf(-1.6);
        let hi = (d as f64).powf(-0.9);
        if !(lo <= p && p <= hi) {
            let exponent = -p.ln() / (d as f64).ln();
            violations.push((d, exponent));
        }
    }
    let pass = violations.is_empty();
    let detail = if pass {
        "all d in 3..=100 inside the window".to_string()
    } else {
        format!(
            "{} dimensions outside the window (d = {}..{}, measured exponent {:.2}..{:.2} vs window [0.9, 1.6])",
            violations.len(),
            violations.first().unwrap().0,
            violations.last().unwrap().0,
            violations.first().unwrap().1,
            violations.last().unwrap().1,
        )
    };
    verdict(11, pass, &detail);
}

/// 12. Good-event estimation at d = 9 with 500 replicas: estimates exactly
/// monotone across the level grid by common random numbers, equal to 1 and
/// 0 at the extreme levels, and the giant-uniqueness assertion never fires;
/// runtime below 15 minutes.
#[test]
fn criterion_12_good_event() {
    let start = Instant::now();
    let eval = GreenEvaluator::quadrature(9).unwrap();
    let grid = [-1e9, -1.0, 0.0, 0.5, 1.0, 1e9];
    let est = good_event_mc(&eval, &grid, 500, 424_242).unwrap();
    let mut pass = true;
    for w in est.windows(2) {
        pass &= w[1].estimate.value <= w[0].estimate.value;
    }
    pass &= est[0].estimate.value == 1.0;
    pass &= est[est.len() - 1].estimate.value == 0.0;
    let elapsed = start.elapsed().as_secs_f64();
    pass &= elapsed < 900.0;
    let mids: Vec<String> = est[1..5]
        .iter()
        .map(|le| format!("{:.3}", le.estimate.value))
        .collect();
    verdict(
        12,
        pass,
        &format!("grid estimates 1, {}, 0; uniqueness never fired; {elapsed:.0}s", mids.join(", ")),
    );
}

/// Companion check to criterion 4: the empirical covariance of each sampler
/// also matches the exact covariance itself (not only pairwise agreement).
#[test]
fn samplers_match_exact_covariance() {
    let eval = GreenEvaluator::quadrature(3).unwrap();
    let region = ball(&LatticePoint::origin(3), 1.0, Norm::Linf, 100).unwrap();
    let model = CovarianceModel::build(&eval, &region, 100).unwrap();
    let n = 100_000u64;
    let k = region.len();
    let samples = model.sample(n, 4242);
    let mut worst = 0.0f64;
    for i in 0..k {
        for j in i..k {
            let mut st = RunningStat::new();
            for s in &samples {
                st.push(s.values[i] * s.values[j]);
            }
            let z = (st.mean() - model.cov[(i, j)]).abs() / st.se();
            worst = worst.max(z);
        }
    }
    assert!(worst < 4.5, "worst z {worst}");
}
