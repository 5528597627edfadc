//! Experiment orchestration behind the `gffp` binary: configuration
//! merging, deterministic execution, persistence, and result manifests.
//!
//! Configuration comes from `--key value` flags, optionally layered over a
//! JSON file (`--config file.json`); flags override file values and the
//! merged result is what the manifest records. Outputs are buffered in
//! memory and flushed together, so a failing run leaves no partial files.
//! Exit codes: 0 success, 2 configuration error, 3 numerical failure.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::constants::ConstantsLedger;
use crate::error::{Error, Result};
use crate::gff;
use crate::hypercube;
use crate::lattice::{ball, LatticePoint, Norm};
use crate::levelset::{self, Geometry};
use crate::plot::{plot_csv, PlotKind};
use crate::potential::{self, GreenEvaluator, GreenMethod};
use crate::renorm;

pub const OUTPUT_DIR_ENV: &str = "GFFP_OUTPUT_DIR";

pub const COMMANDS: &[&str] = &[
    "green",
    "sample",
    "crossing",
    "local-conn",
    "hstar",
    "hdoublestar",
    "renorm-ub",
    "renorm-lb",
    "hypercube",
    "good-event",
    "verify",
    "plot",
];

/// Effective (merged) experiment configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub command: String,
    pub params: BTreeMap<String, String>,
    pub master_seed: u64,
    pub replicas: u64,
    pub output_dir: PathBuf,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OutputFile {
    pub path: String,
    pub sha256: String,
}

/// Written next to every run's outputs as `manifest.json`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResultManifest {
    pub config: ExperimentConfig,
    pub constants: BTreeMap<String, crate::constants::ConstantEntry>,
    pub tool_version: String,
    pub started_unix_ms: u128,
    pub finished_unix_ms: u128,
    pub outputs: Vec<OutputFile>,
}

pub const USAGE: &str = "\
usage: gffp <command> [--key value ...]

common flags
  --config FILE      JSON map of defaults; explicit flags override it
  --constants FILE   JSON map {name: value} for the constants ledger
  --seed N           master seed (default 1)
  --replicas N       Monte Carlo replica count (default 1000)
  --out DIR          output directory (default $GFFP_OUTPUT_DIR or .)
  constants may also be set inline: --c2 1.5 --c5 2 --c0p 1 ...

commands
  green        --d D [--x 0,0,0] [--method quadrature|monte_carlo|truncated_solve]
               [--tol T] [--walks N] [--radius R]
  sample       --d D --radius R [--norm linf|l1|l2]
               [--sampler dense|sequential|box_markov] [--format binary|csv|both]
  crossing     --d D --geometry box_to_sphere|annulus|point_to_l1|spanning
               --scale L --h_grid -1,0,1
  local-conn   --d D --r R --h H
  hstar        --d D --l_list 2,3 --threshold 0.5 --h_grid -1,0,1
  hdoublestar  --d D --l_list 2,3 --threshold 0.1 --h_grid -1,0,1
  renorm-ub    --d D --eps E [--n_max N] [--l0 L] [--big_l0 L] [--seed_width N]
               [--k0 K] [--log_p0 X]
  renorm-lb    --d D --eps E [--n_max N] [--big_l0 L] [--log_q0 X] [--log_p_gc X]
  hypercube    --d D --depth J --branching R --eps E [--threshold T]
  good-event   --d D --h_grid -1,0,1
  verify       --d_list 10,20,50,100
  plot         --input sweep.csv --kind sweep|trace --output plot.svg
";

/// Parse raw command-line arguments (excluding argv[0]) into a config.
pub fn parse_args(args: &[String]) -> Result<ExperimentConfig> {
    if args.is_empty() {
        return Err(Error::InvalidArgument(
            "missing command; run with --help".into(),
        ));
    }
    if args[0] == "--help" || args[0] == "-h" || args[0] == "help" {
        return Err(Error::InvalidArgument(USAGE.into()));
    }
    let command = args[0].clone();
    if !COMMANDS.contains(&command.as_str()) {
        return Err(Error::InvalidArgument(format!(
            "unknown command {command}; expected one of {COMMANDS:?}"
        )));
    }
    let mut flags: BTreeMap<String, String> = BTreeMap::new();
    let mut i = 1;
    while i < args.len() {
        let key = args[i]
            .strip_prefix("--")
            .ok_or_else(|| Error::InvalidArgument(format!("expected --key, got {}", args[i])))?;
        let val = args
            .get(i + 1)
            .ok_or_else(|| Error::InvalidArgument(format!("flag --{key} needs a value")))?;
        flags.insert(key.to_string(), val.clone());
        i += 2;
    }
    // layer the config file under the flags
    let mut params: BTreeMap<String, String> = BTreeMap::new();
    if let Some(path) = flags.get("config") {
        let text = std::fs::read_to_string(path)?;
        let file: BTreeMap<String, serde_json::Value> = serde_json::from_str(&text)?;
        for (k, v) in file {
            let s = match v {
                serde_json::Value::String(s) => s,
                other => other.to_string(),
            };
            params.insert(k, s);
        }
    }
    for (k, v) in &flags {
        params.insert(k.clone(), v.clone());
    }
    let master_seed = parse_opt_u64(&params, "seed")?.unwrap_or(1);
    let replicas = parse_opt_u64(&params, "replicas")?.unwrap_or(1000);
    let output_dir = params
        .get("out")
        .map(PathBuf::from)
        .or_else(|| std::env::var(OUTPUT_DIR_ENV).ok().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    Ok(ExperimentConfig {
        command,
        params,
        master_seed,
        replicas,
        output_dir,
    })
}

/// Constants ledger from --constants file plus inline flag overrides.
pub fn ledger_from_config(cfg: &ExperimentConfig) -> Result<ConstantsLedger> {
    let mut ledger = match cfg.params.get("constants") {
        Some(path) => ConstantsLedger::from_json_file(Path::new(path))?,
        None => ConstantsLedger::with_defaults(),
    };
    for (key, val) in &cfg.params {
        if let Some(name) = constant_alias(key) {
            let v: f64 = val
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("constant {key}: bad value {val}")))?;
            ledger.set(&name, v)?;
        }
    }
    Ok(ledger)
}

fn constant_alias(key: &str) -> Option<String> {
    let known = [
        "c", "c_prime", "c_0", "c_2", "c_3", "c_3_prime", "c_4", "c_4_prime", "c_5", "c_8",
        "c_0_prime", "c_1_prime", "ck_0", "ck_1", "ck_2", "ck_3", "ck_4", "ck_5",
    ];
    if known.contains(&key) {
        return Some(key.to_string());
    }
    match key {
        "c0" => Some("c_0".into()),
        "c2" => Some("c_2".into()),
        "c3" => Some("c_3".into()),
        "c4" => Some("c_4".into()),
        "c5" => Some("c_5".into()),
        "c8" => Some("c_8".into()),
        "c0p" => Some("c_0_prime".into()),
        "c1p" => Some("c_1_prime".into()),
        "c3p" => Some("c_3_prime".into()),
        "c4p" => Some("c_4_prime".into()),
        "cprime" => Some("c_prime".into()),
        _ => None,
    }
}

#[derive(Debug)]
struct Pending {
    name: String,
    bytes: Vec<u8>,
}

/// Execute an experiment; outputs land in `config.output_dir` together with
/// `manifest.json`. Nothing is written until the whole run has succeeded.
pub fn run(config: &ExperimentConfig) -> Result<ResultManifest> {
    let started = now_ms();
    let ledger = ledger_from_config(config)?;
    let outputs = dispatch(config, &ledger)?;

    std::fs::create_dir_all(&config.output_dir)?;
    let mut recorded = Vec::new();
    for p in &outputs {
        let path = config.output_dir.join(&p.name);
        std::fs::write(&path, &p.bytes)?;
        let mut hasher = Sha256::new();
        hasher.update(&p.bytes);
        recorded.push(OutputFile {
            path: p.name.clone(),
            sha256: format!("{:x}", hasher.finalize()),
        });
    }
    let manifest = ResultManifest {
        config: config.clone(),
        constants: ledger.snapshot(),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        started_unix_ms: started,
        finished_unix_ms: now_ms(),
        outputs: recorded,
    };
    let manifest_path = config.output_dir.join("manifest.json");
    std::fs::write(&manifest_path, serde_json::to_vec_pretty(&manifest)?)?;
    Ok(manifest)
}

fn dispatch(cfg: &ExperimentConfig, ledger: &ConstantsLedger) -> Result<Vec<Pending>> {
    match cfg.command.as_str() {
        "green" => cmd_green(cfg),
        "sample" => cmd_sample(cfg),
        "crossing" => cmd_crossing(cfg),
        "local-conn" => cmd_local_conn(cfg, ledger),
        "hstar" => cmd_bracket(cfg, true),
        "hdoublestar" => cmd_bracket(cfg, false),
        "renorm-ub" => cmd_renorm_ub(cfg, ledger),
        "renorm-lb" => cmd_renorm_lb(cfg, ledger),
        "hypercube" => cmd_hypercube(cfg, ledger),
        "good-event" => cmd_good_event(cfg),
        "verify" => cmd_verify(cfg, ledger),
        "plot" => cmd_plot(cfg),
        other => Err(Error::InvalidArgument(format!("unknown command {other}"))),
    }
}

fn cmd_green(cfg: &ExperimentConfig) -> Result<Vec<Pending>> {
    let d = need_usize(cfg, "d")?;
    let x = parse_point(cfg, "x", d)?;
    let tol = parse_opt_f64(&cfg.params, "tol")?;
    let method = match cfg.params.get("method").map(|s| s.as_str()) {
        None | Some("quadrature") => GreenMethod::Quadrature,
        Some("monte_carlo") => GreenMethod::MonteCarlo {
            walks: parse_opt_u64(&cfg.params, "walks")?.unwrap_or(1_000_000),
            radius: parse_opt_f64(&cfg.params, "radius")?.unwrap_or(30.0),
        },
        Some("truncated_solve") => GreenMethod::TruncatedSolve {
            radius: parse_opt_u64(&cfg.params, "radius")?.unwrap_or(15) as i64,
        },
        Some(other) => {
            return Err(Error::InvalidArgument(format!("unknown method {other}")));
        }
    };
    let default_tol = match method {
        GreenMethod::Quadrature => 1e-8,
        _ => 1e-2,
    };
    let eval = GreenEvaluator::new(d, method, tol.unwrap_or(default_tol), cfg.master_seed)?;
    let v = eval.green(&x)?;
    println!("g({x}) = {:.4} +- {:.1e}", v.value, v.error_bound);
    let mut csv = Vec::new();
    use std::io::Write;
    write!(csv, "d,x,value,error_bound,seed\r\n")?;
    let xs: Vec<String> = x.coords().iter().map(|c| c.to_string()).collect();
    write!(
        csv,
        "{},{},{},{},{}\r\n",
        d,
        xs.join(" "),
        v.value,
        v.error_bound,
        cfg.master_seed
    )?;
    Ok(vec![Pending {
        name: "green.csv".into(),
        bytes: csv,
    }])
}

fn cmd_sample(cfg: &ExperimentConfig) -> Result<Vec<Pending>> {
    let d = need_usize(cfg, "d")?;
    let radius = need_f64(cfg, "radius")?;
    let norm = match cfg.params.get("norm").map(|s| s.as_str()) {
        None | Some("linf") => Norm::Linf,
        Some("l1") => Norm::L1,
        Some("l2") => Norm::L2,
        Some(o) => return Err(Error::InvalidArgument(format!("unknown norm {o}"))),
    };
    let region = ball(&LatticePoint::origin(d), radius, norm, 2_000_000)?;
    let eval = GreenEvaluator::quadrature(d)?;
    let kind = cfg
        .params
        .get("sampler")
        .map(|s| s.as_str())
        .unwrap_or("dense");
    let samples = match kind {
        "dense" => {
            let model = gff::CovarianceModel::build(&eval, &region, gff::DEFAULT_SAMPLER_CAP)?;
            model.sample(cfg.replicas, cfg.master_seed)
        }
        "sequential" => {
            let model = gff::CovarianceModel::build(&eval, &region, gff::DEFAULT_SAMPLER_CAP)?;
            let ordering: Vec<usize> = (0..region.len()).collect();
            let s = gff::SequentialSampler::new(&model, &ordering)?;
            s.sample(cfg.replicas, cfg.master_seed)
        }
        "box_markov" => {
            let s = gff::BoxMarkovSampler::for_region(
                &eval,
                &region,
                gff::DEFAULT_SAMPLER_CAP,
                40_000,
            )?;
            s.sample(cfg.replicas, cfg.master_seed)
        }
        other => return Err(Error::InvalidArgument(format!("unknown sampler {other}"))),
    };
    let format = cfg
        .params
        .get("format")
        .map(|s| s.as_str())
        .unwrap_or("binary");
    let mut out = Vec::new();
    if format == "binary" || format == "both" {
        let mut bin = Vec::new();
        for s in &samples {
            gff::write_sample_binary(&mut bin, s)?;
        }
        out.push(Pending {
            name: "samples.bin".into(),
            bytes: bin,
        });
    }
    if format == "csv" || format == "both" {
        use std::io::Write;
        let mut csv = Vec::new();
        write!(csv, "replica,point,value\r\n")?;
        for s in &samples {
            for (p, v) in s.region.iter().zip(&s.values) {
                let coords: Vec<String> = p.coords().iter().map(|c| c.to_string()).collect();
                write!(csv, "{},{},{}\r\n", s.provenance.replica, coords.join(" "), v)?;
            }
        }
        out.push(Pending {
            name: "samples.csv".into(),
            bytes: csv,
        });
    }
    if out.is_empty() {
        return Err(Error::InvalidArgument(format!("unknown format {format}")));
    }
    println!(
        "sampled {} replicas on {} points (d={d}, {kind})",
        samples.len(),
        region.len()
    );
    Ok(out)
}

fn parse_geometry(cfg: &ExperimentConfig) -> Result<Geometry> {
    let scale = need_usize(cfg, "scale")? as i64;
    match cfg
        .params
        .get("geometry")
        .ok_or_else(|| Error::InvalidArgument("missing geometry".into()))?
        .as_str()
    {
        "box_to_sphere" => Ok(Geometry::BoxToSphere { l: scale }),
        "annulus" => Ok(Geometry::Annulus { l: scale }),
        "point_to_l1" => Ok(Geometry::PointToL1Sphere { r: scale }),
        "spanning" => Ok(Geometry::SpanningBox { l: scale }),
        o => Err(Error::InvalidArgument(format!("unknown geometry {o}"))),
    }
}

fn cmd_crossing(cfg: &ExperimentConfig) -> Result<Vec<Pending>> {
    let d = need_usize(cfg, "d")?;
    let geometry = parse_geometry(cfg)?;
    let h_grid = need_f64_list(cfg, "h_grid")?;
    let eval = GreenEvaluator::quadrature(d)?;
    let est = levelset::mc_crossing_prob(&eval, geometry, &h_grid, cfg.replicas, cfg.master_seed)?;
    for le in &est {
        println!(
            "h = {:+.4}: {:.4} +- {:.4}",
            le.h, le.estimate.value, le.estimate.half_width
        );
    }
    let mut csv = Vec::new();
    levelset::write_estimates_csv(&mut csv, d, &geometry, &est)?;
    Ok(vec![Pending {
        name: "crossing.csv".into(),
        bytes: csv,
    }])
}

fn cmd_local_conn(cfg: &ExperimentConfig, ledger: &ConstantsLedger) -> Result<Vec<Pending>> {
    let d = need_usize(cfg, "d")?;
    let r = need_usize(cfg, "r")? as i64;
    let h = need_f64(cfg, "h")?;
    let eval = GreenEvaluator::quadrature(d)?;
    let rep = levelset::local_connectivity(
        &eval,
        r,
        h,
        cfg.replicas,
        cfg.master_seed,
        ledger.get("c_5")?,
    )?;
    println!(
        "P[0 <-> S_1(0,{r}) above {h}] = {:.5} +- {:.5}",
        rep.estimate.value, rep.estimate.half_width
    );
    Ok(vec![Pending {
        name: "local_conn.json".into(),
        bytes: serde_json::to_vec_pretty(&rep)?,
    }])
}

fn cmd_bracket(cfg: &ExperimentConfig, star: bool) -> Result<Vec<Pending>> {
    let d = need_usize(cfg, "d")?;
    let l_list: Vec<i64> = need_f64_list(cfg, "l_list")?
        .into_iter()
        .map(|v| v as i64)
        .collect();
    let threshold = need_f64(cfg, "threshold")?;
    let h_grid = need_f64_list(cfg, "h_grid")?;
    let eval = GreenEvaluator::quadrature(d)?;
    let bracket = if star {
        levelset::h_star_proxy(&eval, &l_list, threshold, &h_grid, cfg.replicas, cfg.master_seed)?
    } else {
        levelset::h_doublestar_proxy(
            &eval,
            &l_list,
            threshold,
            &h_grid,
            cfg.replicas,
            cfg.master_seed,
        )?
    };
    if bracket.resolved {
        println!(
            "{}: [{:.4}, {:.4}] (finite-size proxy)",
            bracket.kind, bracket.h_lo, bracket.h_hi
        );
    } else {
        println!("{}: unresolved on this grid", bracket.kind);
    }
    Ok(vec![Pending {
        name: if star {
            "hstar_bracket.json".into()
        } else {
            "hdoublestar_bracket.json".into()
        },
        bytes: serde_json::to_vec_pretty(&bracket)?,
    }])
}

#[derive(Serialize)]
struct UbReportFile {
    schedule: renorm::UBSchedule,
    trace: renorm::UBTrace,
    propagation: renorm::UbPropagation,
    final_chain: renorm::UbFinalReport,
    verdicts: BTreeMap<String, bool>,
}

fn cmd_renorm_ub(cfg: &ExperimentConfig, ledger: &ConstantsLedger) -> Result<Vec<Pending>> {
    let d = need_usize(cfg, "d")?;
    let eps = need_f64(cfg, "eps")?;
    let n_max = parse_opt_u64(&cfg.params, "n_max")?.unwrap_or(30) as u32;
    let overrides = renorm::UbOverrides {
        big_l0: parse_opt_u64(&cfg.params, "big_l0")?,
        l0: parse_opt_u64(&cfg.params, "l0")?,
        n: parse_opt_u64(&cfg.params, "seed_width")?,
        k0: parse_opt_f64(&cfg.params, "k0")?,
        h0: parse_opt_f64(&cfg.params, "h0")?,
    };
    let schedule = renorm::ub_schedule(d, eps, ledger, &overrides)?;
    let trace = renorm::ub_sequences(&schedule, n_max)?;
    let log_p0 = parse_opt_f64(&cfg.params, "log_p0")?.unwrap_or(-schedule.k0);
    let propagation = renorm::ub_propagate(&schedule, log_p0, n_max)?;
    let final_chain = renorm::ub_final_chain(&schedule, &propagation, ledger)?;
    let mut verdicts = BTreeMap::new();
    verdicts.insert("sprinkling_sum_le_eps_half".into(), trace.sprinkling_verdict);
    verdicts.insert("p_n_within_bound".into(), propagation.all_within_bound);
    verdicts.insert("final_chain_to_zero".into(), final_chain.tends_to_zero);
    verdicts.insert(
        "seed_meets_requirement".into(),
        final_chain.seed_meets_requirement,
    );
    println!(
        "renorm-ub d={d} eps={eps}: sprinkling {} | propagation {} | chain {}",
        trace.sprinkling_verdict, propagation.all_within_bound, final_chain.tends_to_zero
    );
    let mut rows_csv = Vec::new();
    renorm::rows_to_csv(&mut rows_csv, &propagation.rows)?;
    let report = UbReportFile {
        schedule,
        trace,
        propagation,
        final_chain,
        verdicts,
    };
    Ok(vec![
        Pending {
            name: "renorm_ub.json".into(),
            bytes: serde_json::to_vec_pretty(&report)?,
        },
        Pending {
            name: "renorm_ub_rows.csv".into(),
            bytes: rows_csv,
        },
    ])
}

#[derive(Serialize)]
struct LbReportFile {
    schedule: renorm::LBSchedule,
    trace: renorm::LBTrace,
    verdicts: BTreeMap<String, bool>,
}

fn cmd_renorm_lb(cfg: &ExperimentConfig, ledger: &ConstantsLedger) -> Result<Vec<Pending>> {
    let d = need_usize(cfg, "d")?;
    let eps = need_f64(cfg, "eps")?;
    let n_max = parse_opt_u64(&cfg.params, "n_max")?.unwrap_or(40) as u32;
    let overrides = renorm::LbOverrides {
        big_l0: parse_opt_u64(&cfg.params, "big_l0")?,
    };
    let schedule = renorm::lb_schedule(d, eps, ledger, &overrides)?;
    let scales = renorm::lb_scales(&schedule, 0);
    let log_q0 = parse_opt_f64(&cfg.params, "log_q0")?.unwrap_or(-3.0 * scales[0].ln_l);
    let log_p_gc = parse_opt_f64(&cfg.params, "log_p_gc")?;
    let trace = renorm::lb_propagate(&schedule, log_q0, n_max, log_p_gc)?;
    let mut verdicts = BTreeMap::new();
    verdicts.insert("seed_ok".into(), trace.seed_ok);
    verdicts.insert("steps_ok".into(), trace.all_steps_ok);
    verdicts.insert("delta_sum_le_eps".into(), trace.delta_sum_ok);
    verdicts.insert("q_n_within_bound".into(), trace.propagation_ok);
    verdicts.insert("consistent".into(), trace.consistent);
    if let Some(dual) = &trace.duality {
        verdicts.insert("duality_chain_lt_1".into(), dual.verdict);
    }
    println!(
        "renorm-lb d={d} eps={eps}: delta sum {:.3e} ({}) | propagation {}",
        trace.delta_sum,
        if trace.delta_sum_ok { "ok" } else { "fail" },
        trace.propagation_ok
    );
    let mut rows_csv = Vec::new();
    renorm::rows_to_csv(&mut rows_csv, &trace.rows)?;
    let report = LbReportFile {
        schedule,
        trace,
        verdicts,
    };
    Ok(vec![
        Pending {
            name: "renorm_lb.json".into(),
            bytes: serde_json::to_vec_pretty(&report)?,
        },
        Pending {
            name: "renorm_lb_rows.csv".into(),
            bytes: rows_csv,
        },
    ])
}

#[derive(Serialize)]
struct HypercubeReportFile {
    d: usize,
    depth: usize,
    branching: usize,
    gw: hypercube::GWParams,
    alpha: hypercube::AlphaReport,
    domination: hypercube::GwReport,
    chernoff_example: hypercube::ChernoffCheck,
}

fn cmd_hypercube(cfg: &ExperimentConfig, ledger: &ConstantsLedger) -> Result<Vec<Pending>> {
    let d = need_usize(cfg, "d")?;
    let depth = need_usize(cfg, "depth")?;
    let branching = need_usize(cfg, "branching")?;
    let eps = need_f64(cfg, "eps")?;
    let eval = GreenEvaluator::quadrature(d)?;
    let tree = hypercube::embed_tree(d, depth, branching)?;
    let mut gw = hypercube::GWParams::from_formula(d, eps)?;
    if let Some(t) = parse_opt_u64(&cfg.params, "threshold")? {
        gw = gw.with_threshold(t);
    }
    let alpha = hypercube::alpha_coefficients(&eval, &tree)?;
    let domination = hypercube::gw_domination_check(
        &eval,
        &tree,
        &gw,
        cfg.replicas,
        cfg.master_seed,
        ledger.get("c_3_prime")?,
    )?;
    let chernoff_example = hypercube::chernoff_check(branching as u64, gw.p, 0.5)?;
    println!(
        "hypercube d={d} tree {depth}x{branching}: max alpha sum {:.4}, violations {}/{}",
        alpha.max_sum, domination.violations, domination.applicable
    );
    let report = HypercubeReportFile {
        d,
        depth,
        branching,
        gw,
        alpha,
        domination,
        chernoff_example,
    };
    Ok(vec![Pending {
        name: "hypercube.json".into(),
        bytes: serde_json::to_vec_pretty(&report)?,
    }])
}

fn cmd_good_event(cfg: &ExperimentConfig) -> Result<Vec<Pending>> {
    let d = need_usize(cfg, "d")?;
    let h_grid = need_f64_list(cfg, "h_grid")?;
    let eval = GreenEvaluator::quadrature(d)?;
    let est = hypercube::good_event_mc(&eval, &h_grid, cfg.replicas, cfg.master_seed)?;
    for le in &est {
        println!(
            "h = {:+.4}: P[good] = {:.4} +- {:.4}",
            le.h, le.estimate.value, le.estimate.half_width
        );
    }
    use std::io::Write;
    let mut csv = Vec::new();
    write!(csv, "d,geometry,scale,h,estimate,ci_half_width,replicas,seed\r\n")?;
    for le in &est {
        write!(
            csv,
            "{},good_event_cross,1,{},{},{},{},{}\r\n",
            d, le.h, le.estimate.value, le.estimate.half_width, le.estimate.replicas, le.estimate.seed
        )?;
    }
    Ok(vec![
        Pending {
            name: "good_event.csv".into(),
            bytes: csv,
        },
        Pending {
            name: "good_event.json".into(),
            bytes: serde_json::to_vec_pretty(&est)?,
        },
    ])
}

fn cmd_verify(cfg: &ExperimentConfig, ledger: &ConstantsLedger) -> Result<Vec<Pending>> {
    let d_list: Vec<usize> = need_f64_list(cfg, "d_list")?
        .into_iter()
        .map(|v| v as usize)
        .collect();
    let report = potential::verify_bounds(&d_list, ledger)?;
    let passes = report.rows.iter().filter(|r| r.pass).count();
    println!(
        "verify: {passes}/{} rows pass (conditional on {:?})",
        report.rows.len(),
        report.conditional_on
    );
    let mut csv = Vec::new();
    renorm::rows_to_csv(&mut csv, &report.rows)?;
    Ok(vec![
        Pending {
            name: "bounds.json".into(),
            bytes: serde_json::to_vec_pretty(&report)?,
        },
        Pending {
            name: "bounds.csv".into(),
            bytes: csv,
        },
    ])
}

fn cmd_plot(cfg: &ExperimentConfig) -> Result<Vec<Pending>> {
    let input = cfg
        .params
        .get("input")
        .ok_or_else(|| Error::InvalidArgument("missing input".into()))?;
    let kind = match cfg
        .params
        .get("kind")
        .ok_or_else(|| Error::InvalidArgument("missing kind".into()))?
        .as_str()
    {
        "sweep" => PlotKind::Sweep,
        "trace" => PlotKind::Trace,
        o => return Err(Error::InvalidArgument(format!("unknown plot kind {o}"))),
    };
    let name = cfg
        .params
        .get("output")
        .cloned()
        .unwrap_or_else(|| "plot.svg".into());
    let text = std::fs::read_to_string(input)?;
    let mut svg = Vec::new();
    plot_csv(&text, kind, &mut svg)?;
    println!("wrote {name}");
    Ok(vec![Pending { name, bytes: svg }])
}

/// Entry point used by the binary: parse std::env args, run, map errors to
/// exit codes.
pub fn main_from_env() -> i32 {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let config = match parse_args(&args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return 2;
        }
    };
    match run(&config) {
        Ok(manifest) => {
            println!(
                "manifest: {}",
                config.output_dir.join("manifest.json").display()
            );
            let _ = manifest;
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn now_ms() -> u128 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_millis())
        .unwrap_or(0)
}

fn need_usize(cfg: &ExperimentConfig, key: &str) -> Result<usize> {
    parse_opt_u64(&cfg.params, key)?
        .map(|v| v as usize)
        .ok_or_else(|| Error::InvalidArgument(format!("missing required --{key}")))
}

fn need_f64(cfg: &ExperimentConfig, key: &str) -> Result<f64> {
    parse_opt_f64(&cfg.params, key)?
        .ok_or_else(|| Error::InvalidArgument(format!("missing required --{key}")))
}

fn need_f64_list(cfg: &ExperimentConfig, key: &str) -> Result<Vec<f64>> {
    let raw = cfg
        .params
        .get(key)
        .ok_or_else(|| Error::InvalidArgument(format!("missing required --{key}")))?;
    raw.split(',')
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("--{key}: bad number {s}")))
        })
        .collect()
}

fn parse_point(cfg: &ExperimentConfig, key: &str, d: usize) -> Result<LatticePoint> {
    match cfg.params.get(key) {
        None => Ok(LatticePoint::origin(d)),
        Some(raw) => {
            let coords: Vec<i64> = raw
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse()
                        .map_err(|_| Error::InvalidArgument(format!("--{key}: bad coordinate {s}")))
                })
                .collect::<Result<_>>()?;
            if coords.len() != d {
                return Err(Error::DimensionMismatch {
                    left: d,
                    right: coords.len(),
                });
            }
            Ok(LatticePoint::new(coords))
        }
    }
}

fn parse_opt_u64(params: &BTreeMap<String, String>, key: &str) -> Result<Option<u64>> {
    params
        .get(key)
        .map(|v| {
            v.parse()
                .map_err(|_| Error::InvalidArgument(format!("--{key}: bad integer {v}")))
        })
        .transpose()
}

fn parse_opt_f64(params: &BTreeMap<String, String>, key: &str) -> Result<Option<f64>> {
    params
        .get(key)
        .map(|v| {
            v.parse()
                .map_err(|_| Error::InvalidArgument(format!("--{key}: bad number {v}")))
        })
        .transpose()
}
