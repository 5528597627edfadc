//! Hypercube constructions: embedded regular trees, the branching-process
//! domination coupling, substantial and giant excursion components, and
//! good-event Monte Carlo over a cross of five neighboring cubes.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use statrs::distribution::{Binomial, DiscreteCDF};

use crate::error::{Error, Result};
use crate::gff::{h_as, CovarianceModel, SequentialSampler};
use crate::lattice::{LatticePoint, Region};
use crate::levelset::{bit_components, excursion, Excursion, LevelEstimate, RegionAdjacency};
use crate::potential::{green_matrix, GreenEvaluator};
use crate::stats::Estimate;
use crate::unionfind::UnionFind;

/// Cap on the cube dimension for full-cube enumeration and sampling.
pub const HYPERCUBE_DIM_CAP: usize = 12;

/// A translate 2x + {0,1}^d of the binary cube, with x in the embedded Z^2.
#[derive(Debug, Clone)]
pub struct HypercubeRegion {
    pub d: usize,
    pub base: (i64, i64),
    pub region: Region,
}

pub fn hypercube(d: usize, base: (i64, i64)) -> Result<HypercubeRegion> {
    if d < 3 || d > HYPERCUBE_DIM_CAP {
        return Err(Error::InvalidArgument(format!(
            "hypercube dimension must lie in 3..={HYPERCUBE_DIM_CAP}, got {d}"
        )));
    }
    let mut pts = Vec::with_capacity(1 << d);
    for mask in 0u64..(1 << d) {
        let mut coords = vec![0i64; d];
        for (i, c) in coords.iter_mut().enumerate() {
            *c = ((mask >> i) & 1) as i64;
        }
        coords[0] += 2 * base.0;
        coords[1] += 2 * base.1;
        pts.push(LatticePoint::new(coords));
    }
    Ok(HypercubeRegion {
        d,
        base,
        region: Region::from_points(pts)?,
    })
}

/// Regular tree embedded in the cube: generation-j nodes are sums
/// e_{i_1} + ... + e_{i_j} with i_k drawn from disjoint coordinate blocks
/// I_k = {(k-1) r, ..., k r - 1}. Nodes are enumerated hierarchically
/// (parents before children, l1-norm non-decreasing).
#[derive(Debug, Clone)]
pub struct EmbeddedTree {
    pub d: usize,
    pub depth: usize,
    pub branching: usize,
    /// Hierarchical enumeration x_1, ..., x_|T| (the root 0 is excluded).
    pub nodes: Vec<LatticePoint>,
    /// Parent index per node; None for generation 1 (children of the root).
    pub parent: Vec<Option<usize>>,
    pub generation: Vec<usize>,
}

pub fn embed_tree(d: usize, depth: usize, branching: usize) -> Result<EmbeddedTree> {
    if depth == 0 || branching == 0 {
        return Err(Error::InvalidArgument("depth, branching >= 1".into()));
    }
    if depth * branching > d {
        return Err(Error::CapExceeded {
            requested: depth * branching,
            cap: d,
        });
    }
    let mut nodes: Vec<LatticePoint> = Vec::new();
    let mut parent = Vec::new();
    let mut generation = Vec::new();
    let mut prev_gen: Vec<usize> = Vec::new(); // node indices of the last generation
    for j in 1..=depth {
        let block = ((j - 1) * branching)..(j * branching);
        let mut this_gen = Vec::new();
        if j == 1 {
            for i in block {
                nodes.push(LatticePoint::unit(d, i));
                parent.push(None);
                generation.push(1);
                this_gen.push(nodes.len() - 1);
            }
        } else {
            for &p in &prev_gen {
                for i in block.clone() {
                    let mut coords = nodes[p].coords().to_vec();
                    coords[i] = 1;
                    nodes.push(LatticePoint::new(coords));
                    parent.push(Some(p));
                    generation.push(j);
                    this_gen.push(nodes.len() - 1);
                }
            }
        }
        prev_gen = this_gen;
    }
    Ok(EmbeddedTree {
        d,
        depth,
        branching,
        nodes,
        parent,
        generation,
    })
}

impl EmbeddedTree {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn region(&self) -> Result<Region> {
        Region::from_points_ordered(self.nodes.clone())
    }
}

/// Branching-process parameters. The formula values b = ceil(1 + 11/eps),
/// p = d^{-(1 - 3 eps/2)} and threshold floor(d^eps / b)^{b-1} are not
/// desk-simulable (the raw threshold collapses to zero for small d), so the
/// effective values can be overridden while the formula values stay in the
/// struct for reporting.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GWParams {
    pub d: usize,
    pub eps: f64,
    /// Tree depth from the formula, rounded up to an integer.
    pub b_formula: u64,
    /// Offspring survival probability d^{-(1 - 3 eps/2)}.
    pub p: f64,
    /// floor(d^eps / b)^{b-1} before the floor-at-one.
    pub raw_threshold: f64,
    /// Effective substantial-size threshold (>= 1).
    pub threshold: u64,
}

impl GWParams {
    pub fn from_formula(d: usize, eps: f64) -> Result<GWParams> {
        if !(0.0 < eps && eps < 1.0 / 3.0) {
            return Err(Error::InvalidArgument(
                "eps must lie in (0, 1/3)".into(),
            ));
        }
        let b = (1.0 + 11.0 / eps).ceil();
        let p = (d as f64).powf(-(1.0 - 1.5 * eps));
        let raw = ((d as f64).powf(eps) / b).floor().powf(b - 1.0);
        Ok(GWParams {
            d,
            eps,
            b_formula: b as u64,
            p,
            raw_threshold: raw,
            threshold: (raw as u64).max(1),
        })
    }

    pub fn with_threshold(mut self, threshold: u64) -> GWParams {
        self.threshold = threshold.max(1);
        self
    }
}

/// Coefficient sums of the innovation expansion phi_{x_n} = sum alpha_{n,k}
/// psi_{x_k}, together with the hitting-probability margins that drive them.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AlphaReport {
    /// sum_k alpha_{n,k} per node.
    pub sums: Vec<f64>,
    pub max_sum: f64,
    /// P_{x_n}[H_{K_n} < inf] per node.
    pub hit_probs: Vec<f64>,
    pub max_hit_prob: f64,
    /// Largest deviation of sum_k alpha_{n,k} from
    /// 1 + sum_l p_{n,l} sum_k alpha_{l,k}.
    pub identity_residual: f64,
    /// max_hit_prob * d, for comparison against the c_3' ledger value.
    pub hit_prob_times_d: f64,
}

/// Evaluate the alpha recursion exactly on the tree ordering.
pub fn alpha_coefficients(eval: &GreenEvaluator, tree: &EmbeddedTree) -> Result<AlphaReport> {
    let region = tree.region()?;
    let g = green_matrix(eval, &region)?;
    let n = region.len();
    // hitting rows p^{K_n}_{x_n, .} via the last-exit systems on prefixes
    let mut p_rows: Vec<Vec<f64>> = Vec::with_capacity(n);
    p_rows.push(Vec::new());
    for k in 1..n {
        let gk = g.view((0, 0), (k, k)).into_owned();
        let rhs = nalgebra::DVector::from_fn(k, |j, _| g[(j, k)]);
        let chol = gk
            .cholesky()
            .ok_or_else(|| Error::Factorization("prefix Green block not PD".into()))?;
        let w = chol.solve(&rhs);
        p_rows.push(w.iter().map(|v| v.max(0.0)).collect());
    }

    // alpha recursion: alpha[n][n] = 1, alpha[n][k] = sum_l p[n][l] alpha[l][k]
    let mut alpha: Vec<Vec<f64>> = Vec::with_capacity(n);
    for i in 0..n {
        let mut row = vec![0.0; i + 1];
        row[i] = 1.0;
        for k in 0..i {
            let mut acc = 0.0;
            for (l, arow) in alpha.iter().enumerate().take(i).skip(k) {
                acc += p_rows[i][l] * arow[k];
            }
            row[k] = acc;
        }
        alpha.push(row);
    }
    let sums: Vec<f64> = alpha.iter().map(|r| r.iter().sum()).collect();
    let hit_probs: Vec<f64> = p_rows.iter().map(|r| r.iter().sum()).collect();
    let mut identity_residual = 0.0f64;
    for i in 0..n {
        let mut rhs = 1.0;
        for l in 0..i {
            rhs += p_rows[i][l] * sums[l];
        }
        identity_residual = identity_residual.max((sums[i] - rhs).abs());
    }
    let max_sum = sums.iter().cloned().fold(f64::MIN, f64::max);
    let max_hit = hit_probs.iter().cloned().fold(0.0, f64::max);
    Ok(AlphaReport {
        sums,
        max_sum,
        hit_probs,
        max_hit_prob: max_hit,
        identity_residual,
        hit_prob_times_d: max_hit * eval.d() as f64,
    })
}

/// Result of the pathwise domination coupling.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GwReport {
    pub samples: u64,
    pub eps: f64,
    /// The floor -(eps / 4 c_3') d h_as on the innovations.
    pub floor: f64,
    /// Trigger level h_as (1 - 3 eps / 2).
    pub trigger: f64,
    /// Target level h_as (1 - 2 eps).
    pub target: f64,
    /// Times the inclusion premise held (all prior innovations above the
    /// floor, own innovation above the trigger).
    pub applicable: u64,
    /// Times the premise held but the field missed the target. Violations
    /// are data: zero is expected whenever the alpha and hitting margins
    /// hold, and the report carries them either way.
    pub violations: u64,
    /// Fraction of samples on which every innovation stayed above the floor.
    pub all_above_floor_freq: f64,
    /// Empirical P[psi_x >= trigger | psi_x >= floor], aggregated over nodes.
    pub marginal_freq: f64,
    pub marginal_se: f64,
    /// The same conditional probability from the Gaussian tail with the
    /// exact innovation variances (the oracle the frequency is checked
    /// against).
    pub marginal_predicted: f64,
    /// The branching survival probability d^{-(1 - 3 eps/2)} the marginal
    /// is compared to.
    pub p_formula: f64,
    /// marginal_freq >= p_formula (reported, not asserted: fails at desk
    /// dimensions, holds only for d large).
    pub marginal_beats_formula: bool,
}

/// Run the explicit coupling: sample innovations along the hierarchical
/// ordering, rebuild the field, and check pathwise that the inclusion
/// "premise implies field above target" never fails.
pub fn gw_domination_check(
    eval: &GreenEvaluator,
    tree: &EmbeddedTree,
    gw: &GWParams,
    samples: u64,
    master_seed: u64,
    c3_prime: f64,
) -> Result<GwReport> {
    let region = tree.region()?;
    let model = CovarianceModel::build(eval, &region, 5000)?;
    let ordering: Vec<usize> = (0..region.len()).collect();
    let sampler = SequentialSampler::new(&model, &ordering)?;

    let d = eval.d() as f64;
    let h0 = h_as(eval, 0.0)?;
    let eps = gw.eps;
    let floor = -(eps / (4.0 * c3_prime)) * d * h0;
    let trigger = h0 * (1.0 - 1.5 * eps);
    let target = h0 * (1.0 - 2.0 * eps);

    let n = region.len();
    let mut applicable = 0u64;
    let mut violations = 0u64;
    let mut all_floor = 0u64;
    let mut cond_hits = 0u64;
    let mut cond_trials = 0u64;
    for rep in 0..samples {
        let (sample, psi) = sampler.sample_with_innovations(master_seed, rep);
        let mut prefix_ok = true; // M_{n-1}: innovations before n all above floor
        for i in 0..n {
            if prefix_ok && psi[i] >= trigger {
                applicable += 1;
                if sample.values[i] < target {
                    violations += 1;
                }
            }
            if psi[i] >= floor {
                cond_trials += 1;
                if psi[i] >= trigger {
                    cond_hits += 1;
                }
            }
            prefix_ok &= psi[i] >= floor;
        }
        if prefix_ok {
            all_floor += 1;
        }
    }

    // oracle: average over nodes of Phibar(trigger/sigma)/Phi(ceil) using
    // the exact innovation variances
    let mut pred = 0.0;
    for i in 0..n {
        let sigma = sampler.step_variance(i).sqrt();
        let tail_t = crate::gff::std_normal_tail(trigger / sigma);
        let below_floor = crate::gff::std_normal_tail(-floor / sigma);
        pred += tail_t / (1.0 - below_floor);
    }
    pred /= n as f64;
    let freq = cond_hits as f64 / cond_trials.max(1) as f64;
    let se = (freq * (1.0 - freq) / cond_trials.max(1) as f64).sqrt();
    Ok(GwReport {
        samples,
        eps,
        floor,
        trigger,
        target,
        applicable,
        violations,
        all_above_floor_freq: all_floor as f64 / samples as f64,
        marginal_freq: freq,
        marginal_se: se,
        marginal_predicted: pred,
        p_formula: gw.p,
        marginal_beats_formula: freq >= gw.p,
    })
}

/// Exact binomial lower tail against the Chernoff bound:
/// P[Bin(n, p) < (1 - delta) n p] <= exp(-delta^2 n p / 2).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ChernoffCheck {
    pub n: u64,
    pub p: f64,
    pub delta: f64,
    pub exact_tail: f64,
    pub bound: f64,
}

pub fn chernoff_check(n: u64, p: f64, delta: f64) -> Result<ChernoffCheck> {
    if !(0.0 < delta && delta < 1.0) {
        return Err(Error::InvalidArgument("delta must lie in (0,1)".into()));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument("p must lie in [0,1]".into()));
    }
    let mean = n as f64 * p;
    let threshold = (1.0 - delta) * mean;
    let exact = if threshold <= 0.0 || p == 0.0 {
        0.0
    } else {
        let k = threshold.ceil() as i64 - 1;
        if k < 0 {
            0.0
        } else {
            let dist = Binomial::new(p, n)
                .map_err(|e| Error::InvalidArgument(format!("binomial: {e}")))?;
            dist.cdf(k as u64)
        }
    };
    Ok(ChernoffCheck {
        n,
        p,
        delta,
        exact_tail: exact,
        bound: (-delta * delta * mean / 2.0).exp(),
    })
}

/// Substantial components of an excursion over a full cube, with the set of
/// vertices not neighboring any of them.
#[derive(Debug, Clone)]
pub struct SubstantialReport {
    /// Point indices of each component of size >= threshold.
    pub components: Vec<Vec<usize>>,
    /// Vertices with no cube-neighbor inside any substantial component.
    pub bad_set: Vec<usize>,
    pub bad_fraction: f64,
    /// The reference level exp(-c_4' d^eps) the fraction is compared to.
    pub bad_fraction_reference: f64,
}

pub fn substantial_components(
    exc: &Excursion,
    cube: &HypercubeRegion,
    gw: &GWParams,
    c4_prime: f64,
) -> Result<SubstantialReport> {
    if exc.region.len() != cube.region.len() || exc.region.dim() != cube.d {
        return Err(Error::DimensionMismatch {
            left: exc.region.len(),
            right: cube.region.len(),
        });
    }
    let adj = cube_adjacency(cube);
    let (labels, sizes) = bit_components_with(exc, &adj);
    let mut comp_members: Vec<Vec<usize>> = vec![Vec::new(); sizes.len()];
    for (i, &l) in labels.iter().enumerate() {
        if l != usize::MAX {
            comp_members[l].push(i);
        }
    }
    let substantial: Vec<Vec<usize>> = comp_members
        .into_iter()
        .filter(|c| c.len() as u64 >= gw.threshold)
        .collect();
    let mut in_substantial = vec![false; cube.region.len()];
    for c in &substantial {
        for &i in c {
            in_substantial[i] = true;
        }
    }
    let mut bad = Vec::new();
    for i in 0..cube.region.len() {
        let has = adj.lists[i].iter().any(|&j| in_substantial[j as usize]);
        if !has {
            bad.push(i);
        }
    }
    let frac = bad.len() as f64 / cube.region.len() as f64;
    Ok(SubstantialReport {
        components: substantial,
        bad_set: bad,
        bad_fraction: frac,
        bad_fraction_reference: (-c4_prime * (cube.d as f64).powf(gw.eps)).exp(),
    })
}

/// Adjacency inside one cube (Hamming-distance-1 pairs).
pub fn cube_adjacency(cube: &HypercubeRegion) -> RegionAdjacency {
    RegionAdjacency::build(&cube.region)
}

fn bit_components_with(exc: &Excursion, adj: &RegionAdjacency) -> (Vec<usize>, Vec<usize>) {
    bit_components(exc, adj)
}

/// The giant component of an excursion over a full cube: the unique
/// component whose closure within the cube covers all but a d^{-2} fraction.
#[derive(Debug, Clone)]
pub struct GiantComponent {
    pub members: Vec<usize>,
    pub closure_size: usize,
}

/// Find the giant component, if any. Two qualifying components cannot
/// coexist (any component disjoint from the closure of a giant is too small
/// to qualify), so a second find is a hard invariant failure.
pub fn giant_component(exc: &Excursion, cube: &HypercubeRegion) -> Option<GiantComponent> {
    let adj = cube_adjacency(cube);
    giant_component_with(exc, cube, &adj)
}

pub fn giant_component_with(
    exc: &Excursion,
    cube: &HypercubeRegion,
    adj: &RegionAdjacency,
) -> Option<GiantComponent> {
    let n = cube.region.len();
    let d = cube.d as f64;
    let needed = (1.0 - 1.0 / (d * d)) * n as f64;
    let (labels, sizes) = bit_components_with(exc, adj);
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); sizes.len()];
    for (i, &l) in labels.iter().enumerate() {
        if l != usize::MAX {
            members[l].push(i);
        }
    }
    let mut found: Option<GiantComponent> = None;
    for comp in members {
        if comp.is_empty() {
            continue;
        }
        let mut in_closure = vec![false; n];
        for &i in &comp {
            in_closure[i] = true;
            for &j in &adj.lists[i] {
                in_closure[j as usize] = true;
            }
        }
        let closure_size = in_closure.iter().filter(|&&b| b).count();
        if closure_size as f64 >= needed {
            assert!(
                found.is_none(),
                "two qualifying giant components in one cube: impossible by the closure size argument"
            );
            found = Some(GiantComponent {
                members: comp,
                closure_size,
            });
        }
    }
    found
}

/// Exhaustive check of the partition event: for every split of the
/// substantial components (found at the higher level) into two classes of
/// cardinality at least d^{-4} |H| each, some pair across the split is
/// connected at the lower (sprinkled) level.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PartitionEventReport {
    pub n_substantial: usize,
    /// False when the component count exceeds the exhaustive cap and the
    /// check was skipped.
    pub checked: bool,
    /// None when skipped.
    pub holds: Option<bool>,
    pub partitions_checked: u64,
}

/// Cap on exhaustive partition enumeration (2^N splits).
pub const PARTITION_EVENT_CAP: usize = 12;

pub fn partition_event(
    exc_components: &Excursion,
    exc_connect: &Excursion,
    cube: &HypercubeRegion,
    gw: &GWParams,
    c4_prime: f64,
) -> Result<PartitionEventReport> {
    if exc_connect.level > exc_components.level {
        return Err(Error::InvalidArgument(
            "connection level must sit at or below the component level".into(),
        ));
    }
    let sub = substantial_components(exc_components, cube, gw, c4_prime)?;
    let n = sub.components.len();
    if n > PARTITION_EVENT_CAP {
        return Ok(PartitionEventReport {
            n_substantial: n,
            checked: false,
            holds: None,
            partitions_checked: 0,
        });
    }
    let d = cube.d as f64;
    let size_floor = cube.region.len() as f64 / (d * d * d * d);
    // each substantial component sits inside one cluster of the lower level
    let adj = cube_adjacency(cube);
    let (labels, _) = bit_components_with(exc_connect, &adj);
    let cluster_of: Vec<usize> = sub.components.iter().map(|c| labels[c[0]]).collect();
    let sizes: Vec<usize> = sub.components.iter().map(|c| c.len()).collect();

    let mut holds = true;
    let mut count = 0u64;
    // subsets with index 0 fixed on one side cover each split once
    for mask in 0u64..(1u64 << n.saturating_sub(1)) {
        let mask = mask << 1;
        let (mut size_a, mut size_b) = (0usize, 0usize);
        for (i, s) in sizes.iter().enumerate() {
            if mask >> i & 1 == 1 {
                size_a += s;
            } else {
                size_b += s;
            }
        }
        if (size_a as f64) < size_floor || (size_b as f64) < size_floor {
            continue;
        }
        count += 1;
        let ids_a: std::collections::HashSet<usize> = (0..n)
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| cluster_of[i])
            .collect();
        let connected = (0..n)
            .filter(|i| mask >> i & 1 == 0)
            .any(|i| ids_a.contains(&cluster_of[i]));
        if !connected {
            holds = false;
            break;
        }
    }
    Ok(PartitionEventReport {
        n_substantial: n,
        checked: true,
        holds: Some(holds),
        partitions_checked: count,
    })
}

/// Precomputed geometry for the five-cube good event.
pub struct GoodEventContext {
    pub d: usize,
    pub region: Region,
    cubes: Vec<HypercubeRegion>,
    /// positions of each cube's points inside the joint region
    cube_pos: Vec<Vec<usize>>,
    cube_adj: Vec<RegionAdjacency>,
    region_adj: RegionAdjacency,
}

pub const GOOD_EVENT_BASES: [(i64, i64); 5] = [(0, 0), (1, 0), (-1, 0), (0, 1), (0, -1)];

impl GoodEventContext {
    pub fn new(d: usize) -> Result<GoodEventContext> {
        if d > 10 {
            return Err(Error::CapExceeded {
                requested: 5 * (1usize << d),
                cap: 5 * 1024,
            });
        }
        let cubes: Vec<HypercubeRegion> = GOOD_EVENT_BASES
            .iter()
            .map(|&b| hypercube(d, b))
            .collect::<Result<_>>()?;
        let mut all = Vec::new();
        for c in &cubes {
            all.extend(c.region.points().iter().cloned());
        }
        let region = Region::from_points(all)?;
        let cube_pos = cubes
            .iter()
            .map(|c| {
                c.region
                    .iter()
                    .map(|p| region.position(p).expect("cube point in union"))
                    .collect()
            })
            .collect();
        let cube_adj = cubes.iter().map(cube_adjacency).collect();
        let region_adj = RegionAdjacency::build(&region);
        Ok(GoodEventContext {
            d,
            region,
            cubes,
            cube_pos,
            cube_adj,
            region_adj,
        })
    }

    /// Evaluate the good event on one excursion over the joint region:
    /// every cube holds a giant component and the five giants are connected
    /// within the level set of the cross.
    pub fn good_event(&self, exc: &Excursion) -> bool {
        let mut reps = Vec::with_capacity(5);
        for (ci, cube) in self.cubes.iter().enumerate() {
            let local = Excursion {
                region: Arc::new(cube.region.clone()),
                level: exc.level,
                bits: self.cube_pos[ci].iter().map(|&i| exc.bits[i]).collect(),
                source: exc.source,
            };
            match giant_component_with(&local, cube, &self.cube_adj[ci]) {
                None => return false,
                Some(g) => reps.push(self.cube_pos[ci][g.members[0]]),
            }
        }
        // connectivity of the five giants through the whole cross
        let n = self.region.len();
        let mut uf = UnionFind::new(n);
        for i in 0..n {
            if !exc.bits[i] {
                continue;
            }
            for &j in &self.region_adj.lists[i] {
                if exc.bits[j as usize] {
                    uf.union(i, j as usize);
                }
            }
        }
        let root = uf.find(reps[0]);
        reps.iter().all(|&r| uf.find(r) == root)
    }
}

/// Monte Carlo estimate of the good-event probability across a level grid,
/// common random numbers throughout.
pub fn good_event_mc(
    eval: &GreenEvaluator,
    h_grid: &[f64],
    replicas: u64,
    master_seed: u64,
) -> Result<Vec<LevelEstimate>> {
    let ctx = GoodEventContext::new(eval.d())?;
    let model = CovarianceModel::build(eval, &ctx.region, 5 * 1024 + 64)?;
    use rayon::prelude::*;
    let rows: Vec<Vec<bool>> = (0..replicas)
        .into_par_iter()
        .map(|rep| {
            let sample = model.sample_one(master_seed, rep);
            h_grid
                .iter()
                .map(|&h| ctx.good_event(&excursion(&sample, h)))
                .collect()
        })
        .collect();
    let mut counts = vec![0u64; h_grid.len()];
    for row in rows {
        for (c, hit) in counts.iter_mut().zip(row) {
            if hit {
                *c += 1;
            }
        }
    }
    Ok(h_grid
        .iter()
        .zip(counts)
        .map(|(&h, c)| LevelEstimate {
            h,
            estimate: Estimate::from_counts(c, replicas, master_seed),
        })
        .collect())
}
