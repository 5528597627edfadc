//! Excursion sets, crossing events, and common-random-number Monte Carlo
//! for percolation observables.
//!
//! Level sweeps reuse the same field samples at every level (common random
//! numbers), so estimates are pathwise non-increasing in h — exactly, not
//! just statistically. The h_* and h_** brackets computed here are
//! finite-size proxies: the quantities they stand in for are defined
//! through infinite-volume limits which no finite experiment reaches.

use std::io::Write;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gff::{BoxMarkovSampler, CovarianceModel, FieldSample, Provenance, DEFAULT_SAMPLER_CAP};
use crate::lattice::{ball, sphere, LatticePoint, Norm, Region};
use crate::potential::GreenEvaluator;
use crate::stats::Estimate;
use crate::unionfind::UnionFind;

/// Thresholded field: bit x set iff phi_x >= h (closed threshold).
#[derive(Debug, Clone)]
pub struct Excursion {
    pub region: Arc<Region>,
    pub level: f64,
    pub bits: Vec<bool>,
    pub source: Provenance,
}

pub fn excursion(sample: &FieldSample, h: f64) -> Excursion {
    Excursion {
        region: Arc::clone(&sample.region),
        level: h,
        bits: sample.values.iter().map(|&v| v >= h).collect(),
        source: sample.provenance,
    }
}

impl Excursion {
    pub fn ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }
}

/// Nearest-neighbor adjacency lists of a region, built once and shared by
/// every replica of a sweep.
#[derive(Debug, Clone)]
pub struct RegionAdjacency {
    pub lists: Vec<Vec<u32>>,
}

impl RegionAdjacency {
    pub fn build(region: &Region) -> RegionAdjacency {
        let lists = region
            .iter()
            .map(|p| {
                p.neighbors()
                    .into_iter()
                    .filter_map(|q| region.position(&q).map(|i| i as u32))
                    .collect()
            })
            .collect();
        RegionAdjacency { lists }
    }
}

/// Crossing query between two vertex sets inside the sampled region.
#[derive(Debug, Clone)]
pub struct CrossingQuery {
    pub from: Region,
    pub to: Region,
}

impl CrossingQuery {
    fn indices(&self, region: &Region) -> Result<(Vec<usize>, Vec<usize>)> {
        let map = |k: &Region| -> Result<Vec<usize>> {
            k.iter()
                .map(|p| {
                    region.position(p).ok_or_else(|| {
                        Error::InvalidArgument(format!("query point {p} outside sampled region"))
                    })
                })
                .collect()
        };
        Ok((map(&self.from)?, map(&self.to)?))
    }
}

/// Union-find labeling of the 1-bits under nearest adjacency; `labels[i]`
/// is the component root for set bits and usize::MAX otherwise.
pub fn bit_components(exc: &Excursion, adj: &RegionAdjacency) -> (Vec<usize>, Vec<usize>) {
    let n = exc.bits.len();
    let mut uf = UnionFind::new(n);
    for i in 0..n {
        if !exc.bits[i] {
            continue;
        }
        for &j in &adj.lists[i] {
            if exc.bits[j as usize] {
                uf.union(i, j as usize);
            }
        }
    }
    let mut labels = vec![usize::MAX; n];
    let mut sizes = Vec::new();
    let mut roots: std::collections::HashMap<usize, usize> = std::collections::HashMap::new();
    for i in 0..n {
        if exc.bits[i] {
            let r = uf.find(i);
            let id = *roots.entry(r).or_insert_with(|| {
                sizes.push(0usize);
                sizes.len() - 1
            });
            labels[i] = id;
            sizes[id] += 1;
        }
    }
    (labels, sizes)
}

/// True iff a nearest-neighbor path of 1-bits joins the two query sets.
pub fn crossing(exc: &Excursion, q: &CrossingQuery) -> Result<bool> {
    let adj = RegionAdjacency::build(&exc.region);
    crossing_with(exc, q, &adj)
}

pub fn crossing_with(exc: &Excursion, q: &CrossingQuery, adj: &RegionAdjacency) -> Result<bool> {
    let (from_idx, to_idx) = q.indices(&exc.region)?;
    let (labels, _) = bit_components(exc, adj);
    let mut from_labels = std::collections::HashSet::new();
    for &i in &from_idx {
        if labels[i] != usize::MAX {
            from_labels.insert(labels[i]);
        }
    }
    if from_labels.is_empty() {
        return Ok(false);
    }
    Ok(to_idx
        .iter()
        .any(|&i| labels[i] != usize::MAX && from_labels.contains(&labels[i])))
}

/// The standard crossing geometries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Geometry {
    /// B_inf(0, L) to S_inf(0, 2L), sampled on B_inf(0, 2L).
    BoxToSphere { l: i64 },
    /// B_inf(0, L) to S_inf(0, 3L), sampled on B_inf(0, 3L).
    Annulus { l: i64 },
    /// Origin to S_1(0, R), sampled on B_1(0, R).
    PointToL1Sphere { r: i64 },
    /// Face x_1 = -L to face x_1 = +L of B_inf(0, L) (spanning statistic).
    SpanningBox { l: i64 },
}

impl Geometry {
    pub fn scale(&self) -> i64 {
        match self {
            Geometry::BoxToSphere { l } | Geometry::Annulus { l } | Geometry::SpanningBox { l } => {
                *l
            }
            Geometry::PointToL1Sphere { r } => *r,
        }
    }

    pub fn label(&self) -> String {
        match self {
            Geometry::BoxToSphere { l } => format!("box_to_sphere({l})"),
            Geometry::Annulus { l } => format!("annulus({l})"),
            Geometry::PointToL1Sphere { r } => format!("point_to_l1_sphere({r})"),
            Geometry::SpanningBox { l } => format!("spanning_box({l})"),
        }
    }

    pub fn region(&self, d: usize) -> Result<Region> {
        let o = LatticePoint::origin(d);
        match self {
            Geometry::BoxToSphere { l } => ball(&o, (2 * l) as f64, Norm::Linf, 2_000_000),
            Geometry::Annulus { l } => ball(&o, (3 * l) as f64, Norm::Linf, 2_000_000),
            Geometry::PointToL1Sphere { r } => ball(&o, *r as f64, Norm::L1, 2_000_000),
            Geometry::SpanningBox { l } => ball(&o, *l as f64, Norm::Linf, 2_000_000),
        }
    }

    pub fn query(&self, d: usize) -> Result<CrossingQuery> {
        let o = LatticePoint::origin(d);
        match self {
            Geometry::BoxToSphere { l } => Ok(CrossingQuery {
                from: ball(&o, *l as f64, Norm::Linf, 2_000_000)?,
                to: sphere(&o, (2 * l) as f64, Norm::Linf, 2_000_000)?,
            }),
            Geometry::Annulus { l } => Ok(CrossingQuery {
                from: ball(&o, *l as f64, Norm::Linf, 2_000_000)?,
                to: sphere(&o, (3 * l) as f64, Norm::Linf, 2_000_000)?,
            }),
            Geometry::PointToL1Sphere { r } => {
                let to = if *r == 0 {
                    Region::singleton(o.clone())
                } else {
                    sphere(&o, *r as f64, Norm::L1, 2_000_000)?
                };
                Ok(CrossingQuery {
                    from: Region::singleton(o),
                    to,
                })
            }
            Geometry::SpanningBox { l } => {
                let region = self.region(d)?;
                let face = |sign: i64| -> Result<Region> {
                    Region::from_points(
                        region
                            .iter()
                            .filter(|p| p.coord(0) == sign * l)
                            .cloned()
                            .collect(),
                    )
                };
                Ok(CrossingQuery {
                    from: face(-1)?,
                    to: face(1)?,
                })
            }
        }
    }
}

/// Exact sampler chosen by region size: dense Cholesky within the cap,
/// boundary-plus-interior factorization beyond it.
pub enum FieldSampler {
    Dense(CovarianceModel),
    Box(BoxMarkovSampler),
}

impl FieldSampler {
    pub fn for_region(eval: &GreenEvaluator, region: &Region) -> Result<FieldSampler> {
        if region.len() <= DEFAULT_SAMPLER_CAP {
            Ok(FieldSampler::Dense(CovarianceModel::build(
                eval,
                region,
                DEFAULT_SAMPLER_CAP,
            )?))
        } else {
            Ok(FieldSampler::Box(BoxMarkovSampler::for_region(
                eval,
                region,
                DEFAULT_SAMPLER_CAP,
                40_000,
            )?))
        }
    }

    pub fn sample_one(&self, master_seed: u64, replica: u64) -> FieldSample {
        match self {
            FieldSampler::Dense(m) => m.sample_one(master_seed, replica),
            FieldSampler::Box(s) => s.sample_one(master_seed, replica),
        }
    }
}

/// One level of a sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LevelEstimate {
    pub h: f64,
    pub estimate: Estimate,
}

/// Crossing probabilities across a level grid with common random numbers.
pub fn mc_crossing_prob(
    eval: &GreenEvaluator,
    geometry: Geometry,
    h_list: &[f64],
    replicas: u64,
    master_seed: u64,
) -> Result<Vec<LevelEstimate>> {
    let d = eval.d();
    let region = geometry.region(d)?;
    let query = geometry.query(d)?;
    let sampler = FieldSampler::for_region(eval, &region)?;
    let adj = RegionAdjacency::build(&region);
    let counts = crn_counts(&sampler, &adj, &query, h_list, replicas, master_seed)?;
    Ok(h_list
        .iter()
        .zip(counts)
        .map(|(&h, c)| LevelEstimate {
            h,
            estimate: Estimate::from_counts(c, replicas, master_seed),
        })
        .collect())
}

/// Shared-sample crossing counts per level.
fn crn_counts(
    sampler: &FieldSampler,
    adj: &RegionAdjacency,
    query: &CrossingQuery,
    h_list: &[f64],
    replicas: u64,
    master_seed: u64,
) -> Result<Vec<u64>> {
    let per_replica: Vec<Result<Vec<bool>>> = (0..replicas)
        .into_par_iter()
        .map(|r| {
            let sample = sampler.sample_one(master_seed, r);
            let mut hits = Vec::with_capacity(h_list.len());
            for &h in h_list {
                let exc = excursion(&sample, h);
                hits.push(crossing_with(&exc, query, adj)?);
            }
            Ok(hits)
        })
        .collect();
    let mut counts = vec![0u64; h_list.len()];
    for row in per_replica {
        for (c, hit) in counts.iter_mut().zip(row?) {
            if hit {
                *c += 1;
            }
        }
    }
    Ok(counts)
}

/// Local connectivity experiment: P[0 connected to S_1(0, R) above h],
/// reported with the shape of the theoretical decay bound for qualitative
/// comparison (never asserted).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LocalConnReport {
    pub d: usize,
    pub r: i64,
    pub h: f64,
    pub estimate: Estimate,
    /// epsilon with h = h_as (1 + epsilon), when positive.
    pub eps_equivalent: Option<f64>,
    /// N with R = N d (real-valued).
    pub n_equivalent: f64,
    /// exp(-c_5 f(eps, N) d log d) evaluated with the ledger's c_5 when the
    /// comparison makes sense (eps > 0, N >= 1); conditional on constants.
    pub bound_shape: Option<f64>,
}

pub fn local_connectivity(
    eval: &GreenEvaluator,
    r: i64,
    h: f64,
    replicas: u64,
    master_seed: u64,
    c_5: f64,
) -> Result<LocalConnReport> {
    let d = eval.d();
    let levels = [h];
    let est = mc_crossing_prob(eval, Geometry::PointToL1Sphere { r }, &levels, replicas, master_seed)?;
    let h_as0 = crate::gff::h_as(eval, 0.0)?;
    let eps = h / h_as0 - 1.0;
    let n_equiv = r as f64 / d as f64;
    let bound = if eps > 0.0 && n_equiv >= 1.0 {
        let f = eps.powi(3) * (n_equiv / (1.0 + eps)).sqrt();
        Some((-c_5 * f * d as f64 * (d as f64).ln()).exp())
    } else {
        None
    };
    Ok(LocalConnReport {
        d,
        r,
        h,
        estimate: est.into_iter().next().unwrap().estimate,
        eps_equivalent: if eps > 0.0 { Some(eps) } else { None },
        n_equivalent: n_equiv,
        bound_shape: bound,
    })
}

/// Flip-identity check: for an increasing crossing event A, P[A at level h]
/// against P[flipped A at level -h], on independent sample sets.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FlipReport {
    pub h: f64,
    pub p_event: Estimate,
    pub p_flipped: Estimate,
    pub difference: f64,
    /// Combined standard error of the difference.
    pub joint_se: f64,
}

pub fn flip_identity_check(
    eval: &GreenEvaluator,
    geometry: Geometry,
    h: f64,
    replicas: u64,
    master_seed: u64,
) -> Result<FlipReport> {
    let d = eval.d();
    let region = geometry.region(d)?;
    let query = geometry.query(d)?;
    let sampler = FieldSampler::for_region(eval, &region)?;
    let adj = RegionAdjacency::build(&region);

    let run = |stream_base: u64, flipped: bool| -> Result<u64> {
        let hits: Vec<Result<bool>> = (0..replicas)
            .into_par_iter()
            .map(|rep| {
                let sample = sampler.sample_one(master_seed, stream_base + rep);
                let exc = if flipped {
                    // flipped event at level -h: sites with phi < -h carry the bit
                    Excursion {
                        region: Arc::clone(&sample.region),
                        level: -h,
                        bits: sample.values.iter().map(|&v| !(v >= -h)).collect(),
                        source: sample.provenance,
                    }
                } else {
                    excursion(&sample, h)
                };
                crossing_with(&exc, &query, &adj)
            })
            .collect();
        let mut count = 0;
        for h in hits {
            if h? {
                count += 1;
            }
        }
        Ok(count)
    };
    let a = run(0, false)?;
    let b = run(replicas, true)?;
    let pa = Estimate::from_counts(a, replicas, master_seed);
    let pb = Estimate::from_counts(b, replicas, master_seed);
    let se = |p: f64| (p * (1.0 - p) / replicas as f64).sqrt();
    let joint_se = (se(pa.value).powi(2) + se(pb.value).powi(2)).sqrt();
    Ok(FlipReport {
        h,
        difference: pa.value - pb.value,
        p_event: pa,
        p_flipped: pb,
        joint_se,
    })
}

/// Bracket produced by a proxy sweep. Always a finite-size statement.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BracketResult {
    pub kind: String,
    pub h_lo: f64,
    pub h_hi: f64,
    /// False when no grid point satisfied the bracket conditions.
    pub resolved: bool,
    /// Set when the lower condition was unsatisfiable and h_lo defaulted to
    /// the leftmost grid point.
    pub vacuous_lo: bool,
    /// Per (scale, level) estimates backing the bracket.
    pub table: Vec<(i64, LevelEstimate)>,
}

fn bracket_from_table(
    kind: &str,
    h_grid: &[f64],
    threshold: f64,
    table: &[(i64, Vec<LevelEstimate>)],
) -> BracketResult {
    let mut grid = h_grid.to_vec();
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let all_below = |h: f64| -> bool {
        table.iter().all(|(_, levels)| {
            levels
                .iter()
                .find(|le| le.h == h)
                .map(|le| le.estimate.value < threshold)
                .unwrap_or(false)
        })
    };
    let all_above = |h: f64| -> bool {
        table.iter().all(|(_, levels)| {
            levels
                .iter()
                .find(|le| le.h == h)
                .map(|le| le.estimate.value > threshold)
                .unwrap_or(false)
        })
    };
    let h_hi = grid.iter().copied().find(|&h| all_below(h));
    let flat: Vec<(i64, LevelEstimate)> = table
        .iter()
        .flat_map(|(l, levels)| levels.iter().map(move |le| (*l, le.clone())))
        .collect();
    match h_hi {
        None => BracketResult {
            kind: kind.into(),
            h_lo: f64::NAN,
            h_hi: f64::NAN,
            resolved: false,
            vacuous_lo: false,
            table: flat,
        },
        Some(hi) => {
            let lo = grid
                .iter()
                .copied()
                .filter(|&h| h < hi && all_above(h))
                .next_back();
            let (h_lo, vacuous) = match lo {
                Some(l) => (l, false),
                None => (grid[0], true),
            };
            BracketResult {
                kind: kind.into(),
                h_lo,
                h_hi: hi,
                resolved: h_lo < hi,
                vacuous_lo: vacuous,
                table: flat,
            }
        }
    }
}

/// Finite-size proxy bracket for the strongly-subcritical level: smallest
/// grid level at which the box-to-sphere crossing estimate falls below the
/// threshold at every tested scale, paired with the last level at which it
/// sits above the threshold at every scale.
pub fn h_doublestar_proxy(
    eval: &GreenEvaluator,
    l_list: &[i64],
    threshold: f64,
    h_grid: &[f64],
    replicas: u64,
    master_seed: u64,
) -> Result<BracketResult> {
    let mut table = Vec::new();
    for (i, &l) in l_list.iter().enumerate() {
        let est = mc_crossing_prob(
            eval,
            Geometry::BoxToSphere { l },
            h_grid,
            replicas,
            master_seed.wrapping_add(i as u64),
        )?;
        table.push((l, est));
    }
    Ok(bracket_from_table(
        "h_doublestar_finite_size_proxy",
        h_grid,
        threshold,
        &table,
    ))
}

/// Finite-size proxy bracket for the percolation level, via the
/// box-spanning statistic across increasing scales.
pub fn h_star_proxy(
    eval: &GreenEvaluator,
    l_list: &[i64],
    threshold: f64,
    h_grid: &[f64],
    replicas: u64,
    master_seed: u64,
) -> Result<BracketResult> {
    let mut table = Vec::new();
    for (i, &l) in l_list.iter().enumerate() {
        let est = mc_crossing_prob(
            eval,
            Geometry::SpanningBox { l },
            h_grid,
            replicas,
            master_seed.wrapping_add(1000 + i as u64),
        )?;
        table.push((l, est));
    }
    Ok(bracket_from_table(
        "h_star_finite_size_proxy",
        h_grid,
        threshold,
        &table,
    ))
}

/// CSV rows (d, geometry, scale, h, estimate, ci_half_width, replicas, seed).
pub fn write_estimates_csv<W: Write>(
    w: &mut W,
    d: usize,
    geometry: &Geometry,
    levels: &[LevelEstimate],
) -> Result<()> {
    write!(w, "d,geometry,scale,h,estimate,ci_half_width,replicas,seed\r\n")?;
    for le in levels {
        write!(
            w,
            "{},{},{},{},{},{},{},{}\r\n",
            d,
            geometry.label().replace(',', ";"),
            geometry.scale(),
            le.h,
            le.estimate.value,
            le.estimate.half_width,
            le.estimate.replicas,
            le.estimate.seed
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gff::SamplerKind;

    fn eval3() -> GreenEvaluator {
        GreenEvaluator::quadrature(3).unwrap()
    }

    fn dummy_provenance() -> Provenance {
        Provenance {
            sampler: SamplerKind::Dense,
            master_seed: 0,
            replica: 0,
        }
    }

    #[test]
    fn excursion_thresholds() {
        let region = Region::singleton(LatticePoint::origin(3));
        let mk = |v: f64| FieldSample {
            region: Arc::new(region.clone()),
            values: vec![v],
            provenance: dummy_provenance(),
        };
        assert!(excursion(&mk(0.3), -1e9).bits[0]);
        assert!(!excursion(&mk(0.3), 1e9).bits[0]);
        // closed threshold: phi = h keeps the bit
        assert!(excursion(&mk(0.3), 0.3).bits[0]);
    }

    #[test]
    fn excursion_monotone_in_level() {
        let eval = eval3();
        let region = ball(&LatticePoint::origin(3), 2.0, Norm::Linf, 1000).unwrap();
        let model = CovarianceModel::build(&eval, &region, 1000).unwrap();
        let s = model.sample_one(3, 0);
        let lo = excursion(&s, -0.5);
        let hi = excursion(&s, 0.7);
        for (a, b) in hi.bits.iter().zip(&lo.bits) {
            assert!(!a | b, "bit set at high level but not at low");
        }
    }

    #[test]
    fn crossing_basics() {
        let region = ball(&LatticePoint::origin(3), 1.0, Norm::Linf, 100).unwrap();
        let adj = RegionAdjacency::build(&region);
        let query = CrossingQuery {
            from: Region::singleton(LatticePoint::origin(3)),
            to: Region::singleton(LatticePoint::origin(3)),
        };
        let mut exc = Excursion {
            region: Arc::new(region.clone()),
            level: 0.0,
            bits: vec![false; region.len()],
            source: dummy_provenance(),
        };
        // all bits 0: no crossing
        assert!(!crossing_with(&exc, &query, &adj).unwrap());
        // overlap with a 1-bit: length-0 path
        let c = region.position(&LatticePoint::origin(3)).unwrap();
        exc.bits[c] = true;
        assert!(crossing_with(&exc, &query, &adj).unwrap());
    }

    #[test]
    fn crossing_monotone_under_bit_flips() {
        use rand::Rng;
        use rand::SeedableRng;
        let region = ball(&LatticePoint::origin(3), 2.0, Norm::Linf, 1000).unwrap();
        let adj = RegionAdjacency::build(&region);
        let query = Geometry::BoxToSphere { l: 1 }.query(3).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let bits: Vec<bool> = (0..region.len()).map(|_| rng.gen_bool(0.4)).collect();
            let exc = Excursion {
                region: Arc::new(region.clone()),
                level: 0.0,
                bits: bits.clone(),
                source: dummy_provenance(),
            };
            let before = crossing_with(&exc, &query, &adj).unwrap();
            // flip a random 0 to 1: crossing can only appear, never vanish
            let zeros: Vec<usize> = (0..bits.len()).filter(|&i| !bits[i]).collect();
            if zeros.is_empty() {
                continue;
            }
            let mut bits2 = bits.clone();
            bits2[zeros[rng.gen_range(0..zeros.len())]] = true;
            let exc2 = Excursion {
                region: Arc::new(region.clone()),
                level: 0.0,
                bits: bits2,
                source: dummy_provenance(),
            };
            let after = crossing_with(&exc2, &query, &adj).unwrap();
            assert!(!before || after);
        }
    }

    #[test]
    fn component_sizes_sum_to_ones() {
        use rand::Rng;
        use rand::SeedableRng;
        let region = ball(&LatticePoint::origin(3), 2.0, Norm::Linf, 1000).unwrap();
        let adj = RegionAdjacency::build(&region);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        for _ in 0..20 {
            let bits: Vec<bool> = (0..region.len()).map(|_| rng.gen_bool(0.3)).collect();
            let exc = Excursion {
                region: Arc::new(region.clone()),
                level: 0.0,
                bits,
                source: dummy_provenance(),
            };
            let (_, sizes) = bit_components(&exc, &adj);
            assert_eq!(sizes.iter().sum::<usize>(), exc.ones());
        }
    }

    #[test]
    fn crn_sweep_is_exactly_monotone() {
        let eval = eval3();
        let h_list = [-2.0, -1.0, 0.0, 0.5, 1.0, 2.0];
        let est = mc_crossing_prob(&eval, Geometry::BoxToSphere { l: 1 }, &h_list, 400, 9).unwrap();
        for w in est.windows(2) {
            assert!(
                w[1].estimate.value <= w[0].estimate.value,
                "estimates not monotone: {} then {}",
                w[0].estimate.value,
                w[1].estimate.value
            );
        }
        // extreme levels
        let ext = mc_crossing_prob(
            &eval,
            Geometry::BoxToSphere { l: 1 },
            &[-1e9, 1e9],
            200,
            10,
        )
        .unwrap();
        assert_eq!(ext[0].estimate.value, 1.0);
        assert_eq!(ext[1].estimate.value, 0.0);
    }

    #[test]
    fn extreme_levels_cross_or_not() {
        let eval = eval3();
        // at h = -3 the estimate is essentially 1; at h = +3 essentially 0
        let est = mc_crossing_prob(
            &eval,
            Geometry::BoxToSphere { l: 2 },
            &[-3.0, 3.0],
            300,
            12,
        )
        .unwrap();
        assert!(est[0].estimate.value > 0.99);
        assert!(est[1].estimate.value < 0.05);
        // annulus crossing B(0,1) -> S(0,3) at a deeply negative level
        let ann = mc_crossing_prob(&eval, Geometry::Annulus { l: 1 }, &[-5.0], 300, 13).unwrap();
        assert!(ann[0].estimate.value > 0.99);
    }

    #[test]
    fn local_connectivity_decreases_in_dimension() {
        // fixed level and radius: higher dimension thins the excursion
        let h = 2.0;
        let e3 = local_connectivity(&eval3(), 3, h, 10_000, 61, 1.0).unwrap();
        let e4 = local_connectivity(
            &GreenEvaluator::quadrature(4).unwrap(),
            3,
            h,
            10_000,
            62,
            1.0,
        )
        .unwrap();
        assert!(
            e4.estimate.value < e3.estimate.value,
            "{} vs {}",
            e4.estimate.value,
            e3.estimate.value
        );
    }

    #[test]
    fn local_connectivity_degenerate_sphere() {
        let eval = eval3();
        let rep = local_connectivity(&eval, 0, 1.0, 4000, 31, 1.0).unwrap();
        let want = crate::gff::tail_density(&eval, 1.0).unwrap();
        assert!(
            (rep.estimate.value - want).abs() < 3.0 * rep.estimate.half_width.max(1e-3),
            "{} vs {want}",
            rep.estimate.value
        );
    }

    #[test]
    fn local_connectivity_crn_monotone_and_bound_shape() {
        let eval = eval3();
        let h_as0 = crate::gff::h_as(&eval, 0.0).unwrap();
        let a = local_connectivity(&eval, 4, 0.0, 400, 7, 1.0).unwrap();
        let b = local_connectivity(&eval, 4, h_as0, 400, 7, 1.0).unwrap();
        assert!(b.estimate.value < a.estimate.value);
        assert!(b.bound_shape.is_none()); // eps = 0 is not strictly positive
        let c = local_connectivity(&eval, 6, h_as0 * 1.5, 100, 7, 1.0).unwrap();
        assert!(c.eps_equivalent.is_some());
        assert!(c.n_equivalent >= 2.0);
        assert!(c.bound_shape.unwrap() < 1.0);
    }

    #[test]
    fn flip_identity_symmetric_geometry() {
        let eval = eval3();
        let rep = flip_identity_check(&eval, Geometry::BoxToSphere { l: 1 }, 0.0, 3000, 21).unwrap();
        assert!(
            rep.difference.abs() <= 3.0 * rep.joint_se,
            "difference {} vs 3se {}",
            rep.difference,
            3.0 * rep.joint_se
        );
        // degenerate full-space event: both probabilities 1
        let rep2 =
            flip_identity_check(&eval, Geometry::BoxToSphere { l: 1 }, -1e9, 50, 22).unwrap();
        assert_eq!(rep2.p_event.value, 1.0);
        assert_eq!(rep2.p_flipped.value, 1.0);
    }

    #[test]
    fn doublestar_bracket_semantics() {
        let eval = eval3();
        let grid = [-4.0, -1.0, 0.2, 1.2, 4.0];
        // threshold 1.0: the "strictly above" condition is unsatisfiable, so
        // h_lo defaults to the leftmost grid point
        let b = h_doublestar_proxy(&eval, &[1, 2], 1.0, &grid, 150, 41).unwrap();
        assert!(b.vacuous_lo);
        assert_eq!(b.h_lo, -4.0);
        // a real threshold resolves with grid endpoints and h_lo < h_hi
        let b2 = h_doublestar_proxy(&eval, &[1, 2], 0.1, &grid, 150, 42).unwrap();
        assert!(b2.resolved);
        assert!(b2.h_lo < b2.h_hi);
        assert!(grid.contains(&b2.h_lo) && grid.contains(&b2.h_hi));
    }

    #[test]
    fn star_proxy_sits_left_of_doublestar() {
        let eval = eval3();
        let grid: Vec<f64> = (-8..=10).map(|i| i as f64 * 0.25).collect();
        let star = h_star_proxy(&eval, &[2, 3], 0.5, &grid, 250, 51).unwrap();
        let double = h_doublestar_proxy(&eval, &[2, 3], 0.5, &grid, 250, 52).unwrap();
        assert!(star.resolved && double.resolved);
        // spanning is the harder event, so its bracket cannot sit right of
        // the crossing bracket
        assert!(star.h_lo <= double.h_hi + 1e-12);
        assert!(star.h_hi <= double.h_hi + 0.5 + 1e-12);
    }

    #[test]
    fn csv_schema() {
        let eval = eval3();
        let est = mc_crossing_prob(&eval, Geometry::BoxToSphere { l: 1 }, &[0.0], 50, 3).unwrap();
        let mut buf = Vec::new();
        write_estimates_csv(&mut buf, 3, &Geometry::BoxToSphere { l: 1 }, &est).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("d,geometry,scale,h,estimate,ci_half_width,replicas,seed\r\n"));
        assert_eq!(text.matches("\r\n").count(), 2);
    }
}
