//! Geometry of Z^d: points, norms, balls, spheres, boundaries and
//! connected components of finite vertex sets.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::unionfind::UnionFind;

/// Default cap on enumerated region cardinality. Guards against accidental
/// exponential blowups like `ball(d=30, r=4, L1)`.
pub const DEFAULT_REGION_CAP: usize = 2_000_000;

/// Point of Z^d with explicit dimension (the length of `coords`).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LatticePoint {
    coords: Vec<i64>,
}

impl LatticePoint {
    pub fn new(coords: Vec<i64>) -> LatticePoint {
        assert!(!coords.is_empty(), "dimension must be >= 1");
        LatticePoint { coords }
    }

    pub fn origin(d: usize) -> LatticePoint {
        LatticePoint::new(vec![0; d])
    }

    /// The canonical unit vector e_i (0-based index).
    pub fn unit(d: usize, i: usize) -> LatticePoint {
        assert!(i < d);
        let mut coords = vec![0; d];
        coords[i] = 1;
        LatticePoint::new(coords)
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[i64] {
        &self.coords
    }

    pub fn coord(&self, i: usize) -> i64 {
        self.coords[i]
    }

    fn check_dim(&self, other: &LatticePoint) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                left: self.dim(),
                right: other.dim(),
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &LatticePoint) -> Result<LatticePoint> {
        self.check_dim(other)?;
        Ok(LatticePoint::new(
            self.coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a + b)
                .collect(),
        ))
    }

    pub fn sub(&self, other: &LatticePoint) -> Result<LatticePoint> {
        self.check_dim(other)?;
        Ok(LatticePoint::new(
            self.coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a - b)
                .collect(),
        ))
    }

    pub fn scale(&self, k: i64) -> LatticePoint {
        LatticePoint::new(self.coords.iter().map(|a| a * k).collect())
    }

    pub fn l1(&self) -> i64 {
        self.coords.iter().map(|c| c.abs()).sum()
    }

    pub fn l2_sq(&self) -> i128 {
        self.coords.iter().map(|&c| (c as i128) * (c as i128)).sum()
    }

    pub fn linf(&self) -> i64 {
        self.coords.iter().map(|c| c.abs()).max().unwrap()
    }

    pub fn norm(&self, kind: Norm) -> f64 {
        match kind {
            Norm::L1 => self.l1() as f64,
            Norm::L2 => (self.l2_sq() as f64).sqrt(),
            Norm::Linf => self.linf() as f64,
        }
    }

    /// Neighbors of the point in the usual nearest-neighbor graph (2d of them).
    pub fn neighbors(&self) -> Vec<LatticePoint> {
        let d = self.dim();
        let mut out = Vec::with_capacity(2 * d);
        for i in 0..d {
            for s in [-1i64, 1] {
                let mut c = self.coords.clone();
                c[i] += s;
                out.push(LatticePoint::new(c));
            }
        }
        out
    }
}

impl fmt::Display for LatticePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Norm {
    L1,
    L2,
    Linf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Adjacency {
    /// |x - y|_1 = 1
    Nearest,
    /// |x - y|_inf = 1 (*-nearest neighbors)
    Star,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryKind {
    /// Points of K with a nearest neighbor outside K.
    Interior,
    /// Points outside K with a nearest neighbor in K.
    Outer,
}

/// Finite ordered duplicate-free set of lattice points, all of one dimension,
/// with an index map back from point to position.
#[derive(Debug, Clone)]
pub struct Region {
    points: Vec<LatticePoint>,
    index: HashMap<LatticePoint, usize>,
    d: usize,
}

impl Region {
    /// Build from a list of points, sorting into lexicographic order and
    /// rejecting duplicates and mixed dimensions.
    pub fn from_points(mut points: Vec<LatticePoint>) -> Result<Region> {
        if points.is_empty() {
            return Err(Error::InvalidArgument("empty region".into()));
        }
        points.sort();
        Region::from_sorted(points)
    }

    /// Build keeping the caller's ordering (used where an enumeration order
    /// carries meaning, e.g. hierarchical tree orderings).
    pub fn from_points_ordered(points: Vec<LatticePoint>) -> Result<Region> {
        if points.is_empty() {
            return Err(Error::InvalidArgument("empty region".into()));
        }
        let d = points[0].dim();
        let mut index = HashMap::with_capacity(points.len());
        for (i, p) in points.iter().enumerate() {
            if p.dim() != d {
                return Err(Error::DimensionMismatch {
                    left: d,
                    right: p.dim(),
                });
            }
            if index.insert(p.clone(), i).is_some() {
                return Err(Error::InvalidArgument(format!("duplicate point {p}")));
            }
        }
        Ok(Region { points, index, d })
    }

    fn from_sorted(points: Vec<LatticePoint>) -> Result<Region> {
        Region::from_points_ordered(points)
    }

    pub fn singleton(p: LatticePoint) -> Region {
        Region::from_points(vec![p]).unwrap()
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[LatticePoint] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &LatticePoint {
        &self.points[i]
    }

    pub fn contains(&self, p: &LatticePoint) -> bool {
        self.index.contains_key(p)
    }

    pub fn position(&self, p: &LatticePoint) -> Option<usize> {
        self.index.get(p).copied()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, LatticePoint> {
        self.points.iter()
    }

    /// True if every point of `self` lies in `other`.
    pub fn subset_of(&self, other: &Region) -> bool {
        self.points.iter().all(|p| other.contains(p))
    }

    /// Union, re-sorted lexicographically.
    pub fn union(&self, other: &Region) -> Result<Region> {
        if self.d != other.d {
            return Err(Error::DimensionMismatch {
                left: self.d,
                right: other.d,
            });
        }
        let mut pts = self.points.clone();
        pts.extend(other.points.iter().cloned());
        pts.sort();
        pts.dedup();
        Region::from_sorted(pts)
    }

    pub fn intersect(&self, other: &Region) -> Result<Region> {
        if self.d != other.d {
            return Err(Error::DimensionMismatch {
                left: self.d,
                right: other.d,
            });
        }
        let pts: Vec<_> = self
            .points
            .iter()
            .filter(|p| other.contains(p))
            .cloned()
            .collect();
        if pts.is_empty() {
            return Err(Error::InvalidArgument("empty intersection".into()));
        }
        Region::from_sorted(pts)
    }

    /// Minkowski sum K + K', capped.
    pub fn minkowski_sum(&self, other: &Region, cap: usize) -> Result<Region> {
        if self.d != other.d {
            return Err(Error::DimensionMismatch {
                left: self.d,
                right: other.d,
            });
        }
        let mut pts = Vec::new();
        let mut seen = HashMap::new();
        for a in &self.points {
            for b in &other.points {
                let s = a.add(b)?;
                if seen.insert(s.clone(), ()).is_none() {
                    pts.push(s);
                    if pts.len() > cap {
                        return Err(Error::CapExceeded {
                            requested: pts.len(),
                            cap,
                        });
                    }
                }
            }
        }
        pts.sort();
        Region::from_sorted(pts)
    }

    pub fn translate(&self, v: &LatticePoint) -> Result<Region> {
        let pts = self
            .points
            .iter()
            .map(|p| p.add(v))
            .collect::<Result<Vec<_>>>()?;
        Region::from_points_ordered(pts)
    }
}

/// Closed l^p ball {y : |y - center|_p <= r}, enumerated in lexicographic
/// order. Fails if the cardinality would exceed `cap`.
pub fn ball(center: &LatticePoint, r: f64, kind: Norm, cap: usize) -> Result<Region> {
    if r < 0.0 {
        return Err(Error::InvalidArgument("negative radius".into()));
    }
    let pts = enumerate_ball(center, r, kind, cap, false)?;
    Region::from_sorted(pts)
}

/// l^p sphere {y : |y - center|_p = r}.
pub fn sphere(center: &LatticePoint, r: f64, kind: Norm, cap: usize) -> Result<Region> {
    if r < 0.0 {
        return Err(Error::InvalidArgument("negative radius".into()));
    }
    let pts = enumerate_ball(center, r, kind, cap, true)?;
    if pts.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "empty sphere of radius {r}"
        )));
    }
    Region::from_sorted(pts)
}

fn enumerate_ball(
    center: &LatticePoint,
    r: f64,
    kind: Norm,
    cap: usize,
    shell_only: bool,
) -> Result<Vec<LatticePoint>> {
    let d = center.dim();
    let ri = r.floor() as i64;
    let mut out = Vec::new();
    let mut cur = vec![0i64; d];
    // depth-first over coordinates, ascending, so output is lexicographic
    fn rec(
        depth: usize,
        d: usize,
        ri: i64,
        r: f64,
        kind: Norm,
        shell_only: bool,
        cur: &mut Vec<i64>,
        center: &[i64],
        out: &mut Vec<LatticePoint>,
        cap: usize,
    ) -> Result<()> {
        if depth == d {
            let keep = match kind {
                Norm::L1 => {
                    let s: i64 = cur.iter().map(|c| c.abs()).sum();
                    if shell_only {
                        (s as f64 - r).abs() < 1e-9
                    } else {
                        (s as f64) <= r + 1e-9
                    }
                }
                Norm::Linf => {
                    let m = cur.iter().map(|c| c.abs()).max().unwrap();
                    if shell_only {
                        (m as f64 - r).abs() < 1e-9
                    } else {
                        (m as f64) <= r + 1e-9
                    }
                }
                Norm::L2 => {
                    let s: i128 = cur.iter().map(|&c| (c as i128) * (c as i128)).sum();
                    let rr = r * r;
                    if shell_only {
                        ((s as f64) - rr).abs() < 1e-6
                    } else {
                        (s as f64) <= rr + 1e-6
                    }
                }
            };
            if keep {
                let p: Vec<i64> = cur.iter().zip(center).map(|(c, z)| c + z).collect();
                out.push(LatticePoint::new(p));
                if out.len() > cap {
                    return Err(Error::CapExceeded {
                        requested: out.len(),
                        cap,
                    });
                }
            }
            return Ok(());
        }
        // prune: remaining budget in the chosen norm
        let used: i64 = match kind {
            Norm::L1 => cur[..depth].iter().map(|c| c.abs()).sum(),
            _ => 0,
        };
        let lim = match kind {
            Norm::L1 => ri - used,
            _ => ri,
        };
        if lim < 0 {
            return Ok(());
        }
        for v in -lim..=lim {
            cur[depth] = v;
            rec(depth + 1, d, ri, r, kind, shell_only, cur, center, out, cap)?;
        }
        cur[depth] = 0;
        Ok(())
    }
    rec(
        0,
        d,
        ri,
        r,
        kind,
        shell_only,
        &mut cur,
        center.coords(),
        &mut out,
        cap,
    )?;
    Ok(out)
}

/// Interior or outer l^1 boundary of a finite set.
pub fn boundary(k: &Region, kind: BoundaryKind) -> Result<Region> {
    let mut pts = Vec::new();
    match kind {
        BoundaryKind::Interior => {
            for p in k.iter() {
                if p.neighbors().iter().any(|q| !k.contains(q)) {
                    pts.push(p.clone());
                }
            }
        }
        BoundaryKind::Outer => {
            let mut seen = HashMap::new();
            for p in k.iter() {
                for q in p.neighbors() {
                    if !k.contains(&q) && seen.insert(q.clone(), ()).is_none() {
                        pts.push(q);
                    }
                }
            }
        }
    }
    if pts.is_empty() {
        return Err(Error::InvalidArgument(
            "boundary is empty (set covers no frontier)".into(),
        ));
    }
    pts.sort();
    Region::from_sorted(pts)
}

/// K together with its outer boundary.
pub fn closure(k: &Region) -> Result<Region> {
    let outer = boundary(k, BoundaryKind::Outer)?;
    k.union(&outer)
}

/// closure(K) intersected with K'.
pub fn relative_closure(k: &Region, within: &Region) -> Result<Region> {
    closure(k)?.intersect(within)
}

/// Connected-component labeling of a region under the chosen adjacency.
#[derive(Debug, Clone)]
pub struct ComponentLabeling {
    /// Component id per point (ids are 0..num_components, in order of first
    /// appearance along the region ordering).
    pub labels: Vec<usize>,
    /// Component sizes, indexed by id.
    pub sizes: Vec<usize>,
}

impl ComponentLabeling {
    pub fn num_components(&self) -> usize {
        self.sizes.len()
    }

    /// Point indices of each component.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.sizes.len()];
        for (i, &l) in self.labels.iter().enumerate() {
            out[l].push(i);
        }
        out
    }
}

pub fn components(k: &Region, adjacency: Adjacency) -> ComponentLabeling {
    let n = k.len();
    let mut uf = UnionFind::new(n);
    match adjacency {
        Adjacency::Nearest => {
            for (i, p) in k.iter().enumerate() {
                for q in p.neighbors() {
                    if let Some(j) = k.position(&q) {
                        uf.union(i, j);
                    }
                }
            }
        }
        Adjacency::Star => {
            let d = k.dim();
            // offset enumeration is 3^d - 1; fall back to pairwise scan when
            // that dwarfs the pair count
            let offsets_feasible = d <= 12 && 3usize.pow(d as u32) <= 8 * n * n + 64;
            if offsets_feasible {
                let mut offs = Vec::new();
                let mut cur = vec![0i64; d];
                gen_star_offsets(0, d, &mut cur, &mut offs);
                for (i, p) in k.iter().enumerate() {
                    for off in &offs {
                        let q = p.add(off).unwrap();
                        if let Some(j) = k.position(&q) {
                            uf.union(i, j);
                        }
                    }
                }
            } else {
                for i in 0..n {
                    for j in (i + 1)..n {
                        let diff = k.point(i).sub(k.point(j)).unwrap();
                        if diff.linf() == 1 {
                            uf.union(i, j);
                        }
                    }
                }
            }
        }
    }
    let mut labels = vec![usize::MAX; n];
    let mut sizes = Vec::new();
    let mut id_of_root: HashMap<usize, usize> = HashMap::new();
    for i in 0..n {
        let r = uf.find(i);
        let id = *id_of_root.entry(r).or_insert_with(|| {
            sizes.push(0);
            sizes.len() - 1
        });
        labels[i] = id;
        sizes[id] += 1;
    }
    ComponentLabeling { labels, sizes }
}

fn gen_star_offsets(depth: usize, d: usize, cur: &mut Vec<i64>, out: &mut Vec<LatticePoint>) {
    if depth == d {
        if cur.iter().any(|&c| c != 0) {
            out.push(LatticePoint::new(cur.clone()));
        }
        return;
    }
    for v in [-1i64, 0, 1] {
        cur[depth] = v;
        gen_star_offsets(depth + 1, d, cur, out);
    }
    cur[depth] = 0;
}

/// |S_1(0, n)| in dimension d, exact (used as a cross-check against the
/// e^{n+2d} cardinality bound).
pub fn l1_sphere_cardinality(d: usize, n: u64) -> u128 {
    // number of x in Z^d with sum |x_i| = n: sum_j 2^j C(d,j) C(n-1, j-1)
    if n == 0 {
        return 1;
    }
    let mut total: u128 = 0;
    for j in 1..=d.min(n as usize) {
        let c1 = binomial_u128(d as u64, j as u64);
        let c2 = binomial_u128(n - 1, (j - 1) as u64);
        total += (1u128 << j) * c1 * c2;
    }
    total
}

fn binomial_u128(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut num: u128 = 1;
    for i in 0..k {
        num = num * ((n - i) as u128) / ((i + 1) as u128);
    }
    num
}
