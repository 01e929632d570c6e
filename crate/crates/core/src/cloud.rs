//! Point clouds in P^n: spatial indexing under the Fubini–Study metric,
//! cluster extraction, deduplication and Hausdorff comparisons.

use std::collections::HashMap;
use std::fmt::Write as _;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::projective::{hdot, ProjLine, ProjPoint};

/// Membership of a point in the layers `L0`, `L1`, `L2` of a Kulkarni limit set.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Layers {
    pub l0: bool,
    pub l1: bool,
    pub l2: bool,
}

impl Layers {
    pub const L0: Layers = Layers { l0: true, l1: false, l2: false };
    pub const L1: Layers = Layers { l0: false, l1: true, l2: false };
    pub const L2: Layers = Layers { l0: false, l1: false, l2: true };

    pub fn union(self, o: Layers) -> Layers {
        Layers { l0: self.l0 || o.l0, l1: self.l1 || o.l1, l2: self.l2 || o.l2 }
    }

    pub fn is_empty(&self) -> bool {
        !(self.l0 || self.l1 || self.l2)
    }

    pub fn label(&self) -> String {
        let mut parts = Vec::new();
        if self.l0 {
            parts.push("L0");
        }
        if self.l1 {
            parts.push("L1");
        }
        if self.l2 {
            parts.push("L2");
        }
        parts.join("|")
    }
}

/// A finite set of points of P^n with provenance.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PointCloud {
    pub dim: usize,
    pub points: Vec<ProjPoint>,
    /// Per-point layer tags; empty when the cloud is untagged.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tags: Vec<Layers>,
    /// Word length used to produce the cloud.
    pub depth: usize,
    /// Fubini–Study resolution of the cloud.
    pub tolerance: f64,
}

impl PointCloud {
    pub fn new(dim: usize, points: Vec<ProjPoint>, depth: usize, tolerance: f64) -> Result<Self> {
        if let Some(p) = points.iter().find(|p| p.dim() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, found: p.dim() });
        }
        Ok(PointCloud { dim, points, tags: Vec::new(), depth, tolerance })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Points carrying any of the requested layers.
    pub fn layer(&self, want: Layers) -> Vec<ProjPoint> {
        self.points
            .iter()
            .zip(&self.tags)
            .filter(|(_, t)| (t.l0 && want.l0) || (t.l1 && want.l1) || (t.l2 && want.l2))
            .map(|(p, _)| p.clone())
            .collect()
    }

    /// One row per point: real and imaginary parts of each homogeneous
    /// coordinate, then the layer label when tagged.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let cols: Vec<String> = (0..=self.dim).map(|i| format!("re{i},im{i}")).collect();
        out.push_str(&cols.join(","));
        if !self.tags.is_empty() {
            out.push_str(",layers");
        }
        out.push('\n');
        for (i, p) in self.points.iter().enumerate() {
            let row: Vec<String> = p.coords().iter().map(|z| format!("{:e},{:e}", z.re, z.im)).collect();
            out.push_str(&row.join(","));
            if let Some(t) = self.tags.get(i) {
                let _ = write!(out, ",{}", t.label());
            }
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| Error::Parse("empty CSV".into()))?;
        let ncols = header.split(',').count();
        let tagged = header.ends_with(",layers");
        let ncoord = (ncols - tagged as usize) / 2;
        if ncoord < 2 {
            return Err(Error::Parse("CSV needs at least two complex columns".into()));
        }
        let mut cloud = PointCloud { dim: ncoord - 1, ..Default::default() };
        for (n, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != ncols {
                return Err(Error::Parse(format!("row {} has {} fields, expected {ncols}", n + 2, fields.len())));
            }
            let num = |s: &str| s.trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad number '{s}'")));
            let coords = (0..ncoord)
                .map(|i| Ok(C64::new(num(fields[2 * i])?, num(fields[2 * i + 1])?)))
                .collect::<Result<Vec<_>>>()?;
            cloud.points.push(ProjPoint::new(coords)?);
            if tagged {
                let label = fields[ncols - 1];
                cloud.tags.push(Layers {
                    l0: label.contains("L0"),
                    l1: label.contains("L1"),
                    l2: label.contains("L2"),
                });
            }
        }
        Ok(cloud)
    }
}

/// Reference directions for the grid features. Any fixed generic unit
/// vectors work; `|<p, v>|` is 1-Lipschitz for the Fubini–Study metric.
fn probe(dim: usize, k: usize) -> Vec<C64> {
    let raw: Vec<C64> = (0..=dim)
        .map(|i| {
            let t = (i as f64 + 1.0) * (k as f64 + 1.3);
            C64::new((1.7 * t).sin() + 0.3 * k as f64, (2.3 * t + 0.5).cos())
        })
        .collect();
    let n: f64 = raw.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    raw.into_iter().map(|z| z / n).collect()
}

/// Uniform grid over three real features of a point. Points within
/// Fubini–Study distance `radius` always fall in adjacent cells.
pub struct SpatialIndex {
    probes: Vec<Vec<C64>>,
    offsets: Vec<Key>,
    cell: f64,
    radius: f64,
    cells: HashMap<Key, Vec<usize>>,
    points: Vec<ProjPoint>,
}

const FEATURES: usize = 3;

type Key = [i64; FEATURES];

/// `d(p, q) <= r` without the arctangent, given `tan_r = tan(r)`.
fn close(p: &ProjPoint, q: &ProjPoint, tan_r: f64) -> bool {
    if tan_r.is_infinite() {
        return true;
    }
    let h = hdot(p.coords(), q.coords());
    let perp: f64 = q.coords().iter().zip(p.coords()).map(|(b, a)| (b - h * a).norm_sqr()).sum();
    perp <= tan_r * tan_r * h.norm_sqr()
}

fn tan_of(r: f64) -> f64 {
    if r >= std::f64::consts::FRAC_PI_2 {
        f64::INFINITY
    } else {
        r.tan()
    }
}

/// All offsets in `{-reach..=reach}^3`, nearest first.
fn block(reach: i64) -> Vec<Key> {
    let mut out = vec![[0i64; FEATURES]];
    for axis in 0..FEATURES {
        out = out
            .into_iter()
            .flat_map(|k| {
                (-reach..=reach).map(move |o| {
                    let mut k = k;
                    k[axis] = o;
                    k
                })
            })
            .collect();
    }
    out.sort_by_key(|k| k.iter().map(|x| x.abs()).sum::<i64>());
    out
}

impl SpatialIndex {
    pub fn new(dim: usize, radius: f64) -> Self {
        let radius = radius.max(1e-12);
        SpatialIndex {
            probes: (0..FEATURES).map(|k| probe(dim, k)).collect(),
            offsets: block(1),
            cell: radius,
            radius,
            cells: HashMap::new(),
            points: Vec::new(),
        }
    }

    pub fn build(points: &[ProjPoint], radius: f64) -> Self {
        let dim = points.first().map_or(2, |p| p.dim());
        let mut idx = Self::new(dim, radius);
        for p in points {
            idx.insert(p.clone());
        }
        idx
    }

    fn key(&self, p: &ProjPoint) -> Key {
        let mut k = [0i64; FEATURES];
        for (slot, q) in k.iter_mut().zip(&self.probes) {
            *slot = (hdot(q, p.coords()).norm() / self.cell).floor() as i64;
        }
        k
    }

    pub fn insert(&mut self, p: ProjPoint) -> usize {
        let id = self.points.len();
        let k = self.key(&p);
        self.cells.entry(k).or_default().push(id);
        self.points.push(p);
        id
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[ProjPoint] {
        &self.points
    }

    fn scan_offsets(&self, p: &ProjPoint, offsets: &[Key], mut f: impl FnMut(usize) -> bool) {
        let k = self.key(p);
        for o in offsets {
            let mut c = k;
            for (x, d) in c.iter_mut().zip(o) {
                *x += d;
            }
            if let Some(ids) = self.cells.get(&c) {
                for &i in ids {
                    if !f(i) {
                        return;
                    }
                }
            }
        }
    }

    fn scan(&self, p: &ProjPoint, f: impl FnMut(usize) -> bool) {
        self.scan_offsets(p, &self.offsets, f)
    }

    /// Indices of stored points within `r <= radius` of `p`.
    pub fn within(&self, p: &ProjPoint, r: f64) -> Vec<usize> {
        let mut out = Vec::new();
        let t = tan_of(r);
        self.scan(p, |i| {
            if close(&self.points[i], p, t) {
                out.push(i);
            }
            true
        });
        out.sort_unstable();
        out
    }

    /// Counts stored points within `r`, stopping once `cap` are found.
    pub fn count_within(&self, p: &ProjPoint, r: f64, cap: usize) -> usize {
        let mut n = 0;
        let t = tan_of(r);
        self.scan(p, |i| {
            if close(&self.points[i], p, t) {
                n += 1;
            }
            n < cap
        });
        n
    }

    /// Some stored point within `r <= radius` of `p`, if any.
    pub fn first_within(&self, p: &ProjPoint, r: f64) -> Option<usize> {
        let mut hit = None;
        let t = tan_of(r);
        self.scan(p, |i| {
            if close(&self.points[i], p, t) {
                hit = Some(i);
            }
            hit.is_none()
        });
        hit
    }

    pub fn any_within(&self, p: &ProjPoint, r: f64) -> bool {
        self.count_within(p, r, 1) > 0
    }

    /// Distance from `p` to the nearest stored point (`inf` when empty).
    pub fn nearest_distance(&self, p: &ProjPoint) -> f64 {
        if self.points.is_empty() {
            return f64::INFINITY;
        }
        let brute = || self.points.iter().map(|q| q.distance(p)).fold(f64::INFINITY, f64::min);
        let mut reach = 1i64;
        loop {
            // Past this block size a linear scan is cheaper.
            if (2 * reach + 1).pow(FEATURES as u32) as usize > 4 * self.points.len() + 27 {
                return brute();
            }
            let mut best = f64::INFINITY;
            let wide;
            let offsets = if reach == 1 {
                &self.offsets
            } else {
                wide = block(reach);
                &wide
            };
            self.scan_offsets(p, offsets, |i| {
                best = best.min(self.points[i].distance(p));
                true
            });
            // Anything outside the scanned block is at least `reach * cell` away.
            if best <= reach as f64 * self.cell || reach as f64 * self.cell > 2.0 {
                if best.is_finite() {
                    return best;
                }
                return brute();
            }
            reach *= 2;
        }
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }
}

/// Greedy `tol`-net: keeps a point unless an earlier kept point is within `tol`.
pub fn dedup_points(points: &[ProjPoint], tol: f64) -> Vec<ProjPoint> {
    let mut idx = SpatialIndex::new(points.first().map_or(2, |p| p.dim()), tol);
    for p in points {
        if !idx.any_within(p, tol) {
            idx.insert(p.clone());
        }
    }
    idx.points
}

/// Parameters of the finite-depth cluster-point rule: a candidate is a
/// cluster point when at least `k` candidates (itself included) lie within
/// Fubini–Study distance `eps`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusterParams {
    pub eps: f64,
    pub k: usize,
}

impl Default for ClusterParams {
    fn default() -> Self {
        ClusterParams { eps: 1e-2, k: 10 }
    }
}

/// A candidate orbit point together with the word length that produced it.
#[derive(Clone, Debug)]
pub struct Candidate {
    pub point: ProjPoint,
    pub depth: usize,
}

/// Cluster points of a candidate set. Every dense candidate proposes the
/// deepest candidate within `eps` of it; proposals are then reduced to an
/// `eps`-net, deepest first.
pub fn cluster_points(cands: &[Candidate], params: ClusterParams) -> Vec<ProjPoint> {
    if cands.is_empty() {
        return Vec::new();
    }
    let pts: Vec<ProjPoint> = cands.iter().map(|c| c.point.clone()).collect();
    let idx = SpatialIndex::build(&pts, params.eps);
    let mut reps: Vec<usize> = (0..cands.len())
        .filter_map(|i| {
            let near = idx.within(&pts[i], params.eps);
            (near.len() >= params.k).then(|| {
                near.into_iter().max_by(|&a, &b| cands[a].depth.cmp(&cands[b].depth).then(b.cmp(&a))).unwrap_or(i)
            })
        })
        .collect();
    reps.sort_by(|&a, &b| cands[b].depth.cmp(&cands[a].depth).then(a.cmp(&b)));
    reps.dedup();
    let ordered: Vec<ProjPoint> = reps.into_iter().map(|i| pts[i].clone()).collect();
    dedup_points(&ordered, params.eps)
}

/// `max_{a in A} min_{b in B} d(a, b)`.
pub fn directed_hausdorff(a: &[ProjPoint], b: &SpatialIndex) -> f64 {
    a.iter().map(|p| b.nearest_distance(p)).fold(0.0, f64::max)
}

pub fn hausdorff(a: &[ProjPoint], b: &[ProjPoint]) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 0.0;
    }
    if a.is_empty() || b.is_empty() {
        return f64::INFINITY;
    }
    let r = 1e-2;
    let ia = SpatialIndex::build(a, r);
    let ib = SpatialIndex::build(b, r);
    directed_hausdorff(a, &ib).max(directed_hausdorff(b, &ia))
}

/// A closed set given as finitely many points and lines.
#[derive(Clone, Debug, Default)]
pub struct PointsAndLines {
    pub points: Vec<ProjPoint>,
    pub lines: Vec<ProjLine>,
}

impl PointsAndLines {
    pub fn distance(&self, p: &ProjPoint) -> f64 {
        let a = self.points.iter().map(|q| q.distance(p)).fold(f64::INFINITY, f64::min);
        let b = self.lines.iter().map(|l| l.distance(p)).fold(f64::INFINITY, f64::min);
        a.min(b)
    }

    /// Finite sample: the points and `per_line` points on each line.
    pub fn sample(&self, per_line: usize) -> Vec<ProjPoint> {
        let mut out = self.points.clone();
        for l in &self.lines {
            out.extend(l.sample(per_line));
        }
        out
    }
}

/// Hausdorff distance between a cloud and a points-and-lines set, sampling
/// `per_line` points on every line for the reverse direction.
pub fn hausdorff_to_set(cloud: &[ProjPoint], set: &PointsAndLines, per_line: usize) -> f64 {
    let empty_set = set.points.is_empty() && set.lines.is_empty();
    match (cloud.is_empty(), empty_set) {
        (true, true) => return 0.0,
        (true, false) | (false, true) => return f64::INFINITY,
        _ => {}
    }
    let forward = cloud.iter().map(|p| set.distance(p)).fold(0.0, f64::max);
    let idx = SpatialIndex::build(cloud, 1e-2);
    let backward = directed_hausdorff(&set.sample(per_line), &idx);
    forward.max(backward)
}
