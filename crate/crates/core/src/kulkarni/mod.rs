//! Kulkarni limit sets `L0 ∪ L1 ∪ L2`: a numerical approximation for any
//! finitely generated group, closed forms for several families, and line
//! counting on closed-form sets.

mod closed;
mod families;

pub use closed::{
    closed_form_cyclic_diag, concurrent, count_lines, max_general_position, suspension, ClosedFormLimitSet, Count,
    LineCount, Suspension, Tagged, CONCURRENCY_TOL, MAX_LINES,
};
pub use families::{
    inoue_family, orbit_sign_check, toral_family, InoueFamily, InoueOmega, SignCheck, ToralFamily, ToralOmega,
};

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cloud::{cluster_points, dedup_points, Candidate, ClusterParams, Layers, PointCloud, SpatialIndex};
use crate::error::{Error, Result};
use crate::group::{enumerate_group_limited, GeneratorSet, GroupElement, DEFAULT_ELEMENT_LIMIT};
use crate::projective::{ProjLine, ProjMap, ProjPoint};
use crate::schottky::random_vec;

/// Seeds closer than this to the `L0` approximation are not used for `L1`.
pub const SEED_CLEARANCE: f64 = 1e-2;
/// Elements with a larger condition number have numerically meaningless
/// small eigenvalues and are left out of `L0`.
pub const EIGEN_CONDITION_MAX: f64 = 1e12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KulkarniParams {
    /// Maximal word length of the enumerated group elements.
    pub depth: usize,
    /// Number of random seeds for `L1` and of random points for the `L2` net.
    pub grid: usize,
    pub eps: f64,
    /// Cluster multiplicity.
    pub k: usize,
    /// Outermost compact shell `{d(p, L0 ∪ L1) >= 1/m_max}`.
    pub m_max: usize,
    /// Words whose projective order is not detected up to this bound count
    /// as infinite order.
    pub order_bound: u64,
    pub seed: u64,
    /// Targets per singular line for the `L2` preimage sampling; derived from
    /// `eps` when absent.
    pub l2_targets: Option<usize>,
    /// Number of deep elements used for `L2` (at most 128).
    pub l2_elements: usize,
    pub element_limit: usize,
}

impl Default for KulkarniParams {
    fn default() -> Self {
        KulkarniParams {
            depth: 20,
            grid: 1000,
            eps: 1e-2,
            k: 10,
            m_max: 5,
            order_bound: 1000,
            seed: 0,
            l2_targets: None,
            l2_elements: 32,
            element_limit: DEFAULT_ELEMENT_LIMIT,
        }
    }
}

impl KulkarniParams {
    fn check(&self) -> Result<()> {
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(Error::InvalidConfig(format!("eps must lie in (0, 1), got {}", self.eps)));
        }
        if self.k == 0 || self.m_max == 0 || self.order_bound == 0 {
            return Err(Error::InvalidConfig("k, m_max and order_bound must be positive".into()));
        }
        if self.l2_elements == 0 || self.l2_elements > 128 {
            return Err(Error::InvalidConfig("l2_elements must lie in 1..=128".into()));
        }
        Ok(())
    }

    /// Points needed on a projective line for an `eps/2`-dense sample.
    fn line_samples(&self) -> usize {
        (2.0 * PI / (self.eps * self.eps)).ceil() as usize
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitSetApprox {
    /// Tagged points; a point found in several layers carries all their tags.
    pub cloud: PointCloud,
    pub params: KulkarniParams,
    /// Number of distinct group elements enumerated.
    pub elements: usize,
    /// The enumeration closed up before reaching `depth`.
    pub finite: bool,
    pub warnings: Vec<String>,
}

impl LimitSetApprox {
    pub fn layer(&self, l: Layers) -> Vec<ProjPoint> {
        self.cloud.layer(l)
    }
}

/// Projective order of a map as detected from its spectrum.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Order {
    Finite(u64),
    Infinite,
    /// Unit-modulus diagonalizable spectrum with no period up to the bound.
    Unresolved,
}

/// Projective order of `g`: infinite when the eigenvalue moduli differ or `g`
/// is not diagonalizable, otherwise the least `k <= bound` with all
/// eigenvalue ratios `k`-th roots of unity.
pub fn probe_order(g: &ProjMap, bound: u64) -> Order {
    let fp = g.fixed_points();
    if fp.defective {
        return Order::Infinite;
    }
    let eig = g.eigenvalues();
    let max = eig.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let min = eig.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min);
    if max > min * (1.0 + 1e-9) {
        return Order::Infinite;
    }
    let angles: Vec<f64> = eig.iter().skip(1).map(|z| (z / eig[0]).arg()).collect();
    for k in 1..=bound {
        let periodic = angles.iter().all(|t| {
            let x = t * k as f64 / (2.0 * PI);
            (x - x.round()).abs() < 1e-9 * k as f64
        });
        if periodic {
            return Order::Finite(k);
        }
    }
    Order::Unresolved
}

/// Orthonormal bases of subspaces already sampled.
struct SubspaceSet(Vec<Vec<Vec<C64>>>);

impl SubspaceSet {
    fn contains(&self, basis: &[ProjPoint]) -> bool {
        self.0.iter().any(|known| {
            known.len() == basis.len()
                && basis.iter().all(|b| {
                    let v = b.coords();
                    let proj: f64 = known.iter().map(|k| crate::projective::hdot(k, v).norm_sqr()).sum();
                    (1.0 - proj).abs() < 1e-12
                })
        })
    }
}

fn sample_subspace(basis: &[ProjPoint], n: usize, rng: &mut ChaCha8Rng) -> Vec<ProjPoint> {
    if basis.len() == 2 {
        if let Ok(l) = ProjLine::through(&basis[0], &basis[1]) {
            return l.sample(n);
        }
    }
    let mut out = basis.to_vec();
    for _ in 0..n * basis.len() {
        let w = random_vec(rng, basis.len());
        let mut v = vec![C64::new(0.0, 0.0); basis[0].coords().len()];
        for (wi, b) in w.iter().zip(basis) {
            for (vj, bj) in v.iter_mut().zip(b.coords()) {
                *vj += wi * bj;
            }
        }
        if let Ok(p) = ProjPoint::new(v) {
            out.push(p);
        }
    }
    out
}

/// Approximates the Kulkarni limit set of the group generated by `gens`
/// from the elements of word length at most `params.depth`.
pub fn approx_kulkarni(gens: &GeneratorSet, params: &KulkarniParams) -> Result<LimitSetApprox> {
    params.check()?;
    let dim = gens.dim;
    if !(1..=3).contains(&dim) {
        return Err(Error::UnsupportedDimension(dim));
    }
    let elements = enumerate_group_limited(gens, params.depth, params.element_limit)?;
    let finite = elements.iter().all(|e| e.word.len() < params.depth) || gens.generators.is_empty();
    let mut out = LimitSetApprox {
        cloud: PointCloud { dim, depth: params.depth, tolerance: params.eps, ..Default::default() },
        params: params.clone(),
        elements: elements.len(),
        finite,
        warnings: Vec::new(),
    };
    if finite {
        return Ok(out);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);

    let l0 = layer0(&elements, params, &mut rng, &mut out.warnings);
    let l0_index = SpatialIndex::build(&l0, SEED_CLEARANCE);
    let min_len = params.depth.div_ceil(2).max(1);
    let deep: Vec<&GroupElement> = elements.iter().filter(|e| e.word.len() >= min_len).collect();

    let mut seeds = Vec::with_capacity(params.grid);
    let mut attempts = 0;
    while seeds.len() < params.grid && attempts < 20 * params.grid.max(1) {
        attempts += 1;
        let p = ProjPoint::new(random_vec(&mut rng, dim + 1))?;
        if !l0_index.any_within(&p, SEED_CLEARANCE) {
            seeds.push(p);
        }
    }
    let cluster = ClusterParams { eps: params.eps, k: params.k };
    let per_seed: Vec<Vec<ProjPoint>> = seeds
        .par_iter()
        .map(|x| {
            let cands: Vec<Candidate> = deep
                .iter()
                .filter_map(|e| e.map.apply(x).ok().map(|point| Candidate { point, depth: e.word.len() }))
                .collect();
            cluster_points(&cands, cluster)
        })
        .collect();
    let l1 = dedup_points(&per_seed.concat(), params.eps / 4.0);

    let l2 = layer2(&deep, &l0, &l1, params, &mut rng)?;

    let mut merged = SpatialIndex::new(dim, 1e-9);
    let mut tags: Vec<Layers> = Vec::new();
    for (pts, tag) in [(&l0, Layers::L0), (&l1, Layers::L1), (&l2, Layers::L2)] {
        for p in pts.iter() {
            match merged.first_within(p, 1e-9) {
                Some(i) => tags[i] = tags[i].union(tag),
                None => {
                    merged.insert(p.clone());
                    tags.push(tag);
                }
            }
        }
    }
    out.cloud.points = merged.points().to_vec();
    out.cloud.tags = tags;
    Ok(out)
}

fn layer0(
    elements: &[GroupElement],
    params: &KulkarniParams,
    rng: &mut ChaCha8Rng,
    warnings: &mut Vec<String>,
) -> Vec<ProjPoint> {
    let mut seen = SubspaceSet(Vec::new());
    let mut pts = Vec::new();
    let mut unresolved = 0usize;
    let mut skipped = 0usize;
    for e in elements.iter().skip(1) {
        let sv = e.map.matrix().singular_values();
        if sv.max() > EIGEN_CONDITION_MAX * sv.min() {
            skipped += 1;
            continue;
        }
        match probe_order(&e.map, params.order_bound) {
            Order::Finite(_) => continue,
            Order::Unresolved => unresolved += 1,
            Order::Infinite => {}
        }
        for s in e.map.fixed_points().spaces {
            if seen.contains(&s.basis) {
                continue;
            }
            if s.basis.len() == 1 {
                pts.push(s.basis[0].clone());
            } else {
                pts.extend(sample_subspace(&s.basis, params.line_samples(), rng));
            }
            seen.0.push(s.basis.iter().map(|b| b.coords().to_vec()).collect());
        }
    }
    if unresolved > 0 {
        warnings.push(format!(
            "order probe bound {} reached for {unresolved} element(s); treated as infinite order",
            params.order_bound
        ));
    }
    if skipped > 0 {
        warnings.push(format!(
            "{skipped} element(s) with condition number above {EIGEN_CONDITION_MAX:e} not used for L0 fixed points"
        ));
    }
    dedup_points(&pts, 1e-9)
}

/// Vote counter over an `eps/2`-net: each representative remembers which
/// elements sent a candidate into it.
struct VoteNet {
    index: SpatialIndex,
    masks: Vec<u128>,
    radius: f64,
}

impl VoteNet {
    fn vote(&mut self, p: ProjPoint, bit: u128) {
        match self.index.first_within(&p, self.radius) {
            Some(i) => self.masks[i] |= bit,
            None => {
                self.index.insert(p);
                self.masks.push(bit);
            }
        }
    }
}

fn targets(n: usize) -> Vec<(C64, C64)> {
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|t| {
            let z = 1.0 - 2.0 * (t as f64 + 0.5) / n as f64;
            let half = z.clamp(-1.0, 1.0).acos() / 2.0;
            (C64::new(half.cos(), 0.0), C64::from_polar(half.sin(), golden * t as f64))
        })
        .collect()
}

/// Candidate images `g(p)`, `p` in the shell `K`: exact preimages of targets
/// on every line spanned by two left singular vectors, pushed off the
/// singular directions along the weaker ones.
fn svd_candidates(g: &ProjMap, grid: &[(C64, C64)], in_k: &dyn Fn(&ProjPoint) -> bool) -> Vec<ProjPoint> {
    let m: &DMatrix<C64> = g.matrix();
    let n = m.nrows();
    let svd = m.clone().svd(false, true);
    let Some(vt) = svd.v_t else { return Vec::new() };
    let sigma = svd.singular_values;
    let v = |i: usize| -> Vec<C64> { (0..n).map(|c| vt[(i, c)].conj()).collect() };
    let mut out = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let (vi, vj) = (v(i), v(j));
            let tail: Vec<Vec<C64>> = (j + 1..n).map(v).collect();
            for (t, &(ci, cj)) in grid.iter().enumerate() {
                let (ai, aj) = (ci / sigma[i], cj / sigma[j]);
                let scale = ai.norm().max(aj.norm());
                let mut p: Vec<C64> = vi.iter().zip(&vj).map(|(x, y)| ai * x + aj * y).collect();
                for (k, vk) in tail.iter().enumerate() {
                    let rho = C64::from_polar(scale * (0.6 + 0.8 * ((t * 7 + k) % 5) as f64 / 4.0), 0.9 * (t + k) as f64);
                    for (pc, x) in p.iter_mut().zip(vk) {
                        *pc += rho * x;
                    }
                }
                let Ok(p) = ProjPoint::new(p) else { continue };
                if in_k(&p) {
                    if let Ok(q) = g.apply(&p) {
                        out.push(q);
                    }
                }
            }
        }
    }
    out
}

fn layer2(
    deep: &[&GroupElement],
    l0: &[ProjPoint],
    l1: &[ProjPoint],
    params: &KulkarniParams,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<ProjPoint>> {
    if deep.is_empty() {
        return Ok(Vec::new());
    }
    let dim = deep[0].map.dim();
    let shell = 1.0 / params.m_max as f64;
    // A coarse net of L0 ∪ L1 is enough to carve out the shell.
    let avoid: Vec<ProjPoint> = l0.iter().chain(l1).cloned().collect();
    let avoid = SpatialIndex::build(&dedup_points(&avoid, shell / 4.0), shell);
    let in_k = |p: &ProjPoint| !avoid.any_within(p, shell);

    let count = params.l2_elements.min(deep.len());
    let chosen: Vec<&GroupElement> =
        (0..count).map(|i| deep[deep.len() - 1 - i * deep.len() / count]).collect();

    let net: Vec<ProjPoint> = (0..params.grid)
        .filter_map(|_| ProjPoint::new(random_vec(rng, dim + 1)).ok())
        .filter(|p| in_k(p))
        .collect();
    let grid = targets(params.l2_targets.unwrap_or_else(|| params.line_samples()));

    let mut votes = VoteNet { index: SpatialIndex::new(dim, params.eps / 2.0), masks: Vec::new(), radius: params.eps / 2.0 };
    for chunk in chosen.chunks(8).enumerate() {
        let (c, elems) = chunk;
        let batches: Vec<Vec<ProjPoint>> = elems
            .par_iter()
            .map(|e| {
                let mut pts = svd_candidates(&e.map, &grid, &in_k);
                pts.extend(net.iter().filter_map(|p| e.map.apply(p).ok()));
                pts
            })
            .collect();
        for (i, pts) in batches.into_iter().enumerate() {
            let bit = 1u128 << (c * 8 + i);
            for p in pts {
                votes.vote(p, bit);
            }
        }
    }

    let reps = votes.index.points().to_vec();
    let wide = SpatialIndex::build(&reps, params.eps);
    let dense = reps
        .iter()
        .filter(|p| {
            let mask = wide.within(p, params.eps).into_iter().fold(0u128, |m, i| m | votes.masks[i]);
            mask.count_ones() as usize >= params.k
        })
        .cloned()
        .collect();
    Ok(dense)
}

#[cfg(test)]
mod tests;
