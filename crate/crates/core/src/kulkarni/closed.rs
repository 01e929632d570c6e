use std::fmt;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::{probe_order, Order};
use crate::cloud::{Layers, PointsAndLines};
use crate::error::{Error, Result};
use crate::group::GeneratorSet;
use crate::projective::{ProjLine, ProjMap, ProjPoint};

/// Largest line count accepted by the exact general-position search.
pub const MAX_LINES: usize = 20;

/// Triple of lines counted as concurrent when the determinant of their unit
/// dual vectors is below this.
pub const CONCURRENCY_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tagged<T> {
    pub item: T,
    pub tags: Layers,
}

/// A limit set given by finitely many points and lines of P^n.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClosedFormLimitSet {
    pub dim: usize,
    pub points: Vec<Tagged<ProjPoint>>,
    pub lines: Vec<Tagged<ProjLine>>,
    /// The lines are representatives of a continuous family.
    pub parametrized: bool,
    /// Only part of the set is known.
    pub partial: bool,
}

impl ClosedFormLimitSet {
    pub fn new(dim: usize) -> Self {
        ClosedFormLimitSet { dim, points: Vec::new(), lines: Vec::new(), parametrized: false, partial: false }
    }

    /// Adds a point, merging tags with an existing equal point.
    pub fn add_point(&mut self, p: ProjPoint, tags: Layers) {
        match self.points.iter_mut().find(|t| t.item.approx_eq(&p, 1e-12)) {
            Some(t) => t.tags = t.tags.union(tags),
            None => self.points.push(Tagged { item: p, tags }),
        }
    }

    pub fn add_line(&mut self, l: ProjLine, tags: Layers) {
        match self.lines.iter_mut().find(|t| t.item.approx_eq(&l, 1e-12)) {
            Some(t) => t.tags = t.tags.union(tags),
            None => self.lines.push(Tagged { item: l, tags }),
        }
    }

    pub fn as_set(&self) -> PointsAndLines {
        PointsAndLines {
            points: self.points.iter().map(|t| t.item.clone()).collect(),
            lines: self.lines.iter().map(|t| t.item.clone()).collect(),
        }
    }

    pub fn line_items(&self) -> Vec<ProjLine> {
        self.lines.iter().map(|t| t.item.clone()).collect()
    }
}

/// Closed form for the cyclic group generated by `diag(eigs)` on P^2: the
/// coordinate points, and the two lines through the point of middle modulus.
pub fn closed_form_cyclic_diag(eigs: [C64; 3]) -> Result<ClosedFormLimitSet> {
    if eigs.iter().any(|z| !z.is_finite()) {
        return Err(Error::NonFinite);
    }
    if eigs.iter().any(|z| z.norm() == 0.0) {
        return Err(Error::Singular);
    }
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| eigs[a].norm().total_cmp(&eigs[b].norm()));
    for w in order.windows(2) {
        let (a, b) = (eigs[w[0]].norm(), eigs[w[1]].norm());
        if b - a <= 1e-12 * b {
            return Err(Error::Unsupported(format!("non-generic moduli: |{}| = |{}|", eigs[w[0]], eigs[w[1]])));
        }
    }
    let e = |i: usize| ProjPoint::basis(2, i);
    let mut set = ClosedFormLimitSet::new(2);
    for i in 0..3 {
        set.add_point(e(i), Layers::L0.union(Layers::L1));
    }
    let [lo, mid, hi] = order;
    set.add_line(ProjLine::through(&e(lo), &e(mid))?, Layers::L2);
    set.add_line(ProjLine::through(&e(mid), &e(hi))?, Layers::L2);
    Ok(set)
}

#[derive(Clone, Debug)]
pub struct Suspension {
    pub generators: GeneratorSet,
    pub closed: ClosedFormLimitSet,
    pub g_infinite: bool,
}

/// Suspension of a group `sigma` of P^1 by the scalar group generated by
/// `g`: generators `diag(h, 1)` for `h` in `sigma` and `diag(g, g, g^-2)`.
/// `sigma_limit` supplies the limit set of `sigma`; without it the limit set
/// is taken from a single generator's fixed points, or left out and the
/// closed form marked partial.
pub fn suspension(sigma: &GeneratorSet, g: &[C64], sigma_limit: Option<&[ProjPoint]>) -> Result<Suspension> {
    if sigma.dim != 1 {
        return Err(Error::DimensionMismatch { expected: 1, found: sigma.dim });
    }
    if g.iter().any(|z| !z.is_finite() || z.norm() == 0.0) {
        return Err(Error::InvalidConfig("suspension scalars must be finite and nonzero".into()));
    }
    let zero = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    let mut maps = Vec::new();
    let mut labels = Vec::new();
    for (h, label) in sigma.generators.iter().zip(&sigma.labels) {
        let m = h.matrix();
        maps.push(ProjMap::from_rows(&[
            vec![m[(0, 0)], m[(0, 1)], zero],
            vec![m[(1, 0)], m[(1, 1)], zero],
            vec![zero, zero, one],
        ])?);
        labels.push(label.clone());
    }
    let mut g_infinite = false;
    for (i, &s) in g.iter().enumerate() {
        if (s - one).norm() == 0.0 {
            continue;
        }
        let d = ProjMap::diagonal(&[s, s, one / (s * s)])?;
        g_infinite |= !matches!(probe_order(&d, 1000), Order::Finite(_));
        maps.push(d);
        labels.push(format!("g{}", i + 1));
    }
    let generators = GeneratorSet::new(2, maps, labels)?;

    let limit: Option<Vec<ProjPoint>> = match (sigma_limit, sigma.generators.len()) {
        (Some(pts), _) => Some(pts.to_vec()),
        (None, 0) => Some(Vec::new()),
        (None, 1) => match probe_order(&sigma.generators[0], 1000) {
            Order::Infinite => Some(sigma.generators[0].fixed_points().points()),
            Order::Finite(_) => Some(Vec::new()),
            Order::Unresolved => None,
        },
        _ => None,
    };

    let mut closed = ClosedFormLimitSet::new(2);
    let e3 = ProjPoint::basis(2, 2);
    match limit {
        Some(pts) => {
            for p in pts {
                if p.dim() != 1 {
                    return Err(Error::DimensionMismatch { expected: 1, found: p.dim() });
                }
                let c = p.coords();
                let lifted = ProjPoint::new(vec![c[0], c[1], zero])?;
                closed.add_line(ProjLine::through(&lifted, &e3)?, Layers::L2);
            }
        }
        None => closed.partial = true,
    }
    if g_infinite {
        closed.add_line(ProjLine::through(&ProjPoint::basis(2, 0), &ProjPoint::basis(2, 1))?, Layers::L0);
    }
    Ok(Suspension { generators, closed, g_infinite })
}

/// A line count that may be infinite.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Count {
    Finite(usize),
    Infinite,
}

impl fmt::Display for Count {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Count::Finite(n) => write!(f, "{n}"),
            Count::Infinite => write!(f, "∞"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineCount {
    pub lin: Count,
    pub ling: Count,
}

fn unit_dual(l: &ProjLine) -> [C64; 3] {
    let f = &l.forms()[0];
    let n = crate::projective::vnorm(f);
    [f[0] / n, f[1] / n, f[2] / n]
}

fn det3(a: &[C64; 3], b: &[C64; 3], c: &[C64; 3]) -> C64 {
    a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0]) + a[2] * (b[0] * c[1] - b[1] * c[0])
}

/// Whether the three lines of P^2 pass through a common point.
pub fn concurrent(a: &ProjLine, b: &ProjLine, c: &ProjLine) -> bool {
    det3(&unit_dual(a), &unit_dual(b), &unit_dual(c)).norm() <= CONCURRENCY_TOL
}

/// Number of lines and the size of a largest subfamily with no three
/// concurrent lines.
pub fn count_lines(s: &ClosedFormLimitSet) -> Result<LineCount> {
    let lines = s.line_items();
    if s.dim != 2 && !lines.is_empty() {
        return Err(Error::UnsupportedDimension(s.dim));
    }
    let ling = max_general_position(&lines)?;
    let lin = if s.parametrized { Count::Infinite } else { Count::Finite(lines.len()) };
    Ok(LineCount { lin, ling: Count::Finite(ling) })
}

/// Exact maximum size of a subfamily of P^2 lines without concurrent triples.
pub fn max_general_position(lines: &[ProjLine]) -> Result<usize> {
    let n = lines.len();
    if n > MAX_LINES {
        return Err(Error::TooManyLines { count: n, limit: MAX_LINES });
    }
    let duals: Vec<[C64; 3]> = lines.iter().map(unit_dual).collect();
    let mut bad = vec![false; n * n * n];
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                bad[(i * n + j) * n + k] = det3(&duals[i], &duals[j], &duals[k]).norm() <= CONCURRENCY_TOL;
            }
        }
    }
    let mut best = 0;
    let mut chosen = Vec::with_capacity(n);
    search(0, n, &bad, &mut chosen, &mut best);
    Ok(best)
}

fn search(next: usize, n: usize, bad: &[bool], chosen: &mut Vec<usize>, best: &mut usize) {
    if chosen.len() + (n - next) <= *best {
        return;
    }
    if next == n {
        *best = chosen.len();
        return;
    }
    let ok = chosen
        .iter()
        .enumerate()
        .all(|(a, &i)| chosen[a + 1..].iter().all(|&j| !bad[(i * n + j) * n + next]));
    if ok {
        chosen.push(next);
        search(next + 1, n, bad, chosen, best);
        chosen.pop();
    }
    search(next + 1, n, bad, chosen, best);
}
