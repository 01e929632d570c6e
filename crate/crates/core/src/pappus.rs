//! Pappus configurations over `Q(i)`, the configuration-rewriting iteration
//! that generates an orbit of lines in the dual plane, and candidate
//! generators of the associated group.

use std::collections::HashSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{det3, projectivity, Constraint, ExactMatrix, ExactPoint};

/// Coordinates larger than this many bits abort the iteration.
pub const MAX_COORD_BITS: u64 = 1 << 16;

/// Marked points `(p, b, q)` on a line `L1` and `(r, t, s)` on a line `L2`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PappusConfig {
    pub p: ExactPoint,
    pub b: ExactPoint,
    pub q: ExactPoint,
    pub r: ExactPoint,
    pub t: ExactPoint,
    pub s: ExactPoint,
}

fn degenerate(address: &str, reason: impl Into<String>) -> Error {
    Error::Degenerate { address: address.to_string(), reason: reason.into() }
}

impl PappusConfig {
    pub fn new(first: [ExactPoint; 3], second: [ExactPoint; 3]) -> Self {
        let [p, b, q] = first;
        let [r, t, s] = second;
        PappusConfig { p, b, q, r, t, s }
    }

    pub fn first(&self) -> [&ExactPoint; 3] {
        [&self.p, &self.b, &self.q]
    }

    pub fn second(&self) -> [&ExactPoint; 3] {
        [&self.r, &self.t, &self.s]
    }

    /// The configuration with the two lines exchanged.
    pub fn swapped(&self) -> Self {
        PappusConfig {
            p: self.r.clone(),
            b: self.t.clone(),
            q: self.s.clone(),
            r: self.p.clone(),
            t: self.b.clone(),
            s: self.q.clone(),
        }
    }

    pub fn map(&self, g: &ExactMatrix) -> Result<Self> {
        Ok(PappusConfig {
            p: g.apply(&self.p)?,
            b: g.apply(&self.b)?,
            q: g.apply(&self.q)?,
            r: g.apply(&self.r)?,
            t: g.apply(&self.t)?,
            s: g.apply(&self.s)?,
        })
    }

    pub fn is_real(&self) -> bool {
        self.first().iter().chain(self.second().iter()).all(|x| x.is_real())
    }

    /// The lines `L1`, `L2` after checking the configuration invariants.
    pub fn lines(&self) -> Result<(ExactPoint, ExactPoint)> {
        self.lines_at("")
    }

    fn lines_at(&self, address: &str) -> Result<(ExactPoint, ExactPoint)> {
        let all: Vec<&ExactPoint> = self.first().into_iter().chain(self.second()).collect();
        for i in 0..6 {
            for j in i + 1..6 {
                if all[i] == all[j] {
                    return Err(degenerate(address, format!("marked points {i} and {j} coincide")));
                }
            }
        }
        let l1 = self.p.join(&self.b).expect("distinct points");
        let l2 = self.r.join(&self.t).expect("distinct points");
        if !self.q.incident(&l1) {
            return Err(degenerate(address, "p, b, q are not collinear"));
        }
        if !self.s.incident(&l2) {
            return Err(degenerate(address, "r, t, s are not collinear"));
        }
        if l1 == l2 {
            return Err(degenerate(address, "L1 = L2"));
        }
        if all.iter().any(|x| x.incident(&l1) && x.incident(&l2)) {
            return Err(degenerate(address, "a marked point lies on both lines"));
        }
        Ok((l1, l2))
    }
}

/// The Pappus line `L3` through `x1 = pt ∩ rb`, `x2 = ps ∩ rq`, `x3 = bs ∩ tq`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PappusLine {
    pub line: ExactPoint,
    pub x: [ExactPoint; 3],
}

pub fn pappus_line(c: &PappusConfig) -> Result<PappusLine> {
    pappus_line_at(c, "")
}

fn pappus_line_at(c: &PappusConfig, address: &str) -> Result<PappusLine> {
    c.lines_at(address)?;
    let meet = |a: &ExactPoint, b: &ExactPoint, u: &ExactPoint, v: &ExactPoint, name: &str| -> Result<ExactPoint> {
        let l = a.join(b).expect("distinct points");
        let m = u.join(v).expect("distinct points");
        l.join(&m).ok_or_else(|| degenerate(address, format!("constructed lines for {name} coincide")))
    };
    let x1 = meet(&c.p, &c.t, &c.r, &c.b, "x1")?;
    let x2 = meet(&c.p, &c.s, &c.r, &c.q, "x2")?;
    let x3 = meet(&c.b, &c.s, &c.t, &c.q, "x3")?;
    if x1 == x2 || x1 == x3 || x2 == x3 {
        return Err(degenerate(address, "intersection points coincide"));
    }
    if !det3(x1.coords(), x2.coords(), x3.coords()).is_zero() {
        return Err(degenerate(address, "intersection points are not collinear"));
    }
    let line = x1.join(&x2).expect("distinct points");
    if [&x1, &x2, &x3].iter().any(|x| x.bits() > MAX_COORD_BITS) {
        return Err(Error::ResourceLimit { what: "coordinate bits".into(), limit: MAX_COORD_BITS as usize });
    }
    Ok(PappusLine { line, x: [x1, x2, x3] })
}

/// One generated line with the address of the configuration that produced it
/// (`L`/`R` for the first/second child) and the parent's marked points.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratedLine {
    pub line: ExactPoint,
    pub address: String,
    /// Intersection points on the line; empty for the two seed lines.
    pub witnesses: Vec<ExactPoint>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DualCurve {
    pub depth: usize,
    /// Distinct lines in generation order (seed lines first, then level by level).
    pub lines: Vec<GeneratedLine>,
}

impl DualCurve {
    pub fn dual_points(&self) -> Vec<ExactPoint> {
        self.lines.iter().map(|l| l.line.clone()).collect()
    }

    /// Floating dual coordinates, one line per row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("re0,im0,re1,im1,re2,im2\n");
        for l in &self.lines {
            let row: Vec<String> = l.line.to_c64().iter().map(|z| format!("{:e},{:e}", z.re, z.im)).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// Rewrites `((p,b,q); (r,t,s))` into `((p,b,q); (x1,x2,x3))` and
/// `((x1,x2,x3); (r,t,s))` down to `depth` levels, collecting every line.
pub fn iterate_configs(c: &PappusConfig, depth: usize) -> Result<DualCurve> {
    let (l1, l2) = c.lines()?;
    let mut seen = HashSet::new();
    let mut lines = Vec::new();
    for l in [l1, l2] {
        if seen.insert(l.clone()) {
            lines.push(GeneratedLine { line: l, address: String::new(), witnesses: Vec::new() });
        }
    }
    let mut level = vec![(c.clone(), String::new())];
    for _ in 0..depth {
        let results: Vec<Result<PappusLine>> = level.par_iter().map(|(cfg, addr)| pappus_line_at(cfg, addr)).collect();
        let mut next = Vec::with_capacity(2 * level.len());
        for ((cfg, addr), res) in level.into_iter().zip(results) {
            let pl = res?;
            if seen.insert(pl.line.clone()) {
                lines.push(GeneratedLine { line: pl.line.clone(), address: addr.clone(), witnesses: pl.x.to_vec() });
            }
            let [x1, x2, x3] = pl.x;
            let left = PappusConfig::new([cfg.p.clone(), cfg.b.clone(), cfg.q.clone()], [x1.clone(), x2.clone(), x3.clone()]);
            let right = PappusConfig::new([x1, x2, x3], [cfg.r, cfg.t, cfg.s]);
            next.push((left, format!("{addr}L")));
            next.push((right, format!("{addr}R")));
        }
        level = next;
    }
    Ok(DualCurve { depth, lines })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Relation {
    pub name: String,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchwartzGenerators {
    pub iota: ExactMatrix,
    pub tau1: ExactMatrix,
    pub tau2: ExactMatrix,
    pub pappus: PappusLine,
    pub report: Vec<Relation>,
}

/// Candidate maps for a real configuration:
/// `iota` swaps `p <-> r` and `q <-> s`;
/// `tau1` sends `r, t, s` to `x1, x2, x3`, fixes `p` and moves `x2` onto `L2`;
/// `tau2` sends `p, b, q` to `x1, x2, x3`, fixes `r` and moves `x2` onto `L1`.
/// The report lists which of the expected relations hold exactly.
pub fn schwartz_generators(c: &PappusConfig) -> Result<SchwartzGenerators> {
    if !c.is_real() {
        return Err(Error::Unsupported("the generators are built for real configurations".into()));
    }
    let (l1, l2) = c.lines()?;
    let pl = pappus_line(c)?;
    let [x1, x2, x3] = &pl.x;
    use Constraint::{Maps, Onto};
    let iota = projectivity(&[
        Maps(c.p.clone(), c.r.clone()),
        Maps(c.r.clone(), c.p.clone()),
        Maps(c.q.clone(), c.s.clone()),
        Maps(c.s.clone(), c.q.clone()),
    ])?;
    let tau1 = projectivity(&[
        Maps(c.r.clone(), x1.clone()),
        Maps(c.t.clone(), x2.clone()),
        Maps(c.s.clone(), x3.clone()),
        Maps(c.p.clone(), c.p.clone()),
        Onto(x2.clone(), l2.clone()),
    ])?;
    let tau2 = projectivity(&[
        Maps(c.p.clone(), x1.clone()),
        Maps(c.b.clone(), x2.clone()),
        Maps(c.q.clone(), x3.clone()),
        Maps(c.r.clone(), c.r.clone()),
        Onto(x2.clone(), l1.clone()),
    ])?;
    let l3 = &pl.line;
    let prod = |ms: &[&ExactMatrix]| ms.iter().fold(ExactMatrix::identity(), |acc, m| acc.mul(m));
    let line_is = |g: &ExactMatrix, from: &ExactPoint, to: &ExactPoint| g.apply_line(from).is_ok_and(|l| &l == to);
    let rel = |name: &str, holds: bool| Relation { name: name.to_string(), holds };
    let report = vec![
        rel("iota^2 = id", prod(&[&iota, &iota]).is_scalar()),
        rel("tau1 iota tau2 = iota", prod(&[&tau1, &iota, &tau2]).proj_eq(&iota)),
        rel("tau2 iota tau1 = iota", prod(&[&tau2, &iota, &tau1]).proj_eq(&iota)),
        rel("tau1 iota tau1 = tau2", prod(&[&tau1, &iota, &tau1]).proj_eq(&tau2)),
        rel("tau2 iota tau2 = tau2", prod(&[&tau2, &iota, &tau2]).proj_eq(&tau2)),
        rel("iota(L1) = L2", line_is(&iota, &l1, &l2)),
        rel("iota(L2) = L1", line_is(&iota, &l2, &l1)),
        rel("tau1(L2) = L3", line_is(&tau1, &l2, l3)),
        rel("tau2(L1) = L3", line_is(&tau2, &l1, l3)),
        rel("tau2(L2) = L2", line_is(&tau2, &l2, &l2)),
        rel("iota(b) = t", iota.apply(&c.b).is_ok_and(|x| x == c.t)),
    ];
    Ok(SchwartzGenerators { iota, tau1, tau2, pappus: pl, report })
}
