//! Points, lines and linear maps of complex projective space P^n, n <= 3,
//! with the Fubini–Study metric.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::serde_c64;

/// Coordinates below this modulus are treated as zero when choosing the phase
/// of a normalized representative.
pub const NORMALIZE_EPS: f64 = 1e-12;

const GOLDEN_ANGLE: f64 = 2.399_963_229_728_653;

/// Hermitian product `sum conj(p_i) q_i`.
pub fn hdot(p: &[C64], q: &[C64]) -> C64 {
    p.iter().zip(q).map(|(a, b)| a.conj() * b).sum()
}

/// Bilinear pairing `sum l_i p_i` of a dual vector with a vector.
pub fn bdot(l: &[C64], p: &[C64]) -> C64 {
    l.iter().zip(p).map(|(a, b)| a * b).sum()
}

pub fn vnorm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Bilinear cross product in C^3: the result annihilates both arguments under [`bdot`].
pub fn cross3(a: &[C64], b: &[C64]) -> [C64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Scales to unit norm and rotates the first non-negligible coordinate onto the
/// positive real axis.
fn normalize(mut v: Vec<C64>) -> Result<Vec<C64>> {
    if v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite);
    }
    let n = vnorm(&v);
    if n == 0.0 || !n.is_finite() {
        return Err(Error::ZeroVector);
    }
    for z in v.iter_mut() {
        *z /= n;
    }
    if let Some(lead) = v.iter().find(|z| z.norm() > NORMALIZE_EPS).copied() {
        let phase = lead.conj() / lead.norm();
        for z in v.iter_mut() {
            *z *= phase;
        }
    }
    Ok(v)
}

fn check_dim(len: usize) -> Result<usize> {
    match len {
        2..=4 => Ok(len - 1),
        _ => Err(Error::UnsupportedDimension(len.saturating_sub(1))),
    }
}

/// Hermitian Gram–Schmidt. Vectors whose residual falls below `tol` are skipped.
pub(crate) fn orthonormalize(vs: &[Vec<C64>], tol: f64) -> Vec<Vec<C64>> {
    let mut out: Vec<Vec<C64>> = Vec::new();
    for v in vs {
        let mut w = v.clone();
        for _ in 0..2 {
            for u in &out {
                let c = hdot(u, &w);
                for (wi, ui) in w.iter_mut().zip(u) {
                    *wi -= c * ui;
                }
            }
        }
        let n = vnorm(&w);
        if n > tol {
            out.push(w.into_iter().map(|z| z / n).collect());
        }
    }
    out
}

/// Orthonormal basis of the Hermitian orthogonal complement of `vs` in C^n.
pub(crate) fn complement(vs: &[Vec<C64>], n: usize) -> Vec<Vec<C64>> {
    let base = orthonormalize(vs, 1e-12);
    let mut all = base.clone();
    let mut extra = Vec::new();
    // Add standard basis vectors in order of how much of them survives projection.
    let mut candidates: Vec<(f64, usize)> = (0..n)
        .map(|i| {
            let residual: f64 = 1.0 - base.iter().map(|u| u[i].norm_sqr()).sum::<f64>();
            (residual, i)
        })
        .collect();
    candidates.sort_by(|a, b| b.0.total_cmp(&a.0));
    for (_, i) in candidates {
        if all.len() == n {
            break;
        }
        let mut e = vec![C64::new(0.0, 0.0); n];
        e[i] = C64::new(1.0, 0.0);
        let before = all.len();
        all = orthonormalize(&[all.clone(), vec![e]].concat(), 1e-8);
        if all.len() > before {
            extra.push(all[all.len() - 1].clone());
        }
    }
    extra
}

/// A point of P^n stored as a unit-norm representative whose first
/// non-negligible coordinate is real and positive.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawVec", into = "RawVec")]
pub struct ProjPoint {
    coords: Vec<C64>,
}

#[derive(Serialize, Deserialize)]
#[serde(transparent)]
struct RawVec(#[serde(with = "serde_c64::vec")] Vec<C64>);

impl TryFrom<RawVec> for ProjPoint {
    type Error = Error;
    fn try_from(r: RawVec) -> Result<Self> {
        ProjPoint::new(r.0)
    }
}

impl From<ProjPoint> for RawVec {
    fn from(p: ProjPoint) -> Self {
        RawVec(p.coords)
    }
}

impl ProjPoint {
    pub fn new(coords: Vec<C64>) -> Result<Self> {
        check_dim(coords.len())?;
        Ok(ProjPoint { coords: normalize(coords)? })
    }

    pub fn from_real(coords: &[f64]) -> Result<Self> {
        Self::new(coords.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    /// The coordinate point `e_i` of P^dim.
    pub fn basis(dim: usize, i: usize) -> Self {
        let mut c = vec![C64::new(0.0, 0.0); dim + 1];
        c[i] = C64::new(1.0, 0.0);
        ProjPoint { coords: c }
    }

    pub fn dim(&self) -> usize {
        self.coords.len() - 1
    }

    pub fn coords(&self) -> &[C64] {
        &self.coords
    }

    /// Affine coordinates in the chart `z_chart != 0`, or `None` near the
    /// hyperplane at infinity of that chart.
    pub fn affine(&self, chart: usize, min_denominator: f64) -> Option<Vec<C64>> {
        let d = self.coords[chart];
        if d.norm() < min_denominator {
            return None;
        }
        Some(
            self.coords
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != chart)
                .map(|(_, z)| z / d)
                .collect(),
        )
    }

    /// Fubini–Study distance, in `[0, pi/2]`.
    pub fn distance(&self, other: &ProjPoint) -> f64 {
        let h = hdot(&self.coords, &other.coords);
        // atan2 of the orthogonal and parallel parts stays accurate near 0,
        // where arccos|<p,q>| loses half the digits.
        let perp: f64 = other
            .coords
            .iter()
            .zip(&self.coords)
            .map(|(q, p)| (q - h * p).norm_sqr())
            .sum::<f64>()
            .sqrt();
        perp.atan2(h.norm())
    }

    pub fn approx_eq(&self, other: &ProjPoint, tol: f64) -> bool {
        self.dim() == other.dim() && self.distance(other) <= tol
    }
}

/// Fubini–Study distance with a dimension check.
pub fn fs_distance(p: &ProjPoint, q: &ProjPoint) -> Result<f64> {
    if p.dim() != q.dim() {
        return Err(Error::DimensionMismatch { expected: p.dim(), found: q.dim() });
    }
    Ok(p.distance(q))
}

/// A projective line in P^2 or P^3, described by the linear forms that vanish
/// on it (one form in P^2, two in P^3). The conjugates of the forms are kept
/// Hermitian-orthonormal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawForms", into = "RawForms")]
pub struct ProjLine {
    forms: Vec<Vec<C64>>,
}

#[derive(Serialize, Deserialize)]
#[serde(transparent)]
struct RawForms(#[serde(with = "serde_c64::matrix")] Vec<Vec<C64>>);

impl TryFrom<RawForms> for ProjLine {
    type Error = Error;
    fn try_from(r: RawForms) -> Result<Self> {
        ProjLine::from_forms(r.0)
    }
}

impl From<ProjLine> for RawForms {
    fn from(l: ProjLine) -> Self {
        RawForms(l.forms)
    }
}

impl ProjLine {
    pub fn from_forms(forms: Vec<Vec<C64>>) -> Result<Self> {
        let first = forms.first().ok_or(Error::ZeroVector)?;
        let n = check_dim(first.len())?;
        if n < 2 {
            return Err(Error::UnsupportedDimension(n));
        }
        if forms.iter().any(|f| f.len() != n + 1) {
            return Err(Error::BadShape("forms of different lengths".into()));
        }
        let conj: Vec<Vec<C64>> =
            forms.iter().map(|f| f.iter().map(|z| z.conj()).collect()).collect();
        let g = orthonormalize(&conj, 1e-12);
        if g.len() != n - 1 {
            return Err(Error::InvalidConfig(format!(
                "a line in P^{n} needs {} independent forms, got rank {}",
                n - 1,
                g.len()
            )));
        }
        let mut forms: Vec<Vec<C64>> =
            g.into_iter().map(|v| v.into_iter().map(|z| z.conj()).collect()).collect();
        if n == 2 {
            forms[0] = normalize(forms[0].clone())?;
        }
        Ok(ProjLine { forms })
    }

    /// Line of P^2 given by a single dual vector.
    pub fn from_form(form: Vec<C64>) -> Result<Self> {
        if form.len() != 3 {
            return Err(Error::DimensionMismatch { expected: 2, found: form.len().saturating_sub(1) });
        }
        Self::from_forms(vec![form])
    }

    /// The line spanned by two distinct points.
    pub fn through(p: &ProjPoint, q: &ProjPoint) -> Result<Self> {
        let n = p.dim();
        if q.dim() != n {
            return Err(Error::DimensionMismatch { expected: n, found: q.dim() });
        }
        if n < 2 {
            return Err(Error::UnsupportedDimension(n));
        }
        if p.distance(q) < NORMALIZE_EPS {
            return Err(Error::CoincidentPoints);
        }
        let normals = complement(&[p.coords.clone(), q.coords.clone()], n + 1);
        let forms = normals.into_iter().map(|v| v.into_iter().map(|z| z.conj()).collect()).collect();
        Self::from_forms(forms)
    }

    pub fn dim(&self) -> usize {
        self.forms[0].len() - 1
    }

    pub fn forms(&self) -> &[Vec<C64>] {
        &self.forms
    }

    fn normals(&self) -> Vec<Vec<C64>> {
        self.forms.iter().map(|f| f.iter().map(|z| z.conj()).collect()).collect()
    }

    /// Two Hermitian-orthonormal representatives spanning the line.
    pub fn basis(&self) -> [ProjPoint; 2] {
        let c = complement(&self.normals(), self.dim() + 1);
        [
            ProjPoint { coords: c[0].clone() },
            ProjPoint { coords: c[1].clone() },
        ]
    }

    /// The point `a u + b v` for the orthonormal basis `u, v` of [`Self::basis`].
    pub fn point_at(&self, a: C64, b: C64) -> Result<ProjPoint> {
        let [u, v] = self.basis();
        ProjPoint::new(u.coords.iter().zip(&v.coords).map(|(x, y)| a * x + b * y).collect())
    }

    /// Distance from a point to the nearest point of the line.
    pub fn distance(&self, p: &ProjPoint) -> f64 {
        let mut rest = p.coords.clone();
        let mut s2 = 0.0;
        for g in self.normals() {
            let c = hdot(&g, &p.coords);
            s2 += c.norm_sqr();
            for (r, gi) in rest.iter_mut().zip(&g) {
                *r -= c * gi;
            }
        }
        s2.sqrt().atan2(vnorm(&rest))
    }

    pub fn contains(&self, p: &ProjPoint, tol: f64) -> bool {
        p.dim() == self.dim() && self.distance(p) <= tol
    }

    /// `n` nearly uniformly spread points on the line, which is a round
    /// 2-sphere in the Fubini–Study metric.
    pub fn sample(&self, n: usize) -> Vec<ProjPoint> {
        let [u, v] = self.basis();
        (0..n)
            .map(|i| {
                let z = 1.0 - (2.0 * i as f64 + 1.0) / n as f64;
                let half = 0.5 * z.clamp(-1.0, 1.0).acos();
                let phase = C64::from_polar(1.0, GOLDEN_ANGLE * i as f64);
                let a = C64::new(half.cos(), 0.0);
                let b = phase * half.sin();
                let coords = u.coords.iter().zip(&v.coords).map(|(x, y)| a * x + b * y).collect();
                ProjPoint::new(coords).expect("orthonormal combination is nonzero")
            })
            .collect()
    }

    /// Both spanning points of `other` lie within `tol` of `self`.
    pub fn approx_eq(&self, other: &ProjLine, tol: f64) -> bool {
        if self.dim() != other.dim() {
            return false;
        }
        let [u, v] = other.basis();
        self.distance(&u) <= tol && self.distance(&v) <= tol
    }
}

/// Distance from a point to a line: `arcsin |sum l_i p_i|` in P^2 and the
/// analogous projection norm in P^3.
pub fn point_line_distance(p: &ProjPoint, l: &ProjLine) -> Result<f64> {
    if p.dim() != l.dim() {
        return Err(Error::DimensionMismatch { expected: l.dim(), found: p.dim() });
    }
    Ok(l.distance(p))
}

/// The line of P^2 through two points.
pub fn line_through(p: &ProjPoint, q: &ProjPoint) -> Result<ProjLine> {
    if p.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, found: p.dim() });
    }
    if q.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, found: q.dim() });
    }
    let c = cross3(&p.coords, &q.coords);
    if vnorm(&c) < NORMALIZE_EPS {
        return Err(Error::CoincidentPoints);
    }
    ProjLine::from_form(c.to_vec())
}

/// The intersection point of two lines of P^2.
pub fn intersect_lines(l: &ProjLine, m: &ProjLine) -> Result<ProjPoint> {
    if l.dim() != 2 || m.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, found: l.dim().max(m.dim()) });
    }
    let c = cross3(&l.forms[0], &m.forms[0]);
    if vnorm(&c) < NORMALIZE_EPS {
        return Err(Error::CoincidentLines);
    }
    ProjPoint::new(c.to_vec())
}

/// An element of PSL(n+1, C), stored with determinant 1. Among the n+1
/// possible scalings the one using the principal root of the determinant is
/// chosen.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMatrix", into = "RawMatrix")]
pub struct ProjMap {
    m: DMatrix<C64>,
}

#[derive(Serialize, Deserialize)]
#[serde(transparent)]
struct RawMatrix(#[serde(with = "serde_c64::matrix")] Vec<Vec<C64>>);

impl TryFrom<RawMatrix> for ProjMap {
    type Error = Error;
    fn try_from(r: RawMatrix) -> Result<Self> {
        ProjMap::from_rows(&r.0)
    }
}

impl From<ProjMap> for RawMatrix {
    fn from(g: ProjMap) -> Self {
        RawMatrix(g.rows())
    }
}

impl ProjMap {
    pub fn new(m: DMatrix<C64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::BadShape(format!("{}x{} matrix", m.nrows(), m.ncols())));
        }
        let size = m.nrows();
        check_dim(size)?;
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        let scale = m.norm();
        if scale == 0.0 {
            return Err(Error::Singular);
        }
        let det = (&m / C64::new(scale, 0.0)).determinant();
        if det.norm() < 1e-14 {
            return Err(Error::Singular);
        }
        // det(M/s) = det / s^size; take the principal root of det(M).
        let root = (det.ln() / size as f64).exp() * scale;
        Ok(ProjMap { m: m / root })
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::BadShape("rows of unequal length".into()));
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let rows: Vec<Vec<C64>> =
            rows.iter().map(|r| r.iter().map(|&x| C64::new(x, 0.0)).collect()).collect();
        Self::from_rows(&rows)
    }

    pub fn identity(dim: usize) -> Self {
        ProjMap { m: DMatrix::identity(dim + 1, dim + 1) }
    }

    pub fn diagonal(entries: &[C64]) -> Result<Self> {
        let n = entries.len();
        Self::new(DMatrix::from_fn(n, n, |i, j| if i == j { entries[i] } else { C64::new(0.0, 0.0) }))
    }

    pub fn dim(&self) -> usize {
        self.m.nrows() - 1
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.m
    }

    pub fn rows(&self) -> Vec<Vec<C64>> {
        (0..self.m.nrows()).map(|i| self.m.row(i).iter().copied().collect()).collect()
    }

    /// `self ∘ other`: `other` acts first.
    pub fn compose(&self, other: &ProjMap) -> ProjMap {
        ProjMap { m: &self.m * &other.m }
    }

    pub fn inverse(&self) -> ProjMap {
        let inv = self.m.clone().try_inverse().expect("determinant-one matrix is invertible");
        ProjMap { m: inv }
    }

    pub fn pow(&self, k: i64) -> ProjMap {
        let base = if k < 0 { self.inverse() } else { self.clone() };
        let mut e = k.unsigned_abs();
        let mut acc = DMatrix::identity(self.m.nrows(), self.m.nrows());
        let mut sq = base.m;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &sq;
            }
            sq = &sq * &sq;
            e >>= 1;
        }
        ProjMap { m: acc }
    }

    /// `g ∘ self ∘ g^{-1}`.
    pub fn conjugate_by(&self, g: &ProjMap) -> ProjMap {
        g.compose(self).compose(&g.inverse())
    }

    pub fn apply_vec(&self, v: &[C64]) -> Vec<C64> {
        let n = self.m.nrows();
        (0..n).map(|i| (0..n).map(|j| self.m[(i, j)] * v[j]).sum()).collect()
    }

    pub fn apply(&self, p: &ProjPoint) -> Result<ProjPoint> {
        if p.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: p.dim() });
        }
        ProjPoint::new(self.apply_vec(&p.coords))
    }

    /// Image of a line; forms transform by the inverse transpose.
    pub fn apply_line(&self, l: &ProjLine) -> Result<ProjLine> {
        if l.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: l.dim() });
        }
        let inv = self.inverse();
        let n = self.m.nrows();
        let forms = l
            .forms
            .iter()
            .map(|f| (0..n).map(|j| (0..n).map(|i| f[i] * inv.m[(i, j)]).sum()).collect())
            .collect();
        ProjLine::from_forms(forms)
    }

    pub fn trace(&self) -> C64 {
        self.m.trace()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.m.norm()
    }

    /// Equality in PGL: `other` is a scalar multiple of `self` up to relative
    /// Frobenius error `tol`.
    pub fn proj_eq(&self, other: &ProjMap, tol: f64) -> bool {
        if self.m.shape() != other.m.shape() {
            return false;
        }
        let aa: f64 = self.m.norm_squared();
        let ab: C64 = self.m.iter().zip(other.m.iter()).map(|(a, b)| a.conj() * b).sum();
        let c = ab / aa;
        let resid: f64 = self
            .m
            .iter()
            .zip(other.m.iter())
            .map(|(a, b)| (b - c * a).norm_sqr())
            .sum::<f64>()
            .sqrt();
        resid <= tol * other.m.norm()
    }

    pub fn is_identity(&self, tol: f64) -> bool {
        self.proj_eq(&ProjMap::identity(self.dim()), tol)
    }

    /// Eigenvalues of the determinant-one representative, sorted by modulus
    /// and then argument.
    pub fn eigenvalues(&self) -> Vec<C64> {
        let mut ev: Vec<C64> = self
            .m
            .clone()
            .schur()
            .eigenvalues()
            .expect("complex Schur form is triangular")
            .iter()
            .copied()
            .collect();
        ev.sort_by(|a, b| a.norm().total_cmp(&b.norm()).then(a.arg().total_cmp(&b.arg())));
        ev
    }

    /// Fixed points of the projective action, grouped by eigenvalue.
    pub fn fixed_points(&self) -> FixedPoints {
        crate::eigen::fixed_points(self)
    }
}

/// All eigenvectors for one eigenvalue cluster.
#[derive(Clone, Debug)]
pub struct Eigenspace {
    pub value: C64,
    /// Number of eigenvalues (with multiplicity) merged into this cluster.
    pub algebraic: usize,
    /// Orthonormal basis of the eigenspace; more than one vector means a
    /// projective line or plane of fixed points.
    pub basis: Vec<ProjPoint>,
    /// Generalized eigenvectors completing the eigenspace when it is defective.
    pub generalized: Vec<ProjPoint>,
}

#[derive(Clone, Debug)]
pub struct FixedPoints {
    pub spaces: Vec<Eigenspace>,
    /// Any eigenspace has geometric multiplicity below its algebraic one.
    pub defective: bool,
    /// Largest relative residual `|(M - l) v| / |M|` over returned eigenvectors.
    pub max_residual: f64,
}

impl FixedPoints {
    /// One representative per basis vector of every eigenspace.
    pub fn points(&self) -> Vec<ProjPoint> {
        self.spaces.iter().flat_map(|s| s.basis.iter().cloned()).collect()
    }

    /// Points sampled from every eigenspace: isolated fixed points as they
    /// are, and `samples` spread points on each fixed line or plane.
    pub fn sampled(&self, samples: usize) -> Vec<ProjPoint> {
        let mut out = Vec::new();
        for s in &self.spaces {
            match s.basis.len() {
                1 => out.push(s.basis[0].clone()),
                _ => {
                    out.extend(s.basis.iter().cloned());
                    for i in 0..samples {
                        let mut v = vec![C64::new(0.0, 0.0); s.basis[0].coords.len()];
                        for (k, b) in s.basis.iter().enumerate() {
                            let w = C64::from_polar(1.0 + 0.37 * k as f64, GOLDEN_ANGLE * (i * (k + 1)) as f64)
                                * ((i as f64 + 0.5) / samples as f64 * (k as f64 + 1.0)).sin();
                            for (vi, bi) in v.iter_mut().zip(&b.coords) {
                                *vi += w * bi;
                            }
                        }
                        if let Ok(p) = ProjPoint::new(v) {
                            out.push(p);
                        }
                    }
                }
            }
        }
        out
    }
}
