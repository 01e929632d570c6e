//! Möbius transformations of the Riemann sphere, inversions in circles and
//! lines, and the Poincaré extension to upper half-space.
//!
//! The extended plane is P^1: `z` is `[z : 1]` and infinity is `[1 : 0]`.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::projective::{ProjMap, ProjPoint};
use crate::serde_c64;

pub const CLASSIFY_TOL: f64 = 1e-9;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// The point `[z : 1]`.
pub fn ext(z: C64) -> ProjPoint {
    ProjPoint::new(vec![z, ONE]).expect("nonzero")
}

pub fn infinity() -> ProjPoint {
    ProjPoint::basis(1, 0)
}

/// Affine value of a point of P^1, `None` at infinity.
pub fn finite(p: &ProjPoint) -> Option<C64> {
    let [x, y] = [p.coords()[0], p.coords()[1]];
    if y.norm() <= 1e-15 * x.norm() {
        None
    } else {
        Some(x / y)
    }
}

fn conj_point(p: &ProjPoint) -> ProjPoint {
    ProjPoint::new(p.coords().iter().map(|z| z.conj()).collect()).expect("nonzero")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MoebiusClass {
    Identity,
    Elliptic,
    Parabolic,
    Loxodromic,
}

impl std::fmt::Display for MoebiusClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            MoebiusClass::Identity => "identity",
            MoebiusClass::Elliptic => "elliptic",
            MoebiusClass::Parabolic => "parabolic",
            MoebiusClass::Loxodromic => "loxodromic",
        };
        f.write_str(s)
    }
}

/// `z -> (az + b)/(cz + d)` with `ad - bc = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Moebius {
    #[serde(with = "serde_c64")]
    pub a: C64,
    #[serde(with = "serde_c64")]
    pub b: C64,
    #[serde(with = "serde_c64")]
    pub c: C64,
    #[serde(with = "serde_c64")]
    pub d: C64,
}

impl Moebius {
    pub fn new(a: C64, b: C64, c: C64, d: C64) -> Result<Self> {
        let det = a * d - b * c;
        let scale = a.norm().max(b.norm()).max(c.norm()).max(d.norm());
        if !scale.is_finite() {
            return Err(Error::NonFinite);
        }
        if det.norm() <= 1e-14 * scale * scale {
            return Err(Error::Singular);
        }
        let s = det.sqrt();
        Ok(Moebius { a: a / s, b: b / s, c: c / s, d: d / s })
    }

    pub fn identity() -> Self {
        Moebius { a: ONE, b: ZERO, c: ZERO, d: ONE }
    }

    pub fn translation(v: C64) -> Self {
        Moebius { a: ONE, b: v, c: ZERO, d: ONE }
    }

    /// `z -> k z`.
    pub fn scaling(k: C64) -> Result<Self> {
        Self::new(k, ZERO, ZERO, ONE)
    }

    pub fn from_projmap(g: &ProjMap) -> Result<Self> {
        if g.dim() != 1 {
            return Err(Error::DimensionMismatch { expected: 1, found: g.dim() });
        }
        let m = g.matrix();
        Self::new(m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)])
    }

    pub fn to_projmap(&self) -> ProjMap {
        ProjMap::new(DMatrix::from_row_slice(2, 2, &[self.a, self.b, self.c, self.d]))
            .expect("determinant one")
    }

    pub fn trace(&self) -> C64 {
        self.a + self.d
    }

    /// `self ∘ other`.
    pub fn compose(&self, o: &Moebius) -> Moebius {
        Moebius {
            a: self.a * o.a + self.b * o.c,
            b: self.a * o.b + self.b * o.d,
            c: self.c * o.a + self.d * o.c,
            d: self.c * o.b + self.d * o.d,
        }
    }

    pub fn inverse(&self) -> Moebius {
        Moebius { a: self.d, b: -self.b, c: -self.c, d: self.a }
    }

    /// Entrywise conjugate, i.e. `z -> conj(m(conj z))`.
    pub fn conj(&self) -> Moebius {
        Moebius { a: self.a.conj(), b: self.b.conj(), c: self.c.conj(), d: self.d.conj() }
    }

    pub fn apply(&self, p: &ProjPoint) -> ProjPoint {
        let [x, y] = [p.coords()[0], p.coords()[1]];
        ProjPoint::new(vec![self.a * x + self.b * y, self.c * x + self.d * y]).expect("invertible")
    }

    /// Action on a finite point; `None` when the image is infinity.
    pub fn apply_c(&self, z: C64) -> Option<C64> {
        finite(&self.apply(&ext(z)))
    }

    pub fn approx_eq(&self, o: &Moebius, tol: f64) -> bool {
        self.to_projmap().proj_eq(&o.to_projmap(), tol)
    }

    pub fn classify(&self) -> MoebiusClass {
        let near_scalar = self.b.norm() < CLASSIFY_TOL
            && self.c.norm() < CLASSIFY_TOL
            && (self.a - self.d).norm() < CLASSIFY_TOL;
        if near_scalar {
            return MoebiusClass::Identity;
        }
        let t2 = self.trace() * self.trace();
        if (t2 - C64::new(4.0, 0.0)).norm() < CLASSIFY_TOL {
            MoebiusClass::Parabolic
        } else if t2.im.abs() < CLASSIFY_TOL && t2.re >= 0.0 && t2.re < 4.0 {
            MoebiusClass::Elliptic
        } else {
            MoebiusClass::Loxodromic
        }
    }

    /// Eigenvalues `l` with eigenvectors, largest modulus first.
    fn eigen(&self) -> [(C64, ProjPoint); 2] {
        let t = self.trace();
        let disc = (t * t - C64::new(4.0, 0.0)).sqrt();
        let mut ls = [(t + disc) / 2.0, (t - disc) / 2.0];
        if ls[0].norm() < ls[1].norm() {
            ls.swap(0, 1);
        }
        ls.map(|l| {
            let u = [self.b, l - self.a];
            let v = [l - self.d, self.c];
            let n = |w: &[C64; 2]| w[0].norm() + w[1].norm();
            let w = if n(&u) >= n(&v) { u } else { v };
            let p = if n(&w) < 1e-300 { infinity() } else { ProjPoint::new(w.to_vec()).expect("nonzero") };
            (l, p)
        })
    }

    /// Fixed points in P^1: two, or one for parabolic maps. The identity
    /// returns an empty list since every point is fixed.
    pub fn fixed_points(&self) -> Vec<ProjPoint> {
        match self.classify() {
            MoebiusClass::Identity => Vec::new(),
            MoebiusClass::Parabolic => vec![self.eigen()[0].1.clone()],
            _ => {
                let [(_, p), (_, q)] = self.eigen();
                vec![p, q]
            }
        }
    }

    /// The fixed point that attracts all other orbits, for loxodromic maps.
    pub fn attracting_fixed_point(&self) -> Option<ProjPoint> {
        match self.classify() {
            MoebiusClass::Loxodromic => Some(self.eigen()[0].1.clone()),
            _ => None,
        }
    }

    /// Image of a circle or line, through the images of three of its points.
    pub fn map_circle(&self, k: &CircleOrLine) -> Result<CircleOrLine> {
        let pts = k.three_points();
        let imgs: Vec<ProjPoint> = pts.iter().map(|p| self.apply(p)).collect();
        CircleOrLine::through(&imgs[0], &imgs[1], &imgs[2])
    }
}

/// A circle `|z - center| = radius` or the line `Re(conj(normal) z) = offset`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum CircleOrLine {
    Circle {
        #[serde(with = "serde_c64")]
        center: C64,
        radius: f64,
    },
    Line {
        #[serde(with = "serde_c64")]
        normal: C64,
        offset: f64,
    },
}

impl CircleOrLine {
    pub fn circle(center: C64, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidConfig(format!("radius must be positive, got {radius}")));
        }
        Ok(CircleOrLine::Circle { center, radius })
    }

    pub fn line(normal: C64, offset: f64) -> Result<Self> {
        let n = normal.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::ZeroVector);
        }
        Ok(CircleOrLine::Line { normal: normal / n, offset: offset / n })
    }

    /// The line through two distinct finite points.
    pub fn line_through(p: C64, q: C64) -> Result<Self> {
        let dir = q - p;
        if dir.norm() == 0.0 {
            return Err(Error::CoincidentPoints);
        }
        let normal = dir * C64::i() / dir.norm();
        Ok(CircleOrLine::Line { normal, offset: (normal.conj() * p).re })
    }

    /// Reflection matrix `M`, so that inversion is `p -> M conj(p)`.
    pub fn reflection_matrix(&self) -> Moebius {
        let m = match *self {
            CircleOrLine::Circle { center: c, radius: r } => {
                [c, C64::new(r * r - c.norm_sqr(), 0.0), ONE, -c.conj()]
            }
            CircleOrLine::Line { normal: n, offset: t } => [-n * n, n * (2.0 * t), ZERO, ONE],
        };
        Moebius::new(m[0], m[1], m[2], m[3]).expect("reflections are invertible")
    }

    pub fn as_anti(&self) -> AntiMoebius {
        AntiMoebius { map: self.reflection_matrix(), conjugate: true }
    }

    pub fn contains(&self, z: C64, tol: f64) -> bool {
        match *self {
            CircleOrLine::Circle { center, radius } => ((z - center).norm() - radius).abs() <= tol,
            CircleOrLine::Line { normal, offset } => ((normal.conj() * z).re - offset).abs() <= tol,
        }
    }

    fn three_points(&self) -> [ProjPoint; 3] {
        match *self {
            CircleOrLine::Circle { center, radius } => [0.0, 2.0, 4.0]
                .map(|k: f64| ext(center + C64::from_polar(radius, k * std::f64::consts::PI / 3.0))),
            CircleOrLine::Line { normal, offset } => {
                let base = normal * offset;
                let dir = normal * C64::i();
                [ext(base), ext(base + dir), infinity()]
            }
        }
    }

    /// The circle or line through three distinct points of P^1.
    pub fn through(p: &ProjPoint, q: &ProjPoint, r: &ProjPoint) -> Result<Self> {
        let fin: Vec<C64> = [p, q, r].iter().filter_map(|x| finite(x)).collect();
        match fin.len() {
            2 => Self::line_through(fin[0], fin[1]),
            3 => {
                let (a, b, c) = (fin[0], fin[1], fin[2]);
                let ab = b - a;
                let ac = c - a;
                let cross = (ab.conj() * ac).im;
                let scale = ab.norm() * ac.norm();
                if scale == 0.0 {
                    return Err(Error::CoincidentPoints);
                }
                if cross.abs() <= 1e-12 * scale {
                    return Self::line_through(a, if ab.norm() > ac.norm() { b } else { c });
                }
                // Circumcenter relative to a.
                let o = C64::i() * (ab * ac.norm_sqr() - ac * ab.norm_sqr()) / (2.0 * cross);
                Self::circle(a + o, o.norm())
            }
            _ => Err(Error::CoincidentPoints),
        }
    }
}

/// Inversion in a circle or reflection in a line.
pub fn invert(k: &CircleOrLine, p: &ProjPoint) -> ProjPoint {
    k.as_anti().apply(p)
}

/// A map `p -> M p` or, with `conjugate`, `p -> M conj(p)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AntiMoebius {
    pub map: Moebius,
    pub conjugate: bool,
}

impl AntiMoebius {
    pub fn apply(&self, p: &ProjPoint) -> ProjPoint {
        if self.conjugate {
            self.map.apply(&conj_point(p))
        } else {
            self.map.apply(p)
        }
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &AntiMoebius) -> AntiMoebius {
        let inner = if self.conjugate { other.map.conj() } else { other.map };
        AntiMoebius { map: self.map.compose(&inner), conjugate: self.conjugate ^ other.conjugate }
    }
}

/// Euclidean description of an affine Möbius map `z -> alpha z + beta`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AffineKind {
    Identity,
    Translation { vector: C64 },
    Rotation { center: C64, angle: f64 },
    Homothety { center: C64, factor: C64 },
    /// Not affine: moves infinity.
    General,
}

impl AffineKind {
    pub fn of(m: &Moebius) -> AffineKind {
        let tol = 1e-12;
        if m.c.norm() > tol * (m.a.norm() + m.d.norm()) {
            return AffineKind::General;
        }
        let alpha = m.a / m.d;
        let beta = m.b / m.d;
        if (alpha - ONE).norm() < tol {
            if beta.norm() < tol {
                AffineKind::Identity
            } else {
                AffineKind::Translation { vector: beta }
            }
        } else {
            let center = beta / (ONE - alpha);
            if (alpha.norm() - 1.0).abs() < tol {
                AffineKind::Rotation { center, angle: alpha.arg() }
            } else {
                AffineKind::Homothety { center, factor: alpha }
            }
        }
    }
}

/// Result of applying one inversion and then another.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InversionPair {
    pub map: Moebius,
    pub class: MoebiusClass,
    pub kind: AffineKind,
}

/// The holomorphic map obtained by inverting in `first` and then in `second`.
pub fn compose_inversions(first: &CircleOrLine, second: &CircleOrLine) -> InversionPair {
    let m = second.as_anti().compose(&first.as_anti());
    debug_assert!(!m.conjugate);
    InversionPair { map: m.map, class: m.map.classify(), kind: AffineKind::of(&m.map) }
}

/// `x + iy + tj + uk`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quaternion {
    pub x: f64,
    pub y: f64,
    pub t: f64,
    pub u: f64,
}

impl Quaternion {
    pub fn new(x: f64, y: f64, t: f64, u: f64) -> Self {
        Quaternion { x, y, t, u }
    }

    /// The point `z + tj` of upper half-space.
    pub fn point(z: C64, t: f64) -> Self {
        Quaternion { x: z.re, y: z.im, t, u: 0.0 }
    }

    pub fn from_complex(z: C64) -> Self {
        Quaternion { x: z.re, y: z.im, t: 0.0, u: 0.0 }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.x * self.x + self.y * self.y + self.t * self.t + self.u * self.u
    }

    pub fn inverse(&self) -> Self {
        let n = self.norm_sqr();
        Quaternion { x: self.x / n, y: -self.y / n, t: -self.t / n, u: -self.u / n }
    }

    pub fn complex_part(&self) -> C64 {
        C64::new(self.x, self.y)
    }
}

impl Add for Quaternion {
    type Output = Quaternion;
    fn add(self, o: Quaternion) -> Quaternion {
        Quaternion::new(self.x + o.x, self.y + o.y, self.t + o.t, self.u + o.u)
    }
}

impl Sub for Quaternion {
    type Output = Quaternion;
    fn sub(self, o: Quaternion) -> Quaternion {
        self + (-o)
    }
}

impl Neg for Quaternion {
    type Output = Quaternion;
    fn neg(self) -> Quaternion {
        Quaternion::new(-self.x, -self.y, -self.t, -self.u)
    }
}

impl Mul for Quaternion {
    type Output = Quaternion;
    fn mul(self, o: Quaternion) -> Quaternion {
        let (a1, b1, c1, d1) = (self.x, self.y, self.t, self.u);
        let (a2, b2, c2, d2) = (o.x, o.y, o.t, o.u);
        Quaternion::new(
            a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
            a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
            a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
            a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
        )
    }
}

/// Action of `m` on upper half-space: `(aw + b)(cw + d)^{-1}`.
pub fn poincare_extend(m: &Moebius, w: Quaternion) -> Quaternion {
    assert!(w.t > 0.0 && w.u == 0.0, "point must lie in upper half-space");
    let q = Quaternion::from_complex;
    let num = q(m.a) * w + q(m.b);
    let den = q(m.c) * w + q(m.d);
    let mut r = num * den.inverse();
    // The k-component vanishes identically; drop rounding residue.
    r.u = 0.0;
    r
}

/// Hyperbolic distance in upper half-space.
pub fn half_space_distance(p: Quaternion, q: Quaternion) -> f64 {
    let d2 = (p - q).norm_sqr();
    (1.0 + d2 / (2.0 * p.t * q.t)).acosh()
}

/// Normalized determinant test for four finite points lying on one circle or line.
pub fn concircular(z: [C64; 4], tol: f64) -> bool {
    let rows: Vec<[f64; 4]> = z.iter().map(|w| [w.norm_sqr(), w.re, w.im, 1.0]).collect();
    let m = nalgebra::Matrix4::from_fn(|i, j| rows[i][j]);
    let scale: f64 = rows.iter().map(|r| r.iter().map(|x| x * x).sum::<f64>().sqrt()).product();
    m.determinant().abs() <= tol * scale
}
