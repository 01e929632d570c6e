//! Triangle groups generated by reflections in the sides of a geodesic
//! triangle with angles (π/p, π/q, π/r), and the tilings they produce in the
//! Euclidean plane, the round sphere and the Poincaré disc.

use std::collections::{HashMap, VecDeque};
use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::moebius::{ext, finite, AntiMoebius, CircleOrLine};

/// Fingerprint grid for tile deduplication.
pub const FINGERPRINT_GRID: f64 = 1e-7;
pub const DEFAULT_TILE_LIMIT: usize = 2_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Geometry {
    Euclidean,
    Spherical,
    Hyperbolic,
}

impl std::fmt::Display for Geometry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Geometry::Euclidean => "euclidean",
            Geometry::Spherical => "spherical",
            Geometry::Hyperbolic => "hyperbolic",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TriangleSpec {
    pub p: u32,
    pub q: u32,
    pub r: u32,
}

impl TriangleSpec {
    pub fn new(p: u32, q: u32, r: u32) -> Result<Self> {
        if p < 2 || q < 2 || r < 2 {
            return Err(Error::InvalidConfig(format!("({p},{q},{r}): every entry must be at least 2")));
        }
        Ok(TriangleSpec { p, q, r })
    }

    /// Compares `1/p + 1/q + 1/r` with 1 in integer arithmetic.
    pub fn classify(&self) -> Geometry {
        let (p, q, r) = (self.p as u64, self.q as u64, self.r as u64);
        let lhs = q * r + p * r + p * q;
        let rhs = p * q * r;
        match lhs.cmp(&rhs) {
            std::cmp::Ordering::Equal => Geometry::Euclidean,
            std::cmp::Ordering::Greater => Geometry::Spherical,
            std::cmp::Ordering::Less => Geometry::Hyperbolic,
        }
    }

    pub fn angles(&self) -> [f64; 3] {
        [PI / self.p as f64, PI / self.q as f64, PI / self.r as f64]
    }
}

fn c3(z: C64) -> [f64; 3] {
    [z.re, z.im, 0.0]
}

fn cplx(v: &[f64; 3]) -> C64 {
    C64::new(v[0], v[1])
}

fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn unit(a: [f64; 3]) -> [f64; 3] {
    let n = dot(&a, &a).sqrt();
    [a[0] / n, a[1] / n, a[2] / n]
}

/// Disc automorphism sending `u` to 0.
fn to_origin(u: C64, z: C64) -> C64 {
    (z - u) / (C64::new(1.0, 0.0) - u.conj() * z)
}

fn from_origin(u: C64, w: C64) -> C64 {
    (w + u) / (C64::new(1.0, 0.0) + u.conj() * w)
}

/// The hyperbolic geodesic through two points of the disc: a diameter or a
/// circle meeting the unit circle orthogonally.
pub fn disc_geodesic(u: C64, v: C64) -> Result<CircleOrLine> {
    // Centre o solves 2 Re(conj(o) x) = |x|^2 + 1 for x = u, v.
    let det = 2.0 * (u.re * v.im - u.im * v.re);
    let scale = u.norm() * v.norm();
    if det.abs() <= 1e-12 * scale.max(1e-300) || u.norm() < 1e-14 || v.norm() < 1e-14 {
        let base = if u.norm() > v.norm() { u } else { v };
        if base.norm() < 1e-14 {
            return Err(Error::CoincidentPoints);
        }
        return CircleOrLine::line_through(C64::new(0.0, 0.0), base);
    }
    let (bu, bv) = ((u.norm_sqr() + 1.0) / 2.0, (v.norm_sqr() + 1.0) / 2.0);
    let ox = (bu * v.im - bv * u.im) / (det / 2.0);
    let oy = (u.re * bv - v.re * bu) / (det / 2.0);
    let o = C64::new(ox, oy);
    CircleOrLine::circle(o, (o.norm_sqr() - 1.0).max(0.0).sqrt())
}

/// Reflection in one side of a triangle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Reflection {
    /// Anti-conformal map of the extended plane (Euclidean and disc models).
    Planar(AntiMoebius),
    /// `v -> v - 2 (v.n) n` on the unit sphere.
    Orthogonal { normal: [f64; 3] },
}

impl Reflection {
    pub fn apply(&self, v: &[f64; 3]) -> [f64; 3] {
        match self {
            Reflection::Planar(m) => {
                let w = finite(&m.apply(&ext(cplx(v)))).unwrap_or(C64::new(f64::INFINITY, 0.0));
                c3(w)
            }
            Reflection::Orthogonal { normal: n } => {
                let s = 2.0 * dot(v, n);
                [v[0] - s * n[0], v[1] - s * n[1], v[2] - s * n[2]]
            }
        }
    }
}

/// A geodesic triangle in one of the three model geometries. Planar
/// vertices carry a zero third coordinate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeodesicTriangle {
    pub geometry: Geometry,
    pub vertices: [[f64; 3]; 3],
}

/// The side of a triangle between vertices `k` and `k + 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Side {
    Planar(CircleOrLine),
    GreatCircle { normal: [f64; 3] },
}

impl GeodesicTriangle {
    pub fn side(&self, k: usize) -> Side {
        let a = &self.vertices[k];
        let b = &self.vertices[(k + 1) % 3];
        match self.geometry {
            Geometry::Euclidean => {
                Side::Planar(CircleOrLine::line_through(cplx(a), cplx(b)).expect("distinct vertices"))
            }
            Geometry::Hyperbolic => Side::Planar(disc_geodesic(cplx(a), cplx(b)).expect("distinct vertices")),
            Geometry::Spherical => Side::GreatCircle { normal: unit(cross(a, b)) },
        }
    }

    pub fn sides(&self) -> [Side; 3] {
        [self.side(0), self.side(1), self.side(2)]
    }

    pub fn reflection(&self, k: usize) -> Reflection {
        match self.side(k) {
            Side::Planar(c) => Reflection::Planar(c.as_anti()),
            Side::GreatCircle { normal } => Reflection::Orthogonal { normal },
        }
    }

    /// The three generating reflections, one per side.
    pub fn reflection_generators(&self) -> [Reflection; 3] {
        [self.reflection(0), self.reflection(1), self.reflection(2)]
    }

    pub fn reflect(&self, k: usize) -> GeodesicTriangle {
        let s = self.reflection(k);
        GeodesicTriangle { geometry: self.geometry, vertices: self.vertices.map(|v| s.apply(&v)) }
    }

    /// Interior angle at vertex `i`.
    pub fn angle(&self, i: usize) -> f64 {
        let a = self.vertices[i];
        let b = self.vertices[(i + 1) % 3];
        let c = self.vertices[(i + 2) % 3];
        match self.geometry {
            Geometry::Euclidean => (cplx(&b) - cplx(&a)).arg().sub_angle((cplx(&c) - cplx(&a)).arg()),
            Geometry::Hyperbolic => {
                let (u, v, w) = (cplx(&a), cplx(&b), cplx(&c));
                to_origin(u, v).arg().sub_angle(to_origin(u, w).arg())
            }
            Geometry::Spherical => {
                let tb = sub(&b, &scale(&a, dot(&a, &b)));
                let tc = sub(&c, &scale(&a, dot(&a, &c)));
                let cr = cross(&tb, &tc);
                dot(&cr, &cr).sqrt().atan2(dot(&tb, &tc))
            }
        }
    }

    pub fn angles(&self) -> [f64; 3] {
        [self.angle(0), self.angle(1), self.angle(2)]
    }

    /// Area: Euclidean area, spherical excess, or hyperbolic defect.
    pub fn area(&self) -> f64 {
        let s: f64 = self.angles().iter().sum();
        match self.geometry {
            Geometry::Euclidean => {
                let [a, b, c] = self.vertices.map(|v| cplx(&v));
                0.5 * ((b - a).conj() * (c - a)).im.abs()
            }
            Geometry::Spherical => s - PI,
            Geometry::Hyperbolic => PI - s,
        }
    }

    /// Sign of `x` relative to side `k`, oriented so the opposite vertex is positive.
    fn side_sign(&self, k: usize, x: &[f64; 3]) -> f64 {
        let w = self.vertices[(k + 2) % 3];
        let f = |y: &[f64; 3]| match self.side(k) {
            Side::GreatCircle { normal } => dot(y, &normal),
            Side::Planar(CircleOrLine::Circle { center, radius }) => radius * radius - (cplx(y) - center).norm_sqr(),
            Side::Planar(CircleOrLine::Line { normal, offset }) => (normal.conj() * cplx(y)).re - offset,
        };
        f(x) * f(&w).signum()
    }

    /// Point-in-triangle test; boundary points within `tol` count as inside.
    pub fn contains(&self, x: &[f64; 3], tol: f64) -> bool {
        (0..3).all(|k| self.side_sign(k, x) >= -tol)
    }

    /// A point strictly inside the triangle.
    pub fn interior_point(&self) -> [f64; 3] {
        match self.geometry {
            Geometry::Euclidean | Geometry::Spherical => {
                let v = &self.vertices;
                let m = [0, 1, 2].map(|i| (v[0][i] + v[1][i] + v[2][i]) / 3.0);
                if self.geometry == Geometry::Spherical {
                    unit(m)
                } else {
                    m
                }
            }
            Geometry::Hyperbolic => {
                // Euclidean centroid after moving the first vertex to 0, mapped back.
                let u = cplx(&self.vertices[0]);
                let v = to_origin(u, cplx(&self.vertices[1]));
                let w = to_origin(u, cplx(&self.vertices[2]));
                c3(from_origin(u, (v + w) / 3.0))
            }
        }
    }

    /// Points along the boundary, `per_side` per side, following the geodesics.
    pub fn outline(&self, per_side: usize) -> Vec<[f64; 3]> {
        let n = per_side.max(1);
        let mut out = Vec::with_capacity(3 * n);
        for k in 0..3 {
            let a = self.vertices[k];
            let b = self.vertices[(k + 1) % 3];
            for i in 0..n {
                let s = i as f64 / n as f64;
                out.push(match self.geometry {
                    Geometry::Euclidean => [a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1]), 0.0],
                    Geometry::Spherical => unit([0, 1, 2].map(|j| (1.0 - s) * a[j] + s * b[j])),
                    Geometry::Hyperbolic => {
                        let u = cplx(&a);
                        c3(from_origin(u, to_origin(u, cplx(&b)) * s))
                    }
                });
            }
        }
        out
    }

    fn diameter(&self) -> f64 {
        let v = &self.vertices;
        let d = |a: &[f64; 3], b: &[f64; 3]| dot(&sub(a, b), &sub(a, b)).sqrt();
        d(&v[0], &v[1]).max(d(&v[1], &v[2])).max(d(&v[0], &v[2]))
    }
}

trait SubAngle {
    fn sub_angle(self, other: f64) -> f64;
}

impl SubAngle for f64 {
    /// Absolute difference of two directions, folded into `[0, π]`.
    fn sub_angle(self, other: f64) -> f64 {
        let mut d = (self - other).rem_euclid(2.0 * PI);
        if d > PI {
            d = 2.0 * PI - d;
        }
        d
    }
}

fn sub(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn scale(a: &[f64; 3], s: f64) -> [f64; 3] {
    [a[0] * s, a[1] * s, a[2] * s]
}

/// Canonical triangle for a spec: vertex of angle π/p at the origin (north
/// pole on the sphere) and the vertex of angle π/q on the positive real axis
/// (in the xz-plane on the sphere).
pub fn build_triangle(s: &TriangleSpec) -> GeodesicTriangle {
    let [al, be, ga] = s.angles();
    let geometry = s.classify();
    let vertices = match geometry {
        Geometry::Euclidean => {
            let b = be.sin() / ga.sin();
            [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], c3(C64::from_polar(b, al))]
        }
        Geometry::Spherical => {
            let cos_c = (ga.cos() + al.cos() * be.cos()) / (al.sin() * be.sin());
            let cos_b = (be.cos() + al.cos() * ga.cos()) / (al.sin() * ga.sin());
            let (c, b) = (cos_c.clamp(-1.0, 1.0).acos(), cos_b.clamp(-1.0, 1.0).acos());
            [
                [0.0, 0.0, 1.0],
                [c.sin(), 0.0, c.cos()],
                [b.sin() * al.cos(), b.sin() * al.sin(), b.cos()],
            ]
        }
        Geometry::Hyperbolic => {
            let cosh_c = (ga.cos() + al.cos() * be.cos()) / (al.sin() * be.sin());
            let cosh_b = (be.cos() + al.cos() * ga.cos()) / (al.sin() * ga.sin());
            let (c, b) = (cosh_c.acosh(), cosh_b.acosh());
            [[0.0, 0.0, 0.0], [(c / 2.0).tanh(), 0.0, 0.0], c3(C64::from_polar((b / 2.0).tanh(), al))]
        }
    };
    GeodesicTriangle { geometry, vertices }
}

/// A tile of the orbit, reached by a reflection word of length `depth`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tile {
    #[serde(flatten)]
    pub triangle: GeodesicTriangle,
    pub depth: usize,
    /// Orientation relative to the seed: `true` for odd words.
    pub odd: bool,
}

fn cell(x: &[f64; 3]) -> [i64; 3] {
    x.map(|c| (c / FINGERPRINT_GRID).floor() as i64)
}

fn same_tile(a: &GeodesicTriangle, b: &GeodesicTriangle, tol: f64) -> bool {
    a.vertices
        .iter()
        .all(|v| b.vertices.iter().any(|w| dot(&sub(v, w), &sub(v, w)).sqrt() <= tol))
}

/// Breadth-first orbit of `seed` under reflection words of length at most
/// `depth`, deduplicated by vertex sets at [`FINGERPRINT_GRID`] resolution.
pub fn enumerate_tiles(seed: &GeodesicTriangle, depth: usize) -> Result<Vec<Tile>> {
    enumerate_tiles_limited(seed, depth, DEFAULT_TILE_LIMIT)
}

pub fn enumerate_tiles_limited(seed: &GeodesicTriangle, depth: usize, limit: usize) -> Result<Vec<Tile>> {
    let mut tiles: Vec<Tile> = vec![Tile { triangle: seed.clone(), depth: 0, odd: false }];
    // Tiles are bucketed by the grid cell of their centroid; lookups scan the
    // neighbouring cells and compare vertex sets.
    let mut index: HashMap<[i64; 3], Vec<usize>> = HashMap::new();
    let centroid = |t: &GeodesicTriangle| {
        let v = &t.vertices;
        [0, 1, 2].map(|i| (v[0][i] + v[1][i] + v[2][i]) / 3.0)
    };
    index.entry(cell(&centroid(seed))).or_default().push(0);
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        if tiles[i].depth >= depth {
            continue;
        }
        for k in 0..3 {
            let next = tiles[i].triangle.reflect(k);
            if next.vertices.iter().flatten().any(|x| !x.is_finite()) {
                return Err(Error::InvalidConfig("reflection produced a point at infinity".into()));
            }
            if next.diameter() < 10.0 * FINGERPRINT_GRID {
                return Err(Error::ResourceLimit {
                    what: format!("tile size at depth {} below fingerprint resolution", tiles[i].depth + 1),
                    limit: depth,
                });
            }
            let c = cell(&centroid(&next));
            let mut seen = false;
            'scan: for dx in -1..=1 {
                for dy in -1..=1 {
                    for dz in -1..=1 {
                        if let Some(bucket) = index.get(&[c[0] + dx, c[1] + dy, c[2] + dz]) {
                            if bucket.iter().any(|&j| same_tile(&tiles[j].triangle, &next, FINGERPRINT_GRID)) {
                                seen = true;
                                break 'scan;
                            }
                        }
                    }
                }
            }
            if seen {
                continue;
            }
            if tiles.len() >= limit {
                return Err(Error::ResourceLimit { what: "tile count".into(), limit });
            }
            let id = tiles.len();
            tiles.push(Tile { triangle: next, depth: tiles[i].depth + 1, odd: !tiles[i].odd });
            index.entry(c).or_default().push(id);
            queue.push_back(id);
        }
    }
    Ok(tiles)
}
