//! Exact projective geometry of P^2 over the Gaussian rationals `Q(i)`.

use std::collections::HashSet;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex64 as C64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A Gaussian rational `re + im i`, always stored reduced.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct GaussRat {
    pub re: BigRational,
    pub im: BigRational,
}

impl GaussRat {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        GaussRat { re, im }
    }

    pub fn int(n: i64) -> Self {
        GaussRat { re: BigRational::from_integer(n.into()), im: BigRational::zero() }
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        GaussRat { re: BigRational::new(num.into(), den.into()), im: BigRational::zero() }
    }

    pub fn gauss(re: i64, im: i64) -> Self {
        GaussRat { re: BigRational::from_integer(re.into()), im: BigRational::from_integer(im.into()) }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::int(1)
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        GaussRat { re: self.re.clone(), im: -self.im.clone() }
    }

    pub fn norm_sqr(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn inv(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::Singular);
        }
        let n = self.norm_sqr();
        Ok(GaussRat { re: &self.re / &n, im: -&self.im / &n })
    }

    pub fn div(&self, o: &GaussRat) -> Result<Self> {
        Ok(self * &o.inv()?)
    }

    pub fn to_c64(&self) -> C64 {
        C64::new(self.re.to_f64().unwrap_or(f64::NAN), self.im.to_f64().unwrap_or(f64::NAN))
    }

    /// Largest bit length among the numerators and denominators.
    pub fn bits(&self) -> u64 {
        [self.re.numer(), self.re.denom(), self.im.numer(), self.im.denom()].iter().map(|x| x.bits()).max().unwrap_or(0)
    }
}

impl Add for &GaussRat {
    type Output = GaussRat;
    fn add(self, o: &GaussRat) -> GaussRat {
        GaussRat { re: &self.re + &o.re, im: &self.im + &o.im }
    }
}

impl Sub for &GaussRat {
    type Output = GaussRat;
    fn sub(self, o: &GaussRat) -> GaussRat {
        GaussRat { re: &self.re - &o.re, im: &self.im - &o.im }
    }
}

impl Mul for &GaussRat {
    type Output = GaussRat;
    fn mul(self, o: &GaussRat) -> GaussRat {
        GaussRat { re: &self.re * &o.re - &self.im * &o.im, im: &self.re * &o.im + &self.im * &o.re }
    }
}

impl Neg for &GaussRat {
    type Output = GaussRat;
    fn neg(self) -> GaussRat {
        GaussRat { re: -&self.re, im: -&self.im }
    }
}

fn fmt_rat(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for GaussRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            return write!(f, "{}", fmt_rat(&self.re));
        }
        let im = match fmt_rat(&self.im.abs()).as_str() {
            "1" => "i".to_string(),
            s => format!("{s}i"),
        };
        match (self.re.is_zero(), self.im.is_negative()) {
            (true, false) => write!(f, "{im}"),
            (true, true) => write!(f, "-{im}"),
            (false, neg) => write!(f, "{}{}{im}", fmt_rat(&self.re), if neg { "-" } else { "+" }),
        }
    }
}

fn parse_rational(s: &str) -> Result<BigRational> {
    let bad = || Error::Parse(format!("bad rational '{s}'"));
    if let Some((n, d)) = s.split_once('/') {
        let n = BigInt::from_str(n).map_err(|_| bad())?;
        let d = BigInt::from_str(d).map_err(|_| bad())?;
        if d.is_zero() {
            return Err(Error::Parse(format!("zero denominator in '{s}'")));
        }
        return Ok(BigRational::new(n, d));
    }
    if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let neg = int.starts_with('-');
        let digits = format!("{}{frac}", int.trim_start_matches(['-', '+']));
        let n = BigInt::from_str(&digits).map_err(|_| bad())?;
        let d = num_traits::pow(BigInt::from(10), frac.len());
        let r = BigRational::new(n, d);
        return Ok(if neg { -r } else { r });
    }
    Ok(BigRational::from_integer(BigInt::from_str(s).map_err(|_| bad())?))
}

impl FromStr for GaussRat {
    type Err = Error;

    /// Accepts `"3"`, `"-2/5"`, `"0.25"`, `"2i"`, `"-i"`, `"1/2+3/4i"`, `"1-i"`.
    fn from_str(text: &str) -> Result<Self> {
        let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        if s.is_empty() {
            return Err(Error::Parse("empty number".into()));
        }
        let Some(body) = s.strip_suffix('i') else {
            return Ok(GaussRat { re: parse_rational(&s)?, im: BigRational::zero() });
        };
        let split = body.char_indices().rev().find(|&(i, c)| i > 0 && (c == '+' || c == '-')).map(|(i, _)| i);
        let (re, im) = match split {
            Some(i) => (&body[..i], &body[i..]),
            None => ("", body),
        };
        let im = match im {
            "" | "+" => BigRational::one(),
            "-" => -BigRational::one(),
            x => parse_rational(x.trim_start_matches('+'))?,
        };
        let re = if re.is_empty() { BigRational::zero() } else { parse_rational(re)? };
        Ok(GaussRat { re, im })
    }
}

impl Serialize for GaussRat {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for GaussRat {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Int(n) => Ok(GaussRat::int(n)),
            Raw::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

pub type Vec3 = [GaussRat; 3];

/// Bilinear cross product: the line through two points, or the meet of two lines.
pub fn cross(a: &Vec3, b: &Vec3) -> Vec3 {
    [&(&a[1] * &b[2]) - &(&a[2] * &b[1]), &(&a[2] * &b[0]) - &(&a[0] * &b[2]), &(&a[0] * &b[1]) - &(&a[1] * &b[0])]
}

pub fn dot(a: &Vec3, b: &Vec3) -> GaussRat {
    &(&(&a[0] * &b[0]) + &(&a[1] * &b[1])) + &(&a[2] * &b[2])
}

pub fn det3(a: &Vec3, b: &Vec3, c: &Vec3) -> GaussRat {
    dot(a, &cross(b, c))
}

/// A point of P^2 (or a line, as a point of the dual plane) with exact
/// coordinates, scaled so that the first nonzero coordinate is 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ExactPoint(Vec3);

impl ExactPoint {
    pub fn new(v: Vec3) -> Result<Self> {
        let lead = v.iter().find(|z| !z.is_zero()).ok_or(Error::ZeroVector)?.inv()?;
        Ok(ExactPoint([&v[0] * &lead, &v[1] * &lead, &v[2] * &lead]))
    }

    /// The point `[x : y : 1]`.
    pub fn affine(x: GaussRat, y: GaussRat) -> Self {
        ExactPoint::new([x, y, GaussRat::one()]).expect("third coordinate is 1")
    }

    pub fn ints(x: i64, y: i64) -> Self {
        Self::affine(GaussRat::int(x), GaussRat::int(y))
    }

    pub fn coords(&self) -> &Vec3 {
        &self.0
    }

    /// Affine coordinates `(x/z, y/z)`, when `z != 0`.
    pub fn to_affine(&self) -> Option<(GaussRat, GaussRat)> {
        let z = self.0[2].inv().ok()?;
        Some((&self.0[0] * &z, &self.0[1] * &z))
    }

    pub fn to_c64(&self) -> [C64; 3] {
        [self.0[0].to_c64(), self.0[1].to_c64(), self.0[2].to_c64()]
    }

    pub fn is_real(&self) -> bool {
        self.0.iter().all(GaussRat::is_real)
    }

    /// Join of two points or meet of two lines; `None` when they coincide.
    pub fn join(&self, o: &ExactPoint) -> Option<ExactPoint> {
        ExactPoint::new(cross(&self.0, &o.0)).ok()
    }

    /// Point-line incidence.
    pub fn incident(&self, line: &ExactPoint) -> bool {
        dot(&self.0, &line.0).is_zero()
    }

    pub fn bits(&self) -> u64 {
        self.0.iter().map(GaussRat::bits).max().unwrap_or(0)
    }
}

impl fmt::Display for ExactPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{} : {} : {}]", self.0[0], self.0[1], self.0[2])
    }
}

impl Serialize for ExactPoint {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

impl<'de> Deserialize<'de> for ExactPoint {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<GaussRat>::deserialize(d)?;
        let v: Vec3 = match v.len() {
            2 => [v[0].clone(), v[1].clone(), GaussRat::one()],
            3 => [v[0].clone(), v[1].clone(), v[2].clone()],
            n => return Err(serde::de::Error::custom(format!("expected 2 or 3 coordinates, got {n}"))),
        };
        ExactPoint::new(v).map_err(serde::de::Error::custom)
    }
}

pub fn collinear(a: &ExactPoint, b: &ExactPoint, c: &ExactPoint) -> bool {
    det3(&a.0, &b.0, &c.0).is_zero()
}

/// A 3x3 matrix over `Q(i)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ExactMatrix(pub [Vec3; 3]);

impl ExactMatrix {
    pub fn identity() -> Self {
        let (o, z) = (GaussRat::one, GaussRat::zero);
        ExactMatrix([[o(), z(), z()], [z(), o(), z()], [z(), z(), o()]])
    }

    pub fn from_ints(rows: [[i64; 3]; 3]) -> Self {
        ExactMatrix(rows.map(|r| r.map(GaussRat::int)))
    }

    pub fn entry(&self, i: usize, j: usize) -> &GaussRat {
        &self.0[i][j]
    }

    pub fn mul(&self, o: &ExactMatrix) -> ExactMatrix {
        let mut out = ExactMatrix::identity();
        for i in 0..3 {
            for j in 0..3 {
                let mut s = GaussRat::zero();
                for k in 0..3 {
                    s = &s + &(&self.0[i][k] * &o.0[k][j]);
                }
                out.0[i][j] = s;
            }
        }
        out
    }

    pub fn transpose(&self) -> ExactMatrix {
        let m = &self.0;
        ExactMatrix(std::array::from_fn(|i| std::array::from_fn(|j| m[j][i].clone())))
    }

    pub fn det(&self) -> GaussRat {
        det3(&self.0[0], &self.0[1], &self.0[2])
    }

    /// Adjugate, a scalar multiple of the inverse.
    pub fn adjugate(&self) -> ExactMatrix {
        let cols = self.transpose().0;
        let c = [cross(&cols[1], &cols[2]), cross(&cols[2], &cols[0]), cross(&cols[0], &cols[1])];
        ExactMatrix(c)
    }

    pub fn is_invertible(&self) -> bool {
        !self.det().is_zero()
    }

    pub fn apply_vec(&self, v: &Vec3) -> Vec3 {
        std::array::from_fn(|i| dot(&self.0[i], v))
    }

    pub fn apply(&self, p: &ExactPoint) -> Result<ExactPoint> {
        ExactPoint::new(self.apply_vec(&p.0))
    }

    /// Image of a line given by its dual coordinates.
    pub fn apply_line(&self, l: &ExactPoint) -> Result<ExactPoint> {
        ExactPoint::new(self.adjugate().transpose().apply_vec(&l.0))
    }

    /// Scaled so that the first nonzero entry in row-major order is 1.
    pub fn canonical(&self) -> Result<ExactMatrix> {
        let lead = self.0.iter().flatten().find(|z| !z.is_zero()).ok_or(Error::Singular)?.inv()?;
        Ok(ExactMatrix(self.0.clone().map(|r| r.map(|z| &z * &lead))))
    }

    /// Equality in PGL(3).
    pub fn proj_eq(&self, o: &ExactMatrix) -> bool {
        matches!((self.canonical(), o.canonical()), (Ok(a), Ok(b)) if a == b)
    }

    pub fn is_scalar(&self) -> bool {
        self.proj_eq(&ExactMatrix::identity())
    }

    pub fn to_c64_rows(&self) -> Vec<Vec<C64>> {
        self.0.iter().map(|r| r.iter().map(GaussRat::to_c64).collect()).collect()
    }
}

/// One linear condition on a projective map `H`.
#[derive(Clone, Debug)]
pub enum Constraint {
    /// `H x` is proportional to `y`.
    Maps(ExactPoint, ExactPoint),
    /// `H x` lies on the line `l`.
    Onto(ExactPoint, ExactPoint),
}

/// The unique projective map satisfying the constraints. Fails with a rank
/// error when the solution space is not one-dimensional, and with a singular
/// error when the solution is not invertible.
pub fn projectivity(constraints: &[Constraint]) -> Result<ExactMatrix> {
    // Unknown h[3 i + j] = H[i][j]; (H x)_i = sum_j h[3 i + j] x_j.
    let hx_coeff = |x: &Vec3, i: usize| -> Vec<GaussRat> {
        let mut row = vec![GaussRat::zero(); 9];
        for j in 0..3 {
            row[3 * i + j] = x[j].clone();
        }
        row
    };
    let mut rows: Vec<Vec<GaussRat>> = Vec::new();
    for c in constraints {
        match c {
            Constraint::Maps(x, y) => {
                // (H x) cross y = 0.
                for (a, b) in [(1usize, 2usize), (2, 0), (0, 1)] {
                    let ra = hx_coeff(&x.0, a);
                    let rb = hx_coeff(&x.0, b);
                    rows.push(ra.iter().zip(&rb).map(|(u, v)| &(u * &y.0[b]) - &(v * &y.0[a])).collect());
                }
            }
            Constraint::Onto(x, l) => {
                let mut row = vec![GaussRat::zero(); 9];
                for i in 0..3 {
                    for (k, z) in hx_coeff(&x.0, i).into_iter().enumerate() {
                        row[k] = &row[k] + &(&z * &l.0[i]);
                    }
                }
                rows.push(row);
            }
        }
    }
    let null = nullspace(rows, 9);
    if null.len() != 1 {
        return Err(Error::Rank { dim: null.len() });
    }
    let h = &null[0];
    let m = ExactMatrix(std::array::from_fn(|i| std::array::from_fn(|j| h[3 * i + j].clone())));
    if !m.is_invertible() {
        return Err(Error::Singular);
    }
    m.canonical()
}

/// Basis of the right null space of a matrix with `n` columns.
fn nullspace(mut rows: Vec<Vec<GaussRat>>, n: usize) -> Vec<Vec<GaussRat>> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..n {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][col].is_zero()) else { continue };
        rows.swap(r, p);
        let inv = rows[r][col].inv().expect("pivot is nonzero");
        rows[r] = rows[r].iter().map(|z| z * &inv).collect();
        for i in 0..rows.len() {
            if i != r && !rows[i][col].is_zero() {
                let f = rows[i][col].clone();
                let pivot_row = rows[r].clone();
                for (a, b) in rows[i].iter_mut().zip(&pivot_row) {
                    *a = &*a - &(&f * b);
                }
            }
        }
        pivots.push(col);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    (0..n)
        .filter(|c| !pivots.contains(c))
        .map(|free| {
            let mut v = vec![GaussRat::zero(); n];
            v[free] = GaussRat::one();
            for (i, &pc) in pivots.iter().enumerate() {
                v[pc] = -&rows[i][free];
            }
            v
        })
        .collect()
}

/// Distinct elements of the group generated by `gens` with word length at
/// most `max_len`, in breadth-first order, compared exactly in PGL(3).
pub fn enumerate_group_exact(gens: &[ExactMatrix], max_len: usize, limit: usize) -> Result<Vec<ExactMatrix>> {
    let mut letters = Vec::new();
    for g in gens {
        if !g.is_invertible() {
            return Err(Error::Singular);
        }
        letters.push(g.canonical()?);
        letters.push(g.adjugate().canonical()?);
    }
    let mut seen = HashSet::new();
    let mut all = vec![ExactMatrix::identity()];
    seen.insert(all[0].clone());
    let mut start = 0;
    for _ in 0..max_len {
        let end = all.len();
        for w in start..end {
            for l in &letters {
                let g = all[w].mul(l).canonical()?;
                if seen.insert(g.clone()) {
                    if all.len() >= limit {
                        return Err(Error::ResourceLimit { what: "exact group elements".into(), limit });
                    }
                    all.push(g);
                }
            }
        }
        if all.len() == end {
            break;
        }
        start = end;
    }
    Ok(all)
}
