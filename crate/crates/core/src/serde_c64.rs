//! JSON encoding of complex numbers as `[re, im]` pairs.
//!
//! On input a bare number, a rational string such as `"3/4"` or a pair whose
//! parts are numbers or rational strings are all accepted.

use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Deserialize)]
#[serde(untagged)]
enum Part {
    Num(f64),
    Text(String),
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Repr {
    Pair([Part; 2]),
    Single(Part),
}

pub(crate) fn parse_real(text: &str) -> Result<f64, String> {
    let t = text.trim();
    match t.split_once('/') {
        Some((n, d)) => {
            let n: f64 = n.trim().parse().map_err(|_| format!("bad numerator in '{t}'"))?;
            let d: f64 = d.trim().parse().map_err(|_| format!("bad denominator in '{t}'"))?;
            if d == 0.0 {
                return Err(format!("zero denominator in '{t}'"));
            }
            Ok(n / d)
        }
        None => t.parse().map_err(|_| format!("bad number '{t}'")),
    }
}

fn part(p: &Part) -> Result<f64, String> {
    match p {
        Part::Num(x) => Ok(*x),
        Part::Text(s) => parse_real(s),
    }
}

fn decode(r: Repr) -> Result<Complex64, String> {
    match r {
        Repr::Pair([a, b]) => Ok(Complex64::new(part(&a)?, part(&b)?)),
        Repr::Single(a) => Ok(Complex64::new(part(&a)?, 0.0)),
    }
}

pub fn serialize<S: Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
    [z.re, z.im].serialize(s)
}

pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Complex64, D::Error> {
    decode(Repr::deserialize(d)?).map_err(D::Error::custom)
}

pub mod vec {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[Complex64], s: S) -> Result<S::Ok, S::Error> {
        let pairs: Vec<[f64; 2]> = v.iter().map(|z| [z.re, z.im]).collect();
        pairs.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Complex64>, D::Error> {
        let raw = Vec::<Repr>::deserialize(d)?;
        raw.into_iter().map(|r| decode(r).map_err(D::Error::custom)).collect()
    }
}

pub mod matrix {
    use super::*;

    pub fn serialize<S: Serializer>(rows: &[Vec<Complex64>], s: S) -> Result<S::Ok, S::Error> {
        let out: Vec<Vec<[f64; 2]>> =
            rows.iter().map(|r| r.iter().map(|z| [z.re, z.im]).collect()).collect();
        out.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<Complex64>>, D::Error> {
        let raw = Vec::<Vec<Repr>>::deserialize(d)?;
        raw.into_iter()
            .map(|row| row.into_iter().map(|r| decode(r).map_err(D::Error::custom)).collect())
            .collect()
    }
}
