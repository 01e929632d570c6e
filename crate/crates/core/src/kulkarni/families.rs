use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::closed::ClosedFormLimitSet;
use crate::cloud::Layers;
use crate::error::{Error, Result};
use crate::group::GeneratorSet;
use crate::projective::{ProjLine, ProjMap, ProjPoint};
use crate::schottky::random_vec;

/// Points whose imaginary part is below this are on the boundary of the
/// half-plane components and are not classified.
const SIGN_TOL: f64 = 1e-12;

fn sign(x: f64) -> Option<i8> {
    if x > SIGN_TOL {
        Some(1)
    } else if x < -SIGN_TOL {
        Some(-1)
    } else {
        None
    }
}

type M2 = [[i64; 2]; 2];

fn mul2(a: &M2, b: &M2) -> Result<M2> {
    let mut out = [[0i64; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            let mut s = 0i64;
            for (k, bk) in b.iter().enumerate() {
                s = a[i][k]
                    .checked_mul(bk[j])
                    .and_then(|t| s.checked_add(t))
                    .ok_or_else(|| Error::Unsupported("integer overflow in matrix power".into()))?;
            }
            out[i][j] = s;
        }
    }
    Ok(out)
}

fn pow2(a: &M2, k: i64) -> Result<M2> {
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    let base = if k >= 0 { *a } else { [[det * a[1][1], -det * a[0][1]], [-det * a[1][0], det * a[0][0]]] };
    let mut out = [[1, 0], [0, 1]];
    for _ in 0..k.unsigned_abs() {
        out = mul2(&out, &base)?;
    }
    Ok(out)
}

/// Eigen-adapted affine coordinates `w = P^-1 (z1, z2) / z3` in which a
/// hyperbolic `A` is diagonal; the complement of the limit set is the union
/// of the four products of half-planes `Im w1 != 0`, `Im w2 != 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToralOmega {
    pub eigenvalues: [f64; 2],
    pub p_inv: [[f64; 2]; 2],
}

impl ToralOmega {
    pub fn coords(&self, p: &ProjPoint) -> Option<[C64; 2]> {
        let z = p.coords();
        if z[2].norm() < 1e-12 {
            return None;
        }
        let (x, y) = (z[0] / z[2], z[1] / z[2]);
        Some([x * self.p_inv[0][0] + y * self.p_inv[0][1], x * self.p_inv[1][0] + y * self.p_inv[1][1]])
    }

    /// Signs of `(Im w1, Im w2)`, or `None` off the four components.
    pub fn component(&self, p: &ProjPoint) -> Option<[i8; 2]> {
        let w = self.coords(p)?;
        Some([sign(w[0].im)?, sign(w[1].im)?])
    }

    /// Sign change of each coordinate under a generator with linear part `A^k`.
    pub fn step_sign(&self, k: i64) -> [i8; 2] {
        let s = |m: f64| if m < 0.0 && k % 2 != 0 { -1 } else { 1 };
        [s(self.eigenvalues[0]), s(self.eigenvalues[1])]
    }
}

#[derive(Clone, Debug)]
pub struct ToralFamily {
    pub a: M2,
    pub generators: GeneratorSet,
    /// Power of `A` in each generator.
    pub powers: Vec<i64>,
    pub omega: ToralOmega,
    /// Representative lines of the limit set: `w1 = 0`, `w1 = 1`, `w2 = 0`,
    /// `w2 = 1` and the line at infinity.
    pub closed: ClosedFormLimitSet,
}

/// Group of affine maps `x -> A^k x + b` of C^2, extended to P^2, for `k` in
/// `ks` and integer `b` in `bs`.
pub fn toral_family(a: M2, ks: &[i64], bs: &[[i64; 2]]) -> Result<ToralFamily> {
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    if det.abs() != 1 {
        return Err(Error::NotUnimodular { det });
    }
    let tr = a[0][0] + a[1][1];
    if tr.abs() <= 2 {
        return Err(Error::NotHyperbolic { trace: tr });
    }
    let disc = ((tr * tr - 4 * det) as f64).sqrt();
    let mu = [(tr as f64 + disc) / 2.0, (tr as f64 - disc) / 2.0];
    let vec_for = |m: f64| -> [f64; 2] {
        if a[0][1] != 0 {
            [a[0][1] as f64, m - a[0][0] as f64]
        } else {
            [m - a[1][1] as f64, a[1][0] as f64]
        }
    };
    let (v1, v2) = (vec_for(mu[0]), vec_for(mu[1]));
    let pdet = v1[0] * v2[1] - v2[0] * v1[1];
    let p_inv = [[v2[1] / pdet, -v2[0] / pdet], [-v1[1] / pdet, v1[0] / pdet]];
    let omega = ToralOmega { eigenvalues: mu, p_inv };

    let r = |x: i64| C64::new(x as f64, 0.0);
    let mut maps = Vec::new();
    let mut labels = Vec::new();
    let mut powers = Vec::new();
    for &k in ks {
        let ak = pow2(&a, k)?;
        for b in bs {
            if k == 0 && b == &[0, 0] {
                continue;
            }
            maps.push(ProjMap::from_rows(&[
                vec![r(ak[0][0]), r(ak[0][1]), r(b[0])],
                vec![r(ak[1][0]), r(ak[1][1]), r(b[1])],
                vec![r(0), r(0), r(1)],
            ])?);
            labels.push(format!("A^{k}+({},{})", b[0], b[1]));
            powers.push(k);
        }
    }
    let generators = GeneratorSet::new(2, maps, labels)?;

    let mut closed = ClosedFormLimitSet::new(2);
    closed.parametrized = true;
    for row in 0..2 {
        for t in [0.0, 1.0] {
            let form = vec![C64::new(p_inv[row][0], 0.0), C64::new(p_inv[row][1], 0.0), C64::new(-t, 0.0)];
            closed.add_line(ProjLine::from_form(form)?, Layers::L2);
        }
    }
    closed.add_line(ProjLine::from_form(vec![r(0), r(0), r(1)])?, Layers::L2);
    Ok(ToralFamily { a, generators, powers, omega, closed })
}

impl ToralFamily {
    /// Random reduced walks from random points of the four components,
    /// checking the component predicted by the eigenvalue signs.
    pub fn sign_check(&self, depth: usize, walks: usize, seed: u64) -> Result<SignCheck> {
        let letters = self.generators.letters();
        let steps: Vec<Vec<i8>> = letters.iter().map(|l| self.omega.step_sign(self.powers[l.generator]).to_vec()).collect();
        orbit_sign_check(
            &self.generators,
            &|p| self.omega.component(p).map(|s| s.to_vec()),
            &steps,
            depth,
            walks,
            seed,
        )
    }
}

/// Half-plane descriptor in the first affine coordinate: the complement of
/// the limit set is `{Im(z1/z3) != 0}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InoueOmega;

impl InoueOmega {
    pub fn component(&self, p: &ProjPoint) -> Option<i8> {
        let z = p.coords();
        if z[2].norm() < 1e-12 {
            return None;
        }
        sign((z[0] / z[2]).im)
    }
}

#[derive(Clone, Debug)]
pub struct InoueFamily {
    pub m: [[i64; 3]; 3],
    /// Coefficients `[c0, c1, c2]` of `x^3 + c2 x^2 + c1 x + c0`.
    pub char_poly: [i64; 3],
    pub alpha: f64,
    /// Complex eigenvalue with positive imaginary part.
    pub beta: C64,
    /// Real eigenvector for `alpha`, complex eigenvector for `beta`.
    pub a: [f64; 3],
    pub b: [C64; 3],
    /// `diag(alpha, beta, 1)` followed by the three translations by `(a_i, b_i)`.
    pub generators: GeneratorSet,
    pub omega: InoueOmega,
}

fn null_vector(m: &[[C64; 3]; 3]) -> [C64; 3] {
    let cross = |r: &[C64; 3], s: &[C64; 3]| {
        [r[1] * s[2] - r[2] * s[1], r[2] * s[0] - r[0] * s[2], r[0] * s[1] - r[1] * s[0]]
    };
    let cands = [cross(&m[0], &m[1]), cross(&m[0], &m[2]), cross(&m[1], &m[2])];
    let norm = |v: &[C64; 3]| v.iter().map(|z| z.norm_sqr()).sum::<f64>();
    let best = cands.iter().max_by(|x, y| norm(x).total_cmp(&norm(y))).copied().unwrap_or(cands[0]);
    let n = norm(&best).sqrt();
    [best[0] / n, best[1] / n, best[2] / n]
}

/// Generators of the Inoue group attached to an integer unimodular matrix with
/// one real eigenvalue `alpha > 1` and a pair of complex eigenvalues.
pub fn inoue_family(m: [[i64; 3]; 3]) -> Result<InoueFamily> {
    let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    if det.abs() != 1 {
        return Err(Error::NotUnimodular { det });
    }
    let tr = m[0][0] + m[1][1] + m[2][2];
    let minors = (m[0][0] * m[1][1] - m[0][1] * m[1][0])
        + (m[0][0] * m[2][2] - m[0][2] * m[2][0])
        + (m[1][1] * m[2][2] - m[1][2] * m[2][1]);
    let (b, c, d) = (-tr, minors, -det);
    let (bi, ci, di) = (b as i128, c as i128, d as i128);
    let disc = 18 * bi * ci * di - 4 * bi.pow(3) * di + bi * bi * ci * ci - 4 * ci.pow(3) - 27 * di * di;
    if disc >= 0 {
        return Err(Error::SpectrumType(format!("discriminant {disc} >= 0: no complex eigenvalue pair")));
    }
    let (bf, cf, df) = (b as f64, c as f64, d as f64);
    let p = cf - bf * bf / 3.0;
    let q = 2.0 * bf.powi(3) / 27.0 - bf * cf / 3.0 + df;
    let root = (q * q / 4.0 + p.powi(3) / 27.0).sqrt();
    let mut alpha = (-q / 2.0 + root).cbrt() + (-q / 2.0 - root).cbrt() - bf / 3.0;
    for _ in 0..4 {
        let f = ((alpha + bf) * alpha + cf) * alpha + df;
        let df_ = (3.0 * alpha + 2.0 * bf) * alpha + cf;
        if df_ != 0.0 {
            alpha -= f / df_;
        }
    }
    if alpha <= 1.0 {
        return Err(Error::SpectrumType(format!("real eigenvalue {alpha} is not greater than 1")));
    }
    let s = bf + alpha;
    let t = cf + alpha * s;
    let beta = C64::new(-s / 2.0, (4.0 * t - s * s).max(0.0).sqrt() / 2.0);

    let shifted = |l: C64| {
        let mut out = [[C64::new(0.0, 0.0); 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                out[i][j] = C64::new(m[i][j] as f64, 0.0) - if i == j { l } else { C64::new(0.0, 0.0) };
            }
        }
        out
    };
    let va = null_vector(&shifted(C64::new(alpha, 0.0)));
    let av = [va[0].re, va[1].re, va[2].re];
    let bv = null_vector(&shifted(beta));

    let zero = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    let mut maps = vec![ProjMap::diagonal(&[C64::new(alpha, 0.0), beta, one])?];
    let mut labels = vec!["g0".to_string()];
    for i in 0..3 {
        maps.push(ProjMap::from_rows(&[
            vec![one, zero, C64::new(av[i], 0.0)],
            vec![zero, one, bv[i]],
            vec![zero, zero, one],
        ])?);
        labels.push(format!("g{}", i + 1));
    }
    let generators = GeneratorSet::new(2, maps, labels)?;
    Ok(InoueFamily { m, char_poly: [d, c, b], alpha, beta, a: av, b: bv, generators, omega: InoueOmega })
}

impl InoueFamily {
    pub fn sign_check(&self, depth: usize, walks: usize, seed: u64) -> Result<SignCheck> {
        let steps = vec![vec![1i8]; 2 * self.generators.generators.len()];
        orbit_sign_check(&self.generators, &|p| self.omega.component(p).map(|s| vec![s]), &steps, depth, walks, seed)
    }
}

/// Outcome of following random orbits through sign-labelled components.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignCheck {
    /// Orbit steps compared.
    pub steps: usize,
    /// Steps landing in a component other than the predicted one.
    pub flips: usize,
    /// Steps whose image could not be classified (boundary or infinity).
    pub skipped: usize,
}

/// Follows `walks` random reduced words of length `depth` from random start
/// points, predicting each step's component as the previous one multiplied
/// by `steps[letter]`.
pub fn orbit_sign_check(
    gens: &GeneratorSet,
    component: &dyn Fn(&ProjPoint) -> Option<Vec<i8>>,
    steps: &[Vec<i8>],
    depth: usize,
    walks: usize,
    seed: u64,
) -> Result<SignCheck> {
    let letters = gens.letters();
    if letters.is_empty() {
        return Ok(SignCheck::default());
    }
    if steps.len() != letters.len() {
        return Err(Error::BadShape(format!("{} step signs for {} letters", steps.len(), letters.len())));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = SignCheck::default();
    for _ in 0..walks {
        let (mut x, mut comp) = loop {
            let p = ProjPoint::new(random_vec(&mut rng, gens.dim + 1))?;
            if let Some(c) = component(&p) {
                break (p, c);
            }
        };
        let mut last: Option<usize> = None;
        for _ in 0..depth {
            let li = loop {
                let li = rng.gen_range(0..letters.len());
                if last.is_none_or(|l| letters[l].inverse != li) {
                    break li;
                }
            };
            last = Some(li);
            x = letters[li].map.apply(&x)?;
            out.steps += 1;
            let predicted: Vec<i8> = comp.iter().zip(&steps[li]).map(|(a, b)| a * b).collect();
            match component(&x) {
                Some(c) => {
                    if c != predicted {
                        out.flips += 1;
                    }
                    comp = c;
                }
                None => {
                    out.skipped += 1;
                    comp = predicted;
                }
            }
        }
    }
    Ok(out)
}
