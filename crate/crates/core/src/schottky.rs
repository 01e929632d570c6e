//! Classical Schottky groups on P^1 and mirror-swap groups on P^3 built
//! from pairs of disjoint projective lines.

use nalgebra::{DMatrix, Matrix2};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cloud::{dedup_points, PointCloud};
use crate::error::{Error, Result};
use crate::group::{reduced_orbit, reduced_words, GeneratorSet, Word};
use crate::moebius::{finite, CircleOrLine, Moebius, MoebiusClass};
use crate::projective::{complement, ProjLine, ProjMap, ProjPoint};
use crate::serde_c64;

/// Gaps within this distance of zero are reported as tangencies.
pub const KISSING_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Disc {
    #[serde(with = "serde_c64")]
    pub center: C64,
    pub radius: f64,
}

impl Disc {
    pub fn new(center: C64, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidConfig(format!("disc radius must be positive, got {radius}")));
        }
        Ok(Disc { center, radius })
    }

    pub fn boundary(&self) -> CircleOrLine {
        CircleOrLine::Circle { center: self.center, radius: self.radius }
    }

    /// Euclidean gap between the closures; negative when they overlap.
    pub fn gap(&self, o: &Disc) -> f64 {
        (self.center - o.center).norm() - self.radius - o.radius
    }

    pub fn contains(&self, z: C64) -> bool {
        (z - self.center).norm() < self.radius
    }
}

/// `z -> c_S + r_R r_S / (z - c_R)`: sends the boundary of `r` onto the
/// boundary of `s` and the exterior of `r` into the interior of `s`.
pub fn standard_pairing(r: &Disc, s: &Disc) -> Result<Moebius> {
    if r.gap(s) <= KISSING_TOL {
        return Err(Error::DiscsOverlap { first: 0, second: 1 });
    }
    let one = C64::new(1.0, 0.0);
    Moebius::new(s.center, C64::new(r.radius * s.radius, 0.0) - s.center * r.center, one, -r.center)
}

/// Discs `R_1..R_g`, `S_1..S_g` and maps with `γ_j(R_j) = complement of closure(S_j)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SchottkyConfigP1 {
    pub r_discs: Vec<Disc>,
    pub s_discs: Vec<Disc>,
    pub maps: Vec<Moebius>,
}

impl SchottkyConfigP1 {
    /// Builds each map with [`standard_pairing`].
    pub fn from_discs(r_discs: Vec<Disc>, s_discs: Vec<Disc>) -> Result<Self> {
        if r_discs.len() != s_discs.len() {
            return Err(Error::InvalidConfig("need as many R discs as S discs".into()));
        }
        let maps = r_discs
            .iter()
            .zip(&s_discs)
            .enumerate()
            .map(|(j, (r, s))| {
                standard_pairing(r, s).map_err(|_| Error::DiscsOverlap { first: j, second: j + r_discs.len() })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SchottkyConfigP1 { r_discs, s_discs, maps })
    }

    /// `2g` discs of equal radius centred at the `2g`-th roots of unity, with
    /// `R_j` opposite `S_j`.
    pub fn standard(g: usize, radius: f64) -> Result<Self> {
        if g < 2 {
            return Err(Error::InvalidConfig(format!("genus must be at least 2, got {g}")));
        }
        let at = |k: usize| C64::from_polar(1.0, std::f64::consts::PI * k as f64 / g as f64);
        let r = (0..g).map(|j| Disc::new(at(j), radius)).collect::<Result<Vec<_>>>()?;
        let s = (0..g).map(|j| Disc::new(at(j + g), radius)).collect::<Result<Vec<_>>>()?;
        // Pairing maps are built from the discs even when they touch.
        let one = C64::new(1.0, 0.0);
        let maps = r
            .iter()
            .zip(&s)
            .map(|(r, s)| {
                Moebius::new(s.center, C64::new(r.radius * s.radius, 0.0) - s.center * r.center, one, -r.center)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SchottkyConfigP1 { r_discs: r, s_discs: s, maps })
    }

    pub fn genus(&self) -> usize {
        self.maps.len()
    }

    /// All discs in the order `R_1..R_g, S_1..S_g`.
    pub fn discs(&self) -> Vec<Disc> {
        self.r_discs.iter().chain(&self.s_discs).copied().collect()
    }

    pub fn disc_name(&self, i: usize) -> String {
        let g = self.genus();
        if i < g {
            format!("R{}", i + 1)
        } else {
            format!("S{}", i - g + 1)
        }
    }

    pub fn generator_set(&self) -> GeneratorSet {
        GeneratorSet {
            dim: 1,
            generators: self.maps.iter().map(|m| m.to_projmap()).collect(),
            labels: (1..=self.genus()).map(|j| format!("γ{j}")).collect(),
        }
    }

    /// Disc that the letter (generator `j`, possibly inverted) maps the
    /// outside of its source disc into.
    fn target(&self, generator: usize, inverted: bool) -> Disc {
        if inverted {
            self.r_discs[generator]
        } else {
            self.s_discs[generator]
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Valid,
    Kissing,
    Invalid,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SchottkyReport {
    pub verdict: Verdict,
    /// Pairs of discs whose closures overlap.
    pub overlaps: Vec<(String, String)>,
    /// Pairs of tangent discs.
    pub tangencies: Vec<(String, String)>,
    /// Human-readable description of every failed check.
    pub issues: Vec<String>,
}

/// Checks disc disjointness, the boundary pairing and its orientation.
pub fn validate_schottky_p1(cfg: &SchottkyConfigP1) -> Result<SchottkyReport> {
    let g = cfg.genus();
    if g < 2 {
        return Err(Error::InvalidConfig(format!("genus must be at least 2, got {g}")));
    }
    if cfg.r_discs.len() != g || cfg.s_discs.len() != g {
        return Err(Error::InvalidConfig("need g discs R, g discs S and g maps".into()));
    }
    let discs = cfg.discs();
    let mut rep = SchottkyReport { verdict: Verdict::Valid, overlaps: vec![], tangencies: vec![], issues: vec![] };
    for i in 0..discs.len() {
        for j in i + 1..discs.len() {
            let gap = discs[i].gap(&discs[j]);
            let pair = (cfg.disc_name(i), cfg.disc_name(j));
            if gap < -KISSING_TOL {
                rep.issues.push(format!("discs {} and {} overlap (gap {gap:e})", pair.0, pair.1));
                rep.overlaps.push(pair);
            } else if gap <= KISSING_TOL {
                rep.tangencies.push(pair);
            }
        }
    }
    for j in 0..g {
        let (r, s, m) = (cfg.r_discs[j], cfg.s_discs[j], cfg.maps[j]);
        match m.map_circle(&r.boundary())? {
            CircleOrLine::Circle { center, radius } => {
                let err = (center - s.center).norm().max((radius - s.radius).abs());
                if err > 1e-9 * (1.0 + s.center.norm() + s.radius) {
                    rep.issues.push(format!("γ{} does not map ∂R{} onto ∂S{} (error {err:e})", j + 1, j + 1, j + 1));
                }
            }
            CircleOrLine::Line { .. } => {
                rep.issues.push(format!("γ{} maps ∂R{} to a line", j + 1, j + 1));
            }
        }
        // The interior of R_j must land outside the closure of S_j.
        let inside_ok = match m.apply_c(r.center) {
            None => true,
            Some(w) => (w - s.center).norm() > s.radius,
        };
        if !inside_ok {
            rep.issues.push(format!("γ{} maps R{} into S{} (wrong orientation)", j + 1, j + 1, j + 1));
        }
    }
    rep.verdict = if !rep.issues.is_empty() {
        Verdict::Invalid
    } else if !rep.tangencies.is_empty() {
        Verdict::Kissing
    } else {
        Verdict::Valid
    };
    Ok(rep)
}

pub const DEFAULT_WORD_LIMIT: usize = 5_000_000;

fn require_usable(cfg: &SchottkyConfigP1) -> Result<()> {
    let rep = validate_schottky_p1(cfg)?;
    if rep.verdict == Verdict::Invalid {
        return Err(Error::InvalidConfig(rep.issues.join("; ")));
    }
    Ok(())
}

/// Attracting fixed points of all nonempty reduced words of length at most
/// `depth`, each with its word, before deduplication.
pub fn limit_words_p1(cfg: &SchottkyConfigP1, depth: usize, max_words: usize) -> Result<Vec<(ProjPoint, Word)>> {
    require_usable(cfg)?;
    let g = cfg.genus();
    let total: f64 = (1..=depth).map(|n| 2.0 * g as f64 * (2.0 * g as f64 - 1.0).powi(n as i32 - 1)).sum();
    if total + 1.0 > max_words as f64 {
        return Err(Error::ResourceLimit { what: format!("{total} reduced words"), limit: max_words });
    }
    let words = reduced_words(&cfg.generator_set().letters(), depth, max_words)?;
    let mut out = Vec::with_capacity(words.len());
    for w in words.into_iter().skip(1) {
        let m = Moebius::from_projmap(&w.map)?;
        let p = match m.classify() {
            MoebiusClass::Loxodromic => m.attracting_fixed_point(),
            MoebiusClass::Parabolic => m.fixed_points().into_iter().next(),
            _ => None,
        };
        if let Some(p) = p {
            out.push((p, w));
        }
    }
    Ok(out)
}

/// Approximate limit set: attracting fixed points of reduced words of
/// length at most `depth`, deduplicated at `1e-9`.
pub fn limit_points_p1(cfg: &SchottkyConfigP1, depth: usize, max_words: usize) -> Result<PointCloud> {
    let pts: Vec<ProjPoint> = limit_words_p1(cfg, depth, max_words)?.into_iter().map(|(p, _)| p).collect();
    PointCloud::new(1, dedup_points(&pts, 1e-9), depth, 1e-9)
}

/// Nested discs along a word `s_1 s_2 ... s_k`: the `i`-th disc is the image
/// of the target disc of `s_i` under `s_1 ... s_{i-1}`.
pub fn nested_discs(cfg: &SchottkyConfigP1, word: &[usize]) -> Result<Vec<Disc>> {
    let letters = cfg.generator_set().letters();
    let mut prefix = Moebius::identity();
    let mut out = Vec::with_capacity(word.len());
    for &li in word {
        let l = &letters[li];
        let target = cfg.target(l.generator, l.inverted);
        match prefix.map_circle(&target.boundary())? {
            CircleOrLine::Circle { center, radius } => out.push(Disc { center, radius }),
            CircleOrLine::Line { .. } => {
                return Err(Error::InvalidConfig("nested disc became a half-plane".into()));
            }
        }
        prefix = prefix.compose(&Moebius::from_projmap(&l.map)?);
    }
    Ok(out)
}

/// A point of the extended plane lies in the open union of the discs.
pub fn in_disc_union(cfg: &SchottkyConfigP1, p: &ProjPoint) -> bool {
    finite(p).is_some_and(|z| cfg.discs().iter().any(|d| d.contains(z)))
}

/// One generator of a mirror group: the line pair, its frame and the map.
#[derive(Clone, Debug)]
pub struct MirrorPair {
    pub line: ProjLine,
    pub partner: ProjLine,
    pub strength: f64,
    /// Columns span `line` (first two) and `partner` (last two).
    pub frame: ProjMap,
    pub map: ProjMap,
}

impl MirrorPair {
    /// Ratio `|(u3,u4)| / |(u1,u2)|` of the frame coordinates `u` of `p`.
    pub fn ratio(&self, p: &ProjPoint) -> f64 {
        let u = self.frame.inverse().apply_vec(p.coords());
        let a = (u[0].norm_sqr() + u[1].norm_sqr()).sqrt();
        let b = (u[2].norm_sqr() + u[3].norm_sqr()).sqrt();
        b / a
    }

    /// Signed side of the mirror `{ratio = 1/λ}`: negative on the side of `line`.
    pub fn side(&self, p: &ProjPoint) -> f64 {
        (self.ratio(p) * self.strength).ln()
    }

    /// A point of the mirror hypersurface built from two unit vectors of C^2.
    pub fn mirror_point(&self, a: [C64; 2], b: [C64; 2]) -> ProjPoint {
        let s = 1.0 / self.strength;
        let u = [a[0], a[1], b[0] * s, b[1] * s];
        ProjPoint::new(self.frame.apply_vec(&u)).expect("frame is invertible")
    }
}

#[derive(Clone, Debug)]
pub struct MirrorConfigP3 {
    pub pairs: Vec<MirrorPair>,
}

/// Smallest singular value of the orthonormal bases of two lines stacked
/// together; zero exactly when the lines meet.
pub fn line_separation(l: &ProjLine, m: &ProjLine) -> f64 {
    let [a, b] = l.basis();
    let [c, d] = m.basis();
    let cols = [a, b, c, d];
    let mat = DMatrix::from_fn(4, 4, |i, j| cols[j].coords()[i]);
    mat.singular_values().iter().copied().fold(f64::INFINITY, f64::min)
}

/// Builds `γ_j = F B F^{-1}` where `F` maps `span(e1,e2)` to `ℓ_j` and
/// `span(e3,e4)` to `ℓ'_j`, and `B = [[0, λU], [λ^{-1} U^{-1}, 0]]` with an
/// optional unitary twist `U` (identity by default). Each `γ_j` is an
/// involution swapping the two sides of its mirror.
pub fn build_mirror_group(
    lines: &[(ProjLine, ProjLine)],
    strengths: &[f64],
    twists: Option<&[Matrix2<C64>]>,
) -> Result<MirrorConfigP3> {
    if lines.len() != strengths.len() {
        return Err(Error::InvalidConfig("one strength per line pair".into()));
    }
    let all: Vec<&ProjLine> = lines.iter().flat_map(|(a, b)| [a, b]).collect();
    if let Some(l) = all.iter().find(|l| l.dim() != 3) {
        return Err(Error::DimensionMismatch { expected: 3, found: l.dim() });
    }
    for i in 0..all.len() {
        for j in i + 1..all.len() {
            if line_separation(all[i], all[j]) < 1e-9 {
                return Err(Error::LinesIntersect { first: i, second: j });
            }
        }
    }
    let zero = C64::new(0.0, 0.0);
    let mut pairs = Vec::new();
    for (j, ((l, lp), &lam)) in lines.iter().zip(strengths).enumerate() {
        if !(lam >= 1.0 && lam.is_finite()) {
            return Err(Error::InvalidConfig(format!("strength {lam} must be at least 1")));
        }
        let [u1, u2] = l.basis();
        let [u3, u4] = lp.basis();
        let cols = [u1, u2, u3, u4];
        let f = DMatrix::from_fn(4, 4, |r, c| cols[c].coords()[r]);
        let u = twists.and_then(|t| t.get(j).copied()).unwrap_or_else(Matrix2::identity);
        let uinv = u.try_inverse().ok_or(Error::Singular)?;
        let mut b = DMatrix::from_element(4, 4, zero);
        for r in 0..2 {
            for c in 0..2 {
                b[(r, c + 2)] = u[(r, c)] * lam;
                b[(r + 2, c)] = uinv[(r, c)] / lam;
            }
        }
        let frame = ProjMap::new(f.clone())?;
        let finv = f.clone().try_inverse().ok_or(Error::Singular)?;
        let map = ProjMap::new(&f * &b * &finv)?;
        pairs.push(MirrorPair { line: l.clone(), partner: lp.clone(), strength: lam, frame, map });
    }
    Ok(MirrorConfigP3 { pairs })
}

impl MirrorConfigP3 {
    pub fn generator_set(&self) -> GeneratorSet {
        GeneratorSet {
            dim: 3,
            generators: self.pairs.iter().map(|p| p.map.clone()).collect(),
            labels: (1..=self.pairs.len()).map(|j| format!("γ{j}")).collect(),
        }
    }

    /// Samples `n` points on every mirror and checks that each mirror lies
    /// strictly on one side of every other mirror. Returns the offending
    /// pair if any.
    pub fn check_mirrors_disjoint(&self, n: usize, seed: u64) -> Option<(usize, usize)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for (i, pi) in self.pairs.iter().enumerate() {
            let pts: Vec<ProjPoint> =
                (0..n).map(|_| pi.mirror_point(random_unit2(&mut rng), random_unit2(&mut rng))).collect();
            for (k, pk) in self.pairs.iter().enumerate() {
                if k == i {
                    continue;
                }
                let signs: Vec<f64> = pts.iter().map(|p| pk.side(p)).collect();
                let all_pos = signs.iter().all(|&s| s > 0.0);
                let all_neg = signs.iter().all(|&s| s < 0.0);
                if !(all_pos || all_neg) {
                    return Some((i, k));
                }
            }
        }
        None
    }

    /// The `2g` lines of the configuration.
    pub fn lines(&self) -> Vec<ProjLine> {
        self.pairs.iter().flat_map(|p| [p.line.clone(), p.partner.clone()]).collect()
    }
}

pub(crate) fn random_unit2(rng: &mut impl Rng) -> [C64; 2] {
    let v = random_vec(rng, 2);
    [v[0], v[1]]
}

/// Uniformly distributed unit vector in C^n.
pub(crate) fn random_vec(rng: &mut impl Rng, n: usize) -> Vec<C64> {
    loop {
        let v: Vec<C64> = (0..n).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        // Rejection from the cube keeps the direction distribution uniform.
        if norm > 1e-3 && norm <= 1.0 {
            return v.into_iter().map(|z| z / norm).collect();
        }
    }
}

/// Deep orbit points of random seeds and their distance to the line set.
#[derive(Clone, Debug)]
pub struct MirrorOrbit {
    pub cloud: PointCloud,
    /// Largest distance from a returned point to the union of the `2g` lines.
    pub epsilon: f64,
    pub warning: Option<String>,
}

/// Orbit points of `samples` seeded random points under every reduced word
/// of length exactly `depth`; at depth 0 these are the seeds.
pub fn orbit_cloud_p3(cfg: &MirrorConfigP3, depth: usize, samples: usize, seed: u64) -> Result<MirrorOrbit> {
    let letters = cfg.generator_set().letters();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pts = Vec::new();
    for _ in 0..samples {
        let x = ProjPoint::new(random_vec(&mut rng, 4))?;
        let orbit = reduced_orbit(&letters, &x, depth, DEFAULT_WORD_LIMIT)?;
        pts.extend(orbit.into_iter().filter(|(_, n)| *n == depth).map(|(p, _)| p));
    }
    let lines = cfg.lines();
    let epsilon = pts
        .iter()
        .map(|p| lines.iter().map(|l| l.distance(p)).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max);
    let weakest = cfg.pairs.iter().map(|p| p.strength).fold(f64::INFINITY, f64::min);
    let warning = (weakest < 1.05).then(|| {
        format!("strength {weakest} is close to 1: contraction is slow and cluster detection is unreliable")
    });
    Ok(MirrorOrbit { cloud: PointCloud::new(3, pts, depth, epsilon)?, epsilon, warning })
}

/// The line pairs used in examples: `ℓ1 = span(e1,e2)`, `ℓ1' = span(e3,e4)`,
/// `ℓ2 = span(e1+e3, e2+ie4)`, `ℓ2' = span(e1-e3, e2-ie4)`.
pub fn example_line_pairs() -> Vec<(ProjLine, ProjLine)> {
    let c = |v: [(f64, f64); 4]| ProjPoint::new(v.iter().map(|&(a, b)| C64::new(a, b)).collect()).unwrap();
    let line = |p: ProjPoint, q: ProjPoint| ProjLine::through(&p, &q).unwrap();
    let o = (0.0, 0.0);
    let one = (1.0, 0.0);
    vec![
        (
            line(c([one, o, o, o]), c([o, one, o, o])),
            line(c([o, o, one, o]), c([o, o, o, one])),
        ),
        (
            line(c([one, o, one, o]), c([o, one, o, (0.0, 1.0)])),
            line(c([one, o, (-1.0, 0.0), o]), c([o, one, o, (0.0, -1.0)])),
        ),
    ]
}

/// Complement of a pair of points in C^4, used to build lines disjoint
/// from a given one.
pub fn complementary_line(l: &ProjLine) -> Result<ProjLine> {
    let [a, b] = l.basis();
    let c = complement(&[a.coords().to_vec(), b.coords().to_vec()], 4);
    ProjLine::through(&ProjPoint::new(c[0].clone())?, &ProjPoint::new(c[1].clone())?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{enumerate_group, reduced_word_count};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn pairing_example() {
        let r = Disc::new(c(0.0, 0.0), 1.0).unwrap();
        let s = Disc::new(c(4.0, 0.0), 1.0).unwrap();
        let m = standard_pairing(&r, &s).unwrap();
        for k in 0..12 {
            let z = C64::from_polar(1.0, k as f64 * 0.5);
            let w = m.apply_c(z).unwrap();
            assert!((w - (c(4.0, 0.0) + 1.0 / z)).norm() < 1e-12);
            assert!(((w - s.center).norm() - 1.0).abs() < 1e-12);
        }
        let back = standard_pairing(&s, &r).unwrap();
        assert!(m.compose(&back).approx_eq(&Moebius::identity(), 1e-12));
        assert!(back.compose(&m).approx_eq(&Moebius::identity(), 1e-12));
        assert!(standard_pairing(&r, &r).is_err());
    }

    #[test]
    fn standard_config_is_valid_and_kisses_at_sqrt2_over_2() {
        let cfg = SchottkyConfigP1::standard(2, 0.25).unwrap();
        assert_eq!(validate_schottky_p1(&cfg).unwrap().verdict, Verdict::Valid);
        let kiss = SchottkyConfigP1::standard(2, 2f64.sqrt() / 2.0).unwrap();
        let rep = validate_schottky_p1(&kiss).unwrap();
        assert_eq!(rep.verdict, Verdict::Kissing);
        assert_eq!(rep.tangencies.len(), 4);
        let bad = SchottkyConfigP1::standard(2, 0.8).unwrap();
        let rep = validate_schottky_p1(&bad).unwrap();
        assert_eq!(rep.verdict, Verdict::Invalid);
        assert!(rep.overlaps.contains(&("R1".to_string(), "R2".to_string())));
        assert!(SchottkyConfigP1::standard(1, 0.25).is_err());
    }

    #[test]
    fn wrong_orientation_is_reported() {
        let mut cfg = SchottkyConfigP1::standard(2, 0.25).unwrap();
        cfg.maps[0] = cfg.maps[0].inverse();
        let rep = validate_schottky_p1(&cfg).unwrap();
        assert_eq!(rep.verdict, Verdict::Invalid);
    }

    #[test]
    fn free_group_certificate() {
        for g in [2, 3] {
            let cfg = SchottkyConfigP1::standard(g, 0.2).unwrap();
            let els = enumerate_group(&cfg.generator_set(), 5).unwrap();
            let want: usize = (0..=5).map(|n| reduced_word_count(g, n)).sum();
            assert_eq!(els.len(), want);
        }
    }

    #[test]
    fn ping_pong_inclusion() {
        let cfg = SchottkyConfigP1::standard(2, 0.25).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for j in 0..2 {
            let (r, s, m) = (cfg.r_discs[j], cfg.s_discs[j], cfg.maps[j]);
            let mut n = 0;
            while n < 1000 {
                let z = c(rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0));
                if (z - r.center).norm() <= r.radius {
                    continue;
                }
                let w = m.apply_c(z).unwrap();
                assert!((w - s.center).norm() < s.radius);
                n += 1;
            }
        }
    }

    #[test]
    fn limit_points_are_fixed_and_nested() {
        let cfg = SchottkyConfigP1::standard(2, 0.25).unwrap();
        let one = limit_points_p1(&cfg, 1, DEFAULT_WORD_LIMIT).unwrap();
        assert_eq!(one.len(), 4);
        let words = limit_words_p1(&cfg, 6, DEFAULT_WORD_LIMIT).unwrap();
        for (p, w) in &words {
            assert!(w.map.apply(p).unwrap().distance(p) < 1e-6);
            assert!(in_disc_union(&cfg, p));
            let discs = nested_discs(&cfg, &w.letters).unwrap();
            for pair in discs.windows(2) {
                assert!(pair[1].radius < pair[0].radius);
            }
            // For cyclically reduced words the fixed point is in the innermost disc.
            let letters = cfg.generator_set().letters();
            let cyclic = letters[*w.letters.last().unwrap()].inverse != w.letters[0];
            let z = finite(p).unwrap();
            assert!(discs[0].contains(z));
            if cyclic {
                assert!(discs.last().unwrap().contains(z));
            }
        }
    }

    #[test]
    fn depth_eight_points_are_separated() {
        let cfg = SchottkyConfigP1::standard(2, 0.25).unwrap();
        let cloud = limit_points_p1(&cfg, 8, DEFAULT_WORD_LIMIT).unwrap();
        assert!(cloud.points.iter().all(|p| in_disc_union(&cfg, p)));
        let zs: Vec<C64> = cloud.points.iter().map(|p| finite(p).unwrap()).collect();
        let mut min_gap = f64::INFINITY;
        for i in 0..zs.len() {
            for j in i + 1..zs.len() {
                min_gap = min_gap.min((zs[i] - zs[j]).norm());
            }
        }
        assert!(min_gap > 0.0);
    }

    #[test]
    fn invalid_config_is_rejected() {
        let bad = SchottkyConfigP1::standard(2, 0.8).unwrap();
        assert!(limit_points_p1(&bad, 2, DEFAULT_WORD_LIMIT).is_err());
        let cfg = SchottkyConfigP1::standard(2, 0.25).unwrap();
        assert!(matches!(limit_points_p1(&cfg, 30, 1000), Err(Error::ResourceLimit { .. })));
    }

    #[test]
    fn canonical_mirror_map() {
        let pairs = vec![example_line_pairs().remove(0)];
        let cfg = build_mirror_group(&pairs, &[2.0], None).unwrap();
        let z = c(0.0, 0.0);
        let o = c(1.0, 0.0);
        let want = ProjMap::from_rows(&[
            vec![z, z, o * 2.0, z],
            vec![z, z, z, o * 2.0],
            vec![o * 0.5, z, z, z],
            vec![z, o * 0.5, z, z],
        ])
        .unwrap();
        assert!(cfg.pairs[0].map.proj_eq(&want, 1e-12));
        let e1 = ProjPoint::basis(3, 0);
        assert!(cfg.pairs[0].map.apply(&e1).unwrap().distance(&ProjPoint::basis(3, 2)) < 1e-12);
        assert!(cfg.pairs[0].map.pow(2).is_identity(1e-12));
        let flat = build_mirror_group(&pairs, &[1.0], None).unwrap();
        assert!(flat.pairs[0].map.pow(2).is_identity(1e-12));
    }

    #[test]
    fn intersecting_lines_are_rejected() {
        let p = |i| ProjPoint::basis(3, i);
        let l = ProjLine::through(&p(0), &p(1)).unwrap();
        let m = ProjLine::through(&p(1), &p(2)).unwrap();
        assert!(matches!(
            build_mirror_group(&[(l, m)], &[2.0], None),
            Err(Error::LinesIntersect { first: 0, second: 1 })
        ));
    }

    #[test]
    fn mirrors_swap_sides() {
        let cfg = build_mirror_group(&example_line_pairs(), &[4.0, 4.0], None).unwrap();
        assert_eq!(cfg.check_mirrors_disjoint(2000, 3), None);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for pair in &cfg.pairs {
            for _ in 0..1000 {
                let p = ProjPoint::new(random_vec(&mut rng, 4)).unwrap();
                let s = pair.side(&p);
                if s.abs() < 1e-9 {
                    continue;
                }
                let q = pair.map.apply(&p).unwrap();
                assert!(pair.side(&q) * s < 0.0);
            }
        }
    }

    #[test]
    fn twisted_mirror_is_still_an_involution() {
        let u = Matrix2::new(c(0.0, 1.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0));
        let cfg = build_mirror_group(&example_line_pairs(), &[3.0, 3.0], Some(&[u, u])).unwrap();
        for p in &cfg.pairs {
            assert!(p.map.pow(2).is_identity(1e-10));
        }
    }

    #[test]
    fn orbit_cloud_depth_zero_returns_seeds() {
        let cfg = build_mirror_group(&example_line_pairs(), &[4.0, 4.0], None).unwrap();
        let o = orbit_cloud_p3(&cfg, 0, 25, 1).unwrap();
        assert_eq!(o.cloud.len(), 25);
        let weak = build_mirror_group(&example_line_pairs(), &[1.01, 1.01], None).unwrap();
        assert!(orbit_cloud_p3(&weak, 1, 2, 1).unwrap().warning.is_some());
    }

    #[test]
    fn orbit_cloud_concentrates_near_lines() {
        let cfg = build_mirror_group(&example_line_pairs(), &[4.0, 4.0], None).unwrap();
        let o = orbit_cloud_p3(&cfg, 6, 200, 0).unwrap();
        assert!(o.epsilon < 0.2, "epsilon {}", o.epsilon);
    }
}
