//! The complex hyperbolic plane as the ball `|z1|^2 + |z2|^2 < |z3|^2` in
//! P^2, its isometry group PU(2,1), limit sets of orbit accumulation and the
//! tangent-line description of the Kulkarni limit set.

use nalgebra::{DMatrix, Matrix2};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::cloud::{cluster_points, Candidate, ClusterParams, PointCloud};
use crate::error::{Error, Result};
use crate::group::{enumerate_group, GeneratorSet};
use crate::projective::{ProjLine, ProjMap, ProjPoint};

const J: [f64; 3] = [1.0, 1.0, -1.0];

/// Hermitian form of signature (2,1): `|z1|^2 + |z2|^2 - |z3|^2`.
pub fn form_value(z: &[C64]) -> f64 {
    z.iter().zip(J).map(|(w, s)| s * w.norm_sqr()).sum()
}

/// `<u, v>_J = sum J_i conj(u_i) v_i`.
pub fn form_product(u: &[C64], v: &[C64]) -> C64 {
    u.iter().zip(v).zip(J).map(|((a, b), s)| a.conj() * b * s).sum()
}

/// Strictly inside the ball; boundary points are not.
pub fn in_ball(p: &ProjPoint) -> bool {
    p.dim() == 2 && form_value(p.coords()) < -1e-12
}

fn jmat() -> DMatrix<C64> {
    DMatrix::from_fn(3, 3, |i, j| if i == j { C64::new(J[i], 0.0) } else { C64::new(0.0, 0.0) })
}

/// `M* J M = s J` for some `s > 0`, up to relative Frobenius error `tol`.
pub fn is_pu21(m: &ProjMap, tol: f64) -> bool {
    if m.dim() != 2 {
        return false;
    }
    let a = m.matrix();
    let j = jmat();
    let q = a.adjoint() * &j * a;
    let s = (&j * &q).trace().re / 3.0;
    if !(s > 0.0) {
        return false;
    }
    (&q - &j * C64::new(s, 0.0)).norm() <= tol * q.norm()
}

/// Moves a point onto the null cone by rescaling its first two coordinates.
pub fn null_projection(p: &ProjPoint) -> Result<ProjPoint> {
    let z = p.coords();
    let head = (z[0].norm_sqr() + z[1].norm_sqr()).sqrt();
    if head == 0.0 || z[2].norm() == 0.0 {
        return Err(Error::InvalidConfig("point has no radial projection to the sphere".into()));
    }
    let k = z[2].norm() / head;
    ProjPoint::new(vec![z[0] * k, z[1] * k, z[2]])
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CgParams {
    pub depth: usize,
    #[serde(flatten)]
    pub cluster: ClusterParams,
    /// Orbit points with `-value` above this are considered interior and
    /// cannot accumulate on the sphere at the current depth.
    pub boundary_tol: f64,
}

impl Default for CgParams {
    fn default() -> Self {
        CgParams { depth: 10, cluster: ClusterParams::default(), boundary_tol: 1e-3 }
    }
}

/// Finite-depth approximation of the limit set of a PU(2,1) group.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CgLimitApprox {
    pub points: PointCloud,
    pub base: ProjPoint,
    pub params: CgParams,
    pub generators: GeneratorSet,
}

/// Accumulation points on the sphere of the orbit of `base`.
pub fn cg_limit(gens: &GeneratorSet, base: &ProjPoint, params: CgParams) -> Result<CgLimitApprox> {
    if gens.dim != 2 {
        return Err(Error::DimensionMismatch { expected: 2, found: gens.dim });
    }
    if let Some(i) = gens.generators.iter().position(|g| !is_pu21(g, 1e-9)) {
        return Err(Error::NotPu21 { index: i });
    }
    if !in_ball(base) {
        return Err(Error::OutsideBall);
    }
    let elements = enumerate_group(gens, params.depth)?;
    let min_len = params.depth.div_ceil(2);
    let cands: Vec<Candidate> = elements
        .iter()
        .filter(|e| e.word.len() >= min_len)
        .map(|e| e.map.apply(base).map(|p| Candidate { point: p, depth: e.word.len() }))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .filter(|c| -form_value(c.point.coords()) <= params.boundary_tol)
        .collect();
    let reps = cluster_points(&cands, params.cluster);
    let pts = reps.iter().map(null_projection).collect::<Result<Vec<_>>>()?;
    Ok(CgLimitApprox {
        points: PointCloud::new(2, pts, params.depth, params.cluster.eps)?,
        base: base.clone(),
        params,
        generators: gens.clone(),
    })
}

/// The complex line tangent to the sphere at a null point `z`: the
/// `J`-orthogonal complement of `z`, with dual coordinates `J conj(z)`.
pub fn tangent_line(z: &ProjPoint) -> Result<ProjLine> {
    let v = form_value(z.coords());
    if v.abs() > 1e-6 {
        return Err(Error::NotNull { value: v });
    }
    let dual = z.coords().iter().zip(J).map(|(w, s)| w.conj() * s).collect();
    ProjLine::from_form(dual)
}

/// Smallest and largest eigenvalue of the form restricted to a line.
pub fn restricted_form_spectrum(l: &ProjLine) -> (f64, f64) {
    let [u, v] = l.basis();
    let (u, v) = (u.coords(), v.coords());
    let h = Matrix2::new(form_product(u, u), form_product(u, v), form_product(v, u), form_product(v, v));
    let ev = h.symmetric_eigenvalues();
    (ev[0].min(ev[1]), ev[0].max(ev[1]))
}

/// Tangency residual: the restricted form must be positive semidefinite
/// with a one-dimensional kernel. Returns `|smallest eigenvalue|`, or
/// infinity if the form is not semidefinite of rank one.
pub fn tangency_residual(l: &ProjLine) -> f64 {
    let (lo, hi) = restricted_form_spectrum(l);
    if hi <= 1e-6 {
        return f64::INFINITY;
    }
    lo.abs()
}

/// One tangent line per limit point.
pub fn kulkarni_from_cg(cg: &CgLimitApprox) -> Result<Vec<ProjLine>> {
    cg.points.points.iter().map(tangent_line).collect()
}

/// The loxodromic `[[cosh t, 0, sinh t], [0, 1, 0], [sinh t, 0, cosh t]]`.
pub fn loxodromic(t: f64) -> ProjMap {
    ProjMap::from_real_rows(&[
        vec![t.cosh(), 0.0, t.sinh()],
        vec![0.0, 1.0, 0.0],
        vec![t.sinh(), 0.0, t.cosh()],
    ])
    .expect("determinant one")
}

/// Quarter turn exchanging the first two coordinates, an element of PU(2,1).
pub fn quarter_turn() -> ProjMap {
    ProjMap::from_real_rows(&[vec![0.0, -1.0, 0.0], vec![1.0, 0.0, 0.0], vec![0.0, 0.0, 1.0]]).expect("unitary")
}

/// Two loxodromics `L(t)` and `R L(t) R^{-1}` with disjoint fixed-point pairs.
pub fn two_loxodromics(t: f64) -> GeneratorSet {
    let l = loxodromic(t);
    let r = quarter_turn();
    GeneratorSet {
        dim: 2,
        generators: vec![l.clone(), l.conjugate_by(&r)],
        labels: vec!["a".into(), "b".into()],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cloud::hausdorff;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn pt(v: [f64; 3]) -> ProjPoint {
        ProjPoint::from_real(&v).unwrap()
    }

    #[test]
    fn ball_membership() {
        assert!(in_ball(&pt([0.0, 0.0, 1.0])));
        assert!(!in_ball(&pt([1.0, 0.0, 1.0])));
        assert!(!in_ball(&pt([1.0, 1.0, 1.0])));
    }

    #[test]
    fn pu21_examples() {
        let rot = ProjMap::diagonal(&[C64::from_polar(1.0, 0.7), c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert!(is_pu21(&rot, 1e-12));
        let s = 2f64.sqrt();
        let d = ProjMap::diagonal(&[c(1.0 / s, 0.0), c(1.0, 0.0), c(s, 0.0)]).unwrap();
        assert!(!is_pu21(&d, 1e-6));
        assert!(is_pu21(&loxodromic(1.3), 1e-12));
        assert!(is_pu21(&quarter_turn(), 1e-12));
    }

    fn cyclic(t: f64) -> GeneratorSet {
        GeneratorSet::new(2, vec![loxodromic(t)], vec![]).unwrap()
    }

    fn params(depth: usize) -> CgParams {
        CgParams { depth, ..Default::default() }
    }

    #[test]
    fn cyclic_loxodromic_has_two_limit_points() {
        let base = pt([0.1, 0.2, 1.0]);
        let cg = cg_limit(&cyclic(1.0), &base, params(30)).unwrap();
        assert_eq!(cg.points.len(), 2);
        for p in &cg.points.points {
            assert!(form_value(p.coords()).abs() < 1e-6);
        }
        let want = [pt([1.0, 0.0, 1.0]), pt([1.0, 0.0, -1.0])];
        for w in &want {
            assert!(cg.points.points.iter().any(|p| p.distance(w) < 1e-9));
        }
        let other = cg_limit(&cyclic(1.0), &pt([-0.3, 0.1, 1.0]), params(30)).unwrap();
        assert!(hausdorff(&cg.points.points, &other.points.points) < 1e-3);
    }

    #[test]
    fn elliptic_orbit_does_not_reach_the_sphere() {
        let theta = std::f64::consts::PI * 2f64.sqrt();
        let rot = ProjMap::diagonal(&[C64::from_polar(1.0, theta), c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
        let gs = GeneratorSet::new(2, vec![rot], vec![]).unwrap();
        let cg = cg_limit(&gs, &pt([0.3, 0.1, 1.0]), params(40)).unwrap();
        assert!(cg.points.is_empty());
    }

    #[test]
    fn two_loxodromics_accumulate_at_several_points() {
        let cg = cg_limit(&two_loxodromics(2.0), &pt([0.1, 0.05, 1.0]), params(10)).unwrap();
        assert!(cg.points.len() >= 4, "{} points", cg.points.len());
        for p in &cg.points.points {
            assert!(form_value(p.coords()).abs() < 1e-6);
        }
    }

    #[test]
    fn input_guards() {
        let bad = GeneratorSet::new(2, vec![ProjMap::diagonal(&[c(0.5, 0.0), c(1.0, 0.0), c(2.0, 0.0)]).unwrap()], vec![])
            .unwrap();
        assert_eq!(cg_limit(&bad, &pt([0.0, 0.0, 1.0]), params(4)).unwrap_err(), Error::NotPu21 { index: 0 });
        assert_eq!(cg_limit(&cyclic(1.0), &pt([1.0, 1.0, 1.0]), params(4)).unwrap_err(), Error::OutsideBall);
    }

    #[test]
    fn tangent_line_examples() {
        let l = tangent_line(&pt([1.0, 0.0, 1.0])).unwrap();
        let want = ProjLine::from_form(vec![c(1.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)]).unwrap();
        assert!(l.approx_eq(&want, 1e-12));
        let m = tangent_line(&pt([0.0, 1.0, 1.0])).unwrap();
        let want = ProjLine::from_form(vec![c(0.0, 0.0), c(1.0, 0.0), c(-1.0, 0.0)]).unwrap();
        assert!(m.approx_eq(&want, 1e-12));
        assert!(matches!(tangent_line(&pt([0.0, 0.0, 1.0])), Err(Error::NotNull { .. })));
    }

    #[test]
    fn tangent_lines_touch_the_sphere_once() {
        let zs = [
            pt([1.0, 0.0, 1.0]),
            ProjPoint::new(vec![c(0.6, 0.0), c(0.0, 0.8), c(1.0, 0.0)]).unwrap(),
            ProjPoint::new(vec![c(0.3, 0.4), c(-0.5, 0.2), C64::from_polar(0.3f64.hypot(0.4).hypot(0.5f64.hypot(0.2)), 1.0)]).unwrap(),
        ];
        for z in &zs {
            let l = tangent_line(z).unwrap();
            assert!(l.distance(z) < 1e-12);
            assert!(tangency_residual(&l) < 1e-6);
            for w in l.sample(1000) {
                let v = form_value(w.coords());
                assert!(v >= -1e-8);
                if v.abs() < 1e-12 {
                    assert!(w.distance(z) < 1e-6);
                }
            }
        }
    }

    #[test]
    fn limit_set_is_equivariant() {
        let g = ProjMap::from_real_rows(&[vec![1.0, 0.0, 0.0], vec![0.0, 0.8f64.cosh(), 0.8f64.sinh()], vec![0.0, 0.8f64.sinh(), 0.8f64.cosh()]])
            .unwrap();
        let base = pt([0.1, 0.2, 1.0]);
        let cg = cg_limit(&cyclic(1.0), &base, params(30)).unwrap();
        let moved = cg_limit(&cyclic(1.0).conjugate_by(&g), &g.apply(&base).unwrap(), params(30)).unwrap();
        let image: Vec<ProjPoint> = cg.points.points.iter().map(|p| g.apply(p).unwrap()).collect();
        assert!(hausdorff(&image, &moved.points.points) < 1e-3);
        assert_eq!(kulkarni_from_cg(&moved).unwrap().len(), 2);
    }
}
