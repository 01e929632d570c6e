//! Eigenspaces of projective maps, used to locate fixed points.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::projective::{orthonormalize, Eigenspace, FixedPoints, ProjMap, ProjPoint};

/// Eigenvalues closer than this (relative) are treated as one cluster.
const MERGE_TOL: f64 = 1e-5;
/// Singular values below this fraction of the eigenvalue count as null directions.
const NULL_TOL: f64 = 1e-6;

/// Right singular vectors of `a` with singular value at most `tau`, sorted
/// by singular value; always returns at least the smallest one.
fn null_vectors(a: &DMatrix<C64>, tau: f64) -> Vec<(f64, Vec<C64>)> {
    let svd = a.clone().svd(false, true);
    let vt = svd.v_t.expect("requested V^*");
    let mut idx: Vec<usize> = (0..svd.singular_values.len()).collect();
    idx.sort_by(|&i, &j| svd.singular_values[i].total_cmp(&svd.singular_values[j]));
    let n = a.ncols();
    let mut out = Vec::new();
    for (rank, &i) in idx.iter().enumerate() {
        let s = svd.singular_values[i];
        if rank > 0 && s > tau {
            break;
        }
        out.push((s, (0..n).map(|j| vt[(i, j)].conj()).collect()));
    }
    out
}

fn shifted(a: &DMatrix<C64>, lambda: C64) -> DMatrix<C64> {
    let n = a.nrows();
    a - DMatrix::<C64>::identity(n, n) * lambda
}

fn residual(a: &DMatrix<C64>, lambda: C64, v: &[C64]) -> f64 {
    let n = a.nrows();
    (0..n)
        .map(|i| ((0..n).map(|j| a[(i, j)] * v[j]).sum::<C64>() - lambda * v[i]).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

pub(crate) fn fixed_points(g: &ProjMap) -> FixedPoints {
    let scale = g.frobenius_norm();
    let a = g.matrix() / C64::new(scale, 0.0);
    let n = a.nrows();
    let evs: Vec<C64> = g.eigenvalues().into_iter().map(|l| l / scale).collect();

    let mut clusters: Vec<Vec<C64>> = Vec::new();
    for l in evs {
        let hit = clusters.iter_mut().find(|cl| {
            let r = cl[0];
            (l - r).norm() <= MERGE_TOL * l.norm().max(r.norm()) + 1e-15
        });
        match hit {
            Some(cl) => cl.push(l),
            None => clusters.push(vec![l]),
        }
    }

    let mut spaces = Vec::new();
    let mut defective = false;
    let mut max_residual: f64 = 0.0;
    for cl in clusters {
        let k = cl.len();
        let mean: C64 = cl.iter().sum::<C64>() / k as f64;
        let tau = NULL_TOL * mean.norm() + 1e-15;
        let mut null = null_vectors(&shifted(&a, mean), tau);
        let geometric = null.iter().filter(|(s, _)| *s <= tau).count().min(k);
        if geometric == 0 && k > 1 {
            // Close but distinct eigenvalues: treat each one separately.
            for &l in &cl {
                let (_, v) = null_vectors(&shifted(&a, l), 0.0).remove(0);
                max_residual = max_residual.max(residual(&a, l, &v));
                spaces.push(Eigenspace {
                    value: l * scale,
                    algebraic: 1,
                    basis: vec![ProjPoint::new(v).expect("singular vector has unit norm")],
                    generalized: Vec::new(),
                });
            }
            continue;
        }
        null.truncate(geometric.max(1));
        let basis_vecs = orthonormalize(&null.into_iter().map(|(_, v)| v).collect::<Vec<_>>(), 1e-8);
        for v in &basis_vecs {
            max_residual = max_residual.max(residual(&a, mean, v));
        }
        let mut generalized = Vec::new();
        if basis_vecs.len() < k {
            defective = true;
            let mut power = DMatrix::<C64>::identity(n, n);
            let sh = shifted(&a, mean);
            for _ in 0..k {
                power = &power * &sh;
            }
            let pw_tau = NULL_TOL.powi(1) * mean.norm().powi(k as i32) + 1e-15;
            let gen = null_vectors(&power, pw_tau);
            let mut all = basis_vecs.clone();
            for (_, v) in gen.into_iter().take(k) {
                let before = all.len();
                all = orthonormalize(&[all.clone(), vec![v]].concat(), 1e-6);
                if all.len() > before {
                    generalized.push(ProjPoint::new(all[all.len() - 1].clone()).expect("unit vector"));
                }
            }
        }
        spaces.push(Eigenspace {
            value: mean * scale,
            algebraic: k,
            basis: basis_vecs
                .into_iter()
                .map(|v| ProjPoint::new(v).expect("unit vector"))
                .collect(),
            generalized,
        });
    }
    FixedPoints { spaces, defective, max_residual }
}
