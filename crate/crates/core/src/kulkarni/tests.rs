use super::*;
use crate::cloud::{hausdorff, hausdorff_to_set, PointsAndLines};
use proptest::prelude::*;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn r(x: f64) -> C64 {
    c(x, 0.0)
}

fn e(i: usize) -> ProjPoint {
    ProjPoint::basis(2, i)
}

fn line(a: usize, b: usize) -> ProjLine {
    ProjLine::through(&e(a), &e(b)).unwrap()
}

fn cyclic(d: [f64; 3]) -> GeneratorSet {
    GeneratorSet::new(2, vec![ProjMap::diagonal(&[r(d[0]), r(d[1]), r(d[2])]).unwrap()], vec![]).unwrap()
}

fn quick(depth: usize, grid: usize, eps: f64) -> KulkarniParams {
    KulkarniParams { depth, grid, eps, ..Default::default() }
}

fn max_dist(pts: &[ProjPoint], set: &PointsAndLines) -> f64 {
    pts.iter().map(|p| set.distance(p)).fold(0.0, f64::max)
}

#[test]
fn order_probe() {
    let w = C64::from_polar(1.0, 2.0 * PI / 3.0);
    let rot = ProjMap::diagonal(&[r(1.0), w, w * w]).unwrap();
    assert_eq!(probe_order(&rot, 1000), Order::Finite(3));
    assert_eq!(probe_order(&ProjMap::identity(2), 1000), Order::Finite(1));
    let lox = ProjMap::diagonal(&[r(2.0), r(1.0), r(0.5)]).unwrap();
    assert_eq!(probe_order(&lox, 1000), Order::Infinite);
    let unip = ProjMap::from_real_rows(&[vec![1.0, 1.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]]).unwrap();
    assert_eq!(probe_order(&unip, 1000), Order::Infinite);
    let irr = ProjMap::diagonal(&[r(1.0), C64::from_polar(1.0, 1.0), C64::from_polar(1.0, -1.0)]).unwrap();
    assert_eq!(probe_order(&irr, 1000), Order::Unresolved);
}

#[test]
fn finite_groups_have_empty_limit_set() {
    let trivial = GeneratorSet::new(2, vec![], vec![]).unwrap();
    let a = approx_kulkarni(&trivial, &quick(10, 50, 0.05)).unwrap();
    assert!(a.finite && a.cloud.is_empty());
    let w = C64::from_polar(1.0, 2.0 * PI / 3.0);
    let rot = GeneratorSet::new(2, vec![ProjMap::diagonal(&[r(1.0), w, w * w]).unwrap()], vec![]).unwrap();
    let a = approx_kulkarni(&rot, &quick(10, 50, 0.05)).unwrap();
    assert_eq!(a.elements, 3);
    assert!(a.finite && a.cloud.is_empty());
}

#[test]
fn irrational_rotation_warns() {
    let irr = ProjMap::diagonal(&[r(1.0), C64::from_polar(1.0, 1.0), C64::from_polar(1.0, -1.0)]).unwrap();
    let g = GeneratorSet::new(2, vec![irr], vec![]).unwrap();
    let a = approx_kulkarni(&g, &KulkarniParams { l2_targets: Some(200), ..quick(6, 20, 0.05) }).unwrap();
    assert!(a.warnings.iter().any(|w| w.contains("order probe bound")));
}

#[test]
fn cyclic_diagonal_layers() {
    let g = cyclic([2f64.powf(-0.5), 1.0, 2.0]);
    let a = approx_kulkarni(&g, &quick(24, 300, 0.05)).unwrap();
    let fixed = PointsAndLines { points: vec![e(0), e(1), e(2)], lines: vec![] };
    let l0 = a.layer(Layers::L0);
    assert_eq!(l0.len(), 3);
    assert!(hausdorff_to_set(&l0, &fixed, 0) < 1e-12);
    let l1 = a.layer(Layers::L1);
    assert!(!l1.is_empty());
    // Convergence to e1 is like 2^(-depth/2).
    assert!(max_dist(&l1, &fixed) < 0.05);
    let lines = PointsAndLines { points: vec![], lines: vec![line(0, 1), line(1, 2)] };
    let l2 = a.layer(Layers::L2);
    assert!(hausdorff_to_set(&l2, &lines, 2000) < 0.05, "{}", hausdorff_to_set(&l2, &lines, 2000));
    assert!(a.warnings.is_empty());
}

#[test]
fn cyclic_closed_forms() {
    let s = closed_form_cyclic_diag([r(2f64.powf(-0.5)), r(1.0), r(2.0)]).unwrap();
    assert_eq!(s.points.len(), 3);
    assert!(s.points.iter().all(|t| t.tags == Layers::L0.union(Layers::L1)));
    assert_eq!(s.lines.len(), 2);
    assert!(s.lines[0].item.approx_eq(&line(0, 1), 1e-12));
    assert!(s.lines[1].item.approx_eq(&line(1, 2), 1e-12));
    assert!(s.lines.iter().all(|t| t.tags == Layers::L2));

    // The point of middle modulus decides which lines appear.
    let t = closed_form_cyclic_diag([r(3.0), r(1.0 / 3.0), r(1.0)]).unwrap();
    let ls = t.line_items();
    assert!(ls.iter().any(|l| l.approx_eq(&line(1, 2), 1e-12)));
    assert!(ls.iter().any(|l| l.approx_eq(&line(2, 0), 1e-12)));

    let err = closed_form_cyclic_diag([r(1.0), r(1.0), r(2.0)]).unwrap_err();
    assert!(matches!(err, Error::Unsupported(_)));
    assert!(closed_form_cyclic_diag([r(1.0), c(0.0, 1.0), r(2.0)]).is_err());
}

#[test]
fn closed_form_matches_approximation() {
    let s = closed_form_cyclic_diag([r(1.0 / 3.0), r(1.0), r(3.0)]).unwrap();
    let a = approx_kulkarni(&cyclic([1.0 / 3.0, 1.0, 3.0]), &quick(24, 300, 0.05)).unwrap();
    let d = hausdorff_to_set(&a.cloud.points, &s.as_set(), 2000);
    assert!(d < 0.05, "{d}");
}

fn z_doubling() -> GeneratorSet {
    GeneratorSet::new(1, vec![ProjMap::diagonal(&[r(2.0), r(1.0)]).unwrap()], vec!["h".into()]).unwrap()
}

#[test]
fn suspension_closed_forms() {
    let fin = suspension(&z_doubling(), &[r(1.0)], None).unwrap();
    assert!(!fin.g_infinite && !fin.closed.partial);
    assert_eq!(fin.generators.generators.len(), 1);
    let ls = fin.closed.line_items();
    assert_eq!(ls.len(), 2);
    assert!(ls.iter().any(|l| l.approx_eq(&line(0, 2), 1e-12)));
    assert!(ls.iter().any(|l| l.approx_eq(&line(1, 2), 1e-12)));

    let inf = suspension(&z_doubling(), &[r(2.0)], None).unwrap();
    assert!(inf.g_infinite);
    let ls = inf.closed.line_items();
    assert_eq!(ls.len(), 3);
    assert!(ls.iter().any(|l| l.approx_eq(&line(0, 1), 1e-12)));
    let g = inf.generators.generators[1].matrix();
    assert!((g[(0, 0)] / g[(2, 2)] - r(8.0)).norm() < 1e-12);

    let unit_root = suspension(&z_doubling(), &[r(-1.0)], None).unwrap();
    assert!(!unit_root.g_infinite);

    let two = GeneratorSet::new(
        1,
        vec![ProjMap::diagonal(&[r(2.0), r(1.0)]).unwrap(), ProjMap::from_real_rows(&[vec![1.0, 1.0], vec![0.0, 1.0]]).unwrap()],
        vec![],
    )
    .unwrap();
    let partial = suspension(&two, &[r(1.0)], None).unwrap();
    assert!(partial.closed.partial && partial.closed.lines.is_empty());
    let given = [ProjPoint::basis(1, 0), ProjPoint::basis(1, 1), ProjPoint::from_real(&[1.0, 1.0]).unwrap()];
    let full = suspension(&two, &[r(1.0)], Some(&given)).unwrap();
    assert_eq!(full.closed.lines.len(), 3);
    assert!(suspension(&cyclic([0.5, 1.0, 2.0]), &[r(1.0)], None).is_err());
    assert!(suspension(&z_doubling(), &[r(0.0)], None).is_err());
}

#[test]
fn suspension_matches_approximation() {
    let fin = suspension(&z_doubling(), &[r(1.0)], None).unwrap();
    let a = approx_kulkarni(&fin.generators, &quick(20, 300, 0.05)).unwrap();
    let d = hausdorff_to_set(&a.cloud.points, &fin.closed.as_set(), 2000);
    assert!(d < 0.05, "{d}");
    let far = line(0, 1).sample(200);
    let idx = SpatialIndex::build(&a.cloud.points, 0.05);
    assert!(far.iter().map(|p| idx.nearest_distance(p)).fold(0.0, f64::max) > 0.1);
}

#[test]
fn translation_group_accumulates_at_infinity() {
    let t = |x: C64, y: C64| {
        ProjMap::from_rows(&[vec![r(1.0), r(0.0), x], vec![r(0.0), r(1.0), y], vec![r(0.0), r(0.0), r(1.0)]]).unwrap()
    };
    let gens = GeneratorSet::new(
        2,
        vec![
            t(c(50.0, 3.0), c(-7.0, 11.0)),
            t(c(-4.0, 49.0), c(9.0, -2.0)),
            t(c(6.0, -5.0), c(48.0, 8.0)),
            t(c(-9.0, 2.0), c(5.0, 51.0)),
        ],
        vec![],
    )
    .unwrap();
    let a = approx_kulkarni(&gens, &KulkarniParams { l2_targets: Some(3000), ..quick(4, 100, 0.05) }).unwrap();
    let infinity = PointsAndLines { points: vec![], lines: vec![line(0, 1)] };
    assert!(!a.cloud.is_empty());
    let d = hausdorff_to_set(&a.cloud.points, &infinity, 2000);
    assert!(d < 0.05, "{d}");
}

#[test]
fn conjugation_moves_the_limit_set() {
    let g = cyclic([2f64.powf(-0.5), 1.0, 2.0]);
    let h = ProjMap::from_rows(&[
        vec![c(1.0, 0.2), c(0.3, 0.0), c(0.0, -0.4)],
        vec![c(0.1, 0.1), c(0.9, 0.0), c(0.2, 0.0)],
        vec![c(-0.3, 0.0), c(0.0, 0.5), c(1.1, 0.0)],
    ])
    .unwrap();
    let p = quick(24, 200, 0.05);
    let a = approx_kulkarni(&g, &p).unwrap();
    let b = approx_kulkarni(&g.conjugate_by(&h), &p).unwrap();
    let moved: Vec<ProjPoint> = a.cloud.points.iter().map(|x| h.apply(x).unwrap()).collect();
    let d = hausdorff(&moved, &b.cloud.points);
    assert!(d < 2.0 * p.eps, "{d}");
}

#[test]
fn deeper_runs_do_not_lose_points() {
    let g = cyclic([2f64.powf(-0.5), 1.0, 2.0]);
    let small = approx_kulkarni(&g, &quick(20, 150, 0.05)).unwrap();
    let big = approx_kulkarni(&g, &quick(28, 300, 0.05)).unwrap();
    assert!(!small.layer(Layers::L2).is_empty());
    let idx = SpatialIndex::build(&big.cloud.points, 0.05);
    for layer in [Layers::L0, Layers::L1, Layers::L2] {
        let d = small.layer(layer).iter().map(|p| idx.nearest_distance(p)).fold(0.0, f64::max);
        assert!(d <= 0.05, "{layer:?} {d}");
    }
}

#[test]
fn compact_sets_in_the_discontinuity_region_return_finitely_often() {
    // A ball around [1:1:1] avoids the line z3 = 0 and the point e3.
    let g = ProjMap::diagonal(&[r(2f64.powf(-0.5)), r(1.0), r(2.0)]).unwrap();
    let centre = ProjPoint::from_real(&[1.0, 1.0, 1.0]).unwrap();
    let steps: Vec<f64> = (-3..=3).map(|i| i as f64 * 0.05).collect();
    let mut ball = Vec::new();
    for &a in &steps {
        for &b in &steps {
            for &u in &steps {
                for &v in &steps {
                    let p = ProjPoint::new(vec![c(1.0 + a, b), c(1.0 + u, v), r(1.0)]).unwrap();
                    if p.distance(&centre) <= 0.1 {
                        ball.push(p);
                    }
                }
            }
        }
    }
    assert!(ball.len() > 10);
    let mut hits = Vec::new();
    let mut gk = ProjMap::identity(2);
    for k in 1..=60 {
        gk = gk.compose(&g);
        if ball.iter().any(|p| gk.apply(p).unwrap().distance(&centre) <= 0.1) {
            hits.push(k);
        }
    }
    assert!(hits.iter().all(|&k| k < 5), "{hits:?}");
}

#[test]
fn toral_family_examples() {
    let t = toral_family([[2, 1], [1, 1]], &[-1, 0, 1], &[[0, 0], [0, 1], [1, 0], [1, 1]]).unwrap();
    assert_eq!(t.generators.generators.len(), 11);
    let golden = (3.0 + 5f64.sqrt()) / 2.0;
    assert!((t.omega.eigenvalues[0] - golden).abs() < 1e-12);
    assert!((t.omega.eigenvalues[1] - 1.0 / golden).abs() < 1e-12);
    let check = t.sign_check(8, 50, 0).unwrap();
    assert_eq!(check.steps, 400);
    assert_eq!(check.flips, 0, "{check:?}");

    assert_eq!(toral_family([[3, 5], [-5, 8]], &[1], &[[0, 0]]).unwrap_err(), Error::NotUnimodular { det: 49 });
    assert_eq!(toral_family([[1, 1], [0, 1]], &[1], &[[0, 0]]).unwrap_err(), Error::NotHyperbolic { trace: 2 });

    let lc = count_lines(&t.closed).unwrap();
    assert_eq!(lc, LineCount { lin: Count::Infinite, ling: Count::Finite(4) });
}

#[test]
fn toral_negative_eigenvalues_swap_components() {
    let t = toral_family([[-2, 1], [1, -1]], &[1], &[[0, 0], [1, 0]]).unwrap();
    assert!(t.omega.eigenvalues.iter().all(|&m| m < 0.0));
    assert_eq!(t.omega.step_sign(1), [-1, -1]);
    assert_eq!(t.sign_check(8, 30, 1).unwrap().flips, 0);
}

#[test]
fn inoue_family_examples() {
    let f = inoue_family([[0, 1, 0], [0, 0, 1], [1, 1, 0]]).unwrap();
    assert_eq!(f.char_poly, [-1, -1, 0]);
    // Plastic number: the real root of x^3 = x + 1, by bisection.
    let (mut lo, mut hi) = (1.0f64, 2.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid * mid * mid - mid - 1.0 > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    assert!((f.alpha - lo).abs() < 1e-12);
    assert!((f.alpha - 1.3247).abs() < 1e-4);
    assert!(f.beta.im > 0.0);
    assert!((f.alpha * f.beta.norm_sqr() - 1.0).abs() < 1e-12);
    // g0 gi g0^-1 is the product of the gj^(m_ij).
    let g0 = &f.generators.generators[0];
    for i in 0..3 {
        let lhs = f.generators.generators[i + 1].conjugate_by(g0);
        let mut rhs = ProjMap::identity(2);
        for j in 0..3 {
            rhs = rhs.compose(&f.generators.generators[j + 1].pow(f.m[i][j]));
        }
        assert!(lhs.proj_eq(&rhs, 1e-9));
    }
    let check = f.sign_check(8, 200, 0).unwrap();
    assert_eq!(check.flips, 0);
    assert!(matches!(inoue_family([[1, 0, 0], [0, 1, 0], [0, 0, 1]]), Err(Error::SpectrumType(_))));
    assert!(matches!(inoue_family([[2, 0, 0], [0, 1, 0], [0, 0, 1]]), Err(Error::NotUnimodular { det: 2 })));
}

#[test]
fn line_count_examples() {
    let s = closed_form_cyclic_diag([r(2f64.powf(-0.5)), r(1.0), r(2.0)]).unwrap();
    assert_eq!(count_lines(&s).unwrap(), LineCount { lin: Count::Finite(2), ling: Count::Finite(2) });

    let pts = [ProjPoint::basis(1, 0), ProjPoint::basis(1, 1), ProjPoint::from_real(&[1.0, 1.0]).unwrap()];
    let sus = suspension(&z_doubling(), &[r(1.0)], Some(&pts)).unwrap();
    assert_eq!(count_lines(&sus.closed).unwrap(), LineCount { lin: Count::Finite(3), ling: Count::Finite(2) });

    let mut many = ClosedFormLimitSet::new(2);
    for k in 0..21 {
        let form = vec![r(1.0), r(k as f64), r((k * k) as f64)];
        many.add_line(ProjLine::from_form(form).unwrap(), Layers::L2);
    }
    assert_eq!(count_lines(&many).unwrap_err(), Error::TooManyLines { count: 21, limit: 20 });
    assert_eq!(Count::Infinite.to_string(), "∞");
}

fn brute_force(lines: &[ProjLine]) -> usize {
    let n = lines.len();
    (0u32..1 << n)
        .filter(|mask| {
            let idx: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
            idx.iter().enumerate().all(|(a, &i)| {
                idx[a + 1..]
                    .iter()
                    .enumerate()
                    .all(|(b, &j)| idx[a + b + 2..].iter().all(|&k| !concurrent(&lines[i], &lines[j], &lines[k])))
            })
        })
        .map(|mask| mask.count_ones() as usize)
        .max()
        .unwrap_or(0)
}

/// Lines through a few hub points, so that concurrent triples are common.
fn arb_lines() -> impl Strategy<Value = Vec<ProjLine>> {
    let hubs = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [1.0, 1.0, 1.0], [2.0, -1.0, 1.0]];
    prop::collection::vec((0usize..4, -3i32..4, -3i32..4), 0..=8).prop_map(move |v| {
        let mut out: Vec<ProjLine> = Vec::new();
        for (h, a, b) in v {
            let hub = ProjPoint::from_real(&hubs[h]).unwrap();
            let other = ProjPoint::from_real(&[a as f64, b as f64, 1.0]).unwrap();
            if let Ok(l) = ProjLine::through(&hub, &other) {
                if !out.iter().any(|m| m.approx_eq(&l, 1e-9)) {
                    out.push(l);
                }
            }
        }
        out
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn general_position_search_is_exact(lines in arb_lines()) {
        prop_assert_eq!(max_general_position(&lines).unwrap(), brute_force(&lines));
    }

    #[test]
    fn general_position_ignores_order(lines in arb_lines(), shift in 0usize..8) {
        let mut rot = lines.clone();
        if !rot.is_empty() {
            let k = shift % rot.len();
            rot.rotate_left(k);
            rot.reverse();
        }
        prop_assert_eq!(max_general_position(&lines).unwrap(), max_general_position(&rot).unwrap());
    }
}
