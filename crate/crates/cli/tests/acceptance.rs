//! End-to-end acceptance checks, one line of output per criterion.

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use kleinian_cli::{run, Command, RunConfig};
use kleinian_core::cloud::{hausdorff, hausdorff_to_set, Layers, PointsAndLines, SpatialIndex};
use kleinian_core::complex_hyperbolic::{cg_limit, kulkarni_from_cg, loxodromic, tangency_residual, CgParams};
use kleinian_core::exact::{det3, ExactPoint, GaussRat};
use kleinian_core::group::{enumerate_group, GeneratorSet};
use kleinian_core::kulkarni::{
    approx_kulkarni, closed_form_cyclic_diag, count_lines, inoue_family, suspension, toral_family, ClosedFormLimitSet,
    Count, KulkarniParams, LineCount,
};
use kleinian_core::moebius::{compose_inversions, AffineKind, CircleOrLine, Moebius, MoebiusClass};
use kleinian_core::pappus::{iterate_configs, pappus_line, schwartz_generators, PappusConfig};
use kleinian_core::projective::{ProjLine, ProjMap, ProjPoint};
use kleinian_core::schottky::{in_disc_union, limit_points_p1, validate_schottky_p1, SchottkyConfigP1, Verdict};
use kleinian_core::tiling::{build_triangle, enumerate_tiles, Geometry, TriangleSpec};
use kleinian_core::{Complex64 as C64, Error};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

type Check = fn() -> Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn r(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn e(i: usize) -> ProjPoint {
    ProjPoint::basis(2, i)
}

fn line(a: usize, b: usize) -> ProjLine {
    ProjLine::through(&e(a), &e(b)).unwrap()
}

fn random_sl2(rng: &mut ChaCha8Rng) -> Moebius {
    loop {
        let mut z = || C64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let (a, b, c, d) = (z(), z(), z(), z());
        if (a * d - b * c).norm() > 0.25 {
            return Moebius::new(a, b, c, d).unwrap();
        }
    }
}

fn moebius_classification() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut wrong = 0;
    let mut total = 0;
    for want in [MoebiusClass::Identity, MoebiusClass::Parabolic, MoebiusClass::Elliptic, MoebiusClass::Loxodromic] {
        for _ in 0..500 {
            let g = match want {
                MoebiusClass::Identity => Moebius::identity(),
                MoebiusClass::Parabolic => Moebius::translation(r(1.0)),
                MoebiusClass::Elliptic => Moebius::scaling(C64::from_polar(1.0, rng.gen_range(0.1..2.0 * PI - 0.1))).unwrap(),
                MoebiusClass::Loxodromic => {
                    let rho = rng.gen_range(1.1..3.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                    Moebius::scaling(C64::from_polar(rho, rng.gen_range(0.0..2.0 * PI))).unwrap()
                }
            };
            let h = random_sl2(&mut rng);
            let conj = h.compose(&g).compose(&h.inverse());
            total += 1;
            if conj.classify() != want {
                wrong += 1;
            }
        }
    }
    ensure!(wrong == 0, "{wrong} of {total} conjugates misclassified");
    Ok(format!("{total} conjugates, 0 misclassified"))
}

fn reflection_composition() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let c = C64::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
        let alpha = rng.gen_range(0.0..PI);
        let theta = rng.gen_range(0.05..PI - 0.05);
        let first = CircleOrLine::line_through(c, c + C64::from_polar(1.0, alpha)).unwrap();
        let second = CircleOrLine::line_through(c, c + C64::from_polar(1.0, alpha + theta)).unwrap();
        let pair = compose_inversions(&first, &second);
        let rot = C64::from_polar(1.0, 2.0 * theta);
        let want = Moebius::new(rot, c - rot * c, r(0.0), r(1.0)).unwrap();
        ensure!(pair.map.approx_eq(&want, 1e-9), "rotation mismatch at c={c}, theta={theta}");
        match pair.kind {
            AffineKind::Rotation { center, angle } => {
                let da = (angle - 2.0 * theta).rem_euclid(2.0 * PI);
                worst = worst.max((center - c).norm()).max(da.min(2.0 * PI - da));
            }
            k => return Err(format!("expected a rotation, got {k:?}")),
        }

        let n = C64::from_polar(1.0, alpha);
        let offset = rng.gen_range(-3.0..3.0);
        let d = rng.gen_range(0.1..4.0);
        let first = CircleOrLine::line(n, offset).unwrap();
        let second = CircleOrLine::line(n, offset + d).unwrap();
        let pair = compose_inversions(&first, &second);
        let want = Moebius::translation(2.0 * d * n);
        ensure!(pair.map.approx_eq(&want, 1e-9), "translation mismatch for d={d}");
        match pair.kind {
            AffineKind::Translation { vector } => worst = worst.max((vector.norm() - 2.0 * d).abs()),
            k => return Err(format!("expected a translation, got {k:?}")),
        }
    }
    ensure!(worst < 1e-9, "worst deviation {worst:e}");
    Ok(format!("100 crossing + 100 parallel pairs, worst deviation {worst:.1e}"))
}

fn triangle_trichotomy() -> Result<String, String> {
    let mut euclidean = Vec::new();
    let mut spherical = Vec::new();
    for p in 2..=60u32 {
        for q in p..=60 {
            for s in q..=60 {
                match TriangleSpec::new(p, q, s).unwrap().classify() {
                    Geometry::Euclidean => euclidean.push((p, q, s)),
                    Geometry::Spherical => spherical.push((p, q, s)),
                    Geometry::Hyperbolic => {}
                }
            }
        }
    }
    ensure!(euclidean == [(2, 3, 6), (2, 4, 4), (3, 3, 3)], "euclidean triples {euclidean:?}");
    let mut want: Vec<(u32, u32, u32)> = (2..=60).map(|s| (2, 2, s)).collect();
    want.extend([(2, 3, 3), (2, 3, 4), (2, 3, 5)]);
    want.sort();
    ensure!(spherical == want, "spherical triples {spherical:?}");

    let mut cases = vec![((2, 3, 3), 24), ((2, 3, 4), 48), ((2, 3, 5), 120)];
    cases.extend((2..=10).map(|s| ((2, 2, s), 4 * s as usize)));
    let mut worst: f64 = 0.0;
    for ((p, q, s), count) in cases {
        let tiles = enumerate_tiles(&build_triangle(&TriangleSpec::new(p, q, s).unwrap()), 60).map_err(|e| e.to_string())?;
        ensure!(tiles.len() == count, "({p},{q},{s}): {} tiles, want {count}", tiles.len());
        let total: f64 = tiles.iter().map(|t| t.triangle.area()).sum();
        worst = worst.max((total - 4.0 * PI).abs());
    }
    ensure!(worst < 1e-6, "solid-angle sum off by {worst:e}");
    Ok(format!("triples exact; 12 spherical closures, solid-angle error {worst:.1e}"))
}

fn schottky_count() -> Result<String, String> {
    let cfg = SchottkyConfigP1::standard(2, 0.3).map_err(|e| e.to_string())?;
    let report = validate_schottky_p1(&cfg).map_err(|e| e.to_string())?;
    ensure!(report.verdict == Verdict::Valid, "verdict {:?}", report.verdict);
    let elements = enumerate_group(&cfg.generator_set(), 5).map_err(|e| e.to_string())?;
    ensure!(elements.len() == 485, "{} elements", elements.len());
    let cloud = limit_points_p1(&cfg, 8, 1 << 20).map_err(|e| e.to_string())?;
    let outside = cloud.points.iter().filter(|p| !in_disc_union(&cfg, p)).count();
    ensure!(!cloud.is_empty() && outside == 0, "{outside} of {} limit points outside the discs", cloud.len());
    Ok(format!("485 elements; {} depth-8 limit points inside the discs", cloud.len()))
}

fn kulkarni_worked_example() -> Result<String, String> {
    let t0 = Instant::now();
    let gens = GeneratorSet::new(2, vec![ProjMap::diagonal(&[r(2f64.powf(-0.5)), r(1.0), r(2.0)]).unwrap()], vec![])
        .unwrap();
    let params = KulkarniParams { depth: 60, grid: 10_000, eps: 1e-2, ..Default::default() };
    let a = approx_kulkarni(&gens, &params).map_err(|e| e.to_string())?;
    let basis = [e(0), e(1), e(2)];
    let mut low = a.layer(Layers::L0);
    low.extend(a.layer(Layers::L1));
    ensure!(!low.is_empty(), "no L0/L1 points");
    let d_low = low.iter().map(|p| basis.iter().map(|b| p.distance(b)).fold(f64::INFINITY, f64::min)).fold(0.0, f64::max);
    ensure!(d_low <= 1e-4, "L0/L1 point {d_low:e} from the coordinate points");
    let l0 = a.layer(Layers::L0);
    let d_l0 = hausdorff(&l0, &basis);
    ensure!(d_l0 <= 1e-4, "L0 Hausdorff distance {d_l0:e}");
    let l2 = a.layer(Layers::L2);
    let lines = PointsAndLines { points: vec![], lines: vec![line(1, 2), line(0, 1)] };
    let d_l2 = hausdorff_to_set(&l2, &lines, 20_000);
    ensure!(d_l2 <= 1e-2, "L2 Hausdorff distance {d_l2:e}");
    let secs = t0.elapsed().as_secs_f64();
    ensure!(secs <= 300.0, "took {secs:.0}s");
    Ok(format!("L0/L1 within {d_low:.1e}, L2 ({} points) within {d_l2:.1e}, {secs:.1}s", l2.len()))
}

fn suspension_formula() -> Result<String, String> {
    let sigma = GeneratorSet::new(1, vec![ProjMap::diagonal(&[r(2.0), r(1.0)]).unwrap()], vec![]).unwrap();
    let on_line = line(0, 1).sample(400);
    let mut out = Vec::new();
    // The rank-two group of the infinite case reaches the same accuracy at a
    // smaller word length.
    for (g, infinite, depth) in [(1.0, false, 40), (2.0, true, 20)] {
        let params = KulkarniParams { depth, grid: 2000, eps: 1e-2, ..Default::default() };
        let sus = suspension(&sigma, &[r(g)], None).map_err(|e| e.to_string())?;
        ensure!(sus.g_infinite == infinite, "g = {g}: infinite flag {}", sus.g_infinite);
        let a = approx_kulkarni(&sus.generators, &params).map_err(|e| e.to_string())?;
        let d = hausdorff_to_set(&a.cloud.points, &sus.closed.as_set(), 20_000);
        ensure!(d <= 1e-2, "g = {g}: Hausdorff distance {d:e}");
        let idx = SpatialIndex::build(&a.cloud.points, 1e-2);
        let gap = on_line.iter().map(|p| idx.nearest_distance(p)).fold(0.0, f64::max);
        let spread = a.cloud.points.iter().map(|p| line(0, 1).distance(p)).fold(0.0, f64::max);
        if infinite {
            ensure!(gap <= 1e-2, "g = {g}: line(e1,e2) not covered, gap {gap:e}");
        } else {
            ensure!(gap > 0.1 && spread > 0.1, "g = {g}: approximation hugs line(e1,e2), gap {gap:e}");
        }
        out.push(format!("g={g}: d={d:.1e}, line gap {gap:.2}"));
    }
    Ok(out.join("; "))
}

fn chen_greenberg() -> Result<String, String> {
    let gens = GeneratorSet::new(2, vec![loxodromic(1.0)], vec![]).unwrap();
    let params = CgParams { depth: 30, ..Default::default() };
    let base = ProjPoint::from_real(&[0.1, 0.2, 1.0]).unwrap();
    let other = ProjPoint::from_real(&[-0.3, 0.1, 1.0]).unwrap();
    let cg = cg_limit(&gens, &base, params).map_err(|e| e.to_string())?;
    let cg2 = cg_limit(&gens, &other, params).map_err(|e| e.to_string())?;
    ensure!(cg.points.len() == 2 && cg2.points.len() == 2, "{} and {} cluster points", cg.points.len(), cg2.points.len());
    let shift = hausdorff(&cg.points.points, &cg2.points.points);
    ensure!(shift < 1e-3, "base-point dependence {shift:e}");
    let lines = kulkarni_from_cg(&cg).map_err(|e| e.to_string())?;
    ensure!(lines.len() == 2, "{} tangent lines", lines.len());
    let mut worst: f64 = 0.0;
    for (l, z) in lines.iter().zip(&cg.points.points) {
        ensure!(l.contains(z, 1e-9), "tangent line misses its base point");
        worst = worst.max(tangency_residual(l));
    }
    ensure!(worst < 1e-6, "tangency residual {worst:e}");
    Ok(format!("2 null points (base shift {shift:.1e}); 2 tangent lines, residual {worst:.1e}"))
}

fn random_rational(rng: &mut ChaCha8Rng) -> GaussRat {
    GaussRat::ratio(rng.gen_range(-30..=30), rng.gen_range(1..=7))
}

fn random_gaussian(rng: &mut ChaCha8Rng) -> GaussRat {
    let a = random_rational(rng);
    let b = random_rational(rng);
    GaussRat::new(a.re, b.re)
}

/// Three points on each of two random lines.
fn random_config(rng: &mut ChaCha8Rng, coord: fn(&mut ChaCha8Rng) -> GaussRat) -> PappusConfig {
    let row = |rng: &mut ChaCha8Rng| {
        let a = ExactPoint::affine(coord(rng), coord(rng));
        let b = ExactPoint::affine(coord(rng), coord(rng));
        let l = coord(rng);
        let (ax, ay) = a.to_affine().unwrap();
        let (bx, by) = b.to_affine().unwrap();
        let c = ExactPoint::affine(&ax + &(&l * &(&bx - &ax)), &ay + &(&l * &(&by - &ay)));
        [a, b, c]
    };
    let first = row(rng);
    let second = row(rng);
    PappusConfig::new(first, second)
}

fn pappus_exactness() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut report = Vec::new();
    for (name, coord) in [("rational", random_rational as fn(&mut ChaCha8Rng) -> GaussRat), ("gaussian", random_gaussian)] {
        let (mut good, mut skipped) = (0, 0);
        while good < 100 {
            match pappus_line(&random_config(&mut rng, coord)) {
                Ok(pl) => {
                    ensure!(det3(pl.x[0].coords(), pl.x[1].coords(), pl.x[2].coords()).is_zero(), "nonzero determinant");
                    good += 1;
                }
                Err(Error::Degenerate { .. }) => skipped += 1,
                Err(e) => return Err(e.to_string()),
            }
        }
        report.push(format!("{good} {name} (skipped {skipped} degenerate)"));
    }
    let q = |s: &str| -> GaussRat { s.parse().unwrap() };
    let pl = pappus_line(&seed_config()).map_err(|e| e.to_string())?;
    let want = [("2/3", "1/3"), ("15/8", "3/8"), ("13/5", "2/5")].map(|(x, y)| ExactPoint::affine(q(x), q(y)));
    ensure!(pl.x == want, "worked example gave {:?}", pl.x.iter().map(|p| p.to_string()).collect::<Vec<_>>());
    Ok(format!("det = 0 for {}; worked example exact", report.join(", ")))
}

fn seed_config() -> PappusConfig {
    PappusConfig::new(
        [ExactPoint::ints(0, 0), ExactPoint::ints(1, 0), ExactPoint::ints(3, 0)],
        [ExactPoint::ints(0, 1), ExactPoint::ints(2, 1), ExactPoint::ints(5, 1)],
    )
}

fn pappus_iteration() -> Result<String, String> {
    let a = iterate_configs(&seed_config(), 10).map_err(|e| e.to_string())?;
    let b = iterate_configs(&seed_config(), 10).map_err(|e| e.to_string())?;
    let bytes = |c: &kleinian_core::pappus::DualCurve| serde_json::to_vec(c).unwrap();
    ensure!(bytes(&a) == bytes(&b) && a.to_csv() == b.to_csv(), "two runs differ");
    let g = schwartz_generators(&seed_config()).map_err(|e| e.to_string())?;
    ensure!(g.iota.mul(&g.iota).is_scalar(), "iota^2 is not the identity");
    let (l1, l2) = seed_config().lines().map_err(|e| e.to_string())?;
    let map = |l: &ExactPoint| g.iota.apply_line(l).map_err(|e| e.to_string());
    ensure!(map(&l1)? == l2 && map(&l2)? == l1, "iota does not swap L1 and L2");
    Ok(format!("{} lines, byte-identical runs; iota^2 = id, iota swaps L1 and L2", a.lines.len()))
}

fn toral_inoue_guards() -> Result<String, String> {
    let err = toral_family([[3, 5], [-5, 8]], &[1], &[[0, 0]]).err();
    ensure!(err == Some(Error::NotUnimodular { det: 49 }), "got {err:?}");
    let t = toral_family([[2, 1], [1, 1]], &[-1, 0, 1], &[[0, 0], [0, 1], [1, 0], [1, 1]]).map_err(|e| e.to_string())?;
    let tc = t.sign_check(8, 200, 0).map_err(|e| e.to_string())?;
    ensure!(tc.flips == 0 && tc.steps > 0, "toral {tc:?}");
    let f = inoue_family([[0, 1, 0], [0, 0, 1], [1, 1, 0]]).map_err(|e| e.to_string())?;
    let ic = f.sign_check(8, 200, 0).map_err(|e| e.to_string())?;
    ensure!(ic.flips == 0 && ic.steps > 0, "inoue {ic:?}");
    Ok(format!("det 49 rejected; toral {} steps, inoue {} steps, 0 flips", tc.steps, ic.steps))
}

fn line_counting() -> Result<String, String> {
    let cyclic = closed_form_cyclic_diag([r(2f64.powf(-0.5)), r(1.0), r(2.0)]).map_err(|e| e.to_string())?;
    let lc = count_lines(&cyclic).map_err(|e| e.to_string())?;
    ensure!(lc == LineCount { lin: Count::Finite(2), ling: Count::Finite(2) }, "cyclic {lc:?}");
    let mut concurrent = ClosedFormLimitSet::new(2);
    let hub = ProjPoint::from_real(&[1.0, 2.0, 1.0]).unwrap();
    for other in [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [3.0, -1.0, 1.0]] {
        let l = ProjLine::through(&hub, &ProjPoint::from_real(&other).unwrap()).unwrap();
        concurrent.add_line(l, Layers::L2);
    }
    let cc = count_lines(&concurrent).map_err(|e| e.to_string())?;
    ensure!(cc.ling == Count::Finite(2), "concurrent {cc:?}");
    let t = toral_family([[2, 1], [1, 1]], &[1], &[[0, 0], [1, 0]]).map_err(|e| e.to_string())?;
    let tc = count_lines(&t.closed).map_err(|e| e.to_string())?;
    ensure!(tc.ling == Count::Finite(4), "toral {tc:?}");
    Ok(format!("cyclic (2,2), concurrent ling 2, toral ling {}", tc.ling))
}

fn sidecar_reproducibility() -> Result<String, String> {
    let diagonal = json!({ "generators": [[[0.7071067811865476, 0, 0], [0, 1, 0], [0, 0, 2]]] });
    let pappus_seed = json!({ "first": [[0, 0], [1, 0], [3, 0]], "second": [[0, 1], [2, 1], [5, 1]] });
    let boost = json!({ "generators": [[[1.5430806348152437, 0, 1.1752011936438014], [0, 1, 0], [1.1752011936438014, 0, 1.5430806348152437]]] });
    let with = |cmd, input, depth: Option<usize>| {
        let mut c = RunConfig::new(cmd, input);
        c.depth = depth;
        c
    };
    let mut kulkarni = with(Command::Kulkarni, diagonal, Some(16));
    kulkarni.grid = Some(200);
    kulkarni.eps = Some(0.05);
    kulkarni.seed = 11;
    let mut tile = with(Command::Tile, json!([2, 3, 7]), Some(5));
    tile.raster.width = 200;
    tile.raster.height = 200;
    let configs = vec![
        with(Command::Classify, json!([[2, 1], [1, 1]]), None),
        tile,
        with(Command::Tile, json!([2, 3, 4]), None),
        with(Command::Schottky, json!({ "genus": 2, "radius": 0.3 }), Some(6)),
        kulkarni,
        with(Command::CgLimit, boost, Some(20)),
        with(Command::Pappus, pappus_seed, Some(6)),
        with(Command::Render, json!({ "csv": "re0,im0,re1,im1\n1,0,1,0\n0.5,0.5,1,0\n" }), None),
    ];
    let mut files = 0;
    for cfg in configs {
        let name = cfg.command.name();
        let first = run(&cfg).map_err(|e| format!("{name}: {}", e.message()))?;
        let sidecar = first.artifact("run.json").ok_or(format!("{name}: no sidecar"))?;
        let replay = RunConfig::from_json(std::str::from_utf8(sidecar).unwrap()).map_err(|e| e.message().to_string())?;
        let second = run(&replay).map_err(|e| format!("{name}: {}", e.message()))?;
        let differing: Vec<&str> = first
            .artifacts
            .iter()
            .zip(&second.artifacts)
            .filter(|(a, b)| a != b)
            .map(|(a, _)| a.0.as_str())
            .collect();
        ensure!(
            first.artifacts.len() == second.artifacts.len() && differing.is_empty(),
            "{name}: regenerated artifacts differ: {differing:?}"
        );
        files += first.artifacts.len();
    }
    Ok(format!("{files} artifacts across 8 runs regenerate byte-identically"))
}

fn main() {
    let checks: [(&str, Check); 12] = [
        ("Moebius classification", moebius_classification),
        ("reflection composition", reflection_composition),
        ("triangle trichotomy and closure", triangle_trichotomy),
        ("Schottky free-group count", schottky_count),
        ("Kulkarni diagonal example", kulkarni_worked_example),
        ("suspension limit sets", suspension_formula),
        ("PU(2,1) limit set and tangent lines", chen_greenberg),
        ("Pappus exactness", pappus_exactness),
        ("Pappus iteration", pappus_iteration),
        ("toral and Inoue guards", toral_inoue_guards),
        ("line counting", line_counting),
        ("sidecar reproducibility", sidecar_reproducibility),
    ];
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, check)) in checks.iter().enumerate() {
        let t0 = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let secs = t0.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("[PASS] criterion {:>2}: {name}: {detail} ({secs:.1}s)", i + 1),
            Err(why) => {
                failed += 1;
                println!("[FAIL] criterion {:>2}: {name}: {why} ({secs:.1}s)", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", checks.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
