//! Command-line front end: run configurations, dispatch to the geometry
//! library, artifact writing and rasterization.

pub mod raster;

use std::fmt;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use kleinian_core::cloud::{hausdorff_to_set, Layers, PointCloud};
use kleinian_core::complex_hyperbolic::{cg_limit, kulkarni_from_cg, tangency_residual, CgParams};
use kleinian_core::exact::ExactPoint;
use kleinian_core::group::GeneratorSet;
use kleinian_core::kulkarni::{approx_kulkarni, closed_form_cyclic_diag, KulkarniParams};
use kleinian_core::moebius::Moebius;
use kleinian_core::pappus::{iterate_configs, schwartz_generators, PappusConfig};
use kleinian_core::projective::{ProjMap, ProjPoint};
use kleinian_core::schottky::{limit_points_p1, validate_schottky_p1, Disc, SchottkyConfigP1};
use kleinian_core::tiling::{build_triangle, enumerate_tiles, Geometry, TriangleSpec};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use raster::{check_viewport, fill_polygon, fit_viewport, project, splat, Raster, RasterSpec, Rgb, Viewport};

pub const MAX_GRID: usize = 1_000_000;
pub const MAX_SCHOTTKY_WORDS: usize = 2_000_000;
pub const TILE_OUTLINE_SAMPLES: usize = 16;
/// Quantile trimmed on each side when fitting a viewport to a point cloud.
pub const VIEWPORT_TRIM: f64 = 0.02;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Classify,
    Tile,
    Schottky,
    Kulkarni,
    CgLimit,
    Pappus,
    Render,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Classify => "classify",
            Command::Tile => "tile",
            Command::Schottky => "schottky",
            Command::Kulkarni => "kulkarni",
            Command::CgLimit => "cg-limit",
            Command::Pappus => "pappus",
            Command::Render => "render",
        }
    }

    fn default_depth(&self) -> usize {
        match self {
            Command::Tile => 6,
            Command::Schottky => 8,
            Command::Kulkarni => 20,
            Command::CgLimit => 10,
            Command::Pappus => 10,
            Command::Classify | Command::Render => 0,
        }
    }

    fn max_depth(&self) -> usize {
        match self {
            Command::Tile => 40,
            Command::Schottky => 14,
            Command::Kulkarni => 200,
            Command::CgLimit => 40,
            Command::Pappus => 20,
            Command::Classify | Command::Render => usize::MAX,
        }
    }
}

/// Failure classes with their process exit codes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Failure {
    Schema(String),
    Resource(String),
    Module(String),
    Io(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Schema(_) => 2,
            Failure::Resource(_) => 3,
            Failure::Module(_) => 4,
            Failure::Io(_) => 5,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Failure::Schema(_) => "schema",
            Failure::Resource(_) => "resource",
            Failure::Module(_) => "module",
            Failure::Io(_) => "io",
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Schema(m) | Failure::Resource(m) | Failure::Module(m) | Failure::Io(m) => m,
        }
    }

    /// Machine-readable form printed on stderr.
    pub fn to_json(&self) -> String {
        json!({ "error": { "kind": self.kind(), "code": self.exit_code(), "message": self.message() } }).to_string()
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} error: {}", self.kind(), self.message())
    }
}

impl From<kleinian_core::Error> for Failure {
    fn from(e: kleinian_core::Error) -> Self {
        use kleinian_core::Error as E;
        match e {
            E::ResourceLimit { .. } | E::TooManyLines { .. } => Failure::Resource(e.to_string()),
            _ => Failure::Module(e.to_string()),
        }
    }
}

type Res<T> = std::result::Result<T, Failure>;

/// A complete, self-contained description of one run. The sidecar `run.json`
/// written next to the artifacts is this structure with defaults filled in.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    /// Command-specific input document.
    #[serde(default)]
    pub input: Value,
    #[serde(default)]
    pub depth: Option<usize>,
    #[serde(default)]
    pub grid: Option<usize>,
    #[serde(default)]
    pub eps: Option<f64>,
    #[serde(default)]
    pub seed: u64,
    /// Affine chart `z_chart = 1`, 1-based; the last coordinate by default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chart: Option<usize>,
    #[serde(default)]
    pub raster: RasterSpec,
}

impl RunConfig {
    pub fn new(command: Command, input: Value) -> Self {
        RunConfig { command, input, depth: None, grid: None, eps: None, seed: 0, chart: None, raster: RasterSpec::default() }
    }

    pub fn from_json(text: &str) -> Res<Self> {
        serde_json::from_str(text).map_err(|e| Failure::Schema(format!("run config: {e}")))
    }

    /// Fills in per-command defaults and checks bounds.
    pub fn resolve(mut self) -> Res<Self> {
        let cmd = self.command;
        if self.input.is_null() {
            return Err(Failure::Schema(format!("{} needs an input document", cmd.name())));
        }
        if !matches!(cmd, Command::Classify | Command::Render) {
            let depth = *self.depth.get_or_insert(cmd.default_depth());
            if depth > cmd.max_depth() {
                return Err(Failure::Resource(format!("depth {depth} exceeds {} for {}", cmd.max_depth(), cmd.name())));
            }
        }
        if cmd == Command::Kulkarni {
            let grid = *self.grid.get_or_insert(1000);
            if grid > MAX_GRID {
                return Err(Failure::Resource(format!("grid {grid} exceeds {MAX_GRID}")));
            }
        }
        if matches!(cmd, Command::Kulkarni | Command::CgLimit) {
            let eps = *self.eps.get_or_insert(1e-2);
            if !(eps > 0.0 && eps < 1.0) {
                return Err(Failure::Schema(format!("eps must lie in (0, 1), got {eps}")));
            }
        }
        self.raster.check().map_err(Failure::Schema)?;
        if self.raster.pixels() > raster::MAX_PIXELS {
            return Err(Failure::Resource(format!("raster of {} pixels exceeds {}", self.raster.pixels(), raster::MAX_PIXELS)));
        }
        Ok(self)
    }

    fn depth(&self) -> usize {
        self.depth.unwrap_or(self.command.default_depth())
    }

    fn chart(&self, dim: usize) -> Res<usize> {
        let c = self.chart.unwrap_or(dim + 1);
        if c == 0 || c > dim + 1 {
            return Err(Failure::Schema(format!("chart {c} out of range 1..={} for P^{dim}", dim + 1)));
        }
        Ok(c)
    }

    fn input<T: DeserializeOwned>(&self) -> Res<T> {
        T::deserialize(&self.input).map_err(|e| Failure::Schema(format!("{} input: {e}", self.command.name())))
    }
}

/// Everything a run produces; nothing is written until the run succeeded.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    /// File name and contents, in writing order; `run.json` comes last.
    pub artifacts: Vec<(String, Vec<u8>)>,
    pub summary: Value,
    /// Text for standard output.
    pub stdout: String,
}

impl Outcome {
    pub fn artifact(&self, name: &str) -> Option<&[u8]> {
        self.artifacts.iter().find(|(n, _)| n == name).map(|(_, b)| b.as_slice())
    }
}

fn pretty<T: Serialize>(v: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(v).expect("serializable");
    out.push(b'\n');
    out
}

/// Runs a resolved configuration.
pub fn run(cfg: &RunConfig) -> Res<Outcome> {
    let cfg = cfg.clone().resolve()?;
    let (mut artifacts, summary, stdout) = match cfg.command {
        Command::Classify => run_classify(&cfg)?,
        Command::Tile => run_tile(&cfg)?,
        Command::Schottky => run_schottky(&cfg)?,
        Command::Kulkarni => run_kulkarni(&cfg)?,
        Command::CgLimit => run_cg_limit(&cfg)?,
        Command::Pappus => run_pappus(&cfg)?,
        Command::Render => run_render(&cfg)?,
    };
    let stdout = stdout.unwrap_or_else(|| format!("{summary}\n"));
    artifacts.push(("summary.json".into(), pretty(&summary)));
    artifacts.push(("run.json".into(), pretty(&cfg)));
    Ok(Outcome { artifacts, summary, stdout })
}

type Produced = (Vec<(String, Vec<u8>)>, Value, Option<String>);

struct GroupInput {
    generators: Vec<ProjMap>,
    labels: Vec<String>,
}

impl GroupInput {
    fn into_set(self) -> Res<GeneratorSet> {
        let dim = self.generators.first().map(ProjMap::dim).ok_or_else(|| Failure::Schema("no generators".into()))?;
        GeneratorSet::new(dim, self.generators, self.labels).map_err(|e| Failure::Schema(e.to_string()))
    }
}

fn run_classify(cfg: &RunConfig) -> Res<Produced> {
    let g: ProjMap = cfg.input()?;
    let m = Moebius::from_projmap(&g).map_err(|e| Failure::Schema(e.to_string()))?;
    let class = m.classify();
    let report = json!({
        "class": class,
        "trace": [m.trace().re, m.trace().im],
        "fixed_points": m.fixed_points(),
    });
    Ok((vec![("classify.json".into(), pretty(&report))], report, Some(format!("{class}\n"))))
}

#[derive(Deserialize)]
#[serde(untagged)]
enum TriangleInput {
    Triple([u32; 3]),
    Named { p: u32, q: u32, r: u32 },
}

fn run_tile(cfg: &RunConfig) -> Res<Produced> {
    let [p, q, r] = match cfg.input()? {
        TriangleInput::Triple(t) => t,
        TriangleInput::Named { p, q, r } => [p, q, r],
    };
    let spec = TriangleSpec::new(p, q, r).map_err(|e| Failure::Schema(e.to_string()))?;
    let geometry = spec.classify();
    let tiles = enumerate_tiles(&build_triangle(&spec), cfg.depth())?;
    // Sphere tiles are drawn through stereographic projection from the south pole.
    let plane = |v: &[f64; 3]| match geometry {
        Geometry::Spherical => (1.0 + v[2] > 1e-6).then(|| (v[0] / (1.0 + v[2]), v[1] / (1.0 + v[2]))),
        _ => Some((v[0], v[1])),
    };
    let mut polys = Vec::with_capacity(tiles.len());
    let mut dropped = 0;
    for t in &tiles {
        match t.triangle.outline(TILE_OUTLINE_SAMPLES).iter().map(plane).collect::<Option<Vec<_>>>() {
            Some(poly) => polys.push((poly, cfg.raster.tile_colors[t.odd as usize])),
            None => dropped += 1,
        }
    }
    let rect = match (cfg.raster.viewport, geometry) {
        (Some(v), _) => v,
        (None, Geometry::Hyperbolic) => [-1.0, -1.0, 1.0, 1.0],
        (None, _) => fit_viewport(&polys.iter().flat_map(|(p, _)| p.iter().copied()).collect::<Vec<_>>(), 0.0),
    };
    let mut img = Raster::new(cfg.raster.width, cfg.raster.height, cfg.raster.background);
    let vp = Viewport::new(rect, img.width, img.height);
    for (poly, c) in &polys {
        fill_polygon(&mut img, &vp, poly, *c);
    }
    let area: f64 = tiles.iter().map(|t| t.triangle.area()).sum();
    let summary = json!({
        "command": "tile",
        "triple": [p, q, r],
        "geometry": geometry,
        "depth": cfg.depth(),
        "tiles": tiles.len(),
        "area_sum": area,
        "raster": { "viewport": rect, "dropped": dropped },
    });
    Ok((vec![("tiles.json".into(), pretty(&tiles)), ("image.ppm".into(), img.to_ppm())], summary, None))
}

#[derive(Deserialize)]
#[serde(untagged)]
enum SchottkyInput {
    Standard { genus: usize, radius: f64 },
    Discs { r_discs: Vec<Disc>, s_discs: Vec<Disc> },
}

fn run_schottky(cfg: &RunConfig) -> Res<Produced> {
    let sc = match cfg.input()? {
        SchottkyInput::Standard { genus, radius } => SchottkyConfigP1::standard(genus, radius),
        SchottkyInput::Discs { r_discs, s_discs } => SchottkyConfigP1::from_discs(r_discs, s_discs),
    }
    .map_err(|e| Failure::Schema(e.to_string()))?;
    let report = validate_schottky_p1(&sc)?;
    let cloud = limit_points_p1(&sc, cfg.depth(), MAX_SCHOTTKY_WORDS)?;
    let colors = vec![cfg.raster.foreground; cloud.len()];
    let (ppm, stats) = render_cloud(cfg, &cloud, &colors)?;
    let summary = json!({
        "command": "schottky",
        "genus": sc.genus(),
        "verdict": report.verdict,
        "depth": cfg.depth(),
        "limit_points": cloud.len(),
        "raster": stats,
    });
    let out = vec![
        ("report.json".into(), pretty(&json!({ "config": sc, "report": report }))),
        ("limit.csv".into(), cloud.to_csv().into_bytes()),
        ("image.ppm".into(), ppm),
    ];
    Ok((out, summary, None))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct KulkarniInput {
    generators: Vec<ProjMap>,
    #[serde(default)]
    labels: Vec<String>,
    /// Further approximation parameters; `depth`, `grid`, `eps` and `seed`
    /// of the run configuration take precedence.
    #[serde(default)]
    params: Option<KulkarniParams>,
}

fn is_diagonal(g: &ProjMap) -> bool {
    let m = g.matrix();
    let scale = m.iter().map(|z| z.norm()).fold(0.0, f64::max);
    (0..m.nrows()).all(|i| (0..m.ncols()).all(|j| i == j || m[(i, j)].norm() <= 1e-14 * scale))
}

fn run_kulkarni(cfg: &RunConfig) -> Res<Produced> {
    let input: KulkarniInput = cfg.input()?;
    let gens = GroupInput { generators: input.generators, labels: input.labels }.into_set()?;
    let mut params = input.params.unwrap_or_default();
    params.depth = cfg.depth();
    params.grid = cfg.grid.unwrap_or(params.grid);
    params.eps = cfg.eps.unwrap_or(params.eps);
    params.seed = cfg.seed;
    let approx = approx_kulkarni(&gens, &params)?;
    let mut out = vec![("approx.csv".to_string(), approx.cloud.to_csv().into_bytes())];
    let mut summary = json!({
        "command": "kulkarni",
        "dim": gens.dim,
        "depth": params.depth,
        "grid": params.grid,
        "eps": params.eps,
        "seed": params.seed,
        "elements": approx.elements,
        "finite": approx.finite,
        "points": approx.cloud.len(),
        "layers": {
            "L0": approx.layer(Layers::L0).len(),
            "L1": approx.layer(Layers::L1).len(),
            "L2": approx.layer(Layers::L2).len(),
        },
        "warnings": approx.warnings,
    });
    if gens.dim == 2 && gens.generators.len() == 1 && is_diagonal(&gens.generators[0]) {
        let m = gens.generators[0].matrix();
        if let Ok(closed) = closed_form_cyclic_diag([m[(0, 0)], m[(1, 1)], m[(2, 2)]]) {
            let per_line = ((2.0 * std::f64::consts::PI / (params.eps * params.eps)).ceil() as usize).min(20_000);
            let h = hausdorff_to_set(&approx.cloud.points, &closed.as_set(), per_line);
            summary["closed_form"] = json!({ "hausdorff": h, "points": closed.points.len(), "lines": closed.lines.len() });
            out.push(("closed_form.json".into(), pretty(&closed)));
        }
    }
    let colors: Vec<Rgb> = approx.cloud.tags.iter().map(|t| cfg.raster.layer_color(t)).collect();
    let (ppm, stats) = render_cloud(cfg, &approx.cloud, &colors)?;
    summary["raster"] = stats;
    out.push(("image.ppm".into(), ppm));
    Ok((out, summary, None))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CgInput {
    generators: Vec<ProjMap>,
    #[serde(default)]
    labels: Vec<String>,
    #[serde(default)]
    base: Option<ProjPoint>,
    #[serde(default)]
    k: Option<usize>,
    #[serde(default)]
    boundary_tol: Option<f64>,
}

fn run_cg_limit(cfg: &RunConfig) -> Res<Produced> {
    let input: CgInput = cfg.input()?;
    let gens = GroupInput { generators: input.generators, labels: input.labels }.into_set()?;
    let base = input.base.unwrap_or_else(|| ProjPoint::basis(2, 2));
    let mut params = CgParams { depth: cfg.depth(), ..CgParams::default() };
    params.cluster.eps = cfg.eps.unwrap_or(params.cluster.eps);
    params.cluster.k = input.k.unwrap_or(params.cluster.k);
    params.boundary_tol = input.boundary_tol.unwrap_or(params.boundary_tol);
    let cg = cg_limit(&gens, &base, params)?;
    let lines = kulkarni_from_cg(&cg)?;
    let tangents: Vec<Value> = cg
        .points
        .points
        .iter()
        .zip(&lines)
        .map(|(p, l)| json!({ "point": p, "line": l, "tangency_residual": tangency_residual(l) }))
        .collect();
    let colors = vec![cfg.raster.foreground; cg.points.len()];
    let (ppm, stats) = render_cloud(cfg, &cg.points, &colors)?;
    let summary = json!({
        "command": "cg-limit",
        "depth": params.depth,
        "eps": params.cluster.eps,
        "limit_points": cg.points.len(),
        "tangent_lines": lines.len(),
        "raster": stats,
    });
    let out = vec![
        ("limit.csv".into(), cg.points.to_csv().into_bytes()),
        ("tangent_lines.json".into(), pretty(&tangents)),
        ("image.ppm".into(), ppm),
    ];
    Ok((out, summary, None))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PappusInput {
    first: [ExactPoint; 3],
    second: [ExactPoint; 3],
}

fn run_pappus(cfg: &RunConfig) -> Res<Produced> {
    let input: PappusInput = cfg.input()?;
    let c = PappusConfig::new(input.first, input.second);
    let curve = iterate_configs(&c, cfg.depth())?;
    let pts = curve
        .dual_points()
        .iter()
        .map(|p| ProjPoint::new(p.to_c64().to_vec()))
        .collect::<kleinian_core::Result<Vec<_>>>()?;
    let cloud = PointCloud::new(2, pts, cfg.depth(), 0.0)?;
    let colors = vec![cfg.raster.foreground; cloud.len()];
    let (ppm, stats) = render_cloud(cfg, &cloud, &colors)?;
    let mut summary = json!({
        "command": "pappus",
        "depth": cfg.depth(),
        "lines": curve.lines.len(),
        "raster": stats,
    });
    let mut out = vec![
        ("dual_curve.csv".to_string(), curve.to_csv().into_bytes()),
        ("curve.json".to_string(), pretty(&curve)),
    ];
    if c.is_real() {
        let g = schwartz_generators(&c)?;
        summary["relations"] = g.report.iter().map(|r| (r.name.clone(), Value::Bool(r.holds))).collect();
        out.push(("generators.json".into(), pretty(&g)));
    }
    out.push(("image.ppm".into(), ppm));
    Ok((out, summary, None))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RenderInput {
    /// Point cloud in the CSV layout written by the other commands.
    csv: String,
}

fn run_render(cfg: &RunConfig) -> Res<Produced> {
    let input: RenderInput = cfg.input()?;
    let cloud = PointCloud::from_csv(&input.csv).map_err(|e| Failure::Schema(e.to_string()))?;
    let colors: Vec<Rgb> = if cloud.tags.is_empty() {
        vec![cfg.raster.foreground; cloud.len()]
    } else {
        cloud.tags.iter().map(|t| cfg.raster.layer_color(t)).collect()
    };
    let (ppm, stats) = render_cloud(cfg, &cloud, &colors)?;
    let summary = json!({ "command": "render", "points": cloud.len(), "raster": stats });
    Ok((vec![("image.ppm".into(), ppm)], summary, None))
}

/// Splats a cloud through the configured chart.
fn render_cloud(cfg: &RunConfig, cloud: &PointCloud, colors: &[Rgb]) -> Res<(Vec<u8>, Value)> {
    let mut warnings = Vec::new();
    let (projected, dropped) = if cloud.is_empty() {
        warnings.push("empty input; blank image".to_string());
        (Vec::new(), 0)
    } else {
        let chart = cfg.chart(cloud.dim)?;
        let mut kept = Vec::with_capacity(cloud.len());
        for (p, c) in cloud.points.iter().zip(colors) {
            if let Some(xy) = project(p, chart) {
                kept.push((xy, *c));
            }
        }
        let dropped = cloud.len() - kept.len();
        (kept, dropped)
    };
    let rect = match cfg.raster.viewport {
        Some(v) => v,
        None => fit_viewport(&projected.iter().map(|(p, _)| *p).collect::<Vec<_>>(), VIEWPORT_TRIM),
    };
    check_viewport(&rect).map_err(Failure::Schema)?;
    let mut img = Raster::new(cfg.raster.width, cfg.raster.height, cfg.raster.background);
    let vp = Viewport::new(rect, img.width, img.height);
    let stats = splat(&mut img, &vp, &projected);
    let info = json!({
        "viewport": rect,
        "drawn": stats.drawn,
        "outside": stats.outside,
        "dropped_near_infinity": dropped,
        "warnings": warnings,
    });
    Ok((img.to_ppm(), info))
}

/// Writes every artifact into `dir` through a temporary file and a rename.
pub fn write_artifacts(dir: &Path, artifacts: &[(String, Vec<u8>)]) -> Res<()> {
    let io = |what: &str, p: &Path, e: std::io::Error| Failure::Io(format!("{what} {}: {e}", p.display()));
    fs::create_dir_all(dir).map_err(|e| io("creating", dir, e))?;
    for (name, bytes) in artifacts {
        let target = dir.join(name);
        let tmp = dir.join(format!(".{name}.tmp"));
        let mut f = fs::File::create(&tmp).map_err(|e| io("creating", &tmp, e))?;
        f.write_all(bytes).and_then(|_| f.sync_all()).map_err(|e| io("writing", &tmp, e))?;
        fs::rename(&tmp, &target).map_err(|e| io("renaming", &target, e))?;
    }
    Ok(())
}

/// Reads an input argument: inline JSON when it starts with `[` or `{`,
/// otherwise a path to a JSON file (or, for `render`, a CSV file).
pub fn read_input(command: Command, arg: &str) -> Res<Value> {
    let t = arg.trim_start();
    if t.starts_with('[') || t.starts_with('{') {
        return serde_json::from_str(t).map_err(|e| Failure::Schema(format!("inline input: {e}")));
    }
    let text = fs::read_to_string(arg).map_err(|e| Failure::Io(format!("reading {arg}: {e}")))?;
    if command == Command::Render {
        return Ok(json!({ "csv": text }));
    }
    serde_json::from_str(&text).map_err(|e| Failure::Schema(format!("{arg}: {e}")))
}

/// Flags shared by every subcommand.
#[derive(Clone, Debug, Default, clap::Args)]
pub struct Common {
    /// Run configuration file; flags given on the command line override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory for artifacts; without it only the summary is printed.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub depth: Option<usize>,
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Affine chart `z_k = 1`, 1-based.
    #[arg(long)]
    pub chart: Option<usize>,
    #[arg(long)]
    pub width: Option<usize>,
    #[arg(long)]
    pub height: Option<usize>,
    /// Viewport `x0,y0,x1,y1` in chart coordinates.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_viewport)]
    pub viewport: Option<[f64; 4]>,
}

fn parse_viewport(s: &str) -> Result<[f64; 4], String> {
    let v = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}")))
        .collect::<Result<Vec<_>, _>>()?;
    v.try_into().map_err(|v: Vec<f64>| format!("expected 4 values, got {}", v.len()))
}

#[derive(Debug, clap::Parser)]
#[command(name = "kleinian", version, about = "Discrete groups of projective transformations: limit sets, tilings and Pappus curves")]
pub struct Cli {
    #[command(subcommand)]
    pub action: Action,
}

#[derive(Debug, clap::Subcommand)]
pub enum Action {
    /// Classify a 2x2 Moebius matrix.
    Classify(WithInput),
    /// Triangle-group tiling from a triple `[p, q, r]`.
    Tile(WithInput),
    /// Schottky group validation and limit points.
    Schottky(WithInput),
    /// Kulkarni limit set approximation.
    Kulkarni(WithInput),
    /// Limit set of a PU(2,1) group from an interior orbit.
    CgLimit(WithInput),
    /// Pappus iteration and generator report.
    Pappus(WithInput),
    /// Rasterize a CSV point cloud.
    Render(WithInput),
    /// Run a configuration file.
    Run(Common),
}

#[derive(Debug, clap::Args)]
pub struct WithInput {
    /// Input: inline JSON or a file path.
    pub input: Option<String>,
    #[command(flatten)]
    pub common: Common,
}

fn build_config(command: Option<Command>, input: Option<&str>, c: &Common) -> Res<RunConfig> {
    let mut cfg = match &c.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Failure::Io(format!("reading {}: {e}", path.display())))?;
            let cfg = RunConfig::from_json(&text)?;
            if let Some(cmd) = command {
                if cmd != cfg.command {
                    return Err(Failure::Schema(format!(
                        "config is for '{}', not '{}'",
                        cfg.command.name(),
                        cmd.name()
                    )));
                }
            }
            cfg
        }
        None => match command {
            Some(cmd) => RunConfig::new(cmd, Value::Null),
            None => return Err(Failure::Schema("run needs --config".into())),
        },
    };
    if let Some(arg) = input {
        cfg.input = read_input(cfg.command, arg)?;
    }
    cfg.depth = c.depth.or(cfg.depth);
    cfg.grid = c.grid.or(cfg.grid);
    cfg.eps = c.eps.or(cfg.eps);
    cfg.seed = c.seed.unwrap_or(cfg.seed);
    cfg.chart = c.chart.or(cfg.chart);
    cfg.raster.width = c.width.unwrap_or(cfg.raster.width);
    cfg.raster.height = c.height.unwrap_or(cfg.raster.height);
    if let Some(v) = c.viewport {
        cfg.raster.viewport = Some(v);
    }
    Ok(cfg)
}

/// Entry point used by the binary; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    use clap::Parser;
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            let f = Failure::Schema(e.to_string().trim().to_string());
            eprintln!("{}", f.to_json());
            return f.exit_code();
        }
    };
    match execute(cli.action) {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("{}", f.to_json());
            f.exit_code()
        }
    }
}

fn execute(action: Action) -> Res<()> {
    let (cmd, input, common) = match action {
        Action::Classify(w) => (Some(Command::Classify), w.input, w.common),
        Action::Tile(w) => (Some(Command::Tile), w.input, w.common),
        Action::Schottky(w) => (Some(Command::Schottky), w.input, w.common),
        Action::Kulkarni(w) => (Some(Command::Kulkarni), w.input, w.common),
        Action::CgLimit(w) => (Some(Command::CgLimit), w.input, w.common),
        Action::Pappus(w) => (Some(Command::Pappus), w.input, w.common),
        Action::Render(w) => (Some(Command::Render), w.input, w.common),
        Action::Run(c) => (None, None, c),
    };
    let cfg = build_config(cmd, input.as_deref(), &common)?;
    let outcome = run(&cfg)?;
    if let Some(dir) = &common.out {
        write_artifacts(dir, &outcome.artifacts)?;
    }
    if let Some(w) = outcome.summary["raster"]["warnings"].as_array() {
        for m in w {
            eprintln!("warning: {}", m.as_str().unwrap_or_default());
        }
    }
    print!("{}", outcome.stdout);
    Ok(())
}
