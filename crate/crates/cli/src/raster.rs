//! Binary PPM rasterization of point clouds and tile outlines.

use kleinian_core::cloud::Layers;
use kleinian_core::projective::ProjPoint;
use serde::{Deserialize, Serialize};

/// Points whose chart denominator is smaller than this are not drawn.
pub const CHART_DENOMINATOR_MIN: f64 = 1e-6;
pub const MAX_PIXELS: usize = 1 << 26;

pub type Rgb = [u8; 3];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RasterSpec {
    pub width: usize,
    pub height: usize,
    /// `[x0, y0, x1, y1]` in chart coordinates; fitted to the data when absent.
    pub viewport: Option<[f64; 4]>,
    pub background: Rgb,
    pub foreground: Rgb,
    /// Colors for points tagged `L0`, `L1`, `L2`.
    pub layer_colors: [Rgb; 3],
    /// Fill colors for even and odd tiles.
    pub tile_colors: [Rgb; 2],
}

impl Default for RasterSpec {
    fn default() -> Self {
        RasterSpec {
            width: 512,
            height: 512,
            viewport: None,
            background: [255, 255, 255],
            foreground: [0, 0, 0],
            layer_colors: [[200, 30, 30], [30, 150, 30], [30, 60, 200]],
            tile_colors: [[225, 225, 240], [70, 70, 140]],
        }
    }
}

impl RasterSpec {
    pub fn check(&self) -> Result<(), String> {
        if self.width == 0 || self.height == 0 {
            return Err(format!("raster size must be positive, got {}x{}", self.width, self.height));
        }
        if let Some(v) = self.viewport {
            check_viewport(&v)?;
        }
        Ok(())
    }

    pub fn pixels(&self) -> usize {
        self.width.saturating_mul(self.height)
    }

    pub fn layer_color(&self, t: &Layers) -> Rgb {
        if t.l0 {
            self.layer_colors[0]
        } else if t.l1 {
            self.layer_colors[1]
        } else if t.l2 {
            self.layer_colors[2]
        } else {
            self.foreground
        }
    }
}

pub fn check_viewport(v: &[f64; 4]) -> Result<(), String> {
    if v.iter().any(|x| !x.is_finite()) || v[2] <= v[0] || v[3] <= v[1] {
        return Err(format!("degenerate viewport {v:?}"));
    }
    Ok(())
}

/// Plane coordinates of `p` in the chart `z_chart = 1` (1-based).
///
/// On P^1 the chart coordinate is a single complex number drawn as
/// `(re, im)`; in higher dimension the real parts of the first two remaining
/// affine coordinates are drawn.
pub fn project(p: &ProjPoint, chart: usize) -> Option<(f64, f64)> {
    let c = p.coords();
    let den = c[chart - 1];
    if den.norm() < CHART_DENOMINATOR_MIN {
        return None;
    }
    let mut rest = c.iter().enumerate().filter(|(i, _)| *i != chart - 1).map(|(_, z)| z / den);
    let first = rest.next()?;
    let xy = match rest.next() {
        Some(second) => (first.re, second.re),
        None => (first.re, first.im),
    };
    (xy.0.is_finite() && xy.1.is_finite()).then_some(xy)
}

/// Box spanned by the points between the `trim` and `1 - trim` quantiles in
/// each axis, padded by 5%; the unit square when empty. A positive `trim`
/// keeps a few far-away points from shrinking the picture.
pub fn fit_viewport(pts: &[(f64, f64)], trim: f64) -> [f64; 4] {
    if pts.is_empty() {
        return [-1.0, -1.0, 1.0, 1.0];
    }
    let range = |mut v: Vec<f64>| {
        v.sort_by(f64::total_cmp);
        let n = v.len() - 1;
        let lo = v[(trim * n as f64).floor() as usize];
        let hi = v[((1.0 - trim) * n as f64).ceil() as usize];
        let w = hi - lo;
        if w > 1e-12 {
            (lo - 0.05 * w, hi + 0.05 * w)
        } else {
            (lo - 1.0, hi + 1.0)
        }
    };
    let (x0, x1) = range(pts.iter().map(|p| p.0).collect());
    let (y0, y1) = range(pts.iter().map(|p| p.1).collect());
    [x0, y0, x1, y1]
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Raster {
    pub width: usize,
    pub height: usize,
    pub data: Vec<u8>,
}

impl Raster {
    pub fn new(width: usize, height: usize, background: Rgb) -> Self {
        Raster { width, height, data: background.repeat(width * height) }
    }

    pub fn pixel(&self, x: usize, y: usize) -> Rgb {
        let i = 3 * (y * self.width + x);
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    pub fn set(&mut self, x: usize, y: usize, c: Rgb) {
        let i = 3 * (y * self.width + x);
        self.data[i..i + 3].copy_from_slice(&c);
    }

    pub fn to_ppm(&self) -> Vec<u8> {
        let mut out = format!("P6\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.data);
        out
    }
}

/// Maps chart coordinates to continuous pixel coordinates, y pointing down.
#[derive(Clone, Copy, Debug)]
pub struct Viewport {
    rect: [f64; 4],
    width: usize,
    height: usize,
}

impl Viewport {
    pub fn new(rect: [f64; 4], width: usize, height: usize) -> Self {
        Viewport { rect, width, height }
    }

    pub fn to_pixel(&self, (x, y): (f64, f64)) -> (f64, f64) {
        let [x0, y0, x1, y1] = self.rect;
        ((x - x0) / (x1 - x0) * self.width as f64, (y1 - y) / (y1 - y0) * self.height as f64)
    }

    fn cell(&self, p: (f64, f64)) -> Option<(usize, usize)> {
        let (u, v) = self.to_pixel(p);
        let inside = u >= 0.0 && v >= 0.0 && u < self.width as f64 && v < self.height as f64;
        inside.then(|| (u as usize, v as usize))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SplatStats {
    pub drawn: usize,
    pub outside: usize,
}

/// Draws each point as a single pixel.
pub fn splat(img: &mut Raster, vp: &Viewport, pts: &[((f64, f64), Rgb)]) -> SplatStats {
    let mut s = SplatStats::default();
    for &(p, c) in pts {
        match vp.cell(p) {
            Some((x, y)) => {
                img.set(x, y, c);
                s.drawn += 1;
            }
            None => s.outside += 1,
        }
    }
    s
}

/// Even-odd scanline fill sampled at pixel centres.
pub fn fill_polygon(img: &mut Raster, vp: &Viewport, poly: &[(f64, f64)], c: Rgb) {
    if poly.len() < 3 {
        return;
    }
    let px: Vec<(f64, f64)> = poly.iter().map(|&p| vp.to_pixel(p)).collect();
    let (lo, hi) = px.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p.1), hi.max(p.1)));
    let y_start = (lo - 0.5).ceil().max(0.0) as usize;
    let y_end = ((hi - 0.5).floor().min(img.height as f64 - 1.0)).max(-1.0);
    if y_end < 0.0 {
        return;
    }
    let mut xs = Vec::new();
    for y in y_start..=y_end as usize {
        let yc = y as f64 + 0.5;
        xs.clear();
        for i in 0..px.len() {
            let (a, b) = (px[i], px[(i + 1) % px.len()]);
            if (a.1 <= yc) != (b.1 <= yc) {
                xs.push(a.0 + (yc - a.1) / (b.1 - a.1) * (b.0 - a.0));
            }
        }
        xs.sort_by(f64::total_cmp);
        for pair in xs.chunks_exact(2) {
            let x_start = (pair[0] - 0.5).ceil().max(0.0) as usize;
            let x_end = (pair[1] - 0.5).floor().min(img.width as f64 - 1.0);
            if x_end < 0.0 {
                continue;
            }
            for x in x_start..=x_end as usize {
                img.set(x, y, c);
            }
        }
    }
}
