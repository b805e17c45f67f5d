use std::io::Write;

use super::rate_map::RateMap;
use crate::error::{Error, Result};

/// Dense display raster, row-major with row 0 at the grid's lowest y.
/// `None` marks pixels with no served support.
#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    pub rows: usize,
    pub cols: usize,
    pub values: Vec<Option<f64>>,
}

impl Raster {
    pub fn get(&self, row: usize, col: usize) -> Option<f64> {
        self.values[row * self.cols + col]
    }

    /// Smallest and largest served value.
    pub fn range(&self) -> Option<(f64, f64)> {
        self.values.iter().flatten().fold(None, |acc, &v| match acc {
            None => Some((v, v)),
            Some((lo, hi)) => Some((lo.min(v), hi.max(v))),
        })
    }
}

fn expanded(n: usize, factor: usize) -> usize {
    (n - 1) * (factor + 1) + 1
}

/// Bilinear upsampling inserting `factor` points between neighbouring grid
/// points. Unserved cells carry no weight; the remaining corner weights are
/// renormalised. Display only.
pub fn interpolate_map(map: &RateMap, factor: usize) -> Raster {
    let (rows, cols) = (map.grid.rows, map.grid.cols);
    let step = factor + 1;
    let (out_rows, out_cols) = (expanded(rows, factor), expanded(cols, factor));
    let cell = |r: usize, c: usize| {
        let i = r * cols + c;
        map.flags[i].is_served().then_some(map.values[i])
    };
    let mut values = Vec::with_capacity(out_rows * out_cols);
    for i in 0..out_rows {
        let (r0, kr) = (i / step, i % step);
        for j in 0..out_cols {
            let (c0, kc) = (j / step, j % step);
            let mut num = 0.0;
            let mut den = 0.0;
            for (dr, wr) in [(0, step - kr), (1, kr)] {
                for (dc, wc) in [(0, step - kc), (1, kc)] {
                    let w = (wr * wc) as f64;
                    if w == 0.0 {
                        continue;
                    }
                    if let Some(v) = cell(r0 + dr, c0 + dc) {
                        num += w * v;
                        den += w;
                    }
                }
            }
            values.push((den > 0.0).then(|| num / den));
        }
    }
    Raster { rows: out_rows, cols: out_cols, values }
}

const UNSERVED_RGB: [u8; 3] = [128, 128, 128];
const STOPS: [[f64; 3]; 5] = [
    [0.0, 0.0, 255.0],
    [0.0, 255.0, 255.0],
    [0.0, 255.0, 0.0],
    [255.0, 255.0, 0.0],
    [255.0, 0.0, 0.0],
];

/// Colour for a normalised value in `[0, 1]`: blue, cyan, green, yellow,
/// red at equal spacing with linear blending in between.
pub fn color(t: f64) -> [u8; 3] {
    let t = if t.is_finite() { t.clamp(0.0, 1.0) } else { 0.0 };
    let pos = t * (STOPS.len() - 1) as f64;
    let k = (pos.floor() as usize).min(STOPS.len() - 2);
    let f = pos - k as f64;
    let mut rgb = [0u8; 3];
    for (ch, out) in rgb.iter_mut().enumerate() {
        *out = (STOPS[k][ch] + f * (STOPS[k + 1][ch] - STOPS[k][ch])).round() as u8;
    }
    rgb
}

/// Binary PPM of the raster, highest y on the top row. Unserved pixels are
/// gray.
pub fn render_ppm<W: Write>(raster: &Raster, config_hash: &str, mut out: W) -> Result<()> {
    let io = |e| Error::io("heatmap", e);
    let (lo, hi) = raster.range().unwrap_or((0.0, 0.0));
    let span = hi - lo;
    write!(out, "P6\n# config_hash={config_hash}\n{} {}\n255\n", raster.cols, raster.rows).map_err(io)?;
    let mut pixels = Vec::with_capacity(raster.rows * raster.cols * 3);
    for row in (0..raster.rows).rev() {
        for col in 0..raster.cols {
            let rgb = match raster.get(row, col) {
                None => UNSERVED_RGB,
                Some(v) if span > 0.0 => color((v - lo) / span),
                Some(_) => color(0.0),
            };
            pixels.extend_from_slice(&rgb);
        }
    }
    out.write_all(&pixels).map_err(io)
}

/// Text legend accompanying a heatmap.
pub fn scale_sidecar(raster: &Raster, map: &RateMap) -> String {
    let (lo, hi) = raster.range().unwrap_or((0.0, 0.0));
    format!(
        "quantity={}\nunit={}\nmin={lo}\nmax={hi}\nscale=linear blue(min)-cyan-green-yellow-red(max)\nunserved=gray\nconfig_hash={}\n",
        map.quantity.label(),
        map.quantity.unit(),
        map.metadata.config_hash
    )
}
