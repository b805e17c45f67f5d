use std::f64::consts::TAU;
use std::io::Write;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{ArrayGeometry, CMatrix, CVector};
use crate::error::{Error, Result};
use crate::exec::{map_indexed, Execution};

pub const DEFAULT_MAX_CODEBOOK_BITS: u32 = 20;
pub const MAX_CODEBOOK_BITS_ENV: &str = "CANYONWAVE_MAX_CODEBOOK_BITS";

/// RVQ size cap, honouring the environment override when it parses.
pub fn max_codebook_bits_from_env() -> u32 {
    std::env::var(MAX_CODEBOOK_BITS_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_MAX_CODEBOOK_BITS)
}

#[derive(Debug, Clone, PartialEq)]
pub enum CodebookKind {
    /// Oversampled 3D beam grid; `azimuth_points · elevation_points` beams.
    AnalogBeam {
        oversampling: usize,
        azimuth_points: usize,
        elevation_points: usize,
    },
    Rvq { bits: u32, seed: u64 },
}

/// Unit-norm codewords stored as the columns of a matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    pub codewords: CMatrix,
    pub kind: CodebookKind,
}

impl Codebook {
    pub fn len(&self) -> usize {
        self.codewords.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dimension(&self) -> usize {
        self.codewords.nrows()
    }

    pub fn codeword(&self, index: usize) -> CVector {
        self.codewords.column(index).into_owned()
    }

    /// Grid angles `(φ_k, θ_ℓ)` of an analog beam, `None` for RVQ books.
    pub fn beam_angles(&self, index: usize) -> Option<(f64, f64)> {
        match self.kind {
            CodebookKind::AnalogBeam {
                azimuth_points,
                elevation_points,
                ..
            } => {
                let (k, l) = (index / elevation_points, index % elevation_points);
                Some((
                    grid_value(k, azimuth_points).asin(),
                    grid_value(l, elevation_points).acos(),
                ))
            }
            CodebookKind::Rvq { .. } => None,
        }
    }
}

/// `i`-th point of a `count`-point grid on [-1, 1) laid out as `2i/count`
/// wrapped into range. A `count` grid contains every point of any grid
/// whose size divides `count`, bit for bit.
fn grid_value(i: usize, count: usize) -> f64 {
    let num = 2 * i as i64;
    let count = count as i64;
    let num = if num >= count { num - 2 * count } else { num };
    num as f64 / count as f64
}

/// Oversampled beam codebook for a URA.
///
/// The azimuth grid holds `ρM` values of sin φ and the elevation grid `ρN`
/// values of cos θ. Beam `(k, ℓ)` is stored at column `k·ρN + ℓ` and equals
/// `ν_{k,ℓ} ⊗ δ_ℓ`, where the horizontal factor uses sin φ_k · sin θ_ℓ.
pub fn build_beam_codebook(geom: &ArrayGeometry, oversampling: usize) -> Result<Codebook> {
    if oversampling == 0 {
        return Err(Error::Config("oversampling factor must be >= 1".into()));
    }
    let (n, m) = (geom.rows, geom.cols);
    let azimuth_points = oversampling * m;
    let elevation_points = oversampling * n;
    let k0 = TAU / geom.wavelength;
    let mut codewords = CMatrix::zeros(n * m, azimuth_points * elevation_points);
    for k in 0..azimuth_points {
        let sin_phi = grid_value(k, azimuth_points).asin().sin();
        for l in 0..elevation_points {
            let theta = grid_value(l, elevation_points).acos();
            let h = k0 * geom.d_h * sin_phi * theta.sin();
            let v = k0 * geom.d_v * theta.cos();
            let azimuth: Vec<Complex64> = (0..m)
                .map(|p| Complex64::from_polar(1.0 / (m as f64).sqrt(), h * p as f64))
                .collect();
            let elevation: Vec<Complex64> = (0..n)
                .map(|q| Complex64::from_polar(1.0 / (n as f64).sqrt(), v * q as f64))
                .collect();
            let mut col = codewords.column_mut(k * elevation_points + l);
            for (p, a) in azimuth.iter().enumerate() {
                for (q, e) in elevation.iter().enumerate() {
                    col[p * n + q] = a * e;
                }
            }
        }
    }
    Ok(Codebook {
        codewords,
        kind: CodebookKind::AnalogBeam {
            oversampling,
            azimuth_points,
            elevation_points,
        },
    })
}

/// `2^bits` isotropic unit vectors in `C^dimension`. Vector `i` depends only
/// on `(seed, i)`, so parallel and sequential generation agree.
pub fn build_rvq_codebook(dimension: usize, bits: u32, seed: u64, max_bits: u32) -> Result<Codebook> {
    build_rvq_codebook_with(dimension, bits, seed, max_bits, Execution::Parallel)
}

pub(crate) fn build_rvq_codebook_with(
    dimension: usize,
    bits: u32,
    seed: u64,
    max_bits: u32,
    exec: Execution,
) -> Result<Codebook> {
    if bits == 0 {
        return Err(Error::Config("RVQ codebooks need at least one bit".into()));
    }
    if bits > max_bits {
        return Err(Error::CodebookBudget { bits, max_bits });
    }
    if dimension == 0 {
        return Err(Error::Config("RVQ dimension must be >= 1".into()));
    }
    let size = 1usize << bits;
    let columns = map_indexed(size, exec, |i| rvq_vector(dimension, seed, i as u64));
    let mut codewords = CMatrix::zeros(dimension, size);
    for (i, col) in columns.into_iter().enumerate() {
        codewords.set_column(i, &col);
    }
    Ok(Codebook {
        codewords,
        kind: CodebookKind::Rvq { bits, seed },
    })
}

fn rvq_vector(dimension: usize, seed: u64, index: u64) -> CVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    loop {
        let v = CVector::from_fn(dimension, |_, _| {
            Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
        });
        let norm = v.norm();
        if norm > 0.0 {
            return v / Complex64::from(norm);
        }
    }
}

/// One row per codeword: `index` followed by `re_i,im_i` pairs.
pub fn write_codebook_csv<W: Write>(out: W, codebook: &Codebook) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let wrap = |e: csv::Error| Error::Config(format!("writing codebook: {e}"));
    let mut header = vec!["index".to_string()];
    for i in 0..codebook.dimension() {
        header.push(format!("re{i}"));
        header.push(format!("im{i}"));
    }
    w.write_record(&header).map_err(wrap)?;
    for (i, col) in codebook.codewords.column_iter().enumerate() {
        let mut row = vec![i.to_string()];
        for z in col.iter() {
            row.push(z.re.to_string());
            row.push(z.im.to_string());
        }
        w.write_record(&row).map_err(wrap)?;
    }
    w.flush().map_err(|e| Error::io("codebook csv", e))
}
