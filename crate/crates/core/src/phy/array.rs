use std::f64::consts::TAU;

use num_complex::Complex64;

use super::CVector;

/// Uniform rectangular array with `rows` (N, vertical) × `cols` (M,
/// horizontal) elements.
///
/// Elements are flattened elevation-index fastest: element `(p, q)` with
/// horizontal index `p < M` and vertical index `q < N` sits at position
/// `p·N + q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrayGeometry {
    pub rows: usize,
    pub cols: usize,
    pub d_h: f64,
    pub d_v: f64,
    pub wavelength: f64,
}

impl ArrayGeometry {
    pub fn half_wavelength(rows: usize, cols: usize, carrier_hz: f64) -> Self {
        let wavelength = crate::units::wavelength(carrier_hz);
        ArrayGeometry {
            rows,
            cols,
            d_h: wavelength / 2.0,
            d_v: wavelength / 2.0,
            wavelength,
        }
    }

    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// A geometry with the same spacing but a different shape.
    pub fn reshaped(&self, rows: usize, cols: usize) -> Self {
        ArrayGeometry { rows, cols, ..*self }
    }
}

/// Unit-norm array response toward azimuth `phi` (relative to broadside)
/// and zenith angle `theta`.
pub fn steering_vector(geom: &ArrayGeometry, phi: f64, theta: f64) -> CVector {
    let k = TAU / geom.wavelength;
    let h = k * geom.d_h * phi.sin() * theta.sin();
    let v = k * geom.d_v * theta.cos();
    let scale = 1.0 / (geom.len() as f64).sqrt();
    CVector::from_fn(geom.len(), |i, _| {
        let (p, q) = (i / geom.rows, i % geom.rows);
        Complex64::from_polar(scale, h * p as f64 + v * q as f64)
    })
}
