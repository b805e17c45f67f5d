use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use super::{steering_vector, ArrayGeometry, CMatrix};
use crate::raytracer::{Ray, RaySet};

/// Narrowband `N_r × N_t` channel for one BS–vehicle link.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMatrix {
    pub entries: CMatrix,
    pub tx_index: usize,
    pub rx_index: usize,
}

impl ChannelMatrix {
    pub fn zeros(rx_antennas: usize, tx_antennas: usize) -> Self {
        ChannelMatrix {
            entries: CMatrix::zeros(rx_antennas, tx_antennas),
            tx_index: 0,
            rx_index: 0,
        }
    }

    pub fn rx_antennas(&self) -> usize {
        self.entries.nrows()
    }

    pub fn tx_antennas(&self) -> usize {
        self.entries.ncols()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|z| z.re == 0.0 && z.im == 0.0)
    }

    /// Columns `[start, start + len)`: the channel seen by a transmit
    /// subarray.
    pub fn columns(&self, start: usize, len: usize) -> ChannelMatrix {
        ChannelMatrix {
            entries: self.entries.columns(start, len).into_owned(),
            ..*self
        }
    }
}

/// Sum of rank-one ray contributions
/// `√p · e^{jφ} · e^{j2π f_c τ} · a_r(aoa) · a_t(aod)^H`.
///
/// Ray angles must already be expressed in each array's own frame (see
/// [`to_array_frames`]).
pub fn synthesize_channel(
    rays: &RaySet,
    tx_geom: &ArrayGeometry,
    rx_geom: &ArrayGeometry,
    carrier_hz: f64,
) -> ChannelMatrix {
    let mut h = CMatrix::zeros(rx_geom.len(), tx_geom.len());
    for ray in &rays.rays {
        add_ray(&mut h, ray, tx_geom, rx_geom, carrier_hz);
    }
    ChannelMatrix {
        entries: h,
        tx_index: rays.tx_index,
        rx_index: rays.rx_index,
    }
}

fn add_ray(h: &mut CMatrix, ray: &Ray, tx_geom: &ArrayGeometry, rx_geom: &ArrayGeometry, carrier_hz: f64) {
    let cycles = (carrier_hz * ray.delay).fract();
    let gain = Complex64::from_polar(ray.power.sqrt(), ray.phase + TAU * cycles);
    let a_r = steering_vector(rx_geom, ray.aoa_azimuth, ray.aoa_elevation);
    let a_t = steering_vector(tx_geom, ray.aod_azimuth, ray.aod_elevation);
    for j in 0..h.ncols() {
        let t = gain * a_t[j].conj();
        for i in 0..h.nrows() {
            h[(i, j)] += a_r[i] * t;
        }
    }
}

/// Re-expresses global ray azimuths relative to the broadside azimuths of
/// the transmit and receive arrays, wrapped to [-π, π].
pub fn to_array_frames(rays: &RaySet, tx_boresight: f64, rx_boresight: f64) -> RaySet {
    let wrap = |a: f64| {
        let w = (a + PI).rem_euclid(TAU) - PI;
        if w < -PI { w + TAU } else { w }
    };
    RaySet {
        rays: rays
            .rays
            .iter()
            .map(|r| Ray {
                aod_azimuth: wrap(r.aod_azimuth - tx_boresight),
                aoa_azimuth: wrap(r.aoa_azimuth - rx_boresight),
                ..r.clone()
            })
            .collect(),
        ..*rays
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ray(power: f64, phase: f64, delay: f64, aod: (f64, f64), aoa: (f64, f64)) -> Ray {
        Ray {
            power,
            phase,
            delay,
            aod_azimuth: aod.0,
            aod_elevation: aod.1,
            aoa_azimuth: aoa.0,
            aoa_elevation: aoa.1,
            bounces: 0,
        }
    }

    fn geoms() -> (ArrayGeometry, ArrayGeometry) {
        (
            ArrayGeometry::half_wavelength(4, 4, 28e9),
            ArrayGeometry::half_wavelength(2, 2, 28e9),
        )
    }

    #[test]
    fn empty_rayset_gives_zero_matrix() {
        let (t, r) = geoms();
        let h = synthesize_channel(&RaySet::default(), &t, &r, 28e9);
        assert_eq!((h.rx_antennas(), h.tx_antennas()), (4, 16));
        assert!(h.is_zero());
    }

    #[test]
    fn single_ray_is_rank_one() {
        let (t, r) = geoms();
        let rays = RaySet::new(vec![ray(1.0, 0.0, 0.0, (0.4, 1.3), (-1.0, 1.7))], 0, 0);
        let h = synthesize_channel(&rays, &t, &r, 28e9);
        assert!((h.entries.norm() - 1.0).abs() < 1e-12);
        let svd = h.entries.clone().svd(true, true);
        let mut s: Vec<f64> = svd.singular_values.iter().copied().collect();
        s.sort_by(|a, b| b.total_cmp(a));
        assert!((s[0] - 1.0).abs() < 1e-12);
        assert!(s[1] < 1e-12);
        let a_r = steering_vector(&r, -1.0, 1.7);
        let a_t = steering_vector(&t, 0.4, 1.3);
        // Left/right singular vectors match the steering vectors up to phase.
        assert!(((a_r.adjoint() * &h.entries * &a_t)[(0, 0)].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn opposite_phases_cancel() {
        let (t, r) = geoms();
        let tau = 1.0 / 28e9;
        let rays = RaySet::new(
            vec![
                ray(0.5, 0.0, tau, (0.2, 1.4), (0.1, 1.6)),
                ray(0.5, std::f64::consts::PI, tau, (0.2, 1.4), (0.1, 1.6)),
            ],
            0,
            0,
        );
        let h = synthesize_channel(&rays, &t, &r, 28e9);
        assert!(h.entries.norm() < 1e-12);
    }

    #[test]
    fn frames_wrap_into_range() {
        let rays = RaySet::new(vec![ray(1.0, 0.0, 0.0, (3.0, 1.5), (-3.0, 1.5))], 0, 0);
        let local = to_array_frames(&rays, -1.0, 1.0);
        let r = &local.rays[0];
        assert!((r.aod_azimuth - (4.0 - TAU)).abs() < 1e-12);
        assert!((r.aoa_azimuth - (TAU - 4.0)).abs() < 1e-12);
    }

    proptest::proptest! {
        #[test]
        fn channel_is_linear_in_rays(
            seed in 0u64..1000,
        ) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let (t, r) = geoms();
            let rays: Vec<Ray> = (0..4).map(|_| ray(
                rng.gen_range(1e-12..1e-6),
                rng.gen_range(0.0..TAU),
                rng.gen_range(1e-8..1e-6),
                (rng.gen_range(-3.0..3.0), rng.gen_range(0.0..3.1)),
                (rng.gen_range(-3.0..3.0), rng.gen_range(0.0..3.1)),
            )).collect();
            let whole = synthesize_channel(&RaySet::new(rays.clone(), 0, 0), &t, &r, 28e9);
            let mut sum = CMatrix::zeros(4, 16);
            for single in rays {
                sum += synthesize_channel(&RaySet::new(vec![single], 0, 0), &t, &r, 28e9).entries;
            }
            proptest::prop_assert!((whole.entries - sum).norm() < 1e-15);
        }
    }
}
