//! Seeded synthetic multipath channels for tests, benchmarks and
//! statistical checks that do not need a traced scene.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::phy::{synthesize_channel, ArrayGeometry, ChannelMatrix};
use crate::raytracer::{Ray, RaySet};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelSpec {
    pub tx: ArrayGeometry,
    pub rx: ArrayGeometry,
    pub rays: usize,
    /// Mean linear gain of the strongest ray.
    pub path_gain: f64,
    pub carrier_hz: f64,
}

impl ChannelSpec {
    pub fn new(tx: ArrayGeometry, rx: ArrayGeometry, rays: usize) -> Self {
        ChannelSpec {
            tx,
            rx,
            rays,
            path_gain: 1.0,
            carrier_hz: crate::units::SPEED_OF_LIGHT / tx.wavelength,
        }
    }

    pub fn with_path_gain(mut self, path_gain: f64) -> Self {
        self.path_gain = path_gain;
        self
    }
}

fn rng_for(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// `spec.rays` rays with random angles, log-uniform powers spanning 20 dB
/// below `path_gain`, and random phases and delays. Depends only on
/// `(seed, index)`.
pub fn random_rays(spec: &ChannelSpec, seed: u64, index: u64) -> RaySet {
    let mut rng = rng_for(seed, index);
    let rays = (0..spec.rays)
        .map(|_| Ray {
            power: spec.path_gain * 10f64.powf(-rng.gen_range(0.0..2.0)),
            phase: rng.gen_range(0.0..TAU),
            delay: rng.gen_range(1e-8..1e-6),
            aod_azimuth: rng.gen_range(-PI / 2.0..PI / 2.0),
            aod_elevation: rng.gen_range(PI / 3.0..2.0 * PI / 3.0),
            aoa_azimuth: rng.gen_range(-PI..PI),
            aoa_elevation: rng.gen_range(PI / 3.0..2.0 * PI / 3.0),
            bounces: 0,
        })
        .collect();
    RaySet::new(rays, 0, index as usize)
}

pub fn random_channel(spec: &ChannelSpec, seed: u64, index: u64) -> ChannelMatrix {
    synthesize_channel(&random_rays(spec, seed, index), &spec.tx, &spec.rx, spec.carrier_hz)
}

/// Single-ray channel `a_r a_tᴴ` with off-grid random angles.
pub fn random_rank_one(spec: &ChannelSpec, seed: u64, index: u64) -> ChannelMatrix {
    let one = ChannelSpec { rays: 1, ..*spec };
    random_channel(&one, seed, index)
}
