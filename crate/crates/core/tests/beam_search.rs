mod common;

use canyonwave_core::beamforming::beam_search;
use canyonwave_core::phy::{build_beam_codebook, steering_vector, synthesize_channel};
use canyonwave_core::synthetic::{random_channel, random_rays, ChannelSpec};
use common::{geom, CARRIER};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn argmax(values: impl Iterator<Item = f64>) -> usize {
    let mut best = (0, -1.0);
    for (i, v) in values.enumerate() {
        if v > best.1 {
            best = (i, v);
        }
    }
    best.0
}

#[test]
fn rank_one_search_is_separable() {
    let (tx, rx) = (geom(4, 8), geom(2, 2));
    let spec = ChannelSpec::new(tx, rx, 1);
    let f = build_beam_codebook(&tx, 2).unwrap();
    let w = build_beam_codebook(&rx, 2).unwrap();
    for i in 0..100 {
        let rays = random_rays(&spec, 3, i);
        let h = synthesize_channel(&rays, &tx, &rx, CARRIER);
        let ray = &rays.rays[0];
        let a_t = steering_vector(&tx, ray.aod_azimuth, ray.aod_elevation);
        let a_r = steering_vector(&rx, ray.aoa_azimuth, ray.aoa_elevation);
        let k = argmax(f.codewords.column_iter().map(|c| a_t.dotc(&c).norm()));
        let l = argmax(w.codewords.column_iter().map(|c| c.dotc(&a_r).norm()));
        let sel = beam_search(&h, &f, &w).unwrap();
        assert_eq!((sel.precoder_index, sel.combiner_index), (k, l), "channel {i}");
    }
}

#[test]
fn winner_beats_random_pairs() {
    let (tx, rx) = (geom(4, 4), geom(2, 2));
    let spec = ChannelSpec::new(tx, rx, 5);
    let f = build_beam_codebook(&tx, 2).unwrap();
    let w = build_beam_codebook(&rx, 2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for i in 0..10 {
        let h = random_channel(&spec, 4, i);
        let sel = beam_search(&h, &f, &w).unwrap();
        for _ in 0..100 {
            let (k, l) = (rng.gen_range(0..f.len()), rng.gen_range(0..w.len()));
            let metric = w.codeword(l).dotc(&(&h.entries * f.codeword(k))).norm();
            assert!(metric <= sel.effective_gain * (1.0 + 1e-12));
        }
    }
}

#[test]
fn oversampling_never_hurts() {
    let (tx, rx) = (geom(4, 4), geom(2, 2));
    let spec = ChannelSpec::new(tx, rx, 4);
    let books: Vec<_> = [1, 2, 4]
        .iter()
        .map(|&r| (build_beam_codebook(&tx, r).unwrap(), build_beam_codebook(&rx, r).unwrap()))
        .collect();
    for i in 0..30 {
        let h = random_channel(&spec, 5, i);
        let gains: Vec<f64> = books
            .iter()
            .map(|(f, w)| beam_search(&h, f, w).unwrap().effective_gain)
            .collect();
        assert!(gains[0] <= gains[1] && gains[1] <= gains[2], "{gains:?}");
    }
}
