use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::links::{link_channel, link_geometries, LinkSet};
use super::rate_map::{CellFlag, MapMetadata, Quantity, RateMap};
use crate::beamforming::LinkBudget;
use crate::error::{Error, Result};
use crate::exec::{map_indexed, Execution};
use crate::hybrid::{evaluate_slot, HybridCodebooks, HybridConfig, PowerModel};
use crate::phy::ChannelMatrix;
use crate::scene::Scene;

#[derive(Debug, Clone, PartialEq)]
pub struct MuMapConfig {
    pub hybrid: HybridConfig,
    pub realizations: usize,
    pub seed: u64,
    pub oversampling: usize,
    /// The BS whose cell is scheduled.
    pub serving_bs: usize,
    pub power: PowerModel,
    pub max_codebook_bits: u32,
    pub exec: Execution,
    pub metadata: MapMetadata,
}

impl MuMapConfig {
    pub fn new(hybrid: HybridConfig, realizations: usize, seed: u64) -> Self {
        MuMapConfig {
            hybrid,
            realizations,
            seed,
            oversampling: 1,
            serving_bs: 0,
            power: PowerModel::default(),
            max_codebook_bits: crate::phy::DEFAULT_MAX_CODEBOOK_BITS,
            exec: Execution::Parallel,
            metadata: MapMetadata::default(),
        }
    }
}

/// Per-slot record, in realization order.
#[derive(Debug, Clone, PartialEq)]
pub struct SlotRecord {
    /// Grid indices of the scheduled users, in slot-position order.
    pub users: Vec<usize>,
    pub rates: Vec<f64>,
    pub energy_efficiency: Vec<f64>,
    pub singular: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MuMapOutput {
    pub rate_map: RateMap,
    pub ee_map: RateMap,
    pub slots: Vec<SlotRecord>,
    /// Grid points that can be scheduled (at least one path to the BS).
    pub candidates: Vec<usize>,
}

impl MuMapOutput {
    pub fn singular_slots(&self) -> usize {
        self.slots.iter().filter(|s| s.singular).count()
    }

    /// Mean over every scheduled (slot, user) rate.
    pub fn mean_user_rate(&self) -> f64 {
        let rates: Vec<f64> = self.slots.iter().flat_map(|s| s.rates.iter().copied()).collect();
        rates.iter().sum::<f64>() / rates.len().max(1) as f64
    }

    pub fn mean_user_ee(&self) -> f64 {
        let ee: Vec<f64> = self
            .slots
            .iter()
            .flat_map(|s| s.energy_efficiency.iter().copied())
            .collect();
        ee.iter().sum::<f64>() / ee.len().max(1) as f64
    }
}

/// Users scheduled in realization `r`: `users` distinct draws from
/// `0..population`, keyed by `(seed, r)`.
pub fn schedule(seed: u64, realization: u64, population: usize, users: usize) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(realization);
    rand::seq::index::sample(&mut rng, population, users).into_vec()
}

/// Multiuser map averaged over `realizations` random schedules. Locations
/// without any path to the serving BS are never scheduled.
pub fn mu_map(scene: &Scene, links: &LinkSet, cfg: &MuMapConfig) -> Result<MuMapOutput> {
    let bs = cfg.serving_bs;
    if bs >= scene.bases.len() {
        return Err(Error::Config(format!("serving BS {bs} out of range")));
    }
    let users = cfg.hybrid.users;
    let candidates: Vec<usize> = (0..scene.grid.len()).filter(|&p| !links.get(p, bs).is_empty()).collect();
    if users > candidates.len() {
        return Err(Error::Config(format!(
            "{users} users per slot but only {} reachable grid points",
            candidates.len()
        )));
    }
    let (tx_geom, rx_geom) = link_geometries(scene, bs);
    let books = HybridCodebooks::build(
        &cfg.hybrid,
        &tx_geom,
        &rx_geom,
        cfg.oversampling,
        cfg.seed,
        cfg.max_codebook_bits,
    )?;
    let budget = LinkBudget::new(scene.bases[bs].tx_power_dbm, scene.bandwidth_hz);
    let channels: Vec<ChannelMatrix> =
        map_indexed(candidates.len(), cfg.exec, |i| link_channel(scene, bs, links.get(candidates[i], bs)));

    let slots = map_indexed(cfg.realizations, cfg.exec, |r| -> Result<SlotRecord> {
        let picks = schedule(cfg.seed, r as u64, candidates.len(), users);
        let hs: Vec<ChannelMatrix> = picks.iter().map(|&i| channels[i].clone()).collect();
        let out = evaluate_slot(&hs, &books, &cfg.hybrid, &budget, &cfg.power)?;
        Ok(SlotRecord {
            users: picks.iter().map(|&i| candidates[i]).collect(),
            rates: out.rates,
            energy_efficiency: out.energy_efficiency,
            singular: out.singular,
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let n = scene.grid.len();
    let mut rate_sum = vec![0.0; n];
    let mut ee_sum = vec![0.0; n];
    let mut visits = vec![0u32; n];
    for slot in &slots {
        for (k, &p) in slot.users.iter().enumerate() {
            rate_sum[p] += slot.rates[k];
            ee_sum[p] += slot.energy_efficiency[k];
            visits[p] += 1;
        }
    }
    if slots.iter().any(|s| s.singular) {
        log::info!("{} of {} slots dropped as singular", slots.iter().filter(|s| s.singular).count(), slots.len());
    }
    let flags: Vec<CellFlag> = (0..n)
        .map(|p| match visits[p] {
            0 => CellFlag::Unserved,
            _ if links.get(p, bs).has_los() => CellFlag::Los,
            _ => CellFlag::Nlos,
        })
        .collect();
    let average = |sums: &[f64]| -> Vec<f64> {
        sums.iter()
            .zip(&visits)
            .map(|(&s, &v)| if v == 0 { 0.0 } else { s / v as f64 })
            .collect()
    };
    let make = |quantity, values| RateMap {
        grid: scene.grid.clone(),
        quantity,
        values,
        visits: visits.clone(),
        flags: flags.clone(),
        metadata: cfg.metadata.clone(),
    };
    Ok(MuMapOutput {
        rate_map: make(Quantity::Rate, average(&rate_sum)),
        ee_map: make(Quantity::EnergyEfficiency, average(&ee_sum)),
        slots,
        candidates,
    })
}
