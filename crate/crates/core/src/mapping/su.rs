use super::links::{link_channel, link_geometries, LinkSet};
use super::rate_map::{CellFlag, MapMetadata, Quantity, RateMap};
use crate::beamforming::{beam_search, su_rate, LinkBudget};
use crate::error::{Error, Result};
use crate::exec::{map_indexed, Execution};
use crate::phy::{build_beam_codebook, Codebook};
use crate::scene::Scene;

/// Which BS a location is associated with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BestBsPolicy {
    /// Highest rate over all BSs; ties go to the lowest BS index.
    #[default]
    BestServer,
    Fixed(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuMapConfig {
    pub oversampling: usize,
    pub policy: BestBsPolicy,
    pub exec: Execution,
    pub metadata: MapMetadata,
}

impl Default for SuMapConfig {
    fn default() -> Self {
        SuMapConfig {
            oversampling: 1,
            policy: BestBsPolicy::BestServer,
            exec: Execution::Parallel,
            metadata: MapMetadata::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuMapOutput {
    pub map: RateMap,
    /// Serving BS per location; `None` when no BS has a path.
    pub serving_bs: Vec<Option<usize>>,
}

/// Single-user (TDMA) rate map: every location is served alone by its
/// best BS with exhaustive analog beam search.
pub fn su_map(scene: &Scene, links: &LinkSet, cfg: &SuMapConfig) -> Result<SuMapOutput> {
    let n_bs = scene.bases.len();
    if n_bs == 0 {
        return Err(Error::Config("scene has no base stations".into()));
    }
    let candidates: Vec<usize> = match cfg.policy {
        BestBsPolicy::BestServer => (0..n_bs).collect(),
        BestBsPolicy::Fixed(b) if b < n_bs => vec![b],
        BestBsPolicy::Fixed(b) => return Err(Error::Config(format!("BS index {b} out of range"))),
    };
    let precoders: Vec<Codebook> = (0..n_bs)
        .map(|b| build_beam_codebook(&link_geometries(scene, b).0, cfg.oversampling))
        .collect::<Result<_>>()?;
    let combiners = build_beam_codebook(&link_geometries(scene, 0).1, cfg.oversampling)?;

    let per_point = map_indexed(scene.grid.len(), cfg.exec, |p| -> Result<(f64, Option<usize>, CellFlag)> {
        let mut best: (f64, Option<usize>) = (0.0, None);
        for &b in &candidates {
            let rays = links.get(p, b);
            if rays.is_empty() {
                continue;
            }
            let h = link_channel(scene, b, rays);
            let sel = beam_search(&h, &precoders[b], &combiners)?;
            let budget = LinkBudget::new(scene.bases[b].tx_power_dbm, scene.bandwidth_hz);
            let rate = su_rate(&h, &sel, &budget);
            if best.1.is_none() || rate > best.0 {
                best = (rate, Some(b));
            }
        }
        let flag = match best.1 {
            None => CellFlag::NoPath,
            Some(b) if links.get(p, b).has_los() => CellFlag::Los,
            Some(_) => CellFlag::Nlos,
        };
        Ok((best.0, best.1, flag))
    });

    let mut values = Vec::with_capacity(per_point.len());
    let mut flags = Vec::with_capacity(per_point.len());
    let mut serving_bs = Vec::with_capacity(per_point.len());
    for item in per_point {
        let (v, b, f) = item?;
        values.push(v);
        serving_bs.push(b);
        flags.push(f);
    }
    Ok(SuMapOutput {
        map: RateMap {
            grid: scene.grid.clone(),
            quantity: Quantity::Rate,
            visits: vec![1; values.len()],
            values,
            flags,
            metadata: cfg.metadata.clone(),
        },
        serving_bs,
    })
}
