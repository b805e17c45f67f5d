//! CSV exchange format for ray sets, one row per ray.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{Ray, RaySet};
use crate::error::{Error, Result};
use crate::units::{dbm_to_watts, watts_to_dbm};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RayDumpRow {
    pub tx_index: usize,
    pub rx_index: usize,
    pub power_dbm: f64,
    pub phase_rad: f64,
    pub delay_s: f64,
    pub aod_az: f64,
    pub aod_el: f64,
    pub aoa_az: f64,
    pub aoa_el: f64,
    pub bounces: u8,
}

pub fn write_ray_dump<'a, W: Write>(out: W, sets: impl IntoIterator<Item = &'a RaySet>) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    let wrap = |e: csv::Error| Error::Config(format!("writing ray dump: {e}"));
    for set in sets {
        for r in &set.rays {
            writer
                .serialize(RayDumpRow {
                    tx_index: set.tx_index,
                    rx_index: set.rx_index,
                    power_dbm: watts_to_dbm(r.power),
                    phase_rad: r.phase,
                    delay_s: r.delay,
                    aod_az: r.aod_azimuth,
                    aod_el: r.aod_elevation,
                    aoa_az: r.aoa_azimuth,
                    aoa_el: r.aoa_elevation,
                    bounces: r.bounces,
                })
                .map_err(wrap)?;
        }
    }
    writer.flush().map_err(|e| Error::io("ray dump", e))
}

/// Reads a ray dump into sets keyed by `(tx_index, rx_index)`.
pub fn read_ray_dump<R: Read>(input: R, context: &str) -> Result<BTreeMap<(usize, usize), RaySet>> {
    let mut reader = csv::Reader::from_reader(input);
    let mut grouped: BTreeMap<(usize, usize), Vec<Ray>> = BTreeMap::new();
    for record in reader.deserialize::<RayDumpRow>() {
        let row = record.map_err(|e| {
            let (line, message) = match e.position() {
                Some(p) => (p.line() as usize, e.to_string()),
                None => (0, e.to_string()),
            };
            Error::Parse { context: context.to_string(), line, column: 0, message }
        })?;
        if row.bounces > super::MAX_BOUNCES {
            return Err(Error::invariant(
                format!("ray ({}, {})", row.tx_index, row.rx_index),
                "bounce count must be 0, 1 or 2",
            ));
        }
        grouped.entry((row.tx_index, row.rx_index)).or_default().push(Ray {
            power: dbm_to_watts(row.power_dbm),
            phase: row.phase_rad.rem_euclid(std::f64::consts::TAU),
            delay: row.delay_s,
            aod_azimuth: row.aod_az,
            aod_elevation: row.aod_el,
            aoa_azimuth: row.aoa_az,
            aoa_elevation: row.aoa_el,
            bounces: row.bounces,
        });
    }
    Ok(grouped
        .into_iter()
        .map(|(k, rays)| (k, RaySet::new(rays, k.0, k.1)))
        .collect())
}
