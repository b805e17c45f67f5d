use std::collections::BTreeMap;

use crate::exec::{map_indexed, Execution};
use crate::raytracer::{RaySet, Tracer};
use crate::scene::Scene;

/// Where link rays come from.
#[derive(Debug, Clone, Default)]
pub enum RaySource {
    /// Built-in tracer.
    #[default]
    Trace,
    /// Externally produced rays keyed by `(bs, grid point)`. Missing pairs
    /// have no paths.
    Imported(BTreeMap<(usize, usize), RaySet>),
}

/// Ray sets for every (grid point, base station) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkSet {
    /// `links[point][bs]`.
    pub links: Vec<Vec<RaySet>>,
}

impl LinkSet {
    pub fn collect(scene: &Scene, source: &RaySource, exec: Execution) -> LinkSet {
        let n_bs = scene.bases.len();
        let links = match source {
            RaySource::Trace => {
                let tracer = Tracer::new(scene);
                map_indexed(scene.grid.len(), exec, |p| (0..n_bs).map(|b| tracer.trace_link(b, p)).collect())
            }
            RaySource::Imported(map) => (0..scene.grid.len())
                .map(|p| {
                    (0..n_bs)
                        .map(|b| {
                            map.get(&(b, p)).cloned().unwrap_or(RaySet {
                                rays: Vec::new(),
                                tx_index: b,
                                rx_index: p,
                            })
                        })
                        .collect()
                })
                .collect(),
        };
        LinkSet { links }
    }

    pub fn get(&self, point: usize, bs: usize) -> &RaySet {
        &self.links[point][bs]
    }

    /// All ray sets ordered by grid point, then BS.
    pub fn iter(&self) -> impl Iterator<Item = &RaySet> {
        self.links.iter().flatten()
    }
}

/// Narrowband channel of one BS–vehicle link as a path-gain matrix (ray
/// powers divided by the BS transmit power, angles in array frames).
pub fn link_channel(scene: &Scene, bs: usize, rays: &RaySet) -> crate::phy::ChannelMatrix {
    use crate::phy::{synthesize_channel, to_array_frames};
    let base = &scene.bases[bs];
    let (tx_geom, rx_geom) = link_geometries(scene, bs);
    let gains = rays.normalized(crate::units::dbm_to_watts(base.tx_power_dbm));
    let local = to_array_frames(&gains, base.boresight_azimuth, scene.grid.boresight_azimuth);
    synthesize_channel(&local, &tx_geom, &rx_geom, scene.carrier_hz)
}

pub(crate) fn link_geometries(scene: &Scene, bs: usize) -> (crate::phy::ArrayGeometry, crate::phy::ArrayGeometry) {
    use crate::phy::ArrayGeometry;
    let base = &scene.bases[bs];
    (
        ArrayGeometry::half_wavelength(base.array_rows, base.array_cols, scene.carrier_hz),
        ArrayGeometry::half_wavelength(scene.grid.array_rows, scene.grid.array_cols, scene.carrier_hz),
    )
}
