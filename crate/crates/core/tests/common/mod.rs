#![allow(dead_code)]

use std::path::{Path, PathBuf};

use canyonwave_core::geometry::Vec3;
use canyonwave_core::phy::ArrayGeometry;
use canyonwave_core::scene::{BasePlacement, Material, Scene, VehicleGrid};

pub const CARRIER: f64 = 28e9;

pub fn scenes_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenes")
}

pub fn geom(rows: usize, cols: usize) -> ArrayGeometry {
    ArrayGeometry::half_wavelength(rows, cols, CARRIER)
}

pub fn base(x: f64, y: f64, boresight: f64) -> BasePlacement {
    BasePlacement {
        position: Vec3::new(x, y, 6.0),
        array_rows: 4,
        array_cols: 4,
        boresight_azimuth: boresight,
        tx_power_dbm: 10.0,
    }
}

/// Building-free scene with the given BSs and a `rows × cols` grid at
/// 5 m spacing starting at `origin`.
pub fn open_scene(bases: Vec<BasePlacement>, origin: [f64; 2], rows: usize, cols: usize) -> Scene {
    Scene {
        buildings: Vec::new(),
        obstacles: Vec::new(),
        bases,
        smart_bases: Vec::new(),
        grid: VehicleGrid {
            origin,
            rows,
            cols,
            spacing: 5.0,
            antenna_height: 1.5,
            array_rows: 2,
            array_cols: 2,
            boresight_azimuth: 0.0,
        },
        terrain_material: Material::wet_earth(),
        carrier_hz: CARRIER,
        bandwidth_hz: 850e6,
    }
}
