//! The simulation world: materials, buildings, blockers, base stations and
//! the vehicle grid, plus the JSON scene-file loader.

use std::collections::BTreeMap;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Aabb, Vec3};

/// Electromagnetic description of a surface.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Material {
    pub name: String,
    pub relative_permittivity: f64,
    /// S/m.
    pub conductivity: f64,
    /// m. Carried for completeness; transmission is not modelled.
    pub thickness: f64,
    /// Perfect electric conductor (|Γ| = 1).
    pub pec: bool,
}

impl Material {
    pub fn dielectric(name: &str, relative_permittivity: f64, conductivity: f64, thickness: f64) -> Self {
        Material {
            name: name.to_string(),
            relative_permittivity,
            conductivity,
            thickness,
            pec: false,
        }
    }

    pub fn pec(name: &str) -> Self {
        Material {
            name: name.to_string(),
            relative_permittivity: 1.0,
            conductivity: 0.0,
            thickness: 0.0,
            pec: true,
        }
    }

    /// Concrete building walls: εr = 15, σ = 0.015 S/m, 0.3 m thick.
    pub fn concrete() -> Self {
        Material::dielectric("concrete", 15.0, 0.015, 0.3)
    }

    /// Wet-earth terrain: εr = 25, σ = 0.02 S/m.
    pub fn wet_earth() -> Self {
        Material::dielectric("wet_earth", 25.0, 0.02, 0.0)
    }

    fn validate(&self) -> Result<()> {
        let entity = || format!("Material '{}'", self.name);
        if !self.pec && !(self.relative_permittivity >= 1.0) {
            return Err(Error::invariant(entity(), "relative_permittivity must be >= 1"));
        }
        if !(self.conductivity >= 0.0) {
            return Err(Error::invariant(entity(), "conductivity must be >= 0"));
        }
        if !(self.thickness >= 0.0) {
            return Err(Error::invariant(entity(), "thickness must be >= 0"));
        }
        Ok(())
    }
}

/// Axis-aligned rectangular footprint extruded from the ground.
#[derive(Debug, Clone, PartialEq)]
pub struct Building {
    pub min: [f64; 2],
    pub max: [f64; 2],
    pub height: f64,
    pub material: Material,
}

impl Building {
    pub fn bounds(&self) -> Aabb {
        Aabb::new(
            Vec3::new(self.min[0], self.min[1], 0.0),
            Vec3::new(self.max[0], self.max[1], self.height),
        )
    }

    fn contains_strictly_2d(&self, x: f64, y: f64) -> bool {
        x > self.min[0] && x < self.max[0] && y > self.min[1] && y < self.max[1]
    }
}

/// Axis-aligned blocker (e.g. a metal truck). Obstacles block rays but do
/// not reflect them.
#[derive(Debug, Clone, PartialEq)]
pub struct Obstacle {
    pub bounds: Aabb,
    pub material: Material,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BasePlacement {
    pub position: Vec3,
    /// Vertical element count N.
    pub array_rows: usize,
    /// Horizontal element count M.
    pub array_cols: usize,
    /// Azimuth of the array broadside, radians.
    pub boresight_azimuth: f64,
    pub tx_power_dbm: f64,
}

impl BasePlacement {
    pub fn antenna_count(&self) -> usize {
        self.array_rows * self.array_cols
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VehicleGrid {
    pub origin: [f64; 2],
    pub rows: usize,
    pub cols: usize,
    pub spacing: f64,
    pub antenna_height: f64,
    pub array_rows: usize,
    pub array_cols: usize,
    pub boresight_azimuth: f64,
}

impl VehicleGrid {
    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn antenna_count(&self) -> usize {
        self.array_rows * self.array_cols
    }

    /// Position of grid point `(row, col)`. Columns advance along +x, rows
    /// along +y.
    pub fn point(&self, row: usize, col: usize) -> Vec3 {
        Vec3::new(
            self.origin[0] + col as f64 * self.spacing,
            self.origin[1] + row as f64 * self.spacing,
            self.antenna_height,
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub buildings: Vec<Building>,
    pub obstacles: Vec<Obstacle>,
    pub bases: Vec<BasePlacement>,
    /// Alternative, hand-placed deployment used for before/after studies.
    pub smart_bases: Vec<BasePlacement>,
    pub grid: VehicleGrid,
    pub terrain_material: Material,
    pub carrier_hz: f64,
    pub bandwidth_hz: f64,
}

impl Scene {
    pub fn wavelength(&self) -> f64 {
        crate::units::wavelength(self.carrier_hz)
    }

    /// Antennas per base station (identical for every BS).
    pub fn tx_antennas(&self) -> usize {
        self.bases.first().map_or(0, BasePlacement::antenna_count)
    }

    pub fn rx_antennas(&self) -> usize {
        self.grid.antenna_count()
    }

    /// Row-major vehicle antenna positions.
    pub fn grid_positions(&self) -> Vec<Vec3> {
        grid_positions(&self.grid)
    }

    /// A copy of the scene whose active deployment is the smart BS list.
    pub fn with_smart_deployment(&self) -> Result<Scene> {
        if self.smart_bases.is_empty() {
            return Err(Error::Config("scene has no smart_bases list".into()));
        }
        let mut scene = self.clone();
        scene.bases = self.smart_bases.clone();
        scene.validate()?;
        Ok(scene)
    }

    /// Adds `trucks` PEC blockers (8 m × 2 m × 5 m) placed in the lanes
    /// between grid rows. Placement is keyed by `(seed, realization)` only.
    pub fn with_traffic(&self, trucks: usize, seed: u64, realization: u64) -> Scene {
        const LENGTH: f64 = 8.0;
        const WIDTH: f64 = 2.0;
        const HEIGHT: f64 = 5.0;
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x7472_7563_6b73);
        rng.set_stream(realization);
        let g = &self.grid;
        let lanes = g.rows.saturating_sub(1).max(1);
        let x_lo = g.origin[0];
        let x_hi = g.origin[0] + (g.cols.saturating_sub(1)) as f64 * g.spacing;
        let mut scene = self.clone();
        for _ in 0..trucks {
            let lane = rng.gen_range(0..lanes);
            let yc = g.origin[1] + (lane as f64 + 0.5) * g.spacing;
            let xc = if x_hi > x_lo { rng.gen_range(x_lo..=x_hi) } else { x_lo };
            scene.obstacles.push(Obstacle {
                bounds: Aabb::new(
                    Vec3::new(xc - LENGTH / 2.0, yc - WIDTH / 2.0, 0.0),
                    Vec3::new(xc + LENGTH / 2.0, yc + WIDTH / 2.0, HEIGHT),
                ),
                material: Material::pec("truck"),
            });
        }
        scene
    }

    /// Checks every structural invariant of the scene.
    pub fn validate(&self) -> Result<()> {
        if !(self.carrier_hz > 0.0) {
            return Err(Error::invariant("rf.carrier_hz", "must be > 0"));
        }
        if !(self.bandwidth_hz > 0.0) {
            return Err(Error::invariant("rf.bandwidth_hz", "must be > 0"));
        }
        self.terrain_material.validate()?;
        for (i, b) in self.buildings.iter().enumerate() {
            b.material.validate()?;
            if !(b.max[0] > b.min[0] && b.max[1] > b.min[1]) {
                return Err(Error::invariant(format!("buildings[{i}]"), "footprint must have positive area"));
            }
            if !(b.height > 0.0) {
                return Err(Error::invariant(format!("buildings[{i}]"), "height must be > 0"));
            }
        }
        for (i, o) in self.obstacles.iter().enumerate() {
            o.material.validate()?;
            if !o.bounds.is_non_degenerate() {
                return Err(Error::invariant(format!("obstacles[{i}]"), "box must have positive volume"));
            }
        }
        if self.bases.is_empty() {
            return Err(Error::invariant("bases", "at least one base station is required"));
        }
        let nt = self.bases[0].antenna_count();
        for (label, list) in [("bases", &self.bases), ("smart_bases", &self.smart_bases)] {
            for (i, bs) in list.iter().enumerate() {
                let entity = || format!("{label}[{i}]");
                if bs.array_rows == 0 || bs.array_cols == 0 {
                    return Err(Error::invariant(entity(), "array_rows and array_cols must be >= 1"));
                }
                if bs.antenna_count() != nt {
                    return Err(Error::invariant(
                        entity(),
                        format!("array has {} elements, scene uses N_t = {nt}", bs.antenna_count()),
                    ));
                }
                if self.inside_building(bs.position) {
                    return Err(Error::invariant(entity(), "position lies inside a building"));
                }
            }
        }
        let g = &self.grid;
        if !(g.spacing > 0.0) {
            return Err(Error::invariant("VehicleGrid.spacing", "must be > 0"));
        }
        if g.rows == 0 || g.cols == 0 {
            return Err(Error::invariant("VehicleGrid", "rows and cols must be >= 1"));
        }
        if g.array_rows == 0 || g.array_cols == 0 {
            return Err(Error::invariant("VehicleGrid", "array_rows and array_cols must be >= 1"));
        }
        for (i, p) in self.grid_positions().into_iter().enumerate() {
            if let Some(b) = self.buildings.iter().position(|b| b.contains_strictly_2d(p.x, p.y)) {
                return Err(Error::invariant(
                    "VehicleGrid",
                    format!("grid point {i} at ({}, {}) lies inside buildings[{b}]", p.x, p.y),
                ));
            }
        }
        Ok(())
    }

    fn inside_building(&self, p: Vec3) -> bool {
        self.buildings
            .iter()
            .any(|b| b.contains_strictly_2d(p.x, p.y) && p.z < b.height)
    }

    /// Parses and validates a scene document.
    pub fn from_json_bytes(bytes: &[u8], context: &str) -> Result<Scene> {
        let file: SceneFile = serde_json::from_slice(bytes).map_err(|e| Error::Parse {
            context: context.to_string(),
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        let scene = file.into_scene()?;
        scene.validate()?;
        Ok(scene)
    }
}

/// Loads and validates a scene file.
pub fn load_scene(path: impl AsRef<Path>) -> Result<Scene> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    Scene::from_json_bytes(&bytes, &path.display().to_string())
}

/// Row-major list of `rows · cols` antenna positions.
pub fn grid_positions(grid: &VehicleGrid) -> Vec<Vec3> {
    (0..grid.rows)
        .flat_map(|r| (0..grid.cols).map(move |c| grid.point(r, c)))
        .collect()
}

// ---- on-disk schema -------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneFile {
    pub materials: BTreeMap<String, MaterialSpec>,
    pub buildings: Vec<BuildingSpec>,
    #[serde(default)]
    pub obstacles: Vec<ObstacleSpec>,
    pub bases: Vec<BaseSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub smart_bases: Vec<BaseSpec>,
    pub grid: GridSpec,
    pub rf: RfSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub terrain_material: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialSpec {
    #[serde(default = "one")]
    pub relative_permittivity: f64,
    #[serde(default)]
    pub conductivity: f64,
    #[serde(default)]
    pub thickness: f64,
    #[serde(default)]
    pub pec: bool,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BuildingSpec {
    pub min: [f64; 2],
    pub max: [f64; 2],
    pub height: f64,
    pub material: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObstacleSpec {
    pub min: [f64; 3],
    pub max: [f64; 3],
    pub material: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaseSpec {
    pub position: [f64; 3],
    pub array_rows: usize,
    pub array_cols: usize,
    #[serde(default)]
    pub boresight_azimuth: f64,
    pub tx_power_dbm: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub origin: [f64; 2],
    pub rows: usize,
    pub cols: usize,
    pub spacing: f64,
    pub antenna_height: f64,
    pub array_rows: usize,
    pub array_cols: usize,
    #[serde(default)]
    pub boresight_azimuth: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RfSpec {
    pub carrier_hz: f64,
    pub bandwidth_hz: f64,
}

impl SceneFile {
    fn into_scene(self) -> Result<Scene> {
        let materials: BTreeMap<String, Material> = self
            .materials
            .iter()
            .map(|(name, m)| {
                let mat = Material {
                    name: name.clone(),
                    relative_permittivity: m.relative_permittivity,
                    conductivity: m.conductivity,
                    thickness: m.thickness,
                    pec: m.pec,
                };
                mat.validate().map(|_| (name.clone(), mat))
            })
            .collect::<Result<_>>()?;
        let lookup = |name: &str, entity: String| {
            materials
                .get(name)
                .cloned()
                .ok_or_else(|| Error::invariant(entity, format!("unknown material '{name}'")))
        };
        let buildings = self
            .buildings
            .iter()
            .enumerate()
            .map(|(i, b)| {
                Ok(Building {
                    min: b.min,
                    max: b.max,
                    height: b.height,
                    material: lookup(&b.material, format!("buildings[{i}]"))?,
                })
            })
            .collect::<Result<_>>()?;
        let obstacles = self
            .obstacles
            .iter()
            .enumerate()
            .map(|(i, o)| {
                Ok(Obstacle {
                    bounds: Aabb::new(Vec3::from(o.min), Vec3::from(o.max)),
                    material: lookup(&o.material, format!("obstacles[{i}]"))?,
                })
            })
            .collect::<Result<_>>()?;
        let terrain_material = match &self.terrain_material {
            Some(name) => lookup(name, "terrain_material".into())?,
            None => Material::wet_earth(),
        };
        let g = self.grid;
        Ok(Scene {
            buildings,
            obstacles,
            bases: self.bases.iter().map(BaseSpec::to_placement).collect(),
            smart_bases: self.smart_bases.iter().map(BaseSpec::to_placement).collect(),
            grid: VehicleGrid {
                origin: g.origin,
                rows: g.rows,
                cols: g.cols,
                spacing: g.spacing,
                antenna_height: g.antenna_height,
                array_rows: g.array_rows,
                array_cols: g.array_cols,
                boresight_azimuth: g.boresight_azimuth,
            },
            terrain_material,
            carrier_hz: self.rf.carrier_hz,
            bandwidth_hz: self.rf.bandwidth_hz,
        })
    }
}

impl BaseSpec {
    fn to_placement(&self) -> BasePlacement {
        BasePlacement {
            position: Vec3::from(self.position),
            array_rows: self.array_rows,
            array_cols: self.array_cols,
            boresight_azimuth: self.boresight_azimuth,
            tx_power_dbm: self.tx_power_dbm,
        }
    }
}
