//! Geometric propagation: line of sight plus one- and two-bounce specular
//! reflections off vertical building faces (image-source method), with
//! exact blockage tests against buildings and obstacles.

mod dump;
mod fresnel;

pub use dump::{read_ray_dump, write_ray_dump, RayDumpRow};
pub use fresnel::{complex_permittivity, fresnel_reflection, Polarization};

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::geometry::{Axis, Vec3, VerticalFace};
use crate::scene::{Material, Scene};
use crate::units::{dbm_to_watts, SPEED_OF_LIGHT};

/// Polarization used for every wall reflection.
pub const REFLECTION_POLARIZATION: Polarization = Polarization::Te;

/// Maximum number of wall bounces traced.
pub const MAX_BOUNCES: u8 = 2;

/// One propagation path.
#[derive(Debug, Clone, PartialEq)]
pub struct Ray {
    /// Received power, W.
    pub power: f64,
    /// Radians in [0, 2π).
    pub phase: f64,
    /// Seconds.
    pub delay: f64,
    pub aod_azimuth: f64,
    pub aod_elevation: f64,
    pub aoa_azimuth: f64,
    pub aoa_elevation: f64,
    pub bounces: u8,
}

/// Paths for one transmitter/receiver pair, strongest first.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RaySet {
    pub rays: Vec<Ray>,
    pub tx_index: usize,
    pub rx_index: usize,
}

impl RaySet {
    pub fn new(mut rays: Vec<Ray>, tx_index: usize, rx_index: usize) -> Self {
        rays.sort_by(|a, b| b.power.total_cmp(&a.power));
        RaySet { rays, tx_index, rx_index }
    }

    pub fn is_empty(&self) -> bool {
        self.rays.is_empty()
    }

    pub fn len(&self) -> usize {
        self.rays.len()
    }

    pub fn has_los(&self) -> bool {
        self.rays.iter().any(|r| r.bounces == 0)
    }

    pub fn total_power(&self) -> f64 {
        self.rays.iter().map(|r| r.power).sum()
    }

    /// The same paths with powers divided by the transmit power, i.e. linear
    /// path gains.
    pub fn normalized(&self, tx_power_w: f64) -> RaySet {
        RaySet {
            rays: self
                .rays
                .iter()
                .map(|r| Ray { power: r.power / tx_power_w, ..r.clone() })
                .collect(),
            ..*self
        }
    }
}

/// Precomputed reflecting faces for a scene.
#[derive(Debug, Clone)]
pub struct Tracer<'a> {
    scene: &'a Scene,
    faces: Vec<VerticalFace>,
}

impl<'a> Tracer<'a> {
    pub fn new(scene: &'a Scene) -> Self {
        let mut faces = Vec::with_capacity(scene.buildings.len() * 4);
        for (i, b) in scene.buildings.iter().enumerate() {
            let face = |axis, offset, outward, span| VerticalFace {
                axis,
                offset,
                outward,
                span,
                height: b.height,
                building: i,
            };
            faces.push(face(Axis::X, b.min[0], -1.0, (b.min[1], b.max[1])));
            faces.push(face(Axis::X, b.max[0], 1.0, (b.min[1], b.max[1])));
            faces.push(face(Axis::Y, b.min[1], -1.0, (b.min[0], b.max[0])));
            faces.push(face(Axis::Y, b.max[1], 1.0, (b.min[0], b.max[0])));
        }
        Tracer { scene, faces }
    }

    pub fn scene(&self) -> &Scene {
        self.scene
    }

    /// Traces every unblocked path with at most two reflections.
    pub fn trace(&self, tx: Vec3, rx: Vec3, tx_power_dbm: f64) -> RaySet {
        let tx_power = dbm_to_watts(tx_power_dbm);
        let mut rays = Vec::new();
        if self.clear(tx, rx, &[]) {
            rays.push(self.make_ray(tx_power, &[tx, rx], &[]));
        }
        for f in &self.faces {
            if f.side(tx) <= 0.0 || f.side(rx) <= 0.0 {
                continue;
            }
            let Some(p) = f.hit(f.mirror(tx), rx) else { continue };
            if self.clear(tx, p, &[f.building]) && self.clear(p, rx, &[f.building]) {
                rays.push(self.make_ray(tx_power, &[tx, p, rx], &[f]));
            }
        }
        for (i, f1) in self.faces.iter().enumerate() {
            if f1.side(tx) <= 0.0 {
                continue;
            }
            let img1 = f1.mirror(tx);
            for (j, f2) in self.faces.iter().enumerate() {
                if i == j || f2.side(rx) <= 0.0 {
                    continue;
                }
                let img2 = f2.mirror(img1);
                let Some(p2) = f2.hit(img2, rx) else { continue };
                if f1.side(p2) <= 0.0 {
                    continue;
                }
                let Some(p1) = f1.hit(img1, p2) else { continue };
                if f2.side(p1) <= 0.0 {
                    continue;
                }
                if self.clear(tx, p1, &[f1.building])
                    && self.clear(p1, p2, &[f1.building, f2.building])
                    && self.clear(p2, rx, &[f2.building])
                {
                    rays.push(self.make_ray(tx_power, &[tx, p1, p2, rx], &[f1, f2]));
                }
            }
        }
        RaySet::new(rays, 0, 0)
    }

    /// Traces from base station `bs` to grid point `rx_index`.
    pub fn trace_link(&self, bs: usize, rx_index: usize) -> RaySet {
        let base = &self.scene.bases[bs];
        let g = &self.scene.grid;
        let rx = g.point(rx_index / g.cols, rx_index % g.cols);
        let mut set = self.trace(base.position, rx, base.tx_power_dbm);
        set.tx_index = bs;
        set.rx_index = rx_index;
        set
    }

    /// True when segment `a → b` touches no obstacle and no building other
    /// than those in `skip`.
    fn clear(&self, a: Vec3, b: Vec3, skip: &[usize]) -> bool {
        let buildings_clear = self
            .scene
            .buildings
            .iter()
            .enumerate()
            .filter(|(i, _)| !skip.contains(i))
            .all(|(_, bld)| !bld.bounds().intersects_segment(a, b));
        buildings_clear
            && self
                .scene
                .obstacles
                .iter()
                .all(|o| !o.bounds.intersects_segment(a, b))
    }

    fn make_ray(&self, tx_power: f64, points: &[Vec3], faces: &[&VerticalFace]) -> Ray {
        let lambda = self.scene.wavelength();
        let length: f64 = points.windows(2).map(|w| w[0].distance(w[1])).sum();
        let mut gamma = Complex64::new(1.0, 0.0);
        for (k, face) in faces.iter().enumerate() {
            let incoming = points[k + 1] - points[k];
            let cos_i = (incoming.dot(face.normal()).abs() / incoming.norm()).min(1.0);
            let material: &Material = &self.scene.buildings[face.building].material;
            gamma *= fresnel_reflection(material, cos_i.acos(), self.scene.carrier_hz, REFLECTION_POLARIZATION);
        }
        ray_from_path(tx_power, lambda, length, gamma, points, faces.len() as u8)
    }
}

fn ray_from_path(tx_power: f64, lambda: f64, length: f64, gamma: Complex64, points: &[Vec3], bounces: u8) -> Ray {
    let fspl = lambda / (4.0 * std::f64::consts::PI * length);
    let n = points.len();
    let (aod_azimuth, aod_elevation) = (points[1] - points[0]).angles();
    let (aoa_azimuth, aoa_elevation) = (points[n - 2] - points[n - 1]).angles();
    let reflection_phase = if bounces == 0 { 0.0 } else { gamma.arg() };
    Ray {
        power: tx_power * fspl * fspl * gamma.norm_sqr(),
        phase: (TAU * length / lambda + reflection_phase).rem_euclid(TAU),
        delay: length / SPEED_OF_LIGHT,
        aod_azimuth,
        aod_elevation,
        aoa_azimuth,
        aoa_elevation,
        bounces,
    }
}

/// Convenience wrapper around [`Tracer::trace`].
pub fn trace(scene: &Scene, tx: Vec3, rx: Vec3, tx_power_dbm: f64) -> RaySet {
    Tracer::new(scene).trace(tx, rx, tx_power_dbm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Aabb;
    use crate::scene::{BasePlacement, Building, Obstacle, VehicleGrid};

    fn empty_scene(carrier_hz: f64) -> Scene {
        Scene {
            buildings: vec![],
            obstacles: vec![],
            bases: vec![BasePlacement {
                position: Vec3::new(0.0, 0.0, 6.0),
                array_rows: 1,
                array_cols: 1,
                boresight_azimuth: 0.0,
                tx_power_dbm: 30.0,
            }],
            smart_bases: vec![],
            grid: VehicleGrid {
                origin: [10.0, 10.0],
                rows: 1,
                cols: 1,
                spacing: 5.0,
                antenna_height: 1.5,
                array_rows: 1,
                array_cols: 1,
                boresight_azimuth: 0.0,
            },
            terrain_material: Material::wet_earth(),
            carrier_hz,
            bandwidth_hz: 850e6,
        }
    }

    fn wall(min: [f64; 2], max: [f64; 2], material: Material) -> Building {
        Building { min, max, height: 30.0, material }
    }

    fn truck(x: (f64, f64), y: (f64, f64)) -> Obstacle {
        Obstacle {
            bounds: Aabb::new(Vec3::new(x.0, y.0, 0.0), Vec3::new(x.1, y.1, 5.0)),
            material: Material::pec("metal"),
        }
    }

    #[test]
    fn reference_distance_is_lossless() {
        let scene = empty_scene(28e9);
        let d = scene.wavelength() / (4.0 * std::f64::consts::PI);
        let set = trace(&scene, Vec3::new(0.0, 0.0, 1.0), Vec3::new(d, 0.0, 1.0), 30.0);
        assert_eq!(set.len(), 1);
        assert!((set.rays[0].power - 1.0).abs() < 1e-12);
        assert_eq!(set.rays[0].bounces, 0);
    }

    #[test]
    fn free_space_100m_at_28ghz() {
        let scene = empty_scene(28e9);
        let set = trace(&scene, Vec3::new(0.0, 0.0, 2.0), Vec3::new(100.0, 0.0, 2.0), 0.0);
        let ray = &set.rays[0];
        let loss_db = 0.0 - crate::units::watts_to_dbm(ray.power);
        // 20·log10(4π·100/λ) with λ = c/28e9.
        assert!((loss_db - 101.39).abs() < 0.005, "{loss_db}");
        assert!((ray.delay - 333.56e-9).abs() < 0.005e-9, "{}", ray.delay);
        assert!((ray.aod_elevation - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
        assert!(ray.aoa_azimuth.abs() - std::f64::consts::PI < 1e-12);
    }

    #[test]
    fn pec_blocker_kills_everything_without_walls() {
        let mut scene = empty_scene(28e9);
        scene.obstacles.push(truck((45.0, 55.0), (-5.0, 5.0)));
        let set = trace(&scene, Vec3::new(0.0, 0.0, 1.5), Vec3::new(100.0, 0.0, 1.5), 10.0);
        assert!(set.is_empty());
    }

    #[test]
    fn wall_reflection_survives_blockage() {
        let mut scene = empty_scene(28e9);
        scene.buildings.push(wall([-50.0, 20.0], [150.0, 40.0], Material::concrete()));
        scene.obstacles.push(truck((45.0, 55.0), (-2.0, 2.0)));
        let set = trace(&scene, Vec3::new(0.0, 0.0, 1.5), Vec3::new(100.0, 0.0, 1.5), 10.0);
        assert_eq!(set.len(), 1);
        assert_eq!(set.rays[0].bounces, 1);
        assert!(!set.has_los());
        assert!(set.rays[0].power > 0.0);
    }

    #[test]
    fn image_source_path_length() {
        let mut scene = empty_scene(28e9);
        scene.buildings.push(wall([-1000.0, 20.0], [1000.0, 40.0], Material::concrete()));
        let (tx, rx) = (Vec3::new(0.0, 3.0, 6.0), Vec3::new(70.0, 12.0, 1.5));
        let set = trace(&scene, tx, rx, 10.0);
        let reflected: Vec<_> = set.rays.iter().filter(|r| r.bounces == 1).collect();
        assert_eq!(reflected.len(), 1);
        let image = Vec3::new(0.0, 37.0, 6.0);
        let expected = image.distance(rx) / SPEED_OF_LIGHT;
        assert!((reflected[0].delay - expected).abs() < 1e-18);
    }

    #[test]
    fn pec_wall_reflection_loses_only_path_length() {
        let mut scene = empty_scene(28e9);
        scene.buildings.push(wall([-1000.0, 20.0], [1000.0, 40.0], Material::pec("steel")));
        let (tx, rx) = (Vec3::new(0.0, 0.0, 2.0), Vec3::new(30.0, 0.0, 2.0));
        let set = trace(&scene, tx, rx, 30.0);
        let refl = set.rays.iter().find(|r| r.bounces == 1).unwrap();
        let d = 50.0f64;
        let lambda = scene.wavelength();
        let expected = (lambda / (4.0 * std::f64::consts::PI * d)).powi(2);
        assert!((refl.power / expected - 1.0).abs() < 1e-12);
        let phase = (TAU * d / lambda + std::f64::consts::PI).rem_euclid(TAU);
        assert!((refl.phase - phase).abs() < 1e-6);
    }

    #[test]
    fn canyon_has_double_bounces() {
        let mut scene = empty_scene(28e9);
        scene.buildings.push(wall([-1000.0, 20.0], [1000.0, 40.0], Material::concrete()));
        scene.buildings.push(wall([-1000.0, -40.0], [1000.0, -10.0], Material::concrete()));
        let set = trace(&scene, Vec3::new(0.0, 0.0, 6.0), Vec3::new(80.0, 5.0, 1.5), 10.0);
        let counts: Vec<u8> = set.rays.iter().map(|r| r.bounces).collect();
        assert_eq!(counts.iter().filter(|&&b| b == 0).count(), 1);
        assert_eq!(counts.iter().filter(|&&b| b == 1).count(), 2);
        assert_eq!(counts.iter().filter(|&&b| b == 2).count(), 2);
        assert!(set.rays.windows(2).all(|w| w[0].power >= w[1].power));
        for r in &set.rays {
            assert!((0.0..TAU).contains(&r.phase));
            assert!((0.0..=std::f64::consts::PI).contains(&r.aoa_elevation));
        }
    }

    fn canyon_with_truck() -> Scene {
        let mut scene = empty_scene(28e9);
        scene.buildings.push(wall([-60.0, 20.0], [40.0, 40.0], Material::concrete()));
        scene.buildings.push(wall([50.0, 20.0], [200.0, 45.0], Material::concrete()));
        scene.buildings.push(wall([-60.0, -40.0], [200.0, -10.0], Material::concrete()));
        scene.obstacles.push(truck((30.0, 38.0), (4.0, 6.0)));
        scene
    }

    fn key(r: &Ray) -> (f64, f64, u8) {
        (r.power, r.delay, r.bounces)
    }

    #[test]
    fn reciprocity() {
        let scene = canyon_with_truck();
        let (a, b) = (Vec3::new(0.0, 2.0, 6.0), Vec3::new(90.0, 12.0, 1.5));
        let fwd = trace(&scene, a, b, 10.0);
        let rev = trace(&scene, b, a, 10.0);
        assert_eq!(fwd.len(), rev.len());
        let mut f: Vec<_> = fwd.rays.iter().map(key).collect();
        let mut r: Vec<_> = rev.rays.iter().map(key).collect();
        f.sort_by(|x, y| x.1.total_cmp(&y.1));
        r.sort_by(|x, y| x.1.total_cmp(&y.1));
        for (x, y) in f.iter().zip(&r) {
            assert!((x.0 / y.0 - 1.0).abs() < 1e-9);
            assert!((x.1 - y.1).abs() < 1e-15);
            assert_eq!(x.2, y.2);
        }
        for ray in &fwd.rays {
            let twin = rev
                .rays
                .iter()
                .find(|q| (q.delay - ray.delay).abs() < 1e-15 && q.bounces == ray.bounces)
                .unwrap();
            assert!((twin.aod_azimuth - ray.aoa_azimuth).abs() < 1e-9);
            assert!((twin.aoa_elevation - ray.aod_elevation).abs() < 1e-9);
        }
    }

    #[test]
    fn distant_obstacle_changes_nothing() {
        let scene = canyon_with_truck();
        let (a, b) = (Vec3::new(0.0, 2.0, 6.0), Vec3::new(90.0, 12.0, 1.5));
        let mut moved = scene.clone();
        moved.obstacles[0] = truck((500.0, 508.0), (4.0, 6.0));
        let mut without = scene.clone();
        without.obstacles.clear();
        assert_eq!(trace(&moved, a, b, 10.0), trace(&without, a, b, 10.0));
    }

    #[test]
    fn extra_bounce_never_gains_power() {
        let mut scene = empty_scene(28e9);
        scene.buildings.push(wall([-1000.0, 20.0], [1000.0, 40.0], Material::concrete()));
        scene.buildings.push(wall([-1000.0, -40.0], [1000.0, -10.0], Material::concrete()));
        for x in [10.0, 40.0, 120.0] {
            let set = trace(&scene, Vec3::new(0.0, 0.0, 6.0), Vec3::new(x, 5.0, 1.5), 10.0);
            let best = |b: u8| set.rays.iter().filter(|r| r.bounces == b).map(|r| r.power).fold(0.0, f64::max);
            assert!(best(0) >= best(1) && best(1) >= best(2));
        }
    }
}
