//! End-to-end runs: scene file in, rate maps, heatmaps, coverage report and
//! run manifest out.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::exec::{with_threads, Execution};
use crate::hybrid::{Baseband, Feedback, HybridConfig, PowerModel, Structure};
use crate::mapping::{
    interpolate_map, mu_map, render_ppm, scale_sidecar, su_map, LinkSet, MapMetadata, MuMapConfig, RateMap,
    RaySource, SuMapConfig,
};
use crate::phy::DEFAULT_MAX_CODEBOOK_BITS;
use crate::raytracer::{read_ray_dump, write_ray_dump};
use crate::scene::{Scene, VehicleGrid};
use crate::stats::{coverage, outage_probability, rate_with_outage, CoverageReport, DEFAULT_TARGETS};
use crate::study::Placement;

/// Upsampling factor of the rendered heatmaps.
pub const INTERPOLATION_FACTOR: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Su,
    Mu,
}

fn default_rho() -> usize {
    1
}

fn default_targets() -> Vec<f64> {
    DEFAULT_TARGETS.to_vec()
}

fn default_epsilon() -> f64 {
    0.05
}

fn default_max_bits() -> u32 {
    DEFAULT_MAX_CODEBOOK_BITS
}

/// Everything that determines a run's results. The output directory and
/// thread count are deliberately absent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scene: PathBuf,
    pub mode: Mode,
    #[serde(default = "default_rho")]
    pub rho: usize,
    #[serde(default)]
    pub feedback: Option<Feedback>,
    #[serde(default)]
    pub structure: Option<Structure>,
    #[serde(default)]
    pub users: Option<usize>,
    #[serde(default)]
    pub realizations: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_targets")]
    pub targets: Vec<f64>,
    #[serde(default)]
    pub baseband: Baseband,
    #[serde(default)]
    pub serving_bs: usize,
    #[serde(default)]
    pub placement: Placement,
    /// Trucks dropped per traffic realization (single-user mode).
    #[serde(default)]
    pub trucks: usize,
    #[serde(default)]
    pub traffic_realizations: Option<usize>,
    /// Outage level for the rate-with-outage figure.
    #[serde(default = "default_epsilon")]
    pub outage_epsilon: f64,
    /// Also report `(1 − ε)` scaled throughput.
    #[serde(default)]
    pub throughput_scaling: bool,
    #[serde(default)]
    pub ray_import: Option<PathBuf>,
    #[serde(default)]
    pub ray_dump: Option<PathBuf>,
    #[serde(default = "default_max_bits")]
    pub max_codebook_bits: u32,
}

impl RunConfig {
    pub fn new(scene: impl Into<PathBuf>, mode: Mode) -> Self {
        RunConfig {
            scene: scene.into(),
            mode,
            rho: 1,
            feedback: None,
            structure: None,
            users: None,
            realizations: None,
            seed: 0,
            targets: default_targets(),
            baseband: Baseband::ZeroForcing,
            serving_bs: 0,
            placement: Placement::Pseudorandom,
            trucks: 0,
            traffic_realizations: None,
            outage_epsilon: default_epsilon(),
            throughput_scaling: false,
            ray_import: None,
            ray_dump: None,
            max_codebook_bits: DEFAULT_MAX_CODEBOOK_BITS,
        }
    }

    /// Mode-consistency checks that do not need the scene.
    pub fn validate(&self) -> Result<()> {
        if self.rho == 0 {
            return Err(Error::Config("rho must be >= 1".into()));
        }
        if !(0.0..=1.0).contains(&self.outage_epsilon) {
            return Err(Error::Config("outage epsilon must lie in [0, 1]".into()));
        }
        if self.targets.iter().any(|t| !t.is_finite() || *t < 0.0) {
            return Err(Error::Config("target rates must be finite and >= 0".into()));
        }
        if self.ray_import.is_some() && self.trucks > 0 {
            return Err(Error::Config("imported rays cannot be combined with generated traffic".into()));
        }
        if self.mode == Mode::Mu {
            if self.users.is_none() {
                return Err(Error::Config("multiuser mode requires users".into()));
            }
            if self.realizations.is_none() {
                return Err(Error::Config("multiuser mode requires realizations".into()));
            }
            if self.trucks > 0 {
                return Err(Error::Config("generated traffic is only supported in single-user mode".into()));
            }
        }
        Ok(())
    }

    /// JSON of the result-determining fields, with file paths replaced by
    /// content hashes.
    fn hashed_view(&self, scene_hash: &str, import_hash: Option<&str>) -> Value {
        let mut v = serde_json::to_value(self).expect("config serializes");
        let obj = v.as_object_mut().expect("config is an object");
        obj.remove("scene");
        obj.remove("ray_dump");
        obj.remove("ray_import");
        obj.insert("scene_sha256".into(), json!(scene_hash));
        obj.insert("ray_import_sha256".into(), json!(import_hash));
        v
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::io(path.display().to_string(), e))
}

/// Results of a run before anything is written.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub scene_hash: String,
    pub config_hash: String,
    pub grid: VehicleGrid,
    pub rate_map: RateMap,
    /// Multiuser runs only.
    pub ee_map: Option<RateMap>,
    /// Rate samples grouped by realization (traffic realization or slot).
    pub groups: Vec<Vec<f64>>,
    pub ee_groups: Vec<Vec<f64>>,
    pub singular_slots: usize,
    links: Option<LinkSet>,
}

fn accumulate(maps: Vec<RateMap>) -> RateMap {
    use crate::mapping::CellFlag;
    let n = maps.len();
    let mut out = maps[0].clone();
    if n == 1 {
        return out;
    }
    for i in 0..out.values.len() {
        out.values[i] = maps.iter().map(|m| m.values[i]).sum::<f64>() / n as f64;
        out.visits[i] = n as u32;
        let all = |f: CellFlag| maps.iter().all(|m| m.flags[i] == f);
        out.flags[i] = if all(CellFlag::Los) {
            CellFlag::Los
        } else if all(CellFlag::NoPath) {
            CellFlag::NoPath
        } else {
            CellFlag::Nlos
        };
    }
    out
}

/// Computes maps and statistics for `cfg`.
pub fn evaluate(cfg: &RunConfig, exec: Execution) -> Result<Evaluation> {
    cfg.validate()?;
    let scene_bytes = read_file(&cfg.scene)?;
    let scene_hash = sha256_hex(&scene_bytes);
    let scene = Scene::from_json_bytes(&scene_bytes, &cfg.scene.display().to_string())?;
    let scene = cfg.placement.apply(&scene)?;
    let (source, import_hash) = match &cfg.ray_import {
        Some(path) => {
            let bytes = read_file(path)?;
            let rays = read_ray_dump(bytes.as_slice(), &path.display().to_string())?;
            (RaySource::Imported(rays), Some(sha256_hex(&bytes)))
        }
        None => (RaySource::Trace, None),
    };
    let view = cfg.hashed_view(&scene_hash, import_hash.as_deref());
    let config_hash = sha256_hex(view.to_string().as_bytes());
    let metadata = MapMetadata {
        scene_hash: scene_hash.clone(),
        config_hash: config_hash.clone(),
        seed: cfg.seed,
    };

    match cfg.mode {
        Mode::Su => {
            let su = SuMapConfig {
                oversampling: cfg.rho,
                exec,
                metadata,
                ..SuMapConfig::default()
            };
            let realizations = cfg.traffic_realizations.unwrap_or(1).max(1);
            let mut maps = Vec::with_capacity(realizations);
            let mut first_links = None;
            for r in 0..realizations as u64 {
                let s = scene.with_traffic(cfg.trucks, cfg.seed, r);
                let links = LinkSet::collect(&s, &source, exec);
                maps.push(su_map(&s, &links, &su)?.map);
                first_links.get_or_insert(links);
            }
            let groups = maps.iter().map(|m| m.values.clone()).collect();
            Ok(Evaluation {
                scene_hash,
                config_hash,
                grid: scene.grid.clone(),
                rate_map: accumulate(maps),
                ee_map: None,
                groups,
                ee_groups: Vec::new(),
                singular_slots: 0,
                links: first_links,
            })
        }
        Mode::Mu => {
            let users = cfg.users.expect("validated");
            let structure = cfg.structure.unwrap_or(Structure::FullyConnected);
            let feedback = cfg.feedback.unwrap_or(Feedback::Perfect);
            let hybrid =
                HybridConfig::new(structure, users, feedback, scene.tx_antennas())?.with_baseband(cfg.baseband);
            let mu = MuMapConfig {
                oversampling: cfg.rho,
                serving_bs: cfg.serving_bs,
                power: PowerModel::default(),
                max_codebook_bits: cfg.max_codebook_bits,
                exec,
                metadata,
                ..MuMapConfig::new(hybrid, cfg.realizations.expect("validated"), cfg.seed)
            };
            let links = LinkSet::collect(&scene, &source, exec);
            let out = mu_map(&scene, &links, &mu)?;
            Ok(Evaluation {
                scene_hash,
                config_hash,
                grid: scene.grid.clone(),
                groups: out.slots.iter().map(|s| s.rates.clone()).collect(),
                ee_groups: out.slots.iter().map(|s| s.energy_efficiency.clone()).collect(),
                singular_slots: out.singular_slots(),
                rate_map: out.rate_map,
                ee_map: Some(out.ee_map),
                links: Some(links),
            })
        }
    }
}

impl Evaluation {
    pub fn coverage(&self, targets: &[f64]) -> Result<CoverageReport> {
        coverage(&self.groups, targets)
    }

    /// Every rate sample, in realization order.
    pub fn samples(&self) -> Vec<f64> {
        self.groups.iter().flatten().copied().collect()
    }
}

/// Contents of `coverage.json`.
fn coverage_document(cfg: &RunConfig, eval: &Evaluation) -> Result<Value> {
    let report = eval.coverage(&cfg.targets)?;
    let samples = eval.samples();
    let outage: Vec<f64> = cfg
        .targets
        .iter()
        .map(|&t| outage_probability(&samples, t))
        .collect::<Result<_>>()?;
    let r_eps = rate_with_outage(&samples, cfg.outage_epsilon)?;
    let mut doc = json!({
        "config_hash": eval.config_hash,
        "scene_hash": eval.scene_hash,
        "quantity": "rate",
        "unit": "bit/s",
        "report": report,
        "outage_probability": outage,
        "outage_epsilon": cfg.outage_epsilon,
        "rate_with_outage": r_eps,
    });
    if cfg.throughput_scaling {
        doc["throughput_with_outage"] = json!((1.0 - cfg.outage_epsilon) * r_eps);
    }
    if !eval.ee_groups.is_empty() {
        let ee = coverage(&eval.ee_groups, &[])?;
        doc["energy_efficiency"] = json!({"unit": "bit/J", "mean": ee.mean_rate, "std_dev": ee.std_dev});
        doc["singular_slots"] = json!(eval.singular_slots);
    }
    Ok(doc)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path.display().to_string(), e))
}

fn write_json(path: &Path, value: &Value) -> Result<()> {
    let mut f = create(path)?;
    let text = serde_json::to_string_pretty(value).expect("json value serializes");
    writeln!(f, "{text}")
        .and_then(|_| f.flush())
        .map_err(|e| Error::io(path.display().to_string(), e))
}

fn write_map(dir: &Path, stem: &str, map: &RateMap, written: &mut Vec<String>) -> Result<()> {
    let csv_name = format!("{stem}.csv");
    let path = dir.join(&csv_name);
    let mut f = create(&path)?;
    map.write_csv(&mut f)?;
    f.flush().map_err(|e| Error::io(path.display().to_string(), e))?;

    let raster = interpolate_map(map, INTERPOLATION_FACTOR);
    let ppm_name = format!("{stem}.ppm");
    let path = dir.join(&ppm_name);
    let mut f = create(&path)?;
    render_ppm(&raster, &map.metadata.config_hash, &mut f)?;
    f.flush().map_err(|e| Error::io(path.display().to_string(), e))?;

    let scale_name = format!("{stem}_scale.txt");
    let path = dir.join(&scale_name);
    std::fs::write(&path, scale_sidecar(&raster, map)).map_err(|e| Error::io(path.display().to_string(), e))?;
    written.extend([csv_name, ppm_name, scale_name]);
    Ok(())
}

/// Summary returned by [`run`].
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub config_hash: String,
    pub artifacts: Vec<PathBuf>,
}

/// Evaluates `cfg` on `threads` worker threads (all cores when `None`) and
/// writes every artifact into `out_dir`.
pub fn run(cfg: &RunConfig, out_dir: &Path, threads: Option<usize>) -> Result<RunSummary> {
    let eval = with_threads(threads, || evaluate(cfg, Execution::Parallel))?;
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir.display().to_string(), e))?;
    let mut written = Vec::new();
    write_map(out_dir, "rate_map", &eval.rate_map, &mut written)?;
    if let Some(ee) = &eval.ee_map {
        write_map(out_dir, "ee_map", ee, &mut written)?;
    }
    write_json(&out_dir.join("coverage.json"), &coverage_document(cfg, &eval)?)?;
    written.push("coverage.json".into());
    if let (Some(path), Some(links)) = (&cfg.ray_dump, &eval.links) {
        let f = create(path)?;
        write_ray_dump(f, links.iter())?;
    }
    let manifest = json!({
        "tool": "canyonwave",
        "version": env!("CARGO_PKG_VERSION"),
        "config_hash": eval.config_hash,
        "scene_hash": eval.scene_hash,
        "config": cfg,
        "artifacts": written,
    });
    write_json(&out_dir.join("manifest.json"), &manifest)?;
    written.push("manifest.json".into());
    Ok(RunSummary {
        config_hash: eval.config_hash,
        artifacts: written.iter().map(|n| out_dir.join(n)).collect(),
    })
}

/// Reads a run configuration file (the same JSON object that `run` records
/// under `config` in its manifest). A relative scene path is resolved
/// against the file's directory.
pub fn load_run_config(path: &Path) -> Result<RunConfig> {
    let f = File::open(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let mut cfg: RunConfig = serde_json::from_reader(BufReader::new(f)).map_err(|e| Error::Parse {
        context: path.display().to_string(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let base = path.parent().unwrap_or(Path::new("."));
    for p in [Some(&mut cfg.scene), cfg.ray_import.as_mut()].into_iter().flatten() {
        if p.is_relative() && !p.exists() {
            *p = base.join(&*p);
        }
    }
    Ok(cfg)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareSide {
    pub config_hash: String,
    pub report: CoverageReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareDelta {
    pub mean_rate: f64,
    pub std_dev: f64,
    pub coverage_percent: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub a: CompareSide,
    pub b: CompareSide,
    /// `b − a`.
    pub delta: CompareDelta,
}

/// Runs two configurations on the same grid and reports `b − a`. Targets
/// are taken from `a`.
pub fn compare(a: &RunConfig, b: &RunConfig, threads: Option<usize>) -> Result<Comparison> {
    let (ea, eb) = with_threads(threads, || -> Result<_> {
        Ok((evaluate(a, Execution::Parallel)?, evaluate(b, Execution::Parallel)?))
    })?;
    if ea.grid != eb.grid {
        return Err(Error::GridMismatch(format!(
            "{} uses a {}x{} grid, {} a {}x{} grid",
            a.scene.display(),
            ea.grid.rows,
            ea.grid.cols,
            b.scene.display(),
            eb.grid.rows,
            eb.grid.cols
        )));
    }
    let ra = ea.coverage(&a.targets)?;
    let rb = eb.coverage(&a.targets)?;
    let delta = CompareDelta {
        mean_rate: rb.mean_rate - ra.mean_rate,
        std_dev: rb.std_dev - ra.std_dev,
        coverage_percent: rb
            .coverage_percent
            .iter()
            .zip(&ra.coverage_percent)
            .map(|(y, x)| y - x)
            .collect(),
    };
    Ok(Comparison {
        a: CompareSide { config_hash: ea.config_hash, report: ra },
        b: CompareSide { config_hash: eb.config_hash, report: rb },
        delta,
    })
}

/// Writes a comparison as pretty JSON.
pub fn write_comparison(path: &Path, cmp: &Comparison) -> Result<()> {
    write_json(path, &serde_json::to_value(cmp).expect("comparison serializes"))
}
