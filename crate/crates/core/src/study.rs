//! Factorial deployment studies: scene variants × traffic levels × BS
//! placements, each summarised by a coverage report over traffic
//! realizations.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::mapping::{su_map, LinkSet, RaySource, SuMapConfig};
use crate::scene::Scene;
use crate::stats::{coverage, CoverageReport};

/// Which BS list of a scene is active.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Placement {
    #[default]
    Pseudorandom,
    Smart,
}

impl Placement {
    pub fn apply(self, scene: &Scene) -> Result<Scene> {
        match self {
            Placement::Pseudorandom => Ok(scene.clone()),
            Placement::Smart => scene.with_smart_deployment(),
        }
    }
}

/// Traffic intensity expressed as the number of trucks dropped per
/// realization.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrafficLevel {
    pub name: String,
    pub trucks: usize,
}

impl TrafficLevel {
    pub fn new(name: &str, trucks: usize) -> Self {
        TrafficLevel { name: name.to_string(), trucks }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    pub oversampling: usize,
    /// Traffic realizations per cell.
    pub realizations: usize,
    pub seed: u64,
    pub targets: Vec<f64>,
    pub exec: Execution,
}

/// Per-realization single-user rates over the whole grid (locations without
/// a path count as zero-rate samples).
pub fn su_rate_samples(scene: &Scene, trucks: usize, cfg: &StudyConfig) -> Result<Vec<Vec<f64>>> {
    let su = SuMapConfig {
        oversampling: cfg.oversampling,
        exec: cfg.exec,
        ..SuMapConfig::default()
    };
    (0..cfg.realizations.max(1) as u64)
        .map(|r| {
            let s = scene.with_traffic(trucks, cfg.seed, r);
            let links = LinkSet::collect(&s, &RaySource::Trace, cfg.exec);
            Ok(su_map(&s, &links, &su)?.map.values)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonCell {
    pub scene: String,
    pub traffic: String,
    pub placement: Placement,
    pub report: CoverageReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonTable {
    pub cells: Vec<ComparisonCell>,
}

impl ComparisonTable {
    pub fn cell(&self, scene: &str, traffic: &str, placement: Placement) -> Option<&CoverageReport> {
        self.cells
            .iter()
            .find(|c| c.scene == scene && c.traffic == traffic && c.placement == placement)
            .map(|c| &c.report)
    }
}

/// Evaluates every (scene, traffic, placement) combination. All scene
/// variants must share the same vehicle grid.
pub fn deployment_compare(
    variants: &[(String, Scene)],
    traffic: &[TrafficLevel],
    placements: &[Placement],
    cfg: &StudyConfig,
) -> Result<ComparisonTable> {
    if variants.is_empty() || traffic.is_empty() || placements.is_empty() {
        return Err(Error::Config("every study axis needs at least one level".into()));
    }
    let grid = &variants[0].1.grid;
    if let Some((name, _)) = variants.iter().find(|(_, s)| &s.grid != grid) {
        return Err(Error::GridMismatch(format!(
            "scene '{name}' does not share the grid of '{}'",
            variants[0].0
        )));
    }
    let mut cells = Vec::new();
    for (name, scene) in variants {
        for level in traffic {
            for &placement in placements {
                let active = placement.apply(scene)?;
                let groups = su_rate_samples(&active, level.trucks, cfg)?;
                cells.push(ComparisonCell {
                    scene: name.clone(),
                    traffic: level.name.clone(),
                    placement,
                    report: coverage(&groups, &cfg.targets)?,
                });
            }
        }
    }
    Ok(ComparisonTable { cells })
}
