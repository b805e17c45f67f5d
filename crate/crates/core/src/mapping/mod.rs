//! Situational maps: per-location rates or energy efficiencies over the
//! vehicle grid, plus interpolation and image rendering for display.

mod heatmap;
mod links;
mod mu;
mod rate_map;
mod su;

pub use heatmap::{color, interpolate_map, render_ppm, scale_sidecar, Raster};
pub use links::{link_channel, LinkSet, RaySource};
pub use mu::{mu_map, schedule, MuMapConfig, MuMapOutput, SlotRecord};
pub use rate_map::{CellFlag, MapMetadata, Quantity, RateMap};
pub use su::{su_map, BestBsPolicy, SuMapConfig, SuMapOutput};
