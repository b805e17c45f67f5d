//! Situational rate maps for mmWave V2X links.
//!
//! The crate traces rays through a parametric street scene, builds
//! narrowband MIMO channels from the rays, runs analog beam search and
//! multiuser hybrid precoding with limited feedback, and turns the per-link
//! results into rate maps, energy-efficiency maps and coverage statistics.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod beamforming;
pub mod error;
pub mod exec;
pub mod geometry;
pub mod hybrid;
pub mod mapping;
pub mod phy;
pub mod pipeline;
pub mod raytracer;
pub mod scene;
pub mod stats;
pub mod study;
pub mod synthetic;
pub mod units;

pub use error::{Error, Result};
