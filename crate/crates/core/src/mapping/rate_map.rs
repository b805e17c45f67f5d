use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scene::VehicleGrid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Quantity {
    Rate,
    EnergyEfficiency,
}

impl Quantity {
    pub fn unit(self) -> &'static str {
        match self {
            Quantity::Rate => "bit/s",
            Quantity::EnergyEfficiency => "bit/J",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Quantity::Rate => "rate",
            Quantity::EnergyEfficiency => "energy-efficiency",
        }
    }
}

/// Link condition recorded per grid cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CellFlag {
    /// Served link with a line-of-sight ray.
    Los,
    /// Served only through reflections.
    Nlos,
    /// No propagation path at all.
    NoPath,
    /// Never scheduled (multiuser maps only). Not a zero rate.
    Unserved,
}

impl CellFlag {
    pub fn as_str(self) -> &'static str {
        match self {
            CellFlag::Los => "los",
            CellFlag::Nlos => "nlos",
            CellFlag::NoPath => "no-path",
            CellFlag::Unserved => "unserved",
        }
    }

    pub fn is_served(self) -> bool {
        self != CellFlag::Unserved
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct MapMetadata {
    pub scene_hash: String,
    pub config_hash: String,
    pub seed: u64,
}

/// Per-location scalar results over the vehicle grid, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct RateMap {
    pub grid: VehicleGrid,
    pub quantity: Quantity,
    pub values: Vec<f64>,
    pub visits: Vec<u32>,
    pub flags: Vec<CellFlag>,
    pub metadata: MapMetadata,
}

impl RateMap {
    pub fn rows(&self) -> usize {
        self.grid.rows
    }

    pub fn cols(&self) -> usize {
        self.grid.cols
    }

    pub fn value(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.grid.cols + col]
    }

    pub fn is_served(&self, index: usize) -> bool {
        self.flags[index].is_served()
    }

    /// Raw values at served locations, in grid order.
    pub fn served_values(&self) -> Vec<f64> {
        self.values
            .iter()
            .zip(&self.flags)
            .filter(|(_, f)| f.is_served())
            .map(|(&v, _)| v)
            .collect()
    }

    /// Writes the map as CSV. Leading `#` lines carry provenance; the
    /// header is `x_m,y_m,value,visits,flag`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let io = |e| Error::io("rate map csv", e);
        writeln!(
            out,
            "# quantity={} unit={} scene_hash={} config_hash={} seed={}",
            self.quantity.label(),
            self.quantity.unit(),
            self.metadata.scene_hash,
            self.metadata.config_hash,
            self.metadata.seed
        )
        .map_err(io)?;
        writeln!(out, "x_m,y_m,value,visits,flag").map_err(io)?;
        for r in 0..self.grid.rows {
            for c in 0..self.grid.cols {
                let i = r * self.grid.cols + c;
                let p = self.grid.point(r, c);
                writeln!(out, "{},{},{},{},{}", p.x, p.y, self.values[i], self.visits[i], self.flags[i].as_str())
                    .map_err(io)?;
            }
        }
        Ok(())
    }
}
