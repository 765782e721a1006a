//! Point clouds on level sets of catalogue potentials.

use std::path::Path;

use ewtoda::toda::catalog;
use ewtoda::toda::levelset::{extract_levelset, to_csv, to_obj};

use crate::error::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct LevelSet {
    pub entry: String,
    pub u0: f64,
    pub grid: usize,
    /// `(X, Y, Z, U)` with `|U − U₀| ≤ 1e-6`.
    pub points: Vec<[f64; 4]>,
}

impl LevelSet {
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn csv(&self) -> String {
        to_csv(&self.points)
    }

    pub fn obj(&self) -> String {
        to_obj(&self.points)
    }

    /// Writes `<stem>.csv` and `<stem>.obj`.
    pub fn write(&self, stem: &Path) -> Result<()> {
        std::fs::write(stem.with_extension("csv"), self.csv())?;
        std::fs::write(stem.with_extension("obj"), self.obj())?;
        Ok(())
    }

    pub fn summary(&self) -> String {
        if self.is_empty() {
            format!("{}: level set U = {} is empty in the box (grid {})", self.entry, self.u0, self.grid)
        } else {
            format!("{}: {} points on U = {} (grid {})", self.entry, self.points.len(), self.u0, self.grid)
        }
    }
}

/// Samples the level set `U = u0` of a catalogue entry on a `grid³` lattice.
/// An empty level set is a valid result.
pub fn export_levelset(entry: &str, u0: f64, grid: usize) -> Result<LevelSet> {
    let e = catalog::entry(entry)?;
    let points = extract_levelset(&e.solution, u0, grid)?;
    Ok(LevelSet {
        entry: entry.to_string(),
        u0,
        grid,
        points,
    })
}
