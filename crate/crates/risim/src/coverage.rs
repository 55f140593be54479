//! Receiver-grid coverage maps: per-position free-space path gains under a
//! fixed RIS configuration, with CSV and PGM writers.

use std::fs;
use std::path::Path;

use crate::channel::{end_to_end, synth_freespace};
use crate::configure::PhaseConfig;
use crate::error::{Result, RisError};
use crate::scalar::Scalar;
use crate::scene::Scene;

/// Gains at or below this level (including |h| = 0) clamp to the floor.
pub const GAIN_FLOOR_DB: f64 = -200.0;
/// Largest allowed number of grid cells.
pub const MAX_GRID_CELLS: usize = 1_000_000;

/// Rectangular receiver grid in the global x–y plane at fixed height `z`.
/// `origin` is the center of cell (0, 0); cell (ix, iy) sits at
/// `origin + (ix·cell_size, iy·cell_size)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec<T> {
    pub origin: [T; 2],
    pub cell_size: T,
    pub nx: usize,
    pub ny: usize,
    pub z: T,
}

impl<T: Scalar> GridSpec<T> {
    pub fn validate(&self) -> Result<()> {
        if self.nx == 0 || self.ny == 0 {
            return Err(RisError::Domain(format!(
                "grid must be at least 1x1, got {}x{}",
                self.nx, self.ny
            )));
        }
        if !self.cell_size.is_finite() || self.cell_size <= T::zero() {
            return Err(RisError::Domain(format!(
                "cell size must be positive, got {}",
                self.cell_size
            )));
        }
        if self.nx.saturating_mul(self.ny) > MAX_GRID_CELLS {
            return Err(RisError::Capacity(format!(
                "grid {}x{} exceeds {MAX_GRID_CELLS} cells",
                self.nx, self.ny
            )));
        }
        Ok(())
    }

    /// Receiver position at the center of cell (ix, iy).
    pub fn cell_center(&self, ix: usize, iy: usize) -> [T; 3] {
        [
            self.origin[0] + T::from_usize(ix).unwrap() * self.cell_size,
            self.origin[1] + T::from_usize(iy).unwrap() * self.cell_size,
            self.z,
        ]
    }

    /// Indices of the cell whose center is nearest to `point` (x–y only),
    /// clamped to the grid.
    pub fn nearest_cell(&self, point: &[T; 3]) -> (usize, usize) {
        let idx = |coord: T, origin: T, n: usize| -> usize {
            let raw = ((coord - origin) / self.cell_size).round();
            let max = T::from_usize(n - 1).unwrap();
            let clamped = raw.max(T::zero()).min(max);
            clamped.to_usize().unwrap_or(0)
        };
        (
            idx(point[0], self.origin[0], self.nx),
            idx(point[1], self.origin[1], self.ny),
        )
    }
}

/// Path gains in dB over a receiver grid, row-major with `iy` outer.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageGrid<T> {
    pub values: Vec<T>,
    pub spec: GridSpec<T>,
    pub config_label: String,
}

impl<T: Scalar> CoverageGrid<T> {
    pub fn value(&self, ix: usize, iy: usize) -> T {
        self.values[iy * self.spec.nx + ix]
    }

    pub fn min_db(&self) -> T {
        self.values.iter().copied().fold(T::infinity(), T::min)
    }

    pub fn max_db(&self) -> T {
        self.values.iter().copied().fold(T::neg_infinity(), T::max)
    }

    /// Cell indices of the maximum value (first occurrence in row-major
    /// order on ties).
    pub fn argmax(&self) -> (usize, usize) {
        let mut best = (0, 0);
        let mut best_v = T::neg_infinity();
        for iy in 0..self.spec.ny {
            for ix in 0..self.spec.nx {
                let v = self.value(ix, iy);
                if v > best_v {
                    best_v = v;
                    best = (ix, iy);
                }
            }
        }
        best
    }
}

/// Free-space path gain `10·log10|h|²` at one receiver position, floored at
/// [`GAIN_FLOOR_DB`].  The per-element gains are re-synthesized for the
/// given receiver; composition excludes the direct Tx→Rx path unless
/// `include_los` is set.
pub fn path_gain_at<T: Scalar>(
    scene: &Scene<T>,
    rx: &[T; 3],
    config: &PhaseConfig<T>,
    include_los: bool,
) -> Result<T> {
    let moved = scene.with_rx(*rx);
    let channel = synth_freespace(&moved, include_los)?;
    let h = end_to_end(&channel, config)?;
    Ok(power_db(h.norm_sqr()))
}

/// Clamped dB conversion of a linear power value.
pub fn power_db<T: Scalar>(power: T) -> T {
    let floor = T::real(GAIN_FLOOR_DB);
    if power <= T::zero() {
        return floor;
    }
    let db = T::real(10.0) * power.log10();
    db.max(floor)
}

/// Evaluates [`path_gain_at`] over every cell of the grid.
pub fn coverage_map<T: Scalar>(
    scene: &Scene<T>,
    config: &PhaseConfig<T>,
    grid: &GridSpec<T>,
    include_los: bool,
    config_label: &str,
) -> Result<CoverageGrid<T>> {
    grid.validate()?;
    scene.validate()?;
    let mut values = Vec::with_capacity(grid.nx * grid.ny);
    for iy in 0..grid.ny {
        for ix in 0..grid.nx {
            let rx = grid.cell_center(ix, iy);
            values.push(path_gain_at(scene, &rx, config, include_los)?);
        }
    }
    Ok(CoverageGrid {
        values,
        spec: grid.clone(),
        config_label: config_label.to_string(),
    })
}

/// Output format for [`write_grid`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridFormat {
    Csv,
    Pgm,
}

/// Grayscale mapping range for PGM output; `None` bounds auto-scale to the
/// map's own min/max.
#[derive(Debug, Clone, Copy, Default)]
pub struct PgmScale {
    pub floor_db: Option<f64>,
    pub max_db: Option<f64>,
}

/// Writes the map as CSV (`x,y,gain_db`, row-major) or as a binary 8-bit
/// PGM whose comment line records the dB range; both are byte-stable across
/// runs on identical inputs.
pub fn write_grid<T: Scalar>(
    grid: &CoverageGrid<T>,
    format: GridFormat,
    path: &Path,
    scale: PgmScale,
) -> Result<()> {
    let bytes = match format {
        GridFormat::Csv => render_csv(grid).into_bytes(),
        GridFormat::Pgm => render_pgm(grid, scale),
    };
    fs::write(path, bytes).map_err(|e| RisError::io(path, e))
}

fn render_csv<T: Scalar>(grid: &CoverageGrid<T>) -> String {
    let mut out = String::from("x,y,gain_db\n");
    for iy in 0..grid.spec.ny {
        for ix in 0..grid.spec.nx {
            let c = grid.spec.cell_center(ix, iy);
            out.push_str(&format!("{},{},{}\n", c[0], c[1], grid.value(ix, iy)));
        }
    }
    out
}

/// 8-bit pixel for a dB value within [floor, max]; a degenerate range maps
/// everything to white.
fn pixel(value: f64, floor: f64, max: f64) -> u8 {
    if max <= floor {
        return 255;
    }
    let clamped = value.clamp(floor, max);
    ((clamped - floor) / (max - floor) * 255.0).round() as u8
}

fn render_pgm<T: Scalar>(grid: &CoverageGrid<T>, scale: PgmScale) -> Vec<u8> {
    let auto_min = grid.min_db().to_f64().unwrap_or(GAIN_FLOOR_DB);
    let auto_max = grid.max_db().to_f64().unwrap_or(GAIN_FLOOR_DB);
    let floor = scale.floor_db.unwrap_or(auto_min);
    let max = scale.max_db.unwrap_or(auto_max);
    let mut out = Vec::with_capacity(64 + grid.values.len());
    let header = format!(
        "P5\n# floor_db={floor} max_db={max}\n{} {}\n255\n",
        grid.spec.nx, grid.spec.ny
    );
    out.extend_from_slice(header.as_bytes());
    for iy in 0..grid.spec.ny {
        for ix in 0..grid.spec.nx {
            let v = grid.value(ix, iy).to_f64().unwrap_or(GAIN_FLOOR_DB);
            out.push(pixel(v, floor, max));
        }
    }
    out
}
