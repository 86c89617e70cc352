//! SLM transmission masks over the lens array and the mutable register state.
//!
//! The SLM is modelled at lens granularity: one transmission per microlens,
//! either fully on (1.0) or at the residual floor [`MIN_TRANSMISSION`].

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::beam_optics::{LensArraySpec, SiteGrid};
use crate::error::{domain, Error, Result};
use crate::qubit_dynamics::Bloch;
use crate::scalar::Real;

/// Residual transmission of a lens whose SLM pixels are switched off.
pub const MIN_TRANSMISSION: f64 = 0.004;
/// Default lower bound on the on/off contrast.
pub const DEFAULT_CONTRAST_FLOOR: f64 = 250.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    /// Every `period`-th lens along both rows and columns.
    #[default]
    Aligned,
    /// Lenses with `(row + col) mod period == offset`; rotates the lattice by 45° for period 2.
    Diagonal,
}

/// Reconfigurable trap or addressing pattern.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "pattern", rename_all = "snake_case")]
pub enum PatternKind {
    Full,
    Superlattice {
        period: usize,
        #[serde(default)]
        offset: usize,
        #[serde(default)]
        orientation: Orientation,
    },
    /// Tiles of `block_rows x block_cols` lit lenses separated by `gap` dark lenses.
    Blocks {
        block_rows: usize,
        block_cols: usize,
        gap: usize,
    },
    /// Sites within half a lattice unit of a circle of `radius` lattice units
    /// around the array centre.
    Ring { radius: f64 },
    Checkerboard,
}

/// Per-lens SLM transmission, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SlmMask {
    rows: usize,
    cols: usize,
    transmissions: Vec<f64>,
    min_transmission: f64,
}

impl SlmMask {
    pub fn new(rows: usize, cols: usize, transmissions: Vec<f64>) -> Result<Self> {
        Self::with_floor(rows, cols, transmissions, MIN_TRANSMISSION)
    }

    /// Mask with a custom residual transmission floor.
    pub fn with_floor(rows: usize, cols: usize, transmissions: Vec<f64>, min_transmission: f64) -> Result<Self> {
        if !(min_transmission > 0.0 && min_transmission <= 1.0) {
            return domain(format!("transmission floor must lie in (0, 1], got {min_transmission}"));
        }
        if transmissions.len() != rows * cols {
            return Err(Error::ShapeMismatch {
                expected: rows * cols,
                actual: transmissions.len(),
            });
        }
        if let Some((k, t)) = transmissions
            .iter()
            .enumerate()
            .find(|(_, &t)| !(t >= min_transmission && t <= 1.0))
        {
            return domain(format!(
                "transmission {t} at lens ({}, {}) outside [{min_transmission}, 1]",
                k / cols.max(1),
                k % cols.max(1)
            ));
        }
        Ok(Self {
            rows,
            cols,
            transmissions,
            min_transmission,
        })
    }

    pub fn uniform(rows: usize, cols: usize, value: f64) -> Result<Self> {
        Self::new(rows, cols, vec![value; rows * cols])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn len(&self) -> usize {
        self.transmissions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transmissions.is_empty()
    }

    pub fn transmissions(&self) -> &[f64] {
        &self.transmissions
    }

    pub fn get(&self, row: usize, col: usize) -> Option<f64> {
        (row < self.rows && col < self.cols).then(|| self.transmissions[row * self.cols + col])
    }

    pub fn set(&mut self, row: usize, col: usize, t: f64) -> Result<()> {
        if row >= self.rows || col >= self.cols {
            return Err(Error::PatternBounds {
                rows: self.rows,
                cols: self.cols,
                reason: format!("lens ({row}, {col}) does not exist"),
            });
        }
        if !(t >= self.min_transmission && t <= 1.0) {
            return domain(format!("transmission {t} outside [{}, 1]", self.min_transmission));
        }
        self.transmissions[row * self.cols + col] = t;
        Ok(())
    }

    pub fn min_transmission(&self) -> f64 {
        self.min_transmission
    }

    /// On/off intensity contrast, `1 / t_min`.
    pub fn contrast(&self) -> f64 {
        1.0 / self.min_transmission
    }

    pub fn check_contrast(&self, floor: f64) -> Result<()> {
        if self.contrast() + 1e-9 < floor {
            return domain(format!("mask contrast {:.1}:1 below required {floor:.1}:1", self.contrast()));
        }
        Ok(())
    }

    /// Number of lenses at full transmission.
    pub fn lit_count(&self) -> usize {
        self.transmissions.iter().filter(|&&t| t >= 1.0).count()
    }

    /// Elementwise product of two masks (e.g. re-applying a pattern).
    pub fn combine(&self, other: &SlmMask) -> Result<SlmMask> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::ShapeMismatch {
                expected: self.len(),
                actual: other.len(),
            });
        }
        let floor = self.min_transmission.max(other.min_transmission);
        let t = self
            .transmissions
            .iter()
            .zip(&other.transmissions)
            .map(|(a, b)| (a * b).max(floor))
            .collect();
        SlmMask::with_floor(self.rows, self.cols, t, floor)
    }

    /// Plain-text grid, one row per line, transmissions to four decimals.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols)
                .map(|j| format!("{:.4}", self.transmissions[i * self.cols + j]))
                .collect();
            let _ = writeln!(out, "{}", row.join(" "));
        }
        out
    }
}

/// Builds the lens mask for a pattern on the given array.
pub fn build_mask<T: Real>(kind: &PatternKind, grid: &LensArraySpec<T>) -> Result<SlmMask> {
    build_mask_for_shape(kind, grid.rows, grid.cols)
}

pub fn build_mask_for_shape(kind: &PatternKind, rows: usize, cols: usize) -> Result<SlmMask> {
    let bounds = |reason: String| Error::PatternBounds { rows, cols, reason };
    let lit: Box<dyn Fn(usize, usize) -> bool> = match *kind {
        PatternKind::Full => Box::new(|_, _| true),
        PatternKind::Checkerboard => Box::new(|i, j| (i + j) % 2 == 0),
        PatternKind::Superlattice {
            period,
            offset,
            orientation,
        } => {
            if period == 0 {
                return Err(bounds("superlattice period must be >= 1".into()));
            }
            if offset >= period {
                return Err(bounds(format!("offset {offset} must be below period {period}")));
            }
            if period > rows.max(cols) {
                return Err(bounds(format!("period {period} exceeds the array")));
            }
            match orientation {
                Orientation::Aligned => {
                    if offset >= rows || offset >= cols {
                        return Err(bounds(format!("offset {offset} leaves no lit lens")));
                    }
                    Box::new(move |i, j| i % period == offset && j % period == offset)
                }
                Orientation::Diagonal => Box::new(move |i, j| (i + j) % period == offset),
            }
        }
        PatternKind::Blocks {
            block_rows,
            block_cols,
            gap,
        } => {
            if block_rows == 0 || block_cols == 0 {
                return Err(bounds("block dimensions must be >= 1".into()));
            }
            if block_rows > rows || block_cols > cols {
                return Err(bounds(format!("{block_rows}x{block_cols} block larger than the array")));
            }
            Box::new(move |i, j| i % (block_rows + gap) < block_rows && j % (block_cols + gap) < block_cols)
        }
        PatternKind::Ring { radius } => {
            if !(radius > 0.0) {
                return Err(bounds(format!("ring radius must be > 0, got {radius}")));
            }
            let limit = (rows.min(cols) as f64 - 1.0) / 2.0;
            if radius > limit + 1e-12 {
                return Err(bounds(format!("ring radius {radius} exceeds half-width {limit}")));
            }
            let ci = (rows as f64 - 1.0) / 2.0;
            let cj = (cols as f64 - 1.0) / 2.0;
            Box::new(move |i, j| {
                let d = ((i as f64 - ci).powi(2) + (j as f64 - cj).powi(2)).sqrt();
                (d - radius).abs() <= 0.5
            })
        }
    };
    let t = (0..rows)
        .flat_map(|i| (0..cols).map(move |j| (i, j)))
        .map(|(i, j)| if lit(i, j) { 1.0 } else { MIN_TRANSMISSION })
        .collect();
    SlmMask::new(rows, cols, t)
}

/// Per-site power behind the mask: elementwise product.
pub fn apply_mask(mask: &SlmMask, base_power: &[f64]) -> Result<Vec<f64>> {
    if base_power.len() != mask.len() {
        return Err(Error::ShapeMismatch {
            expected: mask.len(),
            actual: base_power.len(),
        });
    }
    Ok(mask.transmissions.iter().zip(base_power).map(|(t, p)| t * p).collect())
}

/// Sites whose transmission reaches `threshold`.
pub fn addressed_sites(mask: &SlmMask, threshold: f64) -> BTreeSet<(usize, usize)> {
    (0..mask.rows)
        .flat_map(|i| (0..mask.cols).map(move |j| (i, j)))
        .filter(|&(i, j)| mask.transmissions[i * mask.cols + j] >= threshold)
        .collect()
}

/// State of one register site.
#[derive(Debug, Clone, PartialEq)]
pub struct SiteState {
    pub index: (usize, usize),
    /// [m]
    pub position: [f64; 3],
    pub occupancy: u32,
    /// Shared Bloch vector of the atoms at this site; `None` when empty.
    pub qubit: Option<Bloch<f64>>,
    /// Trap depth [J].
    pub depth: f64,
}

/// The 2D qubit register, row-major over the site grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RegisterState {
    pub rows: usize,
    pub cols: usize,
    pub pitch: f64,
    pub sites: Vec<SiteState>,
}

impl RegisterState {
    /// Empty register over `grid` with the given per-site trap depths.
    pub fn from_grid(grid: &SiteGrid<f64>, depths: &[f64]) -> Result<Self> {
        if depths.len() != grid.len() {
            return Err(Error::ShapeMismatch {
                expected: grid.len(),
                actual: depths.len(),
            });
        }
        let sites = grid
            .sites
            .iter()
            .zip(depths)
            .map(|(s, &depth)| SiteState {
                index: s.index,
                position: s.center,
                occupancy: 0,
                qubit: None,
                depth,
            })
            .collect();
        Ok(Self {
            rows: grid.rows,
            cols: grid.cols,
            pitch: grid.pitch,
            sites,
        })
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn flat_index(&self, row: usize, col: usize) -> Option<usize> {
        (row < self.rows && col < self.cols).then_some(row * self.cols + col)
    }

    pub fn site(&self, row: usize, col: usize) -> Option<&SiteState> {
        self.flat_index(row, col).map(|k| &self.sites[k])
    }

    /// Sets the atom count of a site; newly filled sites start in |0⟩,
    /// emptied sites lose their qubit.
    pub fn set_occupancy(&mut self, k: usize, n: u32) {
        let site = &mut self.sites[k];
        site.occupancy = n;
        if n == 0 {
            site.qubit = None;
        } else if site.qubit.is_none() {
            site.qubit = Some(Bloch::ground());
        }
    }

    pub fn set_occupancies(&mut self, counts: &[u32]) -> Result<()> {
        if counts.len() != self.len() {
            return Err(Error::ShapeMismatch {
                expected: self.len(),
                actual: counts.len(),
            });
        }
        for (k, &n) in counts.iter().enumerate() {
            self.set_occupancy(k, n);
        }
        Ok(())
    }

    pub fn occupancies(&self) -> Vec<u32> {
        self.sites.iter().map(|s| s.occupancy).collect()
    }

    pub fn total_atoms(&self) -> u64 {
        self.sites.iter().map(|s| s.occupancy as u64).sum()
    }

    /// Checks the per-site invariants.
    pub fn validate(&self) -> Result<()> {
        for s in &self.sites {
            match (s.occupancy, s.qubit) {
                (0, Some(_)) => return domain(format!("empty site {:?} carries a qubit state", s.index)),
                (_, Some(b)) if b.norm() > 1.0 + 1e-9 => {
                    return domain(format!("site {:?} Bloch norm {} exceeds 1", s.index, b.norm()))
                }
                _ => {}
            }
        }
        Ok(())
    }
}
