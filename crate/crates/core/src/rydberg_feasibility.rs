//! Geometry and error-budget checks for blockade-mediated two-qubit gates.
//!
//! Budget arithmetic only: the blockade radius is an input, never computed
//! from level structure.

use serde::Serialize;

use crate::error::{domain, Result};
use crate::scalar::Real;

/// Pitch must be at least this many waists for two spots to count as resolved.
pub const DEFAULT_RESOLUTION_FACTOR: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockadeConfig<T> {
    /// [m]
    pub blockade_radius: T,
    /// [m]
    pub pitch: T,
    /// [m]
    pub waist: T,
    pub intrinsic_error: T,
    pub technical_error: T,
    pub resolution_factor: T,
}

impl<T: Real> BlockadeConfig<T> {
    pub fn new(blockade_radius: T, pitch: T, waist: T, intrinsic_error: T, technical_error: T) -> Result<Self> {
        let cfg = Self {
            blockade_radius,
            pitch,
            waist,
            intrinsic_error,
            technical_error,
            resolution_factor: T::lit(DEFAULT_RESOLUTION_FACTOR),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_resolution_factor(mut self, factor: T) -> Result<Self> {
        self.resolution_factor = factor;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("blockade radius", self.blockade_radius),
            ("pitch", self.pitch),
            ("waist", self.waist),
            ("resolution factor", self.resolution_factor),
        ] {
            if !(v > T::zero() && v.is_finite()) {
                return domain(format!("{name} must be > 0, got {v}"));
            }
        }
        check_error("intrinsic error", self.intrinsic_error)?;
        check_error("technical error", self.technical_error)
    }
}

fn check_error<T: Real>(name: &str, e: T) -> Result<()> {
    if !(e >= T::zero() && e <= T::one()) {
        return domain(format!("{name} must lie in [0, 1], got {e}"));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GeometryReport {
    pub pair_within_blockade: bool,
    pub sites_resolved: bool,
}

impl GeometryReport {
    pub fn compatible(&self) -> bool {
        self.pair_within_blockade && self.sites_resolved
    }
}

/// Adjacent sites share a blockade sphere when `pitch <= radius` (inclusive).
pub fn geometry_compatible<T: Real>(cfg: &BlockadeConfig<T>) -> Result<GeometryReport> {
    cfg.validate()?;
    Ok(GeometryReport {
        pair_within_blockade: cfg.pitch <= cfg.blockade_radius,
        sites_resolved: cfg.pitch >= cfg.resolution_factor * cfg.waist,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FidelityBudget<T> {
    pub intrinsic_fidelity: T,
    pub total_fidelity: T,
}

/// Independent error channels compose multiplicatively.
pub fn gate_fidelity_budget<T: Real>(cfg: &BlockadeConfig<T>) -> Result<FidelityBudget<T>> {
    cfg.validate()?;
    let intrinsic = T::one() - cfg.intrinsic_error;
    Ok(FidelityBudget {
        intrinsic_fidelity: intrinsic,
        total_fidelity: intrinsic * (T::one() - cfg.technical_error),
    })
}

/// Technical error that brings the total fidelity down to `total_fidelity`.
pub fn solve_technical_error<T: Real>(intrinsic_error: T, total_fidelity: T) -> Result<T> {
    check_error("intrinsic error", intrinsic_error)?;
    check_error("total fidelity", total_fidelity)?;
    let intrinsic = T::one() - intrinsic_error;
    if intrinsic == T::zero() {
        return domain("intrinsic fidelity is zero; technical error is undetermined");
    }
    if total_fidelity > intrinsic {
        return domain(format!(
            "total fidelity {total_fidelity} exceeds the intrinsic fidelity {intrinsic}"
        ));
    }
    Ok(T::one() - total_fidelity / intrinsic)
}
