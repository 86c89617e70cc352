//! Atomic species data.
//!
//! Constants come from a TOML table (`data/species.toml` is compiled in as
//! the default) so they can be swapped without touching code.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::constants::{ATOMIC_MASS_UNIT, SPEED_OF_LIGHT};
use crate::error::{Error, Result};
use crate::scalar::Real;

const BUILTIN_SPECIES: &str = include_str!("../data/species.toml");

/// Operating point that fixes the state-changing scattering normalization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RamanCalibrationRecord {
    pub wavelength_m: f64,
    pub power_w: f64,
    pub waist_m: f64,
    pub rate_per_s: f64,
}

/// One row of the species table, in the units stored on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeciesRecord {
    pub symbol: String,
    pub mass_u: f64,
    pub d2_wavelength_m: f64,
    pub d1_wavelength_m: f64,
    pub linewidth_hz: f64,
    pub qubit_splitting_hz: f64,
    #[serde(default)]
    pub raman_calibration: Option<RamanCalibrationRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeciesTable {
    pub species: Vec<SpeciesRecord>,
}

impl SpeciesTable {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Species(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Species(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn builtin() -> Self {
        Self::parse(BUILTIN_SPECIES).expect("bundled species table parses")
    }

    pub fn get(&self, symbol: &str) -> Option<&SpeciesRecord> {
        self.species.iter().find(|s| s.symbol == symbol)
    }

    pub fn species<T: Real>(&self, symbol: &str) -> Result<AtomSpecies<T>> {
        let rec = self.get(symbol).ok_or_else(|| {
            let known: Vec<_> = self.species.iter().map(|s| s.symbol.as_str()).collect();
            Error::Species(format!("unknown species '{symbol}', known: {}", known.join(", ")))
        })?;
        AtomSpecies::from_record(rec)
    }
}

/// Calibration point in working units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RamanCalibration<T> {
    pub wavelength: T,
    pub power: T,
    pub waist: T,
    pub rate: T,
}

/// Alkali atom with D1/D2 lines and a hyperfine clock qubit.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomSpecies<T> {
    pub symbol: String,
    /// [kg]
    pub mass: T,
    /// [m]
    pub d2_wavelength: T,
    /// [m]
    pub d1_wavelength: T,
    /// Natural linewidth Γ [rad/s].
    pub linewidth: T,
    /// Clock-state splitting [rad/s].
    pub qubit_splitting: T,
    pub raman_calibration: Option<RamanCalibration<T>>,
}

impl<T: Real> AtomSpecies<T> {
    pub fn from_record(rec: &SpeciesRecord) -> Result<Self> {
        let two_pi = 2.0 * std::f64::consts::PI;
        let species = Self {
            symbol: rec.symbol.clone(),
            mass: T::lit(rec.mass_u * ATOMIC_MASS_UNIT),
            d2_wavelength: T::lit(rec.d2_wavelength_m),
            d1_wavelength: T::lit(rec.d1_wavelength_m),
            linewidth: T::lit(two_pi * rec.linewidth_hz),
            qubit_splitting: T::lit(two_pi * rec.qubit_splitting_hz),
            raman_calibration: rec.raman_calibration.map(|c| RamanCalibration {
                wavelength: T::lit(c.wavelength_m),
                power: T::lit(c.power_w),
                waist: T::lit(c.waist_m),
                rate: T::lit(c.rate_per_s),
            }),
        };
        species.validate()?;
        Ok(species)
    }

    /// ⁸⁵Rb from the bundled table.
    pub fn rb85() -> Self {
        SpeciesTable::builtin().species("Rb85").expect("bundled Rb85")
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("mass", self.mass),
            ("d2_wavelength", self.d2_wavelength),
            ("d1_wavelength", self.d1_wavelength),
            ("linewidth", self.linewidth),
            ("qubit_splitting", self.qubit_splitting),
        ];
        for (name, v) in positive {
            if !(v > T::zero()) || !v.is_finite() {
                return Err(Error::Species(format!("{}: {name} must be > 0, got {v}", self.symbol)));
            }
        }
        if !(self.d1_wavelength > self.d2_wavelength) {
            return Err(Error::Species(format!(
                "{}: D1 wavelength must exceed D2 wavelength",
                self.symbol
            )));
        }
        Ok(())
    }

    /// D2 transition angular frequency [rad/s].
    pub fn d2_frequency(&self) -> T {
        T::lit(2.0) * T::PI() * T::lit(SPEED_OF_LIGHT) / self.d2_wavelength
    }

    /// D1 transition angular frequency [rad/s].
    pub fn d1_frequency(&self) -> T {
        T::lit(2.0) * T::PI() * T::lit(SPEED_OF_LIGHT) / self.d1_wavelength
    }

    /// Line-strength weighted transition frequency used as ω₀ of the
    /// effective two-level atom.
    pub fn effective_transition_frequency(&self) -> T {
        (T::lit(2.0) * self.d2_frequency() + self.d1_frequency()) / T::lit(3.0)
    }
}
