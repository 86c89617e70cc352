//! Dipole potential, photon scattering and trap characteristics of a
//! far-red-detuned focal spot.
//!
//! The two-level expressions
//!
//! ```text
//! U      = (3π c² / 2ω₀³) (Γ/Δ) I
//! Γ_SC   = (3π c² / 2ħω₀³) (Γ/Δ)² I
//! ```
//!
//! are exposed as [`dipole_potential`] and [`scattering_rate`]. For an
//! alkali atom the detuning entering them is an effective value built from
//! the D2 and D1 lines with line strengths 2/3 and 1/3 ([`LineCouplings`]).
//! Under [`LightShiftModel::CounterRotating`] each line term also carries the
//! counter-rotating contribution and scattering picks up the `(ω_L/ω₀)³`
//! photon factor; this matters at 1064 nm where the rotating-wave form
//! underestimates the depth by ~14 % and overestimates scattering twofold.

use crate::beam_optics::GaussianBeam;
use crate::constants::{BOLTZMANN, HBAR, SPEED_OF_LIGHT};
use crate::error::{domain, Error, Result};
use crate::scalar::Real;
use crate::species::AtomSpecies;

/// Relative line strength of the D2 line.
pub const D2_LINE_STRENGTH: f64 = 2.0 / 3.0;
/// Relative line strength of the D1 line.
pub const D1_LINE_STRENGTH: f64 = 1.0 / 3.0;

/// How the light shift of each line is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LightShiftModel {
    /// Resonant terms `1/Δᵢ` only.
    RotatingWave,
    /// Resonant plus counter-rotating terms, `1/Δᵢ − 1/(ω_L + ωᵢ)`, and the
    /// `(ω_L/ω₀)³` factor on scattering.
    #[default]
    CounterRotating,
}

/// Laser angular frequency for a vacuum wavelength.
pub fn laser_angular_frequency<T: Real>(wavelength: T) -> T {
    T::lit(2.0) * T::PI() * T::lit(SPEED_OF_LIGHT) / wavelength
}

/// `3π c² / (2 ω₀³)`, ordered so that it stays finite in `f32`.
fn dipole_prefactor<T: Real>(species: &AtomSpecies<T>) -> T {
    let w0 = species.effective_transition_frequency();
    let c_over_w = T::lit(SPEED_OF_LIGHT) / w0;
    T::lit(1.5) * T::PI() * c_over_w * c_over_w / w0
}

/// Harmonic mean of two detunings with D2/D1 line-strength weights,
/// `1/Δ_eff = (2/3)/Δ₂ + (1/3)/Δ₁`.
pub fn weighted_detuning<T: Real>(d2_detuning: T, d1_detuning: T) -> T {
    T::one() / (T::lit(D2_LINE_STRENGTH) / d2_detuning + T::lit(D1_LINE_STRENGTH) / d1_detuning)
}

/// Per-line inverse-detuning terms for one laser wavelength.
///
/// `d2` and `d1` are the line responses in 1/(rad/s); under the rotating-wave
/// model they are exactly `1/Δ₂` and `1/Δ₁`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineCouplings<T> {
    pub d2: T,
    pub d1: T,
    /// `(ω_L/ω₀)³` under the counter-rotating model, 1 otherwise.
    pub photon_factor: T,
}

impl<T: Real> LineCouplings<T> {
    pub fn new(species: &AtomSpecies<T>, laser_wavelength: T, model: LightShiftModel) -> Result<Self> {
        if !(laser_wavelength > T::zero()) {
            return domain(format!("laser wavelength must be > 0, got {laser_wavelength}"));
        }
        if !(laser_wavelength > species.d1_wavelength) {
            return Err(Error::UnsupportedRegime(format!(
                "{} m is not red-detuned from both D lines of {} (D1 at {} m)",
                laser_wavelength, species.symbol, species.d1_wavelength
            )));
        }
        let wl = laser_angular_frequency(laser_wavelength);
        let w2 = species.d2_frequency();
        let w1 = species.d1_frequency();
        let (d2, d1, photon_factor) = match model {
            LightShiftModel::RotatingWave => (T::one() / (wl - w2), T::one() / (wl - w1), T::one()),
            LightShiftModel::CounterRotating => {
                let ratio = wl / species.effective_transition_frequency();
                (
                    T::one() / (wl - w2) - T::one() / (wl + w2),
                    T::one() / (wl - w1) - T::one() / (wl + w1),
                    ratio * ratio * ratio,
                )
            }
        };
        Ok(Self { d2, d1, photon_factor })
    }

    /// The detuning that makes the two-level potential reproduce both lines.
    pub fn effective_detuning(&self) -> T {
        T::one() / (T::lit(D2_LINE_STRENGTH) * self.d2 + T::lit(D1_LINE_STRENGTH) * self.d1)
    }

    /// Incoherent two-line scattering weight, `(ω_L/ω₀)³ Σ sᵢ dᵢ²` [s²].
    pub fn scattering_weight(&self) -> T {
        self.photon_factor
            * (T::lit(D2_LINE_STRENGTH) * self.d2 * self.d2 + T::lit(D1_LINE_STRENGTH) * self.d1 * self.d1)
    }

    /// Raman (state-changing) weight, `(ω_L/ω₀)³ (d₁ − d₂)²` [s²]. The two
    /// lines interfere destructively, so this vanishes for equal responses.
    pub fn raman_weight(&self) -> T {
        let a = self.d1 - self.d2;
        self.photon_factor * a * a
    }
}

/// Effective two-line detuning Δ_eff (rotating-wave form) of a red-detuned laser.
pub fn effective_detuning<T: Real>(species: &AtomSpecies<T>, laser_wavelength: T) -> Result<T> {
    effective_detuning_with(species, laser_wavelength, LightShiftModel::RotatingWave)
}

pub fn effective_detuning_with<T: Real>(
    species: &AtomSpecies<T>,
    laser_wavelength: T,
    model: LightShiftModel,
) -> Result<T> {
    Ok(LineCouplings::new(species, laser_wavelength, model)?.effective_detuning())
}

/// Signed dipole potential [J]; negative (attractive) for Δ < 0.
pub fn dipole_potential<T: Real>(intensity: T, detuning: T, species: &AtomSpecies<T>) -> Result<T> {
    if detuning == T::zero() || !detuning.is_finite() {
        return domain("dipole potential needs a finite nonzero detuning");
    }
    Ok(dipole_prefactor(species) * (species.linewidth / detuning) * intensity)
}

/// Two-level photon scattering rate [1/s].
pub fn scattering_rate<T: Real>(intensity: T, detuning: T, species: &AtomSpecies<T>) -> Result<T> {
    if detuning == T::zero() || !detuning.is_finite() {
        return domain("scattering rate needs a finite nonzero detuning");
    }
    let g = species.linewidth / detuning;
    Ok(dipole_prefactor(species) / T::lit(HBAR) * g * g * intensity)
}

/// Total photon scattering rate summed over both D lines [1/s].
pub fn total_scattering_rate<T: Real>(
    intensity: T,
    species: &AtomSpecies<T>,
    laser_wavelength: T,
    model: LightShiftModel,
) -> Result<T> {
    let lines = LineCouplings::new(species, laser_wavelength, model)?;
    let g = species.linewidth;
    Ok(dipole_prefactor(species) / T::lit(HBAR) * g * g * lines.scattering_weight() * intensity)
}

/// Dimensionless Raman branching constant that puts the species'
/// calibration point at its stated state-changing rate.
pub fn raman_branching<T: Real>(species: &AtomSpecies<T>, model: LightShiftModel) -> Result<T> {
    let cal = species.raman_calibration.ok_or_else(|| {
        Error::Species(format!("{} has no state-changing rate calibration", species.symbol))
    })?;
    let beam = GaussianBeam::new(cal.wavelength, cal.power, cal.waist)?;
    let lines = LineCouplings::new(species, cal.wavelength, model)?;
    let g = species.linewidth;
    let unit = dipole_prefactor(species) / T::lit(HBAR) * g * g * lines.raman_weight() * beam.peak_intensity();
    Ok(cal.rate / unit)
}

/// State-changing (Raman) scattering rate under the default light-shift model.
pub fn state_changing_rate<T: Real>(intensity: T, species: &AtomSpecies<T>, laser_wavelength: T) -> Result<T> {
    state_changing_rate_with(intensity, species, laser_wavelength, LightShiftModel::default())
}

pub fn state_changing_rate_with<T: Real>(
    intensity: T,
    species: &AtomSpecies<T>,
    laser_wavelength: T,
    model: LightShiftModel,
) -> Result<T> {
    let lines = LineCouplings::new(species, laser_wavelength, model)?;
    raman_rate_for(intensity, &lines, species, model)
}

/// State-changing rate for explicit line couplings.
pub fn raman_rate_for<T: Real>(
    intensity: T,
    lines: &LineCouplings<T>,
    species: &AtomSpecies<T>,
    model: LightShiftModel,
) -> Result<T> {
    let branching = raman_branching(species, model)?;
    let g = species.linewidth;
    Ok(branching * dipole_prefactor(species) / T::lit(HBAR) * g * g * lines.raman_weight() * intensity)
}

/// Harmonic trap frequencies (radial, axial) [rad/s] of a Gaussian focus,
/// `ω_r = √(4U₀/(m w₀²))`, `ω_z = √(2U₀/(m z_R²))`.
pub fn trap_frequencies<T: Real>(depth: T, waist: T, rayleigh: T, mass: T) -> Result<(T, T)> {
    for (name, v) in [("depth", depth), ("waist", waist), ("rayleigh range", rayleigh), ("mass", mass)] {
        if !(v > T::zero()) {
            return domain(format!("trap frequencies need {name} > 0, got {v}"));
        }
    }
    let radial = (T::lit(4.0) * depth / (mass * waist * waist)).sqrt();
    let axial = (T::lit(2.0) * depth / (mass * rayleigh * rayleigh)).sqrt();
    Ok((radial, axial))
}

/// Trapping laser for one register site.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrapLaserSpec<T> {
    pub wavelength: T,
    pub power_per_site: T,
    pub waist: T,
}

impl<T: Real> TrapLaserSpec<T> {
    pub fn new(wavelength: T, power_per_site: T, waist: T) -> Result<Self> {
        GaussianBeam::new(wavelength, power_per_site, waist)?;
        Ok(Self {
            wavelength,
            power_per_site,
            waist,
        })
    }

    pub fn beam(&self) -> Result<GaussianBeam<T>> {
        GaussianBeam::new(self.wavelength, self.power_per_site, self.waist)
    }

    pub fn with_power(self, power_per_site: T) -> Self {
        Self { power_per_site, ..self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrapCharacteristics<T> {
    /// Well depth |U₀| [J].
    pub depth: T,
    /// Signed potential at the trap centre [J].
    pub potential: T,
    pub total_scattering_rate: T,
    pub state_changing_rate: T,
    pub radial_frequency: T,
    pub axial_frequency: T,
    /// 1 / state_changing_rate [s]; infinite when nothing scatters.
    pub coherence_limit: T,
    pub rayleigh_range: T,
    pub peak_intensity: T,
    pub effective_detuning: T,
}

impl<T: Real> TrapCharacteristics<T> {
    /// Depth expressed as a temperature [K].
    pub fn depth_kelvin(&self) -> T {
        self.depth / T::lit(BOLTZMANN)
    }
}

pub fn characterize_trap<T: Real>(laser: &TrapLaserSpec<T>, species: &AtomSpecies<T>) -> Result<TrapCharacteristics<T>> {
    characterize_trap_with(laser, species, LightShiftModel::default())
}

pub fn characterize_trap_with<T: Real>(
    laser: &TrapLaserSpec<T>,
    species: &AtomSpecies<T>,
    model: LightShiftModel,
) -> Result<TrapCharacteristics<T>> {
    let beam = laser.beam()?;
    let lines = LineCouplings::new(species, laser.wavelength, model)?;
    let detuning = lines.effective_detuning();
    let peak = beam.intensity_at(T::zero(), T::zero());
    let potential = dipole_potential(peak, detuning, species)?;
    let depth = -potential;
    let total = total_scattering_rate(peak, species, laser.wavelength, model)?;
    let raman = raman_rate_for(peak, &lines, species, model)?;
    let zr = beam.rayleigh_range();
    let (radial, axial) = if depth > T::zero() {
        trap_frequencies(depth, laser.waist, zr, species.mass)?
    } else {
        (T::zero(), T::zero())
    };
    Ok(TrapCharacteristics {
        depth: depth.max(T::zero()),
        potential,
        total_scattering_rate: total,
        state_changing_rate: raman,
        radial_frequency: radial,
        axial_frequency: axial,
        coherence_limit: T::one() / raman,
        rayleigh_range: zr,
        peak_intensity: peak,
        effective_detuning: detuning,
    })
}
