//! Paraxial Gaussian beams and the focal-spot lattice of a microlens array.
//!
//! Every focal spot is an ideal Gaussian focus with 1/e² intensity radius
//! `w0`. The array is globally illuminated; the illumination envelope sets
//! the relative power per spot.

use crate::error::{domain, Result};
use crate::scalar::Real;

/// Ideal focused Gaussian beam.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianBeam<T> {
    /// Vacuum wavelength [m].
    pub wavelength: T,
    /// Total beam power [W].
    pub power: T,
    /// 1/e² intensity radius at the focus [m].
    pub waist: T,
    /// Focus position [m].
    pub focus: [T; 3],
}

impl<T: Real> GaussianBeam<T> {
    pub fn new(wavelength: T, power: T, waist: T) -> Result<Self> {
        if !(wavelength > T::zero()) || !wavelength.is_finite() {
            return domain(format!("beam wavelength must be > 0, got {wavelength}"));
        }
        if !(power >= T::zero()) || !power.is_finite() {
            return domain(format!("beam power must be >= 0, got {power}"));
        }
        if !(waist > T::zero()) || !waist.is_finite() {
            return domain(format!("beam waist must be > 0, got {waist}"));
        }
        Ok(Self {
            wavelength,
            power,
            waist,
            focus: [T::zero(); 3],
        })
    }

    pub fn with_focus(mut self, focus: [T; 3]) -> Self {
        self.focus = focus;
        self
    }

    pub fn rayleigh_range(&self) -> T {
        T::PI() * self.waist * self.waist / self.wavelength
    }

    /// Beam radius w(z) at axial distance `z` from the focus.
    pub fn radius_at(&self, z: T) -> T {
        let q = z / self.rayleigh_range();
        self.waist * (T::one() + q * q).sqrt()
    }

    /// On-axis intensity at the focus, `2P / (π w0²)`.
    pub fn peak_intensity(&self) -> T {
        T::lit(2.0) * self.power / (T::PI() * self.waist * self.waist)
    }

    /// Intensity at radial distance `r` and axial distance `z` relative to the focus.
    pub fn intensity_at(&self, r: T, z: T) -> T {
        let w = self.radius_at(z);
        let ratio = self.waist / w;
        self.peak_intensity() * ratio * ratio * (-T::lit(2.0) * r * r / (w * w)).exp()
    }

    /// Intensity at an absolute position.
    pub fn intensity_at_point(&self, p: [T; 3]) -> T {
        let dx = p[0] - self.focus[0];
        let dy = p[1] - self.focus[1];
        let dz = p[2] - self.focus[2];
        self.intensity_at((dx * dx + dy * dy).sqrt(), dz)
    }
}

/// Idealized lower bound on the focal waist for a given numerical aperture,
/// `w0 = λ / (π NA)`.
pub fn diffraction_limited_waist<T: Real>(wavelength: T, na: T) -> Result<T> {
    if !(wavelength > T::zero()) {
        return domain(format!("wavelength must be > 0, got {wavelength}"));
    }
    if !(na > T::zero() && na < T::one()) {
        return domain(format!("numerical aperture must lie in (0, 1), got {na}"));
    }
    Ok(wavelength / (T::PI() * na))
}

/// Rayleigh range `π w0² / λ`.
pub fn rayleigh_range<T: Real>(waist: T, wavelength: T) -> Result<T> {
    if !(waist > T::zero()) {
        return domain(format!("waist must be > 0, got {waist}"));
    }
    if !(wavelength > T::zero()) {
        return domain(format!("wavelength must be > 0, got {wavelength}"));
    }
    Ok(T::PI() * waist * waist / wavelength)
}

/// Geometry of a 2D microlens array and its re-imaging optics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LensArraySpec<T> {
    /// Lens-to-lens distance in the array plane [m].
    pub pitch: T,
    pub rows: usize,
    pub cols: usize,
    pub numerical_aperture: T,
    /// Demagnification of the re-imaging system (image pitch = pitch / demagnification).
    pub demagnification: T,
}

impl<T: Real> LensArraySpec<T> {
    pub fn new(pitch: T, rows: usize, cols: usize, numerical_aperture: T, demagnification: T) -> Result<Self> {
        let spec = Self {
            pitch,
            rows,
            cols,
            numerical_aperture,
            demagnification,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.pitch > T::zero()) {
            return domain(format!("lens pitch must be > 0, got {}", self.pitch));
        }
        if !(self.numerical_aperture > T::zero() && self.numerical_aperture < T::one()) {
            return domain(format!(
                "numerical aperture must lie in (0, 1), got {}",
                self.numerical_aperture
            ));
        }
        if !(self.demagnification > T::zero()) {
            return domain(format!("demagnification must be > 0, got {}", self.demagnification));
        }
        Ok(())
    }

    pub fn site_count(&self) -> usize {
        self.rows * self.cols
    }

    /// Site spacing in the trap plane.
    pub fn image_pitch(&self) -> T {
        self.pitch / self.demagnification
    }
}

/// Transverse profile of the beam that globally illuminates the lens array.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Illumination<T> {
    /// Uniform illumination: every lens receives the same power.
    Flat,
    /// Gaussian envelope centred on the array, 1/e² radius given in the lens plane [m].
    Gaussian { waist: T },
}

impl<T: Real> Illumination<T> {
    /// Relative intensity at lens-plane distance `r` from the envelope centre.
    pub fn relative_intensity(&self, r: T) -> T {
        match *self {
            Illumination::Flat => T::one(),
            Illumination::Gaussian { waist } => (-T::lit(2.0) * r * r / (waist * waist)).exp(),
        }
    }
}

/// One focal spot of the register.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Site<T> {
    /// (row, column)
    pub index: (usize, usize),
    /// Centre in the trap plane [m]; x runs along columns, y along rows.
    pub center: [T; 3],
    /// Power relative to the central site.
    pub power_fraction: T,
}

/// Rectangular lattice of focal spots, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SiteGrid<T> {
    pub sites: Vec<Site<T>>,
    pub pitch: T,
    pub rows: usize,
    pub cols: usize,
}

impl<T: Real> SiteGrid<T> {
    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    /// Row-major position of `(row, col)`.
    pub fn flat_index(&self, row: usize, col: usize) -> Option<usize> {
        (row < self.rows && col < self.cols).then_some(row * self.cols + col)
    }

    pub fn site(&self, row: usize, col: usize) -> Option<&Site<T>> {
        self.flat_index(row, col).map(|k| &self.sites[k])
    }

    pub fn power_fractions(&self) -> Vec<T> {
        self.sites.iter().map(|s| s.power_fraction).collect()
    }
}

/// Builds the trap-plane lattice produced by re-imaging the lens array.
///
/// Spot centres sit at `pitch / demagnification` spacing, centred on the
/// optical axis. Power fractions sample the illumination envelope at each
/// lens centre (lens-plane coordinates) and are normalized to the brightest
/// lens, which is the central one when the array has a central lens.
pub fn spot_grid<T: Real>(spec: &LensArraySpec<T>, illumination: Illumination<T>) -> Result<SiteGrid<T>> {
    spec.validate()?;
    if let Illumination::Gaussian { waist } = illumination {
        if !(waist > T::zero()) {
            return domain(format!("illumination waist must be > 0, got {waist}"));
        }
    }
    let half = T::lit(0.5);
    let row_mid = T::from_usize(spec.rows).unwrap_or_else(T::zero) * half - half;
    let col_mid = T::from_usize(spec.cols).unwrap_or_else(T::zero) * half - half;
    let image_pitch = spec.image_pitch();

    let mut sites = Vec::with_capacity(spec.site_count());
    for i in 0..spec.rows {
        for j in 0..spec.cols {
            let u = T::from_usize(j).unwrap() - col_mid;
            let v = T::from_usize(i).unwrap() - row_mid;
            let lens_r = (u * u + v * v).sqrt() * spec.pitch;
            sites.push(Site {
                index: (i, j),
                center: [u * image_pitch, v * image_pitch, T::zero()],
                power_fraction: illumination.relative_intensity(lens_r),
            });
        }
    }
    let max = sites
        .iter()
        .map(|s| s.power_fraction)
        .fold(T::zero(), |a, b| a.max(b));
    if max > T::zero() {
        for s in &mut sites {
            s.power_fraction = s.power_fraction / max;
        }
    }
    Ok(SiteGrid {
        sites,
        pitch: image_pitch,
        rows: spec.rows,
        cols: spec.cols,
    })
}
