//! Simulation and analysis of neutral-atom qubit registers built from 2D
//! microlens arrays of optical dipole traps.
//!
//! The closed-form physics ([`beam_optics`], [`trap_physics`], the Bloch
//! algebra in [`qubit_dynamics`], [`rydberg_feasibility`]) is generic over
//! [`Real`]; the aliases below fix it to `f64` for everyday use.

pub mod beam_optics;
pub mod constants;
pub mod error;
pub mod loading_detection;
pub mod qubit_dynamics;
pub mod register_geometry;
pub mod rng;
pub mod rydberg_feasibility;
pub mod scalar;
pub mod scenario;
pub mod shift_register;
pub mod species;
pub mod trap_physics;

pub use error::{Error, Result};
pub use scalar::Real;

pub type GaussianBeam = beam_optics::GaussianBeam<f64>;
pub type LensArraySpec = beam_optics::LensArraySpec<f64>;
pub type SiteGrid = beam_optics::SiteGrid<f64>;
pub type Illumination = beam_optics::Illumination<f64>;
pub type AtomSpecies = species::AtomSpecies<f64>;
pub type TrapLaserSpec = trap_physics::TrapLaserSpec<f64>;
pub type TrapCharacteristics = trap_physics::TrapCharacteristics<f64>;
pub type Bloch = qubit_dynamics::Bloch<f64>;
pub type Pulse = qubit_dynamics::Pulse<f64>;
pub type DephasingModel = qubit_dynamics::DephasingModel<f64>;
pub type ContrastFit = qubit_dynamics::ContrastFit<f64>;
pub type BlockadeConfig = rydberg_feasibility::BlockadeConfig<f64>;

pub type GaussianBeam32 = beam_optics::GaussianBeam<f32>;
pub type AtomSpecies32 = species::AtomSpecies<f32>;
pub type TrapLaserSpec32 = trap_physics::TrapLaserSpec<f32>;
pub type Bloch32 = qubit_dynamics::Bloch<f32>;

pub use loading_detection::{DetectionModel, DetectionRecord, LoadingMode};
pub use register_geometry::{PatternKind, RegisterState, SlmMask};
pub use shift_register::{ShiftSchedule, TransportResult};

