//! Batch scenario runner: TOML scenario in, CSV data files and a JSON
//! summary out.
//!
//! Parsing collects every semantic problem with the path of the offending
//! field instead of stopping at the first one.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::beam_optics::{spot_grid, Illumination, LensArraySpec, SiteGrid};
use crate::error::{Error, Result};
use crate::loading_detection::{
    classify_counts, load_occupancies, simulate_fluorescence, DetectionModel, Histogram, LoadingMode,
    BLOCKADE_SINGLE_PROBABILITY, OPTIMIZED_SINGLE_PROBABILITY,
};
use crate::qubit_dynamics::{
    apply_register_pulse, fit_contrast_decay, fit_fringe_phase, ramsey_sequence, register_ramsey, spin_echo_sequence,
    wrap_phase, Bloch, DephasingModel, HomogeneousDephasing, Pulse,
};
use crate::register_geometry::{addressed_sites, build_mask_for_shape, PatternKind, RegisterState};
use crate::rng::derive_seed;
use crate::rydberg_feasibility::{gate_fidelity_budget, geometry_compatible, solve_technical_error, BlockadeConfig};
use crate::shift_register::{
    run_cycles, schedule_with, shift_with_echo, validate_schedule, Profile, ShiftSchedule, TransportNoise, TransportTrap,
    DEFAULT_TRANSFER_DURATION,
};
use crate::species::{AtomSpecies, SpeciesTable};
use crate::trap_physics::{characterize_trap_with, LightShiftModel, TrapLaserSpec};

/// Experiment kinds understood by the runner.
pub const KINDS: [&str; 6] = [
    "trap_characterization",
    "loading_detection",
    "coherence",
    "addressing",
    "shift_register",
    "rydberg_feasibility",
];

const STOCHASTIC: [&str; 4] = ["loading_detection", "coherence", "addressing", "shift_register"];

/// Scenarios bundled with the binary, by name.
pub const SHIPPED: [(&str, &str); 8] = [
    ("paper_815nm", include_str!("../scenarios/paper_815nm.toml")),
    ("paper_1064nm", include_str!("../scenarios/paper_1064nm.toml")),
    ("loading_histogram", include_str!("../scenarios/loading_histogram.toml")),
    ("coherence_echo", include_str!("../scenarios/coherence_echo.toml")),
    ("shift_echo_default", include_str!("../scenarios/shift_echo_default.toml")),
    ("rydberg_feasibility", include_str!("../scenarios/rydberg_feasibility.toml")),
    ("checkerboard_addressing", include_str!("../scenarios/checkerboard_addressing.toml")),
    ("shift_transport", include_str!("../scenarios/shift_transport.toml")),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpeciesSection {
    #[serde(default = "default_symbol")]
    pub symbol: String,
    /// Alternative species table; the built-in one is used otherwise.
    pub file: Option<PathBuf>,
}

fn default_symbol() -> String {
    "Rb85".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LaserSection {
    pub wavelength: f64,
    pub power_per_site: f64,
    pub waist: f64,
    /// `counter_rotating` (default) or `rotating_wave`.
    pub light_shift: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub pitch: f64,
    pub rows: usize,
    pub cols: usize,
    #[serde(default = "default_na")]
    pub numerical_aperture: f64,
    #[serde(default = "one")]
    pub demagnification: f64,
    /// Gaussian illumination envelope in the lens plane; flat when absent.
    pub illumination_waist: Option<f64>,
}

fn default_na() -> f64 {
    0.29
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoadingSection {
    pub name: Option<String>,
    /// `poisson`, `collisional_blockade` or `optimized`.
    pub mode: String,
    pub mean: Option<f64>,
    pub p_single: Option<f64>,
    pub sites: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectionSection {
    pub background: Option<f64>,
    pub per_atom_signal: Option<f64>,
    pub noise_sigma: Option<f64>,
    pub bin_width: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DephasingSection {
    pub t2_star: f64,
    pub t2_prime: f64,
    pub ensemble_size: usize,
    /// `analytic` (default) or `stochastic`.
    pub homogeneous: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveSection {
    /// [rad/s]
    pub rabi_frequency: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RamseySection {
    pub times: Option<Vec<f64>>,
    pub start: Option<f64>,
    pub stop: Option<f64>,
    pub points: Option<usize>,
    /// [rad/s]
    #[serde(default)]
    pub analysis_detuning: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EchoSection {
    pub times: Option<Vec<f64>>,
    pub start: Option<f64>,
    pub stop: Option<f64>,
    pub points: Option<usize>,
    /// Extra dephasing rate while shifting [1/s].
    #[serde(default)]
    pub transport_dephasing: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSection {
    /// Defaults to the register pitch.
    pub pitch: Option<f64>,
    pub move_duration: f64,
    pub transfer_duration: Option<f64>,
    #[serde(default)]
    pub cycles: usize,
    pub eta: Option<f64>,
    /// `minimum_jerk` (default) or `cubic`.
    pub profile: Option<String>,
    #[serde(default)]
    pub matched_depth: bool,
    #[serde(default)]
    pub loss_per_cycle: f64,
    #[serde(default)]
    pub dephasing_rate: f64,
    /// Without [[loading]], one atom in each of the first `fill_columns` columns (all by default).
    pub fill_columns: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometrySection {
    pub name: String,
    pub blockade_radius: f64,
    pub pitch: f64,
    pub waist: f64,
    pub resolution_factor: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BudgetSection {
    pub intrinsic_error: f64,
    pub technical_error: Option<f64>,
    /// Solve for the technical error that yields this total fidelity.
    pub total_fidelity: Option<f64>,
}

/// Acceptance band for one summary metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expectation {
    pub metric: String,
    pub value: Option<f64>,
    pub rel_tol: Option<f64>,
    pub abs_tol: Option<f64>,
    pub min: Option<f64>,
    pub max: Option<f64>,
}

impl Expectation {
    fn describe(&self) -> String {
        let mut parts = Vec::new();
        if let Some(v) = self.value {
            match (self.rel_tol, self.abs_tol) {
                (Some(r), _) => parts.push(format!("{v} ± {}%", r * 100.0)),
                (None, Some(a)) => parts.push(format!("{v} ± {a}")),
                (None, None) => parts.push(format!("== {v}")),
            }
        }
        if let Some(m) = self.min {
            parts.push(format!(">= {m}"));
        }
        if let Some(m) = self.max {
            parts.push(format!("<= {m}"));
        }
        parts.join(", ")
    }

    fn holds(&self, x: f64) -> bool {
        let mut ok = x.is_finite() || self.value.is_some_and(|v| v == x);
        if let Some(v) = self.value {
            ok &= match (self.rel_tol, self.abs_tol) {
                (Some(r), _) => ((x - v) / v).abs() <= r,
                (None, Some(a)) => (x - v).abs() <= a,
                (None, None) => x == v,
            };
        }
        if let Some(m) = self.min {
            ok &= x >= m;
        }
        if let Some(m) = self.max {
            ok &= x <= m;
        }
        ok
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub kind: String,
    pub name: Option<String>,
    pub description: Option<String>,
    /// Mandatory for the Monte-Carlo kinds.
    pub seed: Option<u64>,
    /// Output directory; the CLI `--out` flag takes precedence.
    pub output: Option<PathBuf>,
    pub species: Option<SpeciesSection>,
    pub laser: Option<LaserSection>,
    pub grid: Option<GridSection>,
    pub mask: Option<PatternKind>,
    #[serde(default)]
    pub loading: Vec<LoadingSection>,
    pub detection: Option<DetectionSection>,
    pub dephasing: Option<DephasingSection>,
    pub drive: Option<DriveSection>,
    pub ramsey: Option<RamseySection>,
    pub echo: Option<EchoSection>,
    pub schedule: Option<ScheduleSection>,
    #[serde(default)]
    pub geometry: Vec<GeometrySection>,
    pub budget: Option<BudgetSection>,
    #[serde(default, skip_serializing)]
    pub expect: Vec<Expectation>,
}

/// Error accumulator keyed by field path.
#[derive(Default)]
struct Problems(Vec<String>);

impl Problems {
    fn push(&mut self, path: &str, msg: impl std::fmt::Display) {
        self.0.push(format!("{path}: {msg}"));
    }

    fn positive(&mut self, path: &str, v: f64) {
        if !(v > 0.0 && v.is_finite()) {
            self.push(path, format!("must be > 0, got {v}"));
        }
    }

    fn positive_or_inf(&mut self, path: &str, v: f64) {
        if !(v > 0.0) {
            self.push(path, format!("must be > 0 (inf allowed), got {v}"));
        }
    }

    fn unit(&mut self, path: &str, v: f64) {
        if !(0.0..=1.0).contains(&v) {
            self.push(path, format!("must lie in [0, 1], got {v}"));
        }
    }

    fn require<T>(&mut self, path: &str, v: &Option<T>, kind: &str) {
        if v.is_none() {
            self.push(path, format!("section required for kind '{kind}'"));
        }
    }

    fn finish(self) -> Result<()> {
        if self.0.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(self.0))
        }
    }
}

fn time_grid(
    path: &str,
    times: &Option<Vec<f64>>,
    start: Option<f64>,
    stop: Option<f64>,
    points: Option<usize>,
    p: &mut Problems,
) -> Vec<f64> {
    let grid = match (times, start, stop, points) {
        (Some(t), None, None, None) => t.clone(),
        (None, Some(a), Some(b), Some(n)) => {
            if n < 2 {
                p.push(&format!("{path}.points"), format!("must be >= 2, got {n}"));
                return Vec::new();
            }
            (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()
        }
        _ => {
            p.push(path, "give either `times` or all of `start`, `stop`, `points`");
            return Vec::new();
        }
    };
    if grid.len() < 3 {
        p.push(path, format!("need at least 3 time points, got {}", grid.len()));
    }
    if let Some(t) = grid.iter().find(|t| !(**t >= 0.0 && t.is_finite())) {
        p.push(path, format!("times must be finite and >= 0, got {t}"));
    }
    grid
}

fn light_shift(name: &Option<String>, p: &mut Problems) -> LightShiftModel {
    match name.as_deref() {
        None | Some("counter_rotating") => LightShiftModel::CounterRotating,
        Some("rotating_wave") => LightShiftModel::RotatingWave,
        Some(other) => {
            p.push(
                "laser.light_shift",
                format!("unknown model '{other}', expected counter_rotating or rotating_wave"),
            );
            LightShiftModel::CounterRotating
        }
    }
}

fn homogeneous(name: &Option<String>, p: &mut Problems) -> HomogeneousDephasing {
    match name.as_deref() {
        None | Some("analytic") => HomogeneousDephasing::Analytic,
        Some("stochastic") => HomogeneousDephasing::Stochastic,
        Some(other) => {
            p.push(
                "dephasing.homogeneous",
                format!("unknown mode '{other}', expected analytic or stochastic"),
            );
            HomogeneousDephasing::Analytic
        }
    }
}

fn profile(name: &Option<String>, p: &mut Problems) -> Profile {
    match name.as_deref() {
        None | Some("minimum_jerk") => Profile::MinimumJerk,
        Some("cubic") => Profile::Cubic,
        Some(other) => {
            p.push(
                "schedule.profile",
                format!("unknown profile '{other}', expected minimum_jerk or cubic"),
            );
            Profile::MinimumJerk
        }
    }
}

fn loading_mode(k: usize, l: &LoadingSection, p: &mut Problems) -> LoadingMode {
    let path = format!("loading[{k}]");
    let mode = match l.mode.as_str() {
        "poisson" => match l.mean {
            Some(mean) => LoadingMode::poisson(mean),
            None => {
                p.push(&format!("{path}.mean"), "required for mode 'poisson'");
                return LoadingMode::poisson(1.0);
            }
        },
        "collisional_blockade" => LoadingMode::CollisionalBlockade {
            p_single: l.p_single.unwrap_or(BLOCKADE_SINGLE_PROBABILITY),
        },
        "optimized" => LoadingMode::Optimized {
            p_single: l.p_single.unwrap_or(OPTIMIZED_SINGLE_PROBABILITY),
        },
        other => {
            p.push(
                &format!("{path}.mode"),
                format!("unknown mode '{other}', expected poisson, collisional_blockade or optimized"),
            );
            return LoadingMode::poisson(1.0);
        }
    };
    if let Err(e) = mode.validate() {
        p.push(&path, e);
    }
    if l.sites == Some(0) {
        p.push(&format!("{path}.sites"), "must be >= 1");
    }
    mode
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Self> {
        let s: Scenario = toml::from_str(text).map_err(|e| Error::Config(vec![e.to_string().trim_end().to_string()]))?;
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let mut s = Self::parse(&text)?;
        if s.name.is_none() {
            s.name = path.file_stem().map(|n| n.to_string_lossy().into_owned());
        }
        Ok(s)
    }

    /// A bundled scenario by name.
    pub fn shipped(name: &str) -> Result<Self> {
        let text = SHIPPED
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, t)| *t)
            .ok_or_else(|| {
                let names: Vec<_> = SHIPPED.iter().map(|(n, _)| *n).collect();
                Error::Config(vec![format!("no shipped scenario '{name}'; available: {}", names.join(", "))])
            })?;
        let mut s = Self::parse(text)?;
        s.name.get_or_insert_with(|| name.to_string());
        Ok(s)
    }

    pub fn name(&self) -> &str {
        self.name.as_deref().unwrap_or(&self.kind)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    /// Checks the whole scenario and reports every problem at once.
    pub fn validate(&self) -> Result<()> {
        let mut p = Problems::default();
        let kind = self.kind.as_str();
        if !KINDS.contains(&kind) {
            p.push("kind", format!("unknown experiment kind '{kind}'; allowed: {}", KINDS.join(", ")));
            return p.finish();
        }
        if STOCHASTIC.contains(&kind) && self.seed.is_none() {
            p.push("seed", format!("required for Monte-Carlo kind '{kind}'"));
        }
        self.check_sections(&mut p);
        match kind {
            "trap_characterization" => p.require("laser", &self.laser, kind),
            "loading_detection" => {
                if self.loading.is_empty() {
                    p.push("loading", "at least one [[loading]] entry required for kind 'loading_detection'");
                }
            }
            "coherence" => {
                p.require("dephasing", &self.dephasing, kind);
                if self.ramsey.is_none() && self.echo.is_none() {
                    p.push("ramsey", "kind 'coherence' needs a [ramsey] or [echo] section");
                }
            }
            "addressing" => {
                p.require("grid", &self.grid, kind);
                p.require("mask", &self.mask, kind);
                p.require("dephasing", &self.dephasing, kind);
                p.require("ramsey", &self.ramsey, kind);
                if let Some(r) = &self.ramsey {
                    if !(r.analysis_detuning != 0.0 && r.analysis_detuning.is_finite()) {
                        p.push("ramsey.analysis_detuning", "must be non-zero to resolve the fringe phase");
                    }
                }
            }
            "shift_register" => {
                p.require("grid", &self.grid, kind);
                p.require("schedule", &self.schedule, kind);
                if self.echo.is_some() && self.dephasing.is_none() {
                    p.push("dephasing", "required when [echo] is given for kind 'shift_register'");
                }
            }
            "rydberg_feasibility" => {
                if self.geometry.is_empty() && self.budget.is_none() {
                    p.push("geometry", "kind 'rydberg_feasibility' needs [[geometry]] entries or a [budget]");
                }
            }
            _ => unreachable!(),
        }
        p.finish()
    }

    fn check_sections(&self, p: &mut Problems) {
        if let Some(s) = &self.species {
            let table = match &s.file {
                Some(f) => SpeciesTable::load(f),
                None => Ok(SpeciesTable::builtin()),
            };
            match table.and_then(|t| t.species::<f64>(&s.symbol)) {
                Ok(_) => {}
                Err(e) => p.push("species", e),
            }
        }
        if let Some(l) = &self.laser {
            p.positive("laser.wavelength", l.wavelength);
            if !(l.power_per_site >= 0.0 && l.power_per_site.is_finite()) {
                p.push("laser.power_per_site", format!("must be >= 0, got {}", l.power_per_site));
            }
            p.positive("laser.waist", l.waist);
            light_shift(&l.light_shift, p);
        }
        if let Some(g) = &self.grid {
            p.positive("grid.pitch", g.pitch);
            p.positive("grid.numerical_aperture", g.numerical_aperture);
            p.positive("grid.demagnification", g.demagnification);
            if g.rows == 0 {
                p.push("grid.rows", "must be >= 1");
            }
            if g.cols == 0 {
                p.push("grid.cols", "must be >= 1");
            }
            if let Some(w) = g.illumination_waist {
                p.positive("grid.illumination_waist", w);
            }
            if let (Some(m), true) = (&self.mask, g.rows > 0 && g.cols > 0) {
                if let Err(e) = build_mask_for_shape(m, g.rows, g.cols) {
                    p.push("mask", e);
                }
            }
        }
        let mut names = Vec::new();
        for (k, l) in self.loading.iter().enumerate() {
            loading_mode(k, l, p);
            let name = l.name.clone().unwrap_or_else(|| l.mode.clone());
            if names.contains(&name) {
                p.push(&format!("loading[{k}].name"), format!("duplicate name '{name}'"));
            }
            names.push(name);
        }
        if let Some(d) = &self.detection {
            if let Some(v) = d.per_atom_signal {
                p.positive("detection.per_atom_signal", v);
            }
            if let Some(v) = d.noise_sigma {
                if !(v >= 0.0 && v.is_finite()) {
                    p.push("detection.noise_sigma", format!("must be >= 0, got {v}"));
                }
            }
            if let Some(v) = d.bin_width {
                p.positive("detection.bin_width", v);
            }
        }
        if let Some(d) = &self.dephasing {
            p.positive_or_inf("dephasing.t2_star", d.t2_star);
            p.positive_or_inf("dephasing.t2_prime", d.t2_prime);
            if d.ensemble_size == 0 {
                p.push("dephasing.ensemble_size", "must be >= 1");
            }
            homogeneous(&d.homogeneous, p);
        }
        if let Some(d) = &self.drive {
            p.positive("drive.rabi_frequency", d.rabi_frequency);
        }
        if let Some(r) = &self.ramsey {
            time_grid("ramsey", &r.times, r.start, r.stop, r.points, p);
        }
        if let Some(e) = &self.echo {
            time_grid("echo", &e.times, e.start, e.stop, e.points, p);
            if !(e.transport_dephasing >= 0.0 && e.transport_dephasing.is_finite()) {
                p.push("echo.transport_dephasing", format!("must be >= 0, got {}", e.transport_dephasing));
            }
        }
        if let Some(s) = &self.schedule {
            if let Some(v) = s.pitch {
                p.positive("schedule.pitch", v);
            }
            p.positive("schedule.move_duration", s.move_duration);
            if let Some(v) = s.transfer_duration {
                p.positive("schedule.transfer_duration", v);
            }
            if let Some(v) = s.eta {
                p.positive("schedule.eta", v);
            }
            profile(&s.profile, p);
            p.unit("schedule.loss_per_cycle", s.loss_per_cycle);
            if !(s.dephasing_rate >= 0.0 && s.dephasing_rate.is_finite()) {
                p.push("schedule.dephasing_rate", format!("must be >= 0, got {}", s.dephasing_rate));
            }
        }
        for (k, g) in self.geometry.iter().enumerate() {
            p.positive(&format!("geometry[{k}].blockade_radius"), g.blockade_radius);
            p.positive(&format!("geometry[{k}].pitch"), g.pitch);
            p.positive(&format!("geometry[{k}].waist"), g.waist);
            if let Some(f) = g.resolution_factor {
                p.positive(&format!("geometry[{k}].resolution_factor"), f);
            }
        }
        if let Some(b) = &self.budget {
            p.unit("budget.intrinsic_error", b.intrinsic_error);
            if let Some(t) = b.technical_error {
                p.unit("budget.technical_error", t);
            }
            if let Some(t) = b.total_fidelity {
                p.unit("budget.total_fidelity", t);
            }
        }
        for (k, e) in self.expect.iter().enumerate() {
            let path = format!("expect[{k}]");
            if e.value.is_none() && e.min.is_none() && e.max.is_none() {
                p.push(&path, "needs `value`, `min` or `max`");
            }
            if e.value.is_none() && (e.rel_tol.is_some() || e.abs_tol.is_some()) {
                p.push(&path, "tolerance given without `value`");
            }
            if let (Some(0.0), Some(_)) = (e.value, e.rel_tol) {
                p.push(&format!("{path}.rel_tol"), "relative tolerance needs a non-zero value");
            }
        }
    }

    fn species(&self) -> Result<AtomSpecies<f64>> {
        match &self.species {
            None => Ok(AtomSpecies::rb85()),
            Some(s) => match &s.file {
                Some(f) => SpeciesTable::load(f)?.species(&s.symbol),
                None => SpeciesTable::builtin().species(&s.symbol),
            },
        }
    }

    fn grid(&self) -> Result<Option<SiteGrid<f64>>> {
        let Some(g) = &self.grid else { return Ok(None) };
        let spec = LensArraySpec::new(g.pitch, g.rows, g.cols, g.numerical_aperture, g.demagnification)?;
        let ill = match g.illumination_waist {
            Some(waist) => Illumination::Gaussian { waist },
            None => Illumination::Flat,
        };
        spot_grid(&spec, ill).map(Some)
    }

    fn dephasing(&self) -> Result<DephasingModel<f64>> {
        let d = self.dephasing.as_ref().ok_or_else(|| Error::Config(vec!["dephasing: missing".into()]))?;
        let mut p = Problems::default();
        let mode = homogeneous(&d.homogeneous, &mut p);
        p.finish()?;
        Ok(DephasingModel::new(d.t2_star, d.t2_prime, d.ensemble_size)?.with_homogeneous(mode))
    }

    fn rabi(&self) -> f64 {
        self.drive.as_ref().map_or(DEFAULT_RABI_FREQUENCY, |d| d.rabi_frequency)
    }

    fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }
}

/// Drive strength when no `[drive]` section is given: 2π × 100 kHz.
pub const DEFAULT_RABI_FREQUENCY: f64 = 2.0 * PI * 1e5;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub metric: String,
    pub expected: String,
    pub value: Option<f64>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub name: String,
    pub kind: String,
    pub seed: Option<u64>,
    pub scenario: serde_json::Value,
    pub metrics: BTreeMap<String, f64>,
    pub checks: Vec<CheckResult>,
    pub passed: bool,
    pub files: Vec<String>,
}

/// Collects metrics and writes data files below one directory.
struct Outputs {
    dir: PathBuf,
    metrics: BTreeMap<String, f64>,
    files: Vec<String>,
}

impl Outputs {
    fn metric(&mut self, name: impl Into<String>, v: f64) {
        self.metrics.insert(name.into(), v);
    }

    fn flag(&mut self, name: impl Into<String>, v: bool) {
        self.metric(name, if v { 1.0 } else { 0.0 });
    }

    fn create(&mut self, name: &str) -> Result<BufWriter<File>> {
        self.files.push(name.to_string());
        Ok(BufWriter::new(File::create(self.dir.join(name))?))
    }

    fn table(&mut self, name: &str, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
        let f = self.create(name)?;
        let mut w = csv::Writer::from_writer(f);
        let io = |e: csv::Error| Error::Io(format!("{name}: {e}"));
        w.write_record(header).map_err(io)?;
        for r in rows {
            w.write_record(&r).map_err(io)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn num(x: f64) -> String {
    format!("{x:.9e}")
}

/// Runs a validated scenario, writing data files and `summary.json` into `out`.
pub fn run(scenario: &Scenario, out: &Path) -> Result<RunSummary> {
    scenario.validate()?;
    fs::create_dir_all(out).map_err(|e| Error::Io(format!("{}: {e}", out.display())))?;
    let mut o = Outputs {
        dir: out.to_path_buf(),
        metrics: BTreeMap::new(),
        files: Vec::new(),
    };
    match scenario.kind.as_str() {
        "trap_characterization" => run_trap(scenario, &mut o)?,
        "loading_detection" => run_loading(scenario, &mut o)?,
        "coherence" => run_coherence(scenario, &mut o)?,
        "addressing" => run_addressing(scenario, &mut o)?,
        "shift_register" => run_shift(scenario, &mut o)?,
        "rydberg_feasibility" => run_rydberg(scenario, &mut o)?,
        _ => unreachable!("validated kind"),
    }
    let checks: Vec<CheckResult> = scenario
        .expect
        .iter()
        .map(|e| {
            let value = o.metrics.get(&e.metric).copied();
            CheckResult {
                metric: e.metric.clone(),
                expected: e.describe(),
                value,
                passed: value.is_some_and(|v| e.holds(v)),
            }
        })
        .collect();
    o.files.push("summary.json".into());
    let summary = RunSummary {
        name: scenario.name().to_string(),
        kind: scenario.kind.clone(),
        seed: scenario.seed,
        scenario: serde_json::to_value(scenario).map_err(|e| Error::Io(e.to_string()))?,
        passed: checks.iter().all(|c| c.passed),
        metrics: o.metrics,
        checks,
        files: o.files,
    };
    let text = serde_json::to_string_pretty(&summary).map_err(|e| Error::Io(e.to_string()))?;
    fs::write(out.join("summary.json"), text + "\n")?;
    Ok(summary)
}

fn run_trap(s: &Scenario, o: &mut Outputs) -> Result<()> {
    let l = s.laser.as_ref().expect("validated");
    let species = s.species()?;
    let mut p = Problems::default();
    let model = light_shift(&l.light_shift, &mut p);
    p.finish()?;
    let laser = TrapLaserSpec::new(l.wavelength, l.power_per_site, l.waist)?;
    let t = characterize_trap_with(&laser, &species, model)?;
    let rows: Vec<(&str, f64, &str)> = vec![
        ("depth", t.depth, "J"),
        ("depth_temperature", t.depth_kelvin(), "K"),
        ("potential", t.potential, "J"),
        ("peak_intensity", t.peak_intensity, "W/m^2"),
        ("effective_detuning", t.effective_detuning, "rad/s"),
        ("total_scattering_rate", t.total_scattering_rate, "1/s"),
        ("state_changing_rate", t.state_changing_rate, "1/s"),
        ("coherence_limit", t.coherence_limit, "s"),
        ("rayleigh_range", t.rayleigh_range, "m"),
        ("radial_frequency", t.radial_frequency, "rad/s"),
        ("axial_frequency", t.axial_frequency, "rad/s"),
    ];
    o.table(
        "trap.csv",
        &["quantity", "value", "unit"],
        rows.iter().map(|(q, v, u)| vec![q.to_string(), num(*v), u.to_string()]),
    )?;
    o.metric("depth_mk", t.depth_kelvin() * 1e3);
    o.metric("depth_j", t.depth);
    o.metric("scattering_rate_per_s", t.total_scattering_rate);
    o.metric("state_changing_rate_per_s", t.state_changing_rate);
    o.metric("coherence_limit_s", t.coherence_limit);
    o.metric("rayleigh_range_um", t.rayleigh_range * 1e6);
    o.metric("radial_frequency_khz", t.radial_frequency / (2.0 * PI) / 1e3);
    o.metric("axial_frequency_khz", t.axial_frequency / (2.0 * PI) / 1e3);
    o.metric("effective_detuning_linewidths", t.effective_detuning / species.linewidth);

    if let Some(grid) = s.grid()? {
        let mut rows = Vec::with_capacity(grid.len());
        let mut min_depth = f64::INFINITY;
        for site in &grid.sites {
            let d = characterize_trap_with(&laser.with_power(l.power_per_site * site.power_fraction), &species, model)?;
            min_depth = min_depth.min(d.depth_kelvin() * 1e3);
            rows.push(vec![
                site.index.0.to_string(),
                site.index.1.to_string(),
                num(site.center[0]),
                num(site.center[1]),
                num(site.power_fraction),
                num(d.depth_kelvin() * 1e3),
            ]);
        }
        o.table("sites.csv", &["site_i", "site_j", "x", "y", "power_fraction", "depth_mk"], rows)?;
        o.metric("min_site_depth_mk", min_depth);
    }
    Ok(())
}

fn detection_model(s: &Scenario) -> (DetectionModel, f64) {
    let d = DetectionModel::default();
    match &s.detection {
        None => (d, 50.0),
        Some(sec) => (
            DetectionModel {
                background: sec.background.unwrap_or(d.background),
                per_atom_signal: sec.per_atom_signal.unwrap_or(d.per_atom_signal),
                noise_sigma: sec.noise_sigma.unwrap_or(d.noise_sigma),
            },
            sec.bin_width.unwrap_or(50.0),
        ),
    }
}

fn run_loading(s: &Scenario, o: &mut Outputs) -> Result<()> {
    let (model, bin_width) = detection_model(s);
    let seed = s.seed();
    let grid = s.grid()?;
    o.metric("peak_separation_sigma", model.peak_separation_sigmas());
    for (k, l) in s.loading.iter().enumerate() {
        let mut p = Problems::default();
        let mode = loading_mode(k, l, &mut p);
        p.finish()?;
        let name = l.name.clone().unwrap_or_else(|| l.mode.clone());
        let n = l.sites.or(grid.as_ref().map(|g| g.len())).unwrap_or(100_000);
        let truth = load_occupancies(n, mode, derive_seed(seed, 2 * k as u64))?;
        let signals = simulate_fluorescence(&truth, &model, derive_seed(seed, 2 * k as u64 + 1))?;
        let record = classify_counts(&signals, &model)?;
        let cols = grid.as_ref().filter(|g| g.len() == n).map_or(n, |g| g.cols);
        let sites: Vec<(usize, usize)> = (0..n).map(|i| (i / cols, i % cols)).collect();
        let f = o.create(&format!("detection_{name}.csv"))?;
        record.write_csv(&sites, f)?;
        let hist = Histogram::new(&signals, bin_width)?;
        let f = o.create(&format!("histogram_{name}.csv"))?;
        hist.write_csv(f)?;

        let frac = |pred: &dyn Fn(u32) -> bool| truth.iter().filter(|&&c| pred(c)).count() as f64 / n as f64;
        o.metric(format!("{name}.p0"), frac(&|c| c == 0));
        o.metric(format!("{name}.p1"), frac(&|c| c == 1));
        o.metric(format!("{name}.p2plus"), frac(&|c| c >= 2));
        o.metric(format!("{name}.mean_occupancy"), truth.iter().map(|&c| c as f64).sum::<f64>() / n as f64);
        o.metric(format!("{name}.error_rate"), record.error_rate(&truth));
        o.metric(format!("{name}.oracle_error_rate"), model.expected_error_rate(&mode));
        o.metric(format!("{name}.anomalous"), record.anomalous.len() as f64);
        let min_count = ((n as f64) * 0.005).ceil() as u64;
        o.metric(format!("{name}.histogram_peaks"), hist.peaks(min_count.max(1)).len() as f64);
    }
    Ok(())
}

fn write_curve(o: &mut Outputs, name: &str, r: &crate::qubit_dynamics::SequenceResult) -> Result<()> {
    o.table(
        name,
        &["time_s", "population0", "contrast"],
        r.times
            .iter()
            .zip(&r.population0)
            .zip(&r.contrast)
            .map(|((t, p), c)| vec![num(*t), num(*p), num(*c)]),
    )
}

fn run_coherence(s: &Scenario, o: &mut Outputs) -> Result<()> {
    let model = s.dephasing()?;
    let rabi = s.rabi();
    let seed = s.seed();
    let mut p = Problems::default();
    if let Some(r) = &s.ramsey {
        let times = time_grid("ramsey", &r.times, r.start, r.stop, r.points, &mut p);
        let res = ramsey_sequence(&model, rabi, &times, r.analysis_detuning, Bloch::ground(), derive_seed(seed, 1))?;
        write_curve(o, "ramsey.csv", &res)?;
        let fit = fit_contrast_decay(&res.samples())?;
        o.metric("ramsey.decay_time_ms", fit.t2_prime * 1e3);
        o.metric("ramsey.initial_contrast", fit.initial_contrast);
    }
    if let Some(e) = &s.echo {
        let times = time_grid("echo", &e.times, e.start, e.stop, e.points, &mut p);
        let res = spin_echo_sequence(&model, rabi, &times, derive_seed(seed, 2))?;
        write_curve(o, "echo.csv", &res)?;
        let last = res.contrast.last().copied().unwrap_or(f64::NAN);
        o.metric("echo.final_contrast", last);
        o.metric("echo.min_contrast", res.contrast.iter().copied().fold(f64::INFINITY, f64::min));
        if model.t2_prime.is_finite() {
            let fit = fit_contrast_decay(&res.samples())?;
            o.metric("echo.t2_prime_ms", fit.t2_prime * 1e3);
            o.metric("echo.initial_contrast", fit.initial_contrast);
            o.metric("echo.t2_prime_rel_error", (fit.t2_prime - model.t2_prime).abs() / model.t2_prime);
        }
    }
    p.finish()
}

fn filled_register(grid: &SiteGrid<f64>) -> Result<RegisterState> {
    let mut state = RegisterState::from_grid(grid, &vec![0.0; grid.len()])?;
    state.set_occupancies(&vec![1; grid.len()])?;
    Ok(state)
}

fn run_addressing(s: &Scenario, o: &mut Outputs) -> Result<()> {
    let grid = s.grid()?.expect("validated");
    let mask = build_mask_for_shape(s.mask.as_ref().expect("validated"), grid.rows, grid.cols)?;
    let model = s.dephasing()?;
    let rabi = s.rabi();
    let r = s.ramsey.as_ref().expect("validated");
    let mut p = Problems::default();
    let times = time_grid("ramsey", &r.times, r.start, r.stop, r.points, &mut p);
    p.finish()?;

    let mut state = filled_register(&grid)?;
    apply_register_pulse(&mut state, &Pulse::pi(rabi)?, Some(&mask))?;
    let res = register_ramsey(&state, &model, rabi, &times, r.analysis_detuning, s.seed())?;
    let lit = addressed_sites(&mask, 0.5);
    let dark = grid.sites.iter().map(|x| x.index).filter(|i| !lit.contains(i)).collect();
    let a = res.class_mean(&lit);
    let b = res.class_mean(&dark);
    let fa = fit_fringe_phase(&times, &a, r.analysis_detuning)?;
    let fb = fit_fringe_phase(&times, &b, r.analysis_detuning)?;
    let diff = wrap_phase(fa.phase - fb.phase).abs();

    o.files.push("mask.txt".into());
    fs::write(o.dir.join("mask.txt"), mask.to_text())?;
    o.table(
        "fringes.csv",
        &["time_s", "addressed_population0", "unaddressed_population0"],
        times.iter().zip(&a).zip(&b).map(|((t, x), y)| vec![num(*t), num(*x), num(*y)]),
    )?;
    o.metric("lit_sites", lit.len() as f64);
    o.metric("mask_contrast", mask.contrast());
    o.metric("addressed_fringe_amplitude", fa.amplitude);
    o.metric("unaddressed_fringe_amplitude", fb.amplitude);
    o.metric("phase_difference_rad", diff);
    o.metric("phase_error_rad", (PI - diff).abs());
    Ok(())
}

fn build_schedule(s: &Scenario, pitch: f64) -> Result<(ShiftSchedule, TransportNoise, usize)> {
    let sec = s.schedule.as_ref().expect("validated");
    let mut trap = TransportTrap::default();
    if let Some(l) = &s.laser {
        let species = s.species()?;
        let mut p = Problems::default();
        let model = light_shift(&l.light_shift, &mut p);
        p.finish()?;
        let t = characterize_trap_with(&TrapLaserSpec::new(l.wavelength, l.power_per_site, l.waist)?, &species, model)?;
        trap = TransportTrap {
            depth: t.depth,
            waist: l.waist,
            mass: species.mass,
        };
    }
    let mut p = Problems::default();
    let prof = profile(&sec.profile, &mut p);
    p.finish()?;
    let sched = schedule_with(
        sec.pitch.unwrap_or(pitch),
        sec.move_duration,
        sec.transfer_duration.unwrap_or(DEFAULT_TRANSFER_DURATION),
        trap,
    )?
    .with_profile(prof)
    .with_eta(sec.eta.unwrap_or(crate::shift_register::DEFAULT_ETA))
    .with_matched_depth(sec.matched_depth);
    let noise = TransportNoise {
        loss_per_cycle: sec.loss_per_cycle,
        dephasing_rate: sec.dephasing_rate,
    };
    Ok((sched, noise, sec.cycles))
}

fn run_shift(s: &Scenario, o: &mut Outputs) -> Result<()> {
    let grid = s.grid()?.expect("validated");
    let (sched, noise, cycles) = build_schedule(s, grid.pitch)?;
    let violations = validate_schedule(&sched);
    o.metric("schedule_violations", violations.len() as f64);
    if !violations.is_empty() {
        return Err(Error::InvalidSchedule(violations));
    }
    let seed = s.seed();
    let mut state = RegisterState::from_grid(&grid, &vec![sched.trap.depth; grid.len()])?;
    match s.loading.first() {
        Some(l) => {
            let mut p = Problems::default();
            let mode = loading_mode(0, l, &mut p);
            p.finish()?;
            state.set_occupancies(&load_occupancies(grid.len(), mode, derive_seed(seed, 1))?)?;
        }
        None => {
            let fill = s.schedule.as_ref().and_then(|x| x.fill_columns).unwrap_or(grid.cols);
            let occ: Vec<u32> = grid.sites.iter().map(|x| u32::from(x.index.1 < fill)).collect();
            state.set_occupancies(&occ)?;
        }
    }
    let (end, res) = run_cycles(&state, &sched, cycles, &noise, derive_seed(seed, 2))?;
    let f = o.create("transport_log.csv")?;
    res.write_log_csv(f)?;

    let shifts: Vec<f64> = res.displacements.iter().flatten().map(|d| d / sched.pitch).collect();
    o.metric("cycles", cycles as f64);
    o.metric("atoms_initial", state.total_atoms() as f64);
    o.metric("atoms_final", end.total_atoms() as f64);
    o.metric("lost", res.lost as f64);
    o.metric("dropped", res.dropped as f64);
    o.metric("survivors_tracked", shifts.len() as f64);
    if !shifts.is_empty() {
        o.metric("displacement_min_pitches", shifts.iter().copied().fold(f64::INFINITY, f64::min));
        o.metric("displacement_max_pitches", shifts.iter().copied().fold(f64::NEG_INFINITY, f64::max));
    }
    o.metric("cycle_duration_ms", sched.cycle_duration() * 1e3);
    o.metric("peak_acceleration_m_s2", sched.peak_acceleration());
    o.metric(
        "adiabaticity_ratio",
        sched.trap.mass * sched.peak_acceleration() * sched.trap.waist / (sched.eta * sched.trap.depth),
    );

    if let Some(e) = &s.echo {
        let model = s.dephasing()?;
        let mut p = Problems::default();
        let times = time_grid("echo", &e.times, e.start, e.stop, e.points, &mut p);
        p.finish()?;
        let c = shift_with_echo(&model, &sched, &times, e.transport_dephasing, s.rabi(), derive_seed(seed, 3))?;
        o.table(
            "echo.csv",
            &["time_s", "rest_contrast", "shift_contrast"],
            times
                .iter()
                .zip(&c.rest.contrast)
                .zip(&c.shift.contrast)
                .map(|((t, a), b)| vec![num(*t), num(*a), num(*b)]),
        )?;
        o.metric("echo.t2_rest_ms", c.rest_fit.t2_prime * 1e3);
        o.metric("echo.t2_shift_ms", c.shift_fit.t2_prime * 1e3);
        o.metric("echo.t2_ratio", c.ratio);
    }
    Ok(())
}

fn run_rydberg(s: &Scenario, o: &mut Outputs) -> Result<()> {
    let (ie, te) = s
        .budget
        .as_ref()
        .map_or((0.0, 0.0), |b| (b.intrinsic_error, b.technical_error.unwrap_or(0.0)));
    let mut rows = Vec::new();
    for g in &s.geometry {
        let mut cfg = BlockadeConfig::new(g.blockade_radius, g.pitch, g.waist, ie, te)?;
        if let Some(f) = g.resolution_factor {
            cfg = cfg.with_resolution_factor(f)?;
        }
        let r = geometry_compatible(&cfg)?;
        o.flag(format!("{}.pair_within_blockade", g.name), r.pair_within_blockade);
        o.flag(format!("{}.sites_resolved", g.name), r.sites_resolved);
        o.flag(format!("{}.compatible", g.name), r.compatible());
        rows.push(vec![
            g.name.clone(),
            num(g.blockade_radius),
            num(g.pitch),
            num(g.waist),
            r.pair_within_blockade.to_string(),
            r.sites_resolved.to_string(),
            r.compatible().to_string(),
        ]);
    }
    if !rows.is_empty() {
        o.table(
            "geometry.csv",
            &[
                "name",
                "blockade_radius_m",
                "pitch_m",
                "waist_m",
                "pair_within_blockade",
                "sites_resolved",
                "compatible",
            ],
            rows,
        )?;
    }
    if let Some(b) = &s.budget {
        let technical = match b.total_fidelity {
            Some(total) => solve_technical_error(b.intrinsic_error, total)?,
            None => te,
        };
        let cfg = BlockadeConfig::new(1.0, 1.0, 0.1, b.intrinsic_error, technical)?;
        let f = gate_fidelity_budget(&cfg)?;
        o.metric("intrinsic_fidelity", f.intrinsic_fidelity);
        o.metric("technical_error", technical);
        o.metric("total_fidelity", f.total_fidelity);
        o.table(
            "budget.csv",
            &["intrinsic_error", "technical_error", "intrinsic_fidelity", "total_fidelity"],
            [vec![num(b.intrinsic_error), num(technical), num(f.intrinsic_fidelity), num(f.total_fidelity)]],
        )?;
    }
    Ok(())
}

/// Field schema of one experiment kind.
pub fn describe(kind: &str) -> Result<&'static str> {
    Ok(match kind {
        "trap_characterization" => {
            "trap_characterization: depth, scattering and trap frequencies of one focused trap\n\
             required: [laser] wavelength, power_per_site, waist; light_shift = counter_rotating | rotating_wave\n\
             optional: [species] symbol (Rb85), file; [grid] pitch, rows, cols, numerical_aperture, demagnification, illumination_waist\n\
             outputs: trap.csv, sites.csv (with [grid])\n\
             metrics: depth_mk, depth_j, scattering_rate_per_s, state_changing_rate_per_s, coherence_limit_s,\n\
             \x20        rayleigh_range_um, radial_frequency_khz, axial_frequency_khz, effective_detuning_linewidths, min_site_depth_mk"
        }
        "loading_detection" => {
            "loading_detection: stochastic loading and fluorescence classification\n\
             required: seed; [[loading]] mode = poisson | collisional_blockade | optimized, mean (poisson), p_single, sites, name\n\
             optional: [detection] background, per_atom_signal, noise_sigma, bin_width; [grid]\n\
             outputs: detection_<name>.csv, histogram_<name>.csv\n\
             metrics: peak_separation_sigma, <name>.p0, .p1, .p2plus, .mean_occupancy, .error_rate, .oracle_error_rate,\n\
             \x20        .anomalous, .histogram_peaks"
        }
        "coherence" => {
            "coherence: Ramsey and spin-echo sequences on a dephasing ensemble\n\
             required: seed; [dephasing] t2_star, t2_prime (inf allowed), ensemble_size, homogeneous = analytic | stochastic;\n\
             \x20         [ramsey] and/or [echo] with times = [...] or start, stop, points\n\
             optional: [drive] rabi_frequency; ramsey.analysis_detuning\n\
             outputs: ramsey.csv, echo.csv\n\
             metrics: ramsey.decay_time_ms, ramsey.initial_contrast, echo.t2_prime_ms, echo.initial_contrast,\n\
             \x20        echo.t2_prime_rel_error, echo.final_contrast, echo.min_contrast"
        }
        "addressing" => {
            "addressing: masked pi pulse followed by a global Ramsey sequence\n\
             required: seed; [grid]; [mask] pattern = full | checkerboard | superlattice | blocks | ring;\n\
             \x20         [dephasing]; [ramsey] times and non-zero analysis_detuning\n\
             optional: [drive] rabi_frequency\n\
             outputs: mask.txt, fringes.csv\n\
             metrics: lit_sites, mask_contrast, addressed_fringe_amplitude, unaddressed_fringe_amplitude,\n\
             \x20        phase_difference_rad, phase_error_rad"
        }
        "shift_register" => {
            "shift_register: move/transfer cycles of the two-array register\n\
             required: seed; [grid]; [schedule] move_duration, cycles, pitch, transfer_duration, eta, profile,\n\
             \x20         matched_depth, loss_per_cycle, dephasing_rate, fill_columns\n\
             optional: [laser] + [species] for the trap used in the adiabaticity bound; [[loading]] (first entry);\n\
             \x20         [echo] times, transport_dephasing with [dephasing] for the echo comparison\n\
             outputs: transport_log.csv, echo.csv\n\
             metrics: cycles, atoms_initial, atoms_final, lost, dropped, survivors_tracked, displacement_min_pitches,\n\
             \x20        displacement_max_pitches, cycle_duration_ms, peak_acceleration_m_s2, adiabaticity_ratio,\n\
             \x20        schedule_violations, echo.t2_rest_ms, echo.t2_shift_ms, echo.t2_ratio"
        }
        "rydberg_feasibility" => {
            "rydberg_feasibility: blockade geometry checks and gate error budget\n\
             required: [[geometry]] name, blockade_radius, pitch, waist (resolution_factor) and/or\n\
             \x20         [budget] intrinsic_error with technical_error or total_fidelity\n\
             outputs: geometry.csv, budget.csv\n\
             metrics: <name>.pair_within_blockade, <name>.sites_resolved, <name>.compatible,\n\
             \x20        intrinsic_fidelity, technical_error, total_fidelity"
        }
        other => {
            return Err(Error::Config(vec![format!(
                "unknown experiment kind '{other}'; allowed: {}",
                KINDS.join(", ")
            )]))
        }
    })
}

/// One line per shipped scenario: name, kind and description.
pub fn list_scenarios() -> Vec<String> {
    SHIPPED
        .iter()
        .map(|(name, text)| match Scenario::parse(text) {
            Ok(s) => format!("{name:<24} {:<22} {}", s.kind, s.description.unwrap_or_default()),
            Err(e) => format!("{name:<24} (invalid: {e})"),
        })
        .collect()
}

/// Writes a short human-readable report of a summary.
pub fn report<W: Write>(summary: &RunSummary, mut w: W) -> std::io::Result<()> {
    writeln!(w, "{} ({})", summary.name, summary.kind)?;
    for (k, v) in &summary.metrics {
        writeln!(w, "  {k:<36} {v:.6e}")?;
    }
    for c in &summary.checks {
        let value = c.value.map_or("missing".to_string(), |v| format!("{v:.6e}"));
        let tag = if c.passed { "PASS" } else { "FAIL" };
        writeln!(w, "  [{tag}] {} = {value} (expected {})", c.metric, c.expected)?;
    }
    Ok(())
}
