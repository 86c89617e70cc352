//! Coherent single-qubit control and dephasing.
//!
//! States are Bloch vectors `(u, v, w)` in the frame rotating with the
//! drive. `w = −1` is |0⟩ and `w = +1` is |1⟩, so `P(|1⟩) = (1 + w)/2`.
//! A field with Rabi frequency Ω, phase φ and detuning δ rotates the state
//! about `(Ω cos φ, Ω sin φ, δ)` at the rate `√(Ω² + δ²)`, following
//! `dv/dt = Ω⃗ × v`; free precession is the `Ω = 0` case.
//!
//! Dephasing has two parts:
//!
//! * **Inhomogeneous** (reversible): every ensemble member keeps a static
//!   detuning drawn from a centred Gaussian with standard deviation
//!   `√2 / T₂*`. The ensemble envelope is then `exp(−(t/T₂*)²)`, i.e.
//!   `e⁻¹` at `t = T₂*`. A spin echo cancels it exactly.
//! * **Homogeneous** (irreversible): the Gaussian law
//!   `C(t) = C(0) exp(−t²/T₂′²)` in the total free-evolution time,
//!   applied once per sequence, before the final analysis pulse.

use std::collections::BTreeSet;

use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::register_geometry::{RegisterState, SlmMask};
use crate::rng;
use crate::scalar::Real;

/// Bloch vector of a two-level system.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Bloch<T> {
    pub u: T,
    pub v: T,
    pub w: T,
}

impl<T: Real> Bloch<T> {
    pub fn new(u: T, v: T, w: T) -> Self {
        Self { u, v, w }
    }

    /// |0⟩
    pub fn ground() -> Self {
        Self::new(T::zero(), T::zero(), -T::one())
    }

    /// |1⟩
    pub fn excited() -> Self {
        Self::new(T::zero(), T::zero(), T::one())
    }

    pub fn norm(&self) -> T {
        (self.u * self.u + self.v * self.v + self.w * self.w).sqrt()
    }

    pub fn transverse(&self) -> T {
        (self.u * self.u + self.v * self.v).sqrt()
    }

    pub fn population0(&self) -> T {
        (T::one() - self.w) / T::lit(2.0)
    }

    pub fn population1(&self) -> T {
        (T::one() + self.w) / T::lit(2.0)
    }

    /// Rotation by `angle` about the unit vector `axis` (right-handed).
    pub fn rotate(&self, axis: [T; 3], angle: T) -> Self {
        let [kx, ky, kz] = axis;
        let (s, c) = angle.sin_cos();
        let dot = kx * self.u + ky * self.v + kz * self.w;
        let cross = [
            ky * self.w - kz * self.v,
            kz * self.u - kx * self.w,
            kx * self.v - ky * self.u,
        ];
        let k = T::one() - c;
        Self::new(
            self.u * c + cross[0] * s + kx * dot * k,
            self.v * c + cross[1] * s + ky * dot * k,
            self.w * c + cross[2] * s + kz * dot * k,
        )
    }

    /// Free precession by `angle` about z.
    pub fn precess(&self, angle: T) -> Self {
        let (s, c) = angle.sin_cos();
        Self::new(self.u * c - self.v * s, self.u * s + self.v * c, self.w)
    }

    /// Scales the transverse components; `factor` in [0, 1].
    pub fn damp_transverse(&self, factor: T) -> Self {
        Self::new(self.u * factor, self.v * factor, self.w)
    }
}

/// Which register sites a pulse acts on.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum Target {
    #[default]
    All,
    Sites(BTreeSet<(usize, usize)>),
}

impl Target {
    pub fn contains(&self, index: (usize, usize)) -> bool {
        match self {
            Target::All => true,
            Target::Sites(s) => s.contains(&index),
        }
    }
}

/// Rectangular coupling pulse.
#[derive(Debug, Clone, PartialEq)]
pub struct Pulse<T> {
    /// Ω [rad/s]
    pub rabi_frequency: T,
    /// [s]
    pub duration: T,
    /// [rad]
    pub phase: T,
    /// δ [rad/s]
    pub detuning: T,
    pub target: Target,
}

impl<T: Real> Pulse<T> {
    pub fn new(rabi_frequency: T, duration: T, phase: T, detuning: T) -> Result<Self> {
        if !(rabi_frequency >= T::zero()) || !(duration >= T::zero()) {
            return Err(Error::Domain(format!(
                "pulse needs Ω >= 0 and duration >= 0, got Ω = {rabi_frequency}, t = {duration}"
            )));
        }
        Ok(Self {
            rabi_frequency,
            duration,
            phase,
            detuning,
            target: Target::All,
        })
    }

    /// Resonant pulse of rotation angle `area` (Ω t) at phase 0.
    pub fn with_area(rabi_frequency: T, area: T) -> Result<Self> {
        if !(rabi_frequency > T::zero()) {
            return Err(Error::Domain(format!("pulse area needs Ω > 0, got {rabi_frequency}")));
        }
        Self::new(rabi_frequency, area / rabi_frequency, T::zero(), T::zero())
    }

    pub fn pi(rabi_frequency: T) -> Result<Self> {
        Self::with_area(rabi_frequency, T::PI())
    }

    pub fn half_pi(rabi_frequency: T) -> Result<Self> {
        Self::with_area(rabi_frequency, T::FRAC_PI_2())
    }

    pub fn with_phase(mut self, phase: T) -> Self {
        self.phase = phase;
        self
    }

    pub fn with_detuning(mut self, detuning: T) -> Self {
        self.detuning = detuning;
        self
    }

    pub fn with_rabi_frequency(mut self, rabi_frequency: T) -> Self {
        self.rabi_frequency = rabi_frequency;
        self
    }

    pub fn targeting(mut self, target: Target) -> Self {
        self.target = target;
        self
    }

    /// Generalized Rabi frequency `√(Ω² + δ²)`.
    pub fn effective_rabi(&self) -> T {
        (self.rabi_frequency * self.rabi_frequency + self.detuning * self.detuning).sqrt()
    }
}

/// Applies a pulse to one Bloch vector; the norm is preserved.
pub fn apply_pulse<T: Real>(state: Bloch<T>, pulse: &Pulse<T>) -> Bloch<T> {
    let omega = pulse.effective_rabi();
    if omega == T::zero() || pulse.duration == T::zero() {
        return state;
    }
    let (s, c) = pulse.phase.sin_cos();
    let axis = [
        pulse.rabi_frequency * c / omega,
        pulse.rabi_frequency * s / omega,
        pulse.detuning / omega,
    ];
    state.rotate(axis, omega * pulse.duration)
}

/// How the homogeneous Gaussian law is imposed on ensemble members.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HomogeneousDephasing {
    /// Each member's transverse components are multiplied by `exp(−t²/T₂′²)`.
    #[default]
    Analytic,
    /// Each member picks up a random phase `ξ √2 t / T₂′` with `ξ ~ N(0, 1)`
    /// drawn once; the ensemble average follows the same law.
    Stochastic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DephasingModel<T> {
    /// Inhomogeneous (reversible) time constant [s]; `inf` disables it.
    pub t2_star: T,
    /// Homogeneous Gaussian time constant [s]; `inf` disables it.
    pub t2_prime: T,
    /// Monte-Carlo members per site.
    pub ensemble_size: usize,
    pub homogeneous: HomogeneousDephasing,
}

impl<T: Real> DephasingModel<T> {
    pub fn new(t2_star: T, t2_prime: T, ensemble_size: usize) -> Result<Self> {
        let m = Self {
            t2_star,
            t2_prime,
            ensemble_size,
            homogeneous: HomogeneousDephasing::Analytic,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn with_homogeneous(mut self, mode: HomogeneousDephasing) -> Self {
        self.homogeneous = mode;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t2_star > T::zero()) || !(self.t2_prime > T::zero()) {
            return Err(Error::Domain(format!(
                "dephasing times must be > 0, got T2* = {}, T2' = {}",
                self.t2_star, self.t2_prime
            )));
        }
        if self.ensemble_size == 0 {
            return Err(Error::Domain("ensemble size must be >= 1".into()));
        }
        Ok(())
    }

    /// Standard deviation of the static detuning distribution [rad/s].
    pub fn detuning_spread(&self) -> T {
        T::lit(2.0).sqrt() / self.t2_star
    }

    /// Homogeneous contrast factor after total free evolution `t`.
    pub fn homogeneous_factor(&self, t: T) -> T {
        gaussian_contrast(T::one(), self.t2_prime, t)
    }

    /// Inhomogeneous ensemble envelope after free evolution `t`.
    pub fn inhomogeneous_envelope(&self, t: T) -> T {
        gaussian_contrast(T::one(), self.t2_star, t)
    }
}

/// `c0 exp(−t²/τ²)`.
pub fn gaussian_contrast<T: Real>(c0: T, tau: T, t: T) -> T {
    let x = t / tau;
    c0 * (-x * x).exp()
}

/// One Monte-Carlo atom.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Member {
    pub state: Bloch<f64>,
    /// Static detuning from the inhomogeneous distribution [rad/s].
    pub detuning: f64,
    /// Standard-normal draw for the stochastic homogeneous mode.
    pub noise: f64,
}

/// Atoms sharing a site.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    pub members: Vec<Member>,
}

impl Ensemble {
    /// Draws `model.ensemble_size` members in `initial`, from stream `stream` of `seed`.
    pub fn sample(model: &DephasingModel<f64>, initial: Bloch<f64>, seed: u64, stream: u64) -> Self {
        Self::sample_n(model, model.ensemble_size, initial, seed, stream)
    }

    pub fn sample_n(model: &DephasingModel<f64>, n: usize, initial: Bloch<f64>, seed: u64, stream: u64) -> Self {
        let mut rng = rng::stream(seed, stream);
        let spread = model.detuning_spread();
        let members = (0..n)
            .map(|_| {
                let a: f64 = StandardNormal.sample(&mut rng);
                let b: f64 = StandardNormal.sample(&mut rng);
                Member {
                    state: initial,
                    detuning: if spread.is_finite() { a * spread } else { 0.0 },
                    noise: b,
                }
            })
            .collect();
        Self { members }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn set_state(&mut self, state: Bloch<f64>) {
        for m in &mut self.members {
            m.state = state;
        }
    }

    /// Applies a pulse; each member sees the pulse detuning plus its own.
    pub fn apply_pulse(&mut self, pulse: &Pulse<f64>) {
        for m in &mut self.members {
            let p = Pulse {
                detuning: pulse.detuning + m.detuning,
                target: Target::All,
                ..*pulse
            };
            m.state = apply_pulse(m.state, &p);
        }
    }

    pub fn mean(&self) -> Bloch<f64> {
        let n = self.members.len().max(1) as f64;
        let (u, v, w) = self.members.iter().fold((0.0, 0.0, 0.0), |(u, v, w), m| {
            (u + m.state.u, v + m.state.v, w + m.state.w)
        });
        Bloch::new(u / n, v / n, w / n)
    }

    /// Magnitude of the mean transverse Bloch component.
    pub fn contrast(&self) -> f64 {
        self.mean().transverse()
    }

    pub fn population0(&self) -> f64 {
        self.mean().population0()
    }
}

/// Free precession for `t` seconds: each member rotates about z by
/// `(extra_detuning + own detuning) t`.
pub fn free_evolution(ensemble: &mut Ensemble, t: f64, extra_detuning: f64) {
    if t == 0.0 {
        return;
    }
    for m in &mut ensemble.members {
        m.state = m.state.precess((extra_detuning + m.detuning) * t);
    }
}

/// Imposes the homogeneous Gaussian law for total free-evolution time `t_total`.
pub fn apply_homogeneous_dephasing(ensemble: &mut Ensemble, t_total: f64, model: &DephasingModel<f64>) {
    if !model.t2_prime.is_finite() || t_total == 0.0 {
        return;
    }
    match model.homogeneous {
        HomogeneousDephasing::Analytic => {
            let f = model.homogeneous_factor(t_total);
            for m in &mut ensemble.members {
                m.state = m.state.damp_transverse(f);
            }
        }
        HomogeneousDephasing::Stochastic => {
            let scale = std::f64::consts::SQRT_2 * t_total / model.t2_prime;
            for m in &mut ensemble.members {
                m.state = m.state.precess(m.noise * scale);
            }
        }
    }
}

/// Time trace of a pulse sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceResult {
    /// Free-evolution time of each point [s] (2t_π for echoes).
    pub times: Vec<f64>,
    /// Ensemble population of |0⟩ after the final pulse.
    pub population0: Vec<f64>,
    /// Mean transverse amplitude before the final pulse.
    pub contrast: Vec<f64>,
}

impl SequenceResult {
    pub fn samples(&self) -> Vec<(f64, f64)> {
        self.times.iter().copied().zip(self.contrast.iter().copied()).collect()
    }
}

/// Ramsey sequence π/2 – t – π/2 starting from `initial`, with the drive
/// detuned by `analysis_detuning` so the population oscillates at that rate.
pub fn ramsey_sequence(
    model: &DephasingModel<f64>,
    rabi_frequency: f64,
    times: &[f64],
    analysis_detuning: f64,
    initial: Bloch<f64>,
    seed: u64,
) -> Result<SequenceResult> {
    model.validate()?;
    let base = Ensemble::sample(model, initial, seed, 0);
    ramsey_on(&base, model, rabi_frequency, times, analysis_detuning)
}

fn ramsey_on(
    base: &Ensemble,
    model: &DephasingModel<f64>,
    rabi_frequency: f64,
    times: &[f64],
    analysis_detuning: f64,
) -> Result<SequenceResult> {
    let half = Pulse::half_pi(rabi_frequency)?.with_detuning(analysis_detuning);
    let mut out = SequenceResult {
        times: times.to_vec(),
        population0: Vec::with_capacity(times.len()),
        contrast: Vec::with_capacity(times.len()),
    };
    for &t in times {
        if !(t >= 0.0) {
            return Err(Error::Domain(format!("free evolution time must be >= 0, got {t}")));
        }
        let mut e = base.clone();
        e.apply_pulse(&half);
        free_evolution(&mut e, t, analysis_detuning);
        apply_homogeneous_dephasing(&mut e, t, model);
        out.contrast.push(e.contrast());
        e.apply_pulse(&half);
        out.population0.push(e.population0());
    }
    Ok(out)
}

/// Spin echo π/2 – t_π – π – t_π – π/2 for each total time `2t_π` in `echo_times`.
pub fn spin_echo_sequence(
    model: &DephasingModel<f64>,
    rabi_frequency: f64,
    echo_times: &[f64],
    seed: u64,
) -> Result<SequenceResult> {
    model.validate()?;
    let half = Pulse::half_pi(rabi_frequency)?;
    let pi = Pulse::pi(rabi_frequency)?;
    let base = Ensemble::sample(model, Bloch::ground(), seed, 0);
    let mut out = SequenceResult {
        times: echo_times.to_vec(),
        population0: Vec::with_capacity(echo_times.len()),
        contrast: Vec::with_capacity(echo_times.len()),
    };
    for &total in echo_times {
        if !(total >= 0.0) {
            return Err(Error::Domain(format!("echo time must be >= 0, got {total}")));
        }
        let t_pi = total / 2.0;
        let mut e = base.clone();
        e.apply_pulse(&half);
        free_evolution(&mut e, t_pi, 0.0);
        e.apply_pulse(&pi);
        free_evolution(&mut e, t_pi, 0.0);
        apply_homogeneous_dephasing(&mut e, total, model);
        out.contrast.push(e.contrast());
        e.apply_pulse(&half);
        out.population0.push(e.population0());
    }
    Ok(out)
}

/// Least-squares fit of `C(t) = C(0) exp(−t²/T₂′²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContrastFit<T> {
    pub initial_contrast: T,
    pub t2_prime: T,
    /// Euclidean norm of the residuals.
    pub residual_norm: T,
}

/// Fits the Gaussian contrast law to `(time, contrast)` samples.
///
/// The amplitude is eliminated in closed form; the decay rate `1/T₂′²` is
/// found by golden-section search in log space around a log-linear first
/// guess.
pub fn fit_contrast_decay<T: Real>(samples: &[(T, T)]) -> Result<ContrastFit<T>> {
    if samples.len() < 3 {
        return Err(Error::Fit(format!("need at least 3 samples, got {}", samples.len())));
    }
    if samples.iter().any(|&(t, c)| !t.is_finite() || !c.is_finite()) {
        return Err(Error::Fit("samples must be finite".into()));
    }
    let t0 = samples[0].0;
    if samples.iter().all(|&(t, _)| t == t0) {
        return Err(Error::Fit("all samples share one time".into()));
    }

    // log-linear guess: ln C = ln C0 − k t²
    let pos: Vec<(T, T)> = samples
        .iter()
        .filter(|&&(_, c)| c > T::zero())
        .map(|&(t, c)| (t * t, c.ln()))
        .collect();
    let mut k0 = T::zero();
    if pos.len() >= 2 {
        let n = T::from_usize(pos.len()).unwrap();
        let mx = pos.iter().map(|p| p.0).sum::<T>() / n;
        let my = pos.iter().map(|p| p.1).sum::<T>() / n;
        let sxx = pos.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum::<T>();
        let sxy = pos.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<T>();
        if sxx > T::zero() {
            k0 = -sxy / sxx;
        }
    }
    if !(k0 > T::zero()) || !k0.is_finite() {
        let tmax = samples.iter().map(|s| s.0.abs()).fold(T::zero(), T::max);
        k0 = T::one() / (tmax * tmax);
    }

    let amplitude = |k: T| -> (T, T) {
        let (mut se, mut sye) = (T::zero(), T::zero());
        for &(t, c) in samples {
            let e = (-k * t * t).exp();
            se = se + e * e;
            sye = sye + c * e;
        }
        let a = if se > T::zero() { sye / se } else { T::zero() };
        let r2 = samples
            .iter()
            .map(|&(t, c)| {
                let r = c - a * (-k * t * t).exp();
                r * r
            })
            .sum::<T>();
        (a, r2)
    };

    let span = T::lit(1e3).ln();
    let (mut lo, mut hi) = (k0.ln() - span, k0.ln() + span);
    let g = (T::lit(5.0).sqrt() - T::one()) / T::lit(2.0);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let mut f1 = amplitude(x1.exp()).1;
    let mut f2 = amplitude(x2.exp()).1;
    for _ in 0..200 {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = amplitude(x1.exp()).1;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = amplitude(x2.exp()).1;
        }
        if (hi - lo).abs() < T::epsilon() {
            break;
        }
    }
    let k = ((lo + hi) / T::lit(2.0)).exp();
    let (a, r2) = amplitude(k);
    Ok(ContrastFit {
        initial_contrast: a,
        t2_prime: T::one() / k.sqrt(),
        residual_norm: r2.sqrt(),
    })
}

/// Offset, amplitude and phase of `a + b cos(ω t + φ)` fitted at known ω.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FringeFit<T> {
    pub offset: T,
    pub amplitude: T,
    pub phase: T,
}

pub fn fit_fringe_phase<T: Real>(times: &[T], values: &[T], angular_frequency: T) -> Result<FringeFit<T>> {
    if times.len() != values.len() {
        return Err(Error::ShapeMismatch {
            expected: times.len(),
            actual: values.len(),
        });
    }
    if times.len() < 3 {
        return Err(Error::Fit("fringe fit needs at least 3 points".into()));
    }
    // normal equations for basis [1, cos ωt, sin ωt]
    let mut a = [[T::zero(); 3]; 3];
    let mut b = [T::zero(); 3];
    for (&t, &y) in times.iter().zip(values) {
        let (s, c) = (angular_frequency * t).sin_cos();
        let f = [T::one(), c, s];
        for i in 0..3 {
            b[i] = b[i] + f[i] * y;
            for j in 0..3 {
                a[i][j] = a[i][j] + f[i] * f[j];
            }
        }
    }
    let x = solve3(a, b).ok_or_else(|| Error::Fit("fringe basis is degenerate".into()))?;
    Ok(FringeFit {
        offset: x[0],
        amplitude: (x[1] * x[1] + x[2] * x[2]).sqrt(),
        phase: (-x[2]).atan2(x[1]),
    })
}

fn solve3<T: Real>(mut a: [[T; 3]; 3], mut b: [T; 3]) -> Option<[T; 3]> {
    for col in 0..3 {
        let piv = (col..3).max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())?;
        if a[piv][col] == T::zero() {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..3 {
            let f = a[row][col] / a[col][col];
            for k in col..3 {
                a[row][k] = a[row][k] - f * a[col][k];
            }
            b[row] = b[row] - f * b[col];
        }
    }
    let mut x = [T::zero(); 3];
    for row in (0..3).rev() {
        let mut s = b[row];
        for k in row + 1..3 {
            s = s - a[row][k] * x[k];
        }
        x[row] = s / a[row][row];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

/// Wraps an angle into (−π, π].
pub fn wrap_phase<T: Real>(phi: T) -> T {
    let two_pi = T::lit(2.0) * T::PI();
    let mut x = phi % two_pi;
    if x > T::PI() {
        x = x - two_pi;
    } else if x <= -T::PI() {
        x = x + two_pi;
    }
    x
}

/// Applies a pulse to every targeted, occupied site. With a mask, the
/// site's Rabi frequency is scaled by its lens transmission (two-photon
/// coupling with both beams passing the SLM scales with intensity).
pub fn apply_register_pulse(state: &mut RegisterState, pulse: &Pulse<f64>, mask: Option<&SlmMask>) -> Result<()> {
    if let Some(m) = mask {
        if m.rows() != state.rows || m.cols() != state.cols {
            return Err(Error::ShapeMismatch {
                expected: state.len(),
                actual: m.len(),
            });
        }
    }
    for site in &mut state.sites {
        let Some(q) = site.qubit else { continue };
        if !pulse.target.contains(site.index) {
            continue;
        }
        let scale = mask.and_then(|m| m.get(site.index.0, site.index.1)).unwrap_or(1.0);
        let p = pulse.clone().with_rabi_frequency(pulse.rabi_frequency * scale);
        site.qubit = Some(apply_pulse(q, &p));
    }
    Ok(())
}

/// Per-site Ramsey traces of a register.
#[derive(Debug, Clone, PartialEq)]
pub struct RegisterSequenceResult {
    pub times: Vec<f64>,
    /// Site indices of the columns of `population0`.
    pub sites: Vec<(usize, usize)>,
    /// `population0[k][s]`: population of |0⟩ at time k for site s.
    pub population0: Vec<Vec<f64>>,
}

impl RegisterSequenceResult {
    /// Mean population over a subset of sites, per time.
    pub fn class_mean(&self, class: &BTreeSet<(usize, usize)>) -> Vec<f64> {
        let cols: Vec<usize> = self
            .sites
            .iter()
            .enumerate()
            .filter(|(_, s)| class.contains(s))
            .map(|(k, _)| k)
            .collect();
        self.population0
            .iter()
            .map(|row| cols.iter().map(|&k| row[k]).sum::<f64>() / cols.len().max(1) as f64)
            .collect()
    }
}

/// Global Ramsey experiment on every occupied site of a register, each site
/// an ensemble of `model.ensemble_size` atoms starting from the site's
/// current Bloch vector.
pub fn register_ramsey(
    state: &RegisterState,
    model: &DephasingModel<f64>,
    rabi_frequency: f64,
    times: &[f64],
    analysis_detuning: f64,
    seed: u64,
) -> Result<RegisterSequenceResult> {
    model.validate()?;
    let mut sites = Vec::new();
    let mut columns = Vec::new();
    for (k, site) in state.sites.iter().enumerate() {
        let Some(q) = site.qubit else { continue };
        let base = Ensemble::sample(model, q, seed, k as u64);
        let trace = ramsey_on(&base, model, rabi_frequency, times, analysis_detuning)?;
        sites.push(site.index);
        columns.push(trace.population0);
    }
    let population0 = (0..times.len())
        .map(|t| columns.iter().map(|c| c[t]).collect())
        .collect();
    Ok(RegisterSequenceResult {
        times: times.to_vec(),
        sites,
        population0,
    })
}
