//! Stochastic loading of register sites and number-resolved fluorescence
//! detection.
//!
//! Each site integrates `background + n · per_atom_signal` plus Gaussian
//! read noise. Classification picks the nearest level; a signal exactly on a
//! midpoint goes to the lower level.

use std::io::Write;

use rand::Rng;
use rand_distr::{Binomial, Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal as NormalDist};

use crate::error::{Error, Result};
use crate::register_geometry::RegisterState;
use crate::rng;

/// Single-atom probability in the collisional-blockade regime.
pub const BLOCKADE_SINGLE_PROBABILITY: f64 = 0.5;
/// Single-atom probability of the optimized light-assisted loading process.
pub const OPTIMIZED_SINGLE_PROBABILITY: f64 = 0.83;

/// Per-site atom-number law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum LoadingMode {
    /// Statistical loading, Poissonian with the given mean.
    Poisson { mean: f64 },
    /// Pairs are lost in light-assisted collisions; sites hold 0 or 1 atom.
    CollisionalBlockade {
        #[serde(default = "blockade_p")]
        p_single: f64,
    },
    /// Enhanced light-assisted loading; sites hold 0 or 1 atom.
    Optimized {
        #[serde(default = "optimized_p")]
        p_single: f64,
    },
}

fn blockade_p() -> f64 {
    BLOCKADE_SINGLE_PROBABILITY
}

fn optimized_p() -> f64 {
    OPTIMIZED_SINGLE_PROBABILITY
}

impl LoadingMode {
    pub fn poisson(mean: f64) -> Self {
        LoadingMode::Poisson { mean }
    }

    pub fn collisional_blockade() -> Self {
        LoadingMode::CollisionalBlockade {
            p_single: BLOCKADE_SINGLE_PROBABILITY,
        }
    }

    pub fn optimized() -> Self {
        LoadingMode::Optimized {
            p_single: OPTIMIZED_SINGLE_PROBABILITY,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            LoadingMode::Poisson { mean } if !(mean > 0.0 && mean.is_finite()) => {
                Err(Error::Domain(format!("Poisson mean must be > 0, got {mean}")))
            }
            LoadingMode::CollisionalBlockade { p_single } | LoadingMode::Optimized { p_single }
                if !(0.0..=1.0).contains(&p_single) =>
            {
                Err(Error::Domain(format!("single-atom probability must lie in [0, 1], got {p_single}")))
            }
            _ => Ok(()),
        }
    }

    /// Probability of `n` atoms at a site.
    pub fn probability(&self, n: u32) -> f64 {
        match *self {
            LoadingMode::Poisson { mean } => {
                let ln_fact: f64 = (1..=n).map(|k| (k as f64).ln()).sum();
                (n as f64 * mean.ln() - mean - ln_fact).exp()
            }
            LoadingMode::CollisionalBlockade { p_single } | LoadingMode::Optimized { p_single } => match n {
                0 => 1.0 - p_single,
                1 => p_single,
                _ => 0.0,
            },
        }
    }

    fn draw<R: Rng>(&self, rng: &mut R) -> u32 {
        match *self {
            LoadingMode::Poisson { mean } => {
                let d = Poisson::new(mean).expect("validated mean");
                d.sample(rng) as u32
            }
            LoadingMode::CollisionalBlockade { p_single } | LoadingMode::Optimized { p_single } => {
                u32::from(rng.random::<f64>() < p_single)
            }
        }
    }
}

/// Draws i.i.d. occupancies for `n_sites` sites; site `k` uses stream `k`.
pub fn load_occupancies(n_sites: usize, mode: LoadingMode, seed: u64) -> Result<Vec<u32>> {
    mode.validate()?;
    Ok((0..n_sites)
        .map(|k| mode.draw(&mut rng::stream(seed, k as u64)))
        .collect())
}

/// Loads every site of a register; filled sites start in |0⟩.
pub fn load_register(state: &mut RegisterState, mode: LoadingMode, seed: u64) -> Result<()> {
    let counts = load_occupancies(state.len(), mode, seed)?;
    state.set_occupancies(&counts)
}

/// Fluorescence signal model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionModel {
    /// Signal of an empty site [a.u.].
    pub background: f64,
    /// Signal added by each atom [a.u.].
    pub per_atom_signal: f64,
    /// Standard deviation of the read noise [a.u.].
    pub noise_sigma: f64,
}

impl Default for DetectionModel {
    fn default() -> Self {
        Self {
            background: 300.0,
            per_atom_signal: 400.0,
            noise_sigma: 60.0,
        }
    }
}

impl DetectionModel {
    pub fn noiseless() -> Self {
        Self {
            noise_sigma: 0.0,
            ..Self::default()
        }
    }

    pub fn with_sigma(self, noise_sigma: f64) -> Self {
        Self { noise_sigma, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.per_atom_signal > 0.0) {
            return Err(Error::Domain(format!(
                "per-atom signal must be > 0, got {}",
                self.per_atom_signal
            )));
        }
        if !(self.noise_sigma >= 0.0) {
            return Err(Error::Domain(format!("noise sigma must be >= 0, got {}", self.noise_sigma)));
        }
        if !self.background.is_finite() {
            return Err(Error::Domain("background must be finite".into()));
        }
        Ok(())
    }

    /// Noise-free signal of `n` atoms.
    pub fn level(&self, n: u32) -> f64 {
        self.background + n as f64 * self.per_atom_signal
    }

    /// Midpoint between levels `n` and `n + 1`.
    pub fn threshold(&self, n: u32) -> f64 {
        self.background + (n as f64 + 0.5) * self.per_atom_signal
    }

    /// Nearest level, ties to the lower one, never below zero atoms.
    pub fn classify(&self, signal: f64) -> u32 {
        let x = (signal - self.background) / self.per_atom_signal - 0.5;
        if x <= 0.0 {
            0
        } else {
            x.ceil() as u32
        }
    }

    /// Separation between adjacent peaks in units of the noise width.
    pub fn peak_separation_sigmas(&self) -> f64 {
        self.per_atom_signal / self.noise_sigma
    }

    /// Closed-form misclassification probability for a site with `n` atoms:
    /// Gaussian tails beyond the midpoint thresholds (one side for `n = 0`).
    pub fn error_probability(&self, n: u32) -> f64 {
        if self.noise_sigma == 0.0 {
            return 0.0;
        }
        let tail = NormalDist::standard().cdf(-0.5 * self.per_atom_signal / self.noise_sigma);
        if n == 0 {
            tail
        } else {
            2.0 * tail
        }
    }

    /// Expected misclassification rate for an occupancy law.
    pub fn expected_error_rate(&self, mode: &LoadingMode) -> f64 {
        let mut total = 0.0;
        let mut mass = 0.0;
        let mut n = 0;
        while mass < 1.0 - 1e-15 && n < 1000 {
            let p = mode.probability(n);
            total += p * self.error_probability(n);
            mass += p;
            n += 1;
        }
        total
    }
}

/// Gaussian read noise on top of the level of each site; site `k` uses stream `k`.
pub fn simulate_fluorescence(occupancy: &[u32], model: &DetectionModel, seed: u64) -> Result<Vec<f64>> {
    model.validate()?;
    if model.noise_sigma == 0.0 {
        return Ok(occupancy.iter().map(|&n| model.level(n)).collect());
    }
    let noise = Normal::new(0.0, model.noise_sigma).map_err(|e| Error::Domain(e.to_string()))?;
    Ok(occupancy
        .iter()
        .enumerate()
        .map(|(k, &n)| model.level(n) + noise.sample(&mut rng::stream(seed, k as u64)))
        .collect())
}

/// Classified readout of a set of sites.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionRecord {
    pub signals: Vec<f64>,
    pub counts: Vec<u32>,
    /// Midpoint thresholds up to the highest classified level (strictly increasing).
    pub thresholds: Vec<f64>,
    /// Sites whose signal lies more than 5σ below the background.
    pub anomalous: Vec<usize>,
}

impl DetectionRecord {
    /// Fraction of sites whose classified count differs from `truth`.
    pub fn error_rate(&self, truth: &[u32]) -> f64 {
        let wrong = self.counts.iter().zip(truth).filter(|(a, b)| a != b).count();
        wrong as f64 / self.counts.len().max(1) as f64
    }

    /// CSV with columns `site_i,site_j,signal,classified_n`.
    pub fn write_csv<W: Write>(&self, sites: &[(usize, usize)], out: W) -> Result<()> {
        if sites.len() != self.counts.len() {
            return Err(Error::ShapeMismatch {
                expected: self.counts.len(),
                actual: sites.len(),
            });
        }
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Domain(format!("csv: {e}"));
        w.write_record(["site_i", "site_j", "signal", "classified_n"]).map_err(io)?;
        for ((&(i, j), s), n) in sites.iter().zip(&self.signals).zip(&self.counts) {
            w.write_record([i.to_string(), j.to_string(), format!("{s:.6}"), n.to_string()])
                .map_err(io)?;
        }
        w.flush().map_err(|e| Error::Domain(format!("csv: {e}")))?;
        Ok(())
    }
}

pub fn classify_counts(signals: &[f64], model: &DetectionModel) -> Result<DetectionRecord> {
    model.validate()?;
    let counts: Vec<u32> = signals.iter().map(|&s| model.classify(s)).collect();
    let max = counts.iter().copied().max().unwrap_or(0);
    let thresholds = (0..=max).map(|n| model.threshold(n)).collect();
    let floor = model.background - 5.0 * model.noise_sigma;
    let anomalous = signals
        .iter()
        .enumerate()
        .filter(|(_, &s)| s < floor)
        .map(|(k, _)| k)
        .collect();
    Ok(DetectionRecord {
        signals: signals.to_vec(),
        counts,
        thresholds,
        anomalous,
    })
}

/// Fixed-width histogram; bin `k` covers `[k w, (k+1) w)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub bin_width: f64,
    /// (bin centre, count), contiguous from the lowest to the highest occupied bin.
    pub bins: Vec<(f64, u64)>,
}

impl Histogram {
    pub fn new(values: &[f64], bin_width: f64) -> Result<Self> {
        if !(bin_width > 0.0) {
            return Err(Error::Domain(format!("bin width must be > 0, got {bin_width}")));
        }
        let keys: Vec<i64> = values.iter().map(|v| (v / bin_width).floor() as i64).collect();
        let (Some(&lo), Some(&hi)) = (keys.iter().min(), keys.iter().max()) else {
            return Ok(Self {
                bin_width,
                bins: Vec::new(),
            });
        };
        let mut counts = vec![0u64; (hi - lo + 1) as usize];
        for k in keys {
            counts[(k - lo) as usize] += 1;
        }
        let bins = counts
            .into_iter()
            .enumerate()
            .map(|(i, c)| (((lo + i as i64) as f64 + 0.5) * bin_width, c))
            .collect();
        Ok(Self { bin_width, bins })
    }

    /// Bin centres of local maxima holding at least `min_count` entries.
    pub fn peaks(&self, min_count: u64) -> Vec<f64> {
        let n = self.bins.len();
        (0..n)
            .filter(|&i| {
                let c = self.bins[i].1;
                let left = if i > 0 { self.bins[i - 1].1 } else { 0 };
                let right = if i + 1 < n { self.bins[i + 1].1 } else { 0 };
                c >= min_count && c >= left && c > right
            })
            .map(|i| self.bins[i].0)
            .collect()
    }

    /// CSV with columns `bin_center,count`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Domain(format!("csv: {e}"));
        w.write_record(["bin_center", "count"]).map_err(io)?;
        for (c, n) in &self.bins {
            w.write_record([format!("{c:.6}"), n.to_string()]).map_err(io)?;
        }
        w.flush().map_err(|e| Error::Domain(format!("csv: {e}")))?;
        Ok(())
    }
}

/// Qubit level whose atoms are imaged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QubitLevel {
    Zero,
    One,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReadoutSite {
    pub index: (usize, usize),
    pub atoms: u32,
    /// Atoms projected into the selected level.
    pub selected: u32,
    pub signal: f64,
}

impl ReadoutSite {
    pub fn fraction(&self) -> f64 {
        if self.atoms == 0 {
            0.0
        } else {
            self.selected as f64 / self.atoms as f64
        }
    }
}

/// State-selective readout: each atom is projected onto |0⟩/|1⟩ with
/// `P(|1⟩) = (1 + w)/2`, then only atoms in `level` fluoresce.
pub fn readout_population(
    state: &RegisterState,
    level: QubitLevel,
    detection: &DetectionModel,
    seed: u64,
) -> Result<Vec<ReadoutSite>> {
    detection.validate()?;
    state.validate()?;
    let noise = Normal::new(0.0, detection.noise_sigma).map_err(|e| Error::Domain(e.to_string()))?;
    state
        .sites
        .iter()
        .enumerate()
        .map(|(k, site)| {
            let mut rng = rng::stream(seed, k as u64);
            let selected = match site.qubit {
                Some(q) if site.occupancy > 0 => {
                    let p1 = q.population1().clamp(0.0, 1.0);
                    let p = match level {
                        QubitLevel::One => p1,
                        QubitLevel::Zero => 1.0 - p1,
                    };
                    Binomial::new(site.occupancy as u64, p)
                        .map_err(|e| Error::Domain(e.to_string()))?
                        .sample(&mut rng) as u32
                }
                _ => 0,
            };
            let signal = detection.level(selected) + noise.sample(&mut rng);
            Ok(ReadoutSite {
                index: site.index,
                atoms: site.occupancy,
                selected,
                signal,
            })
        })
        .collect()
}
