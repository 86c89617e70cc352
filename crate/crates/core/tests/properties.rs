use std::collections::BTreeSet;
use std::f64::consts::PI;

use proptest::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use lensreg::beam_optics::{diffraction_limited_waist, rayleigh_range, spot_grid, GaussianBeam, Illumination, LensArraySpec};
use lensreg::loading_detection::{classify_counts, load_occupancies, simulate_fluorescence, DetectionModel, LoadingMode};
use lensreg::qubit_dynamics::{
    apply_pulse, apply_register_pulse, fit_contrast_decay, gaussian_contrast, ramsey_sequence, register_ramsey,
    spin_echo_sequence, Bloch, DephasingModel, HomogeneousDephasing, Pulse,
};
use lensreg::register_geometry::{
    addressed_sites, apply_mask, build_mask_for_shape, Orientation, PatternKind, RegisterState,
};
use lensreg::rydberg_feasibility::{gate_fidelity_budget, geometry_compatible, BlockadeConfig};
use lensreg::shift_register::{default_schedule, run_cycles, TransportNoise};
use lensreg::trap_physics::{
    characterize_trap, dipole_potential, effective_detuning, scattering_rate, state_changing_rate, total_scattering_rate,
    LightShiftModel, TrapLaserSpec,
};
use lensreg::AtomSpecies;

/// Composite Simpson rule for ∫₀^R I(r) 2πr dr.
fn transverse_power(beam: &GaussianBeam<f64>, z: f64) -> f64 {
    let r_max = 8.0 * beam.radius_at(z);
    let n = 4000;
    let h = r_max / n as f64;
    let f = |r: f64| beam.intensity_at(r, z) * 2.0 * PI * r;
    let mut s = f(0.0) + f(r_max);
    for k in 1..n {
        s += f(k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

fn register(rows: usize, cols: usize) -> RegisterState {
    let spec = LensArraySpec::new(55e-6, rows, cols, 0.29, 1.0).unwrap();
    let g = spot_grid(&spec, Illumination::Flat).unwrap();
    RegisterState::from_grid(&g, &vec![1.0; rows * cols]).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn beam_power_is_conserved(
        wl in 500e-9..1500e-9f64,
        p in 1e-4..1e-1f64,
        w in 1e-6..2e-5f64,
        zf in -5.0..5.0f64,
    ) {
        let beam = GaussianBeam::new(wl, p, w).unwrap();
        let z = zf * beam.rayleigh_range();
        let got = transverse_power(&beam, z);
        prop_assert!(((got - p) / p).abs() <= 1e-6, "{got} vs {p}");
    }

    #[test]
    fn beam_intensity_is_monotone(w in 1e-6..1e-5f64, a in 0.0..3.0f64, b in 0.0..3.0f64) {
        prop_assume!((a - b).abs() > 1e-6);
        let beam = GaussianBeam::new(815e-9, 1e-3, w).unwrap();
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let zr = beam.rayleigh_range();
        prop_assert!(beam.intensity_at(0.0, lo * zr) > beam.intensity_at(0.0, hi * zr));
        prop_assert!(beam.intensity_at(0.0, -lo * zr) > beam.intensity_at(0.0, -hi * zr));
        prop_assert!(beam.intensity_at(lo * w, 0.5 * zr) > beam.intensity_at(hi * w, 0.5 * zr));
    }

    #[test]
    fn rayleigh_range_scales_with_wavelength(wl in 400e-9..1200e-9f64, na in 0.05..0.6f64, c in 0.5..3.0f64) {
        let zr = |l: f64| rayleigh_range(diffraction_limited_waist(l, na).unwrap(), l).unwrap();
        prop_assert!(((zr(c * wl) - c * zr(wl)) / zr(wl)).abs() < 1e-12);
    }

    #[test]
    fn image_pitch_is_lens_pitch_over_m(pitch in 10e-6..500e-6f64, m in 0.5..10.0f64) {
        let spec = LensArraySpec::new(pitch, 3, 4, 0.29, m).unwrap();
        let g = spot_grid(&spec, Illumination::Flat).unwrap();
        prop_assert_eq!(g.pitch, pitch / m);
        let dx = g.site(0, 1).unwrap().center[0] - g.site(0, 0).unwrap().center[0];
        prop_assert!((dx - pitch / m).abs() <= 1e-15 * pitch);
    }

    #[test]
    fn red_detuned_trap_signs_and_scaling(wl in 800e-9..1600e-9f64, i in 1e6..1e10f64) {
        let s = AtomSpecies::rb85();
        let d = effective_detuning(&s, wl).unwrap();
        let u = dipole_potential(i, d, &s).unwrap();
        prop_assert!(u < 0.0);
        let g = scattering_rate(i, d, &s).unwrap();
        prop_assert!(g >= 0.0);
        let u2 = dipole_potential(2.0 * i, d, &s).unwrap();
        prop_assert!((u2 / u - 2.0).abs() < 1e-12);
        let g2 = scattering_rate(2.0 * i, d, &s).unwrap();
        prop_assert!((g2 / g - 2.0).abs() < 1e-12);
        let gd = scattering_rate(i, 2.0 * d, &s).unwrap();
        prop_assert!((g / gd - 4.0).abs() < 1e-12);
        for model in [LightShiftModel::RotatingWave, LightShiftModel::CounterRotating] {
            let total = total_scattering_rate(i, &s, wl, model).unwrap();
            prop_assert!(state_changing_rate(i, &s, wl).unwrap() <= total.max(scattering_rate(i, d, &s).unwrap()));
        }
    }

    #[test]
    fn depth_equals_potential_at_peak(wl in 800e-9..1100e-9f64, p in 1e-4..2e-2f64, w in 2e-6..6e-6f64) {
        let s = AtomSpecies::rb85();
        let laser = TrapLaserSpec::new(wl, p, w).unwrap();
        let t = characterize_trap(&laser, &s).unwrap();
        let beam = laser.beam().unwrap();
        let u = dipole_potential(beam.intensity_at(0.0, 0.0), t.effective_detuning, &s).unwrap();
        prop_assert_eq!(t.potential, u);
        prop_assert_eq!(t.depth, -u);
    }

    #[test]
    fn mask_properties(rows in 1usize..12, cols in 1usize..12, period in 1usize..5, scale in 0.1..10.0f64) {
        let full = build_mask_for_shape(&PatternKind::Full, rows, cols).unwrap();
        let cb = build_mask_for_shape(&PatternKind::Checkerboard, rows, cols).unwrap();
        prop_assert_eq!(cb.combine(&full).unwrap(), cb.clone());
        prop_assert_eq!(full.combine(&full).unwrap(), full);
        if period <= rows.max(cols) {
            let sl = build_mask_for_shape(
                &PatternKind::Superlattice { period, offset: 0, orientation: Orientation::Aligned },
                rows,
                cols,
            )
            .unwrap();
            prop_assert_eq!(sl.lit_count(), rows.div_ceil(period) * cols.div_ceil(period));
        }
        let base: Vec<f64> = (0..rows * cols).map(|k| 1.0 + k as f64 * 0.1).collect();
        let scaled: Vec<f64> = base.iter().map(|x| x * scale).collect();
        let a = apply_mask(&cb, &scaled).unwrap();
        let b: Vec<f64> = apply_mask(&cb, &base).unwrap().iter().map(|x| x * scale).collect();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() <= 1e-12 * x.abs().max(1e-300));
        }
    }

    #[test]
    fn noiseless_detection_round_trip(counts in prop::collection::vec(0u32..4, 1..200), seed in any::<u64>()) {
        let m = DetectionModel::noiseless();
        let s = simulate_fluorescence(&counts, &m, seed).unwrap();
        prop_assert_eq!(classify_counts(&s, &m).unwrap().counts, counts);
    }

    #[test]
    fn detection_is_seed_reproducible(seed in any::<u64>(), sigma in 0.0..200.0f64) {
        let m = DetectionModel::default().with_sigma(sigma);
        let truth = load_occupancies(500, LoadingMode::poisson(1.0), seed).unwrap();
        let a = simulate_fluorescence(&truth, &m, seed ^ 1).unwrap();
        let b = simulate_fluorescence(&truth, &m, seed ^ 1).unwrap();
        prop_assert_eq!(classify_counts(&a, &m).unwrap(), classify_counts(&b, &m).unwrap());
    }

    #[test]
    fn pulses_preserve_bloch_norm(
        u in -1.0..1.0f64, v in -1.0..1.0f64, w in -1.0..1.0f64,
        omega in 0.0..1e7f64, t in 0.0..1e-5f64, phase in -PI..PI, delta in -1e6..1e6f64,
        damp in 0.0..1.0f64,
    ) {
        let s = Bloch::new(u, v, w);
        let p = Pulse::new(omega, t, phase, delta).unwrap();
        let out = apply_pulse(s, &p);
        prop_assert!((out.norm() - s.norm()).abs() <= 1e-12);
        prop_assert!(out.damp_transverse(damp).norm() <= out.norm() + 1e-15);
    }

    #[test]
    fn contrast_fit_recovers_parameters(c0 in 0.3..1.0f64, tau in 5e-3..200e-3f64) {
        let samples: Vec<(f64, f64)> = (0..25)
            .map(|k| {
                let t = 2.5 * tau * k as f64 / 24.0;
                (t, gaussian_contrast(c0, tau, t))
            })
            .collect();
        let fit = fit_contrast_decay(&samples).unwrap();
        prop_assert!(((fit.t2_prime - tau) / tau).abs() < 1e-6);
        prop_assert!((fit.initial_contrast - c0).abs() < 1e-6);
    }

    #[test]
    fn blockade_budget_and_monotonicity(
        radius in 1e-6..20e-6f64, pitch in 1e-6..20e-6f64, shrink in 0.1..1.0f64,
        e1 in 0.0..1.0f64, e2 in 0.0..1.0f64,
    ) {
        let cfg = BlockadeConfig::new(radius, pitch, 1e-6, e1, e2).unwrap();
        let f = gate_fidelity_budget(&cfg).unwrap();
        prop_assert!(f.total_fidelity <= f.intrinsic_fidelity);
        prop_assert!((0.0..=1.0).contains(&f.total_fidelity) && (0.0..=1.0).contains(&f.intrinsic_fidelity));
        let smaller = BlockadeConfig { pitch: pitch * shrink, ..cfg };
        if geometry_compatible(&cfg).unwrap().pair_within_blockade {
            prop_assert!(geometry_compatible(&smaller).unwrap().pair_within_blockade);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn shift_conserves_and_quantizes(
        occ in prop::collection::vec(0u32..3, 24),
        n in 0usize..6,
        seed in any::<u64>(),
    ) {
        // 2 x 12 register with the last 6 columns empty: nothing reaches the edge
        let occ: Vec<u32> = occ.iter().enumerate().map(|(k, &c)| if k % 12 < 6 { c } else { 0 }).collect();
        let mut r = register(2, 12);
        r.set_occupancies(&occ).unwrap();
        let s = default_schedule(55e-6, 5e-3).unwrap();
        let (out, res) = run_cycles(&r, &s, n, &TransportNoise::default(), seed).unwrap();
        prop_assert_eq!(out.total_atoms(), r.total_atoms());
        prop_assert_eq!(res.lost + res.dropped, 0);
        for (k, dest) in res.destinations.iter().enumerate() {
            match dest {
                Some(d) => {
                    prop_assert_eq!(*d, k + n);
                    prop_assert_eq!(out.sites[*d].occupancy, occ[k]);
                }
                None => prop_assert_eq!(occ[k], 0),
            }
        }
        let (back, _) = run_cycles(&out, &s.reversed(), n, &TransportNoise::default(), seed).unwrap();
        prop_assert_eq!(back.occupancies(), occ);
    }
}

#[test]
fn loading_laws_pass_chi_squared() {
    for (mode, cells) in [
        (LoadingMode::poisson(1.0), 6u32),
        (LoadingMode::collisional_blockade(), 2),
        (LoadingMode::optimized(), 2),
    ] {
        let n = 100_000;
        let c = load_occupancies(n, mode, 1234).unwrap();
        let mut chi = 0.0;
        let mut tail = 1.0;
        for k in 0..cells {
            let p = if k + 1 == cells { tail } else { mode.probability(k) };
            tail -= mode.probability(k);
            let obs = c.iter().filter(|&&x| if k + 1 == cells { x >= k } else { x == k }).count() as f64;
            chi += (obs - p * n as f64).powi(2) / (p * n as f64);
        }
        let crit = ChiSquared::new((cells - 1) as f64).unwrap().inverse_cdf(0.99);
        assert!(chi < crit, "{mode:?}: {chi} >= {crit}");
    }
}

#[test]
fn ramsey_fringe_follows_analysis_detuning() {
    let m = DephasingModel::new(f64::INFINITY, f64::INFINITY, 1).unwrap();
    let delta = 2.0 * PI * 2e3;
    let times: Vec<f64> = (0..50).map(|k| 2e-5 * k as f64).collect();
    let r = ramsey_sequence(&m, 2.0 * PI * 1e9, &times, delta, Bloch::ground(), 1).unwrap();
    for (t, p) in times.iter().zip(&r.population0) {
        // the 0.25 ns pulses carry a phase error of order delta * tau
        assert!((p - (1.0 - (delta * t).cos()) / 2.0).abs() < 1e-5, "{t}: {p}");
    }
}

#[test]
fn checkerboard_classes_are_complementary() {
    let mut r = register(6, 6);
    r.set_occupancies(&[1; 36]).unwrap();
    let mask = build_mask_for_shape(&PatternKind::Checkerboard, 6, 6).unwrap();
    let rabi = 2.0 * PI * 1e6;
    apply_register_pulse(&mut r, &Pulse::pi(rabi).unwrap(), Some(&mask)).unwrap();
    let model = DephasingModel::new(5e-3, 40e-3, 500).unwrap();
    let times: Vec<f64> = (0..30).map(|k| 1e-4 * k as f64).collect();
    let res = register_ramsey(&r, &model, rabi, &times, 2.0 * PI * 1e3, 9).unwrap();
    let lit = addressed_sites(&mask, 0.5);
    let dark: BTreeSet<_> = r.sites.iter().map(|s| s.index).filter(|i| !lit.contains(i)).collect();
    for (a, b) in res.class_mean(&lit).iter().zip(res.class_mean(&dark)) {
        assert!((a + b - 1.0).abs() < 0.02, "{a} + {b}");
    }
}

#[test]
fn echo_without_shift_dephasing_is_indistinguishable() {
    use lensreg::shift_register::shift_with_echo;
    let n = 20_000;
    let m = DephasingModel::new(4e-3, 40e-3, n)
        .unwrap()
        .with_homogeneous(HomogeneousDephasing::Stochastic);
    let s = default_schedule(55e-6, 5e-3).unwrap();
    let times: Vec<f64> = (0..15).map(|k| 24e-3 + 5e-3 * k as f64).collect();
    let c = shift_with_echo(&m, &s, &times, 0.0, 2.0 * PI * 1e5, 77).unwrap();
    // each population is a mean of n values in [0, 1]: variance <= 1/(4n)
    let var = 2.0 / (4.0 * n as f64);
    let chi: f64 = c
        .rest
        .population0
        .iter()
        .zip(&c.shift.population0)
        .map(|(a, b)| (a - b).powi(2) / var)
        .sum();
    let crit = ChiSquared::new(times.len() as f64).unwrap().inverse_cdf(0.99);
    assert!(chi < crit, "{chi} >= {crit}");
}

#[test]
fn echo_refocuses_static_broadening() {
    let times: Vec<f64> = (0..10).map(|k| 1e-3 * k as f64).collect();
    for t2_star in [1e-5, 1e-3, 1e-1] {
        let m = DephasingModel::new(t2_star, f64::INFINITY, 2000).unwrap();
        let r = spin_echo_sequence(&m, 2.0 * PI * 1e9, &times, 3).unwrap();
        assert!(r.contrast.iter().all(|c| (1.0 - c).abs() < 3.0 / 2000f64.sqrt()));
    }
}
