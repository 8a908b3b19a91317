use atomradio::cavity::{cavity_transfer, input_power_to_rabi, CavityParams};
use atomradio::spectrum::tone_component;
use atomradio::{encode, hz, khz, make_tone, CarrierTrajectory, Error, ModulationConfig, ModulationMode, ToneShape, TAU};
use proptest::prelude::*;

#[test]
fn power_calibration_reproduces_caption_values() {
    let c = CavityParams::default();
    let rabi_khz = |p: f64| input_power_to_rabi(p, &c) / TAU / 1e3;
    assert!((rabi_khz(0.0) - 58.6).abs() <= 1e-12);
    assert!((rabi_khz(-20.0) - 5.86).abs() <= 1e-12);
    assert!((rabi_khz(-5.0) - 32.95).abs() < 0.01);
    assert!((rabi_khz(8.0) - 147.2).abs() < 0.1);
}

#[test]
fn calibration_scales_with_constant() {
    let c = CavityParams {
        rabi_per_sqrt_mw: 2.0 * CavityParams::default().rabi_per_sqrt_mw,
        ..CavityParams::default()
    };
    assert!((input_power_to_rabi(0.0, &c) / TAU - 117.2e3).abs() < 1e-6);
}

#[test]
fn audio_modulation_passes_the_cavity() {
    let c = CavityParams::default();
    assert!((c.linewidth() / TAU - 253.1e3).abs() < 100.0);
    assert!(c.transfer(hz(1e3)).norm() > 0.9999);
    // Exact single-pole attenuation: below 0.1 % up to ~5.6 kHz, 0.31 % at 10 kHz.
    for f in [100.0, 1e3, 5e3] {
        assert!(1.0 - c.transfer(hz(f)).norm() < 1e-3);
    }
    let x = 2.0 * hz(10e3) / c.linewidth();
    assert!((c.transfer(hz(10e3)).norm() - 1.0 / (1.0 + x * x).sqrt()).abs() < 1e-15);
}

#[test]
fn resonant_constant_carrier_is_unchanged() {
    let traj = CarrierTrajectory::constant(khz(74.0), 0.0, 1000, 1e6);
    let out = cavity_transfer(&traj, &CavityParams::default()).unwrap();
    for (a, b) in out.omega_mu.iter().zip(&traj.omega_mu) {
        assert!((a - b).abs() <= 1e-12 * b);
    }
    assert_eq!(out.delta_mu, traj.delta_mu);
}

#[test]
fn detuned_constant_carrier_is_scaled_by_lorentzian() {
    let c = CavityParams::default();
    let traj = CarrierTrajectory::constant(khz(74.0), khz(95.0), 200, 1e6);
    let out = cavity_transfer(&traj, &c).unwrap();
    let expected = khz(74.0) * c.transfer(khz(95.0)).norm();
    for a in &out.omega_mu {
        assert!((a - expected).abs() <= 1e-9 * expected);
    }
}

#[test]
fn am_at_half_linewidth_loses_three_db() {
    let c = CavityParams::default();
    let f_m = c.linewidth() / 2.0 / TAU;
    let fs = 200.0 * f_m;
    let tone = make_tone(f_m, 1.0, ToneShape::Sine, 60.0 / f_m, fs).unwrap();
    let cfg = ModulationConfig {
        mode: ModulationMode::Am,
        m_am: 1e-3,
        carrier_detuning_0: 0.0,
        ..ModulationConfig::default()
    };
    let traj = encode(&tone, &cfg).unwrap();
    let out = cavity_transfer(&traj, &c).unwrap();
    // Skip the start-up transient (decays at κ/2, i.e. within a few periods).
    let skip = (20.0 * 200.0) as usize;
    let a_in = tone_component(&traj.omega_mu[skip..], fs, f_m).norm();
    let a_out = tone_component(&out.omega_mu[skip..], fs, f_m).norm();
    assert!((a_out / a_in - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-3, "{}", a_out / a_in);
}

#[test]
fn slow_fm_follows_static_lorentzian() {
    let c = CavityParams::default();
    // Slow enough that the chirp-rate correction (~δ'/(κ/2)²) stays below 0.1 %.
    let tone = make_tone(100.0, 1.0, ToneShape::Sine, 10e-3, 1e6).unwrap();
    let cfg = ModulationConfig {
        mode: ModulationMode::Fm,
        m_fm: khz(150.0),
        carrier_detuning_0: khz(95.0),
        ..ModulationConfig::default()
    };
    let traj = encode(&tone, &cfg).unwrap();
    let out = cavity_transfer(&traj, &c).unwrap();
    assert_eq!(out.delta_mu, traj.delta_mu);
    for i in (0..traj.len()).step_by(397) {
        let expected = traj.omega_mu[i] * c.transfer(traj.delta_mu[i]).norm();
        assert!((out.omega_mu[i] / expected - 1.0).abs() < 2e-3);
    }
}

#[test]
fn undersampled_trajectory_is_rejected() {
    let tone = make_tone(10e3, 1.0, ToneShape::Sine, 1e-3, 200e3).unwrap();
    let mut traj = encode(&tone, &ModulationConfig::default()).unwrap();
    assert!(cavity_transfer(&traj, &CavityParams::default()).is_ok());
    traj.modulation_freq_hz = Some(30e3);
    assert!(matches!(
        cavity_transfer(&traj, &CavityParams::default()),
        Err(Error::Aliasing { .. })
    ));
}

proptest! {
    #[test]
    fn transfer_magnitude_even_phase_odd(delta in -1e8f64..1e8, q in 100.0f64..1e6) {
        let c = CavityParams { quality_factor: q, ..CavityParams::default() };
        let (hp, hm) = (c.transfer(delta), c.transfer(-delta));
        prop_assert!(hp.norm() <= 1.0);
        prop_assert!((hp.norm() - hm.norm()).abs() <= 1e-15);
        prop_assert!((hp.arg() + hm.arg()).abs() <= 1e-15);
    }
}
