mod common;

use atomradio::density::Level;
use atomradio::integrate::{stable_step, Integrator};
use atomradio::lindblad::{build_hamiltonian, jump_operators, liouvillian_matrix};
use atomradio::{
    evolve_interval, khz, solve_steady_state, AtomFieldParams, ConstantDrive, DecoherenceParams,
    DensityMatrix, TAU,
};
use common::{max_abs, random_density, random_hermitian, random_params};
use nalgebra::Matrix3;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Independent expansion of `−i[H, ρ] + Σ γ (LρL† − ½{L†L, ρ})` written
/// out with explicit loops.
fn dissipator_oracle(rho: &Matrix3<Complex64>, p: &AtomFieldParams, d: &DecoherenceParams) -> Matrix3<Complex64> {
    let h = build_hamiltonian(p);
    let i = Complex64::new(0.0, 1.0);
    let mut out = Matrix3::zeros();
    for r in 0..3 {
        for c in 0..3 {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..3 {
                acc += h[(r, k)] * rho[(k, c)] - rho[(r, k)] * h[(k, c)];
            }
            out[(r, c)] = -i * acc;
        }
    }
    for j in jump_operators(d) {
        let l = j.operator;
        let ld = l.adjoint();
        let ldl = ld * l;
        for r in 0..3 {
            for c in 0..3 {
                let mut acc = Complex64::new(0.0, 0.0);
                for a in 0..3 {
                    for b in 0..3 {
                        acc += l[(r, a)] * rho[(a, b)] * ld[(b, c)];
                    }
                    acc -= 0.5 * (ldl[(r, a)] * rho[(a, c)] + rho[(r, a)] * ldl[(a, c)]);
                }
                out[(r, c)] += j.rate * acc;
            }
        }
    }
    out
}

#[test]
fn liouvillian_matches_loop_expansion() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let d = DecoherenceParams {
        gamma_ground_relax: 3.0e4,
        gamma_mw_dephase: 7.0e4,
        ..DecoherenceParams::default()
    };
    for _ in 0..50 {
        let p = random_params(&mut rng);
        let rho = random_density(&mut rng);
        let ours = liouvillian_matrix(rho.matrix(), &p, &d);
        let oracle = dissipator_oracle(rho.matrix(), &p, &d);
        let scale = atomradio::lindblad::max_rate(&p, &d);
        assert!(max_abs(&(ours - oracle)) <= 1e-12 * scale);
        assert!(ours.trace().norm() <= 1e-12 * scale);
        assert!(max_abs(&(ours - ours.adjoint())) <= 1e-12 * scale);
    }
}

#[test]
fn two_level_rabi_half_period() {
    let omega = khz(100.0);
    let p = AtomFieldParams {
        omega_mu_rabi: omega,
        ..AtomFieldParams::ZERO
    };
    let d = DecoherenceParams::ZERO;
    let t_pi = std::f64::consts::PI / omega;
    let ev = evolve_interval(
        &DensityMatrix::pure(Level::G1),
        &ConstantDrive(p),
        &d,
        t_pi,
        stable_step(&p, &d, 0.02),
        1,
    )
    .unwrap();
    assert!((ev.last().population(Level::G2) - 1.0).abs() < 1e-6);
}

#[test]
fn fig3_parameters_relax_to_steady_state() {
    let d = DecoherenceParams::default();
    for det in [khz(-5.0), khz(95.0)] {
        let p = AtomFieldParams::default().with_microwave(khz(74.0), det);
        let rho_ss = solve_steady_state(&p, &d).unwrap();
        let ev = evolve_interval(
            &DensityMatrix::pure(Level::G2),
            &ConstantDrive(p),
            &d,
            50e-3,
            stable_step(&p, &d, 0.1),
            50,
        )
        .unwrap();
        let diff = ev.last().max_abs_diff(&rho_ss);
        assert!(diff <= 1e-7, "Δ = {det}: difference {diff:e}");
    }
}

#[test]
fn dark_state_from_any_start() {
    let p = AtomFieldParams {
        omega_opt_rabi: khz(200.0),
        ..AtomFieldParams::ZERO
    };
    let d = DecoherenceParams {
        gamma_ground_relax: 0.0,
        ..DecoherenceParams::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..5 {
        let rho0 = random_density(&mut rng);
        let ev = evolve_interval(&rho0, &ConstantDrive(p), &d, 20e-3, stable_step(&p, &d, 0.1), 4).unwrap();
        assert!((ev.last().population(Level::G1) - 1.0).abs() <= 1e-6);
    }
}

#[test]
fn closure_drive_varies_in_time() {
    // A linear chirp through resonance: evolution must stay physical and
    // differ from the constant drive at the mean detuning.
    let base = AtomFieldParams::default();
    let d = DecoherenceParams::default();
    let chirp = move |t: f64| base.with_microwave(khz(74.0), khz(-200.0) + khz(400.0) * t / 1e-4);
    let rho0 = solve_steady_state(&base, &d).unwrap();
    let dt = stable_step(&base.with_microwave(khz(74.0), khz(200.0)), &d, 0.1);
    let a = evolve_interval(&rho0, &chirp, &d, 1e-4, dt, 10).unwrap();
    let b = evolve_interval(&rho0, &ConstantDrive(base), &d, 1e-4, dt, 10).unwrap();
    assert!(a.last().max_abs_diff(b.last()) > 1e-6);
}

#[test]
fn integrator_is_bitwise_reproducible() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let p = random_params(&mut rng);
    let d = DecoherenceParams::default();
    let rho0 = random_density(&mut rng);
    let run = || {
        let mut it = Integrator::new(&d, stable_step(&p, &d, 0.1)).unwrap();
        it.evolve(&rho0, &ConstantDrive(p), 1e-4, 7).unwrap()
    };
    let (a, b) = (run(), run());
    assert_eq!(a.states, b.states);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn liouvillian_is_affine_linear(seed in any::<u64>(), a in -3.0f64..3.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_params(&mut rng);
        let d = DecoherenceParams::default();
        let (r1, r2) = (random_hermitian(&mut rng), random_hermitian(&mut rng));
        let b = 1.0 - a;
        let ca = Complex64::new(a, 0.0);
        let cb = Complex64::new(b, 0.0);
        let lhs = liouvillian_matrix(&(r1 * ca + r2 * cb), &p, &d);
        let rhs = liouvillian_matrix(&r1, &p, &d) * ca + liouvillian_matrix(&r2, &p, &d) * cb;
        let scale = atomradio::lindblad::max_rate(&p, &d) * 10.0;
        prop_assert!(max_abs(&(lhs - rhs)) <= 1e-12 * scale);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn evolution_stays_physical(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_params(&mut rng);
        let d = DecoherenceParams::default();
        let rho0 = random_density(&mut rng);
        let ev = evolve_interval(&rho0, &ConstantDrive(p), &d, 1e-3, stable_step(&p, &d, 0.1), 50).unwrap();
        for s in &ev.states {
            prop_assert!((s.trace() - 1.0).abs() <= 1e-10);
            prop_assert!(s.hermiticity_defect() <= 1e-10);
            prop_assert!(s.min_eigenvalue() >= -1e-9);
        }
    }
}

#[test]
fn rabi_oscillation_follows_cos_squared() {
    let omega = TAU * 100e3;
    let p = AtomFieldParams {
        omega_mu_rabi: omega,
        ..AtomFieldParams::ZERO
    };
    let d = DecoherenceParams::ZERO;
    let t_span = 10.0 * TAU / omega;
    let ev = evolve_interval(&DensityMatrix::pure(Level::G1), &ConstantDrive(p), &d, t_span, stable_step(&p, &d, 0.02), 400).unwrap();
    for (t, s) in ev.times.iter().zip(&ev.states) {
        let expected = (0.5 * omega * t).cos().powi(2);
        assert!((s.population(Level::G1) - expected).abs() <= 1e-6);
    }
}
