use std::f64::consts::FRAC_PI_2;

use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

use squeezebath::bath::BathState;
use squeezebath::couplings::build_couplings;
use squeezebath::dynamics::{build_generator, evolve, steady_state, EvolveOptions, Generator, GeneratorMode};
use squeezebath::numerics::bessel::bessel_j0;
use squeezebath::observables::{initial_state, InitialKind};
use squeezebath::params::{ArrayGeometry, PhysicalParams};

fn generator(geometry: &ArrayGeometry, r: f64, phi: f64, mode: GeneratorMode) -> Generator {
    let p = PhysicalParams::default();
    let b = BathState::from_r(r, phi, &p).unwrap();
    let c = build_couplings(geometry, &p, &b, false).unwrap();
    build_generator(&c, &b, mode).unwrap()
}

fn chain(n: usize, a: f64, r: f64) -> Generator {
    generator(&ArrayGeometry::chain(n, a).unwrap(), r, -FRAC_PI_2, GeneratorMode::FourChannel)
}

fn sz_trajectory(g: &Generator, n: usize, grid: &[f64]) -> Vec<f64> {
    let traj = evolve(&initial_state(&InitialKind::AllExcited, n).unwrap(), g, grid, &EvolveOptions::default()).unwrap();
    traj.mean_s.iter().map(|s| s[2] / n as f64).collect()
}

#[test]
fn steady_state_matches_long_evolution() {
    let g = chain(2, 0.5, 0.25);
    let ss = steady_state(&g).unwrap();
    let grid = [0.0, 100.0, 200.0, 300.0];
    let traj = evolve(&initial_state(&InitialKind::AllExcited, 2).unwrap(), &g, &grid, &EvolveOptions::default()).unwrap();
    let d = traj.final_state.trace_distance(&ss);
    assert!(d < 1e-6, "{d}");
}

#[test]
fn approach_to_steady_state_follows_liouvillian_gap() {
    // Why excited and ground starts are still ~1e-2 apart at Γ₀t = 20:
    // the slowest decaying mode sets the approach rate.
    let g = chain(2, 0.5, 0.25);
    let rates: Vec<f64> = g.liouvillian().clone().schur().eigenvalues().unwrap().iter().map(|z| -z.re).collect();

    let grid = [0.0, 20.0, 100.0, 150.0];
    let opts = EvolveOptions {
        keep_states: true,
        ..EvolveOptions::default()
    };
    let a = evolve(&initial_state(&InitialKind::AllExcited, 2).unwrap(), &g, &grid, &opts).unwrap();
    let b = evolve(&initial_state(&InitialKind::AllGround, 2).unwrap(), &g, &grid, &opts).unwrap();
    let distance = |k: usize| {
        let diff: DMatrix<Complex64> = &a.states[k] - &b.states[k];
        let h = (&diff + diff.adjoint()) * Complex64::new(0.5, 0.0);
        0.5 * h.symmetric_eigenvalues().iter().map(|v| v.abs()).sum::<f64>()
    };
    assert!(distance(1) > 1e-3, "{}", distance(1));
    let rate = (distance(2) / distance(3)).ln() / 50.0;
    let nearest = rates.iter().cloned().min_by(|x, y| (x - rate).abs().total_cmp(&(y - rate).abs())).unwrap();
    assert!((rate - nearest).abs() < 0.05 * nearest, "rate {rate} vs eigenvalue {nearest}");
    assert!(rate < 0.1, "{rate}");
}

#[test]
fn far_apart_qubits_nearly_factorize() {
    // J₀(ρ/λ) only falls off as (ρ/λ)^(-1/2), so at a/λ = 10³ the residual
    // correlation J₀ ≈ 0.025 still shifts ⟨σ_z⟩ at second order.
    let grid: Vec<f64> = (0..=40).map(|i| 0.25 * i as f64).collect();
    for r in [0.0, 0.25] {
        let single = sz_trajectory(&chain(1, 1.0, r), 1, &grid);
        for n in [2, 3] {
            for (a, bound) in [(1e3, 0.5 * bessel_j0(1e3).powi(2)), (1e5, 1e-4)] {
                let many = sz_trajectory(&chain(n, a, r), n, &grid);
                let dev = many.iter().zip(&single).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
                assert!(dev < bound, "N={n} r={r} a/λ={a}: {dev:.3e} vs {bound:.3e}");
            }
        }
    }
}

fn random_hermitian(dim: usize, seed: u64) -> DMatrix<Complex64> {
    let mut s = seed | 1;
    let mut next = move || {
        s ^= s << 13;
        s ^= s >> 7;
        s ^= s << 17;
        (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    };
    let a = DMatrix::from_fn(dim, dim, |_, _| Complex64::new(next(), next()));
    &a + a.adjoint()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn generator_preserves_trace_and_hermiticity(
        n in 1usize..=3,
        spacing in 0.05f64..2.0,
        r in 0.0f64..1.2,
        phi in -3.1f64..3.1,
        jump in proptest::bool::ANY,
        seed in 1u64..u64::MAX,
    ) {
        let mode = if jump { GeneratorMode::JumpOperator } else { GeneratorMode::FourChannel };
        let positions = (0..n).map(|i| [i as f64 * spacing, 0.3 * spacing * (i % 2) as f64]).collect();
        let g = generator(&ArrayGeometry::from_positions(positions).unwrap(), r, phi, mode);
        prop_assert!((&g.h_eff - g.h_eff.adjoint()).camax() < 1e-13);
        let rho = random_hermitian(1 << n, seed);
        let l = g.apply(&rho);
        prop_assert!(l.trace().norm() < 1e-10 * l.camax().max(1e-300));
        prop_assert!((&l - l.adjoint()).camax() < 1e-12 * l.camax());
    }

    #[test]
    fn four_channel_and_jump_forms_agree(r in 0.0f64..1.5, phi in -3.1f64..3.1, seed in 1u64..u64::MAX) {
        let geometry = ArrayGeometry::chain(3, 0.37).unwrap();
        let a = generator(&geometry, r, phi, GeneratorMode::FourChannel);
        let b = generator(&geometry, r, phi, GeneratorMode::JumpOperator);
        let rho = random_hermitian(8, seed);
        prop_assert!((a.apply(&rho) - b.apply(&rho)).camax() < 1e-9 * (1.0 + rho.camax()));
    }
}
