//! Collective-spin observables in the Pauli convention S^η = Σ σ^η.

use nalgebra::{Matrix2, Vector3};
use num_complex::Complex64;

use crate::dynamics::{CMat, Generator, QubitState};
use crate::error::{Error, Result};
use crate::params::MAX_QUBITS;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinSummary {
    pub mean_s: [f64; 3],
    pub min_perp_var: f64,
    pub max_perp_var: f64,
    pub xi_r_squared: f64,
    /// Angle of the minimum-variance direction in the (e₁, e₂) frame, in (−π/2, π/2].
    pub squeezing_angle: f64,
}

/// Dense S_x, S_y, S_z and their symmetrized products for a fixed N.
#[derive(Debug, Clone)]
pub struct SpinOperators {
    pub n_qubits: usize,
    pub s: [CMat; 3],
    // ½{S_a, S_b}
    anti: [[CMat; 3]; 3],
}

fn kron_single(n: usize, qubit: usize, op: &[[Complex64; 2]; 2]) -> CMat {
    let dim = 1 << n;
    let m = 1 << (n - 1 - qubit);
    CMat::from_fn(dim, dim, |i, j| {
        if (i & !m) != (j & !m) {
            return ZERO;
        }
        op[usize::from(i & m != 0)][usize::from(j & m != 0)]
    })
}

pub fn pauli(axis: usize) -> [[Complex64; 2]; 2] {
    match axis {
        0 => [[ZERO, ONE], [ONE, ZERO]],
        1 => [[ZERO, -I], [I, ZERO]],
        _ => [[ONE, ZERO], [ZERO, -ONE]],
    }
}

impl SpinOperators {
    pub fn new(n: usize) -> Self {
        let dim = 1 << n;
        let s: [CMat; 3] = std::array::from_fn(|axis| {
            let mut total = CMat::zeros(dim, dim);
            for q in 0..n {
                total += kron_single(n, q, &pauli(axis));
            }
            total
        });
        let anti = std::array::from_fn(|a| {
            std::array::from_fn(|b| {
                let ab = &s[a] * &s[b];
                (&ab + ab.adjoint()) * Complex64::new(0.5, 0.0)
            })
        });
        SpinOperators { n_qubits: n, s, anti }
    }

    fn expect(op: &CMat, rho: &CMat) -> f64 {
        // Tr(ρA) = Σ ρ_ij conj(A_ij) for Hermitian A
        op.dotc(rho).re
    }

    pub fn mean(&self, rho: &CMat) -> [f64; 3] {
        std::array::from_fn(|a| Self::expect(&self.s[a], rho))
    }

    /// Symmetrized covariance ½⟨S_aS_b + S_bS_a⟩ − ⟨S_a⟩⟨S_b⟩.
    pub fn covariance(&self, rho: &CMat) -> nalgebra::Matrix3<f64> {
        let m = self.mean(rho);
        nalgebra::Matrix3::from_fn(|a, b| Self::expect(&self.anti[a][b], rho) - m[a] * m[b])
    }
}

/// ⟨S_x⟩, ⟨S_y⟩, ⟨S_z⟩.
pub fn collective_spin(state: &QubitState) -> [f64; 3] {
    SpinOperators::new(state.n_qubits).mean(&state.rho)
}

/// Orthonormal pair perpendicular to `n`, with e₁ from x̂ (or ŷ if parallel).
pub fn perpendicular_frame(n: &Vector3<f64>) -> (Vector3<f64>, Vector3<f64>) {
    let n = n.normalize();
    let mut e1 = Vector3::x() - n * n.x;
    if e1.norm() < 1e-6 {
        e1 = Vector3::y() - n * n.y;
    }
    let e1 = e1.normalize();
    (e1, n.cross(&e1))
}

/// Wineland parameter ξ_R² = N·min Var_⊥ / |⟨S⟩|².
pub fn wineland_xi2(rho: &CMat, ops: &SpinOperators) -> Result<SpinSummary> {
    let n = ops.n_qubits as f64;
    let mean_s = ops.mean(rho);
    let mean = Vector3::from(mean_s);
    let len = mean.norm();
    if len <= 1e-8 * n {
        return Err(Error::UndefinedDirection(len));
    }
    let (e1, e2) = perpendicular_frame(&mean);
    let cov = ops.covariance(rho);
    let c = Matrix2::new(
        e1.dot(&(cov * e1)),
        e1.dot(&(cov * e2)),
        e2.dot(&(cov * e1)),
        e2.dot(&(cov * e2)),
    );
    let (a, b, d) = (c[(0, 0)], 0.5 * (c[(0, 1)] + c[(1, 0)]), c[(1, 1)]);
    let centre = 0.5 * (a + d);
    let radius = (0.25 * (a - d) * (a - d) + b * b).sqrt();
    let min_perp_var = (centre - radius).max(0.0);
    let max_perp_var = centre + radius;
    // major axis sits at ½ atan2(2b, a − d); the minor one is a quarter turn away
    let mut angle = 0.5 * (2.0 * b).atan2(a - d) + std::f64::consts::FRAC_PI_2;
    if angle > std::f64::consts::FRAC_PI_2 {
        angle -= std::f64::consts::PI;
    }
    Ok(SpinSummary {
        mean_s,
        min_perp_var,
        max_perp_var,
        xi_r_squared: n * min_perp_var / (len * len),
        squeezing_angle: angle,
    })
}

/// −½ Tr[S_z L(ρ)] / N, with L already in units of Γ₀.
pub fn relaxation_rate_of(rho: &CMat, generator: &Generator, ops: &SpinOperators) -> f64 {
    let l = generator.apply(rho);
    -0.5 * SpinOperators::expect(&ops.s[2], &l) / ops.n_qubits as f64
}

pub fn relaxation_rate(state: &QubitState, generator: &Generator) -> f64 {
    relaxation_rate_of(&state.rho, generator, &SpinOperators::new(state.n_qubits))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialKind {
    AllExcited,
    AllGround,
    /// cos(θ/2)|↑⟩ + e^{iφ} sin(θ/2)|↓⟩ on every qubit.
    Css { theta: f64, phi: f64 },
}

pub fn initial_state(kind: &InitialKind, n: usize) -> Result<QubitState> {
    if n == 0 || n > MAX_QUBITS {
        return Err(Error::Size(n));
    }
    let (up, down) = match *kind {
        InitialKind::AllExcited => (ONE, ZERO),
        InitialKind::AllGround => (ZERO, ONE),
        InitialKind::Css { theta, phi } => (
            Complex64::new((0.5 * theta).cos(), 0.0),
            Complex64::from_polar((0.5 * theta).sin(), phi),
        ),
    };
    let dim = 1 << n;
    let psi = nalgebra::DVector::from_fn(dim, |i, _| {
        (0..n).fold(ONE, |acc, q| acc * if i & (1 << q) != 0 { down } else { up })
    });
    QubitState::new(&psi * psi.adjoint(), 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bath::BathState;
    use crate::couplings::build_couplings;
    use crate::dynamics::{build_generator, evolve, steady_state, EvolveOptions, GeneratorMode};
    use crate::params::{ArrayGeometry, PhysicalParams};
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn generator(n: usize, a: f64, r: f64) -> Generator {
        let p = PhysicalParams::default();
        let b = BathState::from_r(r, -FRAC_PI_2, &p).unwrap();
        let c = build_couplings(&ArrayGeometry::chain(n, a).unwrap(), &p, &b, false).unwrap();
        build_generator(&c, &b, GeneratorMode::FourChannel).unwrap()
    }

    // exp(−iθ n̂·σ/2) on every qubit
    fn global_rotation(n: usize, axis: &Vector3<f64>, theta: f64) -> CMat {
        let axis = axis.normalize();
        let (c, s) = ((0.5 * theta).cos(), (0.5 * theta).sin());
        let mut single = [[Complex64::new(c, 0.0), ZERO], [ZERO, Complex64::new(c, 0.0)]];
        for k in 0..3 {
            let p = pauli(k);
            for i in 0..2 {
                for j in 0..2 {
                    single[i][j] += -I * s * axis[k] * p[i][j];
                }
            }
        }
        (0..n).fold(CMat::identity(1 << n, 1 << n), |u, q| u * kron_single(n, q, &single))
    }

    #[test]
    fn product_state_means() {
        let down = initial_state(&InitialKind::AllGround, 4).unwrap();
        assert_eq!(collective_spin(&down), [0.0, 0.0, -4.0]);
        let up = initial_state(&InitialKind::AllExcited, 2).unwrap();
        assert_eq!(collective_spin(&up), [0.0, 0.0, 2.0]);
        let mixed = QubitState::new(CMat::identity(8, 8) / Complex64::new(8.0, 0.0), 0.0).unwrap();
        assert!(collective_spin(&mixed).iter().all(|x| x.abs() < 1e-15));
        let plus_x = initial_state(&InitialKind::Css { theta: PI / 2.0, phi: 0.0 }, 2).unwrap();
        let s = collective_spin(&plus_x);
        assert!((s[0] - 2.0).abs() < 1e-14 && s[1].abs() < 1e-14 && s[2].abs() < 1e-14);
    }

    #[test]
    fn initial_state_basics() {
        let g = initial_state(&InitialKind::AllGround, 1).unwrap();
        assert_eq!(g.rho[(1, 1)], ONE);
        assert_eq!(g.rho[(0, 0)], ZERO);
        let e = initial_state(&InitialKind::AllExcited, 3).unwrap();
        assert!(((&e.rho * &e.rho).trace() - ONE).norm() < 1e-15);
        assert_eq!(e.rho[(0, 0)], ONE);
        assert!(matches!(initial_state(&InitialKind::AllGround, 0), Err(Error::Size(0))));
    }

    #[test]
    fn vanishing_mean_spin_is_an_error() {
        let mixed = CMat::identity(4, 4) / Complex64::new(4.0, 0.0);
        assert!(matches!(wineland_xi2(&mixed, &SpinOperators::new(2)), Err(Error::UndefinedDirection(_))));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn coherent_states_have_unit_xi(n in 1usize..=6, theta in 0.0f64..PI, phi in 0.0f64..(2.0 * PI)) {
            let css = initial_state(&InitialKind::Css { theta, phi }, n).unwrap();
            let summary = wineland_xi2(&css.rho, &SpinOperators::new(n)).unwrap();
            prop_assert!((summary.xi_r_squared - 1.0).abs() < 1e-10, "{}", summary.xi_r_squared);
        }

        #[test]
        fn xi_is_invariant_under_rotation_about_mean_spin(angle in 0.0f64..(2.0 * PI)) {
            let ss = steady_state(&generator(2, 0.5, 0.25)).unwrap();
            let ops = SpinOperators::new(2);
            let before = wineland_xi2(&ss.rho, &ops).unwrap();
            let u = global_rotation(2, &Vector3::from(before.mean_s), angle);
            let rotated = &u * &ss.rho * u.adjoint();
            let after = wineland_xi2(&rotated, &ops).unwrap();
            prop_assert!((after.xi_r_squared - before.xi_r_squared).abs() < 1e-8);
        }
    }

    #[test]
    fn eigen_solve_matches_angular_scan() {
        // tilt the squeezed steady state so the frame is generic
        let ss = steady_state(&generator(3, 0.45, 0.3)).unwrap();
        let u = global_rotation(3, &Vector3::new(0.3, -0.7, 0.2), 0.9);
        let rho = &u * &ss.rho * u.adjoint();
        let ops = SpinOperators::new(3);
        let summary = wineland_xi2(&rho, &ops).unwrap();
        let (e1, e2) = perpendicular_frame(&Vector3::from(summary.mean_s));
        let cov = ops.covariance(&rho);
        let var = |t: f64| {
            let e = e1 * t.cos() + e2 * t.sin();
            e.dot(&(cov * e))
        };
        let step = PI / 720.0;
        let best = (0..720).map(|k| step * k as f64).min_by(|a, b| var(*a).total_cmp(&var(*b))).unwrap();
        assert!(var(best) >= summary.min_perp_var - 1e-12);
        // golden-section polish inside the winning grid cell
        let (mut lo, mut hi) = (best - step, best + step);
        let g = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..80 {
            let (x1, x2) = (hi - g * (hi - lo), lo + g * (hi - lo));
            if var(x1) < var(x2) {
                hi = x2;
            } else {
                lo = x1;
            }
        }
        let scan = var(0.5 * (lo + hi));
        assert!((scan - summary.min_perp_var).abs() < 1e-9, "{scan} vs {}", summary.min_perp_var);
        let t = summary.squeezing_angle;
        let e = e1 * t.cos() + e2 * t.sin();
        assert!((e.dot(&(cov * e)) - summary.min_perp_var).abs() < 1e-12);
    }

    #[test]
    fn xi_is_convention_invariant() {
        let ss = steady_state(&generator(2, 0.5, 0.25)).unwrap();
        let ops = SpinOperators::new(2);
        let pauli = wineland_xi2(&ss.rho, &ops).unwrap();
        let half = Complex64::new(0.5, 0.0);
        let spin_half = SpinOperators {
            n_qubits: 2,
            s: ops.s.clone().map(|m| m * half),
            anti: ops.anti.clone().map(|row| row.map(|m| m * half * half)),
        };
        let halved = wineland_xi2(&ss.rho, &spin_half).unwrap();
        assert!((halved.min_perp_var - pauli.min_perp_var / 4.0).abs() < 1e-12);
        assert!((halved.xi_r_squared - pauli.xi_r_squared).abs() < 1e-12);
        assert!(pauli.xi_r_squared < 1.0);
    }

    #[test]
    fn uncorrelated_excited_rate_is_one() {
        let p = PhysicalParams::default();
        let b = BathState::from_r(0.0, -FRAC_PI_2, &p).unwrap();
        for n in 1..=4 {
            let c = build_couplings(&ArrayGeometry::chain(n, 0.4).unwrap(), &p, &b, false).unwrap().uncorrelated();
            let g = build_generator(&c, &b, GeneratorMode::FourChannel).unwrap();
            let rate = relaxation_rate(&initial_state(&InitialKind::AllExcited, n).unwrap(), &g);
            assert!((rate - 1.0).abs() < 1e-12, "N={n}: {rate}");
        }
    }

    #[test]
    fn steady_state_rate_vanishes() {
        let g = generator(2, 0.5, 0.25);
        let ss = steady_state(&g).unwrap();
        assert!(relaxation_rate(&ss, &g).abs() < 1e-9);
    }

    #[test]
    fn rate_integrates_to_excitation_lost() {
        let g = generator(2, 0.4, 0.0);
        let rho0 = initial_state(&InitialKind::AllExcited, 2).unwrap();
        let grid: Vec<f64> = (0..=3000).map(|i| 0.01 * i as f64).collect();
        let traj = evolve(&rho0, &g, &grid, &EvolveOptions::default()).unwrap();
        let integral: f64 = traj
            .relaxation_rate
            .windows(2)
            .zip(grid.windows(2))
            .map(|(r, t)| 0.5 * (r[0] + r[1]) * (t[1] - t[0]))
            .sum();
        let sz0 = traj.mean_s[0][2];
        let sz_end = traj.mean_s.last().unwrap()[2];
        // R carries a 1/N
        let expected = (sz0 - sz_end) / (2.0 * 2.0);
        assert!((integral - expected).abs() < 1e-3 * expected.abs(), "{integral} vs {expected}");
    }
}
