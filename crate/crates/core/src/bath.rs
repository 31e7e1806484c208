//! Squeezed magnon reservoir: dispersion, SAW pump strength, squeezing
//! moments and the two-point magnon and stray-field correlators.
//!
//! Wavevectors are in cm⁻¹, frequencies in rad/s, times in seconds.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::quad::{integrate, QuadOptions, QuadratureResult};
use crate::numerics::bessel_j0;
use crate::params::{BathOverrides, PhysicalParams};

/// ω_k = (D/ħ)k² + 2As/ħ + γB₀.
pub fn magnon_dispersion(k: f64, params: &PhysicalParams) -> f64 {
    params.stiffness_angular() * k * k + params.gap_angular()
}

/// `(k_q, λ)` with λ = sqrt(D/(ω_q − Δ_F)) in cm and k_q = 1/λ.
pub fn resonant_wavelength(params: &PhysicalParams) -> Result<(f64, f64)> {
    let detuning = params.detuning_angular();
    if !(detuning > 0.0) {
        return Err(Error::Domain(format!(
            "ω_q ≤ Δ_F (detuning {detuning:e} rad/s): no resonant magnon"
        )));
    }
    let lambda = (params.stiffness_angular() / detuning).sqrt();
    Ok((1.0 / lambda, lambda))
}

/// Pump-induced pair-creation amplitude g = −i n L B_xy E_xy / (2 s_sat), rad/s.
pub fn saw_coupling(params: &PhysicalParams) -> Complex64 {
    let n_l = params.spin_number_density() * params.film_thickness_cm();
    let bxy = crate::params::angular(params.magnetoelastic_bxy_ghz * 1e9);
    let mag = n_l * bxy * params.strain_exy / (2.0 * params.saturation_spin_density_cm2);
    Complex64::new(0.0, -mag)
}

/// Squeezed-vacuum moments at the resonant wavevector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BathState {
    pub r: f64,
    /// Phase φ of g.
    pub phi: f64,
    /// N = sinh²r.
    pub n: f64,
    /// M = −cosh r sinh r e^{iφ}.
    pub m: Complex64,
    /// cm⁻¹.
    pub k_q: f64,
    /// cm.
    pub lambda: f64,
    /// |g|, rad/s.
    pub g_mag: f64,
}

impl BathState {
    /// Moments for a given squeezing parameter, bypassing the pump model.
    pub fn from_r(r: f64, phi: f64, params: &PhysicalParams) -> Result<Self> {
        if !(r >= 0.0 && r.is_finite()) {
            return Err(Error::Domain(format!("squeezing parameter must be finite and ≥ 0, got {r}")));
        }
        let (k_q, lambda) = resonant_wavelength(params)?;
        let (s, c) = (r.sinh(), r.cosh());
        Ok(BathState {
            r,
            phi,
            n: s * s,
            m: -Complex64::from_polar(c * s, phi),
            k_q,
            lambda,
            g_mag: params.bandwidth_angular() * (2.0 * r).tanh(),
        })
    }

    /// Bath from the configured pump, with optional r and φ overrides.
    pub fn from_params(params: &PhysicalParams, overrides: &BathOverrides) -> Result<Self> {
        let bath = match overrides.squeeze_r {
            Some(r) => BathState::from_r(r, -FRAC_PI_2, params)?,
            None => squeezing_parameter(saw_coupling(params), params.bandwidth_angular(), params)?,
        };
        Ok(match overrides.squeeze_phase_rad {
            Some(phi) => bath.with_phase(phi),
            None => bath,
        })
    }

    pub fn with_phase(self, phi: f64) -> Self {
        let (s, c) = (self.r.sinh(), self.r.cosh());
        BathState {
            phi,
            m: -Complex64::from_polar(c * s, phi),
            ..self
        }
    }

    /// Phase of the jump-operator admixture, arg M = φ + π.
    pub fn jump_phase(&self) -> f64 {
        self.phi + PI
    }
}

/// r = ½ artanh(|g|/Δ̄) with N, M and the resonant wavevector filled in.
///
/// g = 0 gives φ = −π/2, the phase a purely imaginary negative pump would have.
pub fn squeezing_parameter(g: Complex64, bandwidth: f64, params: &PhysicalParams) -> Result<BathState> {
    if !(bandwidth > 0.0) {
        return Err(Error::Domain(format!("squeezing bandwidth must be positive, got {bandwidth}")));
    }
    let g_mag = g.norm();
    if g_mag >= bandwidth {
        return Err(Error::Unstable {
            g_mag: g_mag / (2.0 * PI),
            bandwidth: bandwidth / (2.0 * PI),
        });
    }
    let phi = if g_mag > 0.0 { g.arg() } else { -FRAC_PI_2 };
    let r = 0.5 * (g_mag / bandwidth).atanh();
    let mut bath = BathState::from_r(r, phi, params)?;
    bath.g_mag = g_mag;
    Ok(bath)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MagnonKind {
    /// ⟨m m⟩
    MM,
    /// ⟨m† m†⟩
    MdMd,
    /// ⟨m† m⟩
    MdM,
    /// ⟨m m†⟩
    MMd,
}

/// Moments (N_k, M_k) of mode k: squeezed inside the flat band |ω_k − ω_q| ≤ Δ̄, vacuum outside.
pub fn band_moments(k: f64, params: &PhysicalParams, bath: &BathState) -> (f64, Complex64) {
    let offset = magnon_dispersion(k, params) - params.qubit_angular();
    if offset.abs() <= params.bandwidth_angular() {
        (bath.n, bath.m)
    } else {
        (0.0, Complex64::new(0.0, 0.0))
    }
}

/// Two-time magnon correlator of mode k without the momentum delta.
pub fn magnon_correlator(kind: MagnonKind, k: f64, t: f64, t_prime: f64, params: &PhysicalParams, bath: &BathState) -> Complex64 {
    let w = magnon_dispersion(k, params);
    let (n, m) = band_moments(k, params, bath);
    let phase = |x: f64| Complex64::from_polar(1.0, x);
    match kind {
        MagnonKind::MM => m * phase(-w * (t + t_prime)),
        MagnonKind::MdMd => m.conj() * phase(w * (t + t_prime)),
        MagnonKind::MdM => n * phase(w * (t - t_prime)),
        MagnonKind::MMd => (n + 1.0) * phase(-w * (t - t_prime)),
    }
}

/// Stray-field component pair ⟨B^μ_α B^ν_β⟩ with μ, ν ∈ {+, −}.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldKind {
    MinusPlus,
    PlusMinus,
    MinusMinus,
    PlusPlus,
}

/// One term m·e^{iω_k(p t + q t′)} of a field correlator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelatorTerm {
    pub moment: Complex64,
    pub p: f64,
    pub q: f64,
}

/// Expansion of the field correlator into stationary and pair terms for moments (N, M).
pub fn correlator_terms(kind: FieldKind, n: f64, m: Complex64) -> Vec<CorrelatorTerm> {
    let re = |x: f64| Complex64::new(x, 0.0);
    let t = |moment, p, q| CorrelatorTerm { moment, p, q };
    match kind {
        FieldKind::MinusPlus => vec![t(re(n), 1.0, -1.0), t(re(n + 1.0), -1.0, 1.0)],
        FieldKind::PlusMinus => vec![t(re(n + 1.0), -1.0, 1.0), t(re(n), 1.0, -1.0)],
        FieldKind::MinusMinus => vec![t(m, 1.0, 1.0)],
        FieldKind::PlusPlus => vec![t(m.conj(), -1.0, -1.0)],
    }
}

/// Upper cutoff of the k-integral, in units of k_q.
pub fn k_cutoff_over_kq(params: &PhysicalParams, lambda: f64) -> f64 {
    let d = params.qubit_film_distance_cm();
    if d > 0.0 {
        (1e12f64).ln() / (2.0 * d) * lambda
    } else {
        40.0
    }
}

/// Band edges in q = k/k_q.
pub fn band_edges(params: &PhysicalParams) -> (f64, f64) {
    let ratio = params.bandwidth_angular() / params.detuning_angular();
    ((1.0 - ratio).max(0.0).sqrt(), (1.0 + ratio).sqrt())
}

/// ⟨B^μ(t) B^ν(t′)⟩ between two qubits a distance ρ (cm) apart:
/// πγ²s ∫dk k³ e^{−2kd} J₀(kρ) Σ m_k e^{iω_k(pt + qt′)}, on a truncated k-range.
pub fn field_correlator(
    kind: FieldKind,
    rho: f64,
    t: f64,
    t_prime: f64,
    params: &PhysicalParams,
    bath: &BathState,
) -> Result<QuadratureResult> {
    field_correlator_with(kind, rho, t, t_prime, params, bath, &QuadOptions::default(), 1)
}

/// [`field_correlator`] with explicit quadrature options; `panels` splits the
/// range into that many equal starting panels.
#[allow(clippy::too_many_arguments)]
pub fn field_correlator_with(
    kind: FieldKind,
    rho: f64,
    t: f64,
    t_prime: f64,
    params: &PhysicalParams,
    bath: &BathState,
    opts: &QuadOptions,
    panels: usize,
) -> Result<QuadratureResult> {
    if !(rho >= 0.0 && rho.is_finite()) {
        return Err(Error::Domain(format!("separation must be ≥ 0, got {rho}")));
    }
    let lambda = bath.lambda;
    let d_over_lambda = params.qubit_film_distance_cm() / lambda;
    let u = rho / lambda;
    let q_max = k_cutoff_over_kq(params, lambda);

    let mut points = vec![0.0, q_max];
    let (lo, hi) = band_edges(params);
    points.extend([lo, hi].into_iter().filter(|&e| e > 0.0 && e < q_max));
    let panels = panels.max(1);
    points.extend((1..panels).map(|i| q_max * i as f64 / panels as f64));
    points.sort_by(f64::total_cmp);
    points.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * q_max);

    let integrand = |q: f64| {
        let k = q / lambda;
        let w = magnon_dispersion(k, params);
        let (n, m) = band_moments(k, params, bath);
        let sum: Complex64 = correlator_terms(kind, n, m)
            .iter()
            .map(|c| c.moment * Complex64::from_polar(1.0, w * (c.p * t + c.q * t_prime)))
            .sum();
        sum * (q * q * q * (-2.0 * q * d_over_lambda).exp() * bessel_j0(q * u))
    };
    let r = integrate(integrand, &points, opts)?;
    let scale = PI * params.gamma_bath * params.gamma_bath * params.surface_spin_density * lambda.powi(-4);
    Ok(QuadratureResult {
        value: r.value * scale,
        abs_error_estimate: r.abs_error_estimate * scale,
        evaluations: r.evaluations,
    })
}
