//! Inter-qubit coherent and dissipative couplings.
//!
//! [`build_couplings`] uses the closed forms in J₀ and Y₀ of ρ/λ.
//! [`coupling_oracle`] recomputes a single channel from the field
//! correlators: the τ-integrals are done analytically
//! (∫₀^∞ e^{−ixτ} dτ = πδ(x) − i P/x), the k-integral numerically.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::bath::{band_edges, band_moments, correlator_terms, k_cutoff_over_kq, magnon_dispersion, BathState, FieldKind};
use crate::error::{Error, Result};
use crate::numerics::bessel::EULER_GAMMA;
use crate::numerics::quad::{integrate, QuadOptions};
use crate::numerics::{bessel_j0, bessel_y0};
use crate::params::{ArrayGeometry, PhysicalParams};

/// Coupling matrices in Hz, indexed by qubit.
///
/// The dissipator is Σ Γ_{αβ}(A_α ρ B_β − ½{B_β A_α, ρ}) with
/// (A, B) = (σ⁻, σ⁺) for Γ⁺⁻, (σ⁺, σ⁻) for Γ⁻⁺, (σ⁻, σ⁻) for Γ⁺⁺ and
/// (σ⁺, σ⁺) for Γ⁻⁻. In the operator basis (σ⁻₁…σ⁻ₙ, σ⁺₁…σ⁺ₙ) this is the
/// Kossakowski matrix [[Γ⁺⁻, Γ⁺⁺], [Γ⁻⁻, Γ⁻⁺]].
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingSet {
    /// Coefficient of σ⁺_α σ⁻_β in H_eff; zero diagonal.
    pub j: DMatrix<f64>,
    /// Absorption, ∝ N.
    pub gamma_mp: DMatrix<f64>,
    /// Emission, ∝ N + 1.
    pub gamma_pm: DMatrix<f64>,
    /// Pair emission, ∝ M*.
    pub gamma_pp: DMatrix<Complex64>,
    /// Pair absorption, ∝ M.
    pub gamma_mm: DMatrix<Complex64>,
    pub nu: f64,
    /// π(ω_q − Δ_F)/Δ₀.
    pub prefactor: f64,
    /// Vacuum single-qubit rate νπ(ω_q − Δ_F)/Δ₀, the time unit of the dynamics.
    pub gamma0: f64,
    pub geometry_hash: u64,
}

/// FNV-1a over the coordinate bits; stable across platforms and toolchains.
pub fn geometry_hash(geometry: &ArrayGeometry) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for v in geometry.positions.iter().flatten() {
        for byte in v.to_bits().to_le_bytes() {
            h ^= byte as u64;
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
    }
    h
}

/// Closed-form couplings for the given geometry (positions in units of λ).
///
/// With `finite_d` every channel carries the extra factor e^{−2d/λ}.
pub fn build_couplings(geometry: &ArrayGeometry, params: &PhysicalParams, bath: &BathState, finite_d: bool) -> Result<CouplingSet> {
    geometry.validate()?;
    let n = geometry.len();
    let prefactor = params.coupling_prefactor();
    let gamma0 = params.nu_hz * prefactor;
    let attenuation = if finite_d {
        (-2.0 * params.qubit_film_distance_cm() / bath.lambda).exp()
    } else {
        1.0
    };
    let scale = gamma0 * attenuation;

    let mut j = DMatrix::zeros(n, n);
    let mut j0 = DMatrix::zeros(n, n);
    for a in 0..n {
        for b in 0..n {
            if a == b {
                j0[(a, b)] = 1.0;
            } else {
                let u = geometry.distance(a, b);
                j0[(a, b)] = bessel_j0(u);
                j[(a, b)] = -0.5 * scale * bessel_y0(u)?;
            }
        }
    }
    Ok(CouplingSet {
        j,
        gamma_mp: &j0 * (scale * bath.n),
        gamma_pm: &j0 * (scale * (bath.n + 1.0)),
        gamma_pp: j0.map(|x| bath.m.conj() * (scale * x)),
        gamma_mm: j0.map(|x| bath.m * (scale * x)),
        nu: params.nu_hz,
        prefactor,
        gamma0,
        geometry_hash: geometry_hash(geometry),
    })
}

impl CouplingSet {
    pub fn n_qubits(&self) -> usize {
        self.j.nrows()
    }

    /// The same bath with every cross-coupling removed: the a/λ → ∞ reference.
    pub fn uncorrelated(&self) -> CouplingSet {
        fn diag<T: nalgebra::Scalar + Copy>(m: &DMatrix<T>, zero: T) -> DMatrix<T> {
            DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| if i == j { m[(i, j)] } else { zero })
        }
        let cz = Complex64::new(0.0, 0.0);
        CouplingSet {
            j: diag(&self.j, 0.0),
            gamma_mp: diag(&self.gamma_mp, 0.0),
            gamma_pm: diag(&self.gamma_pm, 0.0),
            gamma_pp: diag(&self.gamma_pp, cz),
            gamma_mm: diag(&self.gamma_mm, cz),
            ..self.clone()
        }
    }

    /// 2N×2N Kossakowski matrix in the (σ⁻, σ⁺) operator basis.
    pub fn kossakowski(&self) -> DMatrix<Complex64> {
        let n = self.n_qubits();
        let re = |x: f64| Complex64::new(x, 0.0);
        DMatrix::from_fn(2 * n, 2 * n, |i, j| match (i < n, j < n) {
            (true, true) => re(self.gamma_pm[(i, j)]),
            (true, false) => self.gamma_pp[(i, j - n)],
            (false, true) => self.gamma_mm[(i - n, j)],
            (false, false) => re(self.gamma_mp[(i - n, j - n)]),
        })
    }

    /// Checks symmetry, Γ⁺⁺ = (Γ⁻⁻)*, the (N+1)/N emission/absorption ratio,
    /// the zero J diagonal and positivity of the Kossakowski matrix.
    pub fn validate(&self) -> Result<()> {
        let n = self.n_qubits();
        let scale = self.gamma_pm.amax().max(self.j.amax()).max(f64::MIN_POSITIVE);
        let tol = 1e-12 * scale;
        let fail = |what: String| Err(Error::Invariant { t: 0.0, what });
        for a in 0..n {
            if self.j[(a, a)] != 0.0 {
                return fail(format!("J has nonzero diagonal entry at {a}"));
            }
            for b in 0..n {
                if (self.j[(a, b)] - self.j[(b, a)]).abs() > tol
                    || (self.gamma_pm[(a, b)] - self.gamma_pm[(b, a)]).abs() > tol
                    || (self.gamma_mp[(a, b)] - self.gamma_mp[(b, a)]).abs() > tol
                    || (self.gamma_pp[(a, b)] - self.gamma_pp[(b, a)]).norm() > tol
                {
                    return fail(format!("coupling matrices not symmetric at ({a}, {b})"));
                }
                if (self.gamma_pp[(a, b)] - self.gamma_mm[(a, b)].conj()).norm() > tol {
                    return fail(format!("Γ⁺⁺ ≠ conj(Γ⁻⁻) at ({a}, {b})"));
                }
                // Γ⁺⁻ N = Γ⁻⁺ (N + 1) for a common N
                let (pm, mp) = (self.gamma_pm[(a, b)], self.gamma_mp[(a, b)]);
                let (pm0, mp0) = (self.gamma_pm[(a, a)], self.gamma_mp[(a, a)]);
                if (pm * mp0 - mp * pm0).abs() > 1e-12 * pm0 * pm0.max(f64::MIN_POSITIVE) + tol * tol {
                    return fail(format!("emission/absorption ratio differs at ({a}, {b})"));
                }
            }
        }
        let k = self.kossakowski();
        let norm = k.iter().map(|z| z.norm()).fold(0.0, f64::max) * (2 * n) as f64;
        let min_eig = SymmetricEigen::new(k).eigenvalues.min();
        if min_eig < -1e-10 * norm {
            return fail(format!("dissipator not positive: Kossakowski eigenvalue {min_eig:.3e}"));
        }
        Ok(())
    }
}

/// Channel selector for [`coupling_oracle`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Channel {
    /// J = J⁺⁻ + J⁻⁺.
    J,
    /// Pair Hamiltonian term; cancels identically.
    JPlusPlus,
    JMinusMinus,
    GammaMinusPlus,
    GammaPlusMinus,
    GammaPlusPlus,
    GammaMinusMinus,
}

impl Channel {
    fn field_kind(self) -> FieldKind {
        match self {
            Channel::GammaMinusPlus => FieldKind::MinusPlus,
            Channel::GammaPlusMinus | Channel::J => FieldKind::PlusMinus,
            Channel::GammaPlusPlus | Channel::JPlusPlus => FieldKind::PlusPlus,
            Channel::GammaMinusMinus | Channel::JMinusMinus => FieldKind::MinusMinus,
        }
    }

    // Qubit frequencies (ω^μ, ω^ν) in units of ω_q.
    fn signs(kind: FieldKind) -> (f64, f64) {
        match kind {
            FieldKind::MinusPlus => (-1.0, 1.0),
            FieldKind::PlusMinus => (1.0, -1.0),
            FieldKind::MinusMinus => (-1.0, -1.0),
            FieldKind::PlusPlus => (1.0, 1.0),
        }
    }
}

// Numerical pieces of ∫dk F(k) m(k) I(s·ω_k + c), F = k³ e^{−2kd} J₀(kρ).
struct KIntegral<'a> {
    params: &'a PhysicalParams,
    bath: &'a BathState,
    u: f64,
    d_over_lambda: f64,
    opts: QuadOptions,
}

impl KIntegral<'_> {
    /// Resonant wavevector from bisection on ω_k = ω_q, independent of the closed-form k_q.
    fn shell(&self) -> (f64, f64) {
        let target = self.params.qubit_angular();
        let f = |k: f64| magnon_dispersion(k, self.params) - target;
        let (mut lo, mut hi) = (0.0, 1.0);
        while f(hi) < 0.0 {
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-15 * hi {
                break;
            }
        }
        let k = 0.5 * (lo + hi);
        let h = 1e-4 * k;
        let slope = (magnon_dispersion(k + h, self.params) - magnon_dispersion(k - h, self.params)) / (2.0 * h);
        (k, slope)
    }

    /// π ∫dk F(k) m(k) δ(ω_k − ω_q) = π F(k*) m(k*)/ω′(k*).
    fn delta<M: Fn(f64) -> Complex64>(&self, moment: M) -> Complex64 {
        let (k, slope) = self.shell();
        let f = k.powi(3) * (-2.0 * k * self.params.qubit_film_distance_cm()).exp() * bessel_j0(k * self.u * self.bath.lambda);
        moment(k) * (PI * f / slope.abs())
    }

    /// P∫dk F(k) m(k)/(ω_k − ω_q), with m split into its out-of-band value
    /// and the in-band excess.
    fn principal_value<M: Fn(f64) -> Complex64>(&self, moment: M) -> Result<Complex64> {
        let lambda = self.bath.lambda;
        let dprime = self.params.stiffness_angular();
        let (lo, hi) = band_edges(self.params);
        let m_out = moment(3.0 / lambda);
        let m_in = moment(1.0 / lambda);
        let full = self.pv_full()?;
        let excess = if (m_in - m_out).norm() > 0.0 { self.pv_band(lo, hi)? } else { 0.0 };
        // dk/(ω_k − ω_q) F = λ⁻²/D′ · q³ e^{−2qδ} J₀(qu)/(q² − 1) dq
        Ok((m_out * full + (m_in - m_out) * excess) / (lambda * lambda * dprime))
    }

    fn g(&self, q: f64) -> f64 {
        q * q * q * (-2.0 * q * self.d_over_lambda).exp() * bessel_j0(q * self.u)
    }

    fn real_integral<F: Fn(f64) -> f64>(&self, f: F, points: &[f64]) -> Result<f64> {
        Ok(integrate(|q| Complex64::new(f(q), 0.0), points, &self.opts)?.value.re)
    }

    /// P∫₀^∞ q³ e^{−2qδ} J₀(qu)/(q² − 1) dq.
    fn pv_full(&self) -> Result<f64> {
        let u = self.u;
        if self.d_over_lambda > 0.0 {
            // singular part on [0, 2], symmetric about q = 1 so the log term vanishes
            let f = |q: f64| self.g(q) / (q + 1.0);
            let f1 = f(1.0);
            let near = self.real_integral(|q| (f(q) - f1) / (q - 1.0), &[0.0, 1.0, 2.0])?;
            let q_max = k_cutoff_over_kq(self.params, self.bath.lambda).max(4.0);
            let far = self.real_integral(|q| self.g(q) / (q * q - 1.0), &[2.0, q_max])?;
            return Ok(near + far);
        }
        if !(u > 0.0) {
            return Err(Error::Domain("principal value at ρ = 0, d = 0 diverges".into()));
        }
        // q³/(q²−1) = q + q/(q²−1) and ∫₀^∞ q J₀(qu) dq = 0 (Abel) for u > 0
        let f = |q: f64| q * bessel_j0(q * u) / (q + 1.0);
        let f1 = f(1.0);
        let near = self.real_integral(|q| (f(q) - f1) / (q - 1.0), &[0.0, 1.0, 2.0])?;
        // ∫₂^∞ J₀(qu)/q dq = ∫₀^{2u} (1 − J₀(y))/y dy − ln u − γ_E
        let small = self.real_integral(|y| if y == 0.0 { 0.0 } else { (1.0 - bessel_j0(y)) / y }, &[0.0, 2.0 * u])?;
        let tail_log = small - u.ln() - EULER_GAMMA;
        let q_max = 2000.0;
        let breaks: Vec<f64> = (0..=40).map(|i| 2.0 + (q_max - 2.0) * i as f64 / 40.0).collect();
        let tail_rest = self.real_integral(|q| bessel_j0(q * u) / (q * (q * q - 1.0)), &breaks)?;
        Ok(near + tail_log + tail_rest)
    }

    /// P∫_lo^hi q³ e^{−2qδ} J₀(qu)/(q² − 1) dq.
    fn pv_band(&self, lo: f64, hi: f64) -> Result<f64> {
        let f = |q: f64| self.g(q) / (q + 1.0);
        let f1 = f(1.0);
        let smooth = self.real_integral(|q| (f(q) - f1) / (q - 1.0), &[lo, 1.0, hi])?;
        Ok(smooth + f1 * ((hi - 1.0) / (1.0 - lo)).ln())
    }
}

// Σ over correlator terms of the two τ-integrals. With a = pω_k + ω^μ and
// b = qω_k + ω^ν the first integral gives I(b) and the second I(a); the
// Hamiltonian part is (i/2)[I(b) − I(a)], the dissipative part I(b) + I(a).
fn tau_integrals(ki: &KIntegral, kind: FieldKind, hamiltonian: bool) -> Result<Complex64> {
    let (wm, wn) = Channel::signs(kind);
    let i = Complex64::new(0.0, 1.0);
    let zero = Complex64::new(0.0, 0.0);
    let skeleton = correlator_terms(kind, 0.0, zero);
    let mut total = zero;
    for (j, term) in skeleton.iter().enumerate() {
        let moment = |k: f64| {
            let (n, m) = band_moments(k, ki.params, ki.bath);
            correlator_terms(kind, n, m)[j].moment
        };
        // In Γ the principal parts of I(b) and I(a) cancel for stationary
        // terms (a = −b) and are dropped by the secular approximation for
        // pair terms, so only the on-shell parts are evaluated.
        let keep_pv = hamiltonian;
        // ∫dk F m I(s ω_k + c ω_q); s ω_k + c ω_q = s(ω_k − ω_q) when resonant
        let piece = |s: f64, c: f64| -> Result<Complex64> {
            if s * c > 0.0 {
                return Ok(zero);
            }
            let pv = if keep_pv { ki.principal_value(moment)? * (-i * s) } else { zero };
            Ok(ki.delta(moment) + pv)
        };
        let ib = piece(term.q, wn)?;
        let ia = piece(term.p, wm)?;
        total += if hamiltonian { (ib - ia) * (i * 0.5) } else { ib + ia };
    }
    Ok(total)
}

/// Channel strength in Hz from the field correlators, for comparison with [`build_couplings`].
///
/// Counter-rotating terms are dropped; for pair terms only the on-shell
/// (δ) part enters the Γ channels. The field-noise amplitude is expressed
/// through ν so that results are directly comparable with the closed forms.
pub fn coupling_oracle(channel: Channel, rho_over_lambda: f64, params: &PhysicalParams, bath: &BathState) -> Result<Complex64> {
    if !(rho_over_lambda >= 0.0 && rho_over_lambda.is_finite()) {
        return Err(Error::Domain(format!("separation must be ≥ 0, got {rho_over_lambda}")));
    }
    let dprime = params.stiffness_angular();
    let amplitude = params.nu_hz * dprime * dprime / params.zero_field_angular();
    let ki = KIntegral {
        params,
        bath,
        u: rho_over_lambda,
        d_over_lambda: params.qubit_film_distance_cm() / bath.lambda,
        opts: QuadOptions {
            abs_tol: 1e-13,
            rel_tol: 1e-11,
            max_evaluations: 4_000_000,
        },
    };

    let total = match channel {
        Channel::J => tau_integrals(&ki, FieldKind::PlusMinus, true)? + tau_integrals(&ki, FieldKind::MinusPlus, true)?,
        Channel::JPlusPlus | Channel::JMinusMinus => tau_integrals(&ki, channel.field_kind(), true)?,
        _ => tau_integrals(&ki, channel.field_kind(), false)?,
    };
    Ok(total * amplitude)
}
