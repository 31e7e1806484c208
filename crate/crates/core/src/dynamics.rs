//! Master-equation generator, time evolution and steady states.
//!
//! Basis conventions: single-qubit index 0 is |↑⟩, 1 is |↓⟩; qubit 0 is the
//! most significant bit. Time is Γ₀t throughout, so every rate in the
//! generator is divided by the vacuum rate Γ₀.

use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::bath::BathState;
use crate::couplings::CouplingSet;
use crate::error::{Error, Result};
use crate::numerics::linalg::{eig_smallest, norm1};
use crate::numerics::ode::{integrate_ode, OdeOptions};
use crate::observables::{relaxation_rate_of, wineland_xi2, SpinOperators, SpinSummary};
use crate::params::MAX_QUBITS;

pub type CMat = DMatrix<Complex64>;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// Density matrix of N qubits at dimensionless time Γ₀t.
#[derive(Debug, Clone, PartialEq)]
pub struct QubitState {
    pub rho: CMat,
    pub n_qubits: usize,
    pub time: f64,
}

/// Deviations of a density matrix from the physical set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateDiagnostics {
    pub trace_error: f64,
    pub hermiticity_error: f64,
    pub min_eigenvalue: f64,
}

pub const HERMITICITY_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-9;
pub const POSITIVITY_TOL: f64 = 1e-8;

impl QubitState {
    pub fn new(rho: CMat, time: f64) -> Result<Self> {
        let dim = rho.nrows();
        if rho.ncols() != dim || !dim.is_power_of_two() || dim < 2 {
            return Err(Error::Domain(format!("density matrix must be 2^N × 2^N, got {}×{}", dim, rho.ncols())));
        }
        let n_qubits = dim.trailing_zeros() as usize;
        if n_qubits > MAX_QUBITS {
            return Err(Error::Size(n_qubits));
        }
        Ok(QubitState { rho, n_qubits, time })
    }

    pub fn diagnostics(&self) -> StateDiagnostics {
        let rho = &self.rho;
        let trace_error = (rho.trace() - ONE).norm();
        let hermiticity_error = (rho - rho.adjoint()).camax();
        let hermitian = (rho + rho.adjoint()) * Complex64::new(0.5, 0.0);
        let min_eigenvalue = hermitian.symmetric_eigenvalues().min();
        StateDiagnostics {
            trace_error,
            hermiticity_error,
            min_eigenvalue,
        }
    }

    /// Errors if the state is outside the trace, Hermiticity or positivity bounds.
    pub fn check(&self) -> Result<StateDiagnostics> {
        let d = self.diagnostics();
        let what = if d.trace_error > TRACE_TOL {
            Some(format!("|Tr ρ − 1| = {:.3e}", d.trace_error))
        } else if d.hermiticity_error > HERMITICITY_TOL {
            Some(format!("‖ρ − ρ†‖ = {:.3e}", d.hermiticity_error))
        } else if d.min_eigenvalue < -POSITIVITY_TOL {
            Some(format!("min eigenvalue {:.3e}", d.min_eigenvalue))
        } else {
            None
        };
        match what {
            Some(what) => Err(Error::Invariant { t: self.time, what }),
            None => Ok(d),
        }
    }

    /// ½‖ρ − σ‖₁.
    pub fn trace_distance(&self, other: &QubitState) -> f64 {
        let diff = &self.rho - &other.rho;
        let h = (&diff + diff.adjoint()) * Complex64::new(0.5, 0.0);
        0.5 * h.symmetric_eigenvalues().iter().map(|x| x.abs()).sum::<f64>()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Op {
    Lower,
    Raise,
}

fn mask(n: usize, qubit: usize) -> usize {
    1 << (n - 1 - qubit)
}

/// out += c · op_q · x
fn add_left(out: &mut CMat, c: Complex64, op: Op, m: usize, x: &CMat) {
    let dim = x.nrows();
    for j in 0..dim {
        for i in 0..dim {
            // σ⁻ = |↓⟩⟨↑| sets the bit, σ⁺ clears it
            let src = match op {
                Op::Lower if i & m != 0 => i ^ m,
                Op::Raise if i & m == 0 => i | m,
                _ => continue,
            };
            out[(i, j)] += c * x[(src, j)];
        }
    }
}

/// out += c · x · op_q
fn add_right(out: &mut CMat, c: Complex64, op: Op, m: usize, x: &CMat) {
    let dim = x.nrows();
    for j in 0..dim {
        let src = match op {
            Op::Lower if j & m == 0 => j | m,
            Op::Raise if j & m != 0 => j ^ m,
            _ => continue,
        };
        for i in 0..dim {
            out[(i, j)] += c * x[(i, src)];
        }
    }
}

/// Linear combination Σ c·op_q of single-qubit ladder operators.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LadderSum(pub Vec<(usize, Op, Complex64)>);

impl LadderSum {
    fn adjoint(&self) -> LadderSum {
        LadderSum(
            self.0
                .iter()
                .map(|&(q, op, c)| (q, if op == Op::Lower { Op::Raise } else { Op::Lower }, c.conj()))
                .collect(),
        )
    }

    fn apply_left(&self, n: usize, x: &CMat) -> CMat {
        let mut out = CMat::zeros(x.nrows(), x.ncols());
        for &(q, op, c) in &self.0 {
            add_left(&mut out, c, op, mask(n, q), x);
        }
        out
    }

    fn apply_right(&self, n: usize, x: &CMat) -> CMat {
        let mut out = CMat::zeros(x.nrows(), x.ncols());
        for &(q, op, c) in &self.0 {
            add_right(&mut out, c, op, mask(n, q), x);
        }
        out
    }

    pub fn dense(&self, n: usize) -> CMat {
        let dim = 1 << n;
        self.apply_left(n, &CMat::identity(dim, dim))
    }
}

/// One dissipative term A ρ B − ½{BA, ρ}.
#[derive(Debug, Clone, PartialEq)]
pub struct Sandwich {
    pub left: LadderSum,
    pub right: LadderSum,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeneratorMode {
    /// Emission, absorption and the two pair channels, each with its own matrix.
    FourChannel,
    /// Σ κJ₀ (C_α ρ C_β† − ½{C_β†C_α, ρ}) with C = cosh r σ⁻ + sinh r e^{iθ} σ⁺,
    /// diagonalized into collective jump operators.
    JumpOperator,
}

/// Lindblad generator in units of Γ₀.
#[derive(Debug)]
pub struct Generator {
    pub n_qubits: usize,
    pub mode: GeneratorMode,
    /// H_eff/Γ₀ = Σ_{α≠β} (J_{αβ}/Γ₀) σ⁺_α σ⁻_β.
    pub h_eff: CMat,
    pub dissipators: Vec<Sandwich>,
    // −iH − ½ Σ BA
    k_eff: CMat,
    liouvillian: OnceLock<CMat>,
}

impl Clone for Generator {
    fn clone(&self) -> Self {
        Generator {
            n_qubits: self.n_qubits,
            mode: self.mode,
            h_eff: self.h_eff.clone(),
            dissipators: self.dissipators.clone(),
            k_eff: self.k_eff.clone(),
            liouvillian: OnceLock::new(),
        }
    }
}

type Coefficient<'a> = Box<dyn Fn(usize, usize) -> Complex64 + 'a>;

fn single(q: usize, op: Op, c: Complex64) -> LadderSum {
    LadderSum(vec![(q, op, c)])
}

/// Generator for the given couplings and bath.
///
/// The jump phase is θ = arg M = φ + π, which makes the pair terms of the
/// jump form equal the Γ⁺⁺ ∝ M* and Γ⁻⁻ ∝ M channels.
pub fn build_generator(couplings: &CouplingSet, bath: &BathState, mode: GeneratorMode) -> Result<Generator> {
    let n = couplings.n_qubits();
    if n == 0 || n > MAX_QUBITS {
        return Err(Error::Size(n));
    }
    let g0 = couplings.gamma0;
    let re = |x: f64| Complex64::new(x / g0, 0.0);

    let mut h = CMat::zeros(1 << n, 1 << n);
    for a in 0..n {
        for b in 0..n {
            let jab = couplings.j[(a, b)];
            if a != b && jab != 0.0 {
                let lower = single(b, Op::Lower, ONE).dense(n);
                add_left(&mut h, re(jab), Op::Raise, mask(n, a), &lower);
            }
        }
    }

    let mut dissipators = Vec::new();
    match mode {
        GeneratorMode::FourChannel => {
            let channels: [(Op, Op, Coefficient); 4] = [
                (Op::Lower, Op::Raise, Box::new(|a, b| re(couplings.gamma_pm[(a, b)]))),
                (Op::Raise, Op::Lower, Box::new(|a, b| re(couplings.gamma_mp[(a, b)]))),
                (Op::Lower, Op::Lower, Box::new(|a, b| couplings.gamma_pp[(a, b)] / g0)),
                (Op::Raise, Op::Raise, Box::new(|a, b| couplings.gamma_mm[(a, b)] / g0)),
            ];
            for (left, right, coeff) in &channels {
                for a in 0..n {
                    let terms: Vec<_> = (0..n).map(|b| (b, *right, coeff(a, b))).filter(|t| t.2 != ZERO).collect();
                    if !terms.is_empty() {
                        dissipators.push(Sandwich {
                            left: single(a, *left, ONE),
                            right: LadderSum(terms),
                        });
                    }
                }
            }
        }
        GeneratorMode::JumpOperator => {
            // Γ⁺⁻ = (N + 1)·κνJ₀ fixes the weight matrix
            let weights = couplings.gamma_pm.map(|x| x / (g0 * (bath.n + 1.0)));
            let eig = SymmetricEigen::new(weights);
            let c = Complex64::new(bath.r.cosh(), 0.0);
            let s = Complex64::from_polar(bath.r.sinh(), bath.jump_phase());
            for (k, &w) in eig.eigenvalues.iter().enumerate() {
                if w == 0.0 {
                    continue;
                }
                let mut ops = Vec::with_capacity(2 * n);
                for a in 0..n {
                    let u = Complex64::new(eig.eigenvectors[(a, k)], 0.0);
                    ops.push((a, Op::Lower, u * c));
                    if s != ZERO {
                        ops.push((a, Op::Raise, u * s));
                    }
                }
                let jump = LadderSum(ops);
                let mut right = jump.adjoint();
                for t in &mut right.0 {
                    t.2 *= w;
                }
                dissipators.push(Sandwich { left: jump, right });
            }
        }
    }

    let dim = 1 << n;
    let mut g = CMat::zeros(dim, dim);
    for d in &dissipators {
        g += d.right.dense(n) * d.left.dense(n);
    }
    let k_eff = &h * Complex64::new(0.0, -1.0) - g * Complex64::new(0.5, 0.0);
    Ok(Generator {
        n_qubits: n,
        mode,
        h_eff: h,
        dissipators,
        k_eff,
        liouvillian: OnceLock::new(),
    })
}

impl Generator {
    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    /// L(ρ) in units of Γ₀.
    pub fn apply(&self, rho: &CMat) -> CMat {
        let n = self.n_qubits;
        let mut out = &self.k_eff * rho + rho * self.k_eff.adjoint();
        for d in &self.dissipators {
            let x = d.right.apply_right(n, rho);
            for &(q, op, c) in &d.left.0 {
                add_left(&mut out, c, op, mask(n, q), &x);
            }
        }
        out
    }

    /// Vectorized Liouvillian acting on column-major vec(ρ).
    pub fn liouvillian(&self) -> &CMat {
        self.liouvillian.get_or_init(|| {
            let dim = self.dim();
            let mut l = CMat::zeros(dim * dim, dim * dim);
            let mut basis = CMat::zeros(dim, dim);
            for j in 0..dim {
                for i in 0..dim {
                    basis[(i, j)] = ONE;
                    let col = self.apply(&basis);
                    l.column_mut(i + j * dim).copy_from_slice(col.as_slice());
                    basis[(i, j)] = ZERO;
                }
            }
            l
        })
    }
}

/// Steady state from the null vector of the Liouvillian.
pub fn steady_state(generator: &Generator) -> Result<QubitState> {
    let l = generator.liouvillian();
    let eig = eig_smallest(l)?;
    let scale = norm1(l);
    if let Some(second) = eig.next_value {
        let threshold = 1e-8 * scale;
        if second.norm() < threshold {
            return Err(Error::AmbiguousSteadyState {
                second: second.norm(),
                threshold,
            });
        }
    }
    let dim = generator.dim();
    let mut rho = CMat::from_column_slice(dim, dim, eig.vector.as_slice());
    let tr = rho.trace();
    if tr.norm() < 1e-12 {
        return Err(Error::NonConvergence("null vector has zero trace".into()));
    }
    rho /= tr;
    let rho = (&rho + rho.adjoint()) * Complex64::new(0.5, 0.0);
    let state = QubitState::new(rho, f64::INFINITY)?;
    state.check()?;
    Ok(state)
}

#[derive(Debug, Clone)]
pub struct EvolveOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Keep every density matrix, not just the last one.
    pub keep_states: bool,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        EvolveOptions {
            rtol: 1e-8,
            atol: 1e-10,
            keep_states: false,
        }
    }
}

/// Per-time-point record of an evolution.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// `None` where the mean spin vanishes.
    pub spin: Vec<Option<SpinSummary>>,
    pub mean_s: Vec<[f64; 3]>,
    /// −½ d⟨S_z⟩/d(Γ₀t) / N.
    pub relaxation_rate: Vec<f64>,
    pub diagnostics: Vec<StateDiagnostics>,
    pub states: Vec<CMat>,
    pub final_state: QubitState,
}

impl Trajectory {
    /// 1/ξ_R², or `None` where undefined.
    pub fn inverse_xi2(&self) -> Vec<Option<f64>> {
        self.spin.iter().map(|s| s.map(|s| 1.0 / s.xi_r_squared)).collect()
    }

    /// CSV with `#` comment lines, then one row per time point.
    pub fn to_csv(&self, comments: &[String]) -> String {
        use std::fmt::Write as _;
        let mut s = String::new();
        for c in comments {
            let _ = writeln!(s, "# {c}");
        }
        let _ = writeln!(s, "# units: t in Γ₀t; rate normalized by N·Γ₀; S in Pauli convention");
        let _ = writeln!(s, "t,inv_xi2,xi2,Sx,Sy,Sz,rate,min_eig,trace_err,herm_err");
        for (i, t) in self.times.iter().enumerate() {
            let (inv, xi) = match self.spin[i] {
                Some(sp) => (format!("{:.12e}", 1.0 / sp.xi_r_squared), format!("{:.12e}", sp.xi_r_squared)),
                None => (String::new(), String::new()),
            };
            let [x, y, z] = self.mean_s[i];
            let d = self.diagnostics[i];
            let _ = writeln!(
                s,
                "{t:.6},{inv},{xi},{x:.12e},{y:.12e},{z:.12e},{:.12e},{:.6e},{:.6e},{:.6e}",
                self.relaxation_rate[i], d.min_eigenvalue, d.trace_error, d.hermiticity_error
            );
        }
        s
    }
}

/// Integrate the master equation on `t_grid` (units of Γ₀t), validating every output state.
pub fn evolve(rho0: &QubitState, generator: &Generator, t_grid: &[f64], opts: &EvolveOptions) -> Result<Trajectory> {
    if rho0.n_qubits != generator.n_qubits {
        return Err(Error::Domain(format!(
            "state has {} qubits, generator {}",
            rho0.n_qubits, generator.n_qubits
        )));
    }
    rho0.check()?;
    let dim = generator.dim();
    let y0 = DVector::from_column_slice(rho0.rho.as_slice());
    let rhs = |_: f64, y: &DVector<Complex64>| {
        let rho = CMat::from_column_slice(dim, dim, y.as_slice());
        DVector::from_column_slice(generator.apply(&rho).as_slice())
    };
    let (ys, stats) = integrate_ode(rhs, &y0, t_grid, &OdeOptions::new(opts.rtol, opts.atol))?;
    log::debug!("evolve: {} accepted, {} rejected steps", stats.accepted, stats.rejected);

    let ops = SpinOperators::new(generator.n_qubits);
    let mut traj = Trajectory {
        times: t_grid.to_vec(),
        spin: Vec::with_capacity(ys.len()),
        mean_s: Vec::with_capacity(ys.len()),
        relaxation_rate: Vec::with_capacity(ys.len()),
        diagnostics: Vec::with_capacity(ys.len()),
        states: Vec::new(),
        final_state: rho0.clone(),
    };
    for (y, &t) in ys.iter().zip(t_grid) {
        let state = QubitState::new(CMat::from_column_slice(dim, dim, y.as_slice()), t)?;
        let diag = state.check()?;
        traj.mean_s.push(ops.mean(&state.rho));
        traj.spin.push(wineland_xi2(&state.rho, &ops).ok());
        traj.relaxation_rate.push(relaxation_rate_of(&state.rho, generator, &ops));
        traj.diagnostics.push(diag);
        if opts.keep_states {
            traj.states.push(state.rho.clone());
        }
        traj.final_state = state;
    }
    Ok(traj)
}
