//! Physical constants, unit conventions and the key/value configuration file.
//!
//! Values are stored in the units the config file uses for its canonical
//! keys (GHz, MHz, nm, mT, erg·cm², ...). Every conversion to the angular
//! CGS quantities used by the physics goes through the accessors on
//! [`PhysicalParams`]; cyclic frequencies become angular via [`angular`].

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

/// Reduced Planck constant, erg·s.
pub const HBAR_ERG_S: f64 = 1.054_571_817e-27;

/// Largest array handled by the dense solvers.
pub const MAX_QUBITS: usize = 8;

/// Cyclic frequency (Hz) to angular frequency (rad/s).
#[inline]
pub fn angular(hz: f64) -> f64 {
    2.0 * PI * hz
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalParams {
    /// D, erg·cm².
    pub spin_stiffness: f64,
    /// s, G²·cm·s as quoted for YIG; only enters the field-noise amplitude.
    pub surface_spin_density: f64,
    /// 2As, erg·cm² as quoted; divided by ħ to give the anisotropy part of the gap.
    pub anisotropy_gap: f64,
    pub film_thickness_nm: f64,
    pub lattice_const_angstrom: f64,
    pub magnetoelastic_bxy_ghz: f64,
    pub bias_field_mt: f64,
    /// γ of the bath, rad/(s·G).
    pub gamma_bath: f64,
    /// γ̃ of the qubits, rad/(s·G).
    pub gamma_qubit: f64,
    pub zero_field_splitting_ghz: f64,
    pub strain_exy: f64,
    pub squeeze_bandwidth_mhz: f64,
    pub qubit_film_distance_nm: f64,
    pub nu_hz: f64,
    /// ω_q − Δ_F, MHz.
    pub detuning_mhz: f64,
    /// Saturation spin density entering g = −i n L B_xy E_xy / (2 s_sat), spins per cm².
    pub saturation_spin_density_cm2: f64,
}

impl Default for PhysicalParams {
    fn default() -> Self {
        PhysicalParams {
            spin_stiffness: 5.1e-28,
            surface_spin_density: 1.2e-10,
            anisotropy_gap: 3.6e-18,
            film_thickness_nm: 20.0,
            lattice_const_angstrom: 12.3,
            magnetoelastic_bxy_ghz: 1988.0,
            bias_field_mt: 40.0,
            gamma_bath: 1.760_859_6e7,
            gamma_qubit: 1.760_859_6e7,
            zero_field_splitting_ghz: 2.87,
            strain_exy: 1e-4,
            squeeze_bandwidth_mhz: 0.25,
            qubit_film_distance_nm: 10.0,
            nu_hz: 75.0,
            detuning_mhz: 100.0,
            saturation_spin_density_cm2: 1.068e18,
        }
    }
}

impl PhysicalParams {
    /// D/ħ in cm²·rad/s.
    pub fn stiffness_angular(&self) -> f64 {
        self.spin_stiffness / HBAR_ERG_S
    }

    /// Spin-wave gap Δ_F = 2As/ħ + γB₀, rad/s.
    pub fn gap_angular(&self) -> f64 {
        self.anisotropy_gap / HBAR_ERG_S + self.gamma_bath * self.bias_field_gauss()
    }

    /// ω_q − Δ_F, rad/s.
    pub fn detuning_angular(&self) -> f64 {
        angular(self.detuning_mhz * 1e6)
    }

    /// ω_q = Δ_F + (ω_q − Δ_F), rad/s.
    pub fn qubit_angular(&self) -> f64 {
        self.gap_angular() + self.detuning_angular()
    }

    /// Drive frequency, locked to 2ω_q.
    pub fn drive_angular(&self) -> f64 {
        2.0 * self.qubit_angular()
    }

    /// Δ₀, rad/s.
    pub fn zero_field_angular(&self) -> f64 {
        angular(self.zero_field_splitting_ghz * 1e9)
    }

    /// Δ̄, rad/s.
    pub fn bandwidth_angular(&self) -> f64 {
        angular(self.squeeze_bandwidth_mhz * 1e6)
    }

    pub fn bias_field_gauss(&self) -> f64 {
        self.bias_field_mt * 10.0
    }

    pub fn film_thickness_cm(&self) -> f64 {
        self.film_thickness_nm * 1e-7
    }

    pub fn lattice_const_cm(&self) -> f64 {
        self.lattice_const_angstrom * 1e-8
    }

    pub fn qubit_film_distance_cm(&self) -> f64 {
        self.qubit_film_distance_nm * 1e-7
    }

    /// n = 1/a₀³, cm⁻³.
    pub fn spin_number_density(&self) -> f64 {
        self.lattice_const_cm().powi(-3)
    }

    /// π(ω_q − Δ_F)/Δ₀, the dimensionless prefactor shared by all couplings.
    pub fn coupling_prefactor(&self) -> f64 {
        PI * self.detuning_angular() / self.zero_field_angular()
    }

    /// Vacuum relaxation rate of an isolated qubit, Γ₀ = ν π (ω_q − Δ_F)/Δ₀ (Hz).
    pub fn gamma0_hz(&self) -> f64 {
        self.nu_hz * self.coupling_prefactor()
    }

    /// ω_q − Δ_F implied by the NV relation ω_q = Δ₀ − γ̃B₀ (informational; the
    /// configured detuning is authoritative).
    pub fn nv_detuning_from_field(&self) -> f64 {
        self.zero_field_angular() - self.gamma_qubit * self.bias_field_gauss() - self.gap_angular()
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("spin_stiffness", self.spin_stiffness),
            ("surface_spin_density", self.surface_spin_density),
            ("anisotropy_gap", self.anisotropy_gap),
            ("film_thickness", self.film_thickness_nm),
            ("lattice_const", self.lattice_const_angstrom),
            ("magnetoelastic_Bxy", self.magnetoelastic_bxy_ghz),
            ("bias_field", self.bias_field_mt),
            ("gamma_bath", self.gamma_bath),
            ("gamma_qubit", self.gamma_qubit),
            ("zero_field_splitting", self.zero_field_splitting_ghz),
            ("squeeze_bandwidth", self.squeeze_bandwidth_mhz),
            ("qubit_film_distance", self.qubit_film_distance_nm),
            ("nu", self.nu_hz),
            ("saturation_spin_density", self.saturation_spin_density_cm2),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be strictly positive, got {v}")));
            }
        }
        if !(self.strain_exy >= 0.0 && self.strain_exy.is_finite()) {
            return Err(Error::Config(format!("strain_Exy must be non-negative, got {}", self.strain_exy)));
        }
        if !(self.detuning_mhz > 0.0) {
            return Err(Error::Config(format!(
                "ω_q ≤ Δ_F (detuning {} MHz): only qubits above the spin-wave gap are supported",
                self.detuning_mhz
            )));
        }
        Ok(())
    }
}

/// Qubit positions in the film plane, in units of the resonant wavelength λ.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrayGeometry {
    pub positions: Vec<[f64; 2]>,
    /// Lattice constant a/λ when the layout is a regular chain.
    pub lattice_const_a_over_lambda: Option<f64>,
}

impl ArrayGeometry {
    /// Equally spaced chain along x̂.
    pub fn chain(n: usize, a_over_lambda: f64) -> Result<Self> {
        if n == 0 || n > MAX_QUBITS {
            return Err(Error::Size(n));
        }
        if !(a_over_lambda > 0.0 && a_over_lambda.is_finite()) {
            return Err(Error::Config(format!("lattice constant a/λ must be positive, got {a_over_lambda}")));
        }
        let positions = (0..n).map(|i| [i as f64 * a_over_lambda, 0.0]).collect();
        Ok(ArrayGeometry {
            positions,
            lattice_const_a_over_lambda: Some(a_over_lambda),
        })
    }

    pub fn from_positions(positions: Vec<[f64; 2]>) -> Result<Self> {
        let g = ArrayGeometry {
            positions,
            lattice_const_a_over_lambda: None,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// ρ_{αβ}/λ.
    pub fn distance(&self, a: usize, b: usize) -> f64 {
        let [xa, ya] = self.positions[a];
        let [xb, yb] = self.positions[b];
        (xa - xb).hypot(ya - yb)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.len();
        if n == 0 || n > MAX_QUBITS {
            return Err(Error::Size(n));
        }
        if self.positions.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Config("qubit positions must be finite".into()));
        }
        for a in 0..n {
            for b in (a + 1)..n {
                if !(self.distance(a, b) > 0.0) {
                    return Err(Error::CoincidentQubits(a, b));
                }
            }
        }
        Ok(())
    }
}

/// Optional bath overrides; unset values are derived from the drive.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BathOverrides {
    pub squeeze_r: Option<f64>,
    pub squeeze_phase_rad: Option<f64>,
}

/// Everything a config file can set.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub params: PhysicalParams,
    pub geometry: ArrayGeometry,
    pub bath: BathOverrides,
    pub finite_d_correction: bool,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            params: PhysicalParams::default(),
            geometry: ArrayGeometry::chain(2, 0.5).expect("default chain is valid"),
            bath: BathOverrides::default(),
            finite_d_correction: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Dim {
    Length,
    Frequency,
    Field,
    Energy,
    Gyro,
    AreaDensity,
    Opaque,
}

// Conversion factor of `unit` into the dimension's base unit.
fn unit_factor(dim: Dim, unit: &str) -> Option<f64> {
    let f = match (dim, unit) {
        (Dim::Length, "m") => 1.0,
        (Dim::Length, "cm") => 1e-2,
        (Dim::Length, "um") => 1e-6,
        (Dim::Length, "nm") => 1e-9,
        (Dim::Length, "angstrom") => 1e-10,
        (Dim::Frequency, "Hz") => 1.0,
        (Dim::Frequency, "kHz") => 1e3,
        (Dim::Frequency, "MHz") => 1e6,
        (Dim::Frequency, "GHz") => 1e9,
        (Dim::Field, "T") => 1.0,
        (Dim::Field, "mT") => 1e-3,
        (Dim::Field, "G") => 1e-4,
        (Dim::Energy, "erg_cm2") => 1.0,
        (Dim::Energy, "J_m2") => 1e11,
        (Dim::Gyro, "rad_per_s_G") => 1.0,
        (Dim::Gyro, "rad_per_s_T") => 1e-4,
        (Dim::AreaDensity, "per_cm2") => 1.0,
        (Dim::AreaDensity, "per_m2") => 1e-4,
        (Dim::Opaque, "G2_cm_s") => 1.0,
        _ => return None,
    };
    Some(f)
}

struct QuantityKey {
    base: &'static str,
    dim: Dim,
    canonical_unit: &'static str,
    get: fn(&PhysicalParams) -> f64,
    set: fn(&mut PhysicalParams, f64),
}

macro_rules! quantity {
    ($base:literal, $dim:expr, $unit:literal, $field:ident) => {
        QuantityKey {
            base: $base,
            dim: $dim,
            canonical_unit: $unit,
            get: |p| p.$field,
            set: |p, v| p.$field = v,
        }
    };
}

const QUANTITIES: &[QuantityKey] = &[
    quantity!("spin_stiffness", Dim::Energy, "erg_cm2", spin_stiffness),
    quantity!("surface_spin_density", Dim::Opaque, "G2_cm_s", surface_spin_density),
    quantity!("anisotropy_gap", Dim::Energy, "erg_cm2", anisotropy_gap),
    quantity!("film_thickness", Dim::Length, "nm", film_thickness_nm),
    quantity!("lattice_const", Dim::Length, "angstrom", lattice_const_angstrom),
    quantity!("magnetoelastic_Bxy", Dim::Frequency, "GHz", magnetoelastic_bxy_ghz),
    quantity!("bias_field", Dim::Field, "mT", bias_field_mt),
    quantity!("gamma_bath", Dim::Gyro, "rad_per_s_G", gamma_bath),
    quantity!("gamma_qubit", Dim::Gyro, "rad_per_s_G", gamma_qubit),
    quantity!("zero_field_splitting", Dim::Frequency, "GHz", zero_field_splitting_ghz),
    quantity!("squeeze_bandwidth", Dim::Frequency, "MHz", squeeze_bandwidth_mhz),
    quantity!("qubit_film_distance", Dim::Length, "nm", qubit_film_distance_nm),
    quantity!("nu", Dim::Frequency, "Hz", nu_hz),
    quantity!("detuning", Dim::Frequency, "MHz", detuning_mhz),
    quantity!("saturation_spin_density", Dim::AreaDensity, "per_cm2", saturation_spin_density_cm2),
];

const DIMENSIONLESS: &[&str] = &[
    "strain_Exy",
    "n_qubits",
    "lattice_a_over_lambda",
    "positions_lambda",
    "squeeze_r",
    "squeeze_phase_rad",
    "finite_d_correction",
];

fn split_quantity_key(key: &str) -> Option<(&'static QuantityKey, f64)> {
    QUANTITIES.iter().find_map(|q| {
        let unit = key.strip_prefix(q.base)?.strip_prefix('_')?;
        let from = unit_factor(q.dim, unit)?;
        let to = unit_factor(q.dim, q.canonical_unit).expect("canonical unit is in the table");
        Some((q, from / to))
    })
}

fn parse_f64(key: &str, raw: &str) -> Result<f64> {
    raw.trim()
        .parse::<f64>()
        .map_err(|_| Error::Config(format!("{key}: cannot parse '{raw}' as a number")))
}

fn parse_positions(raw: &str) -> Result<Vec<[f64; 2]>> {
    raw.split(';')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|pair| {
            let mut it = pair.split(',').map(|v| parse_f64("positions_lambda", v));
            match (it.next(), it.next(), it.next()) {
                (Some(x), Some(y), None) => Ok([x?, y?]),
                _ => Err(Error::Config(format!("positions_lambda: expected 'x,y', got '{pair}'"))),
            }
        })
        .collect()
}

/// Parse a key/value map into a validated [`Config`].
///
/// `n_qubits`/`lattice_a_over_lambda` describe a chain; `positions_lambda`
/// (`x,y; x,y; ...` in units of λ) replaces it. `drive_frequency_<unit>` may
/// be given but must equal 2ω_q.
pub fn config_from_map(entries: &[(String, String)]) -> Result<Config> {
    let mut params = PhysicalParams::default();
    let mut seen: BTreeMap<&str, &str> = BTreeMap::new();
    let mut n_qubits: Option<usize> = None;
    let mut a_over_lambda: Option<f64> = None;
    let mut positions: Option<Vec<[f64; 2]>> = None;
    let mut bath = BathOverrides::default();
    let mut finite_d = false;
    let mut drive: Option<f64> = None;

    for (key, raw) in entries {
        let key = key.as_str();
        let canonical: &str = if let Some((q, _)) = split_quantity_key(key) {
            q.base
        } else if let Some(unit) = key.strip_prefix("drive_frequency_") {
            if unit_factor(Dim::Frequency, unit).is_none() {
                return Err(Error::Config(format!("unknown key '{key}'")));
            }
            "drive_frequency"
        } else if let Some(&k) = DIMENSIONLESS.iter().find(|&&k| k == key) {
            k
        } else {
            return Err(Error::Config(format!("unknown key '{key}'")));
        };
        if let Some(prev) = seen.insert(canonical, key) {
            return Err(Error::Config(format!("'{key}' sets the same quantity as '{prev}'")));
        }

        if let Some((q, factor)) = split_quantity_key(key) {
            (q.set)(&mut params, parse_f64(key, raw)? * factor);
            continue;
        }
        match canonical {
            "drive_frequency" => {
                let unit = &key["drive_frequency_".len()..];
                drive = Some(parse_f64(key, raw)? * unit_factor(Dim::Frequency, unit).unwrap_or(1.0));
            }
            "strain_Exy" => params.strain_exy = parse_f64(key, raw)?,
            "n_qubits" => {
                let n = raw
                    .trim()
                    .parse::<usize>()
                    .map_err(|_| Error::Config(format!("n_qubits: cannot parse '{raw}'")))?;
                n_qubits = Some(n);
            }
            "lattice_a_over_lambda" => a_over_lambda = Some(parse_f64(key, raw)?),
            "positions_lambda" => positions = Some(parse_positions(raw)?),
            "squeeze_r" => {
                let r = parse_f64(key, raw)?;
                if !(r >= 0.0 && r.is_finite()) {
                    return Err(Error::Config(format!("squeeze_r must be non-negative, got {r}")));
                }
                bath.squeeze_r = Some(r);
            }
            "squeeze_phase_rad" => bath.squeeze_phase_rad = Some(parse_f64(key, raw)?),
            "finite_d_correction" => {
                finite_d = match raw.trim() {
                    "true" | "1" | "yes" => true,
                    "false" | "0" | "no" => false,
                    other => return Err(Error::Config(format!("finite_d_correction: expected a boolean, got '{other}'"))),
                }
            }
            _ => unreachable!("canonical key table is exhaustive"),
        }
    }

    params.validate()?;
    if let Some(hz) = drive {
        let expected = params.drive_angular();
        let got = angular(hz);
        if ((got - expected) / expected).abs() > 1e-9 {
            return Err(Error::Config(format!(
                "drive frequency {hz:e} Hz differs from 2ω_q = {:e} Hz; only the resonant drive ω_s = 2ω_q is supported",
                expected / (2.0 * PI)
            )));
        }
    }

    let geometry = match positions {
        Some(p) => {
            if n_qubits.is_some_and(|n| n != p.len()) {
                return Err(Error::Config("n_qubits disagrees with positions_lambda".into()));
            }
            if a_over_lambda.is_some() {
                return Err(Error::Config("lattice_a_over_lambda and positions_lambda are mutually exclusive".into()));
            }
            ArrayGeometry::from_positions(p)?
        }
        None => ArrayGeometry::chain(n_qubits.unwrap_or(2), a_over_lambda.unwrap_or(0.5))?,
    };

    Ok(Config {
        params,
        geometry,
        bath,
        finite_d_correction: finite_d,
    })
}

/// Split `key = value` lines; `#` starts a comment.
pub fn parse_entries(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected 'key = value'", lineno + 1)))?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

// Quantity a key sets, ignoring its unit suffix.
fn key_identity(key: &str) -> &str {
    if let Some((q, _)) = split_quantity_key(key) {
        q.base
    } else if key.starts_with("drive_frequency_") {
        "drive_frequency"
    } else {
        key
    }
}

/// `base` with every quantity named in `overrides` replaced by the override.
pub fn merge_entries(base: Vec<(String, String)>, overrides: &[(String, String)]) -> Vec<(String, String)> {
    let mut out: Vec<(String, String)> = base
        .into_iter()
        .filter(|(k, _)| !overrides.iter().any(|(o, _)| key_identity(o) == key_identity(k)))
        .collect();
    out.extend(overrides.iter().cloned());
    out
}

pub fn parse_config(text: &str) -> Result<Config> {
    config_from_map(&parse_entries(text)?)
}

/// Read and validate a config file.
pub fn load_config(path: &Path) -> Result<Config> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text)
}

/// Canonical text form; `parse_config(&serialize_config(c)) == c` bit for bit.
pub fn serialize_config(cfg: &Config) -> String {
    let mut s = String::new();
    for q in QUANTITIES {
        let _ = writeln!(s, "{}_{} = {:?}", q.base, q.canonical_unit, (q.get)(&cfg.params));
    }
    let _ = writeln!(s, "strain_Exy = {:?}", cfg.params.strain_exy);
    match cfg.geometry.lattice_const_a_over_lambda {
        Some(a) => {
            let _ = writeln!(s, "n_qubits = {}", cfg.geometry.len());
            let _ = writeln!(s, "lattice_a_over_lambda = {a:?}");
        }
        None => {
            let pos: Vec<String> = cfg.geometry.positions.iter().map(|[x, y]| format!("{x:?},{y:?}")).collect();
            let _ = writeln!(s, "positions_lambda = {}", pos.join("; "));
        }
    }
    if let Some(r) = cfg.bath.squeeze_r {
        let _ = writeln!(s, "squeeze_r = {r:?}");
    }
    if let Some(p) = cfg.bath.squeeze_phase_rad {
        let _ = writeln!(s, "squeeze_phase_rad = {p:?}");
    }
    let _ = writeln!(s, "finite_d_correction = {}", cfg.finite_d_correction);
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_gives_defaults() {
        let c = parse_config("# nothing\n\n").unwrap();
        assert_eq!(c.params.film_thickness_nm, 20.0);
        assert_eq!(c.params.spin_stiffness, 5.1e-28);
        assert_eq!(c.params.surface_spin_density, 1.2e-10);
        assert_eq!(c.params.magnetoelastic_bxy_ghz, 1988.0);
        assert_eq!(c.params.zero_field_splitting_ghz, 2.87);
        assert_eq!(c.params.lattice_const_angstrom, 12.3);
        assert_eq!(c.params.nu_hz, 75.0);
        assert_eq!(c.geometry.len(), 2);
    }

    #[test]
    fn zero_detuning_is_rejected() {
        let err = parse_config("detuning_MHz = 0").unwrap_err();
        assert!(err.to_string().contains("ω_q ≤ Δ_F"), "{err}");
        assert!(parse_config("detuning_MHz = -5").is_err());
    }

    #[test]
    fn chain_positions() {
        let c = parse_config("n_qubits = 2\nlattice_a_over_lambda = 0.5").unwrap();
        assert_eq!(c.geometry.positions, vec![[0.0, 0.0], [0.5, 0.0]]);
        assert_eq!(c.geometry.distance(0, 1), 0.5);
    }

    #[test]
    fn si_suffixes_convert() {
        let c = parse_config("film_thickness_m = 2e-8\nbias_field_T = 0.04\ndetuning_GHz = 0.1").unwrap();
        assert!((c.params.film_thickness_nm - 20.0).abs() < 1e-12);
        assert!((c.params.bias_field_mt - 40.0).abs() < 1e-12);
        assert!((c.params.detuning_mhz - 100.0).abs() < 1e-12);
    }

    #[test]
    fn overrides_replace_any_unit_spelling() {
        let base = parse_entries("detuning_MHz = 100\nnu_Hz = 75").unwrap();
        let merged = merge_entries(base, &[("detuning_GHz".into(), "0.2".into())]);
        let c = config_from_map(&merged).unwrap();
        assert!((c.params.detuning_mhz - 200.0).abs() < 1e-9);
        assert_eq!(merged.len(), 2);
    }

    #[test]
    fn unknown_and_duplicate_keys_fail_closed() {
        assert!(parse_config("film_thickness_furlong = 3").is_err());
        assert!(parse_config("colour = blue").is_err());
        assert!(parse_config("detuning_MHz = 100\ndetuning_GHz = 0.1").is_err());
        assert!(parse_config("just a line").is_err());
    }

    #[test]
    fn non_positive_quantities_rejected() {
        assert!(parse_config("film_thickness_nm = 0").is_err());
        assert!(parse_config("nu_Hz = -1").is_err());
        assert!(parse_config("strain_Exy = -1e-4").is_err());
        assert!(parse_config("squeeze_r = -0.1").is_err());
        assert!(parse_config("n_qubits = 9").is_err());
        assert!(parse_config("n_qubits = 0").is_err());
    }

    #[test]
    fn coincident_positions_rejected() {
        let err = parse_config("positions_lambda = 0,0; 1,0; 0,0").unwrap_err();
        assert!(matches!(err, Error::CoincidentQubits(0, 2)));
    }

    #[test]
    fn off_resonant_drive_rejected() {
        let p = PhysicalParams::default();
        let ok = p.drive_angular() / (2.0 * PI) / 1e9;
        assert!(parse_config(&format!("drive_frequency_GHz = {ok:?}")).is_ok());
        assert!(parse_config(&format!("drive_frequency_GHz = {:?}", ok * 1.01)).is_err());
    }

    #[test]
    fn derived_scales() {
        let p = PhysicalParams::default();
        // D/ħ = 0.4836 cm²/s
        assert!((p.stiffness_angular() - 0.4836).abs() < 1e-3);
        // Γ₀ = 75 · π · 100/2870 Hz
        assert!((p.gamma0_hz() - 75.0 * PI * 100.0 / 2870.0).abs() < 1e-12);
        // 2As/ħ ≈ 2π·0.543 GHz
        assert!((p.anisotropy_gap / HBAR_ERG_S / angular(1e9) - 0.5433).abs() < 1e-3);
    }

    #[test]
    fn serialization_round_trip_of_custom_positions() {
        let mut c = Config::default();
        c.geometry = ArrayGeometry::from_positions(vec![[0.0, 0.0], [0.1, 0.7], [1.0 / 3.0, -2.0]]).unwrap();
        c.bath.squeeze_r = Some(0.25);
        c.bath.squeeze_phase_rad = Some(-1.0);
        c.finite_d_correction = true;
        assert_eq!(parse_config(&serialize_config(&c)).unwrap(), c);
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(64))]

        #[test]
        fn serialization_round_trips_random_values(
            nu in 1.0f64..1e3,
            detuning in 10.0f64..500.0,
            bias in 20.0f64..80.0,
            thickness in 5.0f64..100.0,
            strain in 0.0f64..2e-4,
            n in 1usize..=MAX_QUBITS,
            a in 0.01f64..10.0,
            r in proptest::option::of(0.0f64..2.0),
        ) {
            let mut c = Config::default();
            c.params.nu_hz = nu;
            c.params.detuning_mhz = detuning;
            c.params.bias_field_mt = bias;
            c.params.film_thickness_nm = thickness;
            c.params.strain_exy = strain;
            c.geometry = ArrayGeometry::chain(n, a).unwrap();
            c.bath.squeeze_r = r;
            proptest::prop_assert_eq!(parse_config(&serialize_config(&c)).unwrap(), c);
        }
    }
}
