//! Scenario runner behind the `squeezebath` binary.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::Parser;
use rayon::prelude::*;

use crate::bath::BathState;
use crate::couplings::{build_couplings, CouplingSet};
use crate::dynamics::{build_generator, evolve, steady_state, EvolveOptions, Generator, GeneratorMode, Trajectory};
use crate::error::{Error, Result};
use crate::observables::{initial_state, wineland_xi2, InitialKind, SpinOperators};
use crate::params::{config_from_map, merge_entries, parse_entries, serialize_config, ArrayGeometry, Config};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioName {
    Fig2aCouplings,
    Fig2bSqueezing,
    Fig2cRelaxation,
    Sweep,
    Custom,
}

impl ScenarioName {
    pub const ALL: [ScenarioName; 5] = [
        ScenarioName::Fig2aCouplings,
        ScenarioName::Fig2bSqueezing,
        ScenarioName::Fig2cRelaxation,
        ScenarioName::Sweep,
        ScenarioName::Custom,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioName::Fig2aCouplings => "fig2a_couplings",
            ScenarioName::Fig2bSqueezing => "fig2b_squeezing",
            ScenarioName::Fig2cRelaxation => "fig2c_relaxation",
            ScenarioName::Sweep => "sweep",
            ScenarioName::Custom => "custom",
        }
    }
}

impl FromStr for ScenarioName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ScenarioName::ALL
            .into_iter()
            .find(|n| n.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown scenario '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StartState {
    Excited,
    Ground,
}

impl FromStr for StartState {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "excited" => Ok(StartState::Excited),
            "ground" => Ok(StartState::Ground),
            _ => Err(Error::Config(format!("initial state must be 'excited' or 'ground', got '{s}'"))),
        }
    }
}

impl StartState {
    fn kind(self) -> InitialKind {
        match self {
            StartState::Excited => InitialKind::AllExcited,
            StartState::Ground => InitialKind::AllGround,
        }
    }
}

/// A fully resolved run request.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: ScenarioName,
    pub config: Config,
    pub output_dir: PathBuf,
    pub rtol: f64,
    pub atol: f64,
    /// Only used by `custom`.
    pub initial: StartState,
    pub t_end: f64,
    pub points: usize,
}

impl Scenario {
    pub fn new(name: ScenarioName, config: Config, output_dir: impl Into<PathBuf>) -> Self {
        let d = EvolveOptions::default();
        Scenario {
            name,
            config,
            output_dir: output_dir.into(),
            rtol: d.rtol,
            atol: d.atol,
            initial: StartState::Excited,
            t_end: 20.0,
            points: 401,
        }
    }

    fn evolve_options(&self) -> EvolveOptions {
        EvolveOptions {
            rtol: self.rtol,
            atol: self.atol,
            keep_states: false,
        }
    }

    fn validate(&self) -> Result<()> {
        for (name, v) in [("rtol", self.rtol), ("atol", self.atol)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::Config(format!("{name} must lie in (0, 1), got {v}")));
            }
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::Config(format!("t_end must be positive, got {}", self.t_end)));
        }
        if self.points < 2 {
            return Err(Error::Config(format!("need at least two output points, got {}", self.points)));
        }
        self.config.params.validate()?;
        self.config.geometry.validate()
    }
}

/// Evenly spaced grid on [0, t_end] with `points` entries.
pub fn time_grid(t_end: f64, points: usize) -> Vec<f64> {
    let last = (points - 1) as f64;
    (0..points).map(|i| t_end * i as f64 / last).collect()
}

pub const FIG2B_GRID: (f64, usize) = (20.0, 400);
pub const FIG2C_GRID: (f64, usize) = (5.0, 500);
pub const SWEEP_R: [f64; 5] = [0.0, 0.125, 0.25, 0.5, 1.0];
pub const SWEEP_A_OVER_LAMBDA: [f64; 6] = [0.25, 0.5, 0.75, 1.0, 1.5, 2.0];
pub const SWEEP_N: [usize; 4] = [1, 2, 3, 4];

/// (label, r, a/λ, initial state) for the four squeezing curves.
pub const FIG2B_SETS: [(&str, f64, f64, StartState); 4] = [
    ("r0_a0.5_excited", 0.0, 0.5, StartState::Excited),
    ("r0.25_a0.5_excited", 0.25, 0.5, StartState::Excited),
    ("r0.25_a1_excited", 0.25, 1.0, StartState::Excited),
    ("r0.25_a0.5_ground", 0.25, 0.5, StartState::Ground),
];

pub const FIG2C_R: [f64; 3] = [0.0, 0.5, 1.0];
pub const FIG2C_A_OVER_LAMBDA: f64 = 0.4;
pub const FIG2C_N: usize = 4;

fn num(x: f64) -> String {
    format!("{x:.12e}")
}

fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// Bath from the config with r replaced, keeping the configured phase.
fn bath_with_r(cfg: &Config, r: f64) -> Result<BathState> {
    let phase = BathState::from_params(&cfg.params, &cfg.bath)?.phi;
    BathState::from_r(r, phase, &cfg.params)
}

fn chain_generator(cfg: &Config, bath: &BathState, n: usize, a: f64, uncorrelated: bool) -> Result<Generator> {
    let geometry = ArrayGeometry::chain(n, a)?;
    let mut couplings = build_couplings(&geometry, &cfg.params, bath, cfg.finite_d_correction)?;
    if uncorrelated {
        couplings = couplings.uncorrelated();
    }
    build_generator(&couplings, bath, GeneratorMode::FourChannel)
}

fn provenance(s: &Scenario, bath: &BathState, units: &str) -> Result<String> {
    let mut out = String::new();
    let _ = writeln!(out, "# squeezebath {} scenario={}", env!("CARGO_PKG_VERSION"), s.name.as_str());
    let _ = writeln!(out, "# rtol={:?} atol={:?}", s.rtol, s.atol);
    for line in serialize_config(&s.config).lines() {
        let _ = writeln!(out, "# {line}");
    }
    let g0 = build_couplings(&ArrayGeometry::chain(1, 1.0)?, &s.config.params, bath, false)?.gamma0;
    let _ = writeln!(
        out,
        "# derived: lambda_nm={:.6} gamma0_Hz={:.6} r={:.6} N={:.6} abs_M={:.6} phi_rad={:.6}",
        bath.lambda * 1e7,
        g0,
        bath.r,
        bath.n,
        bath.m.norm(),
        bath.phi
    );
    let _ = writeln!(out, "# units: {units}");
    Ok(out)
}

/// Produce every output file of the scenario as (file name, contents).
pub fn render_scenario(s: &Scenario) -> Result<Vec<(String, String)>> {
    s.validate()?;
    let cfg = &s.config;
    let bath = BathState::from_params(&cfg.params, &cfg.bath)?;
    match s.name {
        ScenarioName::Fig2aCouplings => {
            let mut out = provenance(s, &bath, "rho/lambda dimensionless; couplings divided by nu")?;
            out.push_str("rho_over_lambda,J_over_nu,gamma_mp_over_nu,gamma_pm_over_nu,gamma_pp_re_over_nu,gamma_pp_im_over_nu,gamma_mm_re_over_nu,gamma_mm_im_over_nu\n");
            for i in 0..=295 {
                let u = 0.05 + 0.01 * i as f64;
                let geometry = ArrayGeometry::from_positions(vec![[0.0, 0.0], [u, 0.0]])?;
                let c = build_couplings(&geometry, &cfg.params, &bath, cfg.finite_d_correction)?;
                let nu = c.nu;
                let (pp, mm) = (c.gamma_pp[(0, 1)] / nu, c.gamma_mm[(0, 1)] / nu);
                let row = [u, c.j[(0, 1)] / nu, c.gamma_mp[(0, 1)] / nu, c.gamma_pm[(0, 1)] / nu, pp.re, pp.im, mm.re, mm.im];
                out.push_str(&row.map(num).join(","));
                out.push('\n');
            }
            Ok(vec![("fig2a_couplings.csv".into(), out)])
        }
        ScenarioName::Fig2bSqueezing => {
            let grid = time_grid(FIG2B_GRID.0, FIG2B_GRID.1);
            let runs = FIG2B_SETS
                .par_iter()
                .map(|&(_, r, a, start)| -> Result<(Trajectory, Option<f64>)> {
                    let b = bath_with_r(cfg, r)?;
                    let g = chain_generator(cfg, &b, 2, a, false)?;
                    let traj = evolve(&initial_state(&start.kind(), 2)?, &g, &grid, &s.evolve_options())?;
                    let ss = steady_state(&g)?;
                    let xi = wineland_xi2(&ss.rho, &SpinOperators::new(2)).ok().map(|x| 1.0 / x.xi_r_squared);
                    Ok((traj, xi))
                })
                .collect::<Result<Vec<_>>>()?;
            let mut out = provenance(s, &bath, "t is Gamma0*t; columns are 1/xi_R^2 (empty where the mean spin vanishes)")?;
            for ((label, ..), (_, xi)) in FIG2B_SETS.iter().zip(&runs) {
                let _ = writeln!(out, "# steady {label} inv_xi2={}", opt_num(*xi));
            }
            let labels: Vec<&str> = FIG2B_SETS.iter().map(|s| s.0).collect();
            let _ = writeln!(out, "t,{}", labels.join(","));
            for (i, t) in grid.iter().enumerate() {
                let cells: Vec<String> = runs.iter().map(|(tr, _)| opt_num(tr.inverse_xi2()[i])).collect();
                let _ = writeln!(out, "{},{}", num(*t), cells.join(","));
            }
            Ok(vec![("fig2b_squeezing.csv".into(), out)])
        }
        ScenarioName::Fig2cRelaxation => {
            let grid = time_grid(FIG2C_GRID.0, FIG2C_GRID.1);
            let cases: Vec<(f64, bool)> = FIG2C_R.iter().flat_map(|&r| [(r, false), (r, true)]).collect();
            let runs = cases
                .par_iter()
                .map(|&(r, unc)| -> Result<Trajectory> {
                    let b = bath_with_r(cfg, r)?;
                    let g = chain_generator(cfg, &b, FIG2C_N, FIG2C_A_OVER_LAMBDA, unc)?;
                    evolve(&initial_state(&InitialKind::AllExcited, FIG2C_N)?, &g, &grid, &s.evolve_options())
                })
                .collect::<Result<Vec<_>>>()?;
            let mut out = provenance(s, &bath, "t is Gamma0*t; rate is -(1/2) d<S_z>/dt normalized by N*Gamma0")?;
            let labels: Vec<String> = cases
                .iter()
                .map(|&(r, unc)| format!("r{r}_{}", if unc { "uncorrelated" } else { "correlated" }))
                .collect();
            let _ = writeln!(out, "t,{}", labels.join(","));
            for (i, t) in grid.iter().enumerate() {
                let cells: Vec<String> = runs.iter().map(|tr| num(tr.relaxation_rate[i])).collect();
                let _ = writeln!(out, "{},{}", num(*t), cells.join(","));
            }
            Ok(vec![("fig2c_relaxation.csv".into(), out)])
        }
        ScenarioName::Sweep => {
            let points: Vec<(f64, f64, usize)> = SWEEP_R
                .iter()
                .flat_map(|&r| SWEEP_A_OVER_LAMBDA.iter().flat_map(move |&a| SWEEP_N.iter().map(move |&n| (r, a, n))))
                .collect();
            let rows = points
                .par_iter()
                .map(|&(r, a, n)| -> Result<String> {
                    let b = bath_with_r(cfg, r)?;
                    let ss = steady_state(&chain_generator(cfg, &b, n, a, false)?)?;
                    let ops = SpinOperators::new(n);
                    let sz = ops.mean(&ss.rho)[2] / n as f64;
                    let xi = wineland_xi2(&ss.rho, &ops).ok().map(|x| x.xi_r_squared);
                    Ok(format!("{r},{a},{n},{},{},{}", opt_num(xi), opt_num(xi.map(|x| 1.0 / x)), num(sz)))
                })
                .collect::<Result<Vec<_>>>()?;
            let mut out = provenance(s, &bath, "steady state; xi2 is Wineland xi_R^2; sz_per_qubit in Pauli units")?;
            out.push_str("r,a_over_lambda,n_qubits,xi2,inv_xi2,sz_per_qubit\n");
            for row in rows {
                out.push_str(&row);
                out.push('\n');
            }
            Ok(vec![("sweep.csv".into(), out)])
        }
        ScenarioName::Custom => {
            let couplings = build_couplings(&cfg.geometry, &cfg.params, &bath, cfg.finite_d_correction)?;
            let n = couplings.n_qubits();
            let g = build_generator(&couplings, &bath, GeneratorMode::FourChannel)?;
            let grid = time_grid(s.t_end, s.points);
            let traj = evolve(&initial_state(&s.initial.kind(), n)?, &g, &grid, &s.evolve_options())?;
            let mut head = provenance(s, &bath, "t is Gamma0*t; rate normalized by N*Gamma0; S in Pauli convention")?;
            let _ = writeln!(head, "# initial={:?} n_qubits={n}", s.initial);
            if n <= 5 {
                let ss = steady_state(&g)?;
                let xi = wineland_xi2(&ss.rho, &SpinOperators::new(n)).ok().map(|x| 1.0 / x.xi_r_squared);
                let _ = writeln!(head, "# steady inv_xi2={}", opt_num(xi));
            }
            let mut traj_csv = head.clone();
            traj_csv.push_str(&traj.to_csv(&[]));
            let mut coup = head;
            coup.push_str(&couplings_csv(&couplings, &cfg.geometry));
            Ok(vec![("custom_trajectory.csv".into(), traj_csv), ("custom_couplings.csv".into(), coup)])
        }
    }
}

fn couplings_csv(c: &CouplingSet, geometry: &ArrayGeometry) -> String {
    let mut out = String::from("# couplings in Hz\nalpha,beta,rho_over_lambda,J,gamma_mp,gamma_pm,gamma_pp_re,gamma_pp_im,gamma_mm_re,gamma_mm_im\n");
    let n = c.n_qubits();
    for a in 0..n {
        for b in 0..n {
            let row = [
                geometry.distance(a, b),
                c.j[(a, b)],
                c.gamma_mp[(a, b)],
                c.gamma_pm[(a, b)],
                c.gamma_pp[(a, b)].re,
                c.gamma_pp[(a, b)].im,
                c.gamma_mm[(a, b)].re,
                c.gamma_mm[(a, b)].im,
            ];
            let _ = writeln!(out, "{a},{b},{}", row.map(num).join(","));
        }
    }
    out
}

/// Run a scenario and write its files into the output directory.
///
/// Nothing is written until every result is computed; if a write fails, the
/// files already written by this call are removed again.
pub fn run_scenario(s: &Scenario) -> Result<Vec<PathBuf>> {
    let files = render_scenario(s)?;
    std::fs::create_dir_all(&s.output_dir)?;
    let mut written = Vec::new();
    for (name, contents) in files {
        let path = s.output_dir.join(name);
        if let Err(e) = std::fs::write(&path, contents) {
            let _ = std::fs::remove_file(&path);
            for p in &written {
                let _ = std::fs::remove_file(p);
            }
            return Err(e.into());
        }
        written.push(path);
    }
    Ok(written)
}

#[derive(Debug, Parser)]
#[command(name = "squeezebath", version, about = "Qubit arrays coupled to a squeezed magnon bath")]
pub struct Args {
    /// fig2a_couplings, fig2b_squeezing, fig2c_relaxation, sweep or custom
    #[arg(long)]
    pub scenario: String,
    /// key = value config file
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    #[arg(long, default_value_t = 1e-8)]
    pub rtol: f64,
    #[arg(long, default_value_t = 1e-10)]
    pub atol: f64,
    /// Override a config entry, e.g. --set squeeze_r=0.3 (repeatable)
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// Worker threads for independent runs
    #[arg(long)]
    pub threads: Option<usize>,
    /// Initial state for the custom scenario: excited or ground
    #[arg(long, default_value = "excited")]
    pub initial: String,
    /// Final Γ₀t for the custom scenario
    #[arg(long, default_value_t = 20.0)]
    pub t_end: f64,
    /// Output points for the custom scenario
    #[arg(long, default_value_t = 401)]
    pub points: usize,
}

fn read_config(path: Option<&Path>, sets: &[String]) -> Result<Config> {
    let overrides = sets
        .iter()
        .map(|kv| {
            kv.split_once('=')
                .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                .ok_or_else(|| Error::Config(format!("--set expects KEY=VALUE, got '{kv}'")))
        })
        .collect::<Result<Vec<_>>>()?;
    let base = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Error::Config(format!("cannot read {}: {e}", p.display())))?;
            parse_entries(&text)?
        }
        None => Vec::new(),
    };
    config_from_map(&merge_entries(base, &overrides))
}

/// Resolve command-line arguments into a scenario.
pub fn scenario_from_args(args: &Args) -> Result<Scenario> {
    let name = args.scenario.parse()?;
    let config = read_config(args.config.as_deref(), &args.set)?;
    let mut s = Scenario::new(name, config, &args.out);
    s.rtol = args.rtol;
    s.atol = args.atol;
    s.initial = args.initial.parse()?;
    s.t_end = args.t_end;
    s.points = args.points;
    Ok(s)
}

/// Entry point for the binary; returns the process exit code.
pub fn run(args: Args) -> i32 {
    if let Some(t) = args.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: cannot set up thread pool: {e}");
            return 2;
        }
    }
    let result = scenario_from_args(&args).and_then(|s| {
        log::info!("running {} into {}", s.name.as_str(), s.output_dir.display());
        run_scenario(&s)
    });
    match result {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            0
        }
        Err(e) => {
            eprintln!("error: {} scenario failed: {e}", args.scenario);
            e.exit_code()
        }
    }
}
