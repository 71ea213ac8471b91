//! Config-driven commands behind the `aaphase` binary.
//!
//! Each command turns a [`RunConfig`] into an [`Outcome`]: the report body to
//! write and the process exit code.
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 1 | `verify` ran but at least one row failed |
//! | 2 | non-cyclic or incommensurable input |
//! | 3 | the oracle found no return before `t_max` |
//! | 64 | config or usage error |

use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use nalgebra::{DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::config::{ConfigError, ModelConfig, RunConfig};
use crate::constraint::{consistent_candidates, gamma_candidates, gauge_to_zero_phi, ConstraintError, PartialSpectrum};
use crate::models::{
    free_field, free_field_hamiltonian, spin_half, spin_half_hamiltonian, three_mirror_gamma_coherent, three_mirror_gamma_general,
    three_mirror_spectrum, two_mirror_gamma_closed_form, two_mirror_hamiltonian, two_mirror_spectrum, ModeState, ModelError,
};
use crate::oracle::{generic_gamma_blocks, BlockHamiltonian, OracleError, OracleOptions, APPROXIMATE_FIDELITY_TOL, DEFAULT_FIDELITY_TOL};
use crate::phase::{angle_distance, check_cyclicality, geometric_phase, Cyclicity, PhaseError, PhaseReport};
use crate::rational::Rational;
use crate::report::{cyclicity_line, write_candidate_table, write_comparison_table, write_phase_report, ComparisonRow};
use crate::spectrum::{LevelValue, Spectrum, StateDecomposition};
use crate::textfmt::format_real;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_NON_CYCLIC: i32 = 2;
pub const EXIT_NO_RETURN: i32 = 3;
pub const EXIT_USAGE: i32 = 64;

/// Amplitudes at or below this modulus are dropped when a numerically
/// diagonalized state is decomposed, so that rounding noise does not count
/// as occupation.
pub const OCCUPATION_CUTOFF: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Analyze,
    Verify,
    Constrain,
}

impl Command {
    pub fn as_str(&self) -> &'static str {
        match self {
            Command::Analyze => "analyze",
            Command::Verify => "verify",
            Command::Constrain => "constrain",
        }
    }
}

/// Command-line values that take precedence over the config file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub n_range: Option<u32>,
    pub fidelity_tol: Option<f64>,
    pub t_max: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub exit_code: i32,
    pub body: String,
    /// Human-readable reason for a nonzero exit.
    pub message: Option<String>,
}

impl Outcome {
    fn ok(body: String) -> Self {
        Outcome { exit_code: EXIT_OK, body, message: None }
    }

    fn fail(exit_code: i32, body: String, message: impl Into<String>) -> Self {
        Outcome {
            exit_code,
            body,
            message: Some(message.into()),
        }
    }
}

/// Load the config, apply overrides, run the command and write the report.
/// Returns the exit code; reasons go to stderr.
pub fn run(command: Command, config_path: &Path, overrides: &Overrides) -> i32 {
    let mut cfg = match RunConfig::load(config_path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return EXIT_USAGE;
        }
    };
    if let Some(n) = overrides.n_range {
        cfg.options.n_range = n;
    }
    if let Some(x) = overrides.fidelity_tol {
        cfg.options.fidelity_tol = Some(x);
    }
    if let Some(x) = overrides.t_max {
        cfg.options.t_max = Some(x);
    }
    let Some(out) = overrides.out.clone().or_else(|| cfg.out.clone()) else {
        eprintln!("no output path: pass --out or set `out` in the config");
        return EXIT_USAGE;
    };
    let outcome = execute(command, &cfg);
    if let Err(e) = std::fs::write(&out, &outcome.body) {
        eprintln!("cannot write {}: {e}", out.display());
        return EXIT_USAGE;
    }
    if let Some(m) = &outcome.message {
        eprintln!("{m}");
    }
    outcome.exit_code
}

pub fn execute(command: Command, cfg: &RunConfig) -> Outcome {
    match command {
        Command::Analyze => cmd_analyze(cfg),
        Command::Verify => cmd_verify(cfg),
        Command::Constrain => cmd_constrain(cfg),
    }
}

fn header(command: Command, cfg: &RunConfig) -> String {
    format!("command: {}\nmodel: {}\n", command.as_str(), cfg.model.name())
}

fn usage(body: String, e: impl std::fmt::Display) -> Outcome {
    Outcome::fail(EXIT_USAGE, body, e.to_string())
}

fn model_failure(body: String, e: ModelError) -> Outcome {
    match e {
        ModelError::Oracle(OracleError::NoPeriod(_)) => Outcome::fail(EXIT_NO_RETURN, body, e.to_string()),
        other => usage(body, other),
    }
}

/// Exact spectrum and state of the configured model, if it has one.
fn exact_route(model: &ModelConfig) -> Result<Option<(Spectrum, StateDecomposition)>, ModelError> {
    Ok(match model {
        ModelConfig::SpinHalf(p) => Some(spin_half(p)?),
        ModelConfig::FreeField { omega, occupied } => Some(free_field(*omega, occupied)?),
        ModelConfig::TwoMirror { params, .. } => Some(two_mirror_spectrum(params)?),
        ModelConfig::ThreeMirror { params, .. } => three_mirror_spectrum(params)?.exact,
        ModelConfig::RawSpectrum {
            spectrum,
            amplitudes,
            normalize,
        } => {
            let Some(a) = amplitudes else {
                return Err(ModelError::BadParameters("raw_spectrum needs amplitudes for this command".into()));
            };
            let state = if *normalize {
                StateDecomposition::normalized(spectrum, a.iter().cloned())?
            } else {
                StateDecomposition::new(spectrum, a.iter().cloned())?
            };
            Some((spectrum.clone(), state))
        }
        ModelConfig::DenseMatrix {
            hamiltonian,
            psi0,
            max_denominator,
            tolerance,
        } => Some(diagonalized(&BlockHamiltonian::from_dense(hamiltonian), psi0, *max_denominator, *tolerance)?),
    })
}

/// Spectrum from numerical eigenvalues (rationalized where possible) and
/// the state's eigencomponents; levels are labeled `e0`, `e1`, ...
pub fn diagonalized(
    h: &BlockHamiltonian,
    psi: &DVector<Complex64>,
    max_denominator: u64,
    tolerance: f64,
) -> Result<(Spectrum, StateDecomposition), ModelError> {
    let mut levels = Vec::new();
    let mut amps = Vec::new();
    for b in h.blocks() {
        let eig = SymmetricEigen::new(b.matrix.clone());
        let local = DVector::from_iterator(b.indices.len(), b.indices.iter().map(|&i| psi[i]));
        for k in 0..eig.eigenvalues.len() {
            let label = format!("e{}", levels.len());
            let c = eig.eigenvectors.column(k).dotc(&local);
            if c.norm() > OCCUPATION_CUTOFF {
                amps.push((label.clone(), c));
            }
            levels.push((label, eig.eigenvalues[k] / h.unit()));
        }
    }
    let spectrum = Spectrum::from_reals(h.unit(), levels, max_denominator, tolerance)?;
    let state = StateDecomposition::normalized(&spectrum, amps)?;
    Ok((spectrum, state))
}

fn oracle_system(model: &ModelConfig) -> Result<(BlockHamiltonian, DVector<Complex64>), ModelError> {
    Ok(match model {
        ModelConfig::SpinHalf(p) => {
            let (h, psi) = spin_half_hamiltonian(p)?;
            (BlockHamiltonian::from_dense(&h), psi)
        }
        ModelConfig::FreeField { omega, occupied } => {
            let (h, psi) = free_field_hamiltonian(*omega, occupied)?;
            (BlockHamiltonian::from_dense(&h), psi)
        }
        ModelConfig::TwoMirror { params, .. } => two_mirror_hamiltonian(params)?,
        ModelConfig::ThreeMirror { params, .. } => {
            let m = three_mirror_spectrum(params)?;
            (m.hamiltonian, m.psi0)
        }
        ModelConfig::RawSpectrum {
            spectrum, amplitudes, ..
        } => {
            let Some(a) = amplitudes else {
                return Err(ModelError::BadParameters("raw_spectrum needs amplitudes for this command".into()));
            };
            let values: Vec<f64> = spectrum.levels().iter().map(|l| l.value.to_f64() * spectrum.unit()).collect();
            let mut psi = DVector::from_element(values.len(), Complex64::new(0.0, 0.0));
            for (label, c) in a {
                let i = spectrum.levels().iter().position(|l| &l.label == label).expect("validated label");
                psi[i] = *c;
            }
            let norm = psi.norm();
            let h = crate::oracle::DenseHamiltonian::diagonal(&values, spectrum.unit());
            (BlockHamiltonian::from_dense(&h), psi / Complex64::new(norm, 0.0))
        }
        ModelConfig::DenseMatrix { hamiltonian, psi0, .. } => (BlockHamiltonian::from_dense(hamiltonian), psi0.clone()),
    })
}

fn oracle_options(cfg: &RunConfig, default_t_max: f64) -> OracleOptions {
    let approximate = cfg.options.approximate;
    let mut o = if approximate {
        OracleOptions::approximate(cfg.options.t_max.unwrap_or(default_t_max))
    } else {
        OracleOptions::new(cfg.options.t_max.unwrap_or(default_t_max))
    };
    o.fidelity_tol = cfg
        .options
        .fidelity_tol
        .unwrap_or(if approximate { APPROXIMATE_FIDELITY_TOL } else { DEFAULT_FIDELITY_TOL });
    o
}

/// Search window for models whose exact period is unknown: one and a half
/// mechanical periods.
fn three_mirror_default_t_max(model: &ModelConfig) -> Option<f64> {
    match model {
        ModelConfig::ThreeMirror { params, .. } => Some(1.5 * TAU / params.omega_m),
        _ => None,
    }
}

fn phase_failure(body: String, e: PhaseError) -> Outcome {
    match e {
        PhaseError::NonCyclic(reason) => Outcome::fail(EXIT_NON_CYCLIC, body, format!("non-cyclic: {reason}")),
        other => usage(body, other),
    }
}

pub fn cmd_analyze(cfg: &RunConfig) -> Outcome {
    let mut body = header(Command::Analyze, cfg);
    let exact = match exact_route(&cfg.model) {
        Ok(x) => x,
        Err(e) => return model_failure(body, e),
    };
    let Some((spectrum, state)) = exact else {
        // No exact spectrum: fall back to the oracle.
        let Some(t_max) = cfg.options.t_max.or_else(|| three_mirror_default_t_max(&cfg.model)) else {
            return usage(body, "this model has no exact spectrum; set t_max for the oracle");
        };
        let (h, psi) = match oracle_system(&cfg.model) {
            Ok(x) => x,
            Err(e) => return model_failure(body, e),
        };
        return match generic_gamma_blocks(&h, &psi, &oracle_options(cfg, t_max)) {
            Ok(r) => {
                let _ = writeln!(body, "cyclicity: approximate (oracle)");
                body.push_str(&write_phase_report(&r));
                Outcome::ok(body)
            }
            Err(OracleError::NoPeriod(t)) => Outcome::fail(EXIT_NO_RETURN, body, format!("no period detected <= t_max = {t}")),
            Err(e) => usage(body, e),
        };
    };
    let cyc = match check_cyclicality(&spectrum, &state) {
        Ok(c) => c,
        Err(e) => return phase_failure(body, e),
    };
    let _ = writeln!(body, "cyclicity: {}", cyclicity_line(&cyc));
    if let Cyclicity::NonCyclic(reason) = &cyc {
        return Outcome::fail(EXIT_NON_CYCLIC, body, format!("non-cyclic: {reason}"));
    }
    match geometric_phase(&spectrum, &state) {
        Ok(r) => {
            body.push_str(&write_phase_report(&r));
            Outcome::ok(body)
        }
        Err(PhaseError::NoFinitePeriod) => {
            let _ = writeln!(body, "note: zero-energy eigenstate, no phase winding");
            let _ = writeln!(body, "gamma: {}", format_real(0.0));
            Outcome::ok(body)
        }
        Err(e) => phase_failure(body, e),
    }
}

fn row(quantity: &str, reference: f64, candidate: f64, difference: f64, tolerance: f64) -> ComparisonRow {
    ComparisonRow {
        quantity: quantity.to_string(),
        reference,
        candidate,
        difference,
        tolerance,
    }
}

/// Period multiple `s` with `s tau = 2 pi p / omega`, if it is a positive integer.
fn loop_multiple(report: &PhaseReport, p: u64, omega: f64) -> Option<u32> {
    let tau = report.tau.exact.as_ref()?;
    // tau is in units of 2 pi / unit and the models use unit = omega.
    let s = &Rational::from(p as i64) / tau;
    s.to_integer().and_then(|n| u32::try_from(n).ok()).filter(|&n| n > 0 && (report.unit - omega).abs() <= 1e-15 * omega)
}

/// Closed-form comparison rows for models that have one.
fn closed_form_rows(cfg: &RunConfig, exact: Option<&PhaseReport>, oracle: &PhaseReport, tol: f64) -> Vec<ComparisonRow> {
    let mut rows = Vec::new();
    match &cfg.model {
        ModelConfig::SpinHalf(p) => {
            let cf = PI * (1.0 - p.theta.cos());
            if let Some(e) = exact {
                rows.push(row("gamma_closed_form", e.gamma, cf, angle_distance(e.gamma, cf), tol));
            }
        }
        ModelConfig::TwoMirror { params, closed_form_p } => {
            let p = closed_form_p.unwrap_or_else(|| params.p());
            let cf = two_mirror_gamma_closed_form(params, p);
            if let Some(e) = exact {
                rows.extend(loop_rows(e, p, params.omega_m, cf, tol));
            }
        }
        ModelConfig::ThreeMirror { params, closed_form_p } => {
            let p = closed_form_p.unwrap_or(1);
            let cf = match (&params.a, &params.b, &params.mirror) {
                (ModeState::Coherent(_), ModeState::Coherent(_), ModeState::Coherent(_)) => three_mirror_gamma_coherent(params, p),
                _ => three_mirror_gamma_general(params, p),
            };
            let Ok(cf) = cf else { return rows };
            match exact {
                Some(e) => rows.extend(loop_rows(e, p, params.omega_m, cf, tol)),
                None => rows.push(row("gamma_closed_form_vs_oracle", cf, oracle.gamma, angle_distance(cf, oracle.gamma), tol)),
            }
        }
        _ => {}
    }
    rows
}

/// Rows checking a closed form stated for the loop `tau = 2 pi p / omega`:
/// that loop must be a whole number of minimal loops, carry zero total
/// phase, and have the closed-form geometric phase.
fn loop_rows(exact: &PhaseReport, p: u64, omega: f64, closed_form: f64, tol: f64) -> Vec<ComparisonRow> {
    let target = TAU * p as f64 / omega;
    if exact.stationary {
        return vec![row("gamma_closed_form", 0.0, closed_form, angle_distance(0.0, closed_form), tol)];
    }
    match loop_multiple(exact, p, omega) {
        Some(s) => {
            let rep = exact.repeated(s);
            vec![
                row("phi_loop_p", 0.0, rep.phi.value, angle_distance(rep.phi.value, 0.0), tol),
                row("gamma_closed_form", rep.gamma, closed_form, angle_distance(rep.gamma, closed_form), tol),
            ]
        }
        None => vec![row("loop_p_multiple_of_tau", target, exact.tau.value, f64::INFINITY, tol)],
    }
}

pub fn cmd_verify(cfg: &RunConfig) -> Outcome {
    let mut body = header(Command::Verify, cfg);
    let tol = cfg.options.tolerance;
    let exact = match exact_route(&cfg.model) {
        Ok(x) => x,
        Err(e) => return model_failure(body, e),
    };
    let exact_report = match &exact {
        Some((s, st)) => match check_cyclicality(s, st) {
            Ok(Cyclicity::NonCyclic(reason)) => {
                let _ = writeln!(body, "cyclicity: non-cyclic ({reason})");
                return Outcome::fail(EXIT_NON_CYCLIC, body, format!("non-cyclic: {reason}"));
            }
            Ok(_) => match geometric_phase(s, st) {
                Ok(r) => Some(r),
                Err(PhaseError::NoFinitePeriod) => None,
                Err(e) => return phase_failure(body, e),
            },
            Err(e) => return phase_failure(body, e),
        },
        None => {
            if !matches!(cfg.model, ModelConfig::ThreeMirror { .. }) {
                return usage(body, "verify needs a model with an exact spectrum");
            }
            None
        }
    };
    let zero_energy_eigenstate = exact.is_some() && exact_report.is_none();
    let default_t_max = match &exact_report {
        Some(r) if !r.stationary => 1.5 * r.tau.value,
        Some(r) => r.tau.value,
        None => three_mirror_default_t_max(&cfg.model).unwrap_or(1.0),
    };
    let (h, psi) = match oracle_system(&cfg.model) {
        Ok(x) => x,
        Err(e) => return model_failure(body, e),
    };
    let oracle = match generic_gamma_blocks(&h, &psi, &oracle_options(cfg, default_t_max)) {
        Ok(r) => r,
        Err(OracleError::NoPeriod(t)) => return Outcome::fail(EXIT_NO_RETURN, body, format!("oracle: no period detected <= t_max = {t}")),
        Err(e) => return Outcome::fail(EXIT_NO_RETURN, body, format!("oracle: {e}")),
    };

    let mut rows = Vec::new();
    match &exact_report {
        Some(e) if !e.stationary => {
            let rel = (oracle.tau.value - e.tau.value).abs() / e.tau.value;
            rows.push(row("tau_rel", e.tau.value, oracle.tau.value, rel, tol));
            rows.push(row("phi", e.phi.value, oracle.phi.value, angle_distance(e.phi.value, oracle.phi.value), tol));
            rows.push(row("gamma", e.gamma, oracle.gamma, angle_distance(e.gamma, oracle.gamma), tol));
        }
        Some(_) => rows.push(row("stationary", 1.0, f64::from(u8::from(oracle.stationary)), f64::from(u8::from(!oracle.stationary)), 0.0)),
        None if zero_energy_eigenstate => rows.push(row("stationary", 1.0, f64::from(u8::from(oracle.stationary)), f64::from(u8::from(!oracle.stationary)), 0.0)),
        None => {}
    }
    rows.extend(closed_form_rows(cfg, exact_report.as_ref(), &oracle, tol));

    body.push_str(&write_comparison_table(&rows));
    if rows.iter().all(ComparisonRow::passed) {
        let _ = writeln!(body, "verdict: pass");
        Outcome::ok(body)
    } else {
        let _ = writeln!(body, "verdict: fail");
        let failed: Vec<&str> = rows.iter().filter(|r| !r.passed()).map(|r| r.quantity.as_str()).collect();
        Outcome::fail(EXIT_VERIFY_FAILED, body, format!("verify failed: {}", failed.join(", ")))
    }
}

pub fn cmd_constrain(cfg: &RunConfig) -> Outcome {
    let mut body = header(Command::Constrain, cfg);
    let ModelConfig::RawSpectrum { spectrum, .. } = &cfg.model else {
        return usage(body, "constrain takes the known eigenvalues from a raw_spectrum model");
    };
    let mut known = Vec::new();
    for l in spectrum.levels() {
        match &l.value {
            LevelValue::Exact(r) => known.push((l.label.clone(), r.clone())),
            LevelValue::Inexact(x) => {
                return Outcome::fail(
                    EXIT_NON_CYCLIC,
                    body,
                    format!("no cyclic motion possible: eigenvalue {} = {x} has no rational ratio to the others", l.label),
                )
            }
        }
    }
    let ps = match PartialSpectrum::new(spectrum.unit(), known) {
        Ok(p) => p,
        Err(e) => return usage(body, e),
    };
    for k in ps.known() {
        let _ = writeln!(body, "known[{}]: {}", k.label, k.value);
    }
    let n_range = cfg.options.n_range;
    let _ = writeln!(body, "n_range: {n_range}");
    let candidates = match consistent_candidates(&ps, n_range) {
        Ok(c) => c,
        Err(e @ ConstraintError::NeedTwoEigenvalues(_)) => return usage(body, e),
        Err(e @ ConstraintError::NoCyclicMotion(_)) => return Outcome::fail(EXIT_NON_CYCLIC, body, e.to_string()),
        Err(e) => return usage(body, e),
    };
    let mean = cfg.constrain.as_ref().and_then(|c| c.mean_energy);
    let mut rows = Vec::with_capacity(candidates.len());
    for c in &candidates {
        let g = match gauge_to_zero_phi(c, &ps) {
            Ok(g) => g,
            Err(e) => return usage(body, e),
        };
        let gamma = mean.map(|m| crate::constraint::gamma_for(&g, m / spectrum.unit()));
        rows.push((c.clone(), g, gamma));
    }
    let _ = writeln!(body, "candidates: {}", rows.len());
    body.push_str(&write_candidate_table(&rows));

    if let Some((first, gauged, _)) = rows.first() {
        let trials = cfg.constrain.as_ref().map(|c| c.trials.as_slice()).unwrap_or(&[]);
        let _ = writeln!(
            body,
            "admissibility: candidate n={} m={}, zero-phase gauge, L = k' ({}) / {}",
            first.n, first.m, gauged.reference, gauged.n
        );
        let _ = writeln!(body, "trial|k_prime|admissible");
        let constraint = gauged.constraint();
        for t in trials {
            match constraint.k_prime(t) {
                Some(k) => {
                    let _ = writeln!(body, "{t}|{k}|yes");
                }
                None => {
                    let _ = writeln!(body, "{t}|none|no");
                }
            }
        }
    }
    if let Some(m) = mean {
        match gamma_candidates(&ps, &candidates, m / spectrum.unit()) {
            Ok(gs) => {
                let list: Vec<String> = gs.into_iter().map(format_real).collect();
                let _ = writeln!(body, "gamma_candidates: {}", list.join(","));
            }
            Err(e) => return usage(body, e),
        }
    }
    Outcome::ok(body)
}

impl From<ConfigError> for Outcome {
    fn from(e: ConfigError) -> Self {
        Outcome::fail(EXIT_USAGE, String::new(), e.to_string())
    }
}
