//! Closed-form period, total phase and geometric phase of a cyclic state.
//!
//! For a time-independent Hamiltonian the state only occupies the levels of
//! its decomposition. The period is `2 pi hbar LCM(1 / dE)` over the nonzero
//! spacings of the occupied eigenvalues, the total phase follows from any one
//! occupied level, and the Aharonov-Anandan phase is
//! `gamma = phi + (tau / hbar) <H>`. No evolution operator is ever built.
//!
//! Units: hbar = 1, eigenvalues are rationals in units of [`Spectrum::unit`],
//! exact periods are in units of `2 pi / unit`, exact phases in units of pi.

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::{PI, TAU};

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use thiserror::Error;

use crate::rational::{lcm_rationals, Rational, RationalError, RationalSet};
use crate::spectrum::{LevelValue, Spectrum, SpectrumError, StateDecomposition};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PhaseError {
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
    #[error(transparent)]
    Rational(#[from] RationalError),
    #[error("state is not cyclic: {0}")]
    NonCyclic(String),
    #[error("no finite period: the state only occupies the zero eigenvalue")]
    NoFinitePeriod,
    #[error("internal consistency failure: {0}")]
    Inconsistent(String),
    #[error("eigenvalue is zero: use the phi = 2 pi rule instead")]
    ZeroEigenvalue,
    #[error("period must be positive, got {0}")]
    NonPositivePeriod(f64),
}

/// Outcome of the cyclicity test on an occupied spectrum.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Cyclicity {
    Cyclic,
    /// A single distinct eigenvalue is occupied: the projective loop is a point.
    Stationary,
    NonCyclic(String),
}

/// A quantity that is exact when every occupied eigenvalue is rational.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseValue {
    pub exact: Option<Rational>,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    FullSpectrum,
    SingleEigenvaluePhiKnown,
    SingleEigenvalueTauKnown,
    Oracle,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::FullSpectrum => "full-spectrum",
            Method::SingleEigenvaluePhiKnown => "single-eigenvalue-phi-known",
            Method::SingleEigenvalueTauKnown => "single-eigenvalue-tau-known",
            Method::Oracle => "oracle",
        }
    }

    pub fn parse(s: &str) -> Option<Method> {
        [
            Method::FullSpectrum,
            Method::SingleEigenvaluePhiKnown,
            Method::SingleEigenvalueTauKnown,
            Method::Oracle,
        ]
        .into_iter()
        .find(|m| m.as_str() == s)
    }
}

/// Period, total phase and geometric phase of one cyclic evolution.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseReport {
    pub method: Method,
    pub stationary: bool,
    pub unit: f64,
    /// Exact part in units of `2 pi / unit`; `value` is the period itself.
    pub tau: PhaseValue,
    /// Exact part in units of pi, canonical branch `(-1, 1]`; `value` in `(-pi, pi]`.
    pub phi: PhaseValue,
    /// Reduced to `[0, 2 pi)`.
    pub gamma: f64,
    /// `<H>` in absolute energy units.
    pub mean_energy: f64,
    /// Integer `n` with `lambda tau + phi = 2 pi n` for each occupied label.
    pub branch_integers: BTreeMap<String, BigInt>,
    /// Achieved return fidelity, for numerically detected periods.
    pub fidelity: Option<f64>,
}

impl PhaseReport {
    /// The unwrapped total phase `-lambda tau` of the branch where the level
    /// `label` has branch integer zero. This is the phase the single-eigenvalue
    /// formula expects when evaluated at that level.
    pub fn phi_branch_for(&self, label: &str) -> Option<f64> {
        let n = self.branch_integers.get(label)?.to_f64()?;
        Some(self.phi.value - TAU * n)
    }

    /// The same evolution followed around its loop `times` times: period and
    /// phases scale by `times`, with phases reduced back to their branches.
    pub fn repeated(&self, times: u32) -> PhaseReport {
        let s = times.max(1);
        let sr = Rational::from(s as i64);
        let (phi, shift) = match &self.phi.exact {
            Some(p) => {
                let (r, k) = (&sr * p).reduce_symmetric(&Rational::one());
                let value = PI * r.to_f64();
                (PhaseValue { exact: Some(r), value }, k)
            }
            None => {
                let raw = s as f64 * self.phi.value;
                let value = wrap_to_pi(raw);
                (PhaseValue { exact: None, value }, BigInt::from(((raw - value) / TAU).round() as i64))
            }
        };
        PhaseReport {
            tau: PhaseValue {
                exact: self.tau.exact.as_ref().map(|t| &sr * t),
                value: s as f64 * self.tau.value,
            },
            phi,
            gamma: if self.stationary { 0.0 } else { wrap_to_2pi(s as f64 * self.gamma) },
            branch_integers: self
                .branch_integers
                .iter()
                .map(|(l, n)| (l.clone(), n * BigInt::from(s) - &shift))
                .collect(),
            ..self.clone()
        }
    }
}

/// The total phase of a cyclic state together with the per-level branches.
#[derive(Debug, Clone, PartialEq)]
pub struct TotalPhase {
    pub phi: PhaseValue,
    pub branch_integers: BTreeMap<String, BigInt>,
}

/// Wrap an angle into `[0, 2 pi)`.
pub fn wrap_to_2pi(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Wrap an angle into `(-pi, pi]`.
pub fn wrap_to_pi(x: f64) -> f64 {
    let r = wrap_to_2pi(x);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// Distance between two angles on the circle, in `[0, pi]`.
pub fn angle_distance(a: f64, b: f64) -> f64 {
    wrap_to_pi(a - b).abs()
}

/// Distinct occupied eigenvalue with its merged weight and labels.
#[derive(Debug, Clone)]
struct Occupied {
    value: LevelValue,
    weight: f64,
    labels: Vec<String>,
}

fn occupation(spectrum: &Spectrum, state: &StateDecomposition) -> Result<Vec<Occupied>, PhaseError> {
    state.check_against(spectrum)?;
    let mut occupied: Vec<Occupied> = Vec::new();
    let mut exact_index: HashMap<&Rational, usize> = HashMap::new();
    for (label, amp) in state.entries() {
        let level = spectrum
            .level(label)
            .ok_or_else(|| SpectrumError::UnknownLabel(label.clone()))?;
        let slot = match &level.value {
            LevelValue::Exact(r) => exact_index.get(r).copied(),
            inexact => occupied.iter().position(|o| &o.value == inexact),
        };
        match slot {
            Some(i) => {
                occupied[i].weight += amp.norm_sqr();
                occupied[i].labels.push(label.clone());
            }
            None => {
                if let LevelValue::Exact(r) = &level.value {
                    exact_index.insert(r, occupied.len());
                }
                occupied.push(Occupied {
                    value: level.value.clone(),
                    weight: amp.norm_sqr(),
                    labels: vec![label.clone()],
                });
            }
        }
    }
    Ok(occupied)
}

fn cyclicity_of(occupied: &[Occupied]) -> Cyclicity {
    match occupied.len() {
        1 => Cyclicity::Stationary,
        // Two distinct levels always close a loop, rational or not.
        2 => Cyclicity::Cyclic,
        _ => match occupied.iter().find(|o| o.value.exact().is_none()) {
            Some(o) => Cyclicity::NonCyclic(format!(
                "incommensurable: level {} has no rational value in the energy unit",
                o.labels[0]
            )),
            None => Cyclicity::Cyclic,
        },
    }
}

pub fn check_cyclicality(spectrum: &Spectrum, state: &StateDecomposition) -> Result<Cyclicity, PhaseError> {
    Ok(cyclicity_of(&occupation(spectrum, state)?))
}

/// Everything derived from the occupied spectrum of a cyclic state.
struct Loop {
    occupied: Vec<Occupied>,
    stationary: bool,
    tau: PhaseValue,
    phi: PhaseValue,
    /// Branch integer per distinct occupied level, same order as `occupied`.
    branches: Vec<BigInt>,
}

fn solve(spectrum: &Spectrum, state: &StateDecomposition) -> Result<Loop, PhaseError> {
    let occupied = occupation(spectrum, state)?;
    let stationary = match cyclicity_of(&occupied) {
        Cyclicity::NonCyclic(reason) => return Err(PhaseError::NonCyclic(reason)),
        Cyclicity::Stationary => true,
        Cyclicity::Cyclic => false,
    };
    let unit = spectrum.unit();
    let all_exact = occupied.iter().all(|o| o.value.exact().is_some());
    if all_exact {
        solve_exact(occupied, stationary, unit)
    } else {
        solve_inexact(occupied, stationary, unit)
    }
}

fn solve_exact(occupied: Vec<Occupied>, stationary: bool, unit: f64) -> Result<Loop, PhaseError> {
    let values: Vec<&Rational> = occupied.iter().map(|o| o.value.exact().unwrap()).collect();
    let reference = values[0];

    let tau = if stationary {
        // tau = 2 pi hbar / |lambda|: the period of the lone phase factor.
        reference.abs().recip().ok_or(PhaseError::NoFinitePeriod)?
    } else {
        // A common multiple of every inverse pairwise spacing is exactly a
        // common multiple of the inverse spacings to one reference level,
        // since lambda_i - lambda_j = (lambda_i - lambda_0) - (lambda_j - lambda_0).
        let inverse_spacings = RationalSet::new(
            values[1..]
                .iter()
                .map(|&v| (v - reference).recip().expect("distinct occupied levels")),
        )?;
        lcm_rationals(&inverse_spacings)?
    };

    // lambda tau_r * 2 pi + phi_r * pi = 2 pi n  =>  phi_r = 2 n - 2 lambda tau_r.
    let two = Rational::from_integer(2);
    let (phi, _) = (-(&two * &(reference * &tau))).reduce_symmetric(&Rational::one());

    let half_phi = &phi / &two;
    let mut branches = Vec::with_capacity(values.len());
    for v in &values {
        let n = (&(*v * &tau) + &half_phi)
            .to_integer()
            .ok_or_else(|| PhaseError::Inconsistent(format!("level {v} does not return with phase {phi} pi")))?;
        branches.push(n);
    }
    if values.iter().any(|v| v.is_zero()) && !phi.is_zero() {
        return Err(PhaseError::Inconsistent("zero level occupied but phi != 0 mod 2 pi".into()));
    }

    let tau_value = TAU * tau.to_f64() / unit;
    let phi_value = PI * phi.to_f64();
    Ok(Loop {
        occupied,
        stationary,
        tau: PhaseValue { exact: Some(tau), value: tau_value },
        phi: PhaseValue { exact: Some(phi), value: phi_value },
        branches,
    })
}

fn solve_inexact(occupied: Vec<Occupied>, stationary: bool, unit: f64) -> Result<Loop, PhaseError> {
    let values: Vec<f64> = occupied.iter().map(|o| o.value.to_f64() * unit).collect();
    let tau = if stationary {
        if values[0] == 0.0 {
            return Err(PhaseError::NoFinitePeriod);
        }
        TAU / values[0].abs()
    } else {
        TAU / (values[1] - values[0]).abs()
    };
    let phi = wrap_to_pi(-values[0] * tau);
    let mut branches = Vec::with_capacity(values.len());
    for &v in &values {
        let turns = (v * tau + phi) / TAU;
        let n = turns.round();
        if (turns - n).abs() > 1e-9 * turns.abs().max(1.0) {
            return Err(PhaseError::Inconsistent(format!("level {v} misses the return by {} turns", turns - n)));
        }
        branches.push(BigInt::from(n as i64));
    }
    Ok(Loop {
        occupied,
        stationary,
        tau: PhaseValue { exact: None, value: tau },
        phi: PhaseValue { exact: None, value: phi },
        branches,
    })
}

impl Loop {
    fn branch_map(&self) -> BTreeMap<String, BigInt> {
        self.occupied
            .iter()
            .zip(&self.branches)
            .flat_map(|(o, n)| o.labels.iter().map(move |l| (l.clone(), n.clone())))
            .collect()
    }

    fn gamma(&self, mean_energy: f64) -> f64 {
        if self.stationary {
            return 0.0;
        }
        if self.tau.exact.is_none() {
            return wrap_to_2pi(self.phi.value + self.tau.value * mean_energy);
        }
        // phi + tau <H> = sum_k w_k (phi + tau lambda_k) = 2 pi sum_k w_k n_k.
        // Folding every level's phase into its branch integer keeps the sum
        // small and exact up to the weights.
        let total: f64 = self.occupied.iter().map(|o| o.weight).sum();
        let n0 = &self.branches[0];
        let turns: f64 = self
            .occupied
            .iter()
            .zip(&self.branches)
            .map(|(o, n)| o.weight / total * (n - n0).to_f64().unwrap_or(f64::NAN))
            .sum();
        wrap_to_2pi(TAU * (turns - turns.floor()))
    }
}

/// Period of the cyclic evolution.
pub fn period(spectrum: &Spectrum, state: &StateDecomposition) -> Result<PhaseValue, PhaseError> {
    Ok(solve(spectrum, state)?.tau)
}

/// Total phase on the canonical branch plus the branch integer of every
/// occupied level.
pub fn total_phase(spectrum: &Spectrum, state: &StateDecomposition) -> Result<TotalPhase, PhaseError> {
    let lp = solve(spectrum, state)?;
    if lp.occupied.len() > 2 && lp.phi.exact.is_none() {
        return Err(PhaseError::Inconsistent("phi / pi must be rational beyond two levels".into()));
    }
    Ok(TotalPhase {
        branch_integers: lp.branch_map(),
        phi: lp.phi,
    })
}

/// `<H> = unit * sum |c_k|^2 lambda_k`.
pub fn mean_energy(spectrum: &Spectrum, state: &StateDecomposition) -> Result<f64, PhaseError> {
    state.check_against(spectrum)?;
    let sum: f64 = state
        .entries()
        .iter()
        .map(|(label, c)| c.norm_sqr() * spectrum.level(label).expect("checked").value.to_f64())
        .sum();
    Ok(sum * spectrum.unit())
}

/// Aharonov-Anandan phase from the full occupied spectrum.
pub fn geometric_phase(spectrum: &Spectrum, state: &StateDecomposition) -> Result<PhaseReport, PhaseError> {
    let lp = solve(spectrum, state)?;
    let mean = mean_energy(spectrum, state)?;
    Ok(PhaseReport {
        method: Method::FullSpectrum,
        stationary: lp.stationary,
        unit: spectrum.unit(),
        gamma: lp.gamma(mean),
        mean_energy: mean,
        branch_integers: lp.branch_map(),
        tau: lp.tau,
        phi: lp.phi,
        fidelity: None,
    })
}

/// Shift every eigenvalue by `c` (in units of the spectrum's unit).
pub fn gauge_shift(spectrum: &Spectrum, c: &Rational) -> Spectrum {
    let dc = c.to_f64();
    spectrum.map_values(|v| match v {
        LevelValue::Exact(r) => LevelValue::Exact(r + c),
        LevelValue::Inexact(x) => LevelValue::Inexact(x + dc),
    })
}

/// `gamma = phi (1 - <H> / lambda)` from one eigenvalue and a known total phase.
///
/// `lambda` and `mean_h` share a unit. `phi` must be the branch with
/// `lambda tau = -phi`; see [`PhaseReport::phi_branch_for`].
pub fn gamma_from_single_eigenvalue_phi(lambda: &Rational, mean_h: f64, phi: f64) -> Result<f64, PhaseError> {
    if lambda.is_zero() {
        return Err(PhaseError::ZeroEigenvalue);
    }
    Ok(wrap_to_2pi(phi * (1.0 - mean_h / lambda.to_f64())))
}

/// `gamma = tau (<H> - lambda)` from one eigenvalue and a known period.
///
/// `lambda` and `mean_h` share a unit and `tau` is measured in hbar over that unit.
pub fn gamma_from_single_eigenvalue_tau(lambda: &Rational, mean_h: f64, tau: f64) -> Result<f64, PhaseError> {
    if tau.is_nan() || tau <= 0.0 {
        return Err(PhaseError::NonPositivePeriod(tau));
    }
    Ok(wrap_to_2pi(tau * (mean_h - lambda.to_f64())))
}
