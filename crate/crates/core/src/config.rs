//! TOML run configuration.
//!
//! ```toml
//! model = "spin_half"
//! out = "spin.report"          # optional, overridden by --out
//!
//! [spin_half]
//! mu_B0 = 1.0
//! theta = 1.0471975511965976
//!
//! [options]                    # all optional
//! n_range = 16
//! fidelity_tol = 1e-8
//! t_max = 10.0
//! tolerance = 1e-6
//! approximate = false
//! ```
//!
//! Complex numbers are strings such as `"0.5+0.2i"`, rationals strings such
//! as `"1/2"`. Exactly one model section must be present and it must match
//! `model`.

use std::path::{Path, PathBuf};

use nalgebra::DVector;
use num_complex::Complex64;
use serde::Deserialize;
use thiserror::Error;

use crate::constraint::DEFAULT_N_RANGE;
use crate::models::{coherent_occupation, ModeState, SpinHalfParams, ThreeMirrorParams, TwoMirrorParams};
use crate::oracle::DenseHamiltonian;
use crate::rational::{rationalize, Rational};
use crate::spectrum::{Level, LevelValue, Spectrum};
use crate::textfmt::{parse_complex, parse_real};

pub const DEFAULT_MAX_DENOMINATOR: u64 = 1000;
pub const DEFAULT_RATIONALIZE_TOL: f64 = 1e-12;
pub const DEFAULT_VERIFY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("config error: {0}")]
pub struct ConfigError(pub String);

fn cerr(msg: impl Into<String>) -> ConfigError {
    ConfigError(msg.into())
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    model: String,
    out: Option<PathBuf>,
    spin_half: Option<RawSpinHalf>,
    free_field: Option<RawFreeField>,
    two_mirror: Option<RawTwoMirror>,
    three_mirror: Option<RawThreeMirror>,
    raw_spectrum: Option<RawSpectrum>,
    dense_matrix: Option<RawDense>,
    constrain: Option<RawConstrain>,
    options: Option<RawOptions>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpinHalf {
    #[serde(rename = "mu_B0")]
    mu_b0: f64,
    theta: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFreeField {
    omega: f64,
    occupied: Option<Vec<u32>>,
    amplitudes: Option<Vec<String>>,
    alpha: Option<String>,
    truncation: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTwoMirror {
    omega_m: f64,
    r: String,
    k2: String,
    field_amplitudes: Vec<String>,
    beta: String,
    mirror_truncation: usize,
    closed_form_p: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
struct RawThreeMirror {
    omega_D: f64,
    omega_S: f64,
    omega_m: f64,
    C_D: f64,
    C_S: f64,
    alpha: Option<String>,
    beta: Option<String>,
    mu: Option<String>,
    A_n: Option<Vec<String>>,
    B_n: Option<Vec<String>>,
    M_n: Option<Vec<String>>,
    truncations: [usize; 3],
    closed_form_p: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpectrum {
    unit: Option<f64>,
    labels: Option<Vec<String>>,
    values: Vec<String>,
    amplitudes: Option<Vec<String>>,
    normalize: Option<bool>,
    max_denominator: Option<u64>,
    tolerance: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDense {
    unit: Option<f64>,
    path: Option<PathBuf>,
    rows: Option<Vec<Vec<String>>>,
    psi0: Vec<String>,
    max_denominator: Option<u64>,
    tolerance: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConstrain {
    #[serde(default)]
    trials: Vec<String>,
    mean_energy: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOptions {
    n_range: Option<u32>,
    fidelity_tol: Option<f64>,
    t_max: Option<f64>,
    tolerance: Option<f64>,
    approximate: Option<bool>,
}

#[derive(Debug, Clone)]
pub enum ModelConfig {
    SpinHalf(SpinHalfParams),
    FreeField {
        omega: f64,
        occupied: Vec<(u32, Complex64)>,
    },
    TwoMirror {
        params: TwoMirrorParams,
        closed_form_p: Option<u64>,
    },
    ThreeMirror {
        params: ThreeMirrorParams,
        closed_form_p: Option<u64>,
    },
    RawSpectrum {
        spectrum: Spectrum,
        amplitudes: Option<Vec<(String, Complex64)>>,
        normalize: bool,
    },
    DenseMatrix {
        hamiltonian: DenseHamiltonian,
        psi0: DVector<Complex64>,
        max_denominator: u64,
        tolerance: f64,
    },
}

impl ModelConfig {
    pub fn name(&self) -> &'static str {
        match self {
            ModelConfig::SpinHalf(_) => "spin_half",
            ModelConfig::FreeField { .. } => "free_field",
            ModelConfig::TwoMirror { .. } => "two_mirror",
            ModelConfig::ThreeMirror { .. } => "three_mirror",
            ModelConfig::RawSpectrum { .. } => "raw_spectrum",
            ModelConfig::DenseMatrix { .. } => "dense_matrix",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub n_range: u32,
    pub fidelity_tol: Option<f64>,
    pub t_max: Option<f64>,
    /// Pass/fail tolerance of `verify` rows.
    pub tolerance: f64,
    /// Accept near-returns (fidelity deficit up to `1e-4`) in the oracle.
    pub approximate: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            n_range: DEFAULT_N_RANGE,
            fidelity_tol: None,
            t_max: None,
            tolerance: DEFAULT_VERIFY_TOL,
            approximate: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstrainConfig {
    pub trials: Vec<Rational>,
    pub mean_energy: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub model: ModelConfig,
    pub options: RunOptions,
    pub constrain: Option<ConstrainConfig>,
    pub out: Option<PathBuf>,
}

fn complex(s: &str) -> Result<Complex64, ConfigError> {
    parse_complex(s).map_err(|e| cerr(e.to_string()))
}

fn complexes(v: &[String]) -> Result<Vec<Complex64>, ConfigError> {
    v.iter().map(|s| complex(s)).collect()
}

fn rational(s: &str) -> Result<Rational, ConfigError> {
    s.parse::<Rational>().map_err(|e| cerr(format!("{s:?}: {e}")))
}

/// A level value given as `p/q`, or as a real that is rationalized when
/// possible and otherwise kept inexact.
fn level_value(s: &str, max_den: u64, tol: f64) -> Result<LevelValue, ConfigError> {
    if let Ok(r) = s.parse::<Rational>() {
        return Ok(LevelValue::Exact(r));
    }
    let x = parse_real(s).map_err(|e| cerr(e.to_string()))?;
    Ok(match rationalize(x, max_den, tol) {
        Ok(r) => LevelValue::Exact(r),
        Err(_) => LevelValue::Inexact(x),
    })
}

fn positive(name: &str, x: f64) -> Result<f64, ConfigError> {
    if x.is_finite() && x > 0.0 {
        Ok(x)
    } else {
        Err(cerr(format!("{name} must be positive, got {x}")))
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| cerr(format!("{}: {e}", path.display())))?;
        Self::parse(&text, path.parent())
    }

    /// Parse a config; relative file paths inside it resolve against `base`.
    pub fn parse(text: &str, base: Option<&Path>) -> Result<RunConfig, ConfigError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| cerr(e.to_string()))?;
        let present = [
            ("spin_half", raw.spin_half.is_some()),
            ("free_field", raw.free_field.is_some()),
            ("two_mirror", raw.two_mirror.is_some()),
            ("three_mirror", raw.three_mirror.is_some()),
            ("raw_spectrum", raw.raw_spectrum.is_some()),
            ("dense_matrix", raw.dense_matrix.is_some()),
        ];
        let sections: Vec<&str> = present.iter().filter(|p| p.1).map(|p| p.0).collect();
        if sections != [raw.model.as_str()] {
            return Err(cerr(format!(
                "model = {:?} needs exactly one matching model section, found {:?}",
                raw.model, sections
            )));
        }
        let model = match raw.model.as_str() {
            "spin_half" => {
                let s = raw.spin_half.unwrap();
                ModelConfig::SpinHalf(SpinHalfParams {
                    mu_b0: positive("mu_B0", s.mu_b0)?,
                    theta: s.theta,
                })
            }
            "free_field" => free_field(raw.free_field.unwrap())?,
            "two_mirror" => {
                let s = raw.two_mirror.unwrap();
                ModelConfig::TwoMirror {
                    params: TwoMirrorParams {
                        omega_m: positive("omega_m", s.omega_m)?,
                        r: rational(&s.r)?,
                        k2: rational(&s.k2)?,
                        field_amplitudes: complexes(&s.field_amplitudes)?,
                        beta: complex(&s.beta)?,
                        mirror_truncation: s.mirror_truncation,
                    },
                    closed_form_p: s.closed_form_p,
                }
            }
            "three_mirror" => three_mirror(raw.three_mirror.unwrap())?,
            "raw_spectrum" => raw_spectrum(raw.raw_spectrum.unwrap())?,
            "dense_matrix" => dense(raw.dense_matrix.unwrap(), base)?,
            other => return Err(cerr(format!("unknown model {other:?}"))),
        };
        let o = raw.options.unwrap_or_default();
        let defaults = RunOptions::default();
        let options = RunOptions {
            n_range: o.n_range.unwrap_or(defaults.n_range),
            fidelity_tol: o.fidelity_tol.map(|x| positive("fidelity_tol", x)).transpose()?,
            t_max: o.t_max.map(|x| positive("t_max", x)).transpose()?,
            tolerance: positive("tolerance", o.tolerance.unwrap_or(defaults.tolerance))?,
            approximate: o.approximate.unwrap_or(false),
        };
        let constrain = raw
            .constrain
            .map(|c| {
                Ok::<_, ConfigError>(ConstrainConfig {
                    trials: c.trials.iter().map(|t| rational(t)).collect::<Result<_, _>>()?,
                    mean_energy: c.mean_energy,
                })
            })
            .transpose()?;
        Ok(RunConfig {
            model,
            options,
            constrain,
            out: raw.out.map(|p| match base {
                Some(b) if p.is_relative() => b.join(p),
                _ => p,
            }),
        })
    }
}

fn free_field(s: RawFreeField) -> Result<ModelConfig, ConfigError> {
    let omega = positive("omega", s.omega)?;
    let occupied = match (s.occupied, s.amplitudes, s.alpha, s.truncation) {
        (Some(n), Some(a), None, None) => {
            if n.len() != a.len() {
                return Err(cerr("free_field: occupied and amplitudes differ in length"));
            }
            n.into_iter().zip(complexes(&a)?).collect()
        }
        (None, None, Some(alpha), Some(t)) => coherent_occupation(complex(&alpha)?, t).map_err(|e| cerr(e.to_string()))?,
        _ => return Err(cerr("free_field: give either occupied + amplitudes or alpha + truncation")),
    };
    Ok(ModelConfig::FreeField { omega, occupied })
}

#[allow(non_snake_case)]
fn three_mirror(s: RawThreeMirror) -> Result<ModelConfig, ConfigError> {
    let mode = |name: &str, coherent: &Option<String>, list: &Option<Vec<String>>| match (coherent, list) {
        (Some(a), None) => Ok(ModeState::Coherent(complex(a)?)),
        (None, Some(v)) => Ok(ModeState::Amplitudes(complexes(v)?)),
        _ => Err(cerr(format!("three_mirror: give exactly one of the coherent amplitude or the list for mode {name}"))),
    };
    Ok(ModelConfig::ThreeMirror {
        params: ThreeMirrorParams {
            omega_d: s.omega_D,
            omega_s: s.omega_S,
            omega_m: positive("omega_m", s.omega_m)?,
            c_d: s.C_D,
            c_s: s.C_S,
            a: mode("a", &s.alpha, &s.A_n)?,
            b: mode("b", &s.beta, &s.B_n)?,
            mirror: mode("m", &s.mu, &s.M_n)?,
            truncations: s.truncations,
        },
        closed_form_p: s.closed_form_p,
    })
}

fn raw_spectrum(s: RawSpectrum) -> Result<ModelConfig, ConfigError> {
    let unit = positive("unit", s.unit.unwrap_or(1.0))?;
    let max_den = s.max_denominator.unwrap_or(DEFAULT_MAX_DENOMINATOR);
    let tol = s.tolerance.unwrap_or(DEFAULT_RATIONALIZE_TOL);
    let labels: Vec<String> = match s.labels {
        Some(l) if l.len() == s.values.len() => l,
        Some(_) => return Err(cerr("raw_spectrum: labels and values differ in length")),
        None => (0..s.values.len()).map(|i| i.to_string()).collect(),
    };
    let levels = labels
        .iter()
        .zip(&s.values)
        .map(|(label, v)| {
            Ok(Level {
                label: label.clone(),
                value: level_value(v, max_den, tol)?,
            })
        })
        .collect::<Result<Vec<_>, ConfigError>>()?;
    let spectrum = Spectrum::from_levels(unit, levels).map_err(|e| cerr(e.to_string()))?;
    let amplitudes = match s.amplitudes {
        Some(a) if a.len() == labels.len() => Some(labels.iter().cloned().zip(complexes(&a)?).collect()),
        Some(_) => return Err(cerr("raw_spectrum: amplitudes and values differ in length")),
        None => None,
    };
    Ok(ModelConfig::RawSpectrum {
        spectrum,
        amplitudes,
        normalize: s.normalize.unwrap_or(false),
    })
}

fn dense(s: RawDense, base: Option<&Path>) -> Result<ModelConfig, ConfigError> {
    let hamiltonian = match (s.path, s.rows) {
        (Some(p), None) => {
            let p = match base {
                Some(b) if p.is_relative() => b.join(p),
                _ => p,
            };
            let text = std::fs::read_to_string(&p).map_err(|e| cerr(format!("{}: {e}", p.display())))?;
            DenseHamiltonian::from_text(&text).map_err(|e| cerr(e.to_string()))?
        }
        (None, Some(rows)) => {
            let rows = rows.iter().map(|r| complexes(r)).collect::<Result<Vec<_>, _>>()?;
            DenseHamiltonian::from_rows(&rows, positive("unit", s.unit.unwrap_or(1.0))?).map_err(|e| cerr(e.to_string()))?
        }
        _ => return Err(cerr("dense_matrix: give exactly one of path or rows")),
    };
    let psi0 = DVector::from_vec(complexes(&s.psi0)?);
    if psi0.len() != hamiltonian.dimension() {
        return Err(cerr(format!(
            "dense_matrix: psi0 has {} entries, matrix dimension is {}",
            psi0.len(),
            hamiltonian.dimension()
        )));
    }
    Ok(ModelConfig::DenseMatrix {
        hamiltonian,
        psi0,
        max_denominator: s.max_denominator.unwrap_or(DEFAULT_MAX_DENOMINATOR),
        tolerance: s.tolerance.unwrap_or(DEFAULT_RATIONALIZE_TOL),
    })
}
