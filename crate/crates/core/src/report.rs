//! Plain-text serialization of phase reports and result tables.
//!
//! Reports are `key: value` lines. Exact rationals are written `p/q`, reals
//! with 17 significant digits, so a report parses back to the identical
//! value and identical inputs give byte-identical files.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_bigint::BigInt;
use thiserror::Error;

use crate::constraint::{CyclicityCandidate, GaugedCandidate};
use crate::phase::{Cyclicity, Method, PhaseReport, PhaseValue};
use crate::rational::Rational;
use crate::textfmt::{format_real, parse_real};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("bad report line {line}: {message}")]
pub struct ReportParseError {
    pub line: usize,
    pub message: String,
}

fn exact_or_none(x: &Option<Rational>) -> String {
    x.as_ref().map_or_else(|| "none".to_string(), Rational::to_string)
}

pub fn cyclicity_line(c: &Cyclicity) -> String {
    match c {
        Cyclicity::Cyclic => "cyclic".into(),
        Cyclicity::Stationary => "stationary".into(),
        Cyclicity::NonCyclic(reason) => format!("non-cyclic ({reason})"),
    }
}

/// Serialize a report. `tau` and `phi` carry their exact values in units of
/// `2 pi / unit` and pi (or `none`), next to the real values.
pub fn write_phase_report(r: &PhaseReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "method: {}", r.method.as_str());
    let _ = writeln!(out, "stationary: {}", r.stationary);
    let _ = writeln!(out, "unit: {}", format_real(r.unit));
    let _ = writeln!(out, "tau: {}", exact_or_none(&r.tau.exact));
    let _ = writeln!(out, "tau_value: {}", format_real(r.tau.value));
    let _ = writeln!(out, "phi: {}", exact_or_none(&r.phi.exact));
    let _ = writeln!(out, "phi_value: {}", format_real(r.phi.value));
    let _ = writeln!(out, "gamma: {}", format_real(r.gamma));
    let _ = writeln!(out, "mean_energy: {}", format_real(r.mean_energy));
    let _ = writeln!(out, "fidelity: {}", r.fidelity.map_or_else(|| "none".to_string(), format_real));
    for (label, n) in &r.branch_integers {
        let _ = writeln!(out, "branch[{label}]: {n}");
    }
    out
}

/// Parse the output of [`write_phase_report`]. Unknown keys are ignored so
/// that reports with extra sections still parse.
pub fn parse_phase_report(text: &str) -> Result<PhaseReport, ReportParseError> {
    let mut fields: BTreeMap<&str, (usize, &str)> = BTreeMap::new();
    let mut branches = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let Some((key, value)) = line.split_once(": ") else {
            continue;
        };
        let err = |message: String| ReportParseError { line: i + 1, message };
        if let Some(label) = key.strip_prefix("branch[").and_then(|k| k.strip_suffix(']')) {
            let n: BigInt = value.trim().parse().map_err(|_| err(format!("bad integer {value:?}")))?;
            branches.insert(label.to_string(), n);
        } else {
            fields.entry(key).or_insert((i + 1, value.trim()));
        }
    }
    let get = |key: &str| fields.get(key).copied().ok_or(ReportParseError {
        line: 0,
        message: format!("missing key {key:?}"),
    });
    let real = |key: &str| -> Result<f64, ReportParseError> {
        let (line, v) = get(key)?;
        parse_real(v).map_err(|e| ReportParseError { line, message: e.to_string() })
    };
    let exact = |key: &str| -> Result<Option<Rational>, ReportParseError> {
        let (line, v) = get(key)?;
        if v == "none" {
            return Ok(None);
        }
        v.parse::<Rational>()
            .map(Some)
            .map_err(|e| ReportParseError { line, message: e.to_string() })
    };
    let (line, m) = get("method")?;
    let method = Method::parse(m).ok_or(ReportParseError {
        line,
        message: format!("unknown method {m:?}"),
    })?;
    let (line, s) = get("stationary")?;
    let stationary = s.parse::<bool>().map_err(|e| ReportParseError { line, message: e.to_string() })?;
    let fidelity = match get("fidelity")? {
        (_, "none") => None,
        _ => Some(real("fidelity")?),
    };
    Ok(PhaseReport {
        method,
        stationary,
        unit: real("unit")?,
        tau: PhaseValue {
            exact: exact("tau")?,
            value: real("tau_value")?,
        },
        phi: PhaseValue {
            exact: exact("phi")?,
            value: real("phi_value")?,
        },
        gamma: real("gamma")?,
        mean_energy: real("mean_energy")?,
        branch_integers: branches,
        fidelity,
    })
}

/// One line of a route comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub quantity: String,
    pub reference: f64,
    pub candidate: f64,
    pub difference: f64,
    pub tolerance: f64,
}

impl ComparisonRow {
    pub fn passed(&self) -> bool {
        self.difference <= self.tolerance
    }
}

pub const COMPARISON_HEADER: &str = "quantity|exact|oracle|abs_diff|tolerance|status";

pub fn write_comparison_table(rows: &[ComparisonRow]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{COMPARISON_HEADER}");
    for r in rows {
        let _ = writeln!(
            out,
            "{}|{}|{}|{}|{}|{}",
            r.quantity,
            format_real(r.reference),
            format_real(r.candidate),
            format_real(r.difference),
            format_real(r.tolerance),
            if r.passed() { "pass" } else { "fail" }
        );
    }
    out
}

pub const CANDIDATE_HEADER: &str = "n|m|phi|tau|shift|gamma";

/// `n|m|phi|tau|shift|gamma` rows; `phi` as `p/q π` on the canonical branch,
/// `tau` as `p/q · 2πℏ/unit`, `gamma` (if a mean energy is known) in radians.
pub fn write_candidate_table(rows: &[(CyclicityCandidate, GaugedCandidate, Option<f64>)]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{CANDIDATE_HEADER}");
    for (c, g, gamma) in rows {
        let _ = writeln!(
            out,
            "{}|{}|{} π|{} · 2πℏ/unit|{}|{}",
            c.n,
            c.m,
            c.phi_mod_2pi(),
            c.tau,
            g.shift,
            gamma.map_or_else(|| "none".to_string(), format_real)
        );
    }
    out
}
