//! Spectra and state decompositions over an energy eigenbasis.

use std::collections::{BTreeMap, HashSet};

use num_complex::Complex64;
use thiserror::Error;

use crate::rational::{rationalize, Rational};

/// Normalization tolerance for [`StateDecomposition`].
pub const NORM_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectrumError {
    #[error("spectrum must contain at least one level")]
    Empty,
    #[error("duplicate level label {0:?}")]
    DuplicateLabel(String),
    #[error("energy unit must be positive and finite, got {0}")]
    BadUnit(f64),
    #[error("state/spectrum mismatch: no level labelled {0:?}")]
    UnknownLabel(String),
    #[error("state is not normalized: sum of |c|^2 = {0}")]
    NotNormalized(f64),
    #[error("state has no nonzero amplitude")]
    EmptyState,
}

/// Eigenvalue of a level in units of the spectrum's energy unit.
///
/// `Inexact` marks a value that could not be rationalized; it can still take
/// part in a two-level cyclic evolution but never in an LCM.
#[derive(Debug, Clone, PartialEq)]
pub enum LevelValue {
    Exact(Rational),
    Inexact(f64),
}

impl LevelValue {
    pub fn to_f64(&self) -> f64 {
        match self {
            LevelValue::Exact(r) => r.to_f64(),
            LevelValue::Inexact(x) => *x,
        }
    }

    pub fn exact(&self) -> Option<&Rational> {
        match self {
            LevelValue::Exact(r) => Some(r),
            LevelValue::Inexact(_) => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            LevelValue::Exact(r) => r.is_zero(),
            LevelValue::Inexact(x) => *x == 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Level {
    pub label: String,
    pub value: LevelValue,
}

/// Eigenvalues of a Hamiltonian, in units of `unit` (with hbar = 1).
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    unit: f64,
    levels: Vec<Level>,
    index: BTreeMap<String, usize>,
}

impl Spectrum {
    pub fn new<L, I>(unit: f64, levels: I) -> Result<Self, SpectrumError>
    where
        L: Into<String>,
        I: IntoIterator<Item = (L, Rational)>,
    {
        Self::from_levels(
            unit,
            levels.into_iter().map(|(label, value)| Level {
                label: label.into(),
                value: LevelValue::Exact(value),
            }),
        )
    }

    /// Build a spectrum from real eigenvalues. Values that do not rationalize
    /// within `tolerance` at `max_denominator` are kept as [`LevelValue::Inexact`].
    pub fn from_reals<L, I>(
        unit: f64,
        levels: I,
        max_denominator: u64,
        tolerance: f64,
    ) -> Result<Self, SpectrumError>
    where
        L: Into<String>,
        I: IntoIterator<Item = (L, f64)>,
    {
        Self::from_levels(
            unit,
            levels.into_iter().map(|(label, x)| Level {
                label: label.into(),
                value: match rationalize(x, max_denominator, tolerance) {
                    Ok(r) => LevelValue::Exact(r),
                    Err(_) => LevelValue::Inexact(x),
                },
            }),
        )
    }

    pub fn from_levels<I>(unit: f64, levels: I) -> Result<Self, SpectrumError>
    where
        I: IntoIterator<Item = Level>,
    {
        if !(unit.is_finite() && unit > 0.0) {
            return Err(SpectrumError::BadUnit(unit));
        }
        let levels: Vec<Level> = levels.into_iter().collect();
        if levels.is_empty() {
            return Err(SpectrumError::Empty);
        }
        let mut index = BTreeMap::new();
        for (i, level) in levels.iter().enumerate() {
            if index.insert(level.label.clone(), i).is_some() {
                return Err(SpectrumError::DuplicateLabel(level.label.clone()));
            }
        }
        Ok(Spectrum { unit, levels, index })
    }

    pub fn unit(&self) -> f64 {
        self.unit
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn level(&self, label: &str) -> Option<&Level> {
        self.index.get(label).map(|&i| &self.levels[i])
    }

    /// Same levels and labels with every eigenvalue mapped through `f`.
    pub(crate) fn map_values(&self, f: impl Fn(&LevelValue) -> LevelValue) -> Spectrum {
        Spectrum {
            unit: self.unit,
            levels: self
                .levels
                .iter()
                .map(|l| Level {
                    label: l.label.clone(),
                    value: f(&l.value),
                })
                .collect(),
            index: self.index.clone(),
        }
    }
}

/// Amplitudes of a state on the eigenbasis of a [`Spectrum`].
///
/// Only nonzero amplitudes are stored, so the entry labels are exactly the
/// occupied levels.
#[derive(Debug, Clone, PartialEq)]
pub struct StateDecomposition {
    entries: Vec<(String, Complex64)>,
}

impl StateDecomposition {
    /// Strict constructor: amplitudes must already be normalized to
    /// [`NORM_TOLERANCE`].
    pub fn new<L, I>(spectrum: &Spectrum, entries: I) -> Result<Self, SpectrumError>
    where
        L: Into<String>,
        I: IntoIterator<Item = (L, Complex64)>,
    {
        let state = Self::collect(spectrum, entries)?;
        let norm = state.norm_sqr();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(SpectrumError::NotNormalized(norm));
        }
        Ok(state)
    }

    /// Rescale the amplitudes to unit norm before validating.
    pub fn normalized<L, I>(spectrum: &Spectrum, entries: I) -> Result<Self, SpectrumError>
    where
        L: Into<String>,
        I: IntoIterator<Item = (L, Complex64)>,
    {
        let mut state = Self::collect(spectrum, entries)?;
        let scale = state.norm_sqr().sqrt();
        for (_, c) in &mut state.entries {
            *c /= scale;
        }
        Ok(state)
    }

    fn collect<L, I>(spectrum: &Spectrum, entries: I) -> Result<Self, SpectrumError>
    where
        L: Into<String>,
        I: IntoIterator<Item = (L, Complex64)>,
    {
        let mut seen = HashSet::new();
        let mut kept = Vec::new();
        for (label, amp) in entries {
            let label = label.into();
            if spectrum.level(&label).is_none() {
                return Err(SpectrumError::UnknownLabel(label));
            }
            if !seen.insert(label.clone()) {
                return Err(SpectrumError::DuplicateLabel(label));
            }
            if amp != Complex64::new(0.0, 0.0) {
                kept.push((label, amp));
            }
        }
        if kept.is_empty() {
            return Err(SpectrumError::EmptyState);
        }
        Ok(StateDecomposition { entries: kept })
    }

    pub fn entries(&self) -> &[(String, Complex64)] {
        &self.entries
    }

    pub fn amplitude(&self, label: &str) -> Option<Complex64> {
        self.entries.iter().find(|(l, _)| l == label).map(|(_, c)| *c)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.entries.iter().map(|(_, c)| c.norm_sqr()).sum()
    }

    /// Check that every label names a level of `spectrum`.
    pub fn check_against(&self, spectrum: &Spectrum) -> Result<(), SpectrumError> {
        match self.entries.iter().find(|(l, _)| spectrum.level(l).is_none()) {
            Some((l, _)) => Err(SpectrumError::UnknownLabel(l.clone())),
            None => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_level() -> Spectrum {
        Spectrum::new(1.0, [("a", Rational::frac(2, 1)), ("b", Rational::frac(3, 1))]).unwrap()
    }

    #[test]
    fn rejects_bad_spectra() {
        assert_eq!(
            Spectrum::new(1.0, Vec::<(String, Rational)>::new()),
            Err(SpectrumError::Empty)
        );
        assert_eq!(
            Spectrum::new(1.0, [("a", Rational::one()), ("a", Rational::zero())]),
            Err(SpectrumError::DuplicateLabel("a".into()))
        );
        assert!(matches!(
            Spectrum::new(0.0, [("a", Rational::one())]),
            Err(SpectrumError::BadUnit(_))
        ));
    }

    #[test]
    fn degenerate_values_allowed() {
        let s = Spectrum::new(1.0, [("a", Rational::one()), ("b", Rational::one())]).unwrap();
        assert_eq!(s.len(), 2);
    }

    #[test]
    fn from_reals_marks_irrational_levels() {
        let s = Spectrum::from_reals(1.0, [("0", 0.0), ("1", 1.0), ("r2", 2f64.sqrt())], 100, 1e-9).unwrap();
        assert_eq!(s.level("1").unwrap().value, LevelValue::Exact(Rational::one()));
        assert!(matches!(s.level("r2").unwrap().value, LevelValue::Inexact(_)));
    }

    #[test]
    fn state_validation() {
        let s = two_level();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let c = |x: f64| Complex64::new(x, 0.0);
        assert!(StateDecomposition::new(&s, [("a", c(h)), ("b", c(h))]).is_ok());
        assert!(matches!(
            StateDecomposition::new(&s, [("a", c(1.0)), ("b", c(1.0))]),
            Err(SpectrumError::NotNormalized(_))
        ));
        assert_eq!(
            StateDecomposition::new(&s, [("z", c(1.0))]),
            Err(SpectrumError::UnknownLabel("z".into()))
        );
        let st = StateDecomposition::new(&s, [("a", c(1.0)), ("b", c(0.0))]).unwrap();
        assert_eq!(st.entries().len(), 1);
        let st = StateDecomposition::normalized(&s, [("a", c(3.0)), ("b", c(4.0))]).unwrap();
        assert!((st.norm_sqr() - 1.0).abs() < 1e-15);
    }
}
