//! Constraints from a partially known spectrum.
//!
//! When only two occupied eigenvalues `L1`, `L2` are known and the state is
//! assumed cyclic, each must satisfy `phi = 2 pi n - L tau` with its own
//! integer. Solving the pair gives a lattice of admissible `(phi, tau)`:
//!
//! ```text
//! phi = 2 pi (L1 m - L2 n) / (L1 - L2)
//! tau = 2 pi (n - m) / (L1 - L2)
//! ```
//!
//! After a gauge shift that sets `phi = 0`, every other occupied eigenvalue
//! `Lk` must obey `Lk n = L1 k'` for some integer `k'`.

use std::collections::BTreeSet;
use std::f64::consts::{PI, TAU};

use num_bigint::BigInt;
use thiserror::Error;

use crate::phase::wrap_to_2pi;
use crate::rational::{rationalize, Rational};

pub const DEFAULT_N_RANGE: u32 = 16;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConstraintError {
    #[error("partial spectrum needs at least one known eigenvalue")]
    Empty,
    #[error("at least two known eigenvalues are required, got {0}")]
    NeedTwoEigenvalues(usize),
    #[error("known eigenvalues must be distinct, {0} repeats")]
    Repeated(String),
    #[error("no cyclic motion possible: {0}")]
    NoCyclicMotion(String),
    #[error("energy unit must be positive and finite, got {0}")]
    BadUnit(f64),
    #[error("internal consistency failure: {0}")]
    Inconsistent(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct KnownEigenvalue {
    pub label: String,
    pub value: Rational,
}

impl KnownEigenvalue {
    pub fn is_nonzero(&self) -> bool {
        !self.value.is_zero()
    }
}

/// Known part of the occupied spectrum, in units of `unit`.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialSpectrum {
    unit: f64,
    known: Vec<KnownEigenvalue>,
}

impl PartialSpectrum {
    pub fn new<L, I>(unit: f64, known: I) -> Result<Self, ConstraintError>
    where
        L: Into<String>,
        I: IntoIterator<Item = (L, Rational)>,
    {
        if !(unit.is_finite() && unit > 0.0) {
            return Err(ConstraintError::BadUnit(unit));
        }
        let mut list: Vec<KnownEigenvalue> = Vec::new();
        for (label, value) in known {
            let label = label.into();
            if list.iter().any(|k| k.value == value) {
                return Err(ConstraintError::Repeated(label));
            }
            list.push(KnownEigenvalue { label, value });
        }
        if list.is_empty() {
            return Err(ConstraintError::Empty);
        }
        Ok(PartialSpectrum { unit, known: list })
    }

    /// Rationalize real eigenvalues. A value with no rational form makes the
    /// ratio of known eigenvalues irrational, which rules out cyclic motion.
    pub fn from_reals<L, I>(unit: f64, known: I, max_denominator: u64, tolerance: f64) -> Result<Self, ConstraintError>
    where
        L: Into<String>,
        I: IntoIterator<Item = (L, f64)>,
    {
        let mut exact = Vec::new();
        for (label, x) in known {
            let label = label.into();
            let r = rationalize(x, max_denominator, tolerance)
                .map_err(|e| ConstraintError::NoCyclicMotion(format!("eigenvalue {label}: {e}")))?;
            exact.push((label, r));
        }
        Self::new(unit, exact)
    }

    pub fn unit(&self) -> f64 {
        self.unit
    }

    pub fn known(&self) -> &[KnownEigenvalue] {
        &self.known
    }

    fn pair(&self) -> Result<(&Rational, &Rational), ConstraintError> {
        match self.known.as_slice() {
            [a, b, ..] => Ok((&a.value, &b.value)),
            other => Err(ConstraintError::NeedTwoEigenvalues(other.len())),
        }
    }
}

/// One admissible `(phi, tau)` solution for the first two known eigenvalues.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CyclicityCandidate {
    pub n: i64,
    pub m: i64,
    /// Raw total phase in units of pi, before reduction mod 2 pi.
    pub phi: Rational,
    /// Period in units of `2 pi / unit`.
    pub tau: Rational,
}

impl CyclicityCandidate {
    /// Total phase reduced to the canonical branch `(-1, 1]`, units of pi.
    pub fn phi_mod_2pi(&self) -> Rational {
        self.phi.reduce_symmetric(&Rational::one()).0
    }

    pub fn tau_value(&self, unit: f64) -> f64 {
        TAU * self.tau.to_f64() / unit
    }

    fn key(&self) -> (Rational, Rational) {
        (self.tau.clone(), self.phi_mod_2pi())
    }
}

/// Every `(n, m)` with `|n|, |m| <= n_range`, `n != m` and positive period,
/// deduplicated by `(phi mod 2 pi, tau)` and sorted by period, then by
/// `|n| + |m|`.
pub fn enumerate_candidates(ps: &PartialSpectrum, n_range: u32) -> Result<Vec<CyclicityCandidate>, ConstraintError> {
    let (l1, l2) = ps.pair()?;
    let span = l1 - l2;
    let range = i64::from(n_range);
    let two = Rational::from_integer(2);

    let mut all = Vec::new();
    for n in -range..=range {
        for m in -range..=range {
            if n == m {
                continue;
            }
            let tau = &Rational::from_integer(n - m) / &span;
            if !tau.is_positive() {
                continue;
            }
            let phi = &(&two * &(&(l1 * &Rational::from_integer(m)) - &(l2 * &Rational::from_integer(n)))) / &span;
            all.push(CyclicityCandidate { n, m, phi, tau });
        }
    }
    all.sort_by(|a, b| {
        a.tau
            .cmp(&b.tau)
            .then((a.n.abs() + a.m.abs()).cmp(&(b.n.abs() + b.m.abs())))
            .then(a.n.cmp(&b.n))
            .then(a.m.cmp(&b.m))
    });
    let mut seen = BTreeSet::new();
    all.retain(|c| seen.insert(c.key()));
    Ok(all)
}

/// Candidates that are consistent for every pair `(L1, Lk)` of known
/// eigenvalues: the intersection of the pairwise `(phi mod 2 pi, tau)` sets.
pub fn consistent_candidates(ps: &PartialSpectrum, n_range: u32) -> Result<Vec<CyclicityCandidate>, ConstraintError> {
    let base = enumerate_candidates(ps, n_range)?;
    let first = &ps.known[0];
    let mut keep: BTreeSet<(Rational, Rational)> = base.iter().map(CyclicityCandidate::key).collect();
    for other in &ps.known[2..] {
        let pair = PartialSpectrum::new(ps.unit, [(first.label.clone(), first.value.clone()), (other.label.clone(), other.value.clone())])?;
        let keys: BTreeSet<_> = enumerate_candidates(&pair, n_range)?.iter().map(CyclicityCandidate::key).collect();
        keep = keep.intersection(&keys).cloned().collect();
    }
    Ok(base.into_iter().filter(|c| keep.contains(&c.key())).collect())
}

/// A candidate re-expressed in the gauge where the total phase vanishes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GaugedCandidate {
    /// Energy shift added to every eigenvalue, in units of the spectrum unit.
    pub shift: Rational,
    /// Period in units of `2 pi / unit`; unchanged by the shift.
    pub tau: Rational,
    /// The shifted eigenvalue used to express the period.
    pub reference: Rational,
    /// Integer with `tau = n / reference`.
    pub n: BigInt,
}

impl GaugedCandidate {
    pub fn tau_value(&self, unit: f64) -> f64 {
        TAU * self.tau.to_f64() / unit
    }

    /// The relation `Lk n = reference k'` every occupied eigenvalue obeys.
    pub fn constraint(&self) -> EigenvalueConstraint {
        EigenvalueConstraint {
            reference: self.reference.clone(),
            n: self.n.clone(),
        }
    }
}

/// `Lk n = reference k'` with `k'` ranging over the integers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EigenvalueConstraint {
    pub reference: Rational,
    pub n: BigInt,
}

impl EigenvalueConstraint {
    /// The integer `k'` for `trial`, if there is one.
    pub fn k_prime(&self, trial: &Rational) -> Option<BigInt> {
        (&(trial * &Rational::from_integer(self.n.clone())) / &self.reference).to_integer()
    }
}

/// Shift the spectrum so that the candidate's total phase is zero.
///
/// With the shift `c = phi / tau` the period takes the form
/// `tau = 2 pi hbar n / L1` in terms of the shifted `L1`. If the shifted `L1`
/// vanishes, the shifted `L2` is used as reference instead.
pub fn gauge_to_zero_phi(candidate: &CyclicityCandidate, ps: &PartialSpectrum) -> Result<GaugedCandidate, ConstraintError> {
    let (l1, l2) = ps.pair()?;
    // phi_r pi = c * 2 pi tau_r  =>  c = phi_r / (2 tau_r)
    let shift = &candidate.phi_mod_2pi() / &(&Rational::from_integer(2) * &candidate.tau);
    let s1 = l1 + &shift;
    let reference = if s1.is_zero() { l2 + &shift } else { s1 };
    let n = (&reference * &candidate.tau)
        .to_integer()
        .ok_or_else(|| ConstraintError::Inconsistent(format!("shifted eigenvalue {reference} does not return after {} periods", candidate.tau)))?;
    Ok(GaugedCandidate {
        shift,
        tau: candidate.tau.clone(),
        reference,
        n,
    })
}

/// Whether `trial` (an eigenvalue in the zero-phase gauge) can belong to the
/// occupied spectrum.
pub fn constrain_unknown(gauged: &GaugedCandidate, trial: &Rational) -> bool {
    gauged.constraint().k_prime(trial).is_some()
}

/// `gamma = 2 pi (n / L1) <H>` in the zero-phase gauge, reduced mod 2 pi.
/// `mean_h` is taken in the original gauge and units of the spectrum unit.
pub fn gamma_for(gauged: &GaugedCandidate, mean_h: f64) -> f64 {
    wrap_to_2pi(TAU * gauged.tau.to_f64() * (mean_h + gauged.shift.to_f64()))
}

/// Distinct geometric phases over a list of candidates, sorted, merged within
/// `1e-12`.
pub fn gamma_candidates(ps: &PartialSpectrum, candidates: &[CyclicityCandidate], mean_h: f64) -> Result<Vec<f64>, ConstraintError> {
    let mut out: Vec<f64> = Vec::new();
    for c in candidates {
        let g = gamma_for(&gauge_to_zero_phi(c, ps)?, mean_h);
        if !out.iter().any(|&x| crate::phase::angle_distance(x, g) < 1e-12) {
            out.push(g);
        }
    }
    out.sort_by(f64::total_cmp);
    Ok(out)
}

/// Finite set of values of `gamma / 2 pi` mod 1 reachable as `n` ranges over
/// `ns` when `<H> / L1 = ratio` is rational.
pub fn gamma_orbit(ratio: &Rational, ns: impl IntoIterator<Item = i64>) -> Vec<Rational> {
    let set: BTreeSet<Rational> = ns
        .into_iter()
        .map(|n| {
            let x = ratio * &Rational::from_integer(n);
            &x - &Rational::from_integer(x.floor())
        })
        .collect();
    set.into_iter().collect()
}

/// Total phase of a candidate in `(-pi, pi]`.
pub fn phi_value(candidate: &CyclicityCandidate) -> f64 {
    PI * candidate.phi_mod_2pi().to_f64()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ps(values: &[(i64, i64)]) -> PartialSpectrum {
        PartialSpectrum::new(
            1.0,
            values.iter().enumerate().map(|(i, &(p, q))| (format!("L{}", i + 1), Rational::frac(p, q))),
        )
        .unwrap()
    }

    #[test]
    fn two_three_candidates() {
        let p = ps(&[(2, 1), (3, 1)]);
        let cands = enumerate_candidates(&p, 5).unwrap();
        let first = &cands[0];
        assert_eq!(first.tau, Rational::one());
        assert_eq!(first.phi_mod_2pi(), Rational::zero());
        for c in &cands {
            // phi = 2 pi n - L1 tau = 2 pi m - L2 tau, in units of pi.
            let two = Rational::from_integer(2);
            assert_eq!(c.phi, &two * &(&Rational::from_integer(c.n) - &(&Rational::from_integer(2) * &c.tau)));
            assert_eq!(c.phi, &two * &(&Rational::from_integer(c.m) - &(&Rational::from_integer(3) * &c.tau)));
            assert!(c.tau.is_positive());
        }
        let g = gauge_to_zero_phi(
            &CyclicityCandidate { n: 2, m: 3, phi: Rational::zero(), tau: Rational::one() },
            &p,
        )
        .unwrap();
        assert_eq!(g.shift, Rational::zero());
        assert_eq!(g.n, BigInt::from(2));
        assert!((g.tau_value(1.0) - TAU).abs() < 1e-15);
    }

    #[test]
    fn spin_half_through_pair() {
        let p = ps(&[(1, 1), (-1, 1)]);
        let cands = enumerate_candidates(&p, 2).unwrap();
        assert_eq!(cands[0].tau, Rational::frac(1, 2));
        assert_eq!(cands[0].phi_mod_2pi(), Rational::one());
        assert!((phi_value(&cands[0]) - PI).abs() < 1e-15);
    }

    #[test]
    fn spin_half_shifted() {
        let p = ps(&[(2, 1), (0, 1)]);
        let cands = enumerate_candidates(&p, 4).unwrap();
        let g = gauge_to_zero_phi(&cands[0], &p).unwrap();
        assert_eq!(g.shift, Rational::zero());
        assert_eq!(g.n, BigInt::from(1));
        assert!((g.tau_value(1.0) - PI).abs() < 1e-15);
    }

    #[test]
    fn zero_shifted_reference_falls_back() {
        // (L1, L2) = (-1, 1) with phi = pi: the shift +1 sends L1 to zero.
        let p = ps(&[(-1, 1), (1, 1)]);
        let c = CyclicityCandidate { n: 0, m: 1, phi: Rational::one(), tau: Rational::frac(1, 2) };
        let g = gauge_to_zero_phi(&c, &p).unwrap();
        assert_eq!(g.shift, Rational::one());
        assert_eq!(g.reference, Rational::frac(2, 1));
        assert_eq!(g.n, BigInt::from(1));
    }

    #[test]
    fn rejects_bad_partial_spectra() {
        assert!(matches!(
            PartialSpectrum::new(1.0, [("a", Rational::one()), ("b", Rational::one())]),
            Err(ConstraintError::Repeated(_))
        ));
        let single = ps(&[(2, 1)]);
        assert_eq!(enumerate_candidates(&single, 4), Err(ConstraintError::NeedTwoEigenvalues(1)));
        assert!(matches!(
            PartialSpectrum::from_reals(1.0, [("a", 1.0), ("b", 2f64.sqrt())], 100, 1e-9),
            Err(ConstraintError::NoCyclicMotion(_))
        ));
    }

    #[test]
    fn admissibility() {
        let g = GaugedCandidate {
            shift: Rational::zero(),
            tau: Rational::one(),
            reference: Rational::frac(2, 1),
            n: BigInt::from(2),
        };
        assert!(constrain_unknown(&g, &Rational::frac(3, 1)));
        assert_eq!(g.constraint().k_prime(&Rational::frac(3, 1)), Some(BigInt::from(3)));
        assert!(!constrain_unknown(&g, &Rational::frac(1, 2)));
        assert!(constrain_unknown(&g, &Rational::frac(2, 1)));
        assert!(constrain_unknown(&g, &Rational::zero()));
    }

    #[test]
    fn gamma_sets() {
        let orbit = gamma_orbit(&Rational::frac(1, 2), 1..=4);
        assert_eq!(orbit, vec![Rational::zero(), Rational::frac(1, 2)]);
        assert_eq!(gamma_orbit(&Rational::one(), 1..=7), vec![Rational::zero()]);

        let g = GaugedCandidate {
            shift: Rational::zero(),
            tau: Rational::one(),
            reference: Rational::frac(2, 1),
            n: BigInt::from(2),
        };
        assert!(crate::phase::angle_distance(gamma_for(&g, 2.5), PI) < 1e-14);
        assert!(crate::phase::angle_distance(gamma_for(&g, 2.0), 0.0) < 1e-14);
    }

    #[test]
    fn pairwise_intersection_with_third_level() {
        // {2, 3, 5/2}: the half-integer level doubles the period.
        let p = ps(&[(2, 1), (3, 1), (5, 2)]);
        let cands = consistent_candidates(&p, 8).unwrap();
        assert_eq!(cands[0].tau, Rational::frac(2, 1));
        let pair_only = enumerate_candidates(&p, 8).unwrap();
        assert!(cands.len() < pair_only.len());
    }
}
