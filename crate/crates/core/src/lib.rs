//! Aharonov-Anandan geometric phases of cyclic evolutions under
//! time-independent Hamiltonians.
//!
//! The period and total phase follow from the occupied spectrum alone:
//! `tau = 2 pi hbar LCM(1 / Delta E)` over the occupied level spacings, and
//! `gamma = phi + tau <H> / hbar`. Spectra are held as exact rationals so the
//! LCM is exact. An independent brute-force route ([`oracle`]) evolves the
//! state numerically and integrates the dynamical phase, for cross-checks.
//!
//! - [`rational`]: rationals, LCM over rational sets, rationalization of reals
//! - [`spectrum`]: labeled spectra and state decompositions
//! - [`phase`]: cyclicity, period, total phase, geometric phase, gauge shifts
//! - [`constraint`]: admissible periods and phases from a partial spectrum
//! - [`models`]: spin-1/2, free field, two- and three-mirror cavities
//! - [`oracle`]: dense evolution, return detection, dynamical-phase quadrature
//! - [`config`], [`report`], [`cli`]: the config-driven command front end

pub mod cli;
pub mod config;
pub mod constraint;
pub mod models;
pub mod oracle;
pub mod phase;
pub mod rational;
pub mod report;
pub mod spectrum;
pub mod textfmt;
