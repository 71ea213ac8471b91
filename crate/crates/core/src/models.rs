//! Example systems: spin-1/2 precession, a free field mode, and the two- and
//! three-mirror optomechanical cavities.
//!
//! Each model is available as an exact spectrum with a state decomposition
//! (for the closed-form route) and as a truncated Fock-space Hamiltonian with
//! an initial state vector (for the oracle). The two are built independently:
//! the spectra come from analytic diagonalization, the matrices from the
//! Hamiltonians written in the number basis.

use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use thiserror::Error;

use crate::oracle::{Block, BlockHamiltonian, DenseHamiltonian, OracleError};
use crate::rational::{rationalize, Rational};
use crate::spectrum::{Spectrum, SpectrumError, StateDecomposition};

/// Largest discarded probability accepted when truncating a mode.
pub const TAIL_TOLERANCE: f64 = 1e-10;
/// Normalization tolerance for user-supplied amplitude lists.
pub const AMPLITUDE_NORM_TOLERANCE: f64 = 1e-12;
/// Denominator bound used when recognizing rational frequency ratios.
pub const RATIO_MAX_DENOMINATOR: u64 = 1_000_000;
pub const RATIO_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("truncation too small: discarded probability {tail_mass:e} at {truncation} levels (limit {TAIL_TOLERANCE:e}); increase the truncation")]
    TruncationTooSmall { tail_mass: f64, truncation: usize },
    #[error("amplitudes are not normalized: sum |c|^2 = {0}")]
    NotNormalized(f64),
    #[error("invalid model parameters: {0}")]
    BadParameters(String),
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

fn czero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

fn check_positive(name: &str, x: f64) -> Result<(), ModelError> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(ModelError::BadParameters(format!("{name} must be positive and finite, got {x}")))
    }
}

/// Truncated expansion of a single-mode state in the number basis.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeExpansion {
    /// Renormalized amplitudes for `n = 0..truncation`.
    pub amplitudes: Vec<Complex64>,
    /// Probability discarded by the truncation, before renormalization.
    pub tail_mass: f64,
}

impl ModeExpansion {
    pub fn mean_number(&self) -> f64 {
        self.amplitudes.iter().enumerate().map(|(n, c)| n as f64 * c.norm_sqr()).sum()
    }
}

/// Coherent state `|alpha>` on `truncation` number states.
pub fn coherent_amplitudes(alpha: Complex64, truncation: usize) -> Result<ModeExpansion, ModelError> {
    if truncation < 1 {
        return Err(ModelError::BadParameters("truncation must be >= 1".into()));
    }
    let mut raw = Vec::with_capacity(truncation);
    let mut c = Complex64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0);
    for n in 0..truncation {
        if n > 0 {
            c = c * alpha / (n as f64).sqrt();
        }
        raw.push(c);
    }
    // Poisson tail summed directly; 1 - sum would lose it to rounding.
    let mut tail = 0.0;
    let mut term = c.norm_sqr();
    let mut n = truncation;
    loop {
        term *= alpha.norm_sqr() / n as f64;
        tail += term;
        n += 1;
        if term <= tail * 1e-17 || term == 0.0 || n > truncation + 10_000 {
            break;
        }
    }
    if tail >= TAIL_TOLERANCE {
        return Err(ModelError::TruncationTooSmall {
            tail_mass: tail,
            truncation,
        });
    }
    Ok(ModeExpansion {
        amplitudes: renormalize(raw),
        tail_mass: tail,
    })
}

fn renormalize(mut v: Vec<Complex64>) -> Vec<Complex64> {
    let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    for c in &mut v {
        *c /= norm;
    }
    v
}

fn check_normalized(amps: &[Complex64]) -> Result<(), ModelError> {
    let s: f64 = amps.iter().map(|c| c.norm_sqr()).sum();
    if (s - 1.0).abs() > AMPLITUDE_NORM_TOLERANCE {
        return Err(ModelError::NotNormalized(s));
    }
    Ok(())
}

/// Amplitudes `<j|D(x)|psi>` for real `x`, `j < truncation`, where `psi` is
/// given by its number-basis amplitudes.
///
/// Uses `D(x)|k> = (a^dagger - x)^k / sqrt(k!) |x>` on a working space large
/// enough that the raising steps do not reach its edge.
pub fn displaced_amplitudes(psi: &[Complex64], x: f64, truncation: usize) -> Result<ModeExpansion, ModelError> {
    if truncation < 1 {
        return Err(ModelError::BadParameters("truncation must be >= 1".into()));
    }
    let work = truncation.max(psi.len()) + psi.len() + 64 + (4.0 * x.abs() * x.abs()) as usize;
    let mut v = coherent_amplitudes(Complex64::new(x, 0.0), work)?.amplitudes;
    let mut out = vec![czero(); work];
    for (k, mk) in psi.iter().enumerate() {
        if k > 0 {
            let mut next = vec![czero(); work];
            for j in 0..work {
                let mut z = -x * v[j];
                if j > 0 {
                    z += (j as f64).sqrt() * v[j - 1];
                }
                next[j] = z / (k as f64).sqrt();
            }
            v = next;
        }
        for j in 0..work {
            out[j] += mk * v[j];
        }
    }
    let total: f64 = psi.iter().map(|c| c.norm_sqr()).sum();
    let kept: f64 = out[..truncation].iter().map(|c| c.norm_sqr()).sum();
    let tail = (total - kept).max(0.0) / total;
    if tail >= TAIL_TOLERANCE {
        return Err(ModelError::TruncationTooSmall {
            tail_mass: tail,
            truncation,
        });
    }
    out.truncate(truncation);
    Ok(ModeExpansion {
        amplitudes: renormalize(out),
        tail_mass: tail,
    })
}

/// Spin-1/2 in a static field along z, `H = -mu B0 sigma_z`, prepared in
/// `(cos theta/2, sin theta/2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinHalfParams {
    pub mu_b0: f64,
    pub theta: f64,
}

impl SpinHalfParams {
    fn validate(&self) -> Result<(), ModelError> {
        check_positive("mu_B0", self.mu_b0)?;
        if !(0.0..=std::f64::consts::PI).contains(&self.theta) {
            return Err(ModelError::BadParameters(format!("theta must lie in [0, pi], got {}", self.theta)));
        }
        Ok(())
    }

    fn amplitudes(&self) -> [Complex64; 2] {
        [
            Complex64::new((self.theta / 2.0).cos(), 0.0),
            Complex64::new((self.theta / 2.0).sin(), 0.0),
        ]
    }
}

/// Levels `up = -1`, `down = +1` in units of `mu B0`.
pub fn spin_half(params: &SpinHalfParams) -> Result<(Spectrum, StateDecomposition), ModelError> {
    params.validate()?;
    let spectrum = Spectrum::new(params.mu_b0, [("up", Rational::from(-1)), ("down", Rational::from(1))])?;
    let [u, d] = params.amplitudes();
    let state = StateDecomposition::normalized(&spectrum, [("up", u), ("down", d)])?;
    Ok((spectrum, state))
}

pub fn spin_half_hamiltonian(params: &SpinHalfParams) -> Result<(DenseHamiltonian, DVector<Complex64>), ModelError> {
    params.validate()?;
    let h = DenseHamiltonian::diagonal(&[-params.mu_b0, params.mu_b0], params.mu_b0);
    Ok((h, DVector::from_vec(params.amplitudes().to_vec())))
}

/// Single mode `H = omega a^dagger a` with amplitudes on the listed number
/// states; levels are labeled by `n`.
pub fn free_field(omega: f64, occupied: &[(u32, Complex64)]) -> Result<(Spectrum, StateDecomposition), ModelError> {
    check_positive("omega", omega)?;
    if occupied.is_empty() {
        return Err(ModelError::BadParameters("free field needs at least one occupied level".into()));
    }
    let top = occupied.iter().map(|o| o.0).max().unwrap_or(0);
    let spectrum = Spectrum::new(omega, (0..=top).map(|n| (n.to_string(), Rational::from(n as i64))))?;
    let state = StateDecomposition::normalized(&spectrum, occupied.iter().map(|&(n, c)| (n.to_string(), c)))?;
    Ok((spectrum, state))
}

pub fn free_field_hamiltonian(omega: f64, occupied: &[(u32, Complex64)]) -> Result<(DenseHamiltonian, DVector<Complex64>), ModelError> {
    check_positive("omega", omega)?;
    let top = occupied.iter().map(|o| o.0).max().unwrap_or(0) as usize;
    let diag: Vec<f64> = (0..=top).map(|n| omega * n as f64).collect();
    let mut psi = DVector::zeros(top + 1);
    for &(n, c) in occupied {
        psi[n as usize] = c;
    }
    let norm = psi.norm();
    Ok((DenseHamiltonian::diagonal(&diag, omega), psi / Complex64::new(norm, 0.0)))
}

/// Free field in a truncated coherent state, as `(n, amplitude)` pairs.
pub fn coherent_occupation(alpha: Complex64, truncation: usize) -> Result<Vec<(u32, Complex64)>, ModelError> {
    Ok(coherent_amplitudes(alpha, truncation)?
        .amplitudes
        .into_iter()
        .enumerate()
        .map(|(n, c)| (n as u32, c))
        .collect())
}

/// Two-mirror cavity `H = omega_f a^dagger a + omega_m b^dagger b - g a^dagger a (b + b^dagger)`.
///
/// The primitive inputs are `omega_m`, `r = omega_f / omega_m` and
/// `k^2 = (g / omega_m)^2` as exact rationals; `k` is taken non-negative.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoMirrorParams {
    pub omega_m: f64,
    pub r: Rational,
    pub k2: Rational,
    /// Field amplitudes `C_n`, `n = 0..len`.
    pub field_amplitudes: Vec<Complex64>,
    pub beta: Complex64,
    pub mirror_truncation: usize,
}

impl TwoMirrorParams {
    pub fn k(&self) -> f64 {
        self.k2.to_f64().sqrt()
    }

    pub fn omega_f(&self) -> f64 {
        self.r.to_f64() * self.omega_m
    }

    pub fn g(&self) -> f64 {
        self.k() * self.omega_m
    }

    /// `p` in `k^2 = q / p`; `tau = 2 pi p / omega_m` closes every loop.
    pub fn p(&self) -> u64 {
        u64::try_from(self.k2.denom()).unwrap_or(u64::MAX)
    }

    pub fn mean_photon_number(&self) -> f64 {
        self.field_amplitudes.iter().enumerate().map(|(n, c)| n as f64 * c.norm_sqr()).sum()
    }

    fn validate(&self) -> Result<(), ModelError> {
        check_positive("omega_m", self.omega_m)?;
        if self.k2.is_negative() {
            return Err(ModelError::BadParameters("k^2 must be non-negative".into()));
        }
        if self.r.is_negative() {
            return Err(ModelError::BadParameters("r must be non-negative".into()));
        }
        if self.field_amplitudes.is_empty() {
            return Err(ModelError::BadParameters("field_amplitudes is empty".into()));
        }
        if self.mirror_truncation < 2 {
            return Err(ModelError::BadParameters("mirror_truncation must be >= 2".into()));
        }
        check_normalized(&self.field_amplitudes)
    }
}

fn two_label(n: usize, m: usize) -> String {
    format!("{n},{m}")
}

/// `lambda_{n,m} / omega_m = r n + m - k^2 n^2`.
pub fn two_mirror_level(params: &TwoMirrorParams, n: usize, m: usize) -> Rational {
    let n = Rational::from(n as i64);
    &params.r * &n + Rational::from(m as i64) - &params.k2 * &n * &n
}

/// Analytic spectrum over `n < field_amplitudes.len()`, `m < mirror_truncation`
/// and the state `sum C_n |n> |beta>` expanded on the displaced eigenbasis
/// `D(k n)|m>` of each photon-number block.
pub fn two_mirror_spectrum(params: &TwoMirrorParams) -> Result<(Spectrum, StateDecomposition), ModelError> {
    params.validate()?;
    let nf = params.field_amplitudes.len();
    let t = params.mirror_truncation;
    let spectrum = Spectrum::new(
        params.omega_m,
        (0..nf).flat_map(|n| (0..t).map(move |m| (n, m))).map(|(n, m)| (two_label(n, m), two_mirror_level(params, n, m))),
    )?;
    let beta = coherent_amplitudes(params.beta, t + 64)?.amplitudes;
    let k = params.k();
    let mut entries = Vec::new();
    for (n, cn) in params.field_amplitudes.iter().enumerate() {
        if *cn == czero() {
            continue;
        }
        let mirror = displaced_amplitudes(&beta, -k * n as f64, t)?;
        entries.extend(mirror.amplitudes.iter().enumerate().map(|(m, a)| (two_label(n, m), cn * a)));
    }
    let state = StateDecomposition::normalized(&spectrum, entries)?;
    Ok((spectrum, state))
}

/// Truncated number-basis Hamiltonian, one block per photon number, with the
/// initial product state.
pub fn two_mirror_hamiltonian(params: &TwoMirrorParams) -> Result<(BlockHamiltonian, DVector<Complex64>), ModelError> {
    params.validate()?;
    let nf = params.field_amplitudes.len();
    let t = params.mirror_truncation;
    let (wm, wf, g) = (params.omega_m, params.omega_f(), params.g());
    let blocks = (0..nf)
        .map(|n| {
            let nn = n as f64;
            let matrix = DMatrix::from_fn(t, t, |i, j| {
                if i == j {
                    Complex64::new(wf * nn + wm * i as f64, 0.0)
                } else if i.abs_diff(j) == 1 {
                    Complex64::new(-g * nn * (i.max(j) as f64).sqrt(), 0.0)
                } else {
                    czero()
                }
            });
            Block {
                indices: (n * t..(n + 1) * t).collect(),
                matrix,
            }
        })
        .collect();
    let h = BlockHamiltonian::new(nf * t, blocks, wm)?;
    let beta = coherent_amplitudes(params.beta, t)?.amplitudes;
    let psi = DVector::from_iterator(nf * t, params.field_amplitudes.iter().flat_map(|cn| beta.iter().map(move |b| cn * b)));
    Ok((h, psi))
}

/// `<H> = omega_m [(r - 2 k Re beta) <n>_f + |beta|^2]`.
pub fn two_mirror_mean_energy(params: &TwoMirrorParams) -> f64 {
    let x = (params.r.to_f64() - 2.0 * params.k() * params.beta.re) * params.mean_photon_number() + params.beta.norm_sqr();
    params.omega_m * x
}

/// `gamma = 2 pi [1 + p (r - 2 k Re beta) <n>_f + p |beta|^2]` mod 2 pi: the
/// phase over the loop `tau = 2 pi p / omega_m`, on which the total phase
/// vanishes.
pub fn two_mirror_gamma_closed_form(params: &TwoMirrorParams, p: u64) -> f64 {
    let x = two_mirror_mean_energy(params) / params.omega_m;
    crate::phase::wrap_to_2pi(TAU * (1.0 + p as f64 * x))
}

/// The same expression with the factor `p / omega_m` in place of `p`. It is
/// not dimensionless and only coincides with the closed form when
/// `omega_m = 1`; kept so the discrepancy can be demonstrated.
pub fn two_mirror_gamma_p_over_omega(params: &TwoMirrorParams, p: u64) -> f64 {
    let x = two_mirror_mean_energy(params) / params.omega_m;
    crate::phase::wrap_to_2pi(TAU * (1.0 + p as f64 / params.omega_m * x))
}

/// Number-basis amplitudes of one mode.
#[derive(Debug, Clone, PartialEq)]
pub enum ModeState {
    Coherent(Complex64),
    Amplitudes(Vec<Complex64>),
}

impl ModeState {
    pub fn expand(&self, truncation: usize) -> Result<Vec<Complex64>, ModelError> {
        match self {
            ModeState::Coherent(a) => Ok(coherent_amplitudes(*a, truncation)?.amplitudes),
            ModeState::Amplitudes(v) => {
                check_normalized(v)?;
                if v.len() > truncation && v[truncation..].iter().any(|c| *c != czero()) {
                    let tail: f64 = v[truncation..].iter().map(|c| c.norm_sqr()).sum();
                    if tail >= TAIL_TOLERANCE {
                        return Err(ModelError::TruncationTooSmall { tail_mass: tail, truncation });
                    }
                }
                let mut out = v.clone();
                out.resize(truncation, czero());
                Ok(renormalize(out))
            }
        }
    }

    fn coherent(&self) -> Option<Complex64> {
        match self {
            ModeState::Coherent(a) => Some(*a),
            ModeState::Amplitudes(_) => None,
        }
    }
}

/// Three-mirror cavity
/// `H = omega_D a^dagger a + omega_S b^dagger b + C_D a^dagger a (c + c^dagger)
///    + (omega_m + C_S b^dagger b) c^dagger c + (C_S / 2) b^dagger b (1 + c^2 + c^dagger^2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThreeMirrorParams {
    pub omega_d: f64,
    pub omega_s: f64,
    pub omega_m: f64,
    pub c_d: f64,
    pub c_s: f64,
    pub a: ModeState,
    pub b: ModeState,
    pub mirror: ModeState,
    /// Number states kept for modes a, b and the mirror.
    pub truncations: [usize; 3],
}

impl ThreeMirrorParams {
    fn validate(&self) -> Result<(), ModelError> {
        check_positive("omega_m", self.omega_m)?;
        for (name, x) in [("omega_D", self.omega_d), ("omega_S", self.omega_s), ("C_D", self.c_d), ("C_S", self.c_s)] {
            if !x.is_finite() {
                return Err(ModelError::BadParameters(format!("{name} must be finite")));
            }
        }
        if self.c_s < 0.0 {
            // Keeps the mechanical blocks bounded below.
            return Err(ModelError::BadParameters("C_S must be non-negative".into()));
        }
        if self.truncations.iter().any(|&t| t < 1) || self.truncations[2] < 2 {
            return Err(ModelError::BadParameters("truncations must be >= 1 (mirror >= 2)".into()));
        }
        Ok(())
    }

    /// Block frequency `chi(n_b) = sqrt(omega_m (omega_m + 2 C_S n_b))`.
    pub fn chi(&self, n_b: usize) -> f64 {
        (self.omega_m * (self.omega_m + 2.0 * self.c_s * n_b as f64)).sqrt()
    }
}

#[derive(Debug, Clone)]
pub struct ThreeMirrorModel {
    /// Exact spectrum and state, present only when `C_S = 0` and the
    /// frequency ratios are rational.
    pub exact: Option<(Spectrum, StateDecomposition)>,
    pub hamiltonian: BlockHamiltonian,
    pub psi0: DVector<Complex64>,
    /// The levels `|0 0 n>` with eigenvalue `n` (units of `omega_m`), exact
    /// for every coupling.
    pub special_levels: Vec<(String, Rational)>,
}

fn three_label(na: usize, nb: usize, nc: usize) -> String {
    format!("{na},{nb},{nc}")
}

/// Build the truncated three-mirror model. Blocks are indexed by
/// `(n_a, n_b)`; within a block the mirror sees a displaced, squeezed
/// oscillator.
pub fn three_mirror_spectrum(params: &ThreeMirrorParams) -> Result<ThreeMirrorModel, ModelError> {
    params.validate()?;
    let [ta, tb, tc] = params.truncations;
    let a = params.a.expand(ta)?;
    let b = params.b.expand(tb)?;
    let m = params.mirror.expand(tc)?;

    let mut blocks = Vec::with_capacity(ta * tb);
    for na in 0..ta {
        for nb in 0..tb {
            let (fa, fb) = (na as f64, nb as f64);
            let base = params.omega_d * fa + params.omega_s * fb;
            let lin = params.c_d * fa;
            let sq = params.c_s * fb / 2.0;
            let matrix = DMatrix::from_fn(tc, tc, |i, j| {
                let (lo, hi) = (i.min(j), i.max(j));
                let v = match hi - lo {
                    0 => base + (params.omega_m + params.c_s * fb) * lo as f64 + sq,
                    1 => lin * (hi as f64).sqrt(),
                    2 => sq * ((lo + 1) as f64 * (lo + 2) as f64).sqrt(),
                    _ => 0.0,
                };
                Complex64::new(v, 0.0)
            });
            let start = (na * tb + nb) * tc;
            blocks.push(Block {
                indices: (start..start + tc).collect(),
                matrix,
            });
        }
    }
    let hamiltonian = BlockHamiltonian::new(ta * tb * tc, blocks, params.omega_m)?;
    let mut psi0 = DVector::zeros(ta * tb * tc);
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            for (k, z) in m.iter().enumerate() {
                psi0[(i * tb + j) * tc + k] = x * y * z;
            }
        }
    }
    let special_levels = (0..tc).map(|n| (three_label(0, 0, n), Rational::from(n as i64))).collect();
    let exact = if params.c_s == 0.0 { three_mirror_exact(params, &a, &b)? } else { None };
    Ok(ThreeMirrorModel {
        exact,
        hamiltonian,
        psi0,
        special_levels,
    })
}

/// `C_S = 0`: `lambda = omega_D n_a + omega_S n_b + omega_m n_c - C_D^2 n_a^2 / omega_m`,
/// eigenvectors `D(-C_D n_a / omega_m)|n_c>`.
fn three_mirror_exact(params: &ThreeMirrorParams, a: &[Complex64], b: &[Complex64]) -> Result<Option<(Spectrum, StateDecomposition)>, ModelError> {
    let wm = params.omega_m;
    let ratio = |x: f64| rationalize(x, RATIO_MAX_DENOMINATOR, RATIO_TOLERANCE).ok();
    let (Some(rd), Some(rs), Some(rc)) = (
        ratio(params.omega_d / wm),
        ratio(params.omega_s / wm),
        ratio((params.c_d / wm) * (params.c_d / wm)),
    ) else {
        return Ok(None);
    };
    let [ta, tb, tc] = params.truncations;
    let mut levels = Vec::with_capacity(ta * tb * tc);
    for na in 0..ta {
        for nb in 0..tb {
            for nc in 0..tc {
                let fa = Rational::from(na as i64);
                let v = &rd * &fa + &rs * Rational::from(nb as i64) + Rational::from(nc as i64) - &rc * &fa * &fa;
                levels.push((three_label(na, nb, nc), v));
            }
        }
    }
    let spectrum = Spectrum::new(wm, levels)?;
    let m_in = params.mirror.expand(tc + 64)?;
    let mut entries = Vec::new();
    for (na, ca) in a.iter().enumerate() {
        if *ca == czero() {
            continue;
        }
        let mirror = displaced_amplitudes(&m_in, params.c_d * na as f64 / wm, tc)?;
        for (nb, cb) in b.iter().enumerate() {
            if *cb == czero() {
                continue;
            }
            entries.extend(mirror.amplitudes.iter().enumerate().map(|(nc, cm)| (three_label(na, nb, nc), ca * cb * cm)));
        }
    }
    let state = StateDecomposition::normalized(&spectrum, entries)?;
    Ok(Some((spectrum, state)))
}

/// General product-state closed form
/// `gamma = 2 pi [1 + p <H> / omega_m]`, with `<H>` assembled from the mode
/// moments and the mirror cross sums `sum sqrt(n+1) Re(M_n^* M_{n+1})` and
/// `sum sqrt((n+1)(n+2)) Re(M_n^* M_{n+2})`.
pub fn three_mirror_gamma_general(params: &ThreeMirrorParams, p: u64) -> Result<f64, ModelError> {
    params.validate()?;
    let [ta, tb, tc] = params.truncations;
    let na = mean_number(&params.a.expand(ta)?);
    let nb = mean_number(&params.b.expand(tb)?);
    let m = params.mirror.expand(tc)?;
    let nm = mean_number(&m);
    let s1: f64 = (0..tc - 1).map(|n| ((n + 1) as f64).sqrt() * (m[n].conj() * m[n + 1]).re).sum();
    let s2: f64 = (0..tc.saturating_sub(2))
        .map(|n| (((n + 1) * (n + 2)) as f64).sqrt() * (m[n].conj() * m[n + 2]).re)
        .sum();
    let wm = params.omega_m;
    let x = params.omega_d / wm * na
        + params.omega_s / wm * nb
        + 2.0 * params.c_d / wm * na * s1
        + nm
        + params.c_s / wm * nb * nm
        + params.c_s / (2.0 * wm) * nb * (1.0 + 2.0 * s2);
    Ok(crate::phase::wrap_to_2pi(TAU * (1.0 + p as f64 * x)))
}

/// Coherent-product closed form:
/// `gamma = 2 pi [1 + p |alpha|^2 (omega_D/omega_m + 2 (C_D/omega_m) Re mu)
///   + p |beta|^2 (omega_S/omega_m + (C_S/omega_m)(1/2 + 2 (Re mu)^2)) + p |mu|^2]`.
pub fn three_mirror_gamma_coherent(params: &ThreeMirrorParams, p: u64) -> Result<f64, ModelError> {
    let (Some(alpha), Some(beta), Some(mu)) = (params.a.coherent(), params.b.coherent(), params.mirror.coherent()) else {
        return Err(ModelError::BadParameters("coherent closed form needs coherent states in all three modes".into()));
    };
    let wm = params.omega_m;
    let pf = p as f64;
    let x = pf * alpha.norm_sqr() * (params.omega_d / wm + 2.0 * params.c_d / wm * mu.re)
        + pf * beta.norm_sqr() * (params.omega_s / wm + params.c_s / wm * (0.5 + 2.0 * mu.re * mu.re))
        + pf * mu.norm_sqr();
    Ok(crate::phase::wrap_to_2pi(TAU * (1.0 + x)))
}

fn mean_number(amps: &[Complex64]) -> f64 {
    amps.iter().enumerate().map(|(n, c)| n as f64 * c.norm_sqr()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase::{angle_distance, check_cyclicality, geometric_phase, mean_energy, Cyclicity};
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn coherent_expansion() {
        let v = coherent_amplitudes(czero(), 5).unwrap();
        assert_eq!(v.amplitudes[0], c(1.0));
        assert!(v.amplitudes[1..].iter().all(|z| *z == czero()));
        let v = coherent_amplitudes(c(1.0), 20).unwrap();
        assert!(v.tail_mass < 1e-10);
        let s: f64 = v.amplitudes.iter().map(|z| z.norm_sqr()).sum();
        assert!((s - 1.0).abs() < 1e-15);
        assert!(matches!(
            coherent_amplitudes(c(3.0), 10),
            Err(ModelError::TruncationTooSmall { .. })
        ));
    }

    #[test]
    fn displacement_of_coherent_state() {
        let beta = Complex64::new(0.4, 0.3);
        let input = coherent_amplitudes(beta, 80).unwrap().amplitudes;
        let x = -0.7;
        let got = displaced_amplitudes(&input, x, 40).unwrap().amplitudes;
        // D(x)|beta> = exp(-i x Im beta) |beta + x> for real x.
        let want = coherent_amplitudes(beta + x, 40).unwrap().amplitudes;
        let phase = Complex64::from_polar(1.0, -x * beta.im);
        for (g, w) in got.iter().zip(&want) {
            assert!((g - phase * w).norm() < 1e-13, "{}", (g - phase * w).norm());
        }
    }

    #[test]
    fn spin_half_fixtures() {
        let (s, st) = spin_half(&SpinHalfParams { mu_b0: 1.0, theta: PI / 2.0 }).unwrap();
        let rep = geometric_phase(&s, &st).unwrap();
        assert!(angle_distance(rep.gamma, PI) < 1e-15);
        assert!(mean_energy(&s, &st).unwrap().abs() < 1e-15);
        let (s, st) = spin_half(&SpinHalfParams { mu_b0: 1.0, theta: 0.0 }).unwrap();
        assert!(geometric_phase(&s, &st).unwrap().stationary);
        assert!(spin_half(&SpinHalfParams { mu_b0: 1.0, theta: 4.0 }).is_err());
    }

    #[test]
    fn free_field_period() {
        let occ = [(0, c(0.5)), (2, c(0.5)), (5, Complex64::new(0.5, 0.5))];
        let (s, st) = free_field(3.0, &occ).unwrap();
        let rep = geometric_phase(&s, &st).unwrap();
        assert_eq!(rep.tau.exact, Some(Rational::one()));
        assert!((rep.tau.value - TAU / 3.0).abs() < 1e-15);
        let (s, st) = free_field(1.0, &[(0, c(1.0))]).unwrap();
        assert_eq!(check_cyclicality(&s, &st).unwrap(), Cyclicity::Stationary);
    }

    fn two_mirror(field: Vec<Complex64>, beta: Complex64) -> TwoMirrorParams {
        TwoMirrorParams {
            omega_m: 1.0,
            r: Rational::from(2),
            k2: Rational::frac(1, 2),
            field_amplitudes: field,
            beta,
            mirror_truncation: 40,
        }
    }

    #[test]
    fn two_mirror_levels() {
        let p = two_mirror(vec![c(FRAC_1_SQRT_2), c(FRAC_1_SQRT_2)], c(0.3));
        assert_eq!(two_mirror_level(&p, 1, 0), Rational::frac(3, 2));
        assert_eq!(p.p(), 2);
        let (s, st) = two_mirror_spectrum(&p).unwrap();
        let rep = geometric_phase(&s, &st).unwrap();
        assert_eq!(rep.tau.exact, Some(Rational::from(2)));
        assert_eq!(rep.phi.exact, Some(Rational::zero()));
    }

    #[test]
    fn two_mirror_decoupled_limit() {
        let mut p = two_mirror(vec![c(0.6), c(0.8)], c(0.2));
        p.k2 = Rational::zero();
        assert_eq!(two_mirror_level(&p, 1, 3), Rational::from(5));
        let (h, _) = two_mirror_hamiltonian(&p).unwrap();
        assert!(h.blocks().iter().all(|b| b.matrix.iter().enumerate().all(|(i, z)| i % (b.matrix.nrows() + 1) == 0 || *z == czero())));
    }

    #[test]
    fn two_mirror_mean_energy_identity() {
        for beta in [czero(), c(0.3), Complex64::new(0.5, 0.2), Complex64::new(-0.4, 0.7)] {
            for field in [vec![c(1.0)], vec![czero(), c(1.0)], vec![c(0.6), Complex64::new(0.0, 0.8)], vec![c(0.5), c(0.5), c(0.5), c(0.5)]] {
                let p = two_mirror(field, beta);
                let (s, st) = two_mirror_spectrum(&p).unwrap();
                let got = mean_energy(&s, &st).unwrap();
                let want = two_mirror_mean_energy(&p);
                assert!((got - want).abs() <= 1e-10 * want.abs().max(1e-300), "{got} vs {want}");
            }
        }
    }

    #[test]
    fn three_mirror_hamiltonian_basics() {
        let params = ThreeMirrorParams {
            omega_d: 2.0,
            omega_s: 3.0,
            omega_m: 1.0,
            c_d: 0.0,
            c_s: 0.0,
            a: ModeState::Coherent(c(0.5)),
            b: ModeState::Coherent(c(0.3)),
            mirror: ModeState::Coherent(Complex64::new(0.2, 0.1)),
            truncations: [10, 10, 15],
        };
        let model = three_mirror_spectrum(&params).unwrap();
        assert_eq!(model.hamiltonian.dimension(), 1500);
        assert!((model.psi0.norm() - 1.0).abs() < 1e-14);
        let (s, st) = model.exact.as_ref().unwrap();
        let rep = geometric_phase(s, st).unwrap();
        assert_eq!(rep.tau.exact, Some(Rational::one()));
        let eq35 = three_mirror_gamma_coherent(&params, 1).unwrap();
        assert!(angle_distance(rep.gamma, eq35) < 1e-10);
        let eq34 = three_mirror_gamma_general(&params, 1).unwrap();
        assert!(angle_distance(eq34, eq35) < 1e-10);
    }

    #[test]
    fn vacuum_is_stationary() {
        let params = ThreeMirrorParams {
            omega_d: 2.0,
            omega_s: 3.0,
            omega_m: 1.0,
            c_d: 1e-3,
            c_s: 1e-3,
            a: ModeState::Coherent(czero()),
            b: ModeState::Coherent(czero()),
            mirror: ModeState::Coherent(czero()),
            truncations: [3, 3, 5],
        };
        let model = three_mirror_spectrum(&params).unwrap();
        assert!(model.exact.is_none());
        assert_eq!(model.special_levels[3], ("0,0,3".to_string(), Rational::from(3)));
        assert!(angle_distance(three_mirror_gamma_coherent(&params, 1).unwrap(), 0.0) < 1e-15);
        assert!((model.hamiltonian.expectation(&model.psi0)).abs() < 1e-15);
    }
}
