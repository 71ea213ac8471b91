//! Brute-force reference route: explicit time evolution of a dense
//! Hamiltonian, numerical detection of the period and total phase, and a
//! quadrature of the dynamical phase.
//!
//! Nothing here uses the spectral LCM machinery of [`crate::phase`]; the two
//! routes are meant to be compared against each other.
//!
//! Propagation diagonalizes each invariant block of `H` once and advances the
//! eigencomponents by their phase factors, so evolution is unitary to
//! rounding at every time.

use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use thiserror::Error;

use crate::phase::{wrap_to_2pi, wrap_to_pi, Method, PhaseReport, PhaseValue};
use crate::textfmt::{format_complex, format_real, parse_complex, parse_real};

pub const DEFAULT_FIDELITY_TOL: f64 = 1e-8;
pub const APPROXIMATE_FIDELITY_TOL: f64 = 1e-4;
pub const DEFAULT_POINTS_PER_PERIOD: usize = 4096;
pub const DEFAULT_GOLDEN_ITERATIONS: usize = 20;
const HERMITIAN_TOL: f64 = 1e-12;
const NORM_TOL: f64 = 1e-10;
const QUADRATURE_TOL: f64 = 1e-9;
const SIMPSON_INTERVALS: usize = 512;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not Hermitian: max |H - H^dagger| = {0:e}")]
    NotHermitian(f64),
    #[error("state has dimension {got}, Hamiltonian has {want}")]
    DimensionMismatch { got: usize, want: usize },
    #[error("initial state is not normalized: |psi| = {0}")]
    NotNormalized(f64),
    #[error("invalid block structure: {0}")]
    BadBlocks(String),
    #[error("invalid oracle parameters: {0}")]
    BadParameters(String),
    #[error("no period detected <= t_max = {0}")]
    NoPeriod(f64),
    #[error("dynamical phase quadrature {quadrature} disagrees with tau <H> = {expected}")]
    QuadratureMismatch { quadrature: f64, expected: f64 },
    #[error("bad matrix text at line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// A Hermitian matrix on a finite (possibly truncated) Hilbert space, hbar = 1.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseHamiltonian {
    matrix: DMatrix<Complex64>,
    unit: f64,
}

fn hermiticity_defect(m: &DMatrix<Complex64>) -> (f64, f64) {
    let mut defect: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            scale = scale.max(m[(i, j)].norm());
            if j >= i {
                defect = defect.max((m[(i, j)] - m[(j, i)].conj()).norm());
            }
        }
    }
    (defect, scale)
}

fn check_hermitian(m: &DMatrix<Complex64>) -> Result<(), OracleError> {
    if m.nrows() != m.ncols() {
        return Err(OracleError::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    let (defect, scale) = hermiticity_defect(m);
    if defect > HERMITIAN_TOL * scale {
        return Err(OracleError::NotHermitian(defect));
    }
    Ok(())
}

impl DenseHamiltonian {
    pub fn new(matrix: DMatrix<Complex64>, unit: f64) -> Result<Self, OracleError> {
        if !(unit.is_finite() && unit > 0.0) {
            return Err(OracleError::BadParameters(format!("unit must be positive, got {unit}")));
        }
        check_hermitian(&matrix)?;
        Ok(DenseHamiltonian { matrix, unit })
    }

    pub fn from_rows(rows: &[Vec<Complex64>], unit: f64) -> Result<Self, OracleError> {
        let n = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(OracleError::NotSquare { rows: n, cols: bad.len() });
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]), unit)
    }

    pub fn diagonal(values: &[f64], unit: f64) -> Self {
        let n = values.len();
        let m = DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                Complex64::new(values[i], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        DenseHamiltonian { matrix: m, unit }
    }

    pub fn dimension(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn unit(&self) -> f64 {
        self.unit
    }

    /// Plain-text form: a `dimension:` and `unit:` header, then one row per
    /// line of whitespace-separated complex entries.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "dimension: {}", self.dimension());
        let _ = writeln!(out, "unit: {}", format_real(self.unit));
        for i in 0..self.dimension() {
            let row: Vec<String> = (0..self.dimension()).map(|j| format_complex(self.matrix[(i, j)])).collect();
            let _ = writeln!(out, "{}", row.join(" "));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, OracleError> {
        let mut dimension = None;
        let mut unit = 1.0;
        let mut rows: Vec<Vec<Complex64>> = Vec::new();
        for (k, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let perr = |message: String| OracleError::Parse { line: k + 1, message };
            if let Some(v) = line.strip_prefix("dimension:") {
                dimension = Some(v.trim().parse::<usize>().map_err(|e| perr(e.to_string()))?);
            } else if let Some(v) = line.strip_prefix("unit:") {
                unit = parse_real(v).map_err(|e| perr(e.to_string()))?;
            } else {
                let row = line
                    .split_whitespace()
                    .map(parse_complex)
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|e| perr(e.to_string()))?;
                rows.push(row);
            }
        }
        let dimension = dimension.ok_or(OracleError::Parse {
            line: 0,
            message: "missing dimension".into(),
        })?;
        if rows.len() != dimension {
            return Err(OracleError::Parse {
                line: 0,
                message: format!("expected {dimension} rows, found {}", rows.len()),
            });
        }
        Self::from_rows(&rows, unit)
    }
}

/// One invariant subspace: global basis indices and the restricted matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub indices: Vec<usize>,
    pub matrix: DMatrix<Complex64>,
}

/// A Hamiltonian given as a direct sum of invariant blocks.
///
/// Large truncated models with conserved quantum numbers are built directly
/// in this form, which avoids ever allocating the full matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockHamiltonian {
    dimension: usize,
    blocks: Vec<Block>,
    unit: f64,
}

impl BlockHamiltonian {
    pub fn new(dimension: usize, blocks: Vec<Block>, unit: f64) -> Result<Self, OracleError> {
        if !(unit.is_finite() && unit > 0.0) {
            return Err(OracleError::BadParameters(format!("unit must be positive, got {unit}")));
        }
        let mut covered = vec![false; dimension];
        for b in &blocks {
            check_hermitian(&b.matrix)?;
            if b.matrix.nrows() != b.indices.len() {
                return Err(OracleError::BadBlocks("block size does not match its index list".into()));
            }
            for &i in &b.indices {
                if i >= dimension || std::mem::replace(&mut covered[i], true) {
                    return Err(OracleError::BadBlocks(format!("index {i} out of range or repeated")));
                }
            }
        }
        if covered.iter().any(|c| !c) {
            return Err(OracleError::BadBlocks("blocks do not cover the space".into()));
        }
        Ok(BlockHamiltonian { dimension, blocks, unit })
    }

    /// Split a dense Hamiltonian into the connected components of its
    /// nonzero pattern.
    pub fn from_dense(h: &DenseHamiltonian) -> Self {
        let n = h.dimension();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut i: usize) -> usize {
            while parent[i] != i {
                parent[i] = parent[parent[i]];
                i = parent[i];
            }
            i
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if h.matrix[(i, j)] != Complex64::new(0.0, 0.0) || h.matrix[(j, i)] != Complex64::new(0.0, 0.0) {
                    let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                    if a != b {
                        parent[a.max(b)] = a.min(b);
                    }
                }
            }
        }
        let mut groups: Vec<Vec<usize>> = Vec::new();
        let mut slot = vec![usize::MAX; n];
        for i in 0..n {
            let root = find(&mut parent, i);
            if slot[root] == usize::MAX {
                slot[root] = groups.len();
                groups.push(Vec::new());
            }
            groups[slot[root]].push(i);
        }
        let blocks = groups
            .into_iter()
            .map(|idx| Block {
                matrix: DMatrix::from_fn(idx.len(), idx.len(), |a, b| h.matrix[(idx[a], idx[b])]),
                indices: idx,
            })
            .collect();
        BlockHamiltonian {
            dimension: n,
            blocks,
            unit: h.unit,
        }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn unit(&self) -> f64 {
        self.unit
    }

    pub fn to_dense(&self) -> DenseHamiltonian {
        let mut m = DMatrix::zeros(self.dimension, self.dimension);
        for b in &self.blocks {
            for (a, &i) in b.indices.iter().enumerate() {
                for (c, &j) in b.indices.iter().enumerate() {
                    m[(i, j)] = b.matrix[(a, c)];
                }
            }
        }
        DenseHamiltonian { matrix: m, unit: self.unit }
    }

    pub fn apply(&self, psi: &DVector<Complex64>) -> DVector<Complex64> {
        let mut out = DVector::zeros(self.dimension);
        for b in &self.blocks {
            let local = DVector::from_iterator(b.indices.len(), b.indices.iter().map(|&i| psi[i]));
            let hl = &b.matrix * local;
            for (a, &i) in b.indices.iter().enumerate() {
                out[i] = hl[a];
            }
        }
        out
    }

    /// All eigenvalues, block by block.
    pub fn eigenvalues(&self) -> Vec<f64> {
        self.blocks
            .iter()
            .flat_map(|b| SymmetricEigen::new(b.matrix.clone()).eigenvalues.iter().copied().collect::<Vec<_>>())
            .collect()
    }

    /// Expectation value `<psi|H|psi>`.
    pub fn expectation(&self, psi: &DVector<Complex64>) -> f64 {
        psi.dotc(&self.apply(psi)).re
    }
}

impl From<&DenseHamiltonian> for BlockHamiltonian {
    fn from(h: &DenseHamiltonian) -> Self {
        BlockHamiltonian::from_dense(h)
    }
}

/// Diagonalized blocks with the initial state's eigencomponents.
#[derive(Debug, Clone)]
struct Propagator {
    dimension: usize,
    blocks: Vec<PropBlock>,
    /// Flattened `(E_k, |c_k|^2)` over all blocks, zero weights dropped.
    spectral_weights: Vec<(f64, f64)>,
}

#[derive(Debug, Clone)]
struct PropBlock {
    indices: Vec<usize>,
    energies: Vec<f64>,
    vectors: DMatrix<Complex64>,
    coeffs: Vec<Complex64>,
}

impl Propagator {
    fn new(h: &BlockHamiltonian, psi0: &DVector<Complex64>) -> Result<Self, OracleError> {
        if psi0.len() != h.dimension() {
            return Err(OracleError::DimensionMismatch {
                got: psi0.len(),
                want: h.dimension(),
            });
        }
        let norm = psi0.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(OracleError::NotNormalized(norm));
        }
        let mut blocks = Vec::with_capacity(h.blocks().len());
        let mut spectral_weights = Vec::new();
        for b in h.blocks() {
            let local = DVector::from_iterator(b.indices.len(), b.indices.iter().map(|&i| psi0[i]));
            if local.iter().all(|z| *z == Complex64::new(0.0, 0.0)) {
                continue;
            }
            let eig = SymmetricEigen::new(b.matrix.clone());
            let coeffs: Vec<Complex64> = (0..eig.eigenvalues.len())
                .map(|k| eig.eigenvectors.column(k).dotc(&local))
                .collect();
            for (e, c) in eig.eigenvalues.iter().zip(&coeffs) {
                let w = c.norm_sqr();
                if w > 0.0 {
                    spectral_weights.push((*e, w));
                }
            }
            blocks.push(PropBlock {
                indices: b.indices.clone(),
                energies: eig.eigenvalues.iter().copied().collect(),
                vectors: eig.eigenvectors,
                coeffs,
            });
        }
        Ok(Propagator {
            dimension: h.dimension(),
            blocks,
            spectral_weights,
        })
    }

    fn state(&self, t: f64) -> DVector<Complex64> {
        let mut psi = DVector::zeros(self.dimension);
        for b in &self.blocks {
            let advanced = DVector::from_iterator(
                b.coeffs.len(),
                b.coeffs
                    .iter()
                    .zip(&b.energies)
                    .map(|(c, e)| c * Complex64::from_polar(1.0, -e * t)),
            );
            let local = &b.vectors * advanced;
            for (a, &i) in b.indices.iter().enumerate() {
                psi[i] = local[a];
            }
        }
        psi
    }

    /// `<psi0|psi(t)>`.
    fn overlap(&self, t: f64) -> Complex64 {
        self.spectral_weights
            .iter()
            .map(|&(e, w)| Complex64::from_polar(w, -e * t))
            .sum()
    }

    /// `d/dt |<psi0|psi(t)>|^2 / 2 = Re(conj(O) dO/dt)`.
    fn fidelity_slope(&self, t: f64) -> f64 {
        let (mut o, mut d) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        for &(e, w) in &self.spectral_weights {
            let z = Complex64::from_polar(w, -e * t);
            o += z;
            d += z * Complex64::new(0.0, -e);
        }
        (o.conj() * d).re
    }

    fn mean_energy(&self) -> f64 {
        let total: f64 = self.spectral_weights.iter().map(|w| w.1).sum();
        self.spectral_weights.iter().map(|&(e, w)| e * w).sum::<f64>() / total
    }

    fn energy_spread(&self) -> f64 {
        let mean = self.mean_energy();
        let total: f64 = self.spectral_weights.iter().map(|w| w.1).sum();
        (self.spectral_weights.iter().map(|&(e, w)| w * (e - mean).powi(2)).sum::<f64>() / total).sqrt()
    }

    fn energy_scale(&self) -> f64 {
        self.spectral_weights
            .iter()
            .map(|&(e, _)| e.abs())
            .fold(0.0, f64::max)
    }
}

/// Time grid with the fidelity `|<psi0|psi(t)>|` at every point.
///
/// States are reconstructed on demand from the stored eigencomponents rather
/// than kept for every grid time.
#[derive(Debug, Clone)]
pub struct EvolutionResult {
    pub times: Vec<f64>,
    pub fidelity_track: Vec<f64>,
    propagator: Propagator,
}

impl EvolutionResult {
    pub fn state(&self, index: usize) -> DVector<Complex64> {
        self.propagator.state(self.times[index])
    }

    pub fn state_at(&self, t: f64) -> DVector<Complex64> {
        self.propagator.state(t)
    }

    pub fn overlap_at(&self, t: f64) -> Complex64 {
        self.propagator.overlap(t)
    }

    pub fn mean_energy(&self) -> f64 {
        self.propagator.mean_energy()
    }

    /// Standard deviation of the energy in the evolved state.
    pub fn energy_spread(&self) -> f64 {
        self.propagator.energy_spread()
    }

    fn is_stationary(&self) -> bool {
        self.propagator.energy_spread() <= 1e-12 * self.propagator.energy_scale().max(1e-300)
    }
}

pub fn evolve(h: &DenseHamiltonian, psi0: &DVector<Complex64>, t_max: f64, steps: usize) -> Result<EvolutionResult, OracleError> {
    evolve_blocks(&BlockHamiltonian::from_dense(h), psi0, t_max, steps)
}

/// Evolve on a uniform grid of `steps` intervals over `[0, t_max]`.
pub fn evolve_blocks(h: &BlockHamiltonian, psi0: &DVector<Complex64>, t_max: f64, steps: usize) -> Result<EvolutionResult, OracleError> {
    if steps < 2 {
        return Err(OracleError::BadParameters("steps must be >= 2".into()));
    }
    if !(t_max > 0.0 && t_max.is_finite()) {
        return Err(OracleError::BadParameters(format!("t_max must be positive, got {t_max}")));
    }
    let propagator = Propagator::new(h, psi0)?;
    let dt = t_max / steps as f64;
    let times: Vec<f64> = (0..=steps).map(|k| k as f64 * dt).collect();
    let fidelity_track = times.iter().map(|&t| propagator.overlap(t).norm()).collect();
    Ok(EvolutionResult {
        times,
        fidelity_track,
        propagator,
    })
}

/// Numerically detected return of the state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodEstimate {
    pub tau: f64,
    /// `arg <psi0|psi(tau)>` in `(-pi, pi]`.
    pub phi: f64,
    pub fidelity: f64,
}

/// First return time of the state up to a global phase.
///
/// Local maxima of the fidelity track are refined by golden-section search,
/// then polished by bisection on the slope of `|<psi0|psi(t)>|^2`. The first
/// refined peak with `1 - fidelity <= fidelity_tol` is the period.
pub fn detect_period(result: &EvolutionResult, fidelity_tol: f64) -> Result<PeriodEstimate, OracleError> {
    detect_period_with(result, fidelity_tol, DEFAULT_GOLDEN_ITERATIONS)
}

pub fn detect_period_with(result: &EvolutionResult, fidelity_tol: f64, golden_iterations: usize) -> Result<PeriodEstimate, OracleError> {
    if !(fidelity_tol > 0.0 && fidelity_tol <= 1e-3) {
        return Err(OracleError::BadParameters(format!("fidelity_tol must lie in (0, 1e-3], got {fidelity_tol}")));
    }
    let p = &result.propagator;
    let (t, f) = (&result.times, &result.fidelity_track);
    if result.is_stationary() {
        let o = p.overlap(t[1]);
        return Ok(PeriodEstimate {
            tau: t[1],
            phi: wrap_to_pi(o.arg()),
            fidelity: o.norm(),
        });
    }
    for i in 1..t.len() - 1 {
        if !(f[i] >= f[i - 1] && f[i] >= f[i + 1]) || 1.0 - f[i] > 0.1 {
            continue;
        }
        let tau = refine_peak(p, t[i - 1], t[i + 1], golden_iterations);
        let o = p.overlap(tau);
        if 1.0 - o.norm() <= fidelity_tol {
            return Ok(PeriodEstimate {
                tau,
                phi: wrap_to_pi(o.arg()),
                fidelity: o.norm(),
            });
        }
    }
    Err(OracleError::NoPeriod(*t.last().unwrap()))
}

fn refine_peak(p: &Propagator, mut a: f64, mut b: f64, iterations: usize) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let fid = |t: f64| p.overlap(t).norm();
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (fid(c), fid(d));
    for _ in 0..iterations {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = fid(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = fid(d);
        }
    }
    // The fidelity is flat at its maximum; its slope crosses zero linearly,
    // so bisecting on the slope resolves the peak to rounding.
    let (mut lo, mut hi) = (a, b);
    let (mut s_lo, s_hi) = (p.fidelity_slope(lo), p.fidelity_slope(hi));
    if s_lo.signum() == s_hi.signum() || s_lo == 0.0 || s_hi == 0.0 {
        return if fc >= fd { c } else { d };
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let s = p.fidelity_slope(mid);
        if s == 0.0 {
            return mid;
        }
        if s.signum() == s_lo.signum() {
            lo = mid;
            s_lo = s;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Composite Simpson rule over `intervals` (rounded up to even) subintervals.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, intervals: usize) -> f64 {
    let n = intervals.max(2) + intervals % 2;
    let h = (b - a) / n as f64;
    let mut sum = f(a) + f(b);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(a + k as f64 * h);
    }
    sum * h / 3.0
}

/// Dynamical phase `-int_0^tau <psi(t)|H|psi(t)> dt` (hbar = 1).
///
/// The integrand is evaluated by applying `H` to the evolved state. For a
/// time-independent `H` it is constant, and the quadrature must agree with
/// `tau <H>(0)` to `1e-9` relative or the call fails.
pub fn dynamical_phase(h: &BlockHamiltonian, result: &EvolutionResult, tau: f64) -> Result<f64, OracleError> {
    let integral = simpson(|t| h.expectation(&result.state_at(t)), 0.0, tau, SIMPSON_INTERVALS);
    let expected = tau * h.expectation(&result.state_at(0.0));
    let scale = tau * result.propagator.energy_scale();
    if (integral - expected).abs() > QUADRATURE_TOL * scale.max(expected.abs()) {
        return Err(OracleError::QuadratureMismatch {
            quadrature: integral,
            expected,
        });
    }
    Ok(-integral)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleOptions {
    pub t_max: f64,
    pub fidelity_tol: f64,
    /// Grid density: points per `2 pi / sigma_E`, the dephasing time scale.
    pub points_per_period: usize,
    pub golden_iterations: usize,
}

impl OracleOptions {
    pub fn new(t_max: f64) -> Self {
        OracleOptions {
            t_max,
            fidelity_tol: DEFAULT_FIDELITY_TOL,
            points_per_period: DEFAULT_POINTS_PER_PERIOD,
            golden_iterations: DEFAULT_GOLDEN_ITERATIONS,
        }
    }

    /// Accept near-returns with a fidelity deficit up to `1e-4`.
    pub fn approximate(t_max: f64) -> Self {
        OracleOptions {
            fidelity_tol: APPROXIMATE_FIDELITY_TOL,
            ..Self::new(t_max)
        }
    }
}

fn grid_steps(result_spread: f64, opts: &OracleOptions) -> usize {
    let scales = (opts.t_max * result_spread / TAU).ceil().max(1.0);
    (scales as usize).saturating_mul(opts.points_per_period).max(opts.points_per_period)
}

/// Geometric phase by the generic method: numerical period and total phase,
/// dynamical phase by quadrature, `gamma = phi - phi_dyn`.
pub fn generic_gamma(h: &DenseHamiltonian, psi0: &DVector<Complex64>, opts: &OracleOptions) -> Result<PhaseReport, OracleError> {
    generic_gamma_blocks(&BlockHamiltonian::from_dense(h), psi0, opts)
}

pub fn generic_gamma_blocks(h: &BlockHamiltonian, psi0: &DVector<Complex64>, opts: &OracleOptions) -> Result<PhaseReport, OracleError> {
    let probe = Propagator::new(h, psi0)?;
    let mean = probe.mean_energy();
    let steps = grid_steps(probe.energy_spread(), opts);
    let result = evolve_blocks(h, psi0, opts.t_max, steps)?;
    let base = PhaseReport {
        method: Method::Oracle,
        stationary: false,
        unit: h.unit(),
        tau: PhaseValue { exact: None, value: 0.0 },
        phi: PhaseValue { exact: None, value: 0.0 },
        gamma: 0.0,
        mean_energy: mean,
        branch_integers: Default::default(),
        fidelity: None,
    };
    if result.is_stationary() {
        return Ok(PhaseReport { stationary: true, fidelity: Some(1.0), ..base });
    }
    let est = detect_period_with(&result, opts.fidelity_tol, opts.golden_iterations)?;
    let phi_dyn = dynamical_phase(h, &result, est.tau)?;
    Ok(PhaseReport {
        tau: PhaseValue { exact: None, value: est.tau },
        phi: PhaseValue { exact: None, value: est.phi },
        gamma: wrap_to_2pi(est.phi - phi_dyn),
        fidelity: Some(est.fidelity),
        ..base
    })
}

/// `<psi|H|psi>` for a dense Hamiltonian.
pub fn mean_energy(h: &DenseHamiltonian, psi: &DVector<Complex64>) -> f64 {
    psi.dotc(&(&h.matrix * psi)).re
}

/// Half-turn check used by callers comparing phases: `true` if `phi` is
/// within `tol` of `+-pi`.
pub fn is_half_turn(phi: f64, tol: f64) -> bool {
    (phi.abs() - PI).abs() <= tol
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase::angle_distance;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn spin(theta: f64) -> (DenseHamiltonian, DVector<Complex64>) {
        let h = DenseHamiltonian::diagonal(&[-1.0, 1.0], 1.0);
        let psi = DVector::from_vec(vec![c((theta / 2.0).cos()), c((theta / 2.0).sin())]);
        (h, psi)
    }

    #[test]
    fn hermiticity_enforced() {
        let rows = vec![vec![c(1.0), Complex64::new(0.0, 1.0)], vec![Complex64::new(0.0, 1.0), c(2.0)]];
        assert!(matches!(DenseHamiltonian::from_rows(&rows, 1.0), Err(OracleError::NotHermitian(_))));
        let rows = vec![vec![c(1.0), Complex64::new(0.0, 1.0)], vec![Complex64::new(0.0, -1.0), c(2.0)]];
        assert!(DenseHamiltonian::from_rows(&rows, 1.0).is_ok());
        assert!(matches!(
            DenseHamiltonian::from_rows(&[vec![c(1.0), c(0.0)]], 1.0),
            Err(OracleError::NotSquare { .. })
        ));
    }

    #[test]
    fn zero_hamiltonian_keeps_state() {
        let h = DenseHamiltonian::diagonal(&[0.0, 0.0], 1.0);
        let psi = DVector::from_vec(vec![c(0.6), c(0.8)]);
        let r = evolve(&h, &psi, 5.0, 16).unwrap();
        for i in 0..r.times.len() {
            assert!((r.state(i) - &psi).norm() < 1e-15);
        }
    }

    #[test]
    fn diag23_returns_at_two_pi() {
        let h = DenseHamiltonian::diagonal(&[2.0, 3.0], 1.0);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let psi = DVector::from_vec(vec![c(s), c(s)]);
        let r = evolve(&h, &psi, 1.5 * TAU, 3 * 4096).unwrap();
        let est = detect_period(&r, DEFAULT_FIDELITY_TOL).unwrap();
        assert!((est.tau - TAU).abs() < 1e-6);
        assert!(est.phi.abs() < 1e-6);
        let phi_dyn = dynamical_phase(&BlockHamiltonian::from_dense(&h), &r, est.tau).unwrap();
        assert!((phi_dyn + 5.0 * PI).abs() < 1e-6);
    }

    #[test]
    fn spin_half_return_and_phase() {
        let (h, psi) = spin(PI / 2.0);
        let r = evolve(&h, &psi, 1.5 * PI, 4096).unwrap();
        let est = detect_period(&r, DEFAULT_FIDELITY_TOL).unwrap();
        assert!((est.tau - PI).abs() < 1e-9);
        assert!(is_half_turn(est.phi, 1e-9));

        let theta: f64 = 1.2;
        let (h, psi) = spin(theta);
        let r = evolve(&h, &psi, 1.5 * PI, 4096).unwrap();
        let est = detect_period(&r, DEFAULT_FIDELITY_TOL).unwrap();
        let phi_dyn = dynamical_phase(&BlockHamiltonian::from_dense(&h), &r, est.tau).unwrap();
        assert!((phi_dyn - PI * theta.cos()).abs() < 1e-8);
    }

    #[test]
    fn generic_gamma_spin() {
        let (h, psi) = spin(PI / 3.0);
        let rep = generic_gamma(&h, &psi, &OracleOptions::new(1.5 * PI)).unwrap();
        assert!(angle_distance(rep.gamma, PI / 2.0) < 1e-6);
        assert_eq!(rep.method, Method::Oracle);
    }

    #[test]
    fn eigenstate_is_stationary() {
        let (h, _) = spin(0.0);
        let psi = DVector::from_vec(vec![c(1.0), c(0.0)]);
        let rep = generic_gamma(&h, &psi, &OracleOptions::new(10.0)).unwrap();
        assert!(rep.stationary);
        assert_eq!(rep.gamma, 0.0);
        let r = evolve(&h, &psi, 10.0, 100).unwrap();
        let est = detect_period(&r, 1e-8).unwrap();
        assert_eq!(est.tau, r.times[1]);
    }

    #[test]
    fn no_return_before_t_max() {
        let (h, psi) = spin(1.0);
        let r = evolve(&h, &psi, 0.9 * PI, 4096).unwrap();
        assert!(matches!(detect_period(&r, 1e-8), Err(OracleError::NoPeriod(_))));
    }

    #[test]
    fn rejects_bad_inputs() {
        let (h, _) = spin(1.0);
        let bad = DVector::from_vec(vec![c(1.0), c(1.0)]);
        assert!(matches!(evolve(&h, &bad, 1.0, 10), Err(OracleError::NotNormalized(_))));
        let short = DVector::from_vec(vec![c(1.0)]);
        assert!(matches!(evolve(&h, &short, 1.0, 10), Err(OracleError::DimensionMismatch { .. })));
        let psi = DVector::from_vec(vec![c(1.0), c(0.0)]);
        assert!(evolve(&h, &psi, 1.0, 1).is_err());
        let r = evolve(&h, &psi, 1.0, 10).unwrap();
        assert!(detect_period(&r, 0.5).is_err());
    }

    #[test]
    fn block_detection() {
        let mut m = DMatrix::zeros(4, 4);
        m[(0, 0)] = c(1.0);
        m[(2, 2)] = c(2.0);
        m[(0, 2)] = c(0.5);
        m[(2, 0)] = c(0.5);
        m[(1, 1)] = c(3.0);
        m[(3, 3)] = c(-1.0);
        let h = DenseHamiltonian::new(m, 1.0).unwrap();
        let b = BlockHamiltonian::from_dense(&h);
        assert_eq!(b.blocks().len(), 3);
        assert_eq!(b.blocks()[0].indices, vec![0, 2]);
        assert_eq!(b.to_dense(), h);
        let mut ev = b.eigenvalues();
        ev.sort_by(f64::total_cmp);
        assert!((ev[0] + 1.0).abs() < 1e-14);
    }

    #[test]
    fn text_round_trip() {
        let rows = vec![
            vec![c(1.5), Complex64::new(0.25, -0.5)],
            vec![Complex64::new(0.25, 0.5), c(-2.0)],
        ];
        let h = DenseHamiltonian::from_rows(&rows, 2.0).unwrap();
        let back = DenseHamiltonian::from_text(&h.to_text()).unwrap();
        assert_eq!(back, h);
        assert!(DenseHamiltonian::from_text("dimension: 2\n1 0\n").is_err());
    }

    #[test]
    fn simpson_is_exact_for_cubics() {
        let v = simpson(|x| x * x * x - 2.0 * x + 1.0, 0.0, 2.0, 6);
        assert!((v - 2.0).abs() < 1e-14);
    }
}
