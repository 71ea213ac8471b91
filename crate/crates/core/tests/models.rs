//! Invariants of the physical models against their truncated matrices.

use aaphase::models::{
    coherent_amplitudes, displaced_amplitudes, three_mirror_gamma_coherent, three_mirror_gamma_general, three_mirror_spectrum,
    two_mirror_hamiltonian, two_mirror_level, two_mirror_mean_energy, two_mirror_spectrum, ModeState, ThreeMirrorParams,
    TwoMirrorParams,
};
use aaphase::phase::{angle_distance, geometric_phase};
use aaphase::rational::Rational;
use nalgebra::SymmetricEigen;
use num_complex::Complex64;

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn two_mirror(k2: Rational, truncation: usize) -> TwoMirrorParams {
    TwoMirrorParams {
        omega_m: 1.0,
        r: Rational::from(2),
        k2,
        field_amplitudes: vec![re(1.0), re(0.0), re(0.0), re(0.0), re(0.0)],
        beta: re(0.0),
        mirror_truncation: truncation,
    }
}

/// Per photon-number block, how many of the lowest truncated eigenvalues match
/// the analytic levels to 1e-8 relative.
fn matched_prefix(params: &TwoMirrorParams) -> Vec<usize> {
    let (h, _) = two_mirror_hamiltonian(params).unwrap();
    h.blocks()
        .iter()
        .enumerate()
        .map(|(n, b)| {
            let mut ev: Vec<f64> = SymmetricEigen::new(b.matrix.clone()).eigenvalues.iter().copied().collect();
            ev.sort_by(f64::total_cmp);
            ev.iter()
                .enumerate()
                .take_while(|&(m, e)| {
                    let x = two_mirror_level(params, n, m).to_f64();
                    (e - x).abs() <= 1e-8 * x.abs().max(1.0)
                })
                .count()
        })
        .collect()
}

#[test]
fn two_mirror_blocks_match_analytic_levels_at_the_bottom() {
    // Truncation 40 is exact for the uncoupled block and loses the top of
    // the displaced blocks, more so as k n grows.
    for (k2, floor) in [(Rational::frac(16, 25), [40, 24, 14, 7, 2]), (Rational::frac(1, 2), [40, 25, 16, 10, 4])] {
        let got = matched_prefix(&two_mirror(k2.clone(), 40));
        for (n, (&g, &f)) in got.iter().zip(&floor).enumerate() {
            assert!(g >= f, "k2 {k2} block {n}: {g} < {f}");
        }
        assert!(got.windows(2).all(|w| w[0] >= w[1]), "{got:?}");
    }
}

#[test]
fn two_mirror_truncation_error_recedes_with_size() {
    let k2 = Rational::frac(16, 25);
    let fractions: Vec<Vec<f64>> = [40usize, 80, 160]
        .iter()
        .map(|&t| matched_prefix(&two_mirror(k2.clone(), t)).iter().map(|&g| g as f64 / t as f64).collect())
        .collect();
    for n in 1..5 {
        assert!(fractions[0][n] < fractions[1][n] && fractions[1][n] < fractions[2][n], "block {n}: {fractions:?}");
    }
    assert!(fractions[2][1] >= 0.8, "{fractions:?}");
}

#[test]
fn two_mirror_mean_energy_matches_matrix() {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    for beta in [re(0.0), re(0.3), Complex64::new(0.5, 0.2)] {
        let params = TwoMirrorParams {
            omega_m: 1.5,
            r: Rational::from(2),
            k2: Rational::frac(1, 2),
            field_amplitudes: vec![re(h), re(h)],
            beta,
            mirror_truncation: 40,
        };
        let (bh, psi) = two_mirror_hamiltonian(&params).unwrap();
        assert!((bh.expectation(&psi) - two_mirror_mean_energy(&params)).abs() < 1e-10, "beta {beta}");
        let (s, st) = two_mirror_spectrum(&params).unwrap();
        let r = geometric_phase(&s, &st).unwrap();
        assert!((r.mean_energy - two_mirror_mean_energy(&params)).abs() < 1e-10);
    }
}

#[test]
fn displacement_preserves_norm_and_mean() {
    let beta = coherent_amplitudes(Complex64::new(0.4, -0.3), 80).unwrap().amplitudes;
    let moved = displaced_amplitudes(&beta, 1.1, 60).unwrap();
    assert!(moved.tail_mass < 1e-10);
    // D(x)|beta> is coherent at beta + x up to a phase.
    let target = coherent_amplitudes(Complex64::new(1.5, -0.3), 60).unwrap().amplitudes;
    let overlap: Complex64 = target.iter().zip(&moved.amplitudes).map(|(a, b)| a.conj() * b).sum();
    assert!((overlap.norm() - 1.0).abs() < 1e-10);
}

fn three_mirror(c_d: f64, c_s: f64, a: f64, b: f64, mu: Complex64) -> ThreeMirrorParams {
    ThreeMirrorParams {
        omega_d: 2.0,
        omega_s: 3.0,
        omega_m: 1.0,
        c_d,
        c_s,
        a: ModeState::Coherent(re(a)),
        b: ModeState::Coherent(re(b)),
        mirror: ModeState::Coherent(mu),
        truncations: [15, 15, 25],
    }
}

#[test]
fn three_mirror_block_frequency_tracks_chi() {
    let c_s = 1e-3;
    let params = three_mirror(0.0, c_s, 0.5, 0.5, re(0.3));
    let model = three_mirror_spectrum(&params).unwrap();
    let tc = params.truncations[2];
    let tb = params.truncations[1];
    let mut seen = 0;
    for block in model.hamiltonian.blocks() {
        let n_b = (block.indices[0] / tc) % tb;
        if 2.0 * c_s * n_b as f64 > 0.01 * params.omega_m {
            continue;
        }
        let mut ev: Vec<f64> = SymmetricEigen::new(block.matrix.clone()).eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        let spacing = ev[1] - ev[0];
        assert!((spacing - params.omega_m).abs() <= 0.01 * params.omega_m, "n_b {n_b}: {spacing}");
        assert!((spacing - params.chi(n_b)).abs() < 1e-8, "n_b {n_b}: {spacing} vs {}", params.chi(n_b));
        seen += 1;
    }
    assert!(seen > 0);
}

#[test]
fn three_mirror_uncoupled_closed_forms_are_exact() {
    for (a, b, mu) in [(0.5, 0.5, re(0.3)), (1.0, 0.2, Complex64::new(0.4, 0.6)), (0.0, 1.0, re(1.0))] {
        let params = three_mirror(0.0, 0.0, a, b, mu);
        let model = three_mirror_spectrum(&params).unwrap();
        let (s, st) = model.exact.as_ref().expect("exact spectrum without couplings");
        let exact = geometric_phase(s, st).unwrap();
        let coherent = three_mirror_gamma_coherent(&params, 1).unwrap();
        let general = three_mirror_gamma_general(&params, 1).unwrap();
        assert!(angle_distance(exact.gamma, coherent) < 1e-10, "({a},{b},{mu})");
        assert!(angle_distance(coherent, general) < 1e-10);
    }
}

#[test]
fn three_mirror_drive_only_family_is_exact() {
    // C_S = 0 keeps the spectrum rational when C_D^2 / omega_m^2 is.
    let mut params = three_mirror(0.25, 0.0, 0.3, 0.3, re(0.2));
    params.truncations = [8, 8, 40];
    let model = three_mirror_spectrum(&params).unwrap();
    let (s, st) = model.exact.as_ref().expect("rational drive-only spectrum");
    assert!(geometric_phase(s, st).unwrap().tau.exact.is_some());
    let [ta, tb, tc] = params.truncations;
    for block in model.hamiltonian.blocks() {
        let na = block.indices[0] / (tb * tc);
        let nb = (block.indices[0] / tc) % tb;
        let lowest = SymmetricEigen::new(block.matrix.clone()).eigenvalues.min();
        let expected = params.omega_d * na as f64 + params.omega_s * nb as f64 - (params.c_d * na as f64).powi(2) / params.omega_m;
        assert!((lowest - expected).abs() < 1e-8, "({na},{nb}): {lowest} vs {expected}");
        assert!(na < ta);
    }
}

#[test]
fn coupled_three_mirror_has_no_exact_spectrum() {
    let model = three_mirror_spectrum(&three_mirror(1e-3, 1e-3, 0.5, 0.5, re(0.3))).unwrap();
    assert!(model.exact.is_none());
}
