//! Two-mirror optomechanical cavity with rational `omega_f / omega_m` and
//! `(g / omega_m)^2`. The closed form describes the loop `tau = 2 pi p /
//! omega_m`, which can be several minimal loops; the variant with `p /
//! omega_m` in place of `p` disagrees as soon as `omega_m != 1`.

use aaphase::models::{
    two_mirror_gamma_closed_form, two_mirror_gamma_p_over_omega, two_mirror_hamiltonian, two_mirror_spectrum, TwoMirrorParams,
};
use aaphase::oracle::{generic_gamma_blocks, OracleOptions};
use aaphase::phase::{angle_distance, geometric_phase};
use aaphase::rational::Rational;
use num_complex::Complex64;

fn main() {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    for omega_m in [1.0, 2.0] {
        let params = TwoMirrorParams {
            omega_m,
            r: Rational::from(2),
            k2: Rational::frac(1, 2),
            field_amplitudes: vec![Complex64::new(h, 0.0), Complex64::new(h, 0.0)],
            beta: Complex64::new(0.3, 0.0),
            mirror_truncation: 40,
        };
        let (s, st) = two_mirror_spectrum(&params).unwrap();
        let minimal = geometric_phase(&s, &st).unwrap();
        let p = params.p();
        let loop_tau = std::f64::consts::TAU * p as f64 / omega_m;
        let times = (loop_tau / minimal.tau.value).round() as u32;
        let long = minimal.repeated(times);

        let (bh, psi) = two_mirror_hamiltonian(&params).unwrap();
        let oracle = generic_gamma_blocks(&bh, &psi, &OracleOptions::new(1.5 * minimal.tau.value)).unwrap();

        let closed = two_mirror_gamma_closed_form(&params, p);
        let variant = two_mirror_gamma_p_over_omega(&params, p);
        println!("omega_m = {omega_m}");
        println!("  minimal loop: tau {:.9}, phi {} pi, gamma {:.12}", minimal.tau.value, minimal.phi.exact.as_ref().unwrap(), minimal.gamma);
        println!("  oracle:       tau {:.9}, gamma {:.12}", oracle.tau.value, oracle.gamma);
        println!("  {times} loops:      tau {:.9}, phi {} pi, gamma {:.12}", long.tau.value, long.phi.exact.as_ref().unwrap(), long.gamma);
        println!("  closed form {closed:.12} (diff {:.1e}), p/omega_m variant {variant:.12} (diff {:.1e})",
            angle_distance(closed, long.gamma), angle_distance(variant, long.gamma));
    }
}
