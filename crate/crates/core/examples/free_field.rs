//! A truncated coherent state of one field mode returns after exactly one
//! oscillation period, whatever its amplitude.

use aaphase::models::{coherent_occupation, free_field, free_field_hamiltonian};
use aaphase::oracle::{generic_gamma, OracleOptions};
use aaphase::phase::geometric_phase;
use num_complex::Complex64;

fn main() {
    let omega = 1.7;
    for alpha in [Complex64::new(0.5, 0.0), Complex64::new(1.2, -0.7), Complex64::new(2.0, 1.0)] {
        let occ = coherent_occupation(alpha, 31).unwrap();
        let (s, st) = free_field(omega, &occ).unwrap();
        let exact = geometric_phase(&s, &st).unwrap();
        let (h, psi) = free_field_hamiltonian(omega, &occ).unwrap();
        let oracle = generic_gamma(&h, &psi, &OracleOptions::new(1.5 * exact.tau.value)).unwrap();
        println!(
            "alpha {alpha}: tau exact {} ({:.12}), oracle {:.12}, gamma {:.9} vs {:.9}",
            exact.tau.exact.as_ref().unwrap(),
            exact.tau.value,
            oracle.tau.value,
            exact.gamma,
            oracle.gamma
        );
    }
}
