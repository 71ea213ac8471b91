//! Spin-1/2 precessing in a static field: the exact route against the
//! numerical oracle over a sweep of preparation angles.

use std::f64::consts::PI;

use aaphase::models::{spin_half, spin_half_hamiltonian, SpinHalfParams};
use aaphase::oracle::{generic_gamma, OracleOptions};
use aaphase::phase::{angle_distance, geometric_phase};

fn main() {
    println!("{:>8} {:>12} {:>12} {:>12} {:>10}", "theta", "exact", "1-cos", "oracle", "|diff|");
    for k in 1..20 {
        let p = SpinHalfParams { mu_b0: 1.0, theta: k as f64 * PI / 20.0 };
        let (s, st) = spin_half(&p).unwrap();
        let exact = geometric_phase(&s, &st).unwrap();
        let (h, psi) = spin_half_hamiltonian(&p).unwrap();
        let oracle = generic_gamma(&h, &psi, &OracleOptions::new(1.5 * exact.tau.value)).unwrap();
        println!(
            "{:>8.4} {:>12.9} {:>12.9} {:>12.9} {:>10.2e}",
            p.theta,
            exact.gamma,
            PI * (1.0 - p.theta.cos()),
            oracle.gamma,
            angle_distance(exact.gamma, oracle.gamma)
        );
    }
    let (s, st) = spin_half(&SpinHalfParams { mu_b0: 1.0, theta: 1.0 }).unwrap();
    let r = geometric_phase(&s, &st).unwrap();
    println!("tau = {} x 2pi/(mu B0), phi = {} pi", r.tau.exact.unwrap(), r.phi.exact.unwrap());
}
