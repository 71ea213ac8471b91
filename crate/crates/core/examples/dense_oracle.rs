//! The numerical oracle on an arbitrary Hermitian matrix given as text:
//! propagate, find the first return, integrate the dynamical phase.

use aaphase::oracle::{evolve, detect_period, generic_gamma, DenseHamiltonian, OracleOptions};
use nalgebra::DVector;
use num_complex::Complex64;

const MATRIX: &str = "\
dimension: 3
unit: 1
1 0 0
0 1.5 0.5
0 0.5 1.5
";

fn main() {
    let h = DenseHamiltonian::from_text(MATRIX).unwrap();
    let psi = DVector::from_vec(vec![Complex64::new(0.6, 0.0), Complex64::new(0.8, 0.0), Complex64::new(0.0, 0.0)]);

    let run = evolve(&h, &psi, 10.0, 8192).unwrap();
    let est = detect_period(&run, 1e-8).unwrap();
    println!("first return at t = {:.12} (2 pi = {:.12}), fidelity {:.3e} from 1", est.tau, std::f64::consts::TAU, 1.0 - est.fidelity);
    println!("total phase {:.12}", est.phi);

    let report = generic_gamma(&h, &psi, &OracleOptions::new(10.0)).unwrap();
    println!("gamma {:.12}, <H> {:.12}", report.gamma, report.mean_energy);
    print!("{}", aaphase::report::write_phase_report(&report));
}
