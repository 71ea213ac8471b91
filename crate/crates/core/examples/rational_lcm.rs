//! Exact period arithmetic: LCM of rational sets and continued-fraction
//! rationalization of floating-point eigenvalues.

use aaphase::rational::{lcm_rationals, rationalize, Rational, RationalSet};

fn main() {
    let spacings = RationalSet::new([Rational::frac(1, 2), Rational::frac(2, 3), Rational::frac(3, 4)]).unwrap();
    let inverses = RationalSet::new(spacings.iter().map(|s| s.recip().unwrap())).unwrap();
    let tau = lcm_rationals(&inverses).unwrap();
    println!("spacings {:?}", spacings.elements());
    println!("period in units of 2pi/unit: {tau}");
    for s in &spacings {
        println!("  tau * {s} = {}", &tau * s);
    }

    for x in [0.75, 1.0 / 3.0, 0.142857142857, std::f64::consts::SQRT_2] {
        match rationalize(x, 1000, 1e-12) {
            Ok(r) => println!("{x} -> {r}"),
            Err(e) => println!("{x} -> {e}"),
        }
    }
}
