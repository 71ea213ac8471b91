//! Text encodings shared by config files and reports.
//!
//! Complex numbers are written `re+imi` / `re-imi`, reals with 17 significant
//! digits so that every `f64` round-trips exactly.

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("cannot parse {kind} from {text:?}")]
pub struct ParseError {
    pub kind: &'static str,
    pub text: String,
}

fn err(kind: &'static str, text: &str) -> ParseError {
    ParseError {
        kind,
        text: text.to_string(),
    }
}

/// 17 significant digits in scientific notation.
pub fn format_real(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn parse_real(s: &str) -> Result<f64, ParseError> {
    s.trim().parse::<f64>().map_err(|_| err("real", s))
}

pub fn format_complex(z: Complex64) -> String {
    let sign = if z.im.is_sign_negative() { '-' } else { '+' };
    format!("{}{}{}i", format_real(z.re), sign, format_real(z.im.abs()))
}

/// Parse `a+bi`, `a-bi`, `a`, `bi` (spaces allowed, `j` accepted for `i`).
pub fn parse_complex(s: &str) -> Result<Complex64, ParseError> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if t.is_empty() {
        return Err(err("complex", s));
    }
    let Some(body) = t.strip_suffix('i').or_else(|| t.strip_suffix('j')) else {
        return Ok(Complex64::new(parse_real(&t).map_err(|_| err("complex", s))?, 0.0));
    };
    // Split at the last sign that is neither leading nor part of an exponent.
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (&body[..k], &body[k..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => "1",
        "-" => "-1",
        other => other,
    };
    let re = re.parse::<f64>().map_err(|_| err("complex", s))?;
    let im = im.parse::<f64>().map_err(|_| err("complex", s))?;
    Ok(Complex64::new(re, im))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn complex_forms() {
        assert_eq!(parse_complex("0.5+0.2i").unwrap(), Complex64::new(0.5, 0.2));
        assert_eq!(parse_complex("0.5-0.2i").unwrap(), Complex64::new(0.5, -0.2));
        assert_eq!(parse_complex("-1").unwrap(), Complex64::new(-1.0, 0.0));
        assert_eq!(parse_complex("2i").unwrap(), Complex64::new(0.0, 2.0));
        assert_eq!(parse_complex("-i").unwrap(), Complex64::new(0.0, -1.0));
        assert_eq!(parse_complex("1e-3+2E-4i").unwrap(), Complex64::new(1e-3, 2e-4));
        assert_eq!(parse_complex("-1e-3-2e+1i").unwrap(), Complex64::new(-1e-3, -20.0));
        assert_eq!(parse_complex(" 0.3 + 0 i ").unwrap(), Complex64::new(0.3, 0.0));
        assert!(parse_complex("abc").is_err());
        assert!(parse_complex("").is_err());
        assert!(parse_complex("1+2").is_err());
    }

    #[test]
    fn real_has_17_significant_digits() {
        assert_eq!(format_real(0.1), "1.0000000000000001e-1");
        assert_eq!(format_real(-2.0), "-2.0000000000000000e0");
    }

    proptest! {
        #[test]
        fn complex_round_trip(re in -1e12f64..1e12, im in -1e12f64..1e12) {
            let z = Complex64::new(re, im);
            prop_assert_eq!(parse_complex(&format_complex(z)).unwrap(), z);
        }
    }
}
