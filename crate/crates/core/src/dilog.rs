//! Real dilogarithm `Li2(x) = sum_{k>=1} x^k / k^2` for `x <= 1`.
//!
//! The power series is summed only on `[-1/2, 1/2]`; other arguments are
//! mapped there by the reflection, Landen and inversion identities:
//!
//! * `1/2 < x < 1`: `Li2(x) = pi^2/6 - ln(x) ln(1-x) - Li2(1-x)`
//! * `-1 <= x < -1/2`: `Li2(x) = -Li2(x/(x-1)) - ln(1-x)^2 / 2`
//! * `x < -1`: `Li2(x) = -pi^2/6 - ln(-x)^2 / 2 - Li2(1/x)`

use std::f64::consts::PI;

use crate::error::{Error, Result};

const PI2_6: f64 = PI * PI / 6.0;

pub fn dilog(x: f64) -> Result<f64> {
    if x.is_nan() || x > 1.0 {
        return Err(Error::InvalidParams(format!(
            "real dilogarithm needs x <= 1, got {x}"
        )));
    }
    Ok(li2(x))
}

fn li2(x: f64) -> f64 {
    if x == 1.0 {
        PI2_6
    } else if x > 0.5 {
        PI2_6 - x.ln() * (-x).ln_1p() - series(1.0 - x)
    } else if x >= -0.5 {
        series(x)
    } else if x >= -1.0 {
        let l = (-x).ln_1p();
        -series(x / (x - 1.0)) - 0.5 * l * l
    } else {
        let l = (-x).ln();
        -PI2_6 - 0.5 * l * l - li2(1.0 / x)
    }
}

/// Direct summation for `|x| <= 1/2`; terms fall below `2^-k / k^2`.
fn series(x: f64) -> f64 {
    let mut sum = 0.0;
    let mut pow = x;
    for k in 1..200u32 {
        let term = pow / (k * k) as f64;
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1e-300) {
            break;
        }
        pow *= x;
    }
    sum
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;

    #[test]
    fn special_values() {
        assert_eq!(dilog(0.0).unwrap(), 0.0);
        assert!((dilog(1.0).unwrap() - PI * PI / 6.0).abs() < 1e-15);
        assert!((dilog(-1.0).unwrap() + PI * PI / 12.0).abs() < 1e-14);
        // Li2(1/2) = pi^2/12 - ln(2)^2/2
        let l2 = 2f64.ln();
        assert!((dilog(0.5).unwrap() - (PI * PI / 12.0 - 0.5 * l2 * l2)).abs() < 1e-15);
        assert!(dilog(1.0000001).is_err());
        assert!(dilog(f64::NAN).is_err());
    }

    #[test]
    fn reference_values() {
        // mpmath polylog(2, x) at 30 digits
        let cases = [
            (-0.3, -0.28007433375958289),
            (-0.75, -0.64276126883997888),
            (-2.0, -1.4367463668836809),
            (-10.0, -4.1982778868581039),
            (0.9, 1.2997147230049588),
            (0.25, 0.2676526390827326),
            (-0.999, -0.82177378964724064),
        ];
        for (x, want) in cases {
            assert!((dilog(x).unwrap() - want).abs() < 1e-13, "Li2({x})");
        }
    }

    #[test]
    fn continuity_across_branch_switches() {
        for &b in &[0.5, -0.5, -1.0] {
            let below = dilog(b - 1e-12).unwrap();
            let above = dilog(b + 1e-12).unwrap();
            assert!((below - above).abs() < 1e-10, "jump at {b}");
        }
    }
}
