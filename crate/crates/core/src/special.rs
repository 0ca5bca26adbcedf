//! Exponentially scaled modified Bessel function of order zero.

use std::f64::consts::PI;

use crate::error::{Error, Result};

// Below this the asymptotic series has not yet reached 1e-12 accuracy.
const SERIES_LIMIT: f64 = 20.0;

/// `exp(-x) * I0(x)` for `x >= 0`.
pub fn bessel_i0_scaled(x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::invalid(format!("scaled I0 requires x >= 0, got {x}")));
    }
    Ok(i0_scaled_unchecked(x))
}

pub(crate) fn i0_scaled_unchecked(x: f64) -> f64 {
    if x <= SERIES_LIMIT {
        series(x) * (-x).exp()
    } else {
        asymptotic(x)
    }
}

// sum_k (x^2/4)^k / (k!)^2; all terms positive.
fn series(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    loop {
        term *= q / (k * k);
        sum += term;
        if term <= sum * 1e-17 {
            return sum;
        }
        k += 1.0;
    }
}

// Hankel expansion, truncated once terms fall below double precision or
// start to grow.
fn asymptotic(x: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k: f64 = 1.0;
    while k < 60.0 {
        let next = term * (2.0 * k - 1.0).powi(2) / (8.0 * x * k);
        if next >= term {
            break;
        }
        term = next;
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
        k += 1.0;
    }
    sum / (2.0 * PI * x).sqrt()
}
