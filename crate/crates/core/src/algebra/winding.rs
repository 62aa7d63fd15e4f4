use std::f64::consts::PI;

use num_complex::Complex64;

use crate::{Error, Result};

/// Winding number of a closed polygonal loop around the origin.
///
/// Requires `|w_{j+1} − w_j| < |w_j|` for every consecutive pair (including
/// the closing step). Under that condition each step turns by less than
/// `π/2` and the segment between samples avoids the origin, so the summed
/// principal arguments are exactly `2π` times the winding number.
pub fn winding_number(samples: &[Complex64]) -> Result<i64> {
    let m = samples.len();
    if m == 0 {
        return Ok(0);
    }
    let mut total = 0.0;
    for j in 0..m {
        let w = samples[j];
        let next = samples[(j + 1) % m];
        if !((next - w).norm() < w.norm()) {
            return Err(Error::UncertifiableLoop { index: j });
        }
        total += (next / w).arg();
    }
    Ok((total / (2.0 * PI)).round() as i64)
}
