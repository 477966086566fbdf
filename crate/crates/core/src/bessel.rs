//! Modified Bessel functions of the first kind by power series.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BesselError {
    #[error("order {0} is not supported (only 0 and 1)")]
    Order(u32),
    #[error("argument {0} is outside [0, 4]")]
    Domain(f64),
}

/// `I_ν(x) = Σ_k (x/2)^{2k+ν} / (k! (k+ν)!)` for `ν ∈ {0, 1}` and
/// `0 <= x <= 4`, summed until the relative term size drops below `1e-17`.
pub fn bessel_i(nu: u32, x: f64) -> Result<f64, BesselError> {
    if nu > 1 {
        return Err(BesselError::Order(nu));
    }
    if !(0.0..=4.0).contains(&x) {
        return Err(BesselError::Domain(x));
    }
    let half = 0.5 * x;
    let q = half * half;
    let mut term = if nu == 0 { 1.0 } else { half };
    if term == 0.0 {
        return Ok(0.0);
    }
    let mut sum = term;
    let nu = f64::from(nu);
    for k in 1..200 {
        let k = f64::from(k);
        term *= q / (k * (k + nu));
        sum += term;
        if term <= 1e-17 * sum {
            break;
        }
    }
    Ok(sum)
}
