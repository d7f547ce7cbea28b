//! Large-J location of the relevance-weight posterior.

use crate::error::{Error, Result};

fn check(epsilon: f64, y: f64, a: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon.is_finite()) || !(a > 0.0 && a.is_finite()) || !(y >= 0.0 && y.is_finite()) {
        return Err(Error::domain(format!(
            "concentration point needs epsilon > 0, a > 0, y >= 0; got ({epsilon}, {y}, {a})"
        )));
    }
    Ok(())
}

/// Point μ* at which the posterior of μ_k concentrates when the average count per sample is `y`.
///
/// `μ* = 2aε / (√(d² + 8aε) − d)` with `d = y − a + ε`; for `d > 0` the equivalent
/// form `(√(d² + 8aε) + d) / 4` is used to avoid cancellation.
pub fn concentration_point(epsilon: f64, y: f64, a: f64) -> Result<f64> {
    check(epsilon, y, a)?;
    let d = y - a + epsilon;
    let root = d.hypot((8.0 * a * epsilon).sqrt());
    Ok(if d > 0.0 {
        (root + d) / 4.0
    } else {
        2.0 * a * epsilon / (root - d)
    })
}

/// First-order approximation of [`concentration_point`], accurate when ε ≪ |y − a|.
///
/// Returns `(y − a)/2` above the knee and `εa(a − y)/((a − y)² + (a + y)ε)` below it.
pub fn concentration_point_approx(epsilon: f64, y: f64, a: f64) -> Result<f64> {
    check(epsilon, y, a)?;
    Ok(if y > a {
        (y - a) / 2.0
    } else {
        epsilon * a * (a - y) / ((a - y).powi(2) + (a + y) * epsilon)
    })
}
