//! Confluent and Gauss hypergeometric functions in log domain.

use super::quad::{log_integrate, sigmoid, softplus};
use crate::error::{Error, Result};
use statrs::function::gamma::ln_gamma;

/// `ln ∫₀^∞ t^{a−1}(1+t)^{b−a−1}e^{−zt} dt`, which equals `ln Γ(a) + ln U(a, b, z)`.
///
/// Evaluated in the variable `u = ln t`. Ratios of these integrals with a common
/// first argument avoid the gamma function altogether.
pub fn log_kummer_integral(a: f64, b: f64, z: f64) -> Result<f64> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::domain(format!("kummer U requires a > 0, got {a}")));
    }
    if !(z > 0.0 && z.is_finite()) {
        return Err(Error::domain(format!("kummer U requires z > 0, got {z}")));
    }
    if !b.is_finite() {
        return Err(Error::domain(format!("kummer U requires finite b, got {b}")));
    }
    let c = b - a - 1.0;
    let g = |u: f64| a * u + c * softplus(u) - z * u.exp();
    let dg = |u: f64| a + c * sigmoid(u) - z * u.exp();
    log_integrate(g, dg, (a / z).ln())
}

/// Natural log of Tricomi's confluent hypergeometric function U(a, b, z) for a > 0, z > 0.
pub fn log_kummer_u(a: f64, b: f64, z: f64) -> Result<f64> {
    Ok(log_kummer_integral(a, b, z)? - ln_gamma(a))
}

/// Natural log of the Gauss hypergeometric function ₂F₁(a, b; c; z) for c > b > 0 and z < 1.
///
/// Uses the Euler integral with `t` mapped to the logistic of a real variable.
pub fn log_gauss_2f1(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    if !(b > 0.0) || !(c > b) {
        return Err(Error::domain(format!("2F1 requires c > b > 0, got b={b}, c={c}")));
    }
    if !(z < 1.0) || !a.is_finite() || !c.is_finite() {
        return Err(Error::domain(format!("2F1 requires finite a, c and z < 1, got a={a}, z={z}")));
    }
    if z == 0.0 {
        return Ok(0.0);
    }
    let d = c - b;
    let x = -z;
    let g = |v: f64| -b * softplus(-v) - d * softplus(v) - a * (x * sigmoid(v)).ln_1p();
    let dg = |v: f64| {
        let s = sigmoid(v);
        b * (1.0 - s) - d * s - a * x * s * (1.0 - s) / (1.0 + x * s)
    };
    let li = log_integrate(g, dg, (b / d).ln())?;
    Ok(ln_gamma(c) - ln_gamma(b) - ln_gamma(d) + li)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn u_identity_a_plus_one() {
        // U(a, a+1, z) = z^{-a}
        for &a in &[0.3, 1.0, 2.0, 21.0, 201.0, 4001.0] {
            for &z in &[0.01, 0.5, 5.0, 40.0] {
                let got = log_kummer_u(a, a + 1.0, z).unwrap();
                let want = -a * f64::ln(z);
                assert!(
                    (got - want).abs() <= 1e-10 * want.abs().max(1.0),
                    "a={a} z={z}: {got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn u_at_one_one_one() {
        // e·E₁(1) = 0.596347362323194...
        let got = log_kummer_u(1.0, 1.0, 1.0).unwrap();
        assert!(rel(got, 0.596_347_362_323_194_1_f64.ln()) < 1e-12);
    }

    #[test]
    fn u_reference_values() {
        // reference logs computed at 50 digits
        let cases = [
            (201.0, -50.0, 2.0, -998.463_760_602_692_8),
            (21.0, -19.0, 0.02, -71.002_835_001_472_38),
            (3.5, 2.25, 0.7, -2.051_569_563_704_908_5),
            (2001.0, -8000.0, 2.0, -18_215.651_336_363_24),
        ];
        for (a, b, z, want) in cases {
            let got = log_kummer_u(a, b, z).unwrap();
            assert!(rel(got, want) < 1e-10, "U({a},{b},{z}) log {got} vs {want}");
        }
    }

    #[test]
    fn u_domain_errors() {
        assert!(matches!(log_kummer_u(0.0, 1.0, 1.0), Err(Error::Domain(_))));
        assert!(matches!(log_kummer_u(1.0, 1.0, 0.0), Err(Error::Domain(_))));
        assert!(matches!(log_kummer_u(-1.0, 1.0, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn f21_zero_argument() {
        assert_eq!(log_gauss_2f1(3.0, 2.0, 5.0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn f21_log_identity() {
        // 2F1(1,1;2;z) = -ln(1-z)/z
        for &z in &[-1.0, -0.3, -10.0, -1e4, 0.5] {
            let got = log_gauss_2f1(1.0, 1.0, 2.0, z).unwrap();
            let want = (-(1.0 - z).ln() / z).ln();
            assert!((got - want).abs() < 1e-12, "z={z}: {got} vs {want}");
        }
    }

    #[test]
    fn f21_reference_values() {
        let cases = [
            (3.0, 2.0, 5.0, -0.7, -0.670_267_700_487_905_8),
            (6.0, 5.5, 48.5, -3.0, -1.565_322_388_635_493_5),
            (1.0, 0.5, 48.0, -2.0, -0.019_866_424_971_447_9),
        ];
        for (a, b, c, z, want) in cases {
            let got = log_gauss_2f1(a, b, c, z).unwrap();
            assert!((got - want).abs() < 1e-9 * want.abs().max(1e-2), "{got} vs {want}");
        }
    }

    #[test]
    fn f21_domain_errors() {
        assert!(log_gauss_2f1(1.0, 2.0, 2.0, -1.0).is_err());
        assert!(log_gauss_2f1(1.0, 0.0, 2.0, -1.0).is_err());
    }
}
