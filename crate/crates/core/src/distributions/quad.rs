//! Log-domain trapezoidal quadrature for smooth unimodal integrands on the real line.
//!
//! The integrand is supplied as `g(u) = ln f(u)` together with its derivative. The
//! mode is bracketed and bisected on `g'`, the step is set from the width at which
//! `g` drops by one unit, and the range is extended until `g` has dropped by
//! [`TAIL_DROP`] on both sides. The step is then halved until the log of the sum
//! stabilises. For analytic integrands with fast-decaying tails the trapezoid rule
//! converges geometrically, so a couple of halvings reach double precision.

use crate::error::{Error, Result};

const TAIL_DROP: f64 = 60.0;
const MAX_NODES: usize = 1 << 23;
const LOG_TOL: f64 = 1e-13;

/// Locates the root of a function that is positive on the left and non-positive on the right.
pub(crate) fn find_mode<D: Fn(f64) -> f64>(dg: &D, start: f64) -> Result<f64> {
    let (mut lo, mut hi);
    let mut step = 1.0;
    if dg(start) > 0.0 {
        lo = start;
        loop {
            hi = lo + step;
            if !(dg(hi) > 0.0) {
                break;
            }
            lo = hi;
            step *= 2.0;
            if step > 1e9 {
                return Err(Error::Convergence("mode search diverged to +inf".into()));
            }
        }
    } else {
        hi = start;
        loop {
            lo = hi - step;
            if dg(lo) > 0.0 {
                break;
            }
            hi = lo;
            step *= 2.0;
            if step > 1e9 {
                return Err(Error::Convergence("mode search diverged to -inf".into()));
            }
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= 1e-13 * (1.0 + mid.abs()) {
            break;
        }
        if dg(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Distance from the mode `m` (in direction `dir`) at which `g` first falls `drop` below `gm`.
fn drop_distance<G: Fn(f64) -> f64>(g: &G, m: f64, gm: f64, dir: f64, drop: f64) -> Result<f64> {
    let mut d = 1e-6 * (1.0 + m.abs());
    let mut inside = 0.0;
    while g(m + dir * d) > gm - drop {
        inside = d;
        d *= 2.0;
        if d > 1e12 {
            return Err(Error::Convergence("integrand tail does not decay".into()));
        }
    }
    let mut outside = d;
    for _ in 0..60 {
        let mid = 0.5 * (inside + outside);
        if g(m + dir * mid) > gm - drop {
            inside = mid;
        } else {
            outside = mid;
        }
    }
    Ok(outside)
}

/// Returns `ln ∫ exp(g(u)) du` over the real line.
///
/// `start` is a rough guess at the mode; a good guess only saves bracketing steps.
pub(crate) fn log_integrate<G, D>(g: G, dg: D, start: f64) -> Result<f64>
where
    G: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let m = find_mode(&dg, start)?;
    let gm = g(m);
    if !gm.is_finite() {
        return Err(Error::Convergence(format!("non-finite integrand at mode ({gm})")));
    }
    let w = drop_distance(&g, m, gm, -1.0, 1.0)?.min(drop_distance(&g, m, gm, 1.0, 1.0)?);
    let lo = m - drop_distance(&g, m, gm, -1.0, TAIL_DROP)?;
    let hi = m + drop_distance(&g, m, gm, 1.0, TAIL_DROP)?;

    let span = hi - lo;
    let mut n = ((span / (w / 3.0)).ceil() as usize).max(16);
    if n > MAX_NODES {
        return Err(Error::Convergence(format!(
            "quadrature needs {n} nodes (span {span:.3e}, width {w:.3e})"
        )));
    }
    let mut h = span / n as f64;
    let mut sum: f64 = (0..=n)
        .map(|i| {
            let e = (g(lo + i as f64 * h) - gm).exp();
            if i == 0 || i == n {
                0.5 * e
            } else {
                e
            }
        })
        .sum();
    let mut prev = (sum * h).ln();
    loop {
        if 2 * n > MAX_NODES {
            return Err(Error::Convergence("quadrature did not converge".into()));
        }
        let mids: f64 = (0..n).map(|i| (g(lo + (i as f64 + 0.5) * h) - gm).exp()).sum();
        sum += mids;
        n *= 2;
        h *= 0.5;
        let cur = (sum * h).ln();
        if (cur - prev).abs() < LOG_TOL {
            return Ok(gm + cur);
        }
        prev = cur;
    }
}

/// Numerically stable `ln(1 + e^x)`.
#[inline]
pub(crate) fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// Logistic function `1 / (1 + e^{-x})`.
#[inline]
pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}
