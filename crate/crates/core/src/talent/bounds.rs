//! Closed-form bounds on the talent contest and the resulting lower bound on
//! the random-order competitive ratio.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Terms summed directly before the Euler-Maclaurin tail.
const ZETA_TERMS: u32 = 1000;

/// Riemann zeta for real `s > 1`.
pub fn zeta(s: f64) -> Result<f64> {
    if !(s > 1.0) || !s.is_finite() {
        return Err(Error::Domain(format!("zeta needs s > 1, got {s}")));
    }
    let n = ZETA_TERMS as f64;
    // Tail from n on: integral, half term, then two derivative corrections.
    let tail = n.powf(1.0 - s) / (s - 1.0) + 0.5 * n.powf(-s) + s * n.powf(-s - 1.0) / 12.0
        - s * (s + 1.0) * (s + 2.0) * n.powf(-s - 3.0) / 720.0;
    let head: f64 = (1..ZETA_TERMS).rev().map(|x| (x as f64).powf(-s)).sum();
    Ok(head + tail)
}

/// `zeta(T/2) (T+1)^{T/2} / (2 pi sqrt K)`; diverges for `T <= 2`.
pub fn lemma8_bound(k: usize, t: u32) -> Result<f64> {
    if t <= 2 {
        return Err(Error::Domain(format!("bound undefined for T = {t} (needs T >= 3)")));
    }
    if k == 0 {
        return Err(Error::Domain("K must be positive".into()));
    }
    let half = t as f64 / 2.0;
    Ok(zeta(half)? * (t as f64 + 1.0).powf(half) / (2.0 * PI * (k as f64).sqrt()))
}

/// Per-`h` bound `rho^{T/2} / (2 pi sqrt K) + eps` with `rho = (T+1-h)/(T+1)`.
pub fn lemma11_bound(k: usize, t: u32, h: u32, eps: f64) -> Result<f64> {
    if h == 0 || h > t {
        return Err(Error::Domain(format!("h = {h} outside 1..={t}")));
    }
    if !(eps > 0.0 && eps < 1.0 / 6.0) {
        return Err(Error::Domain(format!("eps = {eps} outside (0, 1/6)")));
    }
    if k == 0 {
        return Err(Error::Domain("K must be positive".into()));
    }
    let rho = (t + 1 - h) as f64 / (t + 1) as f64;
    Ok(rho.powf(t as f64 / 2.0) / (2.0 * PI * (k as f64).sqrt()) + eps)
}

/// Principal branch of Lambert W for `x >= 0`, by Newton iteration on `w e^w = x`.
pub fn lambert_w0(x: f64) -> Result<f64> {
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("lambert_w0 implemented for finite x >= 0, got {x}")));
    }
    let mut w = x.ln_1p();
    for _ in 0..100 {
        let ew = w.exp();
        let step = (w * ew - x) / (ew * (w + 1.0));
        w -= step;
        if step.abs() <= 1e-12 * w.abs().max(1.0) {
            break;
        }
    }
    Ok(w)
}

/// `(floor(e^{W(ln m)}) - 1) / 1.16`, or 0 when the numerator is not positive.
///
/// `floor(e^{W(ln m)})` is the largest `j` with `j^j <= m`; the float value is
/// corrected against that exact test so powers like `m = 4 = 2^2` are not
/// lost to rounding.
pub fn theorem10_lower_bound(m: u64) -> Result<f64> {
    if m < 2 {
        return Err(Error::Domain(format!("m = {m} must be at least 2")));
    }
    let x = (m as f64).ln();
    let w = lambert_w0(x)?;
    let mut j = (x / w).floor().max(1.0) as u64;
    let fits = |j: u64| (j as u128).checked_pow(j as u32).is_some_and(|p| p <= m as u128);
    while !fits(j) {
        j -= 1;
    }
    while fits(j + 1) {
        j += 1;
    }
    Ok(((j as f64 - 1.0) / 1.16).max(0.0))
}
