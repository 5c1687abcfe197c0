use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quad::{integrate, QuadOptions};
use crate::scaled::ScaledValue;

const RESCALE: f64 = 1e250;

fn miller_start(n: u32, x: f64) -> usize {
    let base = (n as f64).max(x);
    let m = base + 20.0 + (50.0 * base).sqrt();
    // even start keeps the J normalisation sum aligned
    2 * ((m as usize) / 2 + 1)
}

/// `Σ_k (x²/4)^k n! / (k! (n+k)!)`, so that `I_n(x) = (x/2)^n / n! · series`.
fn i_series_reduced(n: u32, x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    while term > 1e-17 * sum {
        term *= q / (k * (k + n as f64));
        sum += term;
        k += 1.0;
    }
    sum
}

/// `I_n(x) e^{-x}` for `x > 0` by Miller's backward recurrence normalised
/// with `e^x = I_0 + 2 Σ I_k`. Returned as a scaled value since it can
/// underflow for `n ≫ x`.
fn i_miller_scaled(n: u32, x: f64) -> ScaledValue {
    let m = miller_start(n, x);
    let mut next = 0.0; // I_{j+1}
    let mut cur = 1.0; // I_j
    let mut sum = 0.0;
    let mut captured = 0.0;
    let mut shifts = 0i64;
    let mut shifts_at_capture = 0i64;
    for j in (1..=m).rev() {
        if j == n as usize {
            captured = cur;
            shifts_at_capture = shifts;
        }
        sum += 2.0 * cur;
        let prev = next + (2.0 * j as f64 / x) * cur;
        next = cur;
        cur = prev;
        if cur.abs() > RESCALE {
            cur /= RESCALE;
            next /= RESCALE;
            sum /= RESCALE;
            shifts += 1;
        }
    }
    sum += cur;
    if n == 0 {
        captured = cur;
        shifts_at_capture = shifts;
    }
    let lost = (shifts - shifts_at_capture) as f64 * RESCALE.ln();
    ScaledValue::from_f64(captured / sum) * ScaledValue::from_ln(-lost, 1.0)
}

/// Modified Bessel function `I_n(x)`.
pub fn bessel_i(n: u32, x: f64) -> ScaledValue {
    if x < 0.0 {
        let v = bessel_i(n, -x);
        return if n % 2 == 1 { -v } else { v };
    }
    if x == 0.0 {
        return if n == 0 { ScaledValue::ONE } else { ScaledValue::ZERO };
    }
    if x < 1.0 {
        let pre = ScaledValue::from_f64(0.5 * x).powi(n as i32) / ScaledValue::factorial(n as u64);
        return pre * i_series_reduced(n, x);
    }
    i_miller_scaled(n, x) * ScaledValue::from_ln(x, 1.0)
}

/// `I_n(x) / x^n`, finite at `x = 0` where it equals `1 / (2^n n!)`.
pub fn bessel_i_over_power(n: u32, x: f64) -> ScaledValue {
    let x = x.abs();
    if x < 1.0 {
        let pre = (ScaledValue::from_f64(2.0).powi(n as i32) * ScaledValue::factorial(n as u64)).recip();
        return pre * i_series_reduced(n, x);
    }
    bessel_i(n, x) / ScaledValue::from_f64(x).powi(n as i32)
}

/// Bessel function `J_n(x)` of integer order `n ≥ 0`.
///
/// Small arguments use the power series, the rest Miller's backward
/// recurrence normalised with `1 = J_0 + 2 Σ J_{2k}`.
pub fn bessel_j(n: u32, x: f64) -> f64 {
    if x < 0.0 {
        let v = bessel_j(n, -x);
        return if n % 2 == 1 { -v } else { v };
    }
    if x == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    if x < 1.0 {
        let q = -0.25 * x * x;
        let mut term = 1.0f64;
        let mut sum = 1.0f64;
        let mut k = 1.0;
        while term.abs() > 1e-17 * sum.abs() {
            term *= q / (k * (k + n as f64));
            sum += term;
            k += 1.0;
        }
        let pre = ScaledValue::from_f64(0.5 * x).powi(n as i32) / ScaledValue::factorial(n as u64);
        return (pre * sum).to_f64();
    }
    let m = miller_start(n, x);
    let mut next = 0.0;
    let mut cur = 1e-30;
    let mut sum = 0.0;
    let mut captured = 0.0;
    let mut shifts = 0i32;
    let mut shifts_at_capture = 0i32;
    for j in (1..=m).rev() {
        if j == n as usize {
            captured = cur;
            shifts_at_capture = shifts;
        }
        if j % 2 == 0 {
            sum += 2.0 * cur;
        }
        let prev = (2.0 * j as f64 / x) * cur - next;
        next = cur;
        cur = prev;
        if cur.abs() > RESCALE {
            cur /= RESCALE;
            next /= RESCALE;
            sum /= RESCALE;
            shifts += 1;
        }
    }
    sum += cur;
    if n == 0 {
        captured = cur;
        shifts_at_capture = shifts;
    }
    let ratio = captured / sum;
    let lost = shifts - shifts_at_capture;
    if lost == 0 {
        ratio
    } else {
        ratio * RESCALE.powi(-lost)
    }
}

/// `J_n(x)` for any integer order, using `J_{-n} = (-1)^n J_n`.
pub fn bessel_j_signed(n: i32, x: f64) -> f64 {
    let v = bessel_j(n.unsigned_abs(), x);
    if n < 0 && n % 2 != 0 {
        -v
    } else {
        v
    }
}

/// `∫₀^{s_max} J_n(s) ds` by adaptive quadrature.
pub fn integral_bessel_j(n: u32, s_max: f64) -> Result<f64> {
    if !(s_max >= 0.0) {
        return Err(Error::Domain(format!("integration limit must be >= 0, got {s_max}")));
    }
    let opts = QuadOptions {
        abs_tol: 1e-13,
        rel_tol: 1e-13,
        max_intervals: 20_000,
    };
    Ok(integrate(|s| bessel_j(n, s), 0.0, s_max, opts)?.value)
}

/// Modified Bessel function `K_ν(z)` of half-integer order `ν = ±1/2, ±3/2, …`.
///
/// Seeds with `K_{1/2}(z) = √(π/2z) e^{-z}` and recurs upward with
/// `K_{ν+1} = K_{ν-1} + (2ν/z) K_ν`.
pub fn bessel_k_half(order: f64, z: f64) -> Result<f64> {
    let twice = 2.0 * order.abs();
    if twice.fract() != 0.0 || (twice as i64) % 2 != 1 {
        return Err(Error::Domain(format!("order must be a half-integer, got {order}")));
    }
    if !(z > 0.0) {
        return Err(Error::Domain(format!("K needs z > 0, got {z}")));
    }
    let steps = (twice as usize - 1) / 2;
    let seed = (PI / (2.0 * z)).sqrt() * (-z).exp();
    // K_{-1/2} = K_{1/2}
    let (mut prev, mut cur) = (seed, seed);
    let mut nu = 0.5;
    for _ in 0..steps {
        let next = prev + (2.0 * nu / z) * cur;
        prev = cur;
        cur = next;
        nu += 1.0;
    }
    Ok(cur)
}
