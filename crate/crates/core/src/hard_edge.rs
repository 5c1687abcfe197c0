//! Hard-edge (microscopic) limits at `u = 4Nt`, `N → ∞`.
//!
//! The limiting gap probability is
//! `ℰ(u) = C e^{-√u/2 - u/8} u^{-k(k-1)/2} Pf[κ_ab(u)]` (bordered for odd k).
//! Dividing row and column `a` of `κ` by `u^a` absorbs the power of `u`
//! and leaves a kernel `κ̃_ab = κ_ab / u^{a+b}` that is finite at `u = 0`,
//! so `C` is fixed by `Pf[κ̃(0)]` and the whole expression is well
//! conditioned near the edge.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::finite_n::ridders;
use crate::pfaffian::{pfaffian, SkewKernelMatrix};
use crate::quad::{integrate, integrate_to_infinity, QuadOptions};
use crate::scaled::ScaledValue;
use crate::specfun::{
    bessel_i, bessel_i_over_power, bessel_j_signed, bessel_k_half, integral_bessel_j, ln_gamma,
    tricomi_u, TricomiArgs,
};

/// A point on the microscopic scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MicroscopicPoint {
    pub u: f64,
    pub nu: usize,
}

fn kernel_opts() -> QuadOptions {
    QuadOptions::new(1e-14, 1e-13)
}

fn check_u(u: f64) -> Result<()> {
    if u >= 0.0 && u.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("u must be finite and >= 0, got {u}")))
    }
}

fn check_even(nu: usize) -> Result<()> {
    if nu % 2 == 1 {
        return Err(Error::Unsupported(format!(
            "limiting distributions need even nu, got {nu}"
        )));
    }
    Ok(())
}

fn envelope(u: f64) -> f64 {
    (-0.5 * u.sqrt() - u / 8.0).exp()
}

/// `κ_ab(u) = (2/u) ∫₀^{√u} s^{a+b+1} [2(b-a) I_a I_b + (2b+1) I_{a+1} I_b - (2a+1) I_{b+1} I_a](s) ds`.
pub fn limit_kernel(a: usize, b: usize, u: f64) -> Result<f64> {
    check_u(u)?;
    if u == 0.0 || a == b {
        return Ok(0.0);
    }
    let (af, bf) = (a as f64, b as f64);
    let i = |n: usize, s: f64| bessel_i(n as u32, s).to_f64();
    let integrand = |s: f64| {
        let (ia, ib) = (i(a, s), i(b, s));
        let bracket = 2.0 * (bf - af) * ia * ib + (2.0 * bf + 1.0) * i(a + 1, s) * ib
            - (2.0 * af + 1.0) * i(b + 1, s) * ia;
        s.powi((a + b + 1) as i32) * bracket
    };
    Ok(2.0 / u * integrate(integrand, 0.0, u.sqrt(), kernel_opts())?.value)
}

/// `κ_ab(u) / u^{a+b}`, finite at `u = 0`.
pub fn limit_kernel_reduced(a: usize, b: usize, u: f64) -> Result<f64> {
    check_u(u)?;
    if a == b {
        return Ok(0.0);
    }
    let (af, bf) = (a as f64, b as f64);
    if u == 0.0 {
        let fact = |n: usize| ScaledValue::factorial(n as u64).to_f64();
        return Ok(2.0 * (bf - af)
            / ((af + bf + 1.0) * 2f64.powi((a + b) as i32) * fact(a) * fact(b)));
    }
    let su = u.sqrt();
    let iota = |n: usize, x: f64| bessel_i_over_power(n as u32, x).to_f64();
    let p = (2 * (a + b)) as i32;
    let integrand = |v: f64| {
        let x = v * su;
        let (ia, ib) = (iota(a, x), iota(b, x));
        let first = 2.0 * (bf - af) * v.powi(p) * ia * ib;
        let second = su
            * v.powi(p + 1)
            * ((2.0 * bf + 1.0) * iota(a + 1, x) * ib - (2.0 * af + 1.0) * iota(b + 1, x) * ia);
        2.0 * v * (first + second)
    };
    Ok(integrate(integrand, 0.0, 1.0, kernel_opts())?.value)
}

/// Border entries `u^{-a} · u^{a/2} [I_{a+1}(√u) + I_a(√u)]`.
fn border_reduced(a: usize, u: f64) -> f64 {
    let su = u.sqrt();
    bessel_i_over_power(a as u32, su).to_f64() + su * bessel_i_over_power(a as u32 + 1, su).to_f64()
}

fn reduced_matrix(k: usize, u: f64) -> Result<SkewKernelMatrix> {
    let bordered = k % 2 == 1;
    let dim = if bordered { k + 1 } else { k };
    let mut m = SkewKernelMatrix::zeros(dim);
    for a in 0..k {
        for b in a + 1..k {
            m.set(a, b, ScaledValue::from_f64(limit_kernel_reduced(a, b, u)?));
        }
        if bordered {
            m.set(a, k, ScaledValue::from_f64(-border_reduced(a, u)));
        }
    }
    Ok(m)
}

const CACHED_K: usize = 32;

/// `Pf[κ̃(0)]`, computed once per k for k below `CACHED_K`.
fn pfaffian_at_origin(k: usize) -> Result<ScaledValue> {
    static CACHE: [OnceLock<ScaledValue>; CACHED_K] = [const { OnceLock::new() }; CACHED_K];
    let compute = || pfaffian(&reduced_matrix(k, 0.0)?);
    if k >= CACHED_K {
        return compute();
    }
    if let Some(v) = CACHE[k].get() {
        return Ok(*v);
    }
    let v = compute()?;
    Ok(*CACHE[k].get_or_init(|| v))
}

/// The reduced kernel matrix (bordered for odd k) used by [`limit_gap`].
pub fn limit_kernel_matrix(nu: usize, u: f64) -> Result<SkewKernelMatrix> {
    check_even(nu)?;
    check_u(u)?;
    reduced_matrix(nu / 2, u)
}

/// `ℰ_{(ν-1)/2}(u)`, normalised so that `ℰ(0) = 1`.
pub fn limit_gap(nu: usize, u: f64) -> Result<f64> {
    check_even(nu)?;
    check_u(u)?;
    let k = nu / 2;
    if k == 0 {
        return Ok(envelope(u));
    }
    let pf = pfaffian(&reduced_matrix(k, u)?)?;
    let pf0 = pfaffian_at_origin(k)?;
    Ok((pf / pf0 * envelope(u)).to_f64().clamp(0.0, 1.0))
}

/// `𝒫(u) = -dℰ/du`, differentiated in `s = √u` with Ridders' scheme.
pub fn limit_pdf(nu: usize, u: f64) -> Result<f64> {
    check_even(nu)?;
    if !(u > 0.0 && u.is_finite()) {
        return Err(Error::Domain(format!("limit_pdf needs u > 0, got {u}")));
    }
    let s = u.sqrt();
    let unclamped = |x: f64| -> Result<f64> {
        let k = nu / 2;
        let uu = x * x;
        if k == 0 {
            return Ok(envelope(uu));
        }
        let pf = pfaffian(&reduced_matrix(k, uu)?)?;
        Ok((pf / pfaffian_at_origin(k)?).to_f64() * envelope(uu))
    };
    let d = ridders(unclamped, s, 0.4 * s.min(1.0))?;
    Ok(-d / (2.0 * s))
}

fn closed_form_shape(nu: usize, u: f64) -> f64 {
    let su = u.sqrt();
    let base = (1.0 + 2.0 / su) * envelope(u);
    match nu {
        0 => base,
        _ => {
            let i2 = bessel_i(2, su).to_f64();
            let i3 = bessel_i(3, su).to_f64();
            base * (i2 + su / (2.0 + su) * i3)
        }
    }
}

/// Constant making the closed-form density integrate to one.
pub fn closed_form_pdf_constant(nu: usize) -> Result<f64> {
    static CACHE: [OnceLock<f64>; 2] = [OnceLock::new(), OnceLock::new()];
    if nu != 0 && nu != 2 {
        return Err(Error::Unsupported(format!(
            "closed-form limiting density exists for nu in {{0, 2}}, got {nu}"
        )));
    }
    let slot = &CACHE[nu / 2];
    if let Some(c) = slot.get() {
        return Ok(*c);
    }
    // ∫ f(u) du = ∫ 2s f(s²) ds
    let mass = integrate_to_infinity(
        |s: f64| 2.0 * s * closed_form_shape(nu, s * s),
        0.0,
        QuadOptions::new(1e-14, 1e-13),
    )?
    .value;
    Ok(*slot.get_or_init(|| 1.0 / mass))
}

/// Closed-form limiting density for ν ∈ {0, 2}:
/// `Ĉ (1 + 2/√u) e^{-√u/2-u/8}` and
/// `Ĉ (1 + 2/√u) e^{-√u/2-u/8} [I_2(√u) + √u/(2+√u) I_3(√u)]`.
pub fn limit_pdf_closed_form(nu: usize, u: f64) -> Result<f64> {
    let c = closed_form_pdf_constant(nu)?;
    if !(u > 0.0 && u.is_finite()) {
        return Err(Error::Domain(format!("limit_pdf needs u > 0, got {u}")));
    }
    Ok(c * closed_form_shape(nu, u))
}

/// Microscopic spectral density
/// `ρ_ν(u) = ¼ (J_ν² - J_{ν-1} J_{ν+1})(√u) + J_ν(√u) (1 - ∫₀^{√u} J_ν) / (4√u)`.
pub fn micro_density(nu: usize, u: f64) -> Result<f64> {
    if !(u > 0.0 && u.is_finite()) {
        return Err(Error::Domain(format!("micro_density needs u > 0, got {u}")));
    }
    let s = u.sqrt();
    let n = nu as i32;
    let jn = bessel_j_signed(n, s);
    let bulk = 0.25 * (jn * jn - bessel_j_signed(n - 1, s) * bessel_j_signed(n + 1, s));
    let tail = 1.0 - integral_bessel_j(nu as u32, s)?;
    Ok(bulk + jn * tail / (4.0 * s))
}

/// Both sides of the large-order Tricomi asymptotic
/// `U(aN+c, b, u/8N) ≈ 2 (8aN²/u)^{(b-1)/2} K_{b-1}(√(au/2)) / Γ(aN+c)`.
pub fn tricomi_limit_check(
    a_coeff: f64,
    c: f64,
    b: f64,
    u: f64,
    n: usize,
) -> Result<(ScaledValue, ScaledValue)> {
    if !(a_coeff > 0.0 && u > 0.0) {
        return Err(Error::Domain("need a > 0 and u > 0".into()));
    }
    let big_a = a_coeff * n as f64 + c;
    let nf = n as f64;
    let lhs = tricomi_u(TricomiArgs::new(big_a, b, u / (8.0 * nf))?)?;
    let k = bessel_k_half(b - 1.0, (a_coeff * u / 2.0).sqrt())?;
    let ln_pre = 2f64.ln() + (b - 1.0) / 2.0 * (nf * nf * 8.0 * a_coeff / u).ln() - ln_gamma(big_a);
    Ok((lhs, ScaledValue::from_ln(ln_pre, 1.0) * k))
}
