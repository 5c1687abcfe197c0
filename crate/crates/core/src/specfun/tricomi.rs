use serde::{Deserialize, Serialize};

use super::gamma::ln_gamma;
use crate::error::{Error, Result};
use crate::quad::{integrate, QuadOptions};
use crate::scaled::ScaledValue;

/// Arguments of the Tricomi function `U(a, b, z)`.
///
/// `b` must be a positive half-integer up to 9/2: the polynomial formulas
/// only need 1/2, 3/2 and 5/2, and the derivative helpers shift `b` by up
/// to two.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TricomiArgs {
    pub a: f64,
    pub b: f64,
    pub z: f64,
}

impl TricomiArgs {
    pub fn new(a: f64, b: f64, z: f64) -> Result<Self> {
        let args = TricomiArgs { a, b, z };
        args.validate()?;
        Ok(args)
    }

    /// Arguments for `U(a, b, t/2)`, the form used throughout the finite-N formulas.
    pub fn at_t(a: f64, b: f64, t: f64) -> Result<Self> {
        Self::new(a, b, 0.5 * t)
    }

    fn validate(&self) -> Result<()> {
        if !(self.a > 0.0 && self.a.is_finite()) {
            return Err(Error::Domain(format!("Tricomi U needs a > 0, got {}", self.a)));
        }
        if !(self.z > 0.0 && self.z.is_finite()) {
            return Err(Error::Domain(format!("Tricomi U needs z > 0, got {}", self.z)));
        }
        let twice = 2.0 * self.b;
        let supported = twice.fract() == 0.0 && (twice as i64) % 2 == 1 && (1.0..=9.0).contains(&twice);
        if !supported {
            return Err(Error::Domain(format!(
                "Tricomi U supports b in {{1/2, 3/2, ..., 9/2}}, got {}",
                self.b
            )));
        }
        Ok(())
    }
}

fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `U(a, b, z)` from `Γ(a) U = ∫₀^∞ e^{-zs} s^{a-1} (1+s)^{b-a-1} ds`.
///
/// With `s = e^x` the log-integrand `φ` is smooth with a single dominant
/// peak, so the integral of `exp(φ - φ_max)` is an O(1) number and the
/// scale lives entirely in `φ_max - ln Γ(a)`.
pub fn tricomi_u(args: TricomiArgs) -> Result<ScaledValue> {
    args.validate()?;
    let TricomiArgs { a, b, z } = args;
    let c = b - a - 1.0;
    let phi = |x: f64| -z * x.exp() + a * x + c * softplus(x);
    let dphi = |x: f64| -z * x.exp() + a + c * logistic(x);

    // Bracket a root of φ' and bisect.
    let mut hi = ((a + c.abs() + 1.0) / z).ln() + 1.0;
    while dphi(hi) >= 0.0 {
        hi += 2.0;
    }
    let mut lo = hi.min(0.0) - 1.0;
    while dphi(lo) <= 0.0 {
        lo -= 2.0 * (hi - lo);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if dphi(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let peak = 0.5 * (lo + hi);
    let phi_max = phi(peak);

    // exp(-50) is below double precision relative to the peak contribution.
    const DROP: f64 = 50.0;
    let reach = |dir: f64| {
        let mut step = 1.0;
        let mut x = peak + dir * step;
        while phi(x) > phi_max - DROP {
            step *= 2.0;
            x = peak + dir * step;
        }
        x
    };
    let left = reach(-1.0);
    let right = reach(1.0);
    let opts = QuadOptions {
        abs_tol: 0.0,
        rel_tol: 1e-13,
        max_intervals: 4000,
    };
    let integral = integrate(|x| (phi(x) - phi_max).exp(), left, right, opts)?;
    Ok(ScaledValue::from_ln(phi_max - ln_gamma(a), 1.0) * integral.value)
}

/// `d^n/dt^n U(a, b, t/2)` for `n ∈ {1, 2}`, where `args.z = t/2`.
///
/// Uses `dU/dz = -a U(a+1, b+1, z)` together with the chain-rule factor 1/2
/// per derivative.
pub fn tricomi_u_deriv(args: TricomiArgs, order: u32) -> Result<ScaledValue> {
    if !(1..=2).contains(&order) {
        return Err(Error::Domain(format!("derivative order must be 1 or 2, got {order}")));
    }
    args.validate()?;
    let n = order as f64;
    let pochhammer: f64 = (0..order).map(|i| args.a + i as f64).product();
    let sign = if order % 2 == 1 { -1.0 } else { 1.0 };
    let shifted = TricomiArgs::new(args.a + n, args.b + n, args.z)?;
    Ok(tricomi_u(shifted)? * (sign * pochhammer * 0.5f64.powi(order as i32)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn u(a: f64, b: f64, z: f64) -> f64 {
        tricomi_u(TricomiArgs::new(a, b, z).unwrap()).unwrap().to_f64()
    }

    #[test]
    fn power_identity() {
        for &a in &[0.5, 1.5, 2.5] {
            for &z in &[1e-4, 0.01, 0.3, 1.0, 7.0, 100.0, 1e3] {
                let v = u(a, a + 1.0, z) * z.powf(a);
                assert!((v - 1.0).abs() < 1e-12, "a={a} z={z} got {v}");
            }
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(TricomiArgs::new(0.0, 0.5, 1.0).is_err());
        assert!(TricomiArgs::new(1.0, 0.5, 0.0).is_err());
        assert!(TricomiArgs::new(1.0, 1.0, 1.0).is_err());
        assert!(TricomiArgs::new(1.0, 5.5, 1.0).is_err());
    }

    #[test]
    fn large_z_leading_behaviour() {
        let v = u(3.0, 0.5, 1e4) * 1e12;
        // U ≈ z^{-a} Σ_k (a)_k (a-b+1)_k / (k! (-z)^k)
        let want = 1.0 - 3.0 * 3.5 / 1e4 + 3.0 * 4.0 * 3.5 * 4.5 / 2e8
            - 3.0 * 4.0 * 5.0 * 3.5 * 4.5 * 5.5 / 6e12;
        assert!((v - want).abs() < 1e-12);
    }

    #[test]
    fn small_z_leading_behaviour() {
        // U(a, 3/2, z) ≈ Γ(1/2)/Γ(a) z^{-1/2} + Γ(-1/2)/Γ(a-1/2)
        let a = 40.5;
        let z = 1e-8f64;
        let lead = (ln_gamma(0.5) - ln_gamma(a)).exp() / z.sqrt();
        let next = -2.0 * (ln_gamma(0.5) - ln_gamma(a - 0.5)).exp();
        assert!((u(a, 1.5, z) / (lead + next) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn large_order_stays_finite() {
        let v = tricomi_u(TricomiArgs::new(500.5, 1.5, 1e-8).unwrap()).unwrap();
        assert!(v.is_finite() && v.signum() > 0.0);
        let w = tricomi_u(TricomiArgs::new(500.5, 0.5, 1e4).unwrap()).unwrap();
        assert!(w.signum() > 0.0);
        // (1+s)^{b-a-1} <= 1 bounds U by z^{-a}
        assert!(w.ln_abs() < -500.5 * 1e4f64.ln());
    }

    #[test]
    fn kummer_equation() {
        for &(a, b) in &[(0.5, 0.5), (1.5, 0.5), (2.5, 1.5), (7.5, 1.5)] {
            for &z in &[0.05, 0.5, 2.0, 11.0] {
                let u0 = u(a, b, z);
                let u1 = -a * u(a + 1.0, b + 1.0, z);
                let u2 = a * (a + 1.0) * u(a + 2.0, b + 2.0, z);
                let lhs = z * u2 + (b - z) * u1 - a * u0;
                let scale = (z * u2).abs() + ((b - z) * u1).abs() + (a * u0).abs();
                assert!(lhs.abs() < 1e-8 * scale, "a={a} b={b} z={z}");
            }
        }
    }

    #[test]
    fn t_derivative_is_half_the_z_derivative() {
        let args = TricomiArgs::at_t(0.5, 0.5, 2.0).unwrap();
        let d1 = tricomi_u_deriv(args, 1).unwrap().to_f64();
        assert!((d1 + 0.25 * u(1.5, 1.5, 1.0)).abs() < 1e-15);
        assert!(d1 < 0.0);
        let d2 = tricomi_u_deriv(args, 2).unwrap().to_f64();
        assert!((d2 - 0.75 / 4.0 * u(2.5, 2.5, 1.0)).abs() < 1e-14);
        assert!(tricomi_u_deriv(args, 3).is_err());
    }
}
