//! Skew-orthogonal polynomials for the weight `w(x;t) = e^{-x/2} / √(x+t)` on
//! `[0, ∞)` and their norms.
//!
//! The even polynomials are
//! `R^a_{2j}(y) = (2j)!/(2j-a)! · [α_j L^{(a+1)}_{2j-a}(y) - β_j L^{(a)}_{2j-a}(y)]`
//! with monic Laguerre polynomials, `α_j = U_j / D_j`, `β_j = U'_j / D_j`,
//! `U_j = U((2j+1)/2, 1/2, z)`, `D_j = U((2j+1)/2, 3/2, z)`, `z = t/2` and the
//! prime a z-derivative. Since `U - U' = D`, `α_j - β_j = 1` and the
//! polynomials are monic.
//!
//! The odd polynomials come from differentiating the weight with respect to
//! its scale, `R_{2j+1} = (y + 4j) R_{2j} - 2y ∂_y R_{2j} - 2t ∂_t R_{2j}`,
//! which for the a-th derivative reads
//! `R^a_{2j+1} = (y+4j-2a) R^a_{2j} + a R^{a-1}_{2j} - 2y R^{a+1}_{2j}
//!  + κ_j (2j)!/(2j-a-1)! L^{(a+1)}_{2j-a-1}(y)`,
//! with `κ_j = t dα_j/dz = t (γ_j α_j - β_j²)` and `γ_j = U''_j / D_j`.
//!
//! Norms: `⟨R_{2j}, R_{2j+1}⟩_t = r_j(t) = 2 (2j)! (2j+1)! r̃_j(t)` with
//! `r̃_j = D_{j+1} / D_j`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{integrate, integrate_to_infinity, QuadOptions};
use crate::scaled::ScaledValue;
use crate::specfun::{tricomi_u, LaguerreTable, TricomiArgs};

/// Weight parameters. Only `t` varies; the scale `eta` is fixed to 1 and the
/// odd-polynomial shift `c` to 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightParams {
    pub t: f64,
    pub eta: f64,
    pub c: f64,
}

impl WeightParams {
    pub fn new(t: f64) -> Result<Self> {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Error::Domain(format!("t must be finite and >= 0, got {t}")));
        }
        Ok(WeightParams { t, eta: 1.0, c: 0.0 })
    }

    pub fn weight(&self, x: f64) -> f64 {
        (-0.5 * self.eta * x).exp() / (x + self.t).sqrt()
    }
}

/// Everything known about one polynomial pair at one point.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SkewBasisEval {
    pub j: usize,
    pub a: usize,
    pub y: f64,
    pub value_even: ScaledValue,
    pub value_odd: ScaledValue,
    pub norm: ScaledValue,
    /// `U_j(t)` and its first two t-derivatives.
    pub u_j: ScaledValue,
    pub u_j_prime: ScaledValue,
    pub u_j_dblprime: ScaledValue,
}

#[derive(Debug, Clone, Copy)]
struct PairCoefficients {
    alpha: f64,
    beta: f64,
    curvature: f64,
    r_tilde: f64,
    u: ScaledValue,
    u_prime_z: ScaledValue,
    u_dblprime_z: ScaledValue,
}

/// Tricomi data for `j = 0..=j_max` at a fixed `t`. Immutable once built and
/// safe to share between threads.
#[derive(Debug, Clone)]
pub struct SkewBasis {
    t: f64,
    pairs: Vec<PairCoefficients>,
}

fn half_order(j: usize) -> f64 {
    j as f64 + 0.5
}

impl SkewBasis {
    /// Precomputes the coefficients for all pairs up to `j_max`. At `t = 0`
    /// the exact small-z limits are used.
    pub fn new(t: f64, j_max: usize) -> Result<Self> {
        WeightParams::new(t)?;
        if t == 0.0 {
            let pairs = (0..=j_max)
                .map(|j| PairCoefficients {
                    alpha: 0.0,
                    beta: -1.0,
                    curvature: 0.0,
                    r_tilde: 1.0 / half_order(j),
                    u: ScaledValue::ZERO,
                    u_prime_z: ScaledValue::ZERO,
                    u_dblprime_z: ScaledValue::ZERO,
                })
                .collect();
            return Ok(SkewBasis { t, pairs });
        }
        let z = 0.5 * t;
        let d: Vec<ScaledValue> = (0..=j_max + 1)
            .map(|j| tricomi_u(TricomiArgs::new(half_order(j), 1.5, z)?))
            .collect::<Result<_>>()?;
        let mut pairs = Vec::with_capacity(j_max + 1);
        for j in 0..=j_max {
            let a = half_order(j);
            let u = tricomi_u(TricomiArgs::new(a, 0.5, z)?)?;
            let u_prime_z = -(d[j + 1] * a);
            let u_dblprime_z = tricomi_u(TricomiArgs::new(a + 2.0, 2.5, z)?)? * (a * (a + 1.0));
            let alpha = (u / d[j]).to_f64();
            let beta = (u_prime_z / d[j]).to_f64();
            let gamma = (u_dblprime_z / d[j]).to_f64();
            pairs.push(PairCoefficients {
                alpha,
                beta,
                curvature: t * (gamma * alpha - beta * beta),
                r_tilde: (d[j + 1] / d[j]).to_f64(),
                u,
                u_prime_z,
                u_dblprime_z,
            });
        }
        Ok(SkewBasis { t, pairs })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn j_max(&self) -> usize {
        self.pairs.len() - 1
    }

    fn pair(&self, j: usize) -> &PairCoefficients {
        assert!(j < self.pairs.len(), "pair index {j} beyond precomputed range");
        &self.pairs[j]
    }

    /// `R^a_{2j}` with Laguerre values read from `lag` (which fixes `y`).
    pub fn even_from_table(&self, j: usize, a: usize, lag: &LaguerreTable) -> ScaledValue {
        if a > 2 * j {
            return ScaledValue::ZERO;
        }
        let p = self.pair(j);
        let n = (2 * j - a) as i64;
        if n == 0 {
            // α - β = 1 exactly
            return ScaledValue::factorial(2 * j as u64);
        }
        let bracket = lag.get(n, a as u32 + 1) * p.alpha - lag.get(n, a as u32) * p.beta;
        ScaledValue::falling_factorial(2 * j as u64, a as u64) * bracket
    }

    /// `R^a_{2j+1}` with Laguerre values read from `lag`.
    pub fn odd_from_table(&self, j: usize, a: usize, lag: &LaguerreTable) -> ScaledValue {
        if a > 2 * j + 1 {
            return ScaledValue::ZERO;
        }
        let y = lag.y();
        let p = self.pair(j);
        let mut total = self.even_from_table(j, a, lag) * (y + 4.0 * j as f64 - 2.0 * a as f64)
            - self.even_from_table(j, a + 1, lag) * (2.0 * y);
        if a > 0 {
            total = total + self.even_from_table(j, a - 1, lag) * a as f64;
        }
        if a < 2 * j && p.curvature != 0.0 {
            let n = (2 * j - a - 1) as i64;
            let fall = ScaledValue::falling_factorial(2 * j as u64, a as u64 + 1);
            total = total + fall * lag.get(n, a as u32 + 1) * p.curvature;
        }
        total
    }

    fn table_for(&self, j: usize, a: usize, y: f64) -> LaguerreTable {
        LaguerreTable::new(y, a as u32 + 2, 2 * j + 1)
    }

    pub fn even(&self, j: usize, a: usize, y: f64) -> ScaledValue {
        self.even_from_table(j, a, &self.table_for(j, a, y))
    }

    pub fn odd(&self, j: usize, a: usize, y: f64) -> ScaledValue {
        self.odd_from_table(j, a, &self.table_for(j, a, y))
    }

    /// `r_j(t) = ⟨R_{2j}, R_{2j+1}⟩_t`.
    pub fn norm(&self, j: usize) -> ScaledValue {
        let fact = ScaledValue::factorial(2 * j as u64);
        fact * fact * ((2 * j + 1) as f64 * 2.0 * self.pair(j).r_tilde)
    }

    /// `r_j(t) / (2 (2j)! (2j+1)!)`.
    pub fn r_tilde(&self, j: usize) -> f64 {
        self.pair(j).r_tilde
    }

    /// Full record for one `(j, a, y)`. The Tricomi fields hold t-derivatives
    /// and are left at zero on the `t = 0` branch, where U is not evaluated.
    pub fn eval(&self, j: usize, a: usize, y: f64) -> SkewBasisEval {
        let lag = self.table_for(j, a, y);
        let p = self.pair(j);
        SkewBasisEval {
            j,
            a,
            y,
            value_even: self.even_from_table(j, a, &lag),
            value_odd: self.odd_from_table(j, a, &lag),
            norm: self.norm(j),
            u_j: p.u,
            u_j_prime: p.u_prime_z * 0.5,
            u_j_dblprime: p.u_dblprime_z * 0.25,
        }
    }
}

fn positive_t(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("t must be > 0, got {t}")))
    }
}

/// `R^a_{2j}(y, t)`.
pub fn even_poly_deriv(j: usize, a: usize, y: f64, t: f64) -> Result<ScaledValue> {
    positive_t(t)?;
    Ok(SkewBasis::new(t, j)?.even(j, a, y))
}

/// `R^a_{2j+1}(y, t)`.
pub fn odd_poly_deriv(j: usize, a: usize, y: f64, t: f64) -> Result<ScaledValue> {
    positive_t(t)?;
    Ok(SkewBasis::new(t, j)?.odd(j, a, y))
}

/// `r_j(t)`.
pub fn r_norm(j: usize, t: f64) -> Result<ScaledValue> {
    positive_t(t)?;
    Ok(SkewBasis::new(t, j)?.norm(j))
}

/// `r_j(t) / (2 (2j)! (2j+1)!)`.
pub fn r_tilde(j: usize, t: f64) -> Result<f64> {
    positive_t(t)?;
    Ok(SkewBasis::new(t, j)?.r_tilde(j))
}

/// `⟨f, g⟩_t = ∫∫_{0 ≤ x ≤ y} w(x) w(y) [f(x) g(y) - g(x) f(y)] dx dy` by
/// nested adaptive quadrature.
pub fn skew_product_oracle<F, G>(f: F, g: G, t: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
    G: Fn(f64) -> f64,
{
    positive_t(t)?;
    let w = WeightParams::new(t)?;
    let inner_opts = QuadOptions::new(1e-14, 1e-13);
    let failed = std::cell::Cell::new(None);
    let outer = |y: f64| {
        let inner = |h: &dyn Fn(f64) -> f64| integrate(|x| w.weight(x) * h(x), 0.0, y, inner_opts);
        match (inner(&f), inner(&g)) {
            (Ok(fi), Ok(gi)) => w.weight(y) * (g(y) * fi.value - f(y) * gi.value),
            (Err(e), _) | (_, Err(e)) => {
                failed.set(Some(e));
                0.0
            }
        }
    };
    let result = integrate_to_infinity(outer, 0.0, QuadOptions::new(1e-12, 1e-11))?;
    match failed.into_inner() {
        Some(e) => Err(e),
        None => Ok(result.value),
    }
}
