//! Exact finite-N gap probability `E(t)` and smallest-eigenvalue density
//! `P(t) = -dE/dt` for real Wishart matrices `W` of size `N × (N+ν)`, even ν.
//!
//! Three evaluation paths:
//! * ν = 0: `E = Γ((N+1)/2)/√(2π) · √t e^{-Nt/2} U((N+1)/2, 3/2, t/2)`.
//! * ν = 2: `E = C₂ √t e^{-Nt/2} [U(A,1/2,t/2) L^{(1)}_N(-t) - U'(A,1/2,t/2) L^{(0)}_N(-t)]`
//!   with `A = (N+1)/2` and the prime a derivative in the third argument.
//! * general (even N): `E = C √t e^{-Nt/2} U((N+2m+1)/2, 3/2, t/2) Pf[M(t)]`,
//!   where `M` is the k×k skew kernel (bordered to k+1 for odd k).
//!
//! Every constant is fixed by `E(0) = 1` through the small-t limit
//! `√t U(A, 3/2, t/2) → √(2π)/Γ(A)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pfaffian::{pfaffian, SkewKernelMatrix};
use crate::scaled::ScaledValue;
use crate::skewpoly::SkewBasis;
use crate::specfun::{ln_gamma, tricomi_u, LaguerreTable, TricomiArgs};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Ensemble indices: `W` is `n × (n + nu)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpectralParams {
    pub n: usize,
    pub nu: usize,
}

impl SpectralParams {
    pub fn new(n: usize, nu: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("N must be >= 1".into()));
        }
        Ok(SpectralParams { n, nu })
    }

    /// `k = ν/2`.
    pub fn k(&self) -> usize {
        self.nu / 2
    }

    /// `m = ⌈k/2⌉`.
    pub fn m(&self) -> usize {
        self.k().div_ceil(2)
    }

    /// `γ = (ν-1)/2`.
    pub fn gamma(&self) -> f64 {
        (self.nu as f64 - 1.0) / 2.0
    }

    /// Index of the last polynomial pair in the kernel sum, `N/2 + m - 1`.
    /// Only meaningful on the Pfaffian path (even N, ν ≥ 2).
    pub fn last_pair(&self) -> usize {
        self.n / 2 + self.m() - 1
    }

    fn require_even_nu(&self) -> Result<()> {
        if self.nu % 2 == 1 {
            return Err(Error::Unsupported(format!(
                "analytic results need even nu, got {} (odd nu is Monte Carlo only)",
                self.nu
            )));
        }
        Ok(())
    }

    fn require_pfaffian_path(&self) -> Result<()> {
        self.require_even_nu()?;
        if self.n % 2 == 1 {
            return Err(Error::Unsupported(format!(
                "the Pfaffian path needs even N, got N = {} with nu = {}",
                self.n, self.nu
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveKind {
    Gap,
    Pdf,
    Density,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scaling {
    /// Abscissa is the eigenvalue `t` itself.
    FiniteT,
    /// Abscissa is the microscopic variable `u = 4Nt`.
    MicroscopicU,
}

/// A sampled curve with its provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionCurve {
    pub abscissae: Vec<f64>,
    pub values: Vec<f64>,
    /// Pointwise standard errors for empirical curves.
    pub stderr: Option<Vec<f64>>,
    pub kind: CurveKind,
    /// Constant multiplying the unnormalised expression.
    pub normalization: ScaledValue,
    pub params: Option<SpectralParams>,
    pub scaling: Scaling,
}

/// Which route `E(t)` takes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GapMethod {
    /// Closed forms for ν ∈ {0, 2}, Pfaffian otherwise.
    Auto,
    /// Always the Pfaffian path (needs even N).
    Pfaffian,
}

/// Skew kernel with the j-sum running up to `last_pair` (inclusive).
fn kernel_with_terms(p: &SpectralParams, t: f64, last_pair: usize) -> Result<SkewKernelMatrix> {
    let k = p.k();
    let basis = SkewBasis::new(t, last_pair)?;
    let lag = LaguerreTable::new(-t, k as u32 + 2, 2 * last_pair + 1);
    let mut even = vec![vec![ScaledValue::ZERO; k.max(1)]; last_pair + 1];
    let mut odd = even.clone();
    let mut inv_norm = vec![ScaledValue::ZERO; last_pair + 1];
    for j in 0..=last_pair {
        inv_norm[j] = basis.norm(j).recip();
        for a in 0..k {
            even[j][a] = basis.even_from_table(j, a, &lag);
            odd[j][a] = basis.odd_from_table(j, a, &lag);
        }
    }
    let bordered = k % 2 == 1;
    let dim = if bordered { k + 1 } else { k };
    Ok(SkewKernelMatrix::from_fn(dim, |a, b| {
        if b == k {
            // border column: -R^a_{2J} / r_J
            -(basis.even_from_table(last_pair, a, &lag) * inv_norm[last_pair])
        } else {
            (0..=last_pair)
                .map(|j| (odd[j][a] * even[j][b] - odd[j][b] * even[j][a]) * inv_norm[j])
                .sum()
        }
    }))
}

/// The skew kernel matrix of the Pfaffian path at `t > 0`.
pub fn kernel_matrix(p: &SpectralParams, t: f64) -> Result<SkewKernelMatrix> {
    p.require_pfaffian_path()?;
    if !(t > 0.0) {
        return Err(Error::Domain(format!("kernel needs t > 0, got {t}")));
    }
    kernel_with_terms(p, t, p.last_pair())
}

/// Precomputed normalisation for one `(N, ν)`; cheap to clone and share.
#[derive(Debug, Clone)]
pub struct FiniteN {
    params: SpectralParams,
    method: GapMethod,
    last_pair: usize,
    constant: ScaledValue,
}

impl FiniteN {
    pub fn new(params: SpectralParams) -> Result<Self> {
        Self::with_method(params, GapMethod::Auto)
    }

    pub fn with_method(params: SpectralParams, method: GapMethod) -> Result<Self> {
        params.require_even_nu()?;
        let method = match (method, params.nu) {
            (GapMethod::Auto, 0 | 2) => GapMethod::Auto,
            _ => {
                params.require_pfaffian_path()?;
                GapMethod::Pfaffian
            }
        };
        let last_pair = if method == GapMethod::Pfaffian { params.last_pair() } else { 0 };
        let mut model = FiniteN {
            params,
            method,
            last_pair,
            constant: ScaledValue::ONE,
        };
        model.constant = model.compute_constant()?;
        Ok(model)
    }

    pub fn params(&self) -> SpectralParams {
        self.params
    }

    pub fn method(&self) -> GapMethod {
        self.method
    }

    fn tricomi_order(&self) -> f64 {
        (self.params.n + 2 * self.params.m()) as f64 / 2.0 + 0.5
    }

    fn compute_constant(&self) -> Result<ScaledValue> {
        let n = self.params.n;
        match (self.method, self.params.nu) {
            (GapMethod::Auto, 0) => {
                Ok(ScaledValue::from_ln(ln_gamma((n as f64 + 1.0) / 2.0) - LN_SQRT_2PI, 1.0))
            }
            (GapMethod::Auto, _) => {
                let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                Ok(ScaledValue::from_ln(ln_gamma((n as f64 + 1.0) / 2.0) - LN_SQRT_2PI, sign)
                    / ScaledValue::factorial(n as u64))
            }
            (GapMethod::Pfaffian, _) => {
                let pf0 = pfaffian(&kernel_with_terms(&self.params, 0.0, self.last_pair)?)?;
                if pf0.is_zero() {
                    return Err(Error::Domain("kernel Pfaffian vanishes at t = 0".into()));
                }
                Ok(ScaledValue::from_ln(ln_gamma(self.tricomi_order()) - LN_SQRT_2PI, 1.0) / pf0)
            }
        }
    }

    /// The constant fixed by `E(0) = 1`.
    pub fn normalization_constant(&self) -> ScaledValue {
        self.constant
    }

    /// `E(t)` as a scaled value; may be slightly outside `[0, 1]` by rounding.
    pub fn gap_scaled(&self, t: f64) -> Result<ScaledValue> {
        if !(t >= 0.0) || t.is_nan() {
            return Err(Error::Domain(format!("t must be >= 0, got {t}")));
        }
        if t == 0.0 {
            return Ok(ScaledValue::ONE);
        }
        if t.is_infinite() {
            return Ok(ScaledValue::ZERO);
        }
        let n = self.params.n as f64;
        let z = 0.5 * t;
        let envelope = ScaledValue::from_ln(0.5 * t.ln() - 0.5 * n * t, 1.0) * self.constant;
        match (self.method, self.params.nu) {
            (GapMethod::Auto, 0) => {
                Ok(envelope * tricomi_u(TricomiArgs::new((n + 1.0) / 2.0, 1.5, z)?)?)
            }
            (GapMethod::Auto, _) => {
                let a = (n + 1.0) / 2.0;
                let u = tricomi_u(TricomiArgs::new(a, 0.5, z)?)?;
                let du = -(tricomi_u(TricomiArgs::new(a + 1.0, 1.5, z)?)? * a);
                let lag = LaguerreTable::new(-t, 1, self.params.n);
                let bracket = u * lag.get(self.params.n as i64, 1) - du * lag.get(self.params.n as i64, 0);
                Ok(envelope * bracket)
            }
            (GapMethod::Pfaffian, _) => {
                let u = tricomi_u(TricomiArgs::new(self.tricomi_order(), 1.5, z)?)?;
                let pf = pfaffian(&kernel_with_terms(&self.params, t, self.last_pair)?)?;
                Ok(envelope * u * pf)
            }
        }
    }

    /// `E(t)`, clamped to `[0, 1]` to absorb rounding at the ends.
    pub fn gap(&self, t: f64) -> Result<f64> {
        Ok(self.gap_scaled(t)?.to_f64().clamp(0.0, 1.0))
    }

    /// `P(t) = -dE/dt`.
    ///
    /// `E` is smooth in `s = √t`, so the derivative is taken in `s` by
    /// Ridders' extrapolated central differences and converted with
    /// `dE/dt = (dE/ds) / (2s)`. For `t < 1e-24` a one-sided first-order
    /// stencil is used instead, which is only accurate to O(√t).
    pub fn pdf(&self, t: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Err(Error::Domain(format!("pdf needs t > 0, got {t}")));
        }
        let s = t.sqrt();
        let e_of_s = |x: f64| self.gap_scaled(x * x).map(|v| v.to_f64());
        if t < 1e-24 {
            let e = e_of_s(s)?;
            return Ok((1.0 - e) / (2.0 * s * s));
        }
        // E varies on the scale 1/√N in s, so the first step must not exceed it
        let h0 = 0.4 * s.min(1.0 / (self.params.n as f64).sqrt());
        let d = ridders(e_of_s, s, h0)?;
        Ok(-d / (2.0 * s))
    }

    /// Abscissa where `E` first drops below `level`, to within a few percent.
    pub fn tail_point(&self, level: f64) -> Result<f64> {
        let mut hi = 1.0 / self.params.n as f64;
        while self.gap(hi)? >= level {
            hi *= 2.0;
            if hi > 1e4 {
                return Ok(hi);
            }
        }
        let mut lo = hi / 2.0;
        for _ in 0..8 {
            let mid = 0.5 * (lo + hi);
            if self.gap(mid)? >= level {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(hi)
    }

    pub fn gap_curve(&self, grid: &[f64]) -> Result<DistributionCurve> {
        let values = grid.par_iter().map(|&t| self.gap(t)).collect::<Result<Vec<_>>>()?;
        Ok(self.curve(grid, values, CurveKind::Gap))
    }

    pub fn pdf_curve(&self, grid: &[f64]) -> Result<DistributionCurve> {
        let values = grid.par_iter().map(|&t| self.pdf(t)).collect::<Result<Vec<_>>>()?;
        Ok(self.curve(grid, values, CurveKind::Pdf))
    }

    fn curve(&self, grid: &[f64], values: Vec<f64>, kind: CurveKind) -> DistributionCurve {
        DistributionCurve {
            abscissae: grid.to_vec(),
            values,
            stderr: None,
            kind,
            normalization: self.constant,
            params: Some(self.params),
            scaling: Scaling::FiniteT,
        }
    }
}

/// Ridders' polynomial extrapolation of central differences (step shrinks
/// by 1.4 per level). Returns the estimate with the smallest error.
pub(crate) fn ridders<F: Fn(f64) -> Result<f64>>(f: F, x: f64, h0: f64) -> Result<f64> {
    const LEVELS: usize = 10;
    const CON: f64 = 1.4;
    const CON2: f64 = CON * CON;
    let mut table = [[0.0f64; LEVELS]; LEVELS];
    let mut h = h0;
    table[0][0] = (f(x + h)? - f(x - h)?) / (2.0 * h);
    let mut best = table[0][0];
    let mut err = f64::INFINITY;
    for i in 1..LEVELS {
        h /= CON;
        table[0][i] = (f(x + h)? - f(x - h)?) / (2.0 * h);
        let mut fac = CON2;
        for j in 1..=i {
            table[j][i] = (table[j - 1][i] * fac - table[j - 1][i - 1]) / (fac - 1.0);
            fac *= CON2;
            let e = (table[j][i] - table[j - 1][i])
                .abs()
                .max((table[j][i] - table[j - 1][i - 1]).abs());
            if e <= err {
                err = e;
                best = table[j][i];
            }
        }
        if i >= 3 && (table[i][i] - table[i - 1][i - 1]).abs() >= 2.0 * err {
            break;
        }
    }
    Ok(best)
}

/// `E_{N,(ν-1)/2}(t)` with the default method.
pub fn gap_probability(p: &SpectralParams, t: f64) -> Result<f64> {
    FiniteN::new(*p)?.gap(t)
}

/// `E(t)` with an explicit choice of path.
pub fn gap_probability_with(p: &SpectralParams, t: f64, method: GapMethod) -> Result<f64> {
    FiniteN::with_method(*p, method)?.gap(t)
}

/// The constant `𝒞_{N,ν}` fixed by `E(0) = 1`.
pub fn normalization_constant(p: &SpectralParams) -> Result<ScaledValue> {
    Ok(FiniteN::new(*p)?.normalization_constant())
}

/// `P_{N,(ν-1)/2}(t) = -dE/dt`.
pub fn smallest_pdf(p: &SpectralParams, t: f64) -> Result<f64> {
    FiniteN::new(*p)?.pdf(t)
}

/// Default abscissae: log-spaced from `1e-4` then linear up to where
/// `E < 1e-8`.
pub fn default_grid(model: &FiniteN, points: usize) -> Result<Vec<f64>> {
    let end = model.tail_point(1e-8)?;
    Ok(log_then_linear(1e-4, end, points))
}

/// `points` abscissae on `[start, end]`: the first 40% log-spaced up to
/// `end / 20`, the rest linear.
pub fn log_then_linear(start: f64, end: f64, points: usize) -> Vec<f64> {
    assert!(end > start && start > 0.0, "grid needs 0 < start < end");
    if points < 2 {
        return vec![start; points];
    }
    let knee = end / 20.0;
    if knee <= start {
        return linspace(start, end, points);
    }
    let n_log = (points * 2 / 5).max(2);
    let n_lin = points - n_log;
    let (l0, l1) = (start.ln(), knee.ln());
    let mut grid: Vec<f64> = (0..n_log)
        .map(|i| (l0 + (l1 - l0) * i as f64 / n_log as f64).exp())
        .collect();
    grid[0] = start;
    grid.extend(linspace(knee, end, n_lin.max(1)));
    grid
}

pub fn linspace(start: f64, end: f64, points: usize) -> Vec<f64> {
    match points {
        0 => vec![],
        1 => vec![start],
        _ => (0..points)
            .map(|i| start + (end - start) * i as f64 / (points - 1) as f64)
            .collect(),
    }
}
