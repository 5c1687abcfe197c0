//! Pfaffians of small antisymmetric matrices with scaled entries.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scaled::ScaledValue;

/// Antisymmetric matrix. Only the strict upper triangle is stored, so
/// `m[b][a] = -m[a][b]` holds by construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkewKernelMatrix {
    dim: usize,
    upper: Vec<ScaledValue>,
}

impl SkewKernelMatrix {
    pub fn zeros(dim: usize) -> Self {
        SkewKernelMatrix {
            dim,
            upper: vec![ScaledValue::ZERO; dim * dim.saturating_sub(1) / 2],
        }
    }

    /// Builds from a function of `(a, b)` evaluated for `a < b` only.
    pub fn from_fn<F: FnMut(usize, usize) -> ScaledValue>(dim: usize, mut f: F) -> Self {
        let mut m = Self::zeros(dim);
        for a in 0..dim {
            for b in a + 1..dim {
                m.set(a, b, f(a, b));
            }
        }
        m
    }

    /// From a dense `f64` matrix; only its strict upper triangle is read.
    pub fn from_upper_f64(rows: &[Vec<f64>]) -> Self {
        Self::from_fn(rows.len(), |a, b| ScaledValue::from_f64(rows[a][b]))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn index(&self, a: usize, b: usize) -> usize {
        debug_assert!(a < b && b < self.dim);
        a * (2 * self.dim - a - 1) / 2 + (b - a - 1)
    }

    /// Sets entry `(a, b)` and implicitly `(b, a) = -value`.
    pub fn set(&mut self, a: usize, b: usize, value: ScaledValue) {
        assert!(a != b, "diagonal of an antisymmetric matrix is fixed at zero");
        if a < b {
            let i = self.index(a, b);
            self.upper[i] = value;
        } else {
            let i = self.index(b, a);
            self.upper[i] = -value;
        }
    }

    pub fn get(&self, a: usize, b: usize) -> ScaledValue {
        match a.cmp(&b) {
            std::cmp::Ordering::Equal => ScaledValue::ZERO,
            std::cmp::Ordering::Less => self.upper[self.index(a, b)],
            std::cmp::Ordering::Greater => -self.upper[self.index(b, a)],
        }
    }

    pub fn to_f64(&self) -> Vec<Vec<f64>> {
        (0..self.dim)
            .map(|a| (0..self.dim).map(|b| self.get(a, b).to_f64()).collect())
            .collect()
    }
}

/// Pfaffian by skew-symmetric Gaussian elimination (Parlett–Reid) with full
/// pivoting.
///
/// Row and column `i` are scaled by `2^{-e_i}` so the working matrix is
/// representable in `f64`; the scales are folded back into the result.
pub fn pfaffian(m: &SkewKernelMatrix) -> Result<ScaledValue> {
    let n = m.dim();
    if n % 2 == 1 {
        return Err(Error::OddDimension(n));
    }
    if n == 0 {
        return Ok(ScaledValue::ONE);
    }
    // Symmetric equilibration in exponent space: pick h_i so that the largest
    // entry of row i scaled by 2^{-(h_i + h_j)} is O(1). A few sweeps settle
    // rows whose entries differ from the rest by thousands of binary orders.
    let exps: Vec<Vec<Option<i64>>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let v = m.get(i, j);
                    (i != j && !v.is_zero()).then(|| v.exponent())
                })
                .collect()
        })
        .collect();
    let mut half: Vec<i64> = exps
        .iter()
        .map(|row| row.iter().flatten().copied().max().unwrap_or(0).div_euclid(2))
        .collect();
    for _ in 0..2 * n {
        let mut changed = false;
        for i in 0..n {
            let target = (0..n)
                .filter_map(|j| exps[i][j].map(|e| e - half[j]))
                .max()
                .unwrap_or(0);
            if target != half[i] {
                half[i] = target;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let mut a: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| m.get(i, j).ldexp(-(half[i] + half[j])).to_f64())
                .collect()
        })
        .collect();

    let mut result = 1.0f64;
    let mut exponent: i64 = half.iter().sum();
    let mut k = 0;
    while k + 1 < n {
        // full pivot over the trailing block
        let (mut pi, mut pj, mut best) = (k, k + 1, 0.0f64);
        for i in k..n {
            for j in i + 1..n {
                if a[i][j].abs() > best {
                    best = a[i][j].abs();
                    pi = i;
                    pj = j;
                }
            }
        }
        if best == 0.0 {
            return Ok(ScaledValue::ZERO);
        }
        // bring the pivot to (k, k+1) with congruent swaps; each swap flips the sign
        if pi != k {
            swap_index(&mut a, k, pi);
            result = -result;
        }
        if pj != k + 1 {
            swap_index(&mut a, k + 1, pj);
            result = -result;
        }
        let pivot = a[k][k + 1];
        result *= pivot;
        // rescale to keep the running product in range
        let (mant, exp) = frexp(result);
        result = mant;
        exponent += exp;
        // eliminate rows/cols k+2.. against the (k, k+1) block
        // Schur complement of the leading 2x2 block
        for i in k + 2..n {
            for j in k + 2..n {
                a[i][j] += (a[k][j] * a[k + 1][i] - a[k][i] * a[k + 1][j]) / pivot;
            }
        }
        k += 2;
    }
    Ok(ScaledValue::from_f64(result).ldexp(exponent))
}

fn swap_index(a: &mut [Vec<f64>], p: usize, q: usize) {
    a.swap(p, q);
    for row in a.iter_mut() {
        row.swap(p, q);
    }
}

fn frexp(x: f64) -> (f64, i64) {
    if x == 0.0 || !x.is_finite() {
        return (x, 0);
    }
    let s = ScaledValue::from_f64(x);
    (s.mantissa(), s.exponent())
}
