use crate::scaled::ScaledValue;

/// Monic generalized Laguerre polynomial `L^{(α)}_n(y) = y^n + …`.
///
/// Evaluated with the monic three-term recurrence
/// `p_{k+1} = (y - (2k+α+1)) p_k - k(k+α) p_{k-1}`. Negative degrees give 0.
pub fn laguerre_monic(n: i64, alpha: u32, y: f64) -> ScaledValue {
    if n < 0 {
        return ScaledValue::ZERO;
    }
    let alpha = alpha as f64;
    let mut prev = ScaledValue::ONE;
    if n == 0 {
        return prev;
    }
    let mut cur = ScaledValue::from_f64(y - (alpha + 1.0));
    for k in 1..n {
        let kf = k as f64;
        let next = cur * (y - (2.0 * kf + alpha + 1.0)) - prev * (kf * (kf + alpha));
        prev = cur;
        cur = next;
    }
    cur
}

/// All `L^{(α)}_n(y)` for `α ≤ alpha_max`, `n ≤ n_max` at a single point.
#[derive(Debug, Clone)]
pub struct LaguerreTable {
    y: f64,
    n_max: usize,
    values: Vec<Vec<ScaledValue>>,
}

impl LaguerreTable {
    pub fn new(y: f64, alpha_max: u32, n_max: usize) -> Self {
        let values = (0..=alpha_max)
            .map(|alpha| {
                let af = alpha as f64;
                let mut row = Vec::with_capacity(n_max + 1);
                row.push(ScaledValue::ONE);
                if n_max >= 1 {
                    row.push(ScaledValue::from_f64(y - (af + 1.0)));
                }
                for k in 1..n_max {
                    let kf = k as f64;
                    let next = row[k] * (y - (2.0 * kf + af + 1.0)) - row[k - 1] * (kf * (kf + af));
                    row.push(next);
                }
                row
            })
            .collect();
        LaguerreTable { y, n_max, values }
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    /// `L^{(α)}_n(y)`; negative `n` gives 0. Panics outside the tabulated range.
    pub fn get(&self, n: i64, alpha: u32) -> ScaledValue {
        if n < 0 {
            return ScaledValue::ZERO;
        }
        assert!(n as usize <= self.n_max, "degree {n} outside table");
        self.values[alpha as usize][n as usize]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn low_degrees() {
        assert_eq!(laguerre_monic(0, 5, 7.3).to_f64(), 1.0);
        assert_eq!(laguerre_monic(1, 1, 2.0).to_f64(), 0.0);
        assert_eq!(laguerre_monic(-1, 0, 2.0).to_f64(), 0.0);
        // monic L^{(0)}_2(y) = y^2 - 4y + 2
        for &y in &[-1.5, 0.0, 3.0] {
            assert!((laguerre_monic(2, 0, y).to_f64() - (y * y - 4.0 * y + 2.0)).abs() < 1e-14);
        }
    }

    #[test]
    fn derivative_identity() {
        // d/dy L^{(0)}_2 = 2y - 4 = 2 L^{(1)}_1(y)
        let y = 1.0;
        assert!((2.0 * y - 4.0 - 2.0 * laguerre_monic(1, 1, y).to_f64()).abs() < 1e-15);
    }

    #[test]
    fn leading_coefficient() {
        for &(n, alpha) in &[(3, 0), (7, 2), (5, 5)] {
            let y = 1e6f64;
            let r = laguerre_monic(n, alpha, y).to_f64() / y.powi(n as i32);
            assert!((r - 1.0).abs() < 1e-4);
        }
    }

    #[test]
    fn table_matches_direct() {
        let table = LaguerreTable::new(-0.7, 3, 40);
        for alpha in 0..=3 {
            for n in [0i64, 1, 5, 40] {
                let a = table.get(n, alpha);
                let b = laguerre_monic(n, alpha, -0.7);
                assert!(((a - b) / b).abs().to_f64() < 1e-15);
            }
        }
        assert!(table.get(-2, 1).is_zero());
    }

    #[test]
    fn high_degree_does_not_overflow() {
        let v = laguerre_monic(420, 4, -0.5);
        assert!(v.is_finite());
        // all terms share the sign (-1)^n at negative argument
        assert_eq!(v.signum(), 1.0);
        assert!(v.ln_abs() > 1000.0);
    }
}
