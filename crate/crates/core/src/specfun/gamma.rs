/// `ln Γ(x)` for `x > 0`: Stirling series after shifting the argument past 15.
pub fn ln_gamma(x: f64) -> f64 {
    assert!(x > 0.0, "ln_gamma requires x > 0, got {x}");
    let mut shift = 1.0;
    let mut y = x;
    while y < 15.0 {
        shift *= y;
        y += 1.0;
    }
    let inv = 1.0 / y;
    let inv2 = inv * inv;
    // Bernoulli terms B_{2k} / (2k (2k-1) y^{2k-1})
    let series = inv
        * (1.0 / 12.0
            + inv2
                * (-1.0 / 360.0
                    + inv2
                        * (1.0 / 1260.0
                            + inv2
                                * (-1.0 / 1680.0
                                    + inv2
                                        * (1.0 / 1188.0
                                            + inv2 * (-691.0 / 360360.0 + inv2 * (1.0 / 156.0)))))));
    (y - 0.5) * y.ln() - y + 0.5 * (2.0 * std::f64::consts::PI).ln() + series - shift.ln()
}

pub fn gamma(x: f64) -> f64 {
    ln_gamma(x).exp()
}
