use wishart_edge::skewpoly::{r_norm, skew_product_oracle, SkewBasis};

fn poly(basis: &SkewBasis, i: usize) -> impl Fn(f64) -> f64 + '_ {
    move |y| {
        if i % 2 == 0 {
            basis.even(i / 2, 0, y)
        } else {
            basis.odd(i / 2, 0, y)
        }
        .to_f64()
    }
}

#[test]
fn skew_orthogonality_table() {
    for t in [0.2, 1.0, 6.0] {
        let basis = SkewBasis::new(t, 1).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let v = skew_product_oracle(poly(&basis, i), poly(&basis, j), t).unwrap();
                let expected = match (i, j) {
                    (0, 1) | (2, 3) => basis.norm(i / 2).to_f64(),
                    (1, 0) | (3, 2) => -basis.norm(j / 2).to_f64(),
                    _ => 0.0,
                };
                if expected == 0.0 {
                    assert!(v.abs() < 1e-8, "t={t} <R{i},R{j}> = {v}");
                } else {
                    assert!((v / expected - 1.0).abs() < 1e-6, "t={t} <R{i},R{j}> = {v} vs {expected}");
                }
            }
        }
    }
}

#[test]
fn polynomials_are_monic() {
    // the degree-th derivative of a monic polynomial is degree!
    let basis = SkewBasis::new(0.8, 6).unwrap();
    let mut fact = 1.0;
    for d in 0..=13usize {
        if d > 0 {
            fact *= d as f64;
        }
        let (j, value) = if d % 2 == 0 {
            (d / 2, basis.even(d / 2, d, 0.37))
        } else {
            (d / 2, basis.odd(d / 2, d, 0.37))
        };
        assert!((value.to_f64() / fact - 1.0).abs() < 1e-12, "degree {d} (j = {j})");
        let above = if d % 2 == 0 { basis.even(j, d + 1, 0.37) } else { basis.odd(j, d + 1, 0.37) };
        assert!(above.is_zero());
    }
}

#[test]
fn derivatives_by_finite_differences() {
    let basis = SkewBasis::new(2.5, 4).unwrap();
    let h = 1e-5;
    for j in 0..=4 {
        for a in 0..3 {
            for y in [-1.7, 0.4, 3.0] {
                let fd_even = (basis.even(j, a, y + h).to_f64() - basis.even(j, a, y - h).to_f64()) / (2.0 * h);
                let fd_odd = (basis.odd(j, a, y + h).to_f64() - basis.odd(j, a, y - h).to_f64()) / (2.0 * h);
                let de = basis.even(j, a + 1, y).to_f64();
                let dod = basis.odd(j, a + 1, y).to_f64();
                assert!((fd_even - de).abs() <= 1e-6 * de.abs().max(1.0), "even j={j} a={a} y={y}");
                assert!((fd_odd - dod).abs() <= 1e-6 * dod.abs().max(1.0), "odd j={j} a={a} y={y}");
            }
        }
    }
}

#[test]
fn norms_are_smooth_in_t_and_finite_at_zero() {
    let at_zero = SkewBasis::new(0.0, 3).unwrap();
    for j in 0..=3 {
        let small = r_norm(j, 1e-9).unwrap().to_f64();
        let zero = at_zero.norm(j).to_f64();
        assert!((small / zero - 1.0).abs() < 1e-3, "j = {j}");
        assert!(r_norm(j, 5.0).unwrap().to_f64() < zero);
    }
}

#[test]
fn negative_t_is_rejected() {
    assert!(SkewBasis::new(-1.0, 2).is_err());
    assert!(r_norm(0, 0.0).is_err());
}
