use statrs::function::erf::erfc;

use wishart_edge::finite_n::{
    gap_probability, gap_probability_with, linspace, smallest_pdf, FiniteN, GapMethod, SpectralParams,
};
use wishart_edge::quad::{integrate, integrate_to_infinity, QuadOptions};
use wishart_edge::Error;

/// `E(t)` for N = 2 straight from the joint eigenvalue density
/// `|x - y| (xy)^γ e^{-(x+y)/2}` by nested quadrature.
fn two_by_two_oracle(nu: usize, t: f64) -> f64 {
    let gamma = (nu as f64 - 1.0) / 2.0;
    let opts = QuadOptions::new(1e-13, 1e-12);
    let mass = |lo: f64| {
        integrate_to_infinity(
            |y| {
                integrate(
                    |x| (y - x) * (x * y).powf(gamma) * (-(x + y) / 2.0).exp(),
                    lo,
                    y,
                    opts,
                )
                .unwrap()
                .value
            },
            lo,
            opts,
        )
        .unwrap()
        .value
    };
    mass(t) / mass(0.0)
}

#[test]
fn single_row_is_chi_squared() {
    let p = SpectralParams::new(1, 0).unwrap();
    for t in [0.01, 0.3, 1.0, 4.0, 12.0] {
        let e = gap_probability(&p, t).unwrap();
        assert!((e - erfc((t / 2.0).sqrt())).abs() < 1e-10, "t = {t}");
    }
}

#[test]
fn two_rows_against_joint_density() {
    for nu in [2, 4, 6] {
        let p = SpectralParams::new(2, nu).unwrap();
        for t in [0.05, 0.5, 2.0, 6.0] {
            let oracle = two_by_two_oracle(nu, t);
            let auto = gap_probability(&p, t).unwrap();
            let general = gap_probability_with(&p, t, GapMethod::Pfaffian).unwrap();
            assert!((auto - oracle).abs() < 1e-9, "nu={nu} t={t}: {auto} vs {oracle}");
            assert!((general - oracle).abs() < 1e-9, "nu={nu} t={t}: {general} vs {oracle}");
        }
    }
}

#[test]
fn gap_is_a_survival_function() {
    for (n, nu) in [(4, 0), (6, 2), (10, 4), (20, 8)] {
        let model = FiniteN::new(SpectralParams::new(n, nu).unwrap()).unwrap();
        assert_eq!(model.gap(0.0).unwrap(), 1.0);
        let grid = linspace(0.0, model.tail_point(1e-10).unwrap(), 60);
        let curve = model.gap_curve(&grid).unwrap();
        assert!(curve.values.windows(2).all(|w| w[1] <= w[0] + 1e-14));
        assert!(*curve.values.last().unwrap() < 1e-9);
    }
}

#[test]
fn pdf_integrates_back_to_gap_differences() {
    let p = SpectralParams::new(8, 4).unwrap();
    let model = FiniteN::new(p).unwrap();
    let (a, b) = (0.05, 0.9);
    let mass = integrate(|t| model.pdf(t).unwrap(), a, b, QuadOptions::new(1e-11, 1e-11)).unwrap().value;
    let diff = model.gap(a).unwrap() - model.gap(b).unwrap();
    assert!((mass - diff).abs() < 1e-9);
    assert!((smallest_pdf(&p, 0.3).unwrap() - model.pdf(0.3).unwrap()).abs() < 1e-14);
}

#[test]
fn large_n_stays_finite() {
    let model = FiniteN::new(SpectralParams::new(400, 6).unwrap()).unwrap();
    for u in [0.5, 5.0, 40.0] {
        let e = model.gap(u / 1600.0).unwrap();
        assert!(e > 0.0 && e < 1.0);
    }
}

#[test]
fn unsupported_parameters_are_reported() {
    assert!(matches!(FiniteN::new(SpectralParams::new(5, 3).unwrap()), Err(Error::Unsupported(_))));
    assert!(matches!(SpectralParams::new(0, 2), Err(Error::Domain(_))));
    assert!(FiniteN::new(SpectralParams::new(5, 4).unwrap()).is_err());
    assert!(FiniteN::new(SpectralParams::new(5, 2).unwrap()).is_ok());
    let model = FiniteN::new(SpectralParams::new(4, 2).unwrap()).unwrap();
    assert!(model.gap(-1.0).is_err());
    assert!(model.pdf(0.0).is_err());
}
