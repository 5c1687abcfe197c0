use wishart_edge::finite_n::linspace;
use wishart_edge::hard_edge::{
    closed_form_pdf_constant, limit_gap, limit_pdf, limit_pdf_closed_form, micro_density,
    tricomi_limit_check,
};
use wishart_edge::quad::{integrate, QuadOptions};

#[test]
fn nu_zero_is_the_closed_form() {
    for u in linspace(0.0, 60.0, 121) {
        let exact = (-u.sqrt() / 2.0 - u / 8.0).exp();
        assert!((limit_gap(0, u).unwrap() - exact).abs() < 1e-15);
    }
}

#[test]
fn gap_starts_at_one_and_decreases() {
    for nu in [0, 2, 4, 6] {
        assert_eq!(limit_gap(nu, 0.0).unwrap(), 1.0);
        let values: Vec<f64> = linspace(0.0, 50.0, 101).iter().map(|&u| limit_gap(nu, u).unwrap()).collect();
        assert!(values.windows(2).all(|w| w[1] < w[0]), "nu = {nu}");
    }
}

#[test]
fn larger_nu_pushes_the_smallest_eigenvalue_out() {
    for u in [1.0, 5.0, 20.0] {
        let e: Vec<f64> = [0, 2, 4].iter().map(|&nu| limit_gap(nu, u).unwrap()).collect();
        assert!(e[0] < e[1] && e[1] < e[2], "u = {u}");
    }
}

#[test]
fn densities_have_unit_mass() {
    let opts = QuadOptions::new(1e-10, 1e-10);
    for nu in [0, 2, 4] {
        let mass = integrate(|s| 2.0 * s * limit_pdf(nu, s * s).unwrap(), 0.0, 40.0, opts).unwrap().value;
        assert!((mass - 1.0).abs() < 1e-8, "nu = {nu}: {mass}");
    }
}

#[test]
fn closed_form_densities_agree_with_derivative() {
    assert!((closed_form_pdf_constant(0).unwrap() - 0.125).abs() < 1e-12);
    assert!((closed_form_pdf_constant(2).unwrap() - 0.125).abs() < 1e-12);
    assert!(closed_form_pdf_constant(4).is_err());
    for nu in [0, 2] {
        for u in [0.01, 0.3, 2.0, 10.0, 35.0] {
            let a = limit_pdf(nu, u).unwrap();
            let b = limit_pdf_closed_form(nu, u).unwrap();
            assert!((a / b - 1.0).abs() < 1e-8, "nu={nu} u={u}");
        }
    }
}

#[test]
fn spectral_density_small_u_behaviour() {
    // ρ_0 ~ 1/(4√u), ρ_2 ~ √u/32 as u → 0
    let u: f64 = 1e-8;
    assert!((micro_density(0, u).unwrap() * 4.0 * u.sqrt() - 1.0).abs() < 1e-3);
    assert!((micro_density(2, u).unwrap() * 32.0 / u.sqrt() - 1.0).abs() < 1e-3);
    for nu in [0, 1, 2, 3, 4] {
        for u in [0.1, 3.0, 30.0] {
            assert!(micro_density(nu, u).unwrap() > 0.0);
        }
    }
}

#[test]
fn tricomi_asymptotics_converge() {
    for (a, c, b, u) in [(1.0, 0.5, 1.5, 2.0), (0.5, 1.5, 2.5, 7.0)] {
        let mut last = f64::INFINITY;
        for n in [25, 50, 100, 200, 400] {
            let (lhs, rhs) = tricomi_limit_check(a, c, b, u, n).unwrap();
            let dev = ((lhs / rhs).to_f64() - 1.0).abs();
            assert!(dev < last);
            last = dev;
        }
        assert!(last < 1e-2);
    }
}

#[test]
fn odd_nu_and_negative_u_are_rejected() {
    assert!(limit_gap(3, 1.0).is_err());
    assert!(limit_pdf(2, 0.0).is_err());
    assert!(limit_gap(2, -1.0).is_err());
    assert!(micro_density(2, -1.0).is_err());
}
