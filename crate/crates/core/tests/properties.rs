use std::f64::consts::PI;

use darboux_core::cauchy::{solve_cauchy, CauchyData};
use darboux_core::delta::{boundary_operator_b1, boundary_operator_b2, uniform_grid, DiagonalTrace};
use darboux_core::epd::{residual, C2Ordering, ParamCase, ScalarField};
use darboux_core::expr::ScalarFn;
use darboux_core::riemann::{adjoint_residual, characteristic_check, riemann_eval, RiemannFn};
use darboux_core::specfun::gauss_2f1;
use proptest::prelude::*;

fn agm(mut a: f64, mut b: f64) -> f64 {
    // quadratic convergence; 40 rounds is far past double precision
    for _ in 0..40 {
        (a, b) = (0.5 * (a + b), (a * b).sqrt());
    }
    a
}

fn cubic(c: [f64; 4]) -> String {
    format!("{} + {}*x + {}*x^2 + {}*x^3", c[0], c[1], c[2], c[3])
}

fn data(case: ParamCase, tau: &str, nu: &str) -> CauchyData {
    let d = (0.0, 1.0);
    CauchyData::new(case, ScalarFn::parse(tau, d).unwrap(), ScalarFn::parse(nu, d).unwrap()).unwrap()
}

fn case_of(k: usize) -> ParamCase {
    [ParamCase::C1, ParamCase::c2(C2Ordering::AlphaPlus), ParamCase::c2(C2Ordering::AlphaMinus), ParamCase::C3][k]
}

#[test]
fn elliptic_integral_through_agm() {
    for z in [0.0, 0.1, 0.5, 0.9, 0.99] {
        let k = PI / (2.0 * agm(1.0, (1.0_f64 - z).sqrt()));
        let f = gauss_2f1(0.5, 0.5, 1.0, z).unwrap();
        assert!((f - 2.0 * k / PI).abs() <= 1e-13 * f, "z = {z}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hypergeometric_closed_forms(z in 0.0f64..0.95, a in -2.0f64..3.0, b in 0.3f64..4.0) {
        let k = PI / (2.0 * agm(1.0, (1.0 - z).sqrt()));
        prop_assert!((gauss_2f1(0.5, 0.5, 1.0, z).unwrap() - 2.0 * k / PI).abs() <= 1e-12);
        let log = if z == 0.0 { 1.0 } else { -(-z).ln_1p() / z };
        prop_assert!((gauss_2f1(1.0, 1.0, 2.0, z).unwrap() - log).abs() <= 1e-12 * log);
        let pow = (1.0 - z).powf(-a);
        prop_assert!((gauss_2f1(a, b, b, z).unwrap() - pow).abs() <= 1e-11 * pow.max(1.0));
    }

    #[test]
    fn riemann_function_certificates(x in 0.0f64..1.0, l in 0.2f64..2.0, p in 0.05f64..0.45, q in 0.05f64..0.45) {
        let r = RiemannFn::new(ParamCase::C1).unwrap();
        let y = x + l;
        let (xi, eta) = (x + p * l, y - q * l);
        prop_assert!(adjoint_residual(&r, xi, eta, x, y, 1e-3 * l).unwrap().abs() <= 1e-7);
        prop_assert_eq!(riemann_eval(&r, x, y, x, y).unwrap(), 1.0);
        prop_assert!(characteristic_check(&r, x, y, 5).unwrap() <= 1e-7);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn cauchy_superposition(
        k in 0usize..4,
        c1 in prop::array::uniform4(-2.0f64..2.0),
        c2 in prop::array::uniform4(-2.0f64..2.0),
        a in -3.0f64..3.0,
        b in -3.0f64..3.0,
        x in 0.0f64..0.8,
        s in 0.001f64..0.2,
    ) {
        let case = case_of(k);
        let d1 = data(case, &cubic(c1), &cubic(c2));
        let d2 = data(case, &cubic(c2), "sin(x)");
        let sum = solve_cauchy(&d1.combine(a, &d2, b).unwrap()).unwrap();
        let (u1, u2) = (solve_cauchy(&d1).unwrap(), solve_cauchy(&d2).unwrap());
        let y = x + s;
        let want = a * u1.value(x, y).unwrap() + b * u2.value(x, y).unwrap();
        prop_assert!((sum.value(x, y).unwrap() - want).abs() <= 1e-6);
    }

    #[test]
    fn cauchy_residuals(
        k in 0usize..4,
        c in prop::array::uniform4(-2.0f64..2.0),
        x in 0.0f64..0.9,
        s in 0.001f64..0.1,
    ) {
        let case = case_of(k);
        let sol = solve_cauchy(&data(case, &cubic(c), "exp(-x)")).unwrap();
        prop_assert!(residual(&sol.field, case, x, x + s).unwrap().abs() <= 1e-6);
        prop_assert!(sol.field.eval(x, x + s).is_finite());
    }

    #[test]
    fn boundary_operators_are_linear(a in -5.0f64..5.0, z in 0.01f64..1.0, c in prop::array::uniform4(-1.0f64..1.0)) {
        let g = uniform_grid(1.0, 10);
        let t = DiagonalTrace::sample(g, |x| c[0] + c[1] * x, |x| c[2] + c[3] * x * x).unwrap();
        let ta = t.scaled(a);
        prop_assert!((boundary_operator_b1(&ta, z).unwrap() - a * boundary_operator_b1(&t, z).unwrap()).abs() <= 1e-8);
        prop_assert!((boundary_operator_b2(&ta, z).unwrap() - a * boundary_operator_b2(&t, z).unwrap()).abs() <= 1e-8);
    }
}
