use std::f64::consts::PI;

use monopole_core::dual::gradient;
use monopole_core::integrals::{conserved_set, poisson_bracket, Integral, IntegralKind};
use monopole_core::parity::{expand, expand_normalized, numeric_consistency};
use monopole_core::transforms::{
    from_taubnut, pw_coefficients, reduced_hamiltonian_check, symplectic_residual, to_taubnut,
};
use monopole_core::{DomainWindow, Grad6, Model, ModelParams, PhasePoint, RationalM};
use num_rational::BigRational;
use proptest::prelude::*;

const M_LIST: [(i64, i64); 7] = [(1, 1), (1, 2), (2, 1), (2, 3), (3, 2), (5, 3), (5, 2)];

fn arb_m() -> impl Strategy<Value = RationalM> {
    (0..M_LIST.len(), any::<bool>()).prop_map(|(i, neg)| {
        let (n, d) = M_LIST[i];
        RationalM::new(if neg { -n } else { n }, d).unwrap()
    })
}

prop_compose! {
    fn arb_params()(
        m in arb_m(),
        alpha1 in 0.1f64..2.0, beta1 in 0.1f64..2.0,
        alpha2 in -0.5f64..0.5, beta2 in -2.0f64..0.0,
        k in prop_oneof![-1.5f64..-0.3, 0.3f64..1.5],
        a in 0.0f64..0.3, b in 0.0f64..0.3, c in 0.0f64..0.2,
    ) -> ModelParams {
        ModelParams { m, delta: 1, nu: 1.0, alpha1, beta1, alpha2, beta2, k, ell: 0.0, a, b, c }
    }
}

prop_compose! {
    fn arb_point()(
        r in 0.5f64..3.0, theta in 0.3f64..(PI - 0.3), phi in 0.0f64..(2.0 * PI),
        p_r in -2.0f64..2.0, p_theta in -2.0f64..2.0, p_phi in -2.0f64..2.0,
    ) -> PhasePoint {
        PhasePoint { r, theta, phi, p_r, p_theta, p_phi }
    }
}

fn model(p: ModelParams) -> Model {
    Model::new(p, DomainWindow::default()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn integrals_commute_with_h(p in arb_params(), z in arb_point()) {
        let md = model(p);
        let h = Integral::new(&md, IntegralKind::Hamiltonian);
        let x1 = Integral::new(&md, IntegralKind::X1);
        let x2 = Integral::new(&md, IntegralKind::X2);
        prop_assert!(poisson_bracket(&x1, &h, &z).unwrap().relative() <= 1e-10);
        prop_assert!(poisson_bracket(&x2, &h, &z).unwrap().relative() <= 1e-8);
        let cs = conserved_set(&md, &z).unwrap();
        prop_assume!(cs.s > 0.0);
        let cx = Integral::new(&md, IntegralKind::CalX);
        prop_assert!(poisson_bracket(&cx, &h, &z).unwrap().relative() <= 1e-8);
    }

    #[test]
    fn hamiltonian_is_gauge_covariant(p in arb_params(), z in arb_point(), ell in -2.0f64..2.0) {
        let md = model(p);
        let shifted = md.with_gauge(ell);
        let mut z2 = z;
        z2.p_phi = z.p_phi - ell;
        let (h1, h2) = (md.hamiltonian(&z).unwrap(), shifted.hamiltonian(&z2).unwrap());
        prop_assert!((h1 - h2).abs() <= 1e-12 * h1.abs().max(1.0));
    }

    #[test]
    fn phi_is_cyclic(p in arb_params(), z in arb_point(), dphi in -3.0f64..3.0) {
        let md = model(p);
        let mut z2 = z;
        z2.phi += dphi;
        prop_assert_eq!(md.hamiltonian(&z).unwrap(), md.hamiltonian(&z2).unwrap());
        prop_assert_eq!(md.hamiltonian_gradient(&z).unwrap()[2], 0.0);
    }

    #[test]
    fn dual_gradient_matches_finite_differences(p in arb_params(), z in arb_point()) {
        let md = model(p);
        let g = md.hamiltonian_gradient(&z).unwrap();
        let x = z.to_array();
        for j in 0..6 {
            let h = 1e-6 * x[j].abs().max(1.0);
            let mut up = x;
            let mut dn = x;
            up[j] += h;
            dn[j] -= h;
            let fd = (md.hamiltonian_unchecked(&PhasePoint::from_array(up))
                - md.hamiltonian_unchecked(&PhasePoint::from_array(dn))) / (2.0 * h);
            prop_assert!((g[j] - fd).abs() <= 1e-6 * fd.abs().max(1.0), "{} {} {}", j, g[j], fd);
        }
    }

    #[test]
    fn free_gradient_helper_agrees(p in arb_params(), z in arb_point()) {
        let md = model(p);
        let (v, g) = gradient(|x: [Grad6; 6]| md.hamiltonian_unchecked(&PhasePoint::from_array(x)), z.to_array());
        let h = md.hamiltonian(&z).unwrap();
        prop_assert!((v - h).abs() <= 1e-14 * h.abs().max(1.0));
        for (a, b) in g.iter().zip(md.hamiltonian_gradient(&z).unwrap()) {
            prop_assert!((a - b).abs() <= 1e-14 * b.abs().max(1.0));
        }
    }

    #[test]
    fn taubnut_round_trip_and_symplectic(p in arb_params(), z in arb_point(), neg in any::<bool>()) {
        let mut p = p;
        p.delta = if neg { -1 } else { 1 };
        let md = model(p);
        let back = from_taubnut(&md, &to_taubnut(&md, &z).unwrap()).unwrap();
        for (a, b) in back.to_array().iter().zip(z.to_array()) {
            prop_assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
        }
        prop_assert!(symplectic_residual(&md, &z, 1e-5).unwrap() <= 1e-8);
    }

    #[test]
    fn reduction_is_exact(p in arb_params(), z in arb_point()) {
        let mut p = p;
        p.ell = p.k;
        let md = model(p);
        prop_assert!(reduced_hamiltonian_check(&md, &z).unwrap() <= 1e-12);
    }

    #[test]
    fn pw_map_exact_over_rationals(
        a in -20i64..20, b in -20i64..20, c in -20i64..20, p0 in -20i64..20, k in 1i64..20, d in 1i64..9,
    ) {
        let q = |n: i64| BigRational::new(n.into(), d.into());
        let (alpha, beta) = pw_coefficients(q(a), q(b), q(c), q(p0), q(k));
        let eight = BigRational::from_integer(8.into());
        let two = BigRational::from_integer(2.into());
        prop_assert_eq!(&eight * alpha, &eight * q(a) + &two * q(c) + q(p0) * q(p0));
        let s = q(p0) + &two * q(k);
        prop_assert_eq!(&eight * beta, &eight * q(b) + &two * q(c) + &s * &s);
    }

    #[test]
    fn rational_m_display_round_trip(n in -40i64..40, d in 1i64..40) {
        prop_assume!(n != 0);
        let m = RationalM::new(n, d).unwrap();
        let parsed: RationalM = m.to_string().parse().unwrap();
        prop_assert_eq!(parsed, m);
        prop_assert!((m.to_f64() - n as f64 / d as f64).abs() <= 1e-15);
    }

    #[test]
    fn symbolic_matches_numeric(idx in 0..M_LIST.len(), p in arb_params(), z in arb_point()) {
        let (m1, m2) = M_LIST[idx];
        let mut p = p;
        p.m = RationalM::new(m1, m2).unwrap();
        let md = model(p);
        prop_assume!(conserved_set(&md, &z).unwrap().s > 0.0);
        prop_assert!(numeric_consistency(&md, &z, m1 as u64, m2 as u64).unwrap() <= 1e-9);
    }
}

#[test]
fn every_coprime_pair_certifies() {
    for m1 in 1..=9u64 {
        for m2 in 1..=9u64 {
            if num_integer::gcd(m1, m2) != 1 {
                assert!(expand(m1, m2).is_err());
                continue;
            }
            let terms = expand_normalized(m1, m2).unwrap();
            assert!(!terms.is_empty());
            assert!(
                terms.iter().all(|t| t.exp_half_s >= 0 && t.exp_half_s % 2 == 0),
                "({m1}, {m2})"
            );
        }
    }
}
