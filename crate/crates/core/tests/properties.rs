use critcouple::algebraic::{self, GammaSystem};
use critcouple::coupling;
use critcouple::exponents::validate_params;
use critcouple::gagliardo::{self, DiscreteFunction, Grid1D};
use critcouple::ParamSet;
use proptest::prelude::*;

/// Admissible tuples with `N = 1..4`, drawn through `α ∈ (1, p* − 1)`.
fn tuple() -> impl Strategy<Value = ParamSet> {
    (1u32..=4, 0.1f64..0.9, 0.0f64..1.0, 0.0f64..1.0).prop_filter_map("inadmissible", |(n, s, pu, au)| {
        let nf = n as f64;
        let p = 1.05 + pu * ((0.9 * nf / s).min(5.0) - 1.05);
        let ps = nf * p / (nf - s * p);
        if !(p > 1.05 && ps > 2.1) {
            return None;
        }
        ParamSet::from_alpha(n, s, p, 1.0 + au * (ps - 2.0)).ok()
    })
}

fn lattice_tuple() -> impl Strategy<Value = ParamSet> {
    prop_oneof![
        Just(ParamSet::from_alpha(1, 0.25, 1.8, 1.5).unwrap()),
        Just(ParamSet::from_alpha(1, 0.5, 1.5, 1.2).unwrap()),
        Just(ParamSet::from_alpha(1, 0.3, 2.0, 1.4).unwrap()),
    ]
}

fn values(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0f64..2.0, n).prop_filter("zero", |v| v.iter().any(|x| x.abs() > 1e-3))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn alpha_plus_beta_must_be_critical(ps in tuple(), shift in 1e-6f64..0.5) {
        let [n, s, p, a, b] = ps.to_raw();
        prop_assert!(validate_params([n, s, p, a, b]).is_ok());
        prop_assert!(validate_params([n, s, p, a + shift, b]).is_err());
    }

    #[test]
    fn h_is_positive_and_one_at_the_ends(ps in tuple(), t in -6.0f64..6.0) {
        let h = coupling::h_eval(10f64.powf(t), &ps);
        prop_assert!(h > 0.0 && h.is_finite());
        prop_assert_eq!(coupling::h_eval(0.0, &ps), 1.0);
        prop_assert!((coupling::h_eval(1e300, &ps) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn tau_min_is_never_beaten_by_a_root(ps in tuple()) {
        let c = coupling::classify(&ps);
        prop_assert!(!c.g_roots.is_empty());
        for r in &c.g_roots {
            prop_assert!(c.h_at_tau_min <= coupling::h_eval(*r, &ps) + 1e-15);
        }
        prop_assert!(c.h_at_tau_min <= 1.0);
    }

    #[test]
    fn f1_f2_swap_exactly(ps in tuple(), k in 0.01f64..1.5, l in 0.01f64..1.5, g in 0.01f64..5.0) {
        let sys = GammaSystem::new(ps, g).unwrap();
        let f1 = algebraic::f1(k, l, &sys).unwrap();
        let f2 = algebraic::f2(l, k, &sys.swapped()).unwrap();
        prop_assert_eq!(f1, f2);
    }

    #[test]
    fn ell_of_k_solves_f1(ps in tuple(), k in 1e-3f64..1.0, g in 0.01f64..5.0) {
        let sys = GammaSystem::new(ps, g).unwrap();
        let l = algebraic::ell_of_k(k, &sys).unwrap();
        prop_assert!(algebraic::f1(k, l, &sys).unwrap().abs() < 1e-10);
    }

    #[test]
    fn seminorm_is_p_homogeneous_and_even(ps in lattice_tuple(), v in values(24), c in 0.1f64..10.0) {
        let grid = Grid1D::new(4.0, 24).unwrap();
        let u = DiscreteFunction::new(grid.clone(), v.clone()).unwrap();
        let a = gagliardo::seminorm_p(&u, &ps).unwrap();
        let b = gagliardo::seminorm_p(&u.scaled(c), &ps).unwrap();
        prop_assert!((b - c.powf(ps.p()) * a).abs() <= 1e-12 * b);
        let flipped: Vec<f64> = v.iter().rev().copied().collect();
        let r = gagliardo::seminorm_p(&DiscreteFunction::new(grid, flipped).unwrap(), &ps).unwrap();
        prop_assert!((r - a).abs() <= 1e-12 * a);
    }

    #[test]
    fn quotients_are_scale_free(ps in lattice_tuple(), v in values(20), w in values(20), c in 0.1f64..10.0) {
        let grid = Grid1D::new(4.0, 20).unwrap();
        let u = DiscreteFunction::new(grid.clone(), v).unwrap();
        let v = DiscreteFunction::new(grid, w).unwrap();
        let q = gagliardo::vector_quotient(&u, &v, 0.7, 0.0, &ps).unwrap();
        let qc = gagliardo::vector_quotient(&u.scaled(c), &v.scaled(c), 0.7, 0.0, &ps).unwrap();
        prop_assert!((q - qc).abs() <= 1e-12 * q);
        let s = gagliardo::scalar_quotient(&u, &ps).unwrap();
        prop_assert!((s - gagliardo::scalar_quotient(&u.scaled(c), &ps).unwrap()).abs() <= 1e-12 * s);
    }

    #[test]
    fn rearrangement_never_raises_the_seminorm(ps in lattice_tuple(), v in values(32)) {
        let grid = Grid1D::new(4.0, 32).unwrap();
        let u = DiscreteFunction::new(grid.clone(), v.clone()).unwrap();
        let mut r = v;
        gagliardo::symmetric_rearrangement(&mut r, &grid);
        let ur = DiscreteFunction::new(grid, r).unwrap();
        let (a, b) = (gagliardo::seminorm_p(&u, &ps).unwrap(), gagliardo::seminorm_p(&ur, &ps).unwrap());
        prop_assert!(b <= a * (1.0 + 1e-12), "{b} > {a}");
    }

    #[test]
    fn csv_round_trip(v in values(16)) {
        let grid = Grid1D::new(3.0, 16).unwrap();
        let u = DiscreteFunction::new(grid, v).unwrap();
        let mut buf = Vec::new();
        u.write_csv(&mut buf).unwrap();
        let back = DiscreteFunction::read_csv(buf.as_slice()).unwrap();
        prop_assert_eq!(back.values(), u.values());
        prop_assert!((back.grid().delta() - u.grid().delta()).abs() < 1e-12);
    }
}
