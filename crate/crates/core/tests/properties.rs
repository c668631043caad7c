use lame_spectra::elliptic::Torus;
use lame_spectra::equivalence;
use lame_spectra::monodromy::{self, Branch, MonodromyOptions};
use lame_spectra::spectral;
use lame_spectra::spectral_sets as sets;
use lame_spectra::Complex64;
use proptest::prelude::*;

fn tau() -> impl Strategy<Value = Complex64> {
    (-0.5f64..0.5, 0.8f64..2.0).prop_map(|(x, y)| Complex64::new(x, y))
}

fn param() -> impl Strategy<Value = Complex64> {
    (-1.5f64..1.5, -1.5f64..1.5).prop_map(|(x, y)| Complex64::new(x, y))
}

/// Lattice coordinates of a singular point away from the half periods.
fn p_coords() -> impl Strategy<Value = (f64, f64)> {
    (0.1f64..0.4, 0.1f64..0.4)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn wp_is_even_periodic_and_solves_its_ode(tau in tau(), x in 0.05f64..0.95, y in 0.05f64..0.95) {
        let t = Torus::new(tau).unwrap();
        let z = t.from_coords(x, y);
        let w = t.wp_all(z).unwrap();
        let scale = 1.0 + w.wp.norm().powi(3);
        prop_assert!((t.wp(-z).unwrap() - w.wp).norm() < 1e-10 * scale);
        prop_assert!((t.wp(z + 1.0).unwrap() - w.wp).norm() < 1e-10 * scale);
        prop_assert!((t.wp(z + tau).unwrap() - w.wp).norm() < 1e-10 * scale);
        prop_assert!((t.zeta(-z).unwrap() + t.zeta(z).unwrap()).norm() < 1e-10 * scale);
        let rhs = 4.0 * w.wp.powi(3) - t.g2() * w.wp - t.g3();
        prop_assert!((w.dwp * w.dwp - rhs).norm() < 1e-9 * scale);
    }

    #[test]
    fn wp_inverse_round_trips(tau in tau(), x in 0.05f64..0.95, y in 0.05f64..0.95) {
        let t = Torus::new(tau).unwrap();
        let w = t.wp(t.from_coords(x, y)).unwrap();
        let z = t.wp_inverse(w).unwrap();
        prop_assert!((t.wp(z).unwrap() - w).norm() < 1e-8 * (1.0 + w.norm()));
    }

    #[test]
    fn premodular_form_is_odd_and_periodic(tau in tau(), r in 0.05f64..0.95, s in 0.05f64..0.95) {
        let t = Torus::new(tau).unwrap();
        let z = t.premodular(r.into(), s.into()).unwrap();
        let scale = 1.0 + z.norm();
        prop_assert!((t.premodular((-r).into(), (-s).into()).unwrap() + z).norm() < 1e-10 * scale);
        prop_assert!((t.premodular((r + 1.0).into(), s.into()).unwrap() - z).norm() < 1e-10 * scale);
        prop_assert!((t.premodular(r.into(), (s - 1.0).into()).unwrap() - z).norm() < 1e-10 * scale);
    }

    #[test]
    fn btilde_preimages_map_back(tau in tau(), (x, y) in p_coords(), b in param()) {
        let t = Torus::new(tau).unwrap();
        let p = t.from_coords(x, y);
        for tt in equivalence::t_of_btilde(&t, p, b).unwrap() {
            prop_assert!((equivalence::btilde_of(&t, p, tt).unwrap() - b).norm() < 1e-10 * (1.0 + b.norm()));
        }
    }

    #[test]
    fn first_integral_is_constant(tau in tau(), (x, y) in p_coords(), a in param(), even in any::<bool>(), u in 0.2f64..0.8, v in 0.45f64..0.9) {
        let t = Torus::new(tau).unwrap();
        let p = t.from_coords(x, y);
        let br = if even { Branch::Even(a) } else { Branch::NonEven(a) };
        let g = monodromy::make_apparent(&t, p, br).unwrap();
        prop_assert!(g.apparent_residual() < 1e-9 * (1.0 + g.b.norm()));
        let z = t.from_coords(u, v);
        prop_assume!([Complex64::default(), p, -p].iter().all(|&s| t.dist_to_lattice(z - s) > 0.05));
        let q = spectral::spectral_polynomial(&g).unwrap();
        let v = spectral::first_integral(&g, z).unwrap();
        prop_assert!((v - q).norm() < 1e-8 * (1.0 + q.norm()));
    }

    #[test]
    fn regime_index_is_monotone(a in -6.0f64..6.0, b in -6.0f64..6.0) {
        let t = Torus::new(Complex64::new(0.0, 2.0)).unwrap();
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(sets::classify_regime(&t, lo).unwrap().index <= sets::classify_regime(&t, hi).unwrap().index);
    }

    #[test]
    fn spectral_roots_solve_q(tau in tau(), (x, y) in p_coords()) {
        let t = Torus::new(tau).unwrap();
        let p = t.from_coords(x, y);
        for r in sets::endpoints(&t, p).unwrap() {
            let g = monodromy::make_apparent(&t, p, Branch::NonEven(r.t)).unwrap();
            let scale = (1.0 + g.pt.wp.wp.norm() + r.t.norm_sqr()).powi(3);
            prop_assert!(spectral::spectral_polynomial(&g).unwrap().norm() < 1e-10 * scale);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn monodromy_is_unimodular_and_abelian(tau in tau(), (x, y) in p_coords(), a in param(), even in any::<bool>()) {
        let t = Torus::new(tau).unwrap();
        let br = if even { Branch::Even(a) } else { Branch::NonEven(a) };
        let g = monodromy::make_apparent(&t, t.from_coords(x, y), br).unwrap();
        let m = monodromy::integrate_monodromy(&g, &MonodromyOptions::default()).unwrap();
        prop_assert!(m.det_residual() < 1e-8);
        prop_assert!(m.commutator_residual() < 1e-7);
    }

    #[test]
    fn traces_match_the_lame_equation(tau in tau(), (x, y) in p_coords(), tt in param()) {
        let t = Torus::new(tau).unwrap();
        let r = equivalence::verify_trace_equivalence(&t, t.from_coords(x, y), tt, &MonodromyOptions::default()).unwrap();
        prop_assert!(r.max_abs_diff < 1e-6, "{}", r.max_abs_diff);
    }

    #[test]
    fn discriminants_are_even_in_t(tau in tau(), (x, y) in p_coords(), tt in param()) {
        let t = Torus::new(tau).unwrap();
        let p = t.from_coords(x, y);
        let opts = MonodromyOptions::default();
        let g = monodromy::make_apparent(&t, p, Branch::NonEven(tt)).unwrap();
        let (z0, _) = monodromy::base_point(&g, &opts, &[]).unwrap();
        let o = MonodromyOptions { base_point: Some(z0), ..opts };
        let a = monodromy::integrate_monodromy(&g, &o).unwrap();
        let g2 = monodromy::make_apparent(&t, p, Branch::NonEven(-tt)).unwrap();
        let b = monodromy::integrate_monodromy(&g2, &o).unwrap();
        for j in 0..2 {
            prop_assert!((a.discriminant(j) - b.discriminant(j)).norm() < 1e-8 * (1.0 + a.discriminant(j).norm()));
        }
    }
}
