use lame_spectra::elliptic::Torus;
use lame_spectra::metrics;
use lame_spectra::monodromy::{self, Branch, MonodromyClass};
use lame_spectra::spectral;
use lame_spectra::{Complex64, Error};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[test]
fn equianharmonic_zero() {
    let z = metrics::premodular_zero_tau(1.0 / 3.0, 1.0 / 3.0, None).unwrap();
    assert!((z.tau - Complex64::from_polar(1.0, std::f64::consts::PI / 3.0)).norm() < 1e-10);
    assert!(z.trail.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn rejects_pairs_outside_the_triangle() {
    assert!(matches!(metrics::premodular_zero_tau(0.1, 0.1, None), Err(Error::OutsideDomain(_))));
    assert!(matches!(metrics::premodular_zero_tau(0.6, 0.3, None), Err(Error::OutsideDomain(_))));
}

#[test]
fn zero_is_independent_of_the_start() {
    let a = metrics::premodular_zero_tau(0.3, 0.35, None).unwrap();
    let b = metrics::premodular_zero_tau(0.3, 0.35, Some(a.tau + c(0.04, -0.03))).unwrap();
    assert!((a.tau - b.tau).norm() < 1e-10);
}

/// At `p*` the non-even equation with `T = 0` has monodromy data `(r, s)`.
#[test]
fn exceptional_point_carries_the_monodromy_data() {
    let (r, s) = (0.45, 0.2);
    let zero = metrics::premodular_zero_tau(r, s, None).unwrap();
    let ps = metrics::p_star(&zero).unwrap();
    let t = Torus::new(zero.tau).unwrap();
    let g = monodromy::make_apparent(&t, ps.p, Branch::NonEven(Complex64::default())).unwrap();
    let m = monodromy::integrate_monodromy(&g, &Default::default()).unwrap();
    let q = spectral::spectral_polynomial(&g).unwrap();
    let MonodromyClass::CompletelyReducible { r: r1, s: s1 } = monodromy::classify(&g, &m, q, g.btilde(), &Default::default()).unwrap()
    else {
        panic!("expected a completely reducible representation");
    };
    let want = (c(r, 0.0), c(s, 0.0));
    let d = monodromy::rs_distance_mod_z2((r1, s1), want).min(monodromy::rs_distance_mod_z2((-r1, -s1), want));
    assert!(d < 1e-8, "{r1} {s1}");
}

#[test]
fn blowup_sets_merge_at_the_exceptional_point() {
    let zero = metrics::premodular_zero_tau(0.3, 0.35, None).unwrap();
    let t = Torus::new(zero.tau).unwrap();
    let ps = metrics::p_star(&zero).unwrap();
    let b = metrics::blowup_sets(&t, ps.p, 0.3, 0.35).unwrap();
    assert!((b.delta_plus - b.delta_minus).norm() < 1e-5);
    let generic = metrics::blowup_sets(&t, c(0.2, 0.1), 0.3, 0.35).unwrap();
    assert!(!generic.ambiguous);
    for pair in [generic.plus, generic.minus] {
        let g = pair.residuals.unwrap();
        assert!(g.res22 < 1e-10 && g.res23 < 1e-10);
        assert!((g.determinant - g.determinant_closed_form).norm() <= 1e-8 * g.determinant_closed_form.norm().max(1e-300) + 1e-30);
    }
}

#[test]
fn singular_blowup_at_the_equianharmonic_point() {
    let rho = Complex64::from_polar(1.0, std::f64::consts::PI / 3.0);
    let t = Torus::new(rho).unwrap();
    let p = (1.0 + rho) / 3.0;
    let chk = metrics::blowup_at_singularity_check(&t, 1.0 / 3.0, 1.0 / 3.0, p).unwrap();
    assert!(chk.blows_up);
    assert!(chk.t_squared_residual.unwrap() < 1e-10 && chk.duplication_residual.unwrap() < 1e-10);
    assert!(matches!(metrics::blowup_sets(&t, p, 1.0 / 3.0, 1.0 / 3.0), Err(Error::Degenerate(_))));
}
