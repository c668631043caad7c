use lame_spectra::elliptic::Torus;
use lame_spectra::monodromy::MonodromyOptions;
use lame_spectra::spectral_sets::{self as sets, Discriminant, EndKind, ExtractOptions, Family, Window};
use lame_spectra::Complex64;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Non-real `℘(p)`: two bounded arcs between roots of `Q` and two arcs
/// leaving every window, symmetric under `T ↦ -T`, with `Δ_j` not unitary.
#[test]
fn generic_sigma_has_two_bounded_and_two_unbounded_arcs() {
    let t = Torus::new(c(0.0, 2.0)).unwrap();
    let p = c(0.23, 0.61);
    assert!(t.wp(p).unwrap().im.abs() > 0.1);
    let window = Window::square(4.0);
    let disc = Discriminant::new(Family::NonEven { torus: t.clone(), p }, &window, &MonodromyOptions::default()).unwrap();
    let grid = sets::discriminant_grid(&disc, 0, &window, 121).unwrap();
    let set = sets::extract_arcs(&disc, &grid, &ExtractOptions::default());
    let bounded = set.arcs.iter().filter(|a| a.is_bounded()).count();
    let leaving = set.arcs.iter().filter(|a| a.ends.contains(&EndKind::Boundary)).count();
    assert_eq!((bounded, leaving), (2, 2), "{:?}", set.arcs.iter().map(|a| a.ends).collect::<Vec<_>>());
    assert!(sets::symmetry_defect(&set) < 2.0 * set.resolution);
    let roots = sets::endpoints(&t, p).unwrap();
    for e in &set.endpoints {
        assert!(e.refined);
        assert!(roots.iter().any(|r| (r.t - e.t).norm() < 1e-8));
    }
    // unitary monodromy would force Δ_j ∈ [-1, 1] on the whole plane
    assert!(disc.eval(0, c(2.5, 1.5)).norm() > 1.0);
}

/// The Lamé sets cover the real axis: `σ̃1 ∪ σ̃2 = R`.
#[test]
fn lame_sets_cover_the_real_line() {
    let t = Torus::new(c(0.0, 1.3)).unwrap();
    let window = Window { re: [-6.0, 8.0], im: [-0.5, 0.5] };
    let disc = Discriminant::new(Family::Lame { torus: t.clone() }, &window, &MonodromyOptions::default()).unwrap();
    for k in 0..=140 {
        let x = c(-6.0 + 0.1 * k as f64, 0.0);
        let d = disc.eval_both(x);
        assert!(d[0].im.abs() < 1e-8 && d[1].im.abs() < 1e-8);
        assert!(d[0].re.abs() <= 1.0 + 1e-9 || d[1].re.abs() <= 1.0 + 1e-9, "gap at {x}: {d:?}");
    }
    let e = t.e();
    for (j, iv) in [(0, sets::lame_intervals(&t, 0).unwrap()), (1, sets::lame_intervals(&t, 1).unwrap())] {
        for (lo, hi) in iv {
            for x in [lo, hi].into_iter().filter(|x| x.is_finite()) {
                assert!(e.iter().any(|ek| (ek.re - x).abs() < 1e-12));
                assert!((disc.eval(j, c(x, 0.0)).norm() - 1.0).abs() < 1e-7);
            }
        }
    }
}

#[test]
fn threshold_regime_has_double_root_at_zero() {
    let t = Torus::new(c(0.0, 2.0)).unwrap();
    let e3 = t.e()[2].re;
    let r = sets::classify_regime(&t, -e3 / 2.0).unwrap();
    assert_eq!(r.index, 4);
    let pieces = sets::predicted_sigma(&t, -e3 / 2.0, 0).unwrap();
    assert!(pieces.iter().any(|p| p.distance(Complex64::default()) < 1e-12));
}
