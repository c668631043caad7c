//! Contour quadrature: adaptive Gauss–Kronrod along paths, trapezoid rules on
//! circles, Laurent coefficients and winding numbers.

use crate::ode::Path;
use crate::{Complex64, Error, Result, C0};
use std::f64::consts::PI;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_8,
];
const WG: [f64; 4] = [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

fn gk15<F>(f: &F, path: &Path, a: f64, b: f64) -> Result<(Complex64, f64)>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let g = |t: f64| -> Result<Complex64> { Ok(f(path.point(t))? * path.velocity(t)) };
    let fc = g(c)?;
    let mut k = fc * WGK[7];
    let mut gs = fc * WG[3];
    for i in 0..7 {
        let dx = h * XGK[i];
        let s = g(c - dx)? + g(c + dx)?;
        k += s * WGK[i];
        if i % 2 == 1 {
            gs += s * WG[i / 2];
        }
    }
    Ok((k * h, ((k - gs) * h).norm()))
}

/// `∫_path f(z) dz` by adaptive Gauss–Kronrod (7/15) in the path parameter.
pub fn integrate_path<F>(f: &F, path: &Path, abs_tol: f64, rel_tol: f64) -> Result<Complex64>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    let mut stack = vec![(0.0, 1.0, 0usize)];
    let mut total = C0;
    let mut evals = 0usize;
    let (whole, _) = gk15(f, path, 0.0, 1.0)?;
    let scale = whole.norm();
    while let Some((a, b, depth)) = stack.pop() {
        let (v, err) = gk15(f, path, a, b)?;
        evals += 15;
        let budget = (abs_tol.max(rel_tol * scale)) * (b - a);
        if err <= budget || depth >= 40 {
            if depth >= 40 && err > budget {
                return Err(Error::NoConvergence { what: "contour quadrature".into(), residual: err });
            }
            total += v;
        } else {
            let m = 0.5 * (a + b);
            stack.push((m, b, depth + 1));
            stack.push((a, m, depth + 1));
        }
        if evals > 2_000_000 {
            return Err(Error::NoConvergence { what: "contour quadrature budget".into(), residual: err });
        }
    }
    Ok(total)
}

/// `∮ f(z) dz` over the circle `|z - c| = ρ` (counter-clockwise), `n`-point trapezoid.
pub fn circle_integral<F>(f: &F, center: Complex64, radius: f64, n: usize) -> Result<Complex64>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    let mut s = C0;
    for j in 0..n {
        let u = Complex64::from_polar(radius, 2.0 * PI * j as f64 / n as f64);
        s += f(center + u)? * u;
    }
    Ok(s * Complex64::new(0.0, 2.0 * PI / n as f64))
}

/// Laurent coefficients `a_k`, `k ∈ [kmin, kmax]`, of `f` about `center`.
pub fn laurent<F>(f: &F, center: Complex64, radius: f64, n: usize, kmin: i32, kmax: i32) -> Result<Vec<Complex64>>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    let samples: Vec<Complex64> =
        (0..n).map(|j| f(center + Complex64::from_polar(radius, 2.0 * PI * j as f64 / n as f64))).collect::<Result<_>>()?;
    Ok((kmin..=kmax)
        .map(|k| {
            let mut s = C0;
            for (j, v) in samples.iter().enumerate() {
                s += v * Complex64::from_polar(1.0, -2.0 * PI * (k as f64) * j as f64 / n as f64);
            }
            s / n as f64 / radius.powi(k)
        })
        .collect())
}

/// Winding number about 0 of the closed polygon through `values`.
pub fn winding_number(values: &[Complex64]) -> f64 {
    let n = values.len();
    let mut total = 0.0;
    for j in 0..n {
        let a = values[j];
        let b = values[(j + 1) % n];
        total += (b / a).arg();
    }
    total / (2.0 * PI)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{C1, CI};

    #[test]
    fn residue_and_segment() {
        let f = |z: Complex64| Ok(1.0 / z);
        let v = circle_integral(&f, C0, 0.5, 64).unwrap();
        assert!((v - 2.0 * PI * CI).norm() < 1e-13);
        let path = Path::Segment { start: C1, delta: CI };
        let g = |z: Complex64| Ok(z.exp());
        let w = integrate_path(&g, &path, 1e-14, 1e-14).unwrap();
        assert!((w - ((C1 + CI).exp() - C1.exp())).norm() < 1e-13);
    }

    #[test]
    fn laurent_of_simple_pole() {
        let f = |z: Complex64| Ok(2.0 / (z * z) + 3.0 / z + 5.0 + z);
        let a = laurent(&f, C0, 0.3, 64, -2, 1).unwrap();
        for (got, want) in a.iter().zip([2.0, 3.0, 5.0, 1.0]) {
            assert!((got - want).norm() < 1e-12);
        }
    }
}
