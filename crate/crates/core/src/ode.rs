//! Transfer matrices of `y'' = q(z) y` along parametrised paths.
//!
//! The first-order system `Y' = [[0,1],[q,0]] Y` is advanced with the
//! six-stage Gauss–Legendre collocation method (order 12). The method is
//! symplectic, so `det = 1` holds to rounding independently of the step size.
//! Local error is estimated by step doubling and the finer result is kept.

use crate::linalg::{solve_in_place, Mat2};
use crate::{Complex64, Error, Result, C0, C1, CI};
use std::f64::consts::PI;
use std::sync::OnceLock;

/// Number of collocation stages.
pub const STAGES: usize = 6;

struct Tableau {
    c: [f64; STAGES],
    b: [f64; STAGES],
    a: [[f64; STAGES]; STAGES],
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut t = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(n, t);
            let dt = p / dp;
            t -= dt;
            if dt.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre(n, t);
        x[n - 1 - i] = t;
        w[n - 1 - i] = 2.0 / ((1.0 - t * t) * dp * dp);
    }
    (x, w)
}

fn tableau() -> &'static Tableau {
    static T: OnceLock<Tableau> = OnceLock::new();
    T.get_or_init(|| {
        let (x, w) = gauss_legendre(STAGES);
        let mut c = [0.0; STAGES];
        let mut b = [0.0; STAGES];
        for i in 0..STAGES {
            c[i] = 0.5 * (x[i] + 1.0);
            b[i] = 0.5 * w[i];
        }
        let lag = |j: usize, t: f64| (0..STAGES).filter(|&m| m != j).map(|m| (t - c[m]) / (c[j] - c[m])).product::<f64>();
        let mut a = [[0.0; STAGES]; STAGES];
        for (i, row) in a.iter_mut().enumerate() {
            for (j, aij) in row.iter_mut().enumerate() {
                // exact: deg ℓ_j = STAGES-1 <= 2·STAGES-1
                *aij = c[i] * (0..STAGES).map(|k| b[k] * lag(j, c[i] * c[k])).sum::<f64>();
            }
        }
        Tableau { c, b, a }
    })
}

/// Collocation nodes on `[0, 1]`.
pub fn stage_nodes() -> [f64; STAGES] {
    tableau().c
}

/// A parametrised path `z(t)`, `t ∈ [0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Path {
    /// `z(t) = start + t·delta`
    Segment { start: Complex64, delta: Complex64 },
    /// `z(t) = center + radius·e^{i(phase + 2πt)}`, counter-clockwise once.
    Circle { center: Complex64, radius: f64, phase: f64 },
}

impl Path {
    pub fn point(&self, t: f64) -> Complex64 {
        match *self {
            Path::Segment { start, delta } => start + delta * t,
            Path::Circle { center, radius, phase } => center + Complex64::from_polar(radius, phase + 2.0 * PI * t),
        }
    }
    pub fn velocity(&self, t: f64) -> Complex64 {
        match *self {
            Path::Segment { delta, .. } => delta,
            Path::Circle { radius, phase, .. } => 2.0 * PI * CI * Complex64::from_polar(radius, phase + 2.0 * PI * t),
        }
    }
    pub fn length(&self) -> f64 {
        match *self {
            Path::Segment { delta, .. } => delta.norm(),
            Path::Circle { radius, .. } => 2.0 * PI * radius,
        }
    }
}

/// One collocation step over `[t, t+h]` with node data `(z'(t_i), q(z(t_i)))`.
fn gauss_step(h: f64, nodes: &[(Complex64, Complex64); STAGES]) -> Mat2 {
    let tab = tableau();
    const N: usize = 2 * STAGES;
    let mut a = [C0; N * N];
    let mut rhs = [C0; N * 2];
    for i in 0..STAGES {
        let (w, q) = nodes[i];
        let (f01, f10) = (w, w * q);
        for j in 0..STAGES {
            let s = h * tab.a[i][j];
            // block (i,j) = δ_ij I - s F_i,  F_i = [[0, f01], [f10, 0]]
            let r0 = 2 * i;
            let c0 = 2 * j;
            a[r0 * N + c0 + 1] = -s * f01;
            a[(r0 + 1) * N + c0] = -s * f10;
            if i == j {
                a[r0 * N + c0] = C1;
                a[(r0 + 1) * N + c0 + 1] = C1;
            }
        }
        rhs[(2 * i) * 2 + 1] = f01;
        rhs[(2 * i + 1) * 2] = f10;
    }
    solve_in_place(&mut a, &mut rhs, N, 2);
    let mut r = Mat2::IDENTITY;
    for i in 0..STAGES {
        let bh = h * tab.b[i];
        for row in 0..2 {
            for col in 0..2 {
                r.0[row][col] += bh * rhs[(2 * i + row) * 2 + col];
            }
        }
    }
    r
}

fn sample_nodes<F>(path: &Path, t: f64, h: f64, q: &F) -> Result<[(Complex64, Complex64); STAGES]>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    let tab = tableau();
    let mut out = [(C0, C0); STAGES];
    for (o, &ci) in out.iter_mut().zip(&tab.c) {
        let ti = t + h * ci;
        *o = (path.velocity(ti), q(path.point(ti))?);
    }
    Ok(out)
}

/// Options for the adaptive propagator.
#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    /// Local error tolerance per step, relative to `max(1, |R|)`.
    pub tol: f64,
    /// Initial step in path-length units.
    pub h0: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self { tol: 1e-12, h0: 0.05, max_steps: 20_000 }
    }
}

/// Transfer matrix `R` with `(y, y')(z(1)) = R (y, y')(z(0))`, plus the accepted
/// step breakpoints in `t`.
pub fn transfer<F>(path: &Path, q: &F, opts: &OdeOptions) -> Result<(Mat2, Vec<f64>)>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    let len = path.length().max(1e-300);
    let mut h = (opts.h0 / len).min(1.0);
    let mut t = 0.0;
    let mut acc = Mat2::IDENTITY;
    let mut breaks = vec![0.0];
    let mut steps = 0usize;
    while t < 1.0 {
        steps += 1;
        if steps > opts.max_steps {
            return Err(Error::IntegratorFailure(format!("step budget exhausted at t = {t:.6}")));
        }
        if t + h > 1.0 {
            h = 1.0 - t;
        }
        let full = gauss_step(h, &sample_nodes(path, t, h, q)?);
        let hh = h / 2.0;
        let first = gauss_step(hh, &sample_nodes(path, t, hh, q)?);
        let second = gauss_step(hh, &sample_nodes(path, t + hh, hh, q)?);
        let fine = second * first;
        let err = (fine - full).max_abs() / fine.max_abs().max(1.0);
        if !err.is_finite() {
            return Err(Error::IntegratorFailure("non-finite step".into()));
        }
        if err <= opts.tol {
            acc = fine * acc;
            t += h;
            if 1.0 - t < 1e-14 {
                t = 1.0;
            }
            breaks.push(t.min(1.0));
        }
        let fac = if err == 0.0 { 3.0 } else { 0.9 * (opts.tol / err).powf(1.0 / 13.0) };
        h *= fac.clamp(0.2, 3.0);
        if h * len < 1e-12 {
            return Err(Error::IntegratorFailure(format!("step underflow at t = {t:.6}")));
        }
    }
    Ok((acc, breaks))
}

/// Potentials of the form `q(z) = f0(z) + λ f1(z) + μ`, sampled once on a fixed
/// mesh so that many `(λ, μ)` can be propagated cheaply.
#[derive(Debug, Clone)]
pub struct SampledPencil {
    steps: Vec<PencilStep>,
}

#[derive(Debug, Clone)]
struct PencilStep {
    h: f64,
    w: [Complex64; STAGES],
    f0: [Complex64; STAGES],
    f1: [Complex64; STAGES],
}

impl SampledPencil {
    /// Samples `f = (f0, f1)` at the collocation nodes of each mesh interval.
    pub fn new<F>(path: &Path, breaks: &[f64], f: &F) -> Result<Self>
    where
        F: Fn(Complex64) -> Result<(Complex64, Complex64)>,
    {
        let tab = tableau();
        let mut steps = Vec::with_capacity(breaks.len());
        for win in breaks.windows(2) {
            let (t, h) = (win[0], win[1] - win[0]);
            if h <= 0.0 {
                continue;
            }
            let mut st = PencilStep { h, w: [C0; STAGES], f0: [C0; STAGES], f1: [C0; STAGES] };
            for i in 0..STAGES {
                let ti = t + h * tab.c[i];
                st.w[i] = path.velocity(ti);
                let (a, b) = f(path.point(ti))?;
                st.f0[i] = a;
                st.f1[i] = b;
            }
            steps.push(st);
        }
        Ok(Self { steps })
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn transfer(&self, lambda: Complex64, mu: Complex64) -> Mat2 {
        let mut acc = Mat2::IDENTITY;
        let mut nodes = [(C0, C0); STAGES];
        for st in &self.steps {
            for (i, n) in nodes.iter_mut().enumerate() {
                *n = (st.w[i], st.f0[i] + lambda * st.f1[i] + mu);
            }
            acc = gauss_step(st.h, &nodes) * acc;
        }
        acc
    }
}

/// Sorted union of breakpoint sets, with near-duplicates merged.
pub fn merge_breaks(sets: &[Vec<f64>]) -> Vec<f64> {
    let mut all: Vec<f64> = sets.iter().flatten().copied().collect();
    all.sort_by(|a, b| a.partial_cmp(b).unwrap());
    all.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    all
}

/// Inserts the midpoint of every interval.
pub fn bisect_breaks(breaks: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(2 * breaks.len());
    for w in breaks.windows(2) {
        out.push(w[0]);
        out.push(0.5 * (w[0] + w[1]));
    }
    if let Some(&last) = breaks.last() {
        out.push(last);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tableau_is_consistent() {
        let tab = tableau();
        let sb: f64 = tab.b.iter().sum();
        assert!((sb - 1.0).abs() < 1e-15);
        for i in 0..STAGES {
            let row: f64 = tab.a[i].iter().sum();
            assert!((row - tab.c[i]).abs() < 1e-14);
        }
    }

    #[test]
    fn constant_potential_matches_exponential() {
        // y'' = k² y over a unit segment: R = [[cosh k, sinh k / k], [k sinh k, cosh k]]
        let k = Complex64::new(1.3, 0.4);
        let path = Path::Segment { start: C0, delta: C1 };
        let q = |_z: Complex64| Ok(k * k);
        let (r, _) = transfer(&path, &q, &OdeOptions::default()).unwrap();
        let want = Mat2::new(k.cosh(), k.sinh() / k, k * k.sinh(), k.cosh());
        assert!((r - want).max_abs() < 1e-12);
        assert!((r.det() - 1.0).norm() < 1e-13);
    }

    #[test]
    fn pencil_agrees_with_adaptive() {
        let path = Path::Segment { start: Complex64::new(0.1, 0.2), delta: Complex64::new(1.0, 0.3) };
        let f = |z: Complex64| Ok((z * z, z.sin()));
        let (lam, mu) = (Complex64::new(0.7, -0.2), Complex64::new(-1.0, 0.5));
        let q = |z: Complex64| Ok(z * z + lam * z.sin() + mu);
        let (r, breaks) = transfer(&path, &q, &OdeOptions::default()).unwrap();
        let pencil = SampledPencil::new(&path, &breaks, &f).unwrap();
        assert!((pencil.transfer(lam, mu) - r).max_abs() < 1e-11);
    }
}
