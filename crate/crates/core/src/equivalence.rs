//! Correspondence between the generalized Lamé equation on the non-even
//! branch and the classical Lamé equation: `B̃ = T² - 2℘(p)` preserves
//! monodromy traces, and letting `p` tend to a half period produces a limit
//! equation whose traces differ by fixed signs.

use crate::elliptic::Torus;
use crate::monodromy::{self, Branch, Equation, LameParams, MonodromyOptions};
use crate::quad;
use crate::{Complex64, Error, Result, C0};
use serde::Serialize;

/// Equivalent Lamé parameter of a non-even parameter `T`.
pub fn btilde_of(torus: &Torus, p: Complex64, t: Complex64) -> Result<Complex64> {
    Ok(t * t - 2.0 * torus.wp(p)?)
}

/// The two preimages `±T` of a Lamé parameter.
pub fn t_of_btilde(torus: &Torus, p: Complex64, btilde: Complex64) -> Result<[Complex64; 2]> {
    let t = (btilde + 2.0 * torus.wp(p)?).sqrt();
    Ok([t, -t])
}

/// Discriminants of both equations at corresponding parameters.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TraceComparison {
    pub t: Complex64,
    pub btilde: Complex64,
    pub delta_gle: [Complex64; 2],
    pub delta_lame: [Complex64; 2],
    pub max_abs_diff: f64,
}

pub fn verify_trace_equivalence(torus: &Torus, p: Complex64, t: Complex64, opts: &MonodromyOptions) -> Result<TraceComparison> {
    let g = monodromy::make_apparent(torus, p, Branch::NonEven(t))?;
    let btilde = g.btilde().expect("non-even");
    let l = LameParams { torus: torus.clone(), btilde };
    let mg = monodromy::integrate_monodromy(&g, opts)?;
    let ml = monodromy::integrate_monodromy(&l, &MonodromyOptions { base_point: None, ..*opts })?;
    let dg = [mg.discriminant(0), mg.discriminant(1)];
    let dl = [ml.discriminant(0), ml.discriminant(1)];
    let max_abs_diff = (dg[0] - dl[0]).norm().max((dg[1] - dl[1]).norm());
    Ok(TraceComparison { t, btilde, delta_gle: dg, delta_lame: dl, max_abs_diff })
}

/// Order of vanishing of `f` at `t0` by the argument principle on a circle.
pub fn order_by_argument_principle<F>(f: &F, t0: Complex64, radius: f64, n: usize) -> Result<f64>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    let vals: Vec<Complex64> =
        (0..n).map(|k| f(t0 + Complex64::from_polar(radius, 2.0 * std::f64::consts::PI * k as f64 / n as f64))).collect::<Result<_>>()?;
    Ok(quad::winding_number(&vals))
}

/// `d_j(T0) = ord_{T0}(Δ_j² - 1)` for the non-even family at `p`.
pub fn gle_discriminant_order(torus: &Torus, p: Complex64, j: usize, t0: Complex64, radius: f64, opts: &MonodromyOptions) -> Result<f64> {
    let probe = monodromy::make_apparent(torus, p, Branch::NonEven(t0))?;
    let (z0, _) = monodromy::base_point(&probe, opts, &[])?;
    let o = MonodromyOptions { base_point: Some(z0), ..*opts };
    let f = |t: Complex64| -> Result<Complex64> {
        let g = monodromy::make_apparent(torus, p, Branch::NonEven(t))?;
        let d = monodromy::integrate_monodromy(&g, &o)?.discriminant(j);
        Ok(d * d - 1.0)
    };
    order_by_argument_principle(&f, t0, radius, 64)
}

/// `d̃_j(B0)` for the Lamé family.
pub fn lame_discriminant_order(torus: &Torus, j: usize, b0: Complex64, radius: f64, opts: &MonodromyOptions) -> Result<f64> {
    let f = |b: Complex64| -> Result<Complex64> {
        let l = LameParams { torus: torus.clone(), btilde: b };
        let d = monodromy::integrate_monodromy(&l, opts)?.discriminant(j);
        Ok(d * d - 1.0)
    };
    order_by_argument_principle(&f, b0, radius, 64)
}

/// Limit of the non-even equation as `p → ω_k/2` (`k = 1, 2, 3`):
///
/// ```text
/// q_k(z) = 2(℘(z) + ℘(z - ω_k/2)) + 2T̃(ζ(z - ω_k/2) - ζ(z)) + T̃² + η_k T̃ - e_k,
/// T̃² = B̃ + 2e_k
/// ```
#[derive(Debug, Clone)]
pub struct LimitEquation {
    pub torus: Torus,
    pub k: usize,
    pub t: Complex64,
    pub b: Complex64,
}

impl LimitEquation {
    /// `k ∈ {1, 2, 3}` indexes `ω = (1, τ, 1+τ)`.
    pub fn new(torus: &Torus, k: usize, t: Complex64) -> Result<Self> {
        if !(1..=3).contains(&k) {
            return Err(Error::Config(format!("half-period index {k} not in 1..=3")));
        }
        let (e, eta) = (torus.e()[k - 1], torus.etas()[k - 1]);
        Ok(Self { torus: torus.clone(), k, t, b: t * t + eta * t - e })
    }
    fn half(&self) -> Complex64 {
        self.torus.half_period(self.k - 1)
    }
}

impl Equation for LimitEquation {
    fn torus(&self) -> &Torus {
        &self.torus
    }
    fn potential(&self, z: Complex64) -> Result<Complex64> {
        let a = self.torus.eval(z)?;
        let b = self.torus.eval(z - self.half())?;
        Ok(2.0 * (a.wp + b.wp) + 2.0 * self.t * (b.zeta - a.zeta) + self.b)
    }
    fn singular_points(&self) -> Vec<Complex64> {
        vec![C0, self.half()]
    }
    fn leading_coefficient(&self, _point: Complex64) -> f64 {
        2.0
    }
    fn pencil(&self, z: Complex64) -> Result<(Complex64, Complex64)> {
        Ok((self.potential(z)?, C0))
    }
    fn pencil_params(&self) -> (Complex64, Complex64) {
        (C0, C0)
    }
}

/// Trace signs `ε_j` with `tr M_j^{(k)} = ε_j tr M_j`, traces of the
/// non-even equation taken in the half-period class.
///
/// The factor `σ(z+p)σ(z-p)` under the square root tends to
/// `-e^{η_k z} σ(z - ω_k/2)²`, so the multipliers pick up
/// `exp((η_j ω_k - η_k ω_j)/2) = ±1` by the Legendre relation.
pub fn limit_signs(k: usize) -> [f64; 2] {
    match k {
        1 => [1.0, -1.0],
        2 => [-1.0, 1.0],
        3 => [-1.0, -1.0],
        _ => [1.0, 1.0],
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LimitStep {
    pub p: Complex64,
    pub t: Complex64,
    pub delta: [Complex64; 2],
    /// `max_j |ε_j Δ_j(p) - Δ_j^{(k)}|`
    pub trace_error: f64,
    /// Sup of `|q(z; p) - q_k(z)|` over fixed probe points.
    pub potential_error: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct LimitReport {
    pub k: usize,
    pub btilde: Complex64,
    pub limit_delta: [Complex64; 2],
    pub signs: [f64; 2],
    pub steps: Vec<LimitStep>,
}

/// Follows `p_m = ω_k/2 + 2^{-m} d0` (`ω_0/2 := 0`) for `m = 1..=terms`,
/// continuing `T(p) = sqrt(B̃ + 2℘(p))` by continuity.
pub fn limit_sequence(
    torus: &Torus,
    k: usize,
    btilde: Complex64,
    d0: Complex64,
    terms: usize,
    opts: &MonodromyOptions,
) -> Result<LimitReport> {
    let center = if k == 0 { C0 } else { torus.half_period(k - 1) };
    let signs = limit_signs(k);
    let probes: Vec<Complex64> = [(0.31, 0.23), (0.67, 0.41), (0.19, 0.77)].iter().map(|&(x, y)| torus.from_coords(x, y)).collect();
    let mut t_prev: Option<Complex64> = None;
    let mut raw = Vec::with_capacity(terms);
    for m in 1..=terms {
        let p = center + d0 / (1u64 << m) as f64;
        let root = (btilde + 2.0 * torus.wp(p)?).sqrt();
        let t = match t_prev {
            Some(prev) if (root + prev).norm() < (root - prev).norm() => -root,
            _ => root,
        };
        t_prev = Some(t);
        let g = monodromy::make_apparent(torus, p, Branch::NonEven(t))?;
        let mono = monodromy::integrate_monodromy(&g, opts)?;
        raw.push((p, t, g, [mono.discriminant(0), mono.discriminant(1)]));
    }
    let t_last = raw.last().map(|r| r.1).unwrap_or(C0);
    let limit: Box<dyn Equation> = if k == 0 {
        Box::new(LameParams { torus: torus.clone(), btilde })
    } else {
        let root = (btilde + 2.0 * torus.e()[k - 1]).sqrt();
        let tl = if (root - t_last).norm() <= (root + t_last).norm() { root } else { -root };
        Box::new(LimitEquation::new(torus, k, tl)?)
    };
    let lm = monodromy::integrate_monodromy(limit.as_ref(), opts)?;
    let limit_delta = [lm.discriminant(0), lm.discriminant(1)];
    let mut steps = Vec::with_capacity(terms);
    for (p, t, g, delta) in raw {
        let trace_error = (0..2).map(|j| (signs[j] * delta[j] - limit_delta[j]).norm()).fold(0.0, f64::max);
        let mut potential_error: f64 = 0.0;
        for &z in &probes {
            potential_error = potential_error.max((g.potential(z)? - limit.potential(z)?).norm());
        }
        steps.push(LimitStep { p, t, delta, trace_error, potential_error });
    }
    Ok(LimitReport { k, btilde, limit_delta, signs, steps })
}

/// Canonical `(r, s)` of the non-even equation at `T` (completely reducible case).
pub fn canonical_rs(torus: &Torus, p: Complex64, t: Complex64, opts: &MonodromyOptions) -> Result<(Complex64, Complex64)> {
    let g = monodromy::make_apparent(torus, p, Branch::NonEven(t))?;
    let mono = monodromy::integrate_monodromy(&g, opts)?;
    let q = crate::spectral::spectral_polynomial(&g)?;
    match monodromy::classify(&g, &mono, q, g.btilde(), &Default::default())? {
        monodromy::MonodromyClass::CompletelyReducible { r, s } => Ok((r, s)),
        _ => Err(Error::Degenerate("monodromy is not completely reducible".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::C1;

    #[test]
    fn preimages_map_back() {
        let t = Torus::new(Complex64::new(0.1, 1.2)).unwrap();
        let p = Complex64::new(0.3, 0.2);
        let b = Complex64::new(-0.7, 1.9);
        for x in t_of_btilde(&t, p, b).unwrap() {
            assert!((btilde_of(&t, p, x).unwrap() - b).norm() < 1e-12);
        }
    }

    #[test]
    fn sign_table_products() {
        let t = Torus::new(Complex64::new(0.1, 1.1)).unwrap();
        let (w, eta) = ([C1, t.tau(), C1 + t.tau()], t.etas());
        for k in 1..=3 {
            for j in 0..2 {
                let f = ((eta[j] * w[k - 1] - eta[k - 1] * w[j]) / 2.0).exp();
                assert!((f - limit_signs(k)[j]).norm() < 1e-12, "k={k} j={j} {f}");
            }
        }
    }
}
