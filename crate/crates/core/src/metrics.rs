//! Premodular zeros, the exceptional point `p*` and blow-up sets of the
//! curvature equation with cone points at `0, ±p`.
//!
//! `σ = r + sτ` always denotes the sum of the two blow-up points here, never
//! the Weierstrass sigma function.

use crate::elliptic::Torus;
use crate::{Complex64, Error, Result, C0};
use serde::Serialize;

/// `(r, s)` in the open triangle `0 < r, s < 1/2 < r + s`.
pub fn in_triangle(r: f64, s: f64) -> bool {
    r > 0.0 && s > 0.0 && r < 0.5 && s < 0.5 && r + s > 0.5
}

/// `τ` in `F0 = {0 ≤ Re τ ≤ 1, |τ - 1/2| ≥ 1/2, Im τ > 0}`, up to `tol`.
pub fn in_f0(tau: Complex64, tol: f64) -> bool {
    tau.im > 0.0 && tau.re >= -tol && tau.re <= 1.0 + tol && (tau - 0.5).norm() >= 0.5 - tol
}

/// `Z(r, s, τ)` for real `r, s`.
pub fn premodular(r: f64, s: f64, tau: Complex64) -> Result<Complex64> {
    Torus::new(tau)?.premodular(r.into(), s.into())
}

#[derive(Debug, Clone, Serialize)]
pub struct PremodularZero {
    pub r: f64,
    pub s: f64,
    pub tau: Complex64,
    pub residual: f64,
    /// `|Z|` after each Newton step.
    pub trail: Vec<f64>,
}

/// Coarse minimiser of `|Z(r, s, ·)|` over a grid in `F0`.
fn scan_f0(r: f64, s: f64) -> Complex64 {
    let mut best = (Complex64::new(0.5, 1.0), f64::INFINITY);
    for i in 0..=20 {
        for k in 0..40 {
            let tau = Complex64::new(i as f64 / 20.0, 0.05 + 0.075 * k as f64);
            if !in_f0(tau, 0.0) {
                continue;
            }
            if let Ok(z) = premodular(r, s, tau) {
                if z.norm() < best.1 {
                    best = (tau, z.norm());
                }
            }
        }
    }
    best.0
}

/// Zero `τ ∈ F0` of `Z(r, s, ·)` by Newton with a central-difference slope.
pub fn premodular_zero_tau(r: f64, s: f64, guess: Option<Complex64>) -> Result<PremodularZero> {
    if !in_triangle(r, s) {
        return Err(Error::OutsideDomain(format!("(r, s) = ({r}, {s}) is outside 0 < r, s < 1/2 < r + s")));
    }
    let mut tau = match guess {
        Some(t) => {
            crate::ensure_finite("tau guess", t)?;
            t
        }
        None => scan_f0(r, s),
    };
    let h = 1e-6;
    let mut z = premodular(r, s, tau)?;
    let mut trail = vec![z.norm()];
    for _ in 0..60 {
        if z.norm() < 1e-13 {
            break;
        }
        let dz = (premodular(r, s, tau + h)? - premodular(r, s, tau - h)?) / (2.0 * h);
        let mut step = z / dz;
        // damp until the residual drops and the iterate stays in the upper half-plane
        let mut accepted = false;
        for _ in 0..30 {
            let cand = tau - step;
            if cand.im > 0.05 {
                if let Ok(zc) = premodular(r, s, cand) {
                    if zc.norm() < z.norm() {
                        tau = cand;
                        z = zc;
                        accepted = true;
                        break;
                    }
                }
            }
            step *= 0.5;
        }
        trail.push(z.norm());
        if !accepted || step.norm() < 1e-15 {
            break;
        }
    }
    let residual = z.norm();
    if residual > 1e-10 {
        return Err(Error::NoConvergence { what: format!("Z({r}, {s}, τ) = 0, trail {trail:?}"), residual });
    }
    if !in_f0(tau, 1e-9) {
        return Err(Error::NoConvergence { what: format!("zero τ = {tau} left F0"), residual });
    }
    Ok(PremodularZero { r, s, tau, residual, trail })
}

/// The exceptional point with both closed forms of `℘(p*)`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PStar {
    pub p: Complex64,
    /// `-℘(σ)/2`
    pub wp_exception: Complex64,
    /// The rational expression in `Z, ℘(σ), ℘'(σ)`, evaluated at the computed `Z`.
    pub wp_rational: Complex64,
    pub agreement: f64,
}

/// `℘(p) = ℘ + (3℘'Z² + (12℘² - g2)Z + 3℘℘') / (2(Z³ - 3℘Z - ℘'))` at `σ = r + sτ`.
pub fn wp_rational(torus: &Torus, r: f64, s: f64) -> Result<Complex64> {
    let sigma = Complex64::new(r, 0.0) + s * torus.tau();
    let w = torus.wp_all(sigma)?;
    let z = torus.premodular(r.into(), s.into())?;
    let (p, dp) = (w.wp, w.dwp);
    let num = 3.0 * dp * z * z + (12.0 * p * p - torus.g2()) * z + 3.0 * p * dp;
    let den = 2.0 * (z * z * z - 3.0 * p * z - dp);
    Ok(p + num / den)
}

pub fn p_star(zero: &PremodularZero) -> Result<PStar> {
    let torus = Torus::new(zero.tau)?;
    let sigma = Complex64::new(zero.r, 0.0) + zero.s * zero.tau;
    let wp_exception = -0.5 * torus.wp(sigma)?;
    let wp_rational = wp_rational(&torus, zero.r, zero.s)?;
    let p = torus.wp_inverse(wp_exception)?;
    Ok(PStar { p, wp_exception, wp_rational, agreement: (wp_exception - wp_rational).norm() })
}

/// One blow-up configuration `{a1, a2}` with `a1 + a2 ≡ σ`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BlowupPair {
    /// `{℘(a1), ℘(a2)} = {℘(p) ± Δ}`
    pub wp_values: [Complex64; 2],
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<[Complex64; 2]>,
    /// `|a1 + a2 - σ|` modulo the lattice, when resolved.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sum_defect: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residuals: Option<GreenResiduals>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BlowupConfig {
    pub sigma: Complex64,
    pub p: Complex64,
    pub delta_plus: Complex64,
    pub delta_minus: Complex64,
    /// As `β → +∞`.
    pub plus: BlowupPair,
    /// As `β → -∞`.
    pub minus: BlowupPair,
    /// `|Δ+ - Δ-|` below tolerance: the labels of the two sets are not determined.
    pub ambiguous: bool,
}

/// `Δ± = sqrt(g2 + 4[℘p² - 2℘σ℘p - 2℘σ² ± ℘'σ sqrt(2℘p + ℘σ)]) / 2`, principal roots.
pub fn blowup_deltas(torus: &Torus, wp_p: Complex64, sigma: Complex64) -> Result<(Complex64, Complex64)> {
    let w = torus.wp_all(sigma)?;
    let inner = (2.0 * wp_p + w.wp).sqrt();
    let base = wp_p * wp_p - 2.0 * w.wp * wp_p - 2.0 * w.wp * w.wp;
    let d = |sign: f64| 0.5 * (torus.g2() + 4.0 * (base + sign * w.dwp * inner)).sqrt();
    Ok((d(1.0), d(-1.0)))
}

/// Blow-up sets of the family with monodromy data `(r, s)` at singularity `p`.
pub fn blowup_sets(torus: &Torus, p: Complex64, r: f64, s: f64) -> Result<BlowupConfig> {
    let sigma = Complex64::new(r, 0.0) + s * torus.tau();
    let z = torus.premodular(r.into(), s.into())?;
    if z.norm() > 1e-7 {
        return Err(Error::OutsideDomain(format!("Z(r, s, τ) = {z:e} is not zero")));
    }
    let scale = 1.0f64.min(torus.tau().norm());
    if torus.dist_to_lattice(2.0 * p - sigma) < 1e-9 * scale || torus.dist_to_lattice(2.0 * p + sigma) < 1e-9 * scale {
        return Err(Error::Degenerate("2p ≡ ±σ: the family blows up at the singularity".into()));
    }
    let wp_p = torus.wp(p)?;
    let (dp, dm) = blowup_deltas(torus, wp_p, sigma)?;
    let pair = |d: Complex64| -> BlowupPair {
        let wp_values = [wp_p + d, wp_p - d];
        match resolve_pair(torus, sigma, wp_values) {
            Some(a) => {
                let sum_defect = torus.dist_to_lattice(a[0] + a[1] - sigma);
                let residuals = green_critical_residual(torus, p, a[0], a[1]).ok();
                BlowupPair { wp_values, a: Some(a), sum_defect: Some(sum_defect), residuals }
            }
            None => BlowupPair { wp_values, a: None, sum_defect: None, residuals: None },
        }
    };
    Ok(BlowupConfig {
        sigma,
        p,
        delta_plus: dp,
        delta_minus: dm,
        plus: pair(dp),
        minus: pair(dm),
        ambiguous: (dp - dm).norm() < 1e-9 * (1.0 + dp.norm()),
    })
}

/// Points `a1, a2` with `℘(a_i) = x_i` and `a1 + a2 ≡ σ`, if the signs can be
/// matched within `1e-7`.
fn resolve_pair(torus: &Torus, sigma: Complex64, x: [Complex64; 2]) -> Option<[Complex64; 2]> {
    let a1 = torus.wp_inverse(x[0]).ok()?;
    let a2 = torus.wp_inverse(x[1]).ok()?;
    let mut best: Option<([Complex64; 2], f64)> = None;
    for s1 in [1.0, -1.0] {
        for s2 in [1.0, -1.0] {
            let d = torus.dist_to_lattice(s1 * a1 + s2 * a2 - sigma);
            if best.as_ref().is_none_or(|b| d < b.1) {
                best = Some(([s1 * a1, s2 * a2], d));
            }
        }
    }
    best.filter(|b| b.1 < 1e-7 * (1.0 + sigma.norm())).map(|b| b.0)
}

/// Residuals of the two critical-point equations of the multiple Green function.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GreenResiduals {
    /// First equation, right side `-2Z(a1 + a2)`, relative to its largest term.
    pub res22: f64,
    /// Second equation, relative to its largest term.
    pub res23: f64,
    /// Determinant of the linear system in `(℘'(a1), ℘'(a2))`.
    pub determinant: Complex64,
    /// `(x1 + x2 - 2℘(p))² / (2(x1 - ℘(p))(x2 - ℘(p))(x1 - x2)²)`
    pub determinant_closed_form: Complex64,
}

/// Evaluates the critical-point equations at `(a1, a2)`.
pub fn green_critical_residual(torus: &Torus, p: Complex64, a1: Complex64, a2: Complex64) -> Result<GreenResiduals> {
    let scale = 1e-7 * 1.0f64.min(torus.tau().norm());
    for a in [a1, a2] {
        let bad = [p, -p, C0, torus.half_period(0), torus.half_period(1), torus.half_period(2)]
            .iter()
            .any(|&b| torus.dist_to_lattice(a - b) < scale);
        if bad {
            return Err(Error::OutsideDomain(format!("blow-up point {a} coincides with a singularity or half period")));
        }
    }
    if torus.dist_to_lattice(a1 - a2) < scale || torus.dist_to_lattice(a1 + a2) < scale {
        return Err(Error::OutsideDomain("blow-up points satisfy a1 = ±a2".into()));
    }
    let wp_p = torus.wp(p)?;
    let (w1, w2) = (torus.wp_all(a1)?, torus.wp_all(a2)?);
    let (x1, x2, y1, y2) = (w1.wp, w2.wp, w1.dwp, w2.dwp);
    let z = torus.premodular_at(a1 + a2)?;
    let t1 = y1 / (2.0 * (x1 - wp_p));
    let t2 = y2 / (2.0 * (x2 - wp_p));
    let rel = |terms: &[Complex64]| {
        let sum: Complex64 = terms.iter().sum();
        sum.norm() / terms.iter().map(|t| t.norm()).fold(1.0, f64::max)
    };
    let res22 = rel(&[t1, t2, -(y1 - y2) / (x1 - x2), 2.0 * z]);
    let res23 = rel(&[t1, -t2, -(y1 + y2) / (x1 - x2)]);
    let ca = 1.0 / (2.0 * (x1 - wp_p)) - 1.0 / (x1 - x2);
    let cb = 1.0 / (2.0 * (x2 - wp_p)) + 1.0 / (x1 - x2);
    let s = x1 + x2 - 2.0 * wp_p;
    Ok(GreenResiduals {
        res22,
        res23,
        determinant: -2.0 * ca * cb,
        determinant_closed_form: s * s / (2.0 * (x1 - wp_p) * (x2 - wp_p) * (x1 - x2) * (x1 - x2)),
    })
}

/// `{(-℘(σ) ± sqrt(g2 - 3℘(σ)²)) / 2}`, the common blow-up set at `p = p*`.
pub fn even_blowup_set(torus: &Torus, sigma: Complex64) -> Result<[Complex64; 2]> {
    let w = torus.wp(sigma)?;
    let root = (torus.g2() - 3.0 * w * w).sqrt();
    Ok([0.5 * (-w + root), 0.5 * (-w - root)])
}

/// Blow-up at the singularity: `2p ≡ ±σ`, with the parameter identities that follow.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SingularityCheck {
    pub blows_up: bool,
    /// `|T² - ℘(2p) - 2℘(p)|` with `T² = ℘(σ) + 2℘(p)`, when `blows_up`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_squared_residual: Option<f64>,
    /// `|℘(2p) + 2℘(p) - ℘''(p)²/(4℘'(p)²)|`, when `blows_up`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub duplication_residual: Option<f64>,
}

pub fn blowup_at_singularity_check(torus: &Torus, r: f64, s: f64, p: Complex64) -> Result<SingularityCheck> {
    let z = torus.premodular(r.into(), s.into())?;
    if z.norm() > 1e-7 {
        return Err(Error::OutsideDomain(format!("Z(r, s, τ) = {z:e} is not zero")));
    }
    let sigma = Complex64::new(r, 0.0) + s * torus.tau();
    let tol = 1e-8 * 1.0f64.min(torus.tau().norm());
    let blows_up = torus.dist_to_lattice(2.0 * p - sigma) < tol || torus.dist_to_lattice(2.0 * p + sigma) < tol;
    if !blows_up {
        return Ok(SingularityCheck { blows_up, t_squared_residual: None, duplication_residual: None });
    }
    let w = torus.wp_all(p)?;
    let w2p = torus.wp(2.0 * p)?;
    let t2 = torus.wp(sigma)? + 2.0 * w.wp;
    let dup = w.ddwp * w.ddwp / (4.0 * w.dwp * w.dwp);
    Ok(SingularityCheck {
        blows_up,
        t_squared_residual: Some((t2 - w2p - 2.0 * w.wp).norm()),
        duplication_residual: Some((w2p + 2.0 * w.wp - dup).norm()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rho() -> Complex64 {
        Complex64::from_polar(1.0, std::f64::consts::PI / 3.0)
    }

    #[test]
    fn triangle_and_f0() {
        assert!(in_triangle(0.3, 0.35));
        assert!(!in_triangle(0.1, 0.1));
        assert!(in_f0(rho(), 0.0));
        assert!(!in_f0(Complex64::new(0.5, 0.3), 0.0));
    }

    #[test]
    fn half_periods_are_trivial_critical_points() {
        for tau in [Complex64::new(0.0, 1.0), Complex64::new(0.3, 0.9), rho()] {
            for (r, s) in [(0.5, 0.0), (0.0, 0.5), (0.5, 0.5)] {
                assert!(premodular(r, s, tau).unwrap().norm() < 1e-11);
            }
        }
    }

    #[test]
    fn determinant_closed_form_matches() {
        let t = Torus::new(Complex64::new(0.1, 1.2)).unwrap();
        let g = green_critical_residual(&t, Complex64::new(0.21, 0.33), Complex64::new(0.37, 0.12), Complex64::new(0.11, 0.71)).unwrap();
        assert!((g.determinant - g.determinant_closed_form).norm() < 1e-10 * g.determinant.norm());
        assert!(g.res22 > 1e-3 || g.res23 > 1e-3);
    }

    #[test]
    fn rejects_singular_configurations() {
        let t = Torus::new(Complex64::new(0.0, 1.0)).unwrap();
        let p = Complex64::new(0.2, 0.3);
        assert!(green_critical_residual(&t, p, p, Complex64::new(0.4, 0.1)).is_err());
        assert!(green_critical_residual(&t, p, Complex64::new(0.5, 0.0), Complex64::new(0.4, 0.1)).is_err());
        let a = Complex64::new(0.31, 0.17);
        assert!(green_critical_residual(&t, p, a, -a).is_err());
    }
}
