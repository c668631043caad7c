//! Weierstrass elliptic functions for the lattice `Λ = Z + Zτ`.
//!
//! Everything is evaluated through the Jacobi theta function `θ1(v | τ)` with
//! nome `q = e^{iπτ}`:
//!
//! ```text
//! σ(z) = exp(η1 z²/2) θ1(πz) / (π θ1'(0))
//! ζ(z) = η1 z + π θ1'(πz)/θ1(πz)
//! ℘(z) = -ζ'(z)
//! η1   = -π² θ1'''(0) / (3 θ1'(0)),      η2 = τ η1 - 2πi
//! ```
//!
//! Arguments are first reduced to the centred cell `|x|,|y| <= 1/2` of
//! `z = x + yτ`, so the theta series converges like `|q|^{n²}`. The
//! quasi-periodic factors of ζ and σ are restored afterwards. Accuracy is
//! guaranteed for `|q| < 0.9`.

use crate::{ensure_finite, Complex64, Error, Result, C0, CI};
use serde::Serialize;
use std::f64::consts::PI;

const MAX_TERMS: usize = 64;
const TERM_CUTOFF: f64 = 1e-17;
/// Arguments closer than this to a lattice point are rejected as poles.
pub const DEFAULT_POLE_CUTOFF: f64 = 1e-8;
/// Largest admissible nome modulus.
pub const MAX_NOME: f64 = 0.9;

/// ℘ and its first two derivatives at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WpValues {
    pub wp: Complex64,
    pub dwp: Complex64,
    pub ddwp: Complex64,
}

/// ℘, ℘' and ζ at one point, sharing a single theta evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Weierstrass {
    pub wp: Complex64,
    pub dwp: Complex64,
    pub zeta: Complex64,
}

/// A flat torus `C/Λτ` together with its invariants.
#[derive(Debug, Clone)]
pub struct Torus {
    tau: Complex64,
    /// `(-1)^n q^{(n+1/2)²}`
    coef: Vec<Complex64>,
    eta1: Complex64,
    eta2: Complex64,
    e: [Complex64; 3],
    g2: Complex64,
    g3: Complex64,
    pole_cutoff: f64,
}

/// Invariants of a torus, as reported by the `torus` command.
#[derive(Debug, Clone, Serialize)]
pub struct TorusSummary {
    pub tau: Complex64,
    pub nome_modulus: f64,
    pub g2: Complex64,
    pub g3: Complex64,
    pub e: [Complex64; 3],
    pub eta1: Complex64,
    pub eta2: Complex64,
    pub legendre_residual: f64,
}

struct ThetaLog {
    /// θ1'/θ1
    l0: Complex64,
    /// (θ1'/θ1)'
    l1: Complex64,
    /// (θ1'/θ1)''
    l2: Complex64,
}

impl Torus {
    pub fn new(tau: Complex64) -> Result<Self> {
        ensure_finite("tau", tau)?;
        if tau.im <= 0.0 {
            return Err(Error::InvalidTau(tau.im));
        }
        let nome = (-PI * tau.im).exp();
        if nome >= MAX_NOME {
            return Err(Error::NomeTooLarge(nome));
        }
        let ipt = CI * PI * tau;
        let mut coef = Vec::with_capacity(MAX_TERMS);
        for n in 0..MAX_TERMS {
            let h = n as f64 + 0.5;
            let c = (ipt * h * h).exp();
            if c.norm() < 1e-300 {
                break;
            }
            coef.push(if n % 2 == 0 { c } else { -c });
        }
        // θ1'(0), θ1'''(0)
        let mut d1 = C0;
        let mut d3 = C0;
        for (n, c) in coef.iter().enumerate() {
            let k = (2 * n + 1) as f64;
            d1 += c * k;
            d3 -= c * k * k * k;
        }
        let eta1 = -PI * PI * d3 / (3.0 * d1);
        let eta2 = tau * eta1 - 2.0 * PI * CI;

        // theta constants
        let mut th2 = C0;
        for (n, c) in coef.iter().enumerate() {
            th2 += if n % 2 == 0 { *c } else { -*c };
        }
        th2 *= 2.0;
        let (mut th3, mut th4) = (Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0));
        for n in 1..MAX_TERMS {
            let t = (ipt * (n * n) as f64).exp();
            if t.norm() < 1e-300 {
                break;
            }
            th3 += 2.0 * t;
            th4 += if n % 2 == 0 { 2.0 * t } else { -2.0 * t };
        }
        let k = PI * PI / 3.0;
        let (t2, t3, t4) = (th2.powi(4), th3.powi(4), th4.powi(4));
        let e = [k * (t3 + t4), -k * (t2 + t3), k * (t2 - t4)];
        let g2 = 2.0 * (e[0] * e[0] + e[1] * e[1] + e[2] * e[2]);
        let g3 = 4.0 * e[0] * e[1] * e[2];
        Ok(Self { tau, coef, eta1, eta2, e, g2, g3, pole_cutoff: DEFAULT_POLE_CUTOFF })
    }

    /// Replaces the pole cutoff used by all evaluations.
    pub fn with_pole_cutoff(mut self, cutoff: f64) -> Self {
        self.pole_cutoff = cutoff;
        self
    }

    pub fn tau(&self) -> Complex64 {
        self.tau
    }
    pub fn nome_modulus(&self) -> f64 {
        (-PI * self.tau.im).exp()
    }
    pub fn g2(&self) -> Complex64 {
        self.g2
    }
    pub fn g3(&self) -> Complex64 {
        self.g3
    }
    /// `e_k = ℘(ω_k/2)` for `ω = (1, τ, 1+τ)`.
    pub fn e(&self) -> [Complex64; 3] {
        self.e
    }
    /// Quasi-period increment of ζ along `ω1 = 1`.
    pub fn eta1(&self) -> Complex64 {
        self.eta1
    }
    /// Quasi-period increment of ζ along `ω2 = τ`.
    pub fn eta2(&self) -> Complex64 {
        self.eta2
    }
    /// Periods `(1, τ, 1+τ)`.
    pub fn periods(&self) -> [Complex64; 3] {
        [Complex64::new(1.0, 0.0), self.tau, 1.0 + self.tau]
    }
    /// Quasi-period increments matching [`Torus::periods`].
    pub fn etas(&self) -> [Complex64; 3] {
        [self.eta1, self.eta2, self.eta1 + self.eta2]
    }
    pub fn half_period(&self, k: usize) -> Complex64 {
        self.periods()[k] / 2.0
    }

    pub fn summary(&self) -> TorusSummary {
        TorusSummary {
            tau: self.tau,
            nome_modulus: self.nome_modulus(),
            g2: self.g2,
            g3: self.g3,
            e: self.e,
            eta1: self.eta1,
            eta2: self.eta2,
            legendre_residual: (self.tau * self.eta1 - self.eta2 - 2.0 * PI * CI).norm(),
        }
    }

    /// Real coordinates `(x, y)` with `z = x + yτ`.
    pub fn lattice_coords(&self, z: Complex64) -> (f64, f64) {
        let y = z.im / self.tau.im;
        (z.re - y * self.tau.re, y)
    }

    pub fn from_coords(&self, x: f64, y: f64) -> Complex64 {
        x + y * self.tau
    }

    /// Splits `z = z' + m + nτ` with `z'` in the centred cell.
    pub fn reduce(&self, z: Complex64) -> (Complex64, f64, f64) {
        let (x, y) = self.lattice_coords(z);
        let (m, n) = (x.round(), y.round());
        (z - m - n * self.tau, m, n)
    }

    /// Representative of `z` in the half-open cell `[0,1) + [0,1)τ`.
    pub fn to_cell(&self, z: Complex64) -> Complex64 {
        let (x, y) = self.lattice_coords(z);
        let (mut fx, mut fy) = (x - x.floor(), y - y.floor());
        if fx >= 1.0 - 1e-14 {
            fx = 0.0;
        }
        if fy >= 1.0 - 1e-14 {
            fy = 0.0;
        }
        self.from_coords(fx, fy)
    }

    /// Euclidean distance from `z` to the nearest lattice point.
    pub fn dist_to_lattice(&self, z: Complex64) -> f64 {
        let (zr, _, _) = self.reduce(z);
        let mut best = f64::INFINITY;
        for m in -1..=1 {
            for n in -1..=1 {
                best = best.min((zr - m as f64 - n as f64 * self.tau).norm());
            }
        }
        best
    }

    /// `a ≡ b (mod Λ)` up to `tol`.
    pub fn congruent(&self, a: Complex64, b: Complex64, tol: f64) -> bool {
        self.dist_to_lattice(a - b) <= tol
    }

    fn check_pole(&self, z: Complex64, zr: Complex64) -> Result<()> {
        ensure_finite("z", z)?;
        let d = zr.norm();
        if d < self.pole_cutoff {
            return Err(Error::PoleProximity { z, distance: d });
        }
        Ok(())
    }

    /// Logarithmic derivatives of θ1 at `v = πz` for `z` in the centred cell.
    fn theta_log(&self, v: Complex64) -> (Complex64, ThetaLog) {
        let e1 = (CI * v).exp();
        let e2 = e1 * e1;
        let (inv1, inv2) = (1.0 / e1, 1.0 / (e1 * e1));
        let grow = v.im.abs().exp();
        let lead = self.coef[0].norm();
        let (mut pk, mut mk) = (e1, inv1);
        let (mut t0, mut t1, mut t2, mut t3) = (C0, C0, C0, C0);
        let mut g = grow;
        for (n, c) in self.coef.iter().enumerate() {
            let k = (2 * n + 1) as f64;
            let s = (pk - mk) / (2.0 * CI);
            let co = (pk + mk) / 2.0;
            t0 += c * s;
            t1 += c * co * k;
            t2 -= c * s * (k * k);
            t3 -= c * co * (k * k * k);
            if n > 0 && c.norm() * g * k * k * k < TERM_CUTOFF * lead {
                break;
            }
            if n + 1 == MAX_TERMS {
                break;
            }
            pk *= e2;
            mk *= inv2;
            g *= grow * grow;
        }
        let l0 = t1 / t0;
        let r2 = t2 / t0;
        let l1 = r2 - l0 * l0;
        let l2 = t3 / t0 - 3.0 * r2 * l0 + 2.0 * l0 * l0 * l0;
        (t0 * 2.0, ThetaLog { l0, l1, l2 })
    }

    /// ℘, ℘' and ζ at `z`.
    pub fn eval(&self, z: Complex64) -> Result<Weierstrass> {
        let (zr, m, n) = self.reduce(z);
        self.check_pole(z, zr)?;
        let (_, t) = self.theta_log(PI * zr);
        let wp = -self.eta1 - PI * PI * t.l1;
        let dwp = -PI * PI * PI * t.l2;
        let zeta = self.eta1 * (zr + m) + n * self.eta2 + PI * t.l0;
        Ok(Weierstrass { wp, dwp, zeta })
    }

    pub fn wp(&self, z: Complex64) -> Result<Complex64> {
        Ok(self.eval(z)?.wp)
    }

    /// ℘, ℘' and ℘'' = 6℘² - g2/2.
    pub fn wp_all(&self, z: Complex64) -> Result<WpValues> {
        let w = self.eval(z)?;
        Ok(WpValues { wp: w.wp, dwp: w.dwp, ddwp: 6.0 * w.wp * w.wp - self.g2 / 2.0 })
    }

    pub fn zeta(&self, z: Complex64) -> Result<Complex64> {
        Ok(self.eval(z)?.zeta)
    }

    /// `log σ(z)` on a branch that is continuous inside the centred cell.
    pub fn log_sigma(&self, z: Complex64) -> Result<Complex64> {
        let (zr, m, n) = self.reduce(z);
        self.check_pole(z, zr)?;
        let (theta, _) = self.theta_log(PI * zr);
        let d1: Complex64 = self.coef.iter().enumerate().map(|(k, c)| c * (2 * k + 1) as f64).sum::<Complex64>() * 2.0;
        let base = self.eta1 * zr * zr / 2.0 + (theta / (PI * d1)).ln();
        let omega = m + n * self.tau;
        let eta = m * self.eta1 + n * self.eta2;
        let parity = ((m + n + m * n).rem_euclid(2.0)) as i64;
        Ok(base + eta * (zr + omega / 2.0) + CI * PI * parity as f64)
    }

    pub fn sigma(&self, z: Complex64) -> Result<Complex64> {
        if self.dist_to_lattice(z) == 0.0 {
            return Ok(C0);
        }
        Ok(self.log_sigma(z)?.exp())
    }

    /// Hecke form `Z(r,s,τ) = ζ(r+sτ) - r η1 - s η2`.
    pub fn premodular(&self, r: Complex64, s: Complex64) -> Result<Complex64> {
        Ok(self.zeta(r + s * self.tau)? - r * self.eta1 - s * self.eta2)
    }

    /// `Z` at a point given by its position `z = r + sτ` with real `(r, s)`.
    pub fn premodular_at(&self, z: Complex64) -> Result<Complex64> {
        let (r, s) = self.lattice_coords(z);
        self.premodular(r.into(), s.into())
    }

    /// Solves `℘(z) = w`. Returns the root whose cell representative has the
    /// larger τ-coordinate (the smaller 1-coordinate on ties); `-z` is the other root.
    pub fn wp_inverse(&self, w: Complex64) -> Result<Complex64> {
        ensure_finite("w", w)?;
        let scale = 1.0 + w.norm();
        for k in 0..3 {
            if (w - self.e[k]).norm() <= 1e-14 * scale {
                return Ok(self.canonical_pair_rep(self.half_period(k)));
            }
        }
        let mut starts: Vec<Complex64> = Vec::with_capacity(16);
        if w.norm() > 1.0 {
            starts.push(1.0 / w.sqrt());
        }
        for k in 0..3 {
            let dd = 6.0 * self.e[k] * self.e[k] - self.g2 / 2.0;
            if dd.norm() > 1e-12 {
                let d = (2.0 * (w - self.e[k]) / dd).sqrt();
                if d.norm() < 0.3 {
                    starts.push(self.half_period(k) + d);
                }
            }
        }
        for (x, y) in [(0.25, 0.25), (0.5, 0.25), (0.25, 0.5), (0.75, 0.25), (0.2, 0.6), (0.6, 0.2), (0.4, 0.7), (0.7, 0.4)] {
            starts.push(self.from_coords(x, y));
        }
        let mut best = (f64::INFINITY, C0);
        for z0 in starts {
            if let Ok((z, res)) = self.newton_wp(w, z0) {
                if res < best.0 {
                    best = (res, z);
                }
                if res <= 1e-12 * scale {
                    break;
                }
            }
        }
        if best.0 > 1e-9 * scale {
            return Err(Error::NoConvergence { what: "℘ inversion".into(), residual: best.0 });
        }
        Ok(self.canonical_pair_rep(best.1))
    }

    fn newton_wp(&self, w: Complex64, mut z: Complex64) -> Result<(Complex64, f64)> {
        let mut res = f64::INFINITY;
        for _ in 0..80 {
            let v = self.eval(z)?;
            let f = v.wp - w;
            res = f.norm();
            if res <= 1e-14 * (1.0 + w.norm()) {
                break;
            }
            let mut step = f / v.dwp;
            let lim = 0.2 * (1.0f64).min(self.tau.norm());
            if step.norm() > lim {
                step *= lim / step.norm();
            }
            z -= step;
            if !step.norm().is_finite() {
                break;
            }
        }
        Ok((z, res))
    }

    /// Chooses between `z` and `-z` modulo Λ.
    pub fn canonical_pair_rep(&self, z: Complex64) -> Complex64 {
        let a = self.to_cell(z);
        let b = self.to_cell(-z);
        let (ax, ay) = self.lattice_coords(a);
        let (bx, by) = self.lattice_coords(b);
        if (ay - by).abs() > 1e-12 {
            if ay > by {
                a
            } else {
                b
            }
        } else if ax <= bx {
            a
        } else {
            b
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn square_lattice_constants() {
        let t = Torus::new(c(0.0, 1.0)).unwrap();
        assert!(t.g3().norm() < 1e-12);
        let e = t.e();
        assert!(e[0].re > e[2].re && e[2].re > e[1].re);
        assert!(e[2].norm() < 1e-12);
    }

    #[test]
    fn half_periods_match_e() {
        let t = Torus::new(c(0.2, 1.3)).unwrap();
        for k in 0..3 {
            let v = t.wp(t.half_period(k)).unwrap();
            assert!((v - t.e()[k]).norm() < 1e-12, "{k}");
        }
    }

    #[test]
    fn rejects_pole_and_bad_tau() {
        let t = Torus::new(c(0.0, 1.0)).unwrap();
        assert!(matches!(t.wp(c(1.0, 1.0)), Err(Error::PoleProximity { .. })));
        assert!(Torus::new(c(0.0, -1.0)).is_err());
        assert!(Torus::new(c(0.0, 0.01)).is_err());
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let t = Torus::new(c(0.3, 1.1)).unwrap();
        let z = c(0.21, 0.37);
        let h = 1e-5;
        let fd = (t.wp(z + h).unwrap() - t.wp(z - h).unwrap()) / (2.0 * h);
        assert!((fd - t.eval(z).unwrap().dwp).norm() < 1e-6);
        let fdz = (t.zeta(z + h).unwrap() - t.zeta(z - h).unwrap()) / (2.0 * h);
        assert!((fdz + t.wp(z).unwrap()).norm() < 1e-6);
        let fds = (t.log_sigma(z + h).unwrap() - t.log_sigma(z - h).unwrap()) / (2.0 * h);
        assert!((fds - t.zeta(z).unwrap()).norm() < 1e-6);
    }

    #[test]
    fn inverse_round_trip() {
        let t = Torus::new(c(0.1, 1.2)).unwrap();
        for w in [c(1.5, 0.0), c(-2.0, 3.0), c(40.0, -7.0), t.e()[1] + 1e-6] {
            let z = t.wp_inverse(w).unwrap();
            assert!((t.wp(z).unwrap() - w).norm() < 1e-9 * (1.0 + w.norm()));
        }
    }
}
