//! Potentials, apparent singularities and monodromy of
//! `y'' = q(z) y` on `C/Λτ`.
//!
//! A fundamental system `Y(z)` continued along `ω_j` obeys
//! `Y(z + ω_j) = M_j Y(z)`. Apparentness at `±p` makes `M1, M2` commute and
//! the local monodromy at `±p` equal to `-I`.

use crate::elliptic::{Torus, WpValues};
use crate::linalg::Mat2;
use crate::ode::{self, OdeOptions, Path};
use crate::quad;
use crate::{Complex64, Error, Result, C0, C1, CI};
use serde::Serialize;
use std::f64::consts::PI;

/// The classical Lamé equation `y'' = (2℘(z) + B̃) y`.
#[derive(Debug, Clone)]
pub struct LameParams {
    pub torus: Torus,
    pub btilde: Complex64,
}

/// Which one-parameter family of apparent equations to build.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", content = "value")]
pub enum Branch {
    /// `T1 + T2 = 2T`, `T1 - T2 = -℘''(p)/(2℘'(p))`.
    NonEven(Complex64),
    /// `T1 = A = -T2`: the potential is even in `z`.
    Even(Complex64),
}

/// Data of the singular point `p` shared by every formula.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PointData {
    pub p: Complex64,
    pub wp: WpValues,
    pub zeta: Complex64,
    /// `℘''(p)/℘'(p)`
    pub kappa: Complex64,
    pub wp_2p: Complex64,
    pub zeta_2p: Complex64,
}

impl PointData {
    pub fn new(torus: &Torus, p: Complex64) -> Result<Self> {
        crate::ensure_finite("p", p)?;
        let scale = 1.0f64.min(torus.tau().norm());
        if torus.dist_to_lattice(p) < 1e-6 * scale || torus.dist_to_lattice(2.0 * p) < 1e-6 * scale {
            return Err(Error::HalfPeriodSingularity(p));
        }
        let wp = torus.wp_all(p)?;
        let zeta = torus.zeta(p)?;
        let w2 = torus.eval(2.0 * p)?;
        Ok(Self { p, wp, zeta, kappa: wp.ddwp / wp.dwp, wp_2p: w2.wp, zeta_2p: w2.zeta })
    }
}

/// A generalized Lamé equation with singular points `0, ±p`.
#[derive(Debug, Clone)]
pub struct GleParams {
    pub torus: Torus,
    pub pt: PointData,
    pub t1: Complex64,
    pub t2: Complex64,
    pub b: Complex64,
    /// `None` for parameters assembled by hand (possibly non-apparent).
    pub branch: Option<Branch>,
}

impl GleParams {
    pub fn p(&self) -> Complex64 {
        self.pt.p
    }

    /// Parameters taken verbatim, with no apparentness enforced.
    pub fn raw(torus: &Torus, p: Complex64, t1: Complex64, t2: Complex64, b: Complex64) -> Result<Self> {
        let pt = PointData::new(torus, p)?;
        Ok(Self { torus: torus.clone(), pt, t1, t2, b, branch: None })
    }

    /// Residual of the apparentness condition
    /// `(T1+T2)(T1-T2+℘''/(2℘')) = 0` together with the matching `B`.
    pub fn apparent_residual(&self) -> f64 {
        let k = self.pt.kappa;
        let cond = (self.t1 + self.t2) * (self.t1 - self.t2 + k / 2.0);
        let b = (self.t1 * self.t1 + self.t2 * self.t2) / 2.0
            - (self.t1 - self.t2) * self.pt.zeta_2p / 2.0
            - 0.75 * self.pt.wp_2p
            - 2.0 * self.pt.wp.wp;
        cond.norm() + (b - self.b).norm()
    }

    /// Equivalent Lamé parameter `B̃ = T² - 2℘(p)` on the non-even branch.
    pub fn btilde(&self) -> Option<Complex64> {
        match self.branch {
            Some(Branch::NonEven(t)) => Some(t * t - 2.0 * self.pt.wp.wp),
            _ => None,
        }
    }

    /// Decomposition `q = f0(z) + λ f1(z) + μ` used for parameter sweeps.
    pub fn pencil_coefficients(&self) -> Option<(Complex64, Complex64)> {
        match self.branch {
            Some(Branch::NonEven(t)) => Some((t, t * t)),
            Some(Branch::Even(a)) => Some((a, a * a - self.pt.zeta_2p * a)),
            None => None,
        }
    }
}

/// Builds the apparent equation on the requested branch.
pub fn make_apparent(torus: &Torus, p: Complex64, branch: Branch) -> Result<GleParams> {
    let pt = PointData::new(torus, p)?;
    let k = pt.kappa;
    let (t1, t2, b) = match branch {
        Branch::NonEven(t) => {
            crate::ensure_finite("T", t)?;
            (t - k / 4.0, t + k / 4.0, t * t + k * pt.zeta / 2.0 - pt.wp.wp / 2.0)
        }
        Branch::Even(a) => {
            crate::ensure_finite("A", a)?;
            (a, -a, a * a - pt.zeta_2p * a - 0.75 * pt.wp_2p - 2.0 * pt.wp.wp)
        }
    };
    Ok(GleParams { torus: torus.clone(), pt, t1, t2, b, branch: Some(branch) })
}

/// A second-order Fuchsian equation on the torus.
pub trait Equation: Sync {
    fn torus(&self) -> &Torus;
    /// `q(z)`
    fn potential(&self, z: Complex64) -> Result<Complex64>;
    /// Representatives of the singular points modulo Λ.
    fn singular_points(&self) -> Vec<Complex64>;
    /// Leading coefficient `n(n+1)` of `q` at a singular point.
    fn leading_coefficient(&self, point: Complex64) -> f64;
    /// `q = f0 + λ f1 + μ` split, when the equation belongs to a pencil.
    fn pencil(&self, z: Complex64) -> Result<(Complex64, Complex64)>;
    fn pencil_params(&self) -> (Complex64, Complex64);
    /// Point `p` whose pair `±p` carries local monodromy `-I`, if any.
    fn sign_pair(&self) -> Option<Complex64> {
        None
    }
}

impl Equation for LameParams {
    fn torus(&self) -> &Torus {
        &self.torus
    }
    fn potential(&self, z: Complex64) -> Result<Complex64> {
        Ok(2.0 * self.torus.wp(z)? + self.btilde)
    }
    fn singular_points(&self) -> Vec<Complex64> {
        vec![C0]
    }
    fn leading_coefficient(&self, _point: Complex64) -> f64 {
        2.0
    }
    fn pencil(&self, z: Complex64) -> Result<(Complex64, Complex64)> {
        Ok((2.0 * self.torus.wp(z)?, C0))
    }
    fn pencil_params(&self) -> (Complex64, Complex64) {
        (C0, self.btilde)
    }
}

impl GleParams {
    fn parts(&self, z: Complex64) -> Result<[crate::elliptic::Weierstrass; 3]> {
        let t = &self.torus;
        Ok([t.eval(z)?, t.eval(z + self.pt.p)?, t.eval(z - self.pt.p)?])
    }
}

impl Equation for GleParams {
    fn torus(&self) -> &Torus {
        &self.torus
    }
    fn potential(&self, z: Complex64) -> Result<Complex64> {
        let [w0, wp, wm] = self.parts(z)?;
        Ok(2.0 * w0.wp + 0.75 * (wp.wp + wm.wp) + self.t1 * (wp.zeta - w0.zeta) + self.t2 * (wm.zeta - w0.zeta) + self.b)
    }
    fn singular_points(&self) -> Vec<Complex64> {
        vec![C0, self.pt.p, -self.pt.p]
    }
    fn leading_coefficient(&self, point: Complex64) -> f64 {
        if self.torus.dist_to_lattice(point) < 1e-9 {
            2.0
        } else {
            0.75
        }
    }
    fn pencil(&self, z: Complex64) -> Result<(Complex64, Complex64)> {
        let [w0, wp, wm] = self.parts(z)?;
        let base = 2.0 * w0.wp + 0.75 * (wp.wp + wm.wp);
        let k = self.pt.kappa;
        match self.branch {
            Some(Branch::NonEven(_)) => {
                Ok((base - k / 4.0 * (wp.zeta - wm.zeta) + k * self.pt.zeta / 2.0 - self.pt.wp.wp / 2.0, wp.zeta + wm.zeta - 2.0 * w0.zeta))
            }
            Some(Branch::Even(_)) => Ok((base - 0.75 * self.pt.wp_2p - 2.0 * self.pt.wp.wp, wp.zeta - wm.zeta)),
            None => Ok((self.potential(z)?, C0)),
        }
    }
    fn pencil_params(&self) -> (Complex64, Complex64) {
        self.pencil_coefficients().unwrap_or((C0, C0))
    }
    fn sign_pair(&self) -> Option<Complex64> {
        Some(self.pt.p)
    }
}

/// `+1` when `c0` lies on the arc of `R/Z \ {±cp}` containing 1/2, else `-1`.
fn arc_sign(c0: f64, cp: f64) -> f64 {
    let frac = |x: f64| x - x.floor();
    let a = frac(cp);
    let b = frac(-cp);
    let (lo, hi) = (a.min(b), a.max(b));
    if hi - lo < 1e-12 {
        return if (0.25..=0.75).contains(&a) { -1.0 } else { 1.0 };
    }
    let x = frac(c0);
    if lo < x && x < hi {
        1.0
    } else {
        -1.0
    }
}

/// Signs relating the transfer matrices at `z0` to the half-period class.
///
/// Continuation around `±p` contributes `-I`, so `M_j` depends on the side
/// of `±p` the cycle passes. The half-period class places the cycle through
/// `z0 + Rω_j` between `p` and `-p` on the arc containing `ω_{3-j}/2`;
/// traces normalised to it agree with the Lamé equation at `B̃ = T² - 2℘(p)`.
pub fn class_signs(torus: &Torus, p: Complex64, z0: Complex64) -> [f64; 2] {
    let (x0, y0) = torus.lattice_coords(z0);
    let (xp, yp) = torus.lattice_coords(p);
    [arc_sign(y0, yp), arc_sign(x0, xp)]
}

/// Distance from the segment `[a, a+d]` to the point set `pts + Λ`.
pub fn segment_clearance(torus: &Torus, a: Complex64, d: Complex64, pts: &[Complex64]) -> f64 {
    let mut best = f64::INFINITY;
    let dd = d.norm_sqr();
    for &s in pts {
        let (rel, _, _) = torus.reduce(s - a);
        for m in -2..=2 {
            for n in -2..=2 {
                let x = rel + m as f64 + n as f64 * torus.tau();
                let t = ((x * d.conj()).re / dd).clamp(0.0, 1.0);
                best = best.min((x - d * t).norm());
            }
        }
    }
    best
}

/// Base point maximising the clearance of both period segments from `avoid`.
pub fn choose_base_point(torus: &Torus, avoid: &[Complex64]) -> (Complex64, f64) {
    const N: usize = 24;
    let [w1, w2, _] = torus.periods();
    let mut best = (C0, -1.0);
    for i in 0..N {
        for j in 0..N {
            let z = torus.from_coords((i as f64 + 0.5) / N as f64, (j as f64 + 0.5) / N as f64);
            let c = segment_clearance(torus, z, w1, avoid).min(segment_clearance(torus, z, w2, avoid));
            if c > best.1 + 1e-12 {
                best = (z, c);
            }
        }
    }
    best
}

/// Minimum admissible path clearance for a torus.
pub fn min_clearance(torus: &Torus) -> f64 {
    0.05 * 1.0f64.min(torus.tau().norm())
}

#[derive(Debug, Clone, Copy, Default)]
pub struct MonodromyOptions {
    pub base_point: Option<Complex64>,
    pub ode: OdeOptions,
}

/// Monodromy representation at a base point.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Monodromy {
    pub base_point: Complex64,
    pub clearance: f64,
    /// `M1, M2` acting on the fundamental system as a column vector,
    /// normalised to the half-period class.
    pub m: [Mat2; 2],
    /// Factors applied to the raw continuation along `z0 → z0 + ω_j`.
    pub class_signs: [f64; 2],
}

impl Monodromy {
    /// Hill discriminant `Δ_j = tr M_j / 2`.
    pub fn discriminant(&self, j: usize) -> Complex64 {
        self.m[j].trace() / 2.0
    }
    pub fn det_residual(&self) -> f64 {
        (self.m[0].det() - 1.0).norm().max((self.m[1].det() - 1.0).norm())
    }
    pub fn commutator_residual(&self) -> f64 {
        let c = self.m[0] * self.m[1] * self.m[0].inverse() * self.m[1].inverse();
        (c - Mat2::IDENTITY).max_abs()
    }
    /// Transfer matrices on `(y, y')`: `Φ_j = M_j^T`.
    pub fn transfer(&self, j: usize) -> Mat2 {
        self.m[j].transpose()
    }
}

fn resolve_base(eq: &dyn Equation, opts: &MonodromyOptions, extra: &[Complex64]) -> Result<(Complex64, f64)> {
    let torus = eq.torus();
    let mut avoid = eq.singular_points();
    avoid.extend_from_slice(extra);
    let [w1, w2, _] = torus.periods();
    let (z0, clear) = match opts.base_point {
        Some(z) => {
            crate::ensure_finite("z0", z)?;
            (z, segment_clearance(torus, z, w1, &avoid).min(segment_clearance(torus, z, w2, &avoid)))
        }
        None => choose_base_point(torus, &avoid),
    };
    let minimum = min_clearance(torus);
    if clear < minimum {
        return Err(Error::PathBlocked { clearance: clear, minimum });
    }
    Ok((z0, clear))
}

/// Base point and clearance used for a given equation.
pub fn base_point(eq: &dyn Equation, opts: &MonodromyOptions, extra: &[Complex64]) -> Result<(Complex64, f64)> {
    resolve_base(eq, opts, extra)
}

/// Integrates `Y' = [[0,1],[q,0]] Y` along `z0 → z0 + ω_j`.
pub fn integrate_monodromy(eq: &dyn Equation, opts: &MonodromyOptions) -> Result<Monodromy> {
    let (z0, clearance) = resolve_base(eq, opts, &[])?;
    let torus = eq.torus();
    let [w1, w2, _] = torus.periods();
    let q = |z: Complex64| eq.potential(z);
    let (p1, _) = ode::transfer(&Path::Segment { start: z0, delta: w1 }, &q, &opts.ode)?;
    let (p2, _) = ode::transfer(&Path::Segment { start: z0, delta: w2 }, &q, &opts.ode)?;
    let signs = signs_for(eq, z0);
    Ok(Monodromy {
        base_point: z0,
        clearance,
        m: [p1.transpose().scale(signs[0].into()), p2.transpose().scale(signs[1].into())],
        class_signs: signs,
    })
}

/// Class signs of an equation at a base point (`[1, 1]` without a `±p` pair).
pub fn signs_for(eq: &dyn Equation, z0: Complex64) -> [f64; 2] {
    eq.sign_pair().map_or([1.0, 1.0], |p| class_signs(eq.torus(), p, z0))
}

/// Monodromy of a small counter-clockwise loop around `point`.
pub fn local_monodromy(eq: &dyn Equation, point: Complex64, radius: f64, opts: &OdeOptions) -> Result<Mat2> {
    let q = |z: Complex64| eq.potential(z);
    let (r, _) = ode::transfer(&Path::Circle { center: point, radius, phase: 0.3 }, &q, opts)?;
    Ok(r.transpose())
}

/// Monodromy datum `D ∈ C ∪ {∞}` of a non-completely-reducible representation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Datum {
    Finite(Complex64),
    Infinite,
}

impl Serialize for Datum {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Datum::Finite(z) => z.serialize(s),
            Datum::Infinite => s.serialize_str("infinity"),
        }
    }
}

impl Datum {
    /// Builds `num/den`, mapping a vanishing denominator to ∞.
    pub fn from_ratio(num: Complex64, den: Complex64) -> Self {
        if den.norm() <= 1e-9 * num.norm().max(1e-300) {
            Datum::Infinite
        } else {
            Datum::Finite(num / den)
        }
    }
    /// Chordal distance on the Riemann sphere.
    pub fn chordal_distance(&self, other: &Datum) -> f64 {
        let proj = |d: &Datum| match d {
            Datum::Finite(z) => (*z, C1),
            Datum::Infinite => (C1, C0),
        };
        let (a, b) = proj(self);
        let (c, d) = proj(other);
        let num = (a * d - b * c).norm();
        let den = (a.norm_sqr() + b.norm_sqr()).sqrt() * (c.norm_sqr() + d.norm_sqr()).sqrt();
        num / den
    }
}

/// Classification of the monodromy group.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind")]
pub enum MonodromyClass {
    /// `M1 ~ diag(e^{-2πis}, e^{2πis})`, `M2 ~ diag(e^{2πir}, e^{-2πir})`.
    CompletelyReducible { r: Complex64, s: Complex64 },
    /// `M1 ~ ε1 [[1,0],[1,1]]`, `M2 ~ ε2 [[1,0],[D,1]]`.
    NotCompletelyReducible { sign1: i8, sign2: i8, datum: Datum },
}

/// Simultaneous eigenvalues `(λ1, λ2)` of the two transfer matrices, one per
/// common eigenvector.
pub fn joint_eigenvalues(mono: &Monodromy) -> Result<[(Complex64, Complex64); 2]> {
    let f = [mono.transfer(0), mono.transfer(1)];
    let sep = |m: &Mat2| {
        let e = m.eigenvalues();
        (e[0] - e[1]).norm()
    };
    let (main, other) = if sep(&f[0]) >= sep(&f[1]) { (0, 1) } else { (1, 0) };
    let mut out = [(C0, C0); 2];
    let mut worst: f64 = 0.0;
    for (slot, lam) in f[main].eigenvalues().into_iter().enumerate() {
        let v = f[main].eigenvector(lam);
        let w = f[other].apply(v);
        let mu = v[0].conj() * w[0] + v[1].conj() * w[1];
        let res = ((w[0] - mu * v[0]).norm() + (w[1] - mu * v[1]).norm()) / f[other].max_abs().max(1.0);
        worst = worst.max(res);
        out[slot] = if main == 0 { (lam, mu) } else { (mu, lam) };
    }
    if worst > 1e-6 {
        return Err(Error::InconsistentEigenpairing(worst));
    }
    Ok(out)
}

/// `(r, s)` from `λ1 = e^{-2πis}`, `λ2 = e^{2πir}` with `Re r, Re s ∈ [0, 1)`.
pub fn rs_from_eigenvalues(l1: Complex64, l2: Complex64) -> (Complex64, Complex64) {
    let s = -l1.ln() / (2.0 * PI * CI);
    let r = l2.ln() / (2.0 * PI * CI);
    (wrap(r), wrap(s))
}

/// Shifts `x` by an integer so that `Re x ∈ [0, 1)`.
pub fn wrap(x: Complex64) -> Complex64 {
    let mut re = x.re - x.re.floor();
    if re >= 1.0 - 1e-13 {
        re = 0.0;
    }
    Complex64::new(re, x.im)
}

/// Distance between `(r, s)` pairs modulo `Z²`.
pub fn rs_distance_mod_z2(a: (Complex64, Complex64), b: (Complex64, Complex64)) -> f64 {
    let d = |x: Complex64, y: Complex64| {
        let t = x - y;
        Complex64::new(t.re - t.re.round(), t.im).norm()
    };
    d(a.0, b.0).max(d(a.1, b.1))
}

/// Scale of the spectral polynomial used to decide `Q ≈ 0`.
fn q_scale(torus: &Torus, btilde: Complex64) -> f64 {
    4.0 * torus.e().iter().map(|e| btilde.norm() + e.norm()).product::<f64>()
}

/// Options for [`classify`].
#[derive(Debug, Clone, Copy)]
pub struct ClassifyOptions {
    /// `Q` is treated as zero below `tol_q · scale`.
    pub tol_q: f64,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        Self { tol_q: 1e-9 }
    }
}

/// Classifies the monodromy of an apparent equation. For the non-even and Lamé
/// cases `(r, s)` is fixed among `±(r, s)` by `℘(r+sτ) = B̃` and
/// `℘'(r+sτ) = sqrt(-Q)` on the principal branch; on the even branch the
/// representative with the smaller `(Re r, Re s)` is returned.
pub fn classify(
    eq: &dyn Equation,
    mono: &Monodromy,
    q_value: Complex64,
    btilde: Option<Complex64>,
    opts: &ClassifyOptions,
) -> Result<MonodromyClass> {
    let torus = eq.torus();
    let scale = q_scale(torus, btilde.unwrap_or(C0)).max(1.0);
    if q_value.norm() <= opts.tol_q * scale {
        let d1 = mono.discriminant(0);
        let d2 = mono.discriminant(1);
        let sign = |d: Complex64| if d.re >= 0.0 { 1i8 } else { -1i8 };
        let (e1, e2) = (sign(d1), sign(d2));
        let n1 = mono.m[0].scale((e1 as f64).into()) - Mat2::IDENTITY;
        let n2 = mono.m[1].scale((e2 as f64).into()) - Mat2::IDENTITY;
        let datum = nilpotent_ratio(&n1, &n2);
        return Ok(MonodromyClass::NotCompletelyReducible { sign1: e1, sign2: e2, datum });
    }
    let pairs = joint_eigenvalues(mono)?;
    let (l1, l2) = pairs[0];
    let a = rs_from_eigenvalues(l1, l2);
    let b = (wrap(-a.0), wrap(-a.1));
    let pick = match btilde {
        Some(_) => {
            let target = (-q_value).sqrt();
            let dev = |rs: (Complex64, Complex64)| -> Result<f64> { Ok((torus.eval(rs.0 + rs.1 * torus.tau())?.dwp - target).norm()) };
            if dev(a)? <= dev(b)? {
                a
            } else {
                b
            }
        }
        None => {
            let key = |rs: (Complex64, Complex64)| (rs.0.re, rs.1.re);
            if key(a) <= key(b) {
                a
            } else {
                b
            }
        }
    };
    Ok(MonodromyClass::CompletelyReducible { r: pick.0, s: pick.1 })
}

/// `D` from `N2 = D·N1` for commuting nilpotent parts.
pub fn nilpotent_ratio(n1: &Mat2, n2: &Mat2) -> Datum {
    let den = n1.inner(n1);
    let num = n1.inner(n2);
    if n1.max_abs() <= 1e-6 * n2.max_abs() {
        Datum::Infinite
    } else {
        Datum::from_ratio(num, den)
    }
}

/// Result of the no-logarithm test at one singular point.
#[derive(Debug, Clone, Serialize)]
pub struct FrobeniusReport {
    pub point: Complex64,
    pub exponents: (f64, f64),
    /// Laurent coefficients `q_{-2}, q_{-1}, ...` of the potential.
    pub laurent: Vec<Complex64>,
    /// Series coefficients up to two terms past the resonance (resonant one set to 0).
    pub coefficients: Vec<Complex64>,
    pub obstruction: Complex64,
    pub scale: f64,
    pub apparent: bool,
}

/// Frobenius recursion at a singular point; the equation is apparent there
/// iff the resonant obstruction vanishes.
pub fn frobenius_no_log(eq: &dyn Equation, point: Complex64, tol: f64) -> Result<FrobeniusReport> {
    let torus = eq.torus();
    let lead = eq.leading_coefficient(point);
    let rho_lo = 0.5 * (1.0 - (1.0 + 4.0 * lead).sqrt());
    let resonance = (1.0 + 4.0 * lead).sqrt().round() as usize;
    let mut nearest = f64::INFINITY;
    for s in eq.singular_points() {
        for m in -1..=1 {
            for n in -1..=1 {
                let d = (torus.reduce(s - point).0 + m as f64 + n as f64 * torus.tau()).norm();
                if d > 1e-9 {
                    nearest = nearest.min(d);
                }
            }
        }
    }
    let radius = 0.4 * nearest;
    let kmax = resonance as i32 + 1;
    let q = |z: Complex64| eq.potential(z);
    let lau = quad::laurent(&q, point, radius, 128, -2, kmax)?;
    let qk = |k: i32| lau[(k + 2) as usize];
    let nmax = resonance + 2;
    let mut c = vec![C0; nmax + 1];
    c[0] = C1;
    let mut obstruction = C0;
    let mut scale: f64 = 1.0;
    for n in 1..=nmax {
        let mut rhs = C0;
        let mut mag = 0.0;
        for k in -1..=(n as i32 - 2) {
            let t = qk(k) * c[(n as i32 - 2 - k) as usize];
            rhs += t;
            mag += t.norm();
        }
        let x = n as f64 + rho_lo;
        let ind = x * (x - 1.0) - lead;
        if n == resonance {
            obstruction = rhs;
            scale = scale.max(mag);
            c[n] = C0;
        } else {
            c[n] = rhs / ind;
        }
    }
    Ok(FrobeniusReport {
        point,
        exponents: (rho_lo, rho_lo + resonance as f64),
        laurent: lau,
        coefficients: c,
        obstruction,
        scale,
        apparent: obstruction.norm() <= tol * scale,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn branches_are_apparent() {
        let t = Torus::new(c(0.1, 1.1)).unwrap();
        let p = c(0.27, 0.31);
        for br in [Branch::NonEven(c(0.4, -0.2)), Branch::Even(c(-0.3, 0.5))] {
            let g = make_apparent(&t, p, br).unwrap();
            assert!(g.apparent_residual() < 1e-10, "{br:?}");
        }
    }

    #[test]
    fn branches_meet_at_zero_t() {
        let t = Torus::new(c(0.0, 1.3)).unwrap();
        let p = c(0.2, 0.4);
        let a = make_apparent(&t, p, Branch::NonEven(C0)).unwrap();
        let b = make_apparent(&t, p, Branch::Even(-a.pt.kappa / 4.0)).unwrap();
        let z = c(0.37, 0.11);
        assert!((a.potential(z).unwrap() - b.potential(z).unwrap()).norm() < 1e-11);
    }

    #[test]
    fn pencil_reassembles_potential() {
        let t = Torus::new(c(0.2, 1.0)).unwrap();
        let g = make_apparent(&t, c(0.3, 0.2), Branch::NonEven(c(0.5, 0.1))).unwrap();
        let z = c(0.6, 0.7);
        let (f0, f1) = g.pencil(z).unwrap();
        let (l, m) = g.pencil_params();
        assert!((f0 + l * f1 + m - g.potential(z).unwrap()).norm() < 1e-11);
    }

    #[test]
    fn normalised_traces_ignore_base_point() {
        let t = Torus::new(c(0.1, 1.1)).unwrap();
        let g = make_apparent(&t, c(0.27, 0.31), Branch::NonEven(c(0.4, 0.9))).unwrap();
        let mut seen: Vec<[f64; 2]> = Vec::new();
        let mut first: Option<[Complex64; 2]> = None;
        for (x, y) in [(0.5, 0.5), (0.1, 0.5), (0.5, 0.12), (0.1, 0.12)] {
            let o = MonodromyOptions { base_point: Some(t.from_coords(x, y)), ..Default::default() };
            let m = integrate_monodromy(&g, &o).unwrap();
            seen.push(m.class_signs);
            let d = [m.discriminant(0), m.discriminant(1)];
            let f = *first.get_or_insert(d);
            assert!((d[0] - f[0]).norm() + (d[1] - f[1]).norm() < 1e-9);
        }
        assert_eq!(seen, vec![[1.0, 1.0], [1.0, -1.0], [-1.0, 1.0], [-1.0, -1.0]]);
    }

    #[test]
    fn datum_chordal() {
        assert!(Datum::Infinite.chordal_distance(&Datum::Finite(c(1e12, 0.0))) < 1e-11);
        assert!(Datum::Finite(c(1.0, 0.0)).chordal_distance(&Datum::Finite(c(1.0, 1e-9))) < 1e-9);
    }
}
