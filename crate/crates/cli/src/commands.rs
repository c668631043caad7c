use crate::config::{Command, JobConfig};
use crate::output::ArcRow;
use lame_spectra::elliptic::{Torus, TorusSummary};
use lame_spectra::equivalence::{self, TraceComparison};
use lame_spectra::linalg::Mat2;
use lame_spectra::metrics::{self, BlowupPair, PStar, SingularityCheck};
use lame_spectra::monodromy::{self, Branch, Equation, LameParams, MonodromyClass, MonodromyOptions};
use lame_spectra::ode::OdeOptions;
use lame_spectra::spectral;
use lame_spectra::spectral_sets::{self as sets, Arc, Discriminant, ExtractOptions, Family, Regime, SpectralRoot, TracedEndpoint, Window};
use lame_spectra::{Complex64, Error, Result};
use serde::Serialize;

fn cx(v: [f64; 2]) -> Complex64 {
    Complex64::new(v[0], v[1])
}

/// Fields guaranteed by `JobConfig::validate`.
fn need<T: Copy>(v: Option<T>, name: &str) -> Result<T> {
    v.ok_or_else(|| Error::Config(format!("missing `{name}`")))
}

fn options(cfg: &JobConfig) -> MonodromyOptions {
    let mut o = MonodromyOptions::default();
    if let Some(tol) = cfg.tol {
        o.ode = OdeOptions { tol, ..o.ode };
    }
    o
}

/// `p` given directly or through `℘(p)`, with `℘(p)` as supplied when possible.
fn singular_point(torus: &Torus, cfg: &JobConfig) -> Result<Option<(Complex64, Complex64)>> {
    match (cfg.p, cfg.wp_p) {
        (Some(p), _) => {
            let p = cx(p);
            Ok(Some((p, torus.wp(p)?)))
        }
        (None, Some(w)) => Ok(Some((torus.wp_inverse(cx(w))?, cx(w)))),
        (None, None) => Ok(None),
    }
}

fn torus_and_point(cfg: &JobConfig) -> Result<(Torus, Complex64, Complex64)> {
    let torus = Torus::new(cx(need(cfg.tau, "tau")?))?;
    let (p, w) = need(singular_point(&torus, cfg)?, "p")?;
    Ok((torus, p, w))
}

#[derive(Serialize)]
pub struct MonodromyReport {
    equation: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    p: Option<Complex64>,
    parameter: Complex64,
    base_point: Complex64,
    clearance: f64,
    m: [Mat2; 2],
    class_signs: [f64; 2],
    discriminants: [Complex64; 2],
    det_residual: f64,
    commutator_residual: f64,
    spectral_polynomial: Complex64,
    classification: MonodromyClass,
}

#[derive(Serialize)]
pub struct SpectralReport {
    /// Period index, 1 or 2.
    j: u8,
    p: Complex64,
    wp_p: Complex64,
    base_point: Complex64,
    mesh_error: f64,
    window: Window,
    resolution: f64,
    coarse_warning: bool,
    arcs: Vec<Arc>,
    endpoints: Vec<TracedEndpoint>,
    roots: Vec<SpectralRoot>,
    #[serde(skip_serializing_if = "Option::is_none")]
    regime: Option<Regime>,
    /// `Im ℘(p)` is small but not zero: the regime is not classified.
    near_real: bool,
}

#[derive(Serialize)]
pub struct EndpointsReport {
    p: Complex64,
    wp_p: Complex64,
    roots: Vec<SpectralRoot>,
    #[serde(skip_serializing_if = "Option::is_none")]
    regime: Option<Regime>,
    near_real: bool,
}

#[derive(Serialize)]
pub struct ZeroReport {
    r: f64,
    s: f64,
    tau: Complex64,
    residual: f64,
    trail: Vec<f64>,
    p_star: PStar,
}

#[derive(Serialize)]
pub struct GreenResidualPair {
    #[serde(skip_serializing_if = "Option::is_none")]
    plus: Option<metrics::GreenResiduals>,
    #[serde(skip_serializing_if = "Option::is_none")]
    minus: Option<metrics::GreenResiduals>,
}

#[derive(Serialize)]
pub struct BlowupEntry {
    p: Complex64,
    /// `2p ≡ ±σ`: the family blows up at the singularity and no sets are formed.
    singular: SingularityCheck,
    #[serde(skip_serializing_if = "Option::is_none")]
    plus_set: Option<[Complex64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    minus_set: Option<[Complex64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    delta_plus: Option<Complex64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    delta_minus: Option<Complex64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ambiguous: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    plus: Option<BlowupPair>,
    #[serde(skip_serializing_if = "Option::is_none")]
    minus: Option<BlowupPair>,
    residuals: GreenResidualPair,
}

#[derive(Serialize)]
pub struct BlowupReport {
    r: f64,
    s: f64,
    tau: Complex64,
    sigma: Complex64,
    p_star: Complex64,
    even_set: [Complex64; 2],
    configs: Vec<BlowupEntry>,
}

#[derive(Serialize)]
#[serde(untagged)]
pub enum Report {
    Torus(TorusSummary),
    Monodromy(Box<MonodromyReport>),
    Equiv(TraceComparison),
    Spectral(Box<SpectralReport>),
    Endpoints(EndpointsReport),
    Zero(ZeroReport),
    Blowup(BlowupReport),
}

impl Report {
    /// Polyline rows for CSV output.
    pub fn arc_rows(&self) -> Option<Vec<ArcRow>> {
        let Report::Spectral(s) = self else { return None };
        Some(
            s.arcs
                .iter()
                .enumerate()
                .flat_map(|(arc_id, a)| {
                    a.points.iter().enumerate().map(move |(point_index, z)| ArcRow { j: s.j, arc_id, point_index, t: [z.re, z.im] })
                })
                .collect(),
        )
    }
}

pub fn run(cfg: &JobConfig) -> Result<Report> {
    match cfg.command {
        Command::Torus => Ok(Report::Torus(Torus::new(cx(need(cfg.tau, "tau")?))?.summary())),
        Command::Monodromy => monodromy_report(cfg).map(|r| Report::Monodromy(Box::new(r))),
        Command::EquivCheck => {
            let (torus, p, _) = torus_and_point(cfg)?;
            Ok(Report::Equiv(equivalence::verify_trace_equivalence(&torus, p, cx(need(cfg.t, "T")?), &options(cfg))?))
        }
        Command::SpectralSet => spectral_report(cfg).map(|r| Report::Spectral(Box::new(r))),
        Command::Endpoints => {
            let (torus, p, w) = torus_and_point(cfg)?;
            let (regime, near_real) = regime_of(&torus, w)?;
            Ok(Report::Endpoints(EndpointsReport { p, wp_p: w, roots: sets::endpoints_from_wp(&torus, w)?, regime, near_real }))
        }
        Command::PremodularZero => {
            let z = metrics::premodular_zero_tau(need(cfg.r, "r")?, need(cfg.s, "s")?, cfg.tau.map(cx))?;
            let p_star = metrics::p_star(&z)?;
            Ok(Report::Zero(ZeroReport { r: z.r, s: z.s, tau: z.tau, residual: z.residual, trail: z.trail, p_star }))
        }
        Command::Blowup => blowup_report(cfg).map(Report::Blowup),
    }
}

fn monodromy_report(cfg: &JobConfig) -> Result<MonodromyReport> {
    let torus = Torus::new(cx(need(cfg.tau, "tau")?))?;
    let opts = options(cfg);
    if let Some(b) = cfg.btilde {
        let b = cx(b);
        let eq = LameParams { torus: torus.clone(), btilde: b };
        let e = torus.e();
        let q = -4.0 * (b - e[0]) * (b - e[1]) * (b - e[2]);
        return assemble("lame", None, b, &eq, q, Some(b), &opts);
    }
    let (p, _) = need(singular_point(&torus, cfg)?, "p")?;
    let (name, branch) = match (cfg.t, cfg.a) {
        (Some(t), _) => ("non-even", Branch::NonEven(cx(t))),
        (None, Some(a)) => ("even", Branch::Even(cx(a))),
        (None, None) => return Err(Error::Config("missing `T` or `A`".into())),
    };
    let g = monodromy::make_apparent(&torus, p, branch)?;
    let q = spectral::spectral_polynomial(&g)?;
    let param = match branch {
        Branch::NonEven(x) | Branch::Even(x) => x,
    };
    assemble(name, Some(p), param, &g, q, g.btilde(), &opts)
}

fn assemble(
    equation: &'static str,
    p: Option<Complex64>,
    parameter: Complex64,
    eq: &dyn Equation,
    q: Complex64,
    btilde: Option<Complex64>,
    opts: &MonodromyOptions,
) -> Result<MonodromyReport> {
    let m = monodromy::integrate_monodromy(eq, opts)?;
    let classification = monodromy::classify(eq, &m, q, btilde, &Default::default())?;
    Ok(MonodromyReport {
        equation,
        p,
        parameter,
        base_point: m.base_point,
        clearance: m.clearance,
        m: m.m,
        class_signs: m.class_signs,
        discriminants: [m.discriminant(0), m.discriminant(1)],
        det_residual: m.det_residual(),
        commutator_residual: m.commutator_residual(),
        spectral_polynomial: q,
        classification,
    })
}

/// Regime for rectangular tori and real `℘(p)`; near-real values are flagged.
fn regime_of(torus: &Torus, w: Complex64) -> Result<(Option<Regime>, bool)> {
    if torus.tau().re != 0.0 {
        return Ok((None, false));
    }
    let scale = 1.0 + w.re.abs();
    if w.im.abs() <= 1e-12 * scale {
        Ok((Some(sets::classify_regime(torus, w.re)?), false))
    } else {
        Ok((None, w.im.abs() < 1e-6 * scale))
    }
}

fn spectral_report(cfg: &JobConfig) -> Result<SpectralReport> {
    let (torus, p, w) = torus_and_point(cfg)?;
    let j = need(cfg.j, "j")?;
    let window = match cfg.window {
        Some([a, b, c, d]) => Window { re: [a, b], im: [c, d] },
        None => Window::default(),
    };
    let n = cfg.resolution.unwrap_or(161);
    let disc = Discriminant::new(Family::NonEven { torus: torus.clone(), p }, &window, &options(cfg))?;
    let grid = sets::discriminant_grid(&disc, usize::from(j - 1), &window, n)?;
    let set = sets::extract_arcs(&disc, &grid, &ExtractOptions::default());
    let (regime, near_real) = regime_of(&torus, w)?;
    Ok(SpectralReport {
        j,
        p,
        wp_p: w,
        base_point: disc.base_point(),
        mesh_error: disc.mesh_error,
        window,
        resolution: set.resolution,
        coarse_warning: set.coarse_warning,
        arcs: set.arcs,
        endpoints: set.endpoints,
        roots: sets::endpoints_from_wp(&torus, w)?,
        regime,
        near_real,
    })
}

fn blowup_report(cfg: &JobConfig) -> Result<BlowupReport> {
    let (r, s) = (need(cfg.r, "r")?, need(cfg.s, "s")?);
    let zero = metrics::premodular_zero_tau(r, s, cfg.tau.map(cx))?;
    let torus = Torus::new(zero.tau)?;
    let sigma = Complex64::new(r, 0.0) + s * zero.tau;
    let p_star = metrics::p_star(&zero)?.p;
    let p = singular_point(&torus, cfg)?.map_or(p_star, |(p, _)| p);
    let singular = metrics::blowup_at_singularity_check(&torus, r, s, p)?;
    let entry = if singular.blows_up {
        BlowupEntry {
            p,
            singular,
            plus_set: None,
            minus_set: None,
            delta_plus: None,
            delta_minus: None,
            ambiguous: None,
            plus: None,
            minus: None,
            residuals: GreenResidualPair { plus: None, minus: None },
        }
    } else {
        let b = metrics::blowup_sets(&torus, p, r, s)?;
        BlowupEntry {
            p,
            singular,
            plus_set: Some(b.plus.wp_values),
            minus_set: Some(b.minus.wp_values),
            delta_plus: Some(b.delta_plus),
            delta_minus: Some(b.delta_minus),
            ambiguous: Some(b.ambiguous),
            plus: Some(b.plus),
            minus: Some(b.minus),
            residuals: GreenResidualPair { plus: b.plus.residuals, minus: b.minus.residuals },
        }
    };
    Ok(BlowupReport { r, s, tau: zero.tau, sigma, p_star, even_set: metrics::even_blowup_set(&torus, sigma)?, configs: vec![entry] })
}
