//! Spectral sets `σ_j = {x : Δ_j(x) ∈ [-1, 1]}` in the parameter plane.
//!
//! `Δ_j` is holomorphic in the parameter, so `σ_j` lies on the level set
//! `Im Δ_j = 0`. Arcs are traced by marching squares on `Im Δ_j`, clipped to
//! `|Re Δ_j| ≤ 1`, and cells whose corners straddle `|Re Δ_j| = 1` are
//! resampled on a finer grid before extraction. Endpoints are vertices where an
//! odd number of semiarcs meet; they are polished by Newton on `Δ_j = ±1`.

use crate::elliptic::Torus;
use crate::monodromy::{self, Branch, Equation, LameParams, MonodromyOptions};
use crate::ode::{self, Path, SampledPencil};
use crate::quad;
use crate::{Complex64, Error, Result, C0, CI};
use serde::Serialize;
use std::collections::hash_map::{Entry, HashMap};

/// One-parameter family whose discriminants are traced.
#[derive(Debug, Clone)]
pub enum Family {
    /// Generalized equation on the non-even branch, parameter `T`.
    NonEven { torus: Torus, p: Complex64 },
    /// Classical Lamé equation, parameter `B̃`.
    Lame { torus: Torus },
}

impl Family {
    pub fn torus(&self) -> &Torus {
        match self {
            Family::NonEven { torus, .. } | Family::Lame { torus } => torus,
        }
    }

    /// Equation at parameter `x`.
    pub fn equation(&self, x: Complex64) -> Result<Box<dyn Equation>> {
        Ok(match self {
            Family::NonEven { torus, p } => Box::new(monodromy::make_apparent(torus, *p, Branch::NonEven(x))?),
            Family::Lame { torus } => Box::new(LameParams { torus: torus.clone(), btilde: x }),
        })
    }

    /// Pencil coefficients `(λ, μ)` with `q = f0 + λ f1 + μ`.
    fn pencil_params(&self, x: Complex64) -> (Complex64, Complex64) {
        match self {
            Family::NonEven { .. } => (x, x * x),
            Family::Lame { .. } => (C0, x),
        }
    }
}

/// Rectangle in the parameter plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Window {
    pub re: [f64; 2],
    pub im: [f64; 2],
}

impl Window {
    pub fn square(half: f64) -> Self {
        Self { re: [-half, half], im: [-half, half] }
    }

    pub fn corners(&self) -> [Complex64; 4] {
        [
            Complex64::new(self.re[0], self.im[0]),
            Complex64::new(self.re[1], self.im[0]),
            Complex64::new(self.re[1], self.im[1]),
            Complex64::new(self.re[0], self.im[1]),
        ]
    }

    pub fn contains(&self, x: Complex64) -> bool {
        (self.re[0]..=self.re[1]).contains(&x.re) && (self.im[0]..=self.im[1]).contains(&x.im)
    }

    fn on_boundary(&self, x: Complex64) -> bool {
        let eps = 1e-9 * (self.re[1] - self.re[0]).max(self.im[1] - self.im[0]);
        (x.re - self.re[0]).abs() < eps
            || (x.re - self.re[1]).abs() < eps
            || (x.im - self.im[0]).abs() < eps
            || (x.im - self.im[1]).abs() < eps
    }
}

impl Default for Window {
    fn default() -> Self {
        Self::square(4.0)
    }
}

/// Fast evaluation of `Δ1, Δ2` over a family on a shared integration mesh.
#[derive(Debug, Clone)]
pub struct Discriminant {
    family: Family,
    base_point: Complex64,
    signs: [f64; 2],
    pencils: [SampledPencil; 2],
    /// Largest deviation from adaptive integration at the check points.
    pub mesh_error: f64,
}

impl Discriminant {
    /// Builds the mesh from adaptive runs at the corners, edge midpoints and
    /// centre of `window`, bisecting until check points agree to `1e-9`.
    pub fn new(family: Family, window: &Window, opts: &MonodromyOptions) -> Result<Self> {
        let torus = family.torus().clone();
        let probe = family.equation(C0)?;
        let (z0, _) = monodromy::base_point(probe.as_ref(), opts, &[])?;
        let signs = monodromy::signs_for(probe.as_ref(), z0);
        let [w1, w2, _] = torus.periods();
        let paths = [Path::Segment { start: z0, delta: w1 }, Path::Segment { start: z0, delta: w2 }];
        let c = window.corners();
        let mid = |a: Complex64, b: Complex64| 0.5 * (a + b);
        let anchors = [c[0], c[1], c[2], c[3], mid(c[0], c[1]), mid(c[1], c[2]), mid(c[2], c[3]), mid(c[3], c[0]), mid(c[0], c[2])];
        let mut breaks: [Vec<Vec<f64>>; 2] = [Vec::new(), Vec::new()];
        for &x in &anchors {
            let eq = family.equation(x)?;
            let q = |z: Complex64| eq.potential(z);
            for j in 0..2 {
                breaks[j].push(ode::transfer(&paths[j], &q, &opts.ode)?.1);
            }
        }
        let mut mesh = [ode::merge_breaks(&breaks[0]), ode::merge_breaks(&breaks[1])];
        let checks: Vec<Complex64> = [(0.37, 0.81), (0.73, 0.29), (0.12, 0.55)]
            .iter()
            .map(|&(u, v)| {
                Complex64::new(window.re[0] + u * (window.re[1] - window.re[0]), window.im[0] + v * (window.im[1] - window.im[0]))
            })
            .collect();
        let mut reference = Vec::with_capacity(checks.len());
        for &x in &checks {
            let eq = family.equation(x)?;
            let m = monodromy::integrate_monodromy(eq.as_ref(), &MonodromyOptions { base_point: Some(z0), ..*opts })?;
            reference.push([m.discriminant(0), m.discriminant(1)]);
        }
        let f = |z: Complex64| probe.pencil(z);
        for _ in 0..4 {
            let pencils = [SampledPencil::new(&paths[0], &mesh[0], &f)?, SampledPencil::new(&paths[1], &mesh[1], &f)?];
            let mut d = Self { family: family.clone(), base_point: z0, signs, pencils, mesh_error: 0.0 };
            for (x, r) in checks.iter().zip(&reference) {
                let got = d.eval_both(*x);
                for j in 0..2 {
                    d.mesh_error = d.mesh_error.max((got[j] - r[j]).norm() / (1.0 + r[j].norm()));
                }
            }
            if d.mesh_error < 1e-9 {
                return Ok(d);
            }
            mesh = [ode::bisect_breaks(&mesh[0]), ode::bisect_breaks(&mesh[1])];
        }
        Err(Error::NoConvergence { what: "sampled integration mesh".into(), residual: f64::NAN })
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn base_point(&self) -> Complex64 {
        self.base_point
    }

    /// `Δ_j(x)` for `j ∈ {0, 1}`.
    pub fn eval(&self, j: usize, x: Complex64) -> Complex64 {
        let (l, m) = self.family.pencil_params(x);
        0.5 * self.signs[j] * self.pencils[j].transfer(l, m).trace()
    }

    pub fn eval_both(&self, x: Complex64) -> [Complex64; 2] {
        [self.eval(0, x), self.eval(1, x)]
    }

    /// `Δ_j'(x)` by a central difference.
    pub fn derivative(&self, j: usize, x: Complex64) -> Complex64 {
        let h = 1e-5 * (1.0 + x.norm());
        (self.eval(j, x + h) - self.eval(j, x - h)) / (2.0 * h)
    }

    /// `ord_{x0}(Δ_j² - 1)` by the argument principle.
    pub fn order(&self, j: usize, x0: Complex64, radius: f64) -> f64 {
        let vals: Vec<Complex64> = (0..64)
            .map(|k| {
                let d = self.eval(j, x0 + Complex64::from_polar(radius, std::f64::consts::TAU * k as f64 / 64.0));
                d * d - 1.0
            })
            .collect();
        quad::winding_number(&vals)
    }

    /// Newton on `Δ_j = target` from `x`; converges linearly to double roots.
    pub fn solve(&self, j: usize, target: f64, mut x: Complex64) -> Option<Complex64> {
        for _ in 0..120 {
            let f = self.eval(j, x) - target;
            if f.norm() < 1e-14 {
                return Some(x);
            }
            let step = f / self.derivative(j, x);
            if !step.norm().is_finite() {
                return None;
            }
            x -= step;
            if step.norm() < 1e-13 * (1.0 + x.norm()) {
                return Some(x);
            }
        }
        None
    }
}

/// `Δ_j` sampled on an `n × n` grid over a window (row-major, `Im` rows).
#[derive(Debug, Clone, Serialize)]
pub struct DiscriminantGrid {
    pub j: usize,
    pub window: Window,
    pub n: usize,
    /// Non-finite entries mark nodes where evaluation failed.
    pub values: Vec<Complex64>,
}

impl DiscriminantGrid {
    pub fn node(&self, ix: usize, iy: usize) -> Complex64 {
        grid_point(&self.window, (self.n - 1) as f64, ix as f64, iy as f64)
    }

    pub fn at(&self, ix: usize, iy: usize) -> Complex64 {
        self.values[iy * self.n + ix]
    }

    /// Node spacing along the real direction.
    pub fn resolution(&self) -> f64 {
        (self.window.re[1] - self.window.re[0]) / (self.n - 1) as f64
    }
}

fn grid_point(w: &Window, steps: f64, fx: f64, fy: f64) -> Complex64 {
    Complex64::new(w.re[0] + (w.re[1] - w.re[0]) * fx / steps, w.im[0] + (w.im[1] - w.im[0]) * fy / steps)
}

fn map_points(disc: &Discriminant, j: usize, pts: &[Complex64]) -> Vec<Complex64> {
    let f = |x: &Complex64| {
        let d = disc.eval(j, *x);
        if d.re.is_finite() && d.im.is_finite() {
            d
        } else {
            Complex64::new(f64::NAN, f64::NAN)
        }
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        pts.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        pts.iter().map(f).collect()
    }
}

/// Samples `Δ_j` on an `n × n` grid.
pub fn discriminant_grid(disc: &Discriminant, j: usize, window: &Window, n: usize) -> Result<DiscriminantGrid> {
    if n < 2 || j > 1 {
        return Err(Error::Config(format!("grid needs n ≥ 2 and j ∈ {{0, 1}} (got n = {n}, j = {j})")));
    }
    let pts: Vec<Complex64> = (0..n * n).map(|k| grid_point(window, (n - 1) as f64, (k % n) as f64, (k / n) as f64)).collect();
    Ok(DiscriminantGrid { j, window: *window, n, values: map_points(disc, j, &pts) })
}

/// Kind of a traced arc end.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EndKind {
    /// A finite endpoint of the spectral set.
    Endpoint,
    /// The arc leaves the window.
    Boundary,
    /// A junction where the arc meets others (even degree other than 2).
    Junction,
}

#[derive(Debug, Clone, Serialize)]
pub struct Arc {
    pub points: Vec<Complex64>,
    pub ends: [EndKind; 2],
}

impl Arc {
    pub fn is_bounded(&self) -> bool {
        !self.ends.contains(&EndKind::Boundary)
    }
}

/// A finite endpoint with its refinement status.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TracedEndpoint {
    pub t: Complex64,
    /// `+1` or `-1`, the value of `Δ_j` there.
    pub target: f64,
    /// Newton converged to `Δ_j = target` within two grid spacings.
    pub refined: bool,
    /// Fitted `ord(Δ_j² - 1)` at the refined point.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub order: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ArcSet {
    pub j: usize,
    pub window: Window,
    pub resolution: f64,
    pub arcs: Vec<Arc>,
    pub endpoints: Vec<TracedEndpoint>,
    /// Set when distinct crossings fall closer than the fine spacing.
    pub coarse_warning: bool,
}

/// Options of the arc extraction.
#[derive(Debug, Clone, Copy)]
pub struct ExtractOptions {
    /// Subdivision factor for cells near `|Re Δ| = 1`.
    pub refine: usize,
    /// Cells with corners on both sides of `1 ± margin` in `|Re Δ|` are refined.
    pub margin: f64,
    /// `|Im Δ| ≤ snap (1 + |Δ|)` is treated as exactly zero.
    pub snap: f64,
    /// Radius of the argument-principle circle at endpoints.
    pub order_radius: f64,
}

impl Default for ExtractOptions {
    fn default() -> Self {
        Self { refine: 4, margin: 0.5, snap: 1e-9, order_radius: 1e-2 }
    }
}

#[derive(Clone, Copy)]
struct Node {
    pos: Complex64,
    im: f64,
    re: f64,
}

fn node_from(pos: Complex64, d: Complex64, snap: f64) -> Node {
    let im = if d.im.abs() <= snap * (1.0 + d.norm()) { 0.0 } else { d.im };
    Node { pos, im, re: d.re }
}

/// `(position, Re Δ)` where `Im Δ` changes class along `a → b`.
fn crossing(a: &Node, b: &Node) -> Option<(Complex64, f64)> {
    if (a.im >= 0.0) == (b.im >= 0.0) {
        return None;
    }
    let t = a.im / (a.im - b.im);
    Some((a.pos + (b.pos - a.pos) * t, a.re + (b.re - a.re) * t))
}

/// Marching-squares segments of one cell, corners counter-clockwise from the lower left.
fn cell_segments(c: [&Node; 4], out: &mut Vec<[(Complex64, f64); 2]>) {
    if c.iter().any(|n| !n.im.is_finite() || !n.re.is_finite()) {
        return;
    }
    let e: [Option<(Complex64, f64)>; 4] = [crossing(c[0], c[1]), crossing(c[1], c[2]), crossing(c[2], c[3]), crossing(c[3], c[0])];
    let hits: Vec<usize> = (0..4).filter(|&k| e[k].is_some()).collect();
    match hits.len() {
        2 => out.push([e[hits[0]].unwrap(), e[hits[1]].unwrap()]),
        4 => {
            let centre = c.iter().map(|n| n.im).sum::<f64>() >= 0.0;
            for k in 0..4 {
                if (c[k].im >= 0.0) != centre {
                    out.push([e[(k + 3) % 4].unwrap(), e[k].unwrap()]);
                }
            }
        }
        _ => {}
    }
}

/// A grid position with its `|Re Δ|`.
type Sample = (Complex64, f64);

/// Part of `a → b` with `|Re Δ| ≤ 1`, flagging which ends were clipped.
fn clip(a: Sample, b: Sample) -> Option<([Sample; 2], [bool; 2])> {
    let (ra, rb) = (a.1, b.1);
    let (lo, hi) = if (rb - ra).abs() < 1e-300 {
        if ra.abs() <= 1.0 {
            (0.0, 1.0)
        } else {
            return None;
        }
    } else {
        let t1 = (-1.0 - ra) / (rb - ra);
        let t2 = (1.0 - ra) / (rb - ra);
        (t1.min(t2).max(0.0), t1.max(t2).min(1.0))
    };
    if hi <= lo {
        return None;
    }
    let at = |t: f64| (a.0 + (b.0 - a.0) * t, ra + (rb - ra) * t);
    Some(([at(lo), at(hi)], [lo > 0.0, hi < 1.0]))
}

struct Graph {
    pos: Vec<Complex64>,
    re: Vec<f64>,
    clipped: Vec<bool>,
    adj: Vec<Vec<usize>>,
    index: HashMap<(i64, i64), usize>,
    quantum: f64,
}

impl Graph {
    fn new(quantum: f64) -> Self {
        Self { pos: Vec::new(), re: Vec::new(), clipped: Vec::new(), adj: Vec::new(), index: HashMap::new(), quantum }
    }

    fn vertex(&mut self, p: Complex64, re: f64, clipped: bool) -> usize {
        let key = ((p.re / self.quantum).round() as i64, (p.im / self.quantum).round() as i64);
        if let Some(&v) = self.index.get(&key) {
            self.clipped[v] |= clipped;
            return v;
        }
        let v = self.pos.len();
        self.pos.push(p);
        self.re.push(re);
        self.clipped.push(clipped);
        self.adj.push(Vec::new());
        self.index.insert(key, v);
        v
    }

    fn edge(&mut self, a: usize, b: usize) {
        if a != b && !self.adj[a].contains(&b) {
            self.adj[a].push(b);
            self.adj[b].push(a);
        }
    }

    /// Joins `b` into `a`.
    fn merge(&mut self, a: usize, b: usize) {
        let nb = std::mem::take(&mut self.adj[b]);
        for v in nb {
            self.adj[v].retain(|&x| x != b);
            self.edge(a, v);
        }
    }
}

/// Traces `σ_j` from a coarse grid, refining near `|Re Δ| = 1`.
pub fn extract_arcs(disc: &Discriminant, grid: &DiscriminantGrid, opts: &ExtractOptions) -> ArcSet {
    let (n, r) = (grid.n, opts.refine.max(1));
    let steps = ((n - 1) * r) as f64;
    let w = grid.window;
    let coarse: Vec<Node> = (0..n * n).map(|k| node_from(grid.node(k % n, k / n), grid.values[k], opts.snap)).collect();
    let cn = |ix: usize, iy: usize| &coarse[iy * n + ix];

    // cells straddling |Re Δ| = 1 on a contour, dilated by one cell
    let mut flagged = vec![false; (n - 1) * (n - 1)];
    for iy in 0..n - 1 {
        for ix in 0..n - 1 {
            let c = [cn(ix, iy), cn(ix + 1, iy), cn(ix + 1, iy + 1), cn(ix, iy + 1)];
            let mut segs = Vec::new();
            cell_segments(c, &mut segs);
            let touches_zero = c.iter().any(|k| k.im == 0.0);
            let low = c.iter().any(|k| k.re.abs() <= 1.0 + opts.margin);
            let high = c.iter().any(|k| k.re.abs() >= 1.0 - opts.margin);
            if (!segs.is_empty() || touches_zero) && low && high {
                for dy in -1i64..=1 {
                    for dx in -1i64..=1 {
                        let (x, y) = (ix as i64 + dx, iy as i64 + dy);
                        if (0..(n - 1) as i64).contains(&x) && (0..(n - 1) as i64).contains(&y) {
                            flagged[y as usize * (n - 1) + x as usize] = true;
                        }
                    }
                }
            }
        }
    }

    // fine nodes of flagged cells, coarse nodes reused
    let mut fine: HashMap<(usize, usize), Node> = HashMap::new();
    if r > 1 {
        let mut wanted: Vec<(usize, usize)> = Vec::new();
        for iy in 0..n - 1 {
            for ix in 0..n - 1 {
                if !flagged[iy * (n - 1) + ix] {
                    continue;
                }
                for sy in 0..=r {
                    for sx in 0..=r {
                        let key = (ix * r + sx, iy * r + sy);
                        if sx % r == 0 && sy % r == 0 {
                            fine.entry(key).or_insert(*cn(key.0 / r, key.1 / r));
                        } else if let Entry::Vacant(v) = fine.entry(key) {
                            v.insert(Node { pos: C0, im: f64::NAN, re: f64::NAN });
                            wanted.push(key);
                        }
                    }
                }
            }
        }
        let pts: Vec<Complex64> = wanted.iter().map(|&(fx, fy)| grid_point(&w, steps, fx as f64, fy as f64)).collect();
        let vals = map_points(disc, grid.j, &pts);
        for ((key, p), d) in wanted.into_iter().zip(pts).zip(vals) {
            fine.insert(key, node_from(p, d, opts.snap));
        }
    }

    let res = grid.resolution();
    let mut g = Graph::new(res * 1e-9);
    let mut segs = Vec::new();
    for iy in 0..n - 1 {
        for ix in 0..n - 1 {
            segs.clear();
            if r > 1 && flagged[iy * (n - 1) + ix] {
                for sy in 0..r {
                    for sx in 0..r {
                        let (fx, fy) = (ix * r + sx, iy * r + sy);
                        let c = [&fine[&(fx, fy)], &fine[&(fx + 1, fy)], &fine[&(fx + 1, fy + 1)], &fine[&(fx, fy + 1)]];
                        cell_segments(c, &mut segs);
                    }
                }
            } else {
                cell_segments([cn(ix, iy), cn(ix + 1, iy), cn(ix + 1, iy + 1), cn(ix, iy + 1)], &mut segs);
            }
            for s in &segs {
                if let Some((s, cl)) = clip(s[0], s[1]) {
                    if (s[1].0 - s[0].0).norm() < res * 1e-9 {
                        continue;
                    }
                    let a = g.vertex(s[0].0, s[0].1, cl[0]);
                    let b = g.vertex(s[1].0, s[1].1, cl[1]);
                    g.edge(a, b);
                }
            }
        }
    }

    // seams between refined and coarse cells leave unmatched crossings
    let fine_res = res / r as f64;
    let loose: Vec<usize> = (0..g.pos.len()).filter(|&v| g.adj[v].len() == 1 && !g.clipped[v] && !w.on_boundary(g.pos[v])).collect();
    let mut used = vec![false; g.pos.len()];
    let mut coarse_warning = false;
    for (i, &a) in loose.iter().enumerate() {
        if used[a] {
            continue;
        }
        let best =
            loose[i + 1..].iter().filter(|&&b| !used[b]).map(|&b| (b, (g.pos[a] - g.pos[b]).norm())).min_by(|x, y| x.1.total_cmp(&y.1));
        if let Some((b, d)) = best {
            if d < res / 2.0 {
                used[a] = true;
                used[b] = true;
                g.merge(a, b);
            }
        }
    }

    let live = |v: usize, g: &Graph| !g.adj[v].is_empty();
    let radius = opts.order_radius.min(res / 4.0);
    let odd: Vec<usize> = (0..g.pos.len()).filter(|&v| live(v, &g) && g.adj[v].len() % 2 == 1 && !w.on_boundary(g.pos[v])).collect();
    let mut endpoints = Vec::new();
    // a multiple root of Δ_j² - 1 is interior to σ_j; marching squares cuts
    // the corner there, so the loose ends are rejoined at the root
    let mut interior: Vec<(Complex64, usize)> = Vec::new();
    for v in odd {
        let target = if g.re[v] >= 0.0 { 1.0 } else { -1.0 };
        let start = g.pos[v];
        let polished = disc.solve(grid.j, target, start).filter(|x| (x - start).norm() < 2.0 * res);
        let order = polished.map(|x| disc.order(grid.j, x, radius));
        if let (Some(x), Some(o)) = (polished, order) {
            if o.round() >= 2.0 && (o.round() as i64) % 2 == 0 {
                match interior.iter().find(|(y, _)| (x - y).norm() < res) {
                    Some(&(_, u)) => g.merge(u, v),
                    None => {
                        g.pos[v] = x;
                        interior.push((x, v));
                    }
                }
                continue;
            }
        }
        endpoints.push(TracedEndpoint { t: polished.unwrap_or(start), target, refined: polished.is_some(), order });
    }
    for a in 0..endpoints.len() {
        for b in a + 1..endpoints.len() {
            if (endpoints[a].t - endpoints[b].t).norm() < fine_res {
                coarse_warning = true;
            }
        }
    }

    let kind = |v: usize, g: &Graph| {
        if w.on_boundary(g.pos[v]) {
            EndKind::Boundary
        } else if g.adj[v].len() % 2 == 1 {
            EndKind::Endpoint
        } else {
            EndKind::Junction
        }
    };
    let mut visited: HashMap<(usize, usize), ()> = HashMap::new();
    let mut arcs = Vec::new();
    let walk = |start: usize, next: usize, g: &Graph, visited: &mut HashMap<(usize, usize), ()>| -> Option<Arc> {
        if visited.contains_key(&(start.min(next), start.max(next))) {
            return None;
        }
        let mut pts = vec![g.pos[start]];
        let (mut prev, mut cur) = (start, next);
        loop {
            visited.insert((prev.min(cur), prev.max(cur)), ());
            pts.push(g.pos[cur]);
            if g.adj[cur].len() != 2 || cur == start {
                break;
            }
            let nxt = if g.adj[cur][0] == prev { g.adj[cur][1] } else { g.adj[cur][0] };
            if visited.contains_key(&(cur.min(nxt), cur.max(nxt))) {
                break;
            }
            prev = cur;
            cur = nxt;
        }
        let ends = [kind(start, g), kind(cur, g)];
        Some(Arc { points: pts, ends })
    };
    for v in 0..g.pos.len() {
        if live(v, &g) && g.adj[v].len() != 2 {
            for &u in &g.adj[v].clone() {
                if let Some(a) = walk(v, u, &g, &mut visited) {
                    arcs.push(a);
                }
            }
        }
    }
    for v in 0..g.pos.len() {
        if live(v, &g) {
            for &u in &g.adj[v].clone() {
                if let Some(mut a) = walk(v, u, &g, &mut visited) {
                    a.ends = [EndKind::Junction; 2];
                    arcs.push(a);
                }
            }
        }
    }
    ArcSet { j: grid.j, window: w, resolution: res, arcs, endpoints, coarse_warning }
}

/// Root of the spectral polynomial with its multiplicity.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SpectralRoot {
    pub t: Complex64,
    pub multiplicity: u32,
    /// `false` for the double root `T = 0`, which is interior to `σ_j`.
    pub endpoint: bool,
}

/// Roots `±sqrt(2℘(p) + e_k)` of the non-even spectral polynomial.
pub fn endpoints(torus: &Torus, p: Complex64) -> Result<Vec<SpectralRoot>> {
    endpoints_from_wp(torus, torus.wp(p)?)
}

/// As [`endpoints`], parameterised by `℘(p)`.
pub fn endpoints_from_wp(torus: &Torus, wp_p: Complex64) -> Result<Vec<SpectralRoot>> {
    crate::ensure_finite("℘(p)", wp_p)?;
    let scale = 1.0 + torus.e().iter().map(|e| e.norm()).fold(0.0, f64::max);
    let mut out = Vec::with_capacity(6);
    for e in torus.e() {
        let a = 2.0 * wp_p + e;
        if a.norm() < 1e-9 * scale {
            out.push(SpectralRoot { t: C0, multiplicity: 2, endpoint: false });
        } else {
            let t = a.sqrt();
            out.push(SpectralRoot { t, multiplicity: 1, endpoint: true });
            out.push(SpectralRoot { t: -t, multiplicity: 1, endpoint: true });
        }
    }
    Ok(out)
}

/// The seven shapes of `σ_1` for rectangular tori and real `℘(p)`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Regime {
    /// `1..=7`; even indices are the threshold cases.
    pub index: u8,
    /// `(-e1/2, -e3/2, -e2/2)`, increasing.
    pub thresholds: [f64; 3],
    /// Within `1e-6` of a threshold without being routed to it.
    pub near_threshold: bool,
}

fn rectangular_e(torus: &Torus) -> Result<[f64; 3]> {
    if torus.tau().re.abs() > 1e-12 {
        return Err(Error::OutsideDomain(format!("regimes need τ ∈ iR, got {}", torus.tau())));
    }
    let e = torus.e();
    Ok([e[0].re, e[1].re, e[2].re])
}

/// Regime of `℘(p)`; inputs within `1e-9` of a threshold are the threshold case.
pub fn classify_regime(torus: &Torus, wp_p: f64) -> Result<Regime> {
    let e = rectangular_e(torus)?;
    if !wp_p.is_finite() {
        return Err(Error::NonFinite { name: "℘(p)" });
    }
    let th = [-e[0] / 2.0, -e[2] / 2.0, -e[1] / 2.0];
    let tol = 1e-9 * (1.0 + wp_p.abs());
    let mut index = 1u8;
    let mut near = false;
    for (k, &t) in th.iter().enumerate() {
        let d = wp_p - t;
        if d.abs() <= tol {
            index = 2 * k as u8 + 2;
            break;
        }
        near |= d.abs() < 1e-6;
        if d > 0.0 {
            index = 2 * k as u8 + 3;
        }
    }
    Ok(Regime { index, thresholds: th, near_threshold: near && index % 2 == 1 })
}

/// A piece of a predicted spectral set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Piece {
    Segment {
        a: Complex64,
        b: Complex64,
    },
    /// `{from + s·dir : s ≥ 0}` with `|dir| = 1`.
    Ray {
        from: Complex64,
        dir: Complex64,
    },
}

impl Piece {
    /// Distance from `x` to the piece.
    pub fn distance(&self, x: Complex64) -> f64 {
        match *self {
            Piece::Segment { a, b } => point_segment(x, a, b),
            Piece::Ray { from, dir } => {
                let s = ((x - from) * dir.conj()).re.max(0.0);
                (x - from - dir * s).norm()
            }
        }
    }

    /// Points along the part inside `w`, spaced by at most `h`.
    pub fn samples(&self, w: &Window, h: f64) -> Vec<Complex64> {
        let (a, b) = match *self {
            Piece::Segment { a, b } => (a, b),
            Piece::Ray { from, dir } => {
                let reach = (w.re[1] - w.re[0]).hypot(w.im[1] - w.im[0]) + from.norm();
                (from, from + dir * reach)
            }
        };
        let k = ((b - a).norm() / h).ceil().max(1.0) as usize;
        (0..=k).map(|i| a + (b - a) * (i as f64 / k as f64)).filter(|x| w.contains(*x)).collect()
    }
}

fn point_segment(x: Complex64, a: Complex64, b: Complex64) -> f64 {
    let d = b - a;
    let dd = d.norm_sqr();
    if dd == 0.0 {
        return (x - a).norm();
    }
    let t = (((x - a) * d.conj()).re / dd).clamp(0.0, 1.0);
    (x - a - d * t).norm()
}

/// Preimage of the real interval `[lo, hi]` (either end possibly infinite)
/// under `T ↦ T²`.
fn sqrt_preimage(lo: f64, hi: f64, out: &mut Vec<Piece>) {
    let re = |x: f64| Complex64::new(x, 0.0);
    let im = |y: f64| Complex64::new(0.0, y);
    if lo >= 0.0 {
        let (a, b) = (lo.sqrt(), hi.sqrt());
        if hi.is_infinite() {
            out.push(Piece::Ray { from: re(a), dir: re(1.0) });
            out.push(Piece::Ray { from: re(-a), dir: re(-1.0) });
        } else {
            out.push(Piece::Segment { a: re(a), b: re(b) });
            out.push(Piece::Segment { a: re(-b), b: re(-a) });
        }
    } else if hi <= 0.0 {
        let (a, b) = ((-hi).sqrt(), (-lo).sqrt());
        if lo.is_infinite() {
            out.push(Piece::Ray { from: im(a), dir: CI });
            out.push(Piece::Ray { from: im(-a), dir: -CI });
        } else {
            out.push(Piece::Segment { a: im(a), b: im(b) });
            out.push(Piece::Segment { a: im(-b), b: im(-a) });
        }
    } else {
        sqrt_preimage(lo, 0.0, out);
        sqrt_preimage(0.0, hi, out);
    }
}

/// Lamé spectral sets of a rectangular torus as real intervals:
/// `σ̃1 = (-∞, e2] ∪ [e3, e1]`, `σ̃2 = [e2, e3] ∪ [e1, ∞)`.
pub fn lame_intervals(torus: &Torus, j: usize) -> Result<[(f64, f64); 2]> {
    let e = rectangular_e(torus)?;
    Ok(match j {
        0 => [(f64::NEG_INFINITY, e[1]), (e[2], e[0])],
        _ => [(e[1], e[2]), (e[0], f64::INFINITY)],
    })
}

/// Predicted `σ_j` of the non-even family for a rectangular torus and real
/// `℘(p)`, as the preimage of `σ̃_j` under `T ↦ T² - 2℘(p)`.
pub fn predicted_sigma(torus: &Torus, wp_p: f64, j: usize) -> Result<Vec<Piece>> {
    let mut out = Vec::new();
    for (lo, hi) in lame_intervals(torus, j)? {
        sqrt_preimage(lo + 2.0 * wp_p, hi + 2.0 * wp_p, &mut out);
    }
    Ok(out)
}

/// Symmetric Hausdorff distance between traced arcs and predicted pieces,
/// both restricted to the window.
pub fn hausdorff_to_pieces(set: &ArcSet, pieces: &[Piece]) -> f64 {
    let h = set.resolution / 8.0;
    let traced_segments: Vec<(Complex64, Complex64)> =
        set.arcs.iter().flat_map(|a| a.points.windows(2).map(|w| (w[0], w[1])).collect::<Vec<_>>()).collect();
    let to_traced = |x: Complex64| traced_segments.iter().map(|&(a, b)| point_segment(x, a, b)).fold(f64::INFINITY, f64::min);
    let to_pred = |x: Complex64| pieces.iter().map(|p| p.distance(x)).fold(f64::INFINITY, f64::min);
    let mut d: f64 = 0.0;
    for p in pieces {
        for x in p.samples(&set.window, h) {
            d = d.max(to_traced(x));
        }
    }
    for a in &set.arcs {
        for &x in &a.points {
            d = d.max(to_pred(x));
        }
    }
    d
}

/// Hausdorff distance between an arc set and its image under `T ↦ -T`.
pub fn symmetry_defect(set: &ArcSet) -> f64 {
    let mirrored: Vec<Piece> =
        set.arcs.iter().flat_map(|a| a.points.windows(2).map(|w| Piece::Segment { a: -w[0], b: -w[1] }).collect::<Vec<_>>()).collect();
    hausdorff_to_pieces(set, &mirrored)
}

/// A maximal interval of a real sweep with `|Δ_j| ≤ 1`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RealInterval {
    /// `None` when the interval runs into the sweep boundary.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lo: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hi: Option<f64>,
}

/// Sweeps `Δ_j` along `[a, b] ⊂ R` at `n` points and polishes the band edges
/// by bisection on `Re Δ_j = ±1`.
pub fn real_sweep(disc: &Discriminant, j: usize, a: f64, b: f64, n: usize) -> Vec<RealInterval> {
    let xs: Vec<f64> = (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect();
    let pts: Vec<Complex64> = xs.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    let vals = map_points(disc, j, &pts);
    let inside: Vec<bool> = vals.iter().map(|d| d.re.abs() <= 1.0).collect();
    let edge = |k: usize| -> f64 {
        let (mut lo, mut hi) = (xs[k], xs[k + 1]);
        let target = if vals[k].re.abs() > 1.0 { vals[k].re.signum() } else { vals[k + 1].re.signum() };
        let f = |x: f64| disc.eval(j, Complex64::new(x, 0.0)).re - target;
        let flo = f(lo);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if (f(mid) > 0.0) == (flo > 0.0) {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-14 * (1.0 + mid.abs()) {
                break;
            }
        }
        0.5 * (lo + hi)
    };
    let mut out = Vec::new();
    let mut start: Option<Option<f64>> = if inside[0] { Some(None) } else { None };
    for k in 0..n - 1 {
        match (inside[k], inside[k + 1]) {
            (false, true) => start = Some(Some(edge(k))),
            (true, false) => {
                out.push(RealInterval { lo: start.take().flatten(), hi: Some(edge(k)) });
            }
            _ => {}
        }
    }
    if let Some(lo) = start {
        out.push(RealInterval { lo, hi: None });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regime_thresholds_route_to_even_cases() {
        let t = Torus::new(Complex64::new(0.0, 2.0)).unwrap();
        let r = classify_regime(&t, 0.0).unwrap();
        let th = r.thresholds;
        assert!(th[0] < th[1] && th[1] < th[2]);
        let probes = [th[0] - 1.0, th[0], 0.5 * (th[0] + th[1]), th[1], 0.5 * (th[1] + th[2]), th[2], th[2] + 1.0];
        for (k, &w) in probes.iter().enumerate() {
            assert_eq!(classify_regime(&t, w).unwrap().index as usize, k + 1);
        }
    }

    #[test]
    fn predicted_pieces_of_first_regime_are_imaginary() {
        let t = Torus::new(Complex64::new(0.0, 2.0)).unwrap();
        let th = classify_regime(&t, 0.0).unwrap().thresholds;
        let pieces = predicted_sigma(&t, th[0] - 0.2, 0).unwrap();
        assert_eq!(pieces.len(), 4);
        for p in pieces {
            match p {
                Piece::Segment { a, b } => assert!(a.re == 0.0 && b.re == 0.0),
                Piece::Ray { from, dir } => assert!(from.re == 0.0 && dir.re == 0.0),
            }
        }
    }

    #[test]
    fn double_root_at_threshold() {
        let t = Torus::new(Complex64::new(0.0, 2.0)).unwrap();
        let e1 = t.e()[0];
        let roots = endpoints_from_wp(&t, -e1 / 2.0).unwrap();
        assert_eq!(roots.iter().filter(|r| !r.endpoint).count(), 1);
        assert_eq!(roots.iter().filter(|r| r.endpoint).count(), 4);
    }

    #[test]
    fn clip_keeps_inner_part() {
        let (s, cl) = clip((C0, 0.0), (Complex64::new(1.0, 0.0), 2.0)).unwrap();
        assert!((s[1].0.re - 0.5).abs() < 1e-15);
        assert_eq!(cl, [false, true]);
        assert!(clip((C0, 1.5), (CI, 3.0)).is_none());
    }
}
