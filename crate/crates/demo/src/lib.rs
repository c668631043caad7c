//! WebAssembly bindings for the browser demo. Every export returns a JSON
//! string; failures come back as `{"error": "..."}` rather than exceptions.

use lame_spectra::elliptic::Torus;
use lame_spectra::equivalence;
use lame_spectra::metrics;
use lame_spectra::monodromy::MonodromyOptions;
use lame_spectra::spectral_sets::{self as sets, Discriminant, ExtractOptions, Family, Window};
use lame_spectra::{Complex64, Result};
use serde::Serialize;
use wasm_bindgen::prelude::*;

fn respond<T: Serialize>(r: Result<T>) -> String {
    match r {
        Ok(v) => serde_json::to_string(&v).unwrap_or_else(|e| error_json(&e.to_string())),
        Err(e) => error_json(&e.to_string()),
    }
}

fn error_json(msg: &str) -> String {
    serde_json::json!({ "error": msg }).to_string()
}

#[derive(Serialize)]
struct SpectralView {
    arcs: Vec<Vec<[f64; 2]>>,
    bounded: Vec<bool>,
    endpoints: Vec<[f64; 2]>,
    roots: Vec<[f64; 2]>,
    regime: Option<u8>,
    resolution: f64,
}

fn xy(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

/// Traces `σ_j` (`j` = 1 or 2) of the non-even family at `℘(p) = wp` on the
/// square window `[-half, half]²` with `n` nodes per side.
#[wasm_bindgen]
pub fn spectral_arcs(tau_re: f64, tau_im: f64, wp_re: f64, wp_im: f64, j: u32, n: u32, half: f64) -> String {
    respond((|| {
        let torus = Torus::new(Complex64::new(tau_re, tau_im))?;
        let wp = Complex64::new(wp_re, wp_im);
        let p = torus.wp_inverse(wp)?;
        let window = Window::square(half);
        let disc = Discriminant::new(Family::NonEven { torus: torus.clone(), p }, &window, &MonodromyOptions::default())?;
        let jj = if j == 2 { 1 } else { 0 };
        let grid = sets::discriminant_grid(&disc, jj, &window, n.clamp(21, 201) as usize)?;
        let set = sets::extract_arcs(&disc, &grid, &ExtractOptions::default());
        let regime = if tau_re == 0.0 && wp_im == 0.0 { Some(sets::classify_regime(&torus, wp_re)?.index) } else { None };
        Ok(SpectralView {
            arcs: set.arcs.iter().map(|a| a.points.iter().copied().map(xy).collect()).collect(),
            bounded: set.arcs.iter().map(|a| a.is_bounded()).collect(),
            endpoints: set.endpoints.iter().map(|e| xy(e.t)).collect(),
            roots: sets::endpoints_from_wp(&torus, wp)?.iter().filter(|r| r.endpoint).map(|r| xy(r.t)).collect(),
            regime,
            resolution: set.resolution,
        })
    })())
}

/// Hill discriminants of the generalized and classical equations at
/// corresponding parameters.
#[wasm_bindgen]
pub fn trace_comparison(tau_re: f64, tau_im: f64, p_re: f64, p_im: f64, t_re: f64, t_im: f64) -> String {
    respond((|| {
        let torus = Torus::new(Complex64::new(tau_re, tau_im))?;
        equivalence::verify_trace_equivalence(&torus, Complex64::new(p_re, p_im), Complex64::new(t_re, t_im), &MonodromyOptions::default())
    })())
}

/// Blow-up sets for the premodular zero of `(r, s)` at singularity `p`;
/// `p` defaults to the exceptional point when both parts are NaN.
#[wasm_bindgen]
pub fn blowup(r: f64, s: f64, p_re: f64, p_im: f64) -> String {
    #[derive(Serialize)]
    struct View {
        tau: Complex64,
        p: Complex64,
        p_star: Complex64,
        singular: bool,
        config: Option<metrics::BlowupConfig>,
        even_set: [Complex64; 2],
    }
    respond((|| {
        let zero = metrics::premodular_zero_tau(r, s, None)?;
        let torus = Torus::new(zero.tau)?;
        let p_star = metrics::p_star(&zero)?.p;
        let p = if p_re.is_nan() && p_im.is_nan() { p_star } else { Complex64::new(p_re, p_im) };
        let singular = metrics::blowup_at_singularity_check(&torus, r, s, p)?.blows_up;
        let config = if singular { None } else { Some(metrics::blowup_sets(&torus, p, r, s)?) };
        let sigma = Complex64::new(r, 0.0) + s * zero.tau;
        Ok(View { tau: zero.tau, p, p_star, singular, config, even_set: metrics::even_blowup_set(&torus, sigma)? })
    })())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exports_return_json() {
        let v: serde_json::Value = serde_json::from_str(&trace_comparison(0.0, 2.0, 0.23, 0.61, 0.7, 0.2)).unwrap();
        assert!(v["max_abs_diff"].as_f64().unwrap() < 1e-6);
        let v: serde_json::Value = serde_json::from_str(&blowup(0.3, 0.35, f64::NAN, f64::NAN)).unwrap();
        assert_eq!(v["singular"], false);
        let v: serde_json::Value = serde_json::from_str(&spectral_arcs(0.0, 2.0, 1.5, 0.0, 1, 41, 4.0)).unwrap();
        assert_eq!(v["regime"], 3);
        assert!(!v["arcs"].as_array().unwrap().is_empty());
        let v: serde_json::Value = serde_json::from_str(&blowup(0.1, 0.1, f64::NAN, f64::NAN)).unwrap();
        assert!(v["error"].is_string());
    }
}
