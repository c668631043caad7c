//! Numerical toolkit for the generalized Lamé equation
//!
//! ```text
//! y''(z) = [ 2℘(z) + 3/4 (℘(z+p) + ℘(z-p)) + T1 (ζ(z+p) - ζ(z)) + T2 (ζ(z-p) - ζ(z)) + B ] y(z)
//! ```
//!
//! on the torus `C / (Z + Zτ)`, together with its link to the classical Lamé
//! equation `y'' = (2℘(z) + B̃) y`.
//!
//! Modules, bottom up:
//!
//! * [`elliptic`]: Weierstrass ℘, ζ, log σ and the premodular form `Z(r,s,τ)`.
//! * [`monodromy`]: potentials, the apparent-singularity condition and monodromy matrices.
//! * [`spectral`]: the spectral polynomial, Baker–Akhiezer data and the monodromy datum.
//! * [`equivalence`]: trace comparisons between the two equations and the degeneration limits.
//! * [`spectral_sets`]: Hill-discriminant grids, arc extraction and regime predictions.
//! * [`metrics`]: premodular zeros and blow-up sets of the curvature equation.

pub mod elliptic;
pub mod equivalence;
mod error;
pub mod linalg;
pub mod metrics;
pub mod monodromy;
pub mod ode;
pub mod quad;
pub mod spectral;
pub mod spectral_sets;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Complex zero.
pub const C0: Complex64 = Complex64::new(0.0, 0.0);
/// Complex one.
pub const C1: Complex64 = Complex64::new(1.0, 0.0);
/// Imaginary unit.
pub const CI: Complex64 = Complex64::new(0.0, 1.0);

/// Rejects NaN and infinite components.
pub fn ensure_finite(name: &'static str, z: Complex64) -> Result<Complex64> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(z)
    } else {
        Err(Error::NonFinite { name })
    }
}
