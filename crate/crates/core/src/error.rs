use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("τ must lie in the upper half plane (got Im τ = {0})")]
    InvalidTau(f64),
    #[error("nome |q| = {0:.3} outside the accuracy envelope |q| < 0.9")]
    NomeTooLarge(f64),
    #[error("non-finite input `{name}`")]
    NonFinite { name: &'static str },
    #[error("z = {z} lies within {distance:.3e} of a pole")]
    PoleProximity { z: Complex64, distance: f64 },
    #[error("p = {0} is a half period or a lattice point; the equation degenerates there")]
    HalfPeriodSingularity(Complex64),
    #[error("integration path blocked: clearance {clearance:.3e} below minimum {minimum:.3e}")]
    PathBlocked { clearance: f64, minimum: f64 },
    #[error("adaptive integrator failed: {0}")]
    IntegratorFailure(String),
    #[error("monodromy matrices admit no consistent simultaneous eigenbasis (residual {0:.3e})")]
    InconsistentEigenpairing(f64),
    #[error("degenerate configuration: {0}")]
    Degenerate(String),
    #[error("iteration did not converge: {what} (last residual {residual:.3e})")]
    NoConvergence { what: String, residual: f64 },
    #[error("input outside the admissible domain: {0}")]
    OutsideDomain(String),
    #[error("{0}")]
    Config(String),
}

impl Error {
    /// True for failures caused by invalid input rather than by numerics.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::InvalidTau(_)
                | Error::NomeTooLarge(_)
                | Error::NonFinite { .. }
                | Error::HalfPeriodSingularity(_)
                | Error::OutsideDomain(_)
                | Error::Config(_)
        )
    }
}
