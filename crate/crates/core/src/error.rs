use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("not an absolute velocity: u·u = {square}, u⁰ = {time}")]
    NotAbsoluteVelocity { square: f64, time: f64 },

    #[error("not a unit spacelike vector: n·n = {square}")]
    NotUnitSpacelike { square: f64 },

    #[error("vectors are not Lorentz-orthogonal: u·n = {product}")]
    NotOrthogonal { product: f64 },

    #[error("direction vector must be nonzero and finite")]
    InvalidDirection,

    #[error("acceleration must be finite and non-negative, got {0}")]
    InvalidAcceleration(f64),

    #[error("shell radius must be finite and positive, got {0}")]
    InvalidRadius(f64),

    #[error("charge density must be finite, got {0}")]
    InvalidCharge(f64),

    #[error("wedge violation: 1 + ε a (n_c·n) = {factor} must stay positive (ε a = {eps_a})")]
    WedgeViolation { eps_a: f64, factor: f64 },

    #[error("invalid quadrature order: {0}")]
    InvalidQuadratureOrder(String),

    #[error("field point has no retarded intersection with the worldline (beyond the horizon)")]
    Horizon,

    #[error("field point lies on the worldline")]
    OnWorldline,

    #[error("retarded-time solver did not converge (residual {residual:e})")]
    NoConvergence { residual: f64 },

    #[error("field point is inside the world tube (distance to centre {distance} ≤ radius {radius})")]
    InteriorPoint { distance: f64, radius: f64 },

    #[error("test function support does not clear the world tube (clearance {clearance}, required {required})")]
    SupportOverlap { clearance: f64, required: f64 },

    #[error("test function radius must be positive and finite, got {0}")]
    InvalidSupport(f64),

    #[error("integrand produced a non-finite value")]
    NonFinite,

    #[error("s-window truncation: integrand does not vanish outside [{s_min}, {s_max}]")]
    WindowTruncation { s_min: f64, s_max: f64 },

    #[error("need at least {needed} sweep values, got {got}")]
    InsufficientSweep { needed: usize, got: usize },
}
