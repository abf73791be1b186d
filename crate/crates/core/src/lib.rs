//! Retarded electromagnetic potentials of a rigidly, uniformly accelerated
//! charged spherical shell, compared with those of an equal point charge at
//! its centre.
//!
//! The crate is organised bottom-up:
//!
//! * [`spacetime`]: four-vectors, events, the Lorentz product, boosts and projections.
//! * [`worldline`]: inertial and hyperbolic worldlines, the centre boost `L(s)`,
//!   and the shell's constituent worldlines.
//! * [`tube`]: the world tube, its surface measure and sphere quadrature.
//! * [`retardation`]: retarded-time root finding.
//! * [`testfn`]: compactly supported bump test functions.
//! * [`compare`]: point and shell potentials, distributional pairings, the
//!   predicted leading-order difference and the equality verdict.
//! * [`suite`]: the invariant checks run by `worldtube verify`.

pub mod compare;
pub mod error;
pub mod quadrature;
pub mod retardation;
pub mod spacetime;
pub mod suite;
pub mod testfn;
pub mod tube;
pub mod worldline;

pub use error::{Error, Result};
pub use spacetime::{Event, FourVector, Frame, LinMap4, Velocity};
pub use tube::{ShellConfig, SphereQuadrature};
pub use worldline::{UniformWorldline, Worldline};
