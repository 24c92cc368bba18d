//! Layer-potential solver for the Helmholtz transmission problem with two
//! nearly touching disks in the quasi-static regime.
//!
//! The crate is organized bottom-up:
//!
//! - [`specfun`]: Bessel functions and the fundamental solution.
//! - [`geom`]: the disk pair, fixed points of the reflections and the singular function `q_ω`.
//! - [`quad`]: graded trapezoid rules and the log-kernel weights.
//! - [`layerpot`]: Nyström matrices of the layer potentials.
//! - [`solver`]: the boundary-integral solves and field evaluation.
//! - [`asym`]: closed-form predictions and gap sweeps.
//!
//! ```
//! use gapfield::geom;
//!
//! let cfg = geom::make_config(1.0, 0.0, 1.0, 0.0, 1e-2, 1e-3, 1e-3)?;
//! let fp = geom::fixed_points_closed(&cfg);
//! assert!(fp.p1.x1 < 0.0 && fp.p2.x1 > 0.0);
//! # Ok::<(), gapfield::Error>(())
//! ```

pub mod asym;
pub mod geom;
pub mod layerpot;
mod linalg;
pub mod quad;
pub mod solver;
pub mod specfun;

use thiserror::Error;

pub use geom::{DiskPair, FixedPoints, ScaleParams};
pub use quad::QuadratureRule;
pub use solver::{BoundarySolution, IncidentField, IncidentKind};
pub use specfun::{Complex, Point2};

/// Library version embedded in reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error(transparent)]
    Specfun(#[from] specfun::SpecfunError),
    #[error(transparent)]
    Geometry(#[from] geom::GeomError),
    #[error(transparent)]
    Quadrature(#[from] quad::QuadError),
    #[error(transparent)]
    Solver(#[from] solver::SolverError),
    #[error(transparent)]
    Asymptotics(#[from] asym::AsymError),
}

impl Error {
    /// Whether the error comes from invalid input rather than a numerical failure.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::Geometry(geom::GeomError::Invalid { .. })
                | Error::Geometry(geom::GeomError::DiskIndex(_))
                | Error::Quadrature(_)
                | Error::Solver(solver::SolverError::Invalid(_))
                | Error::Solver(solver::SolverError::Quadrature(_))
                | Error::Asymptotics(asym::AsymError::ProbeDensity(_))
                | Error::Asymptotics(asym::AsymError::TooFewPoints(_))
        )
    }
}
