//! Cohn–Elkies linear programming bounds for sphere packings, computed as a
//! semidefinite program over polynomial-times-Gaussian radial functions.

pub mod laguerre;
mod program;
mod radial;

use thiserror::Error;

use crate::sdp::{SdpError, SdpStatus};

pub use laguerre::{gauss_laguerre, laguerre_coeffs, laguerre_eval, LaguerreBasis};
pub use program::{
    build_sphere_sdp, grid_check, sphere_bound, Basis, GridReport, SolverSummary, SphereReport, SphereSettings,
    MIN_DEGREE,
};
pub use radial::{ball_volume, eval_f, eval_fhat, transform_at_origin, transform_value, RadialFunction};

#[derive(Debug, Error)]
pub enum SphereError {
    #[error("degree {degree} is below the minimum {minimum}")]
    DegreeTooSmall { degree: usize, minimum: usize },
    #[error("dimension must be at least 1, got {0}")]
    InvalidDimension(usize),
    #[error("invalid radial function: {0}")]
    InvalidFunction(String),
    #[error("solver stopped with status {status:?}")]
    Solver { status: SdpStatus, summary: Box<SolverSummary> },
    #[error("solved function fails the grid checks (min p = {:.3e}, max f beyond 2 = {:.3e}, volume margin = {:.3e})",
        .0.grid.min_p, .0.grid.max_f_outside, .0.grid.volume_margin)]
    VerificationFailed(Box<SphereReport>),
    #[error(transparent)]
    Sdp(#[from] SdpError),
}
