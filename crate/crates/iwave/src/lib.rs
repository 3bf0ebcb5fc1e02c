//! Internal capillary-gravity solitary waves in two layers with constant
//! vorticity in each layer: critical parameters, dispersion, the spatial
//! linearization, reduced dynamics, profiles, Dirichlet–Neumann operators,
//! energy and momentum functionals, spectra and the stability verdict.

pub mod chebyshev;
pub mod cli;
pub mod dispersion;
pub mod dno_operators;
pub mod error;
pub mod functionals;
pub mod krylov;
pub mod output;
pub mod params;
pub mod profile;
pub mod reduced_dynamics;
pub mod spectral;
pub mod spatial_linear;
pub mod stability;
pub mod verify;

pub use error::{Error, Result};

/// Float formatting used by every emitter: 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    output::format_f64(x)
}
