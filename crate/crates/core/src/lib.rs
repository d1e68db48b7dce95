//! Coverage probability and average rate of pico users in a two-tier
//! network whose macro tier runs fractional or soft frequency reuse.
//!
//! Interfering base stations form Poisson point processes outside a guard
//! region around the tagged picocell; fading is Rayleigh. The [`analytic`]
//! module evaluates the closed-form and single-integral expressions; the
//! [`simcore`] module samples the same model and serves as an oracle.

pub mod analytic;
pub mod error;
pub mod numerics;
pub mod params;
pub mod simcore;
pub mod specfun;

pub use error::{Error, Result};
pub use params::NetworkParams;
