//! Discrete reflected random walks in wedges and vases, the one-dimensional
//! chains they are intertwined with, and the numerics used to check the
//! continuum statements they approximate.
//!
//! The crate is organised bottom-up:
//!
//! * [`geometry`] builds the site spaces (wedge lattice, vase grid) and the
//!   shape-function family.
//! * [`kernels`] builds the transition operators on those spaces.
//! * [`intertwining`] holds the uniform-fiber link and identity residuals.
//! * [`green`] solves absorbing Green functions and time-reverses kernels.
//! * [`simulation`] is the deterministic Monte Carlo engine.
//! * [`analytics`] carries the special functions, quadrature and
//!   goodness-of-fit statistics.
//! * [`experiments`] strings these together into the end-to-end runs.
//!
//! ```
//! use intertwine_core::geometry::{build_wedge_lattice, WedgeSpec};
//! use intertwine_core::intertwining::{build_link, kernel_residual};
//! use intertwine_core::kernels::{projected_wedge_chain, wedge_kernel};
//! use intertwine_core::Angle;
//! use num::rational::BigRational;
//! use num::Zero;
//!
//! let spec = WedgeSpec::new(Angle::PiOver6, 40);
//! let lattice = build_wedge_lattice(&spec)?;
//! let walk = wedge_kernel::<BigRational>(&lattice, 40)?;
//! let chain = projected_wedge_chain::<BigRational>(&spec, 40)?;
//! let residual = kernel_residual(&build_link(40), &walk, &chain)?;
//! assert!(residual.is_zero());
//! # Ok::<(), intertwine_core::Error>(())
//! ```

pub mod analytics;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod green;
pub mod intertwining;
pub mod kernels;
pub mod linalg;
pub mod simulation;
pub mod value;

pub use error::{Error, Result};
pub use value::{Angle, Mode, Value};

/// Version string embedded in every exported artifact.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
