//! Spacelike constant-mean-curvature graphs near future null infinity of the
//! exterior Schwarzschild spacetime.
//!
//! The crate is organised bottom-up: [`charts`] and [`sphere`] are the
//! kernels, [`foliation`] builds the approximate CMC foliation near null
//! infinity, [`curvature`] holds the mean-curvature operators, [`barriers`]
//! and [`solver`] solve the Dirichlet problems, and [`diagnostics`] checks the
//! resulting expansion, tilt and regularity.

pub mod barriers;
pub mod charts;
pub mod curvature;
pub mod cut;
pub mod diagnostics;
pub mod error;
pub mod export;
pub mod foliation;
pub mod linalg;
pub mod solver;
pub mod sphere;

pub use error::{Error, Result};
