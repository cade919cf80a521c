//! Executable light-cone locality checks for relativistic field dynamics.
//!
//! The crate evolves classical fields (Maxwell potentials in Lorenz gauge,
//! Klein-Gordon, Dirac), free lattice scalar fields in the Gaussian sector,
//! and few-particle Newton-Wigner states, and measures whether data outside a
//! ball can influence anything inside the ball's contracting light cone.

pub mod audit;
pub mod dirac;
pub mod error;
pub mod fft;
pub mod fit;
pub mod gaussian;
pub mod lattice;
pub mod localization;
pub mod scenario;
pub mod spectral;
pub mod wave;

pub use error::{Error, Result};
