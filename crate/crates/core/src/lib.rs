//! Ground states of the Choquard equation coupled to a Schrödinger–Poisson
//! potential,
//!
//! ```text
//! -Δu + u + K(x) φ |u|^{q-2} u = (I_α * |u|^p) |u|^{p-2} u,   -Δφ = K(x) |u|^q,
//! ```
//!
//! on a uniform box: free-space Riesz convolutions, energy functionals,
//! Nehari-constrained minimization, Pohozaev certificates and a regime
//! classifier.

mod error;
pub(crate) mod fft;

pub mod classify;
pub mod cli;
pub mod config;
pub mod coupling;
pub mod functional;
pub mod grid;
pub mod io;
pub mod nehari;
pub mod pohozaev;
pub mod problem;
pub mod report;
pub mod riesz;
pub mod spectral;

pub use error::{Error, Result};
pub use grid::{make_grid, Field, Grid, KFamily, KSpec};
pub use problem::{Problem, ProblemParams};
