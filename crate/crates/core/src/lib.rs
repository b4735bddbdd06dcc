//! Pseudospectral toolkit for temporal-gauge Maxwell–Klein–Gordon and
//! Maxwell–Chern–Simons–Higgs evolution on periodic boxes.

pub mod analysis;
pub mod cli;
pub mod config;
pub mod error;
pub mod evolve;
mod fft;
pub mod field;
pub mod gauge;
pub mod grid;
pub mod identities;
mod matter;
pub mod mcsh;
pub mod mkg;
pub mod random;
pub mod snapshot;
pub mod spectral;
pub mod suites;

pub use error::{Error, Result};
pub use field::{Reality, SpectralField, VectorField};
pub use grid::Grid;
pub use num_complex::Complex64;
