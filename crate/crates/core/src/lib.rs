//! Numerical toolkit for the Arthurs-Kelly simultaneous measurement of
//! position and momentum.
//!
//! The crate is organised bottom-up:
//!
//! * [`grid`]: lattices, wavefunctions, density matrices;
//! * [`phase_space`]: Wigner, Husimi and smeared Wigner functions, 2-D convolution;
//! * [`apparatus`]: apparatus states and their error/disturbance figures;
//! * [`measurement`]: outcome distributions, joint and conditional states, sampling;
//! * [`kernel`]: measurement kernels and their convolution form;
//! * [`scenario`] and [`report`]: scenario files, verdicts and output files.

pub mod error;
mod fourier;
pub mod apparatus;
pub mod grid;
pub mod kernel;
pub mod measurement;
pub mod phase_space;
pub mod report;
mod sampling;
pub mod scenario;
pub mod states;

pub use error::{Error, Result};
pub use grid::{DensityMatrix1D, GridSpec1D, GridSpec2D, WaveFunction1D, WaveFunction2D};
