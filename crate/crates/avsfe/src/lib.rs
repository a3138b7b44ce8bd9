//! Solvers, drivers and file formats for AVS-FE discretizations of transient
//! convection-diffusion problems, built on the element kernels of `avsfe-core`.

pub mod adapt;
pub mod assembly;
pub mod config;
pub mod discretization;
pub mod error;
pub mod genalpha;
pub mod oracle;
pub mod report;
pub mod run;
pub mod slices;
pub mod solve;
pub mod spacetime;
pub mod sparse;
pub mod vtk;

pub use avsfe_core as core;
pub use error::{Error, Result};
