//! Element-level kernels for the automatic variationally stable finite element
//! (AVS-FE) method applied to transient convection-diffusion.
//!
//! This crate is `no_std` (it needs `alloc`) and contains everything that is
//! pure arithmetic on a single mesh: conforming triangle meshes with
//! newest-vertex bisection, quadrature, Lagrange bases, finite element spaces,
//! the problem catalogue, element matrices of the AVS-FE bilinear form and
//! the test inner product, error norms, error indicators, Dörfler marking and
//! generalized-α parameters.
//!
//! Global assembly, sparse factorisation, time marching and IO live in the
//! `avsfe` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod basis;
pub mod dense;
pub mod error;
pub mod forms;
pub mod genalpha;
pub mod marking;
pub mod mesh;
pub mod norms;
pub mod problems;
pub mod quadrature;
pub mod space;

mod math;

pub use error::{Error, Result};
pub use mesh::{BoundaryRoles, BoundaryTag, ElementGeometry, Mesh};
pub use problems::{Mode, ProblemSpec};
pub use space::{Family, FeSpace, Field};
