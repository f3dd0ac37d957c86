//! Numerical laboratory for cup-product projections, Chern and transgression
//! forms, model Dirac operators with boundary conditions, eta invariants and
//! spectral flow on flat tori.
//!
//! `no_std` with `alloc`; file formats, reports on disk and the command line
//! live in the companion `etalab` crate.

#![cfg_attr(not(any(feature = "std", test)), no_std)]

extern crate alloc;

pub mod error;
pub mod fourier_fn;
pub mod ktheory;
pub mod linalg;
pub mod models;
pub mod operators;
pub mod spectral;
pub mod verify;

pub use error::{Error, Result};
