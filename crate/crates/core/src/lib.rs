//! Generalized Hermite functions for the weight `|x|^{2σ} e^{-sx²}`, the
//! Dunkl harmonic oscillator built on them, Gaussian quadrature, turning
//! point eigenfunction estimates, coefficient-space transforms and a family
//! of perturbed Schrödinger-type operators on the half-line.

pub mod basis;
pub mod calculus;
pub mod cli;
pub mod error;
pub mod fd;
pub mod io;
pub mod oscillation;
pub mod perturbed;
pub mod quadrature;
pub mod scaled;
pub mod special;
pub mod spectral;
pub mod stats;
pub mod tridiag;

pub use basis::{eval_basis, make_params, BasisEval, Kind, Params};
pub use error::{Error, Result};
