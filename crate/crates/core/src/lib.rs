//! Numerical study of energy decay in damped second-order evolution systems.
//!
//! The library works in energy coordinates, where a system
//! ẍ + A x + B B* ẋ = 0 with modal frequencies μ_1 ≤ μ_2 ≤ … becomes a
//! first-order evolution ż = G z whose Euclidean norm is the physical
//! energy. It provides:
//!
//! - builders for concrete beam/string systems and damping operators
//!   ([`systems`], [`modal`]),
//! - spectral-gap diagnostics and contour construction ([`gaps`]),
//! - dense eigensolves with localization checks ([`spectrum`]),
//! - contour-integral spectral projections for eigenvalue counting and
//!   Riesz-basis closeness bounds ([`riesz`]),
//! - semigroup simulation and decay-rate fitting ([`semigroup`]),
//! - a configuration-driven CLI front end ([`cli`], [`config`], [`report`]).
//!
//! The headline computation cross-validates the measured semigroup decay
//! rate against the spectral abscissa of the generator.

pub mod config;
pub mod error;
pub mod gaps;
pub mod linalg;
pub mod modal;
pub mod spectrum;
pub mod systems;
