//! Numerical machinery for one-dimensional semilinear wave equations with
//! derivative nonlinearities,
//!
//!   u_tt - u_xx = F(u_t, u_x),    u(·,0) = eps·f,  u_t(·,0) = eps·g,
//!
//! with F either the product |u_t|^p |u_x|^q or the signed power
//! |u_t ± u_x|^(p-1)(u_t ± u_x), and (f, g) compactly supported.
//!
//! The crate builds solutions two independent ways on the same unit-CFL
//! characteristic lattice — successive substitution on the integral
//! equations for (u_t, u_x) ([`picard`]) and explicit marching of the
//! Riemann invariants ([`march`]) — and uses the closed-form blow-up of the
//! signed models ([`blowup`]) to verify both. [`lifespan`] sweeps the data
//! amplitude and fits the breakdown-time scaling exponent.
//!
//! The pipeline: [`data`] supplies exact piecewise-polynomial data families,
//! [`freewave`] the closed d'Alembert formulas built from them, [`duhamel`]
//! the lattice and the source integrals along backward characteristics.

pub mod blowup;
pub mod data;
pub mod duhamel;
pub mod error;
pub mod freewave;
pub mod lifespan;
pub mod march;
pub mod picard;
pub mod selftest;

pub use data::{InitialData, NonlinearityParams, PeakAmplitude, Sign, Variant};
pub use duhamel::{CharGrid, GridFn};
pub use error::Error;
pub use freewave::FreeWave;
