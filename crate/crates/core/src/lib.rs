//! Numerical and exact tools for complex Kleinian groups: projective geometry
//! of P^n, Möbius dynamics, triangle group tilings, Schottky groups, complex
//! hyperbolic groups, Kulkarni limit sets and the Pappus–Schwartz construction.

pub mod error;
pub mod projective;
pub mod moebius;
pub mod tiling;
pub mod cloud;
pub mod group;
pub mod schottky;
pub mod complex_hyperbolic;
pub mod kulkarni;
pub mod exact;
pub mod pappus;
mod eigen;
pub(crate) mod serde_c64;

pub use error::{Error, Result};
pub use num_complex::Complex64;
