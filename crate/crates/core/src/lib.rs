//! Partial symplectic tomographic representations of quantum states.

pub mod error;
pub mod calculus;
pub mod dynamics;
pub mod evolve;
pub mod grid;
pub mod joint;
pub mod spectral;
pub mod state;
pub mod tomography;
pub mod wigner;

pub use error::{Error, Result};
pub use grid::GridSpec;
