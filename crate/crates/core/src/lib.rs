//! Split-order compatible finite elements for the linearised compressible
//! Boussinesq equations: Bloch dispersion analysis and a periodic
//! vertical-slice solver.

pub mod basis1d;
pub mod bloch;
pub mod cli;
pub mod dispersion;
pub mod eigen;
pub mod element;
pub mod error;
pub mod experiments;
pub mod fespace;
pub mod slicefem;
pub mod sparse;
pub mod timestep;

pub use error::{Result, WaveError};
