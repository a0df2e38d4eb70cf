//! Numerical spectral analysis of a three-sector Fock-space Hamiltonian on
//! the torus: the fiber dispersion family, its Fredholm determinant and
//! threshold classification, essential-spectrum band structure, eigenvalue
//! counting below the spectral bottom through a Birman-Schwinger reduction
//! (cross-checked against a brute-force sector-truncated matrix), and the
//! logarithmic accumulation law with its asymptotic coefficient.

pub mod bands;
pub mod bs;
pub mod efimov;
pub mod exec;
pub mod fock;
pub mod friedrichs;
pub mod grid;
pub mod linalg;
pub mod model;
pub mod numerics;

pub use grid::TorusGrid;
pub use model::{FormFactor, ModelSpec, QuadraticData};
