//! Numerical primitives: Fourier coefficients by FFT, polynomial roots and
//! dense non-Hermitian eigenvalues.

pub mod dft;
pub mod eigen;
pub mod matrix;
pub mod roots;

pub use dft::{circle_points, dft_forward, dft_inverse};
pub use eigen::eig_dense;
pub use matrix::ComplexMatrix;
pub use roots::{poly_roots, PolyRoots};
