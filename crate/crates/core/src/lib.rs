//! Finite-section spectra of transfer operators for expanding Blaschke
//! products, computed directly by FFT collocation and through the block
//! adjoint, with closed-form predictions to compare against.

pub mod adjoint;
pub mod blaschke;
pub mod error;
pub mod hardy;
pub mod io;
pub mod numerics;
pub mod spectral;
pub mod transfer;

pub use error::{Error, Result};
pub use num_complex::Complex64;

// Compile and run the guide's code blocks as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub mod introduction {}
    #[doc = include_str!("../../../book/src/blaschke.md")]
    pub mod blaschke {}
    #[doc = include_str!("../../../book/src/annulus.md")]
    pub mod annulus {}
    #[doc = include_str!("../../../book/src/transfer.md")]
    pub mod transfer {}
    #[doc = include_str!("../../../book/src/adjoint.md")]
    pub mod adjoint {}
    #[doc = include_str!("../../../book/src/spectrum.md")]
    pub mod spectrum {}
    #[doc = include_str!("../../../book/src/cli.md")]
    pub mod cli {}
}
