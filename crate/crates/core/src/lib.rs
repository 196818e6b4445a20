//! Numerical laboratory for free Araki-Woods algebras on truncated full Fock
//! spaces: creation operators and Wick words, the radial multiplier cb-norm
//! calculus, second quantization and the doubled-space malleable deformation.

pub mod araki_woods;
pub mod bounds;
pub mod cli;
pub mod deformation;
pub mod error;
pub mod fock;
pub mod io;
pub mod multipliers;
pub mod norm;
pub mod operator;
pub mod quantization;
pub mod random;
pub mod suites;

pub use num_complex::Complex64 as C64;

pub use araki_woods::{RepModel, RepSpec};
pub use error::{Error, Result};
pub use fock::{FockSpace, FockVector, TensorWord};
pub use multipliers::RadialSymbol;
pub use norm::{NormMethod, NormReport};
pub use operator::{LinearOperator, TensorOperator, TensorVector};
