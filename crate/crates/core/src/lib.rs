//! Numerical laboratory for the stability of hyperbolic boundary value and
//! shock problems: Kreiss symmetrizers, Lopatinski determinants and the
//! regularity of multiple characteristic roots.

pub mod error;
pub mod spectral;
pub mod symbol;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use spectral::{CMat, CVec, HalfPlane, RMat, SubspaceBasis};
pub use symbol::{HyperbolicSystem, Poly, SystemFamily, TangentSystem};

pub mod classify;
pub mod grid;
pub mod models;
pub mod boundary;
pub mod lopatinski;
pub mod symmetrizer;
pub mod normal_form;
pub mod estimate;
