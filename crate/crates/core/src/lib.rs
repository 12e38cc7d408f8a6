//! Exact computational engine for the Cuntz algebra `O_N` acting on
//! `L²(O_N)` through its groupoid model.

pub mod adjudicator;
pub mod cylinder;
pub mod error;
pub mod exact;
pub mod kernel;
pub mod linalg;
pub mod operators;
pub mod sheets;
pub mod spectral;
pub mod states;
pub mod words;

pub use cylinder::CylinderFunction;
pub use error::{Error, Result};
pub use exact::Q;
pub use operators::{GradeIndex, OpName, Variant};
pub use sheets::{BasisIndex, GroupoidVector, Sheet};
pub use words::{Alphabet, Word};
