//! Gentle A∞-algebras of arc collections on closed marked surfaces: the gentle
//! algebra, orbigon enumeration, curved deformed products and Hochschild classes.

pub mod coeffs;
pub mod curved;
pub mod gentle;
pub mod grading;
pub mod hochschild;
pub mod linalg;
pub mod orbigon;
pub mod surface;
