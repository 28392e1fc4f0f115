//! Schatten p-norm geometry of unitary groups of finite tracial algebras and of their
//! homogeneous spaces, at matrix scale.

pub mod checks;
pub mod error;
pub mod geometry;
pub mod io;
pub mod linalg;
pub mod models;
pub mod projection;
pub mod random;
pub mod verify;

pub use error::{Error, Result};
