//! Ideal zeta functions of class-two nilpotent Lie rings attached to
//! elliptic and genus-2 curves, with exact enumeration, p-adic measures and
//! closed-form checks.

pub mod curves;
pub mod detrep;
pub mod enumeration;
pub mod error;
pub mod fit;
pub mod harness;
pub mod liering;
pub mod measures;
pub mod padic;
pub mod poly;

pub use error::{Error, Result};
