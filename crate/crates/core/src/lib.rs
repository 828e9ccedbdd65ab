//! Positivity of operator block matrices, the Størmer condition, and the
//! positive maps it tests.

pub mod block;
pub mod cli;
pub mod error;
pub mod exec;
pub mod harness;
pub mod io;
pub mod linalg;
pub mod maps;
pub mod random;
pub mod selftest;
pub mod states;
pub mod stormer;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, Tolerance};
