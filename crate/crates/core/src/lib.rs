pub mod bounds;
pub mod combinatorics;
pub mod ensembles;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod matrix_io;
pub mod polytope;
pub mod randsrc;
pub mod recovery;
pub mod rip;
pub mod simplex;

pub use error::{Error, Result};
