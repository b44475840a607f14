pub mod bounds;
pub mod certify;
pub mod decompose;
pub mod ensembles;
pub mod error;
pub mod genericity;
pub mod io;
pub mod linalg;
pub mod perturb;
pub mod spectrum;

pub use error::{Error, Result};
