pub mod cli;
pub mod error;
pub mod io;
pub mod linalg;
pub mod model;
pub mod morse;
pub mod oracles;
pub mod pencil;
pub mod poly;
pub mod quadrature;

pub use error::{Error, Result};
