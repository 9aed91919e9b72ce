pub mod cli_io;
pub mod dg1d;
pub mod diagnostics;
pub mod eos;
pub mod error;
pub mod linwave;
pub mod models;
pub mod opcheck;
pub mod timestep;

pub use error::{Error, Result};
