pub mod density;
pub mod error;
pub mod harness;
pub mod indisc;
pub mod patterns;
pub mod setfam;
pub mod theories;
pub mod transforms;

pub use error::{DpError, Result};
