pub mod circuit;
pub mod claims;
pub mod elementary;
pub mod error;
pub mod generators;
pub mod layout;
pub mod operator;
pub mod transfer;

pub use error::{Error, Result};
