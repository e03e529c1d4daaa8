pub mod analysis;
pub mod corpus;
pub mod directives;
pub mod error;
pub mod eval;
pub mod features;
pub mod formatter;
pub mod model;
pub mod syntax;

pub use error::{Error, Result};
