//! Workbench for quantified modal logic semantics.

pub mod acceptance;
pub mod dense;
pub mod entangle;
pub mod error;
pub mod formats;
pub mod gen;
pub mod horn;
pub mod kripke;
pub mod neighbourhood;
pub mod pipeline;
pub mod predicate;
pub mod semantics;
pub mod syntax;

pub use error::{Error, ParseError, Result};
