pub mod bench;
pub mod cactus;
pub mod cli;
pub mod fixtures;
pub mod grammar;
pub mod language;
pub mod lexer;
pub mod lrtable;
pub mod parser;
pub mod recovery;

pub use language::{Language, LoadError};
