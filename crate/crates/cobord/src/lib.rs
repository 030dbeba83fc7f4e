//! File formats and command-line front end for `cobord-core`.

pub mod cli;
pub mod json;
pub mod text;

pub use cli::run;
