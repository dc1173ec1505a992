//! Command-line front end for `fermiqit`.

pub mod artifact;
pub mod commands;
pub mod error;

pub use error::CliError;
