//! File formats, network clients, recipe runner and command-line front end
//! for the `lrmt-core` corpus toolkit.

pub mod bt;
pub mod cli;
pub mod commands;
pub mod error;
pub mod http;
pub mod io;
pub mod qa;
pub mod recipe;

pub use error::{ExitKind, Failure};
