//! Operational surface of the reasoner: the `cr` command line, the HTTP/JSON
//! session service, and the append-only run log.

pub mod ask;
pub mod cli;
pub mod render;
pub mod runlog;
pub mod server;
pub mod wire;

pub use cli::{execute, Cli};
pub use runlog::{RunLog, RunRecord};
