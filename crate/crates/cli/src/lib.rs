//! ZapFile serialization and the `zap` command-line tool.

pub mod app;
pub mod formula;
pub mod zapfile;

pub use app::{run, Cli, CliError};
pub use zapfile::{parse_zap, write_zap, ZapClause, ZapError, ZapFile};
