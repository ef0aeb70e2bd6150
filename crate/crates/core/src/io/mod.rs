//! File formats and command workflows.

mod matches;
mod run;
mod tracefile;

pub use matches::{load_matches, read_matches, write_matches};
pub use run::*;
pub use tracefile::{load_trace, read_trace, save_trace, write_trace, MAGIC, VERSION};
