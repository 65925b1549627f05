//! File formats, result documents, experiment tables and the command-line
//! front end for `nilmas-core`.

pub mod bench;
pub mod cli;
pub mod document;
pub mod edgelist;
