//! File formats, configuration and the command-line front end for
//! [`stegcost_core`].

pub mod binfmt;
pub mod cli;
pub mod config;
pub mod oracle_file;
pub mod pgm;
pub mod report;
