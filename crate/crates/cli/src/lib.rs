//! The `mm` command line and the analysis service behind `mm serve`.

pub mod commands;
pub mod service;
pub mod session;
pub mod store;
