//! Checks shared by the bus tests and the acceptance run.

#![allow(dead_code)]

pub mod dup_oracle;
pub mod topology;
