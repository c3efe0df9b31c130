//! JSON formats, seeded verification suites and the command-line front end.

pub mod json;
pub mod random;
pub mod suites;
