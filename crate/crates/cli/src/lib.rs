//! Command-line front end: the expression language, named check suites,
//! and deterministic reporting.

pub mod expr;
pub mod report;
pub mod suites;
