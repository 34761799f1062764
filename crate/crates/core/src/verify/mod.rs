//! Statistical verification: hypothesis tests, the `p_w` observable, the
//! Gibbs resampling test and the named suites run by the CLI.

pub mod gibbs;
pub mod pw;
pub mod suites;
pub mod stats;
