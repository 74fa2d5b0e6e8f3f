//! Benchmark campaigns, plots and the HTTP session service built on `pbo-core`.

pub mod campaign;
pub mod plot;
pub mod service;
