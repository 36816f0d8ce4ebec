//! Exact CH-module calculus over Novikov-type coefficient rings.

pub mod coeff;
pub mod graded;
pub mod colang;
pub mod chmod;
pub mod report;
pub mod hoch;
pub mod homol;
pub mod conn;
pub mod models;
