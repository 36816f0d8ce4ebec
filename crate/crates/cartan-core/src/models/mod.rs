//! Shipped fixtures: calculus algebras, hypercommutative algebras and the
//! Dubrovin connection of quantum cohomology, and connection fixtures on
//! Hochschild modules.

pub mod calculus;
pub mod dubrovin;
pub mod hochschild;
pub mod hypercom;

use thiserror::Error;

pub use calculus::{calculus_to_ch, exterior_calculus, CalculusData, CalculusPackage};
pub use dubrovin::{dubrovin, dubrovin_ring, dubrovin_unvalidated, Dubrovin};
pub use hochschild::{hochschild_connection_report, hochschild_directions, hochschild_renaming_cohomology, hochschild_renaming_report, RenamingSpec};
pub use hypercom::{hypercom_gate, hypercom_module_unchecked, hypercom_to_ch, qh_p1, HypercomCh, HypercomData, HypercomModule};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("axiom `{0}` fails at {1}")]
    Axiom(String, String),
    #[error("schema: {0}")]
    Schema(String),
    #[error("ring: {0}")]
    Ring(String),
}
