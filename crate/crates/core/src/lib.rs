//! Protocol lab for outsourcing bilinear pairing computation to untrusted
//! servers.
//!
//! Three delegation protocols run against configurable server behaviors on a
//! transparent toy pairing, so that completeness, attacks and detection can
//! be checked as exact algebraic identities.

pub mod adversaries;
pub mod algebra;
pub mod cli;
pub mod error;
pub mod protocols;
pub mod randtable;
pub mod simnet;

pub use error::{Error, Result};
