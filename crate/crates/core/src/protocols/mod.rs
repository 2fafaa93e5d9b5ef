//! Outsourcer-side logic for the three delegation protocols.
//!
//! Each protocol splits into a `prepare` step (build the blinded queries and
//! keep the session secrets), optional verification, and recovery of
//! `e(A, B)` from the server responses. The `Outsourcer` state machines in
//! each submodule tie these together so that recovery only runs after an
//! accepting verdict.

pub mod chen;
pub mod cm;
pub mod revised;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::algebra::{G1Elem, G2Elem, GtElem, PairingOps};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    /// Two servers, check pairs compared across servers.
    Chen,
    /// Two semi-honest servers, no verification.
    Revised,
    /// Single server, exponent-based verification.
    Cm,
}

impl Protocol {
    pub fn server_count(self) -> usize {
        match self {
            Protocol::Chen | Protocol::Revised => 2,
            Protocol::Cm => 1,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Protocol::Chen => "chen",
            Protocol::Revised => "revised",
            Protocol::Cm => "cm",
        }
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Protocol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "chen" => Ok(Protocol::Chen),
            "revised" => Ok(Protocol::Revised),
            "cm" => Ok(Protocol::Cm),
            other => Err(Error::Config(format!("unknown protocol {other:?}"))),
        }
    }
}

/// Ordered list of pairing inputs sent to one server.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Query {
    pub pairs: Vec<(G1Elem, G2Elem)>,
}

impl Query {
    pub fn new(pairs: Vec<(G1Elem, G2Elem)>) -> Self {
        Self { pairs }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// Ordered list of `GT` values, one per query pair.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Response {
    pub values: Vec<GtElem>,
}

impl Response {
    pub fn new(values: Vec<GtElem>) -> Self {
        Self { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub(crate) fn expect_len(&self, expected: usize) -> Result<()> {
        if self.values.len() == expected {
            Ok(())
        } else {
            Err(Error::MalformedResponse { expected, got: self.values.len() })
        }
    }
}

/// What an honest server computes: one pairing per query pair.
pub fn honest_eval<O: PairingOps>(ops: &O, query: &Query) -> Response {
    Response::new(query.pairs.iter().map(|&(a, b)| ops.pair(a, b)).collect())
}

/// Result of feeding server responses back to the outsourcer.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Accepted(GtElem),
    Rejected,
    /// The protocol has no verification step.
    Unverified(GtElem),
}

impl Outcome {
    pub fn output(self) -> Option<GtElem> {
        match self {
            Outcome::Accepted(v) | Outcome::Unverified(v) => Some(v),
            Outcome::Rejected => None,
        }
    }
}

/// `α1 · α2⁻¹ · α3⁻¹ · δ · e(v1V1, v2V2)⁻¹`, shared by both two-server protocols.
pub(crate) fn unblind<O: PairingOps>(
    ops: &O,
    alpha1: GtElem,
    alpha2: GtElem,
    alpha3: GtElem,
    delta: GtElem,
    table_pairing: GtElem,
) -> GtElem {
    let acc = ops.gt_mul(alpha1, ops.gt_inv(alpha2));
    let acc = ops.gt_mul(acc, ops.gt_inv(alpha3));
    let acc = ops.gt_mul(acc, delta);
    ops.gt_mul(acc, ops.gt_inv(table_pairing))
}
