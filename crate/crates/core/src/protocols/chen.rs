//! Two-server delegation with cross-server check pairs.
//!
//! Three table rows per invocation: `V` blinds the inputs, `X` and `Y` supply
//! check pairs sent identically to both servers. Verification compares the
//! servers' answers on the check pairs only, so it never involves `A` or `B`.
//! A server that corrupts `δ` and answers the check pairs honestly passes.

use crate::algebra::{G1Elem, G2Elem, GtElem, PairingOps};
use crate::error::Result;
use crate::protocols::{unblind, Outcome, Query, Response};
use crate::randtable::{RandTable, SixTuple};

pub const TUPLES_PER_SESSION: usize = 3;
pub const QUERY_LEN: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ChenSecrets {
    pub v: SixTuple,
    pub x: SixTuple,
    pub y: SixTuple,
}

/// Check pair built from a table row: `(x1·X1, x2·X2)`.
pub fn check_pair(row: &SixTuple) -> (G1Elem, G2Elem) {
    (row.blind1, row.blind2)
}

/// Builds both server queries from table rows using group additions only.
pub fn prepare<O: PairingOps>(
    ops: &O,
    a: G1Elem,
    b: G2Elem,
    table: &mut RandTable,
) -> Result<(Query, Query, ChenSecrets)> {
    let rows = table.take(TUPLES_PER_SESSION)?;
    let (v, x, y) = (rows[0], rows[1], rows[2]);

    let to_u1 = Query::new(vec![
        (ops.g1_add(a, v.blind1), ops.g2_add(b, v.blind2)),
        (ops.g1_add(v.blind1, v.cross), v.base2),
        check_pair(&x),
        check_pair(&y),
    ]);
    let to_u2 = Query::new(vec![
        (ops.g1_add(a, v.base1), v.blind2),
        (v.blind1, ops.g2_add(b, v.base2)),
        check_pair(&x),
        check_pair(&y),
    ]);
    Ok((to_u1, to_u2, ChenSecrets { v, x, y }))
}

/// `β1 = β̂1` and `β2 = β̂2`. Positions 0 and 1 are never read.
pub fn verify(resp1: &Response, resp2: &Response) -> Result<bool> {
    resp1.expect_len(QUERY_LEN)?;
    resp2.expect_len(QUERY_LEN)?;
    Ok(resp1.values[2] == resp2.values[2] && resp1.values[3] == resp2.values[3])
}

/// `α1 · α2⁻¹ · α3⁻¹ · δ · e(v1V1, v2V2)⁻¹`, with the last factor read from
/// the table. Call only after [`verify`] accepted.
pub fn recover<O: PairingOps>(ops: &O, resp1: &Response, resp2: &Response, secrets: &ChenSecrets) -> Result<GtElem> {
    resp1.expect_len(QUERY_LEN)?;
    resp2.expect_len(QUERY_LEN)?;
    let (alpha1, delta) = (resp1.values[0], resp1.values[1]);
    let (alpha2, alpha3) = (resp2.values[0], resp2.values[1]);
    Ok(unblind(ops, alpha1, alpha2, alpha3, delta, secrets.v.pairing))
}

/// Outsourcer after queries went out, waiting for both responses.
#[derive(Debug)]
pub struct ChenOutsourcer {
    secrets: ChenSecrets,
}

impl ChenOutsourcer {
    pub fn start<O: PairingOps>(ops: &O, a: G1Elem, b: G2Elem, table: &mut RandTable) -> Result<(Self, Query, Query)> {
        let (to_u1, to_u2, secrets) = prepare(ops, a, b, table)?;
        Ok((Self { secrets }, to_u1, to_u2))
    }

    pub fn secrets(&self) -> &ChenSecrets {
        &self.secrets
    }

    pub fn finish<O: PairingOps>(self, ops: &O, resp1: &Response, resp2: &Response) -> Result<Outcome> {
        if !verify(resp1, resp2)? {
            return Ok(Outcome::Rejected);
        }
        recover(ops, resp1, resp2, &self.secrets).map(Outcome::Accepted)
    }
}
