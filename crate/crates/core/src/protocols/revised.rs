//! Chen delegation without check pairs, for semi-honest servers.
//!
//! One table row per invocation and no verification: any deviation by
//! either server silently corrupts the output.

use crate::algebra::{G1Elem, G2Elem, GtElem, PairingOps};
use crate::error::Result;
use crate::protocols::{unblind, Outcome, Query, Response};
use crate::randtable::{RandTable, SixTuple};

pub const TUPLES_PER_SESSION: usize = 1;
pub const QUERY_LEN: usize = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RevisedSecrets {
    pub v: SixTuple,
}

pub fn prepare<O: PairingOps>(
    ops: &O,
    a: G1Elem,
    b: G2Elem,
    table: &mut RandTable,
) -> Result<(Query, Query, RevisedSecrets)> {
    let v = table.take(TUPLES_PER_SESSION)?[0];
    let to_u1 = Query::new(vec![
        (ops.g1_add(a, v.blind1), ops.g2_add(b, v.blind2)),
        (ops.g1_add(v.blind1, v.cross), v.base2),
    ]);
    let to_u2 = Query::new(vec![
        (ops.g1_add(a, v.base1), v.blind2),
        (v.blind1, ops.g2_add(b, v.base2)),
    ]);
    Ok((to_u1, to_u2, RevisedSecrets { v }))
}

pub fn recover<O: PairingOps>(ops: &O, resp1: &Response, resp2: &Response, secrets: &RevisedSecrets) -> Result<GtElem> {
    resp1.expect_len(QUERY_LEN)?;
    resp2.expect_len(QUERY_LEN)?;
    let (alpha1, delta) = (resp1.values[0], resp1.values[1]);
    let (alpha2, alpha3) = (resp2.values[0], resp2.values[1]);
    Ok(unblind(ops, alpha1, alpha2, alpha3, delta, secrets.v.pairing))
}

#[derive(Debug)]
pub struct RevisedOutsourcer {
    secrets: RevisedSecrets,
}

impl RevisedOutsourcer {
    pub fn start<O: PairingOps>(ops: &O, a: G1Elem, b: G2Elem, table: &mut RandTable) -> Result<(Self, Query, Query)> {
        let (to_u1, to_u2, secrets) = prepare(ops, a, b, table)?;
        Ok((Self { secrets }, to_u1, to_u2))
    }

    pub fn secrets(&self) -> &RevisedSecrets {
        &self.secrets
    }

    pub fn finish<O: PairingOps>(self, ops: &O, resp1: &Response, resp2: &Response) -> Result<Outcome> {
        recover(ops, resp1, resp2, &self.secrets).map(Outcome::Unverified)
    }
}
