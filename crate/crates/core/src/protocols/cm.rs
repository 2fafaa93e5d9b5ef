//! Single-server delegation with an exponent-based check.
//!
//! The outsourcer blinds `A` and `B` with fresh session keys and adds a
//! fourth query `(a1·A + r1·P1, a2·B + r2·P2)` whose answer must satisfy
//!
//! ```text
//! α4 = e(A,B)^(a1·a2) · α1^(a1·r2) · α2^(a2·r1) · e(P1,P2)^(r1·r2 − a1·g1·r2 − a2·g2·r1)
//! ```
//!
//! All exponents are reduced mod q.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::{G1Elem, G2Elem, GtElem, PairingOps, PairingParams, Scalar};
use crate::error::{Error, Result};
use crate::protocols::{Outcome, Query, Response};

pub const QUERY_LEN: usize = 4;

/// Public points held by the outsourcer together with `e(P1, P2)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CmSetup {
    pub p1: G1Elem,
    pub p2: G2Elem,
    pub pre: GtElem,
}

impl CmSetup {
    /// Computed by the trusted setup, so `ops` should be metered for that party.
    pub fn new<O: PairingOps>(ops: &O, p1: G1Elem, p2: G2Elem) -> Self {
        Self { p1, p2, pre: ops.pair(p1, p2) }
    }

    pub fn random<O: PairingOps, R: Rng + ?Sized>(ops: &O, rng: &mut R) -> Self {
        let params = ops.params();
        let p1 = params.random_g1_nonzero(rng);
        let p2 = params.random_g2_nonzero(rng);
        Self::new(ops, p1, p2)
    }
}

/// Per-session blinding keys, all in `Z_q^*`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionKeys {
    pub g1: Scalar,
    pub g2: Scalar,
    pub a1: Scalar,
    pub r1: Scalar,
    pub a2: Scalar,
    pub r2: Scalar,
}

impl SessionKeys {
    pub fn random<R: Rng + ?Sized>(params: &PairingParams, rng: &mut R) -> Self {
        let mut draw = || params.random_nonzero_scalar(rng);
        Self { g1: draw(), g2: draw(), a1: draw(), r1: draw(), a2: draw(), r2: draw() }
    }

    fn validate(&self, params: &PairingParams) -> Result<()> {
        let all = [self.g1, self.g2, self.a1, self.r1, self.a2, self.r2];
        if all.iter().any(|k| k.value() % params.q() == 0) {
            return Err(Error::ZeroSessionKey);
        }
        Ok(())
    }

    /// Keys for which tampering with `α1` cannot be detected: `r2 ≡ a2·g2`.
    pub fn alpha1_blind(&self, params: &PairingParams) -> bool {
        self.r2 == params.scalar_mul(self.a2, self.g2)
    }

    /// Keys for which tampering with `α2` cannot be detected: `r1 ≡ a1·g1`.
    pub fn alpha2_blind(&self, params: &PairingParams) -> bool {
        self.r1 == params.scalar_mul(self.a1, self.g1)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CmSecrets {
    pub keys: SessionKeys,
    pub setup: CmSetup,
}

pub fn prepare<O: PairingOps, R: Rng + ?Sized>(
    ops: &O,
    a: G1Elem,
    b: G2Elem,
    setup: &CmSetup,
    rng: &mut R,
) -> (Query, CmSecrets) {
    let keys = SessionKeys::random(ops.params(), rng);
    prepare_with_keys(ops, a, b, setup, keys).expect("random keys are nonzero")
}

pub fn prepare_with_keys<O: PairingOps>(
    ops: &O,
    a: G1Elem,
    b: G2Elem,
    setup: &CmSetup,
    keys: SessionKeys,
) -> Result<(Query, CmSecrets)> {
    keys.validate(ops.params())?;
    let (p1, p2) = (setup.p1, setup.p2);
    let blind_a = ops.g1_add(a, ops.g1_mul(keys.g1, p1));
    let blind_b = ops.g2_add(b, ops.g2_mul(keys.g2, p2));
    let check_a = ops.g1_add(ops.g1_mul(keys.a1, a), ops.g1_mul(keys.r1, p1));
    let check_b = ops.g2_add(ops.g2_mul(keys.a2, b), ops.g2_mul(keys.r2, p2));
    let query = Query::new(vec![(blind_a, p2), (p1, blind_b), (blind_a, blind_b), (check_a, check_b)]);
    Ok((query, CmSecrets { keys, setup: *setup }))
}

/// `α1^(−g2) · α2^(−g1) · α3 · e(P1,P2)^(g1·g2)`.
pub fn recover<O: PairingOps>(ops: &O, resp: &Response, secrets: &CmSecrets) -> Result<GtElem> {
    resp.expect_len(QUERY_LEN)?;
    let params = ops.params();
    let k = &secrets.keys;
    let [alpha1, alpha2, alpha3, _] = [resp.values[0], resp.values[1], resp.values[2], resp.values[3]];
    let acc = ops.gt_mul(ops.gt_pow(alpha1, params.scalar_neg(k.g2)), ops.gt_pow(alpha2, params.scalar_neg(k.g1)));
    let acc = ops.gt_mul(acc, alpha3);
    Ok(ops.gt_mul(acc, ops.gt_pow(secrets.setup.pre, params.scalar_mul(k.g1, k.g2))))
}

/// The check as the outsourcer runs it, on the recovered value.
pub fn verify<O: PairingOps>(ops: &O, resp: &Response, recovered: GtElem, secrets: &CmSecrets) -> Result<bool> {
    resp.expect_len(QUERY_LEN)?;
    let s = ops.params();
    let k = &secrets.keys;
    let (alpha1, alpha2, alpha4) = (resp.values[0], resp.values[1], resp.values[3]);

    let pre_exp = s.scalar_sub(
        s.scalar_sub(s.scalar_mul(k.r1, k.r2), s.scalar_mul(s.scalar_mul(k.a1, k.g1), k.r2)),
        s.scalar_mul(s.scalar_mul(k.a2, k.g2), k.r1),
    );
    let rhs = ops.gt_mul(
        ops.gt_pow(recovered, s.scalar_mul(k.a1, k.a2)),
        ops.gt_pow(alpha1, s.scalar_mul(k.a1, k.r2)),
    );
    let rhs = ops.gt_mul(rhs, ops.gt_pow(alpha2, s.scalar_mul(k.a2, k.r1)));
    let rhs = ops.gt_mul(rhs, ops.gt_pow(secrets.setup.pre, pre_exp));
    Ok(alpha4 == rhs)
}

/// The same check with the recovery substituted in, so each `α` appears
/// exactly once:
///
/// ```text
/// α4 = α1^(a1·r2 − g2·a1·a2) · α2^(a2·r1 − g1·a1·a2) · α3^(a1·a2)
///      · e(P1,P2)^(g1·g2·a1·a2 + r1·r2 − a1·g1·r2 − a2·g2·r1)
/// ```
pub fn verify_expanded<O: PairingOps>(ops: &O, resp: &Response, secrets: &CmSecrets) -> Result<bool> {
    resp.expect_len(QUERY_LEN)?;
    let s = ops.params();
    let k = &secrets.keys;
    let a1a2 = s.scalar_mul(k.a1, k.a2);
    let e1 = s.scalar_sub(s.scalar_mul(k.a1, k.r2), s.scalar_mul(k.g2, a1a2));
    let e2 = s.scalar_sub(s.scalar_mul(k.a2, k.r1), s.scalar_mul(k.g1, a1a2));
    let e_pre = [
        s.scalar_mul(s.scalar_mul(k.g1, k.g2), a1a2),
        s.scalar_mul(k.r1, k.r2),
        s.scalar_neg(s.scalar_mul(s.scalar_mul(k.a1, k.g1), k.r2)),
        s.scalar_neg(s.scalar_mul(s.scalar_mul(k.a2, k.g2), k.r1)),
    ]
    .into_iter()
    .fold(Scalar::new(0), |acc, t| s.scalar_add(acc, t));

    let rhs = ops.gt_mul(ops.gt_pow(resp.values[0], e1), ops.gt_pow(resp.values[1], e2));
    let rhs = ops.gt_mul(rhs, ops.gt_pow(resp.values[2], a1a2));
    let rhs = ops.gt_mul(rhs, ops.gt_pow(secrets.setup.pre, e_pre));
    Ok(resp.values[3] == rhs)
}

#[derive(Debug)]
pub struct CmOutsourcer {
    secrets: CmSecrets,
}

impl CmOutsourcer {
    pub fn start<O: PairingOps, R: Rng + ?Sized>(
        ops: &O,
        a: G1Elem,
        b: G2Elem,
        setup: &CmSetup,
        rng: &mut R,
    ) -> (Self, Query) {
        let (query, secrets) = prepare(ops, a, b, setup, rng);
        (Self { secrets }, query)
    }

    pub fn secrets(&self) -> &CmSecrets {
        &self.secrets
    }

    pub fn finish<O: PairingOps>(self, ops: &O, resp: &Response) -> Result<Outcome> {
        let recovered = recover(ops, resp, &self.secrets)?;
        if verify(ops, resp, recovered, &self.secrets)? {
            Ok(Outcome::Accepted(recovered))
        } else {
            Ok(Outcome::Rejected)
        }
    }
}
