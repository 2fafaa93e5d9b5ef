//! Trusted setup: the precomputed table of blinding six-tuples, and the
//! outsourcer-side sequential lookup that consumes them.

use std::fs;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::{G1Elem, G2Elem, GtElem, OpCounts, PairingOps, PairingParams, Scalar};
use crate::error::{Error, Result};

/// One table row `(W1, W2, w1·W1, w2·W1, w2·W2, e(w1·W1, w2·W2))`.
///
/// The raw scalars `w1`, `w2` travel with the row so that tests and reports
/// can check attack residuals exactly. Protocol code never reads them.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SixTuple {
    #[serde(rename = "W1")]
    pub base1: G1Elem,
    #[serde(rename = "W2")]
    pub base2: G2Elem,
    #[serde(rename = "w1W1")]
    pub blind1: G1Elem,
    #[serde(rename = "w2W1")]
    pub cross: G1Elem,
    #[serde(rename = "w2W2")]
    pub blind2: G2Elem,
    #[serde(rename = "e")]
    pub pairing: GtElem,
    w1: Scalar,
    w2: Scalar,
}

impl SixTuple {
    /// Operations the trusted setup spends on one row.
    pub const GENERATION_COST: OpCounts = OpCounts {
        pairings: 1,
        scalar_mults: 3,
        group_adds: 0,
        gt_mults: 0,
        gt_exps: 0,
        gt_invs: 0,
    };

    pub fn derive<O: PairingOps>(ops: &O, base1: G1Elem, base2: G2Elem, w1: Scalar, w2: Scalar) -> Self {
        let blind1 = ops.g1_mul(w1, base1);
        let cross = ops.g1_mul(w2, base1);
        let blind2 = ops.g2_mul(w2, base2);
        let pairing = ops.pair(blind1, blind2);
        Self { base1, base2, blind1, cross, blind2, pairing, w1, w2 }
    }

    /// The blinding scalars `(w1, w2)`. Oracle access for tests and reports.
    #[doc(hidden)]
    pub fn oracle_scalars(&self) -> (Scalar, Scalar) {
        (self.w1, self.w2)
    }

    /// Recomputes the five derived entries and compares.
    pub fn check(&self, params: &PairingParams) -> std::result::Result<(), String> {
        params.check_g1(self.base1).map_err(|e| e.to_string())?;
        params.check_g2(self.base2).map_err(|e| e.to_string())?;
        if self.w1.value() == 0 || self.w2.value() == 0 || self.w1.value() >= params.q() || self.w2.value() >= params.q() {
            return Err("blinding scalars must lie in Z_q^*".into());
        }
        let expected = Self::derive(params, self.base1, self.base2, self.w1, self.w2);
        if expected != *self {
            return Err(format!("expected {expected:?}"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RandTable {
    params: PairingParams,
    rows: Vec<SixTuple>,
    #[serde(default)]
    cursor: usize,
}

impl RandTable {
    /// Draws `n` independent rows from a ChaCha20 stream seeded with `seed`.
    /// Bases are drawn from the non-identity elements; scalars from `Z_q^*`.
    pub fn generate<O: PairingOps>(ops: &O, n: usize, seed: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyTable);
        }
        let params = ops.params().clone();
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let rows = (0..n)
            .map(|_| {
                let base1 = params.random_g1_nonzero(&mut rng);
                let base2 = params.random_g2_nonzero(&mut rng);
                let w1 = params.random_nonzero_scalar(&mut rng);
                let w2 = params.random_nonzero_scalar(&mut rng);
                SixTuple::derive(ops, base1, base2, w1, w2)
            })
            .collect();
        Ok(Self { params, rows, cursor: 0 })
    }

    /// Builds a table from explicit rows, validating each one.
    pub fn from_rows(params: PairingParams, rows: Vec<SixTuple>) -> Result<Self> {
        let table = Self { params, rows, cursor: 0 };
        table.validate()?;
        Ok(table)
    }

    pub fn validate(&self) -> Result<()> {
        if self.rows.is_empty() {
            return Err(Error::EmptyTable);
        }
        if self.cursor > self.rows.len() {
            return Err(Error::Config(format!("cursor {} past {} rows", self.cursor, self.rows.len())));
        }
        for (index, row) in self.rows.iter().enumerate() {
            row.check(&self.params).map_err(|reason| Error::InvalidTuple { index, reason })?;
        }
        Ok(())
    }

    pub fn params(&self) -> &PairingParams {
        &self.params
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn cursor(&self) -> usize {
        self.cursor
    }

    pub fn remaining(&self) -> usize {
        self.rows.len() - self.cursor
    }

    pub fn rows(&self) -> &[SixTuple] {
        &self.rows
    }

    /// Hands out the next `k` unconsumed rows. Rows are never re-issued.
    pub fn take(&mut self, k: usize) -> Result<Vec<SixTuple>> {
        if k > self.remaining() {
            return Err(Error::TableExhausted { requested: k, remaining: self.remaining() });
        }
        let out = self.rows[self.cursor..self.cursor + k].to_vec();
        self.cursor += k;
        Ok(out)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let table: Self = serde_json::from_str(&fs::read_to_string(path)?)?;
        table.validate()?;
        Ok(table)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut json = serde_json::to_string_pretty(self)?;
        json.push('\n');
        fs::write(path, json)?;
        Ok(())
    }
}
