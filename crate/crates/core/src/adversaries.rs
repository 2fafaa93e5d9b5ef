//! Server strategies: honest evaluation plus the deviations used to probe
//! each protocol's checks. Malicious servers are assumed to know the full
//! protocol layout, e.g. which response slot carries `δ`.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::{GtElem, PairingOps};
use crate::error::{Error, Result};
use crate::protocols::{honest_eval, Query, Response};

/// Response slot holding `δ` in the two-server protocols.
pub const DELTA_SLOT: usize = 1;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Behavior {
    Honest,
    /// Honest answers, but every query is kept.
    SemiHonestLogging,
    /// Replaces slot 1 with a random `GT` element different from the honest one.
    RhoSubstitution {
        #[serde(default)]
        seed: u64,
    },
    /// Multiplies slot `index` by `factor`, or by a random `t ≠ 1` if unset.
    IndexTamper {
        index: usize,
        #[serde(default)]
        seed: u64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        factor: Option<GtElem>,
    },
    /// Every slot uniform in `GT`.
    RandomResponse {
        #[serde(default)]
        seed: u64,
    },
}

impl Behavior {
    fn seed(&self) -> u64 {
        match *self {
            Behavior::Honest | Behavior::SemiHonestLogging => 0,
            Behavior::RhoSubstitution { seed }
            | Behavior::IndexTamper { seed, .. }
            | Behavior::RandomResponse { seed } => seed,
        }
    }

    pub fn is_honest(&self) -> bool {
        matches!(self, Behavior::Honest | Behavior::SemiHonestLogging)
    }
}

/// A server instance running one behavior, with its own randomness and log.
#[derive(Debug)]
pub struct Server {
    behavior: Behavior,
    rng: ChaCha20Rng,
    log: Vec<Query>,
}

impl Server {
    pub fn new(behavior: Behavior) -> Self {
        Self::for_session(behavior, 0)
    }

    /// Randomness comes from the behavior's seed, on a stream selected by
    /// `session`, so repeated sessions draw independent values.
    pub fn for_session(behavior: Behavior, session: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(behavior.seed());
        rng.set_stream(session);
        Self { behavior, rng, log: Vec::new() }
    }

    pub fn behavior(&self) -> &Behavior {
        &self.behavior
    }

    pub fn respond<O: PairingOps>(&mut self, ops: &O, query: &Query) -> Result<Response> {
        let params = ops.params();
        let mut resp = honest_eval(ops, query);
        match self.behavior {
            Behavior::Honest => {}
            Behavior::SemiHonestLogging => self.log.push(query.clone()),
            Behavior::RhoSubstitution { .. } => {
                if resp.len() <= DELTA_SLOT {
                    return Err(Error::Config(format!("rho substitution needs slot {DELTA_SLOT}, response has {}", resp.len())));
                }
                resp.values[DELTA_SLOT] = params.random_gt_except(&mut self.rng, resp.values[DELTA_SLOT]);
            }
            Behavior::IndexTamper { index, factor, .. } => {
                if index >= resp.len() {
                    return Err(Error::Config(format!("tamper index {index} out of range for {} values", resp.len())));
                }
                let t = match factor {
                    Some(t) => {
                        params.check_gt(t)?;
                        if t == GtElem::ONE {
                            return Err(Error::Config("tamper factor must not be the identity".into()));
                        }
                        t
                    }
                    None => params.random_gt_except(&mut self.rng, GtElem::ONE),
                };
                resp.values[index] = params.gt_mul(resp.values[index], t);
            }
            Behavior::RandomResponse { .. } => {
                for v in &mut resp.values {
                    *v = params.random_gt(&mut self.rng);
                }
            }
        }
        Ok(resp)
    }

    /// Everything a logging server has seen.
    pub fn semi_honest_view(&self) -> Result<&[Query]> {
        match self.behavior {
            Behavior::SemiHonestLogging => Ok(&self.log),
            _ => Err(Error::Config("only semi_honest_logging servers keep a view".into())),
        }
    }
}
