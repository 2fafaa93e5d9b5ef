//! Message-level session runner.
//!
//! A session binds the outsourcer, its server(s) and the channels between
//! them. Every algebra call is metered and attributed to the party making it,
//! every message is recorded in a transcript, and a passive observer can
//! replay the transcript to attack unencrypted two-server sessions.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::adversaries::Server;
use crate::algebra::{G1Elem, G2Elem, GtElem, Meter, OpCounts, PairingOps, PairingParams};
use crate::error::{Error, Result};
use crate::protocols::chen::ChenOutsourcer;
use crate::protocols::cm::{CmOutsourcer, CmSetup, SessionKeys};
use crate::protocols::revised::RevisedOutsourcer;
use crate::protocols::{Outcome, Protocol, Query, Response};
use crate::randtable::{RandTable, SixTuple};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Party {
    #[serde(rename = "T")]
    Outsourcer,
    U1,
    U2,
    U,
    #[serde(rename = "setup")]
    TrustedSetup,
}

impl fmt::Display for Party {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Party::Outsourcer => "T",
            Party::U1 => "U1",
            Party::U2 => "U2",
            Party::U => "U",
            Party::TrustedSetup => "setup",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ServerId {
    U1,
    U2,
    U,
}

/// Query on the way to a server or response on the way back.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "direction", content = "payload", rename_all = "snake_case")]
pub enum Payload {
    Query(Query),
    Response(Response),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChannelMessage {
    pub protocol: Protocol,
    pub session: u64,
    pub channel: ServerId,
    pub encrypted: bool,
    #[serde(flatten)]
    pub payload: Payload,
}

impl ChannelMessage {
    /// `T->U1`, `U1->T`, ...
    pub fn route(&self) -> String {
        match self.payload {
            Payload::Query(_) => format!("T->{:?}", self.channel),
            Payload::Response(_) => format!("{:?}->T", self.channel),
        }
    }

    /// Length of the payload's canonical JSON encoding.
    pub fn payload_bytes(&self) -> usize {
        let encoded = match &self.payload {
            Payload::Query(q) => serde_json::to_vec(q),
            Payload::Response(r) => serde_json::to_vec(r),
        };
        encoded.expect("payloads always serialize").len()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Transcript {
    pub messages: Vec<ChannelMessage>,
}

impl Transcript {
    /// One message per line.
    pub fn to_jsonl(&self) -> String {
        self.messages
            .iter()
            .map(|m| serde_json::to_string(m).expect("messages always serialize") + "\n")
            .collect()
    }

    pub fn from_jsonl(text: &str) -> Result<Self> {
        let messages = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(serde_json::from_str)
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self { messages })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChannelStats {
    pub messages: u64,
    pub bytes: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostReport {
    pub parties: BTreeMap<Party, OpCounts>,
    pub channels: BTreeMap<String, ChannelStats>,
    pub tuples_consumed: u64,
    /// `GT` values returned by servers.
    pub response_values: u64,
}

impl CostReport {
    pub fn party(&self, party: Party) -> OpCounts {
        self.parties.get(&party).copied().unwrap_or_default()
    }

    pub fn total_bytes(&self) -> u64 {
        self.channels.values().map(|c| c.bytes).sum()
    }

    pub fn total_messages(&self) -> u64 {
        self.channels.values().map(|c| c.messages).sum()
    }

    fn merge(&mut self, other: &CostReport) {
        for (party, counts) in &other.parties {
            *self.parties.entry(*party).or_default() += *counts;
        }
        for (route, stats) in &other.channels {
            let entry = self.channels.entry(route.clone()).or_default();
            entry.messages += stats.messages;
            entry.bytes += stats.bytes;
        }
        self.tuples_consumed += other.tuples_consumed;
        self.response_values += other.response_values;
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Accepted,
    Rejected,
    NoVerification,
}

#[derive(Clone, Copy, Debug)]
pub struct SessionOptions {
    pub protocol: Protocol,
    pub session: u64,
    /// Drives the outsourcer's own randomness (CM session keys).
    pub seed: u64,
    pub encrypted: bool,
    /// Extra bytes charged per encrypted message.
    pub encryption_overhead: u64,
}

impl SessionOptions {
    pub fn new(protocol: Protocol, session: u64, seed: u64) -> Self {
        Self { protocol, session, seed, encrypted: false, encryption_overhead: 0 }
    }
}

/// Where the outsourcer's blinding material and servers come from.
pub enum Deployment<'a> {
    TwoServer { table: &'a mut RandTable, u1: &'a mut Server, u2: &'a mut Server },
    SingleServer { setup: &'a CmSetup, server: &'a mut Server },
}

#[derive(Clone, Debug)]
pub struct SessionResult {
    pub protocol: Protocol,
    pub session: u64,
    pub a: G1Elem,
    pub b: G2Elem,
    pub verdict: Verdict,
    pub output: Option<GtElem>,
    /// `e(A, B)` computed directly.
    pub truth: GtElem,
    pub transcript: Transcript,
    pub costs: CostReport,
    /// Oracle data: the `V` row of a two-server session.
    pub blinding: Option<SixTuple>,
    /// Oracle data: the keys of a CM session.
    pub cm_keys: Option<SessionKeys>,
}

impl SessionResult {
    /// `output · truth⁻¹`, when there is an output.
    pub fn residual(&self, params: &PairingParams) -> Option<GtElem> {
        self.output.map(|o| params.gt_mul(o, params.gt_inv(self.truth)))
    }
}

struct Wire {
    protocol: Protocol,
    session: u64,
    encrypted: bool,
    overhead: u64,
    transcript: Transcript,
    channels: BTreeMap<String, ChannelStats>,
}

impl Wire {
    fn send(&mut self, channel: ServerId, payload: Payload) {
        let msg = ChannelMessage { protocol: self.protocol, session: self.session, channel, encrypted: self.encrypted, payload };
        let stats = self.channels.entry(msg.route()).or_default();
        stats.messages += 1;
        stats.bytes += msg.payload_bytes() as u64 + if self.encrypted { self.overhead } else { 0 };
        self.transcript.messages.push(msg);
    }

    fn exchange<O: PairingOps>(&mut self, ops: &O, channel: ServerId, server: &mut Server, query: &Query) -> Result<Response> {
        self.send(channel, Payload::Query(query.clone()));
        let resp = server.respond(ops, query)?;
        self.send(channel, Payload::Response(resp.clone()));
        Ok(resp)
    }
}

/// Runs prepare → exchange (U1 before U2) → verify → recover.
pub fn run_session(
    params: &PairingParams,
    opts: &SessionOptions,
    a: G1Elem,
    b: G2Elem,
    deployment: Deployment<'_>,
) -> Result<SessionResult> {
    params.check_g1(a)?;
    params.check_g2(b)?;
    let mut wire = Wire {
        protocol: opts.protocol,
        session: opts.session,
        encrypted: opts.encrypted,
        overhead: opts.encryption_overhead,
        transcript: Transcript::default(),
        channels: BTreeMap::new(),
    };
    let t = Meter::new(params);
    let mut parties = BTreeMap::new();
    let mut blinding = None;
    let mut cm_keys = None;
    let tuples_consumed;
    let response_values;

    let outcome = match (opts.protocol, deployment) {
        (Protocol::Chen | Protocol::Revised, Deployment::TwoServer { table, u1, u2 }) => {
            if table.params() != params {
                return Err(Error::Config("table was generated for different parameters".into()));
            }
            let (m1, m2) = (Meter::new(params), Meter::new(params));
            let before = table.cursor();
            let outcome = if opts.protocol == Protocol::Chen {
                let (out, q1, q2) = ChenOutsourcer::start(&t, a, b, table)?;
                blinding = Some(out.secrets().v);
                let r1 = wire.exchange(&m1, ServerId::U1, u1, &q1)?;
                let r2 = wire.exchange(&m2, ServerId::U2, u2, &q2)?;
                out.finish(&t, &r1, &r2)?
            } else {
                let (out, q1, q2) = RevisedOutsourcer::start(&t, a, b, table)?;
                blinding = Some(out.secrets().v);
                let r1 = wire.exchange(&m1, ServerId::U1, u1, &q1)?;
                let r2 = wire.exchange(&m2, ServerId::U2, u2, &q2)?;
                out.finish(&t, &r1, &r2)?
            };
            tuples_consumed = (table.cursor() - before) as u64;
            response_values = m1.counts().pairings + m2.counts().pairings;
            parties.insert(Party::U1, m1.counts());
            parties.insert(Party::U2, m2.counts());
            parties.insert(Party::TrustedSetup, SixTuple::GENERATION_COST.scaled(tuples_consumed));
            outcome
        }
        (Protocol::Cm, Deployment::SingleServer { setup, server }) => {
            let m = Meter::new(params);
            let mut rng = ChaCha20Rng::seed_from_u64(opts.seed);
            rng.set_stream(opts.session);
            let (out, query) = CmOutsourcer::start(&t, a, b, setup, &mut rng);
            cm_keys = Some(out.secrets().keys);
            let resp = wire.exchange(&m, ServerId::U, server, &query)?;
            tuples_consumed = 0;
            response_values = resp.len() as u64;
            parties.insert(Party::U, m.counts());
            out.finish(&t, &resp)?
        }
        (protocol, _) => {
            return Err(Error::Config(format!(
                "{protocol} needs {} server(s) and matching setup",
                protocol.server_count()
            )))
        }
    };
    parties.insert(Party::Outsourcer, t.counts());

    let verdict = match outcome {
        Outcome::Accepted(_) => Verdict::Accepted,
        Outcome::Rejected => Verdict::Rejected,
        Outcome::Unverified(_) => Verdict::NoVerification,
    };
    Ok(SessionResult {
        protocol: opts.protocol,
        session: opts.session,
        a,
        b,
        verdict,
        output: outcome.output(),
        truth: params.pair(a, b),
        transcript: wire.transcript,
        costs: CostReport { parties, channels: wire.channels, tuples_consumed, response_values },
        blinding,
        cm_keys,
    })
}

/// Passive attack on an unencrypted two-server session: subtract the
/// blinding points seen on the U2 channel from the blinded inputs seen on the
/// U1 channel. Returns `None` when either tapped message is encrypted.
pub fn eavesdrop_recover(params: &PairingParams, transcript: &Transcript) -> Result<Option<(G1Elem, G2Elem)>> {
    let first = transcript
        .messages
        .first()
        .ok_or_else(|| Error::MalformedTranscript("empty transcript".into()))?;
    if first.protocol == Protocol::Cm {
        return Err(Error::MalformedTranscript("single-server transcript has no U1/U2 split".into()));
    }
    let tapped = |channel: ServerId| {
        transcript
            .messages
            .iter()
            .filter(|m| m.session == first.session && m.channel == channel)
            .find_map(|m| match &m.payload {
                Payload::Query(q) => Some((m.encrypted, q)),
                Payload::Response(_) => None,
            })
            .ok_or_else(|| Error::MalformedTranscript(format!("no query on channel {channel:?}")))
    };
    let (enc1, q1) = tapped(ServerId::U1)?;
    let (enc2, q2) = tapped(ServerId::U2)?;
    if enc1 || enc2 {
        return Ok(None);
    }
    if q1.len() < 2 || q2.len() < 2 {
        return Err(Error::MalformedTranscript("queries too short for the two-server layout".into()));
    }
    // U1 pair 0 = (A + v1V1, B + v2V2); U2 sees v1V1 in pair 1 and v2V2 in pair 0.
    let a = params.g1_sub(q1.pairs[0].0, q2.pairs[1].0);
    let b = params.g2_sub(q1.pairs[0].1, q2.pairs[0].1);
    Ok(Some((a, b)))
}

/// Aggregate costs of one protocol over a batch of sessions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtocolCosts {
    pub protocol: Protocol,
    pub sessions: u64,
    pub totals: CostReport,
    pub per_session: PerSession,
}

/// Per-session means. `pairings_saved` is one pairing minus whatever the
/// outsourcer still computed itself.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerSession {
    pub outsourcer: BTreeMap<String, f64>,
    pub delegated_pairings: f64,
    pub pairings_saved: f64,
    pub tuples_consumed: f64,
    pub response_values: f64,
    pub messages: f64,
    pub bytes: f64,
    pub bytes_per_pairing_saved: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostComparison {
    pub protocols: Vec<ProtocolCosts>,
}

pub fn compare_costs(results: &[SessionResult]) -> Result<CostComparison> {
    if results.is_empty() {
        return Err(Error::Config("cost comparison needs at least one session".into()));
    }
    let mut grouped: BTreeMap<Protocol, (u64, CostReport)> = BTreeMap::new();
    for r in results {
        let entry = grouped.entry(r.protocol).or_default();
        entry.0 += 1;
        entry.1.merge(&r.costs);
    }
    let protocols = grouped
        .into_iter()
        .map(|(protocol, (sessions, totals))| {
            let n = sessions as f64;
            let t = totals.party(Party::Outsourcer);
            let delegated: u64 = [Party::U1, Party::U2, Party::U].iter().map(|p| totals.party(*p).pairings).sum();
            let pairings_saved = 1.0 - t.pairings as f64 / n;
            let bytes = totals.total_bytes() as f64 / n;
            let outsourcer = BTreeMap::from([
                ("pairings".to_string(), t.pairings as f64 / n),
                ("scalar_mults".to_string(), t.scalar_mults as f64 / n),
                ("group_adds".to_string(), t.group_adds as f64 / n),
                ("gt_mults".to_string(), t.gt_mults as f64 / n),
                ("gt_exps".to_string(), t.gt_exps as f64 / n),
                ("gt_invs".to_string(), t.gt_invs as f64 / n),
            ]);
            let per_session = PerSession {
                outsourcer,
                delegated_pairings: delegated as f64 / n,
                pairings_saved,
                tuples_consumed: totals.tuples_consumed as f64 / n,
                response_values: totals.response_values as f64 / n,
                messages: totals.total_messages() as f64 / n,
                bytes,
                bytes_per_pairing_saved: (pairings_saved > 0.0).then(|| bytes / pairings_saved),
            };
            ProtocolCosts { protocol, sessions, totals, per_session }
        })
        .collect();
    Ok(CostComparison { protocols })
}

impl CostComparison {
    pub fn get(&self, protocol: Protocol) -> Option<&ProtocolCosts> {
        self.protocols.iter().find(|p| p.protocol == protocol)
    }

    /// Aligned-column rendering of the per-session means.
    pub fn to_text(&self) -> String {
        let header = [
            "protocol", "sessions", "T.pair", "T.smul", "T.add", "T.gtmul", "T.gtexp", "T.gtinv", "delegated",
            "tuples", "gt_back", "msgs", "bytes", "bytes/saved",
        ];
        let mut rows = vec![header.iter().map(|s| s.to_string()).collect::<Vec<_>>()];
        for p in &self.protocols {
            let s = &p.per_session;
            let o = |k: &str| format!("{:.2}", s.outsourcer[k]);
            rows.push(vec![
                p.protocol.to_string(),
                p.sessions.to_string(),
                o("pairings"),
                o("scalar_mults"),
                o("group_adds"),
                o("gt_mults"),
                o("gt_exps"),
                o("gt_invs"),
                format!("{:.2}", s.delegated_pairings),
                format!("{:.2}", s.tuples_consumed),
                format!("{:.2}", s.response_values),
                format!("{:.2}", s.messages),
                format!("{:.1}", s.bytes),
                s.bytes_per_pairing_saved.map_or("-".into(), |v| format!("{v:.1}")),
            ]);
        }
        let widths: Vec<usize> = (0..header.len()).map(|i| rows.iter().map(|r| r[i].len()).max().unwrap_or(0)).collect();
        let mut out = String::new();
        for row in rows {
            let line: Vec<String> = row.iter().zip(&widths).map(|(c, w)| format!("{c:>w$}")).collect();
            let _ = writeln!(out, "{}", line.join("  ").trim_end());
        }
        out
    }
}
