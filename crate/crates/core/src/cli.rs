//! Scenario files, the scenario runner and fixture generation behind the
//! `pairlab` binary.
//!
//! A scenario fixes a protocol, parameters, a table, inputs, server
//! behaviors and an expectation. Running it yields one record per session
//! and a pass/fail verdict on the expectation. A file may also hold a suite:
//! `{"name": ..., "scenarios": [...]}`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::adversaries::{Behavior, Server};
use crate::algebra::{G1Elem, G2Elem, GtElem, Meter, PairingParams};
use crate::error::{Error, Result};
use crate::protocols::cm::CmSetup;
use crate::protocols::{chen, revised, Protocol};
use crate::randtable::RandTable;
use crate::simnet::{
    compare_costs, eavesdrop_recover, run_session, CostComparison, CostReport, Deployment, SessionOptions,
    SessionResult, Transcript, Verdict,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    /// q = 11, p = 23
    Desk,
    /// 31-bit group order
    Large,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamsSource {
    Preset(Preset),
    Generate { bits: u32, #[serde(default)] seed: u64 },
    Inline(PairingParams),
    File(PathBuf),
}

impl Default for ParamsSource {
    fn default() -> Self {
        ParamsSource::Preset(Preset::Large)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TableSource {
    /// Sized to the session count unless `size` is given.
    Generate {
        #[serde(default)]
        seed: Option<u64>,
        #[serde(default)]
        size: Option<usize>,
    },
    File(PathBuf),
}

impl Default for TableSource {
    fn default() -> Self {
        TableSource::Generate { seed: None, size: None }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputMode {
    Explicit(Vec<(G1Elem, G2Elem)>),
    Random {
        count: usize,
        #[serde(default)]
        seed: Option<u64>,
    },
    /// Every `(A, B)` in `Z_q × Z_q`; only for small `q`.
    Exhaustive,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expectation {
    #[default]
    None,
    /// Output present and equal to `e(A, B)`.
    HonestComplete,
    /// Not rejected, yet output differs from `e(A, B)`.
    AttackUndetected,
    /// Rejected, except on key sets where the tampered slot is provably
    /// invisible to the check, where acceptance is expected instead.
    Detected,
    /// A passive observer recovers `(A, B)` exactly.
    EavesdropRecovers,
    /// A passive observer recovers nothing.
    EavesdropBlocked,
}

impl Expectation {
    pub fn as_str(self) -> &'static str {
        match self {
            Expectation::None => "none",
            Expectation::HonestComplete => "honest_complete",
            Expectation::AttackUndetected => "attack_undetected",
            Expectation::Detected => "detected",
            Expectation::EavesdropRecovers => "eavesdrop_recovers",
            Expectation::EavesdropBlocked => "eavesdrop_blocked",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub protocol: Protocol,
    #[serde(default)]
    pub params: ParamsSource,
    #[serde(default)]
    pub table: TableSource,
    pub inputs: InputMode,
    /// `u1`/`u2` for two-server protocols, `u` for cm. Missing servers are honest.
    #[serde(default)]
    pub behaviors: BTreeMap<String, Behavior>,
    #[serde(default)]
    pub encrypted: bool,
    #[serde(default)]
    pub encryption_overhead: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub expect: Expectation,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Suite {
    pub name: String,
    pub scenarios: Vec<Scenario>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SuiteFile {
    name: String,
    scenarios: Vec<Scenario>,
}

/// Loads a scenario or suite file. A lone scenario becomes a one-entry suite.
pub fn load_suite(path: &Path) -> Result<Suite> {
    let text = fs::read_to_string(path)?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    let suite = if value.get("scenarios").is_some() {
        let f: SuiteFile = serde_json::from_value(value)?;
        Suite { name: f.name, scenarios: f.scenarios }
    } else {
        let s: Scenario = serde_json::from_value(value)?;
        Suite { name: s.name.clone(), scenarios: vec![s] }
    };
    if suite.scenarios.is_empty() {
        return Err(Error::Config("suite has no scenarios".into()));
    }
    Ok(suite)
}

/// Per-session line of the summary report.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionRecord {
    pub index: u64,
    pub a: G1Elem,
    pub b: G2Elem,
    pub verdict: Verdict,
    pub output: Option<GtElem>,
    pub truth: GtElem,
    pub output_matches_truth: bool,
    /// `output · truth⁻¹`
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<GtElem>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eavesdropped: Option<Option<(G1Elem, G2Elem)>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub degenerate_keys: Option<bool>,
    pub expectation_met: bool,
    pub costs: CostReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSummary {
    pub scenario: String,
    pub protocol: Protocol,
    pub params: PairingParams,
    pub expect: Expectation,
    pub sessions: usize,
    pub passed: bool,
    pub failures: Vec<u64>,
    pub comparison: CostComparison,
    pub records: Vec<SessionRecord>,
}

pub struct ScenarioRun {
    pub summary: ScenarioSummary,
    pub results: Vec<SessionResult>,
}

impl ScenarioRun {
    pub fn transcript_jsonl(&self) -> String {
        self.results.iter().map(|r| r.transcript.to_jsonl()).collect()
    }
}

/// Stable 64-bit seed for a named sub-stream of a scenario seed.
pub fn derive_seed(seed: u64, label: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes().chain(seed.to_le_bytes()) {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    // splitmix64 finalizer
    h = (h ^ (h >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    h = (h ^ (h >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    h ^ (h >> 31)
}

fn resolve(base: &Path, path: &Path) -> PathBuf {
    if path.is_absolute() {
        path.to_path_buf()
    } else {
        base.join(path)
    }
}

fn load_params(source: &ParamsSource, base: &Path) -> Result<PairingParams> {
    match source {
        ParamsSource::Preset(Preset::Desk) => Ok(PairingParams::desk()),
        ParamsSource::Preset(Preset::Large) => Ok(PairingParams::large()),
        ParamsSource::Generate { bits, seed } => PairingParams::generate(*bits, *seed),
        ParamsSource::Inline(p) => Ok(p.clone()),
        ParamsSource::File(path) => Ok(serde_json::from_str(&fs::read_to_string(resolve(base, path))?)?),
    }
}

const MAX_EXHAUSTIVE_Q: u64 = 1000;

fn expand_inputs(mode: &InputMode, params: &PairingParams, seed: u64) -> Result<Vec<(G1Elem, G2Elem)>> {
    let inputs = match mode {
        InputMode::Explicit(pairs) => {
            for &(a, b) in pairs {
                params.check_g1(a)?;
                params.check_g2(b)?;
            }
            pairs.clone()
        }
        InputMode::Random { count, seed: explicit } => {
            let mut rng = ChaCha20Rng::seed_from_u64(explicit.unwrap_or_else(|| derive_seed(seed, "inputs")));
            (0..*count)
                .map(|_| (G1Elem::new(rng.gen_range(0..params.q())), G2Elem::new(rng.gen_range(0..params.q()))))
                .collect()
        }
        InputMode::Exhaustive => {
            if params.q() > MAX_EXHAUSTIVE_Q {
                return Err(Error::Config(format!("exhaustive inputs need q <= {MAX_EXHAUSTIVE_Q}")));
            }
            let q = params.q();
            (0..q).flat_map(|a| (0..q).map(move |b| (G1Elem::new(a), G2Elem::new(b)))).collect()
        }
    };
    if inputs.is_empty() {
        return Err(Error::Config("scenario has no sessions".into()));
    }
    Ok(inputs)
}

fn behavior_for(scenario: &Scenario, server: &str) -> Behavior {
    scenario.behaviors.get(server).cloned().unwrap_or(Behavior::Honest)
}

fn check_behavior_keys(scenario: &Scenario) -> Result<()> {
    let allowed: &[&str] = match scenario.protocol {
        Protocol::Chen | Protocol::Revised => &["u1", "u2"],
        Protocol::Cm => &["u"],
    };
    for key in scenario.behaviors.keys() {
        if !allowed.contains(&key.as_str()) {
            return Err(Error::Config(format!(
                "behavior for {key:?} does not fit {} (servers: {allowed:?})",
                scenario.protocol
            )));
        }
    }
    Ok(())
}

/// Runs every session of `scenario`; all paths in it resolve against `base`.
pub fn run_scenario(scenario: &Scenario, base: &Path, seed_override: Option<u64>) -> Result<ScenarioRun> {
    check_behavior_keys(scenario)?;
    let seed = seed_override.unwrap_or(scenario.seed);
    let params = load_params(&scenario.params, base)?;
    let inputs = expand_inputs(&scenario.inputs, &params, seed)?;

    let tuples_per_session = match scenario.protocol {
        Protocol::Chen => chen::TUPLES_PER_SESSION,
        Protocol::Revised => revised::TUPLES_PER_SESSION,
        Protocol::Cm => 0,
    };
    let mut table = if tuples_per_session > 0 {
        Some(match &scenario.table {
            TableSource::Generate { seed: explicit, size } => RandTable::generate(
                &params,
                size.unwrap_or(inputs.len() * tuples_per_session),
                explicit.unwrap_or_else(|| derive_seed(seed, "table")),
            )?,
            TableSource::File(path) => {
                let table = RandTable::load(&resolve(base, path))?;
                if table.params() != &params {
                    return Err(Error::Config("table file was generated for different parameters".into()));
                }
                table
            }
        })
    } else {
        None
    };
    let cm_setup = {
        let mut rng = ChaCha20Rng::seed_from_u64(derive_seed(seed, "cm_setup"));
        CmSetup::random(&Meter::new(&params), &mut rng)
    };

    let mut results = Vec::with_capacity(inputs.len());
    let mut records = Vec::with_capacity(inputs.len());
    for (index, &(a, b)) in inputs.iter().enumerate() {
        let index = index as u64;
        let opts = SessionOptions {
            protocol: scenario.protocol,
            session: index,
            seed: derive_seed(seed, "outsourcer"),
            encrypted: scenario.encrypted,
            encryption_overhead: scenario.encryption_overhead,
        };
        let result = match (&mut table, scenario.protocol) {
            (Some(table), Protocol::Chen | Protocol::Revised) => {
                let mut u1 = Server::for_session(behavior_for(scenario, "u1"), index);
                let mut u2 = Server::for_session(behavior_for(scenario, "u2"), index);
                run_session(&params, &opts, a, b, Deployment::TwoServer { table, u1: &mut u1, u2: &mut u2 })?
            }
            _ => {
                let mut u = Server::for_session(behavior_for(scenario, "u"), index);
                run_session(&params, &opts, a, b, Deployment::SingleServer { setup: &cm_setup, server: &mut u })?
            }
        };
        records.push(record(scenario, &params, &result)?);
        results.push(result);
    }

    let failures: Vec<u64> = records.iter().filter(|r| !r.expectation_met).map(|r| r.index).collect();
    let summary = ScenarioSummary {
        scenario: scenario.name.clone(),
        protocol: scenario.protocol,
        params,
        expect: scenario.expect,
        sessions: records.len(),
        passed: failures.is_empty(),
        failures,
        comparison: compare_costs(&results)?,
        records,
    };
    Ok(ScenarioRun { summary, results })
}

fn record(scenario: &Scenario, params: &PairingParams, result: &SessionResult) -> Result<SessionRecord> {
    let eavesdropped = match scenario.protocol {
        Protocol::Chen | Protocol::Revised => Some(eavesdrop_recover(params, &result.transcript)?),
        Protocol::Cm => None,
    };
    let degenerate_keys = match (behavior_for(scenario, "u"), result.cm_keys) {
        (Behavior::IndexTamper { index: 0, .. }, Some(keys)) => Some(keys.alpha1_blind(params)),
        (Behavior::IndexTamper { index: 1, .. }, Some(keys)) => Some(keys.alpha2_blind(params)),
        (_, Some(_)) => Some(false),
        _ => None,
    };
    let matches = result.output == Some(result.truth);
    let expectation_met = match scenario.expect {
        Expectation::None => true,
        Expectation::HonestComplete => matches,
        Expectation::AttackUndetected => result.verdict != Verdict::Rejected && !matches,
        Expectation::Detected => {
            if degenerate_keys == Some(true) {
                result.verdict == Verdict::Accepted
            } else {
                result.verdict == Verdict::Rejected
            }
        }
        Expectation::EavesdropRecovers => eavesdropped == Some(Some((result.a, result.b))),
        Expectation::EavesdropBlocked => eavesdropped == Some(None),
    };
    Ok(SessionRecord {
        index: result.session,
        a: result.a,
        b: result.b,
        verdict: result.verdict,
        output: result.output,
        truth: result.truth,
        output_matches_truth: matches,
        residual: result.residual(params),
        eavesdropped,
        degenerate_keys,
        expectation_met,
        costs: result.costs.clone(),
    })
}

pub struct SuiteRun {
    pub name: String,
    pub runs: Vec<ScenarioRun>,
    pub comparison: CostComparison,
}

impl SuiteRun {
    pub fn passed(&self) -> bool {
        self.runs.iter().all(|r| r.summary.passed)
    }

    /// Human-readable description of every failing session, capped per scenario.
    pub fn diff_report(&self) -> String {
        let mut out = String::new();
        for run in self.runs.iter().filter(|r| !r.summary.passed) {
            let s = &run.summary;
            let _ = writeln!(out, "{}: expected {}, {} of {} sessions violate it", s.scenario, s.expect.as_str(), s.failures.len(), s.sessions);
            for r in s.records.iter().filter(|r| !r.expectation_met).take(10) {
                let _ = writeln!(
                    out,
                    "  session {}: A={} B={} verdict={:?} output={} truth={} eavesdropped={:?}",
                    r.index,
                    r.a,
                    r.b,
                    r.verdict,
                    r.output.map_or("-".into(), |o| o.to_string()),
                    r.truth,
                    r.eavesdropped
                );
            }
        }
        out
    }

    pub fn overview_json(&self) -> serde_json::Value {
        let scenarios: Vec<serde_json::Value> = self
            .runs
            .iter()
            .map(|r| {
                serde_json::json!({
                    "name": r.summary.scenario,
                    "protocol": r.summary.protocol,
                    "expect": r.summary.expect,
                    "sessions": r.summary.sessions,
                    "passed": r.summary.passed,
                    "failures": r.summary.failures,
                })
            })
            .collect();
        serde_json::json!({
            "suite": self.name,
            "passed": self.passed(),
            "scenarios": scenarios,
            "comparison": self.comparison,
        })
    }

    pub fn overview_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "suite {}", self.name);
        for r in &self.runs {
            let s = &r.summary;
            let _ = writeln!(
                out,
                "  {:<28} {:<8} {:>6} sessions  expect {:<20} {}",
                s.scenario,
                s.protocol.as_str(),
                s.sessions,
                s.expect.as_str(),
                if s.passed { "PASS" } else { "FAIL" }
            );
        }
        out.push('\n');
        out.push_str(&self.comparison.to_text());
        out
    }

    /// Writes `<scenario>.summary.json` and `<scenario>.transcript.jsonl` per
    /// scenario plus `<suite>.suite.json`.
    pub fn write_reports(&self, out_dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(out_dir)?;
        let mut written = Vec::new();
        for run in &self.runs {
            let name = &run.summary.scenario;
            let summary = out_dir.join(format!("{name}.summary.json"));
            fs::write(&summary, serde_json::to_string_pretty(&run.summary)? + "\n")?;
            let transcript = out_dir.join(format!("{name}.transcript.jsonl"));
            fs::write(&transcript, run.transcript_jsonl())?;
            written.extend([summary, transcript]);
        }
        let suite = out_dir.join(format!("{}.suite.json", self.name));
        fs::write(&suite, serde_json::to_string_pretty(&self.overview_json())? + "\n")?;
        written.push(suite);
        Ok(written)
    }
}

pub fn run_suite(suite: &Suite, base: &Path, seed_override: Option<u64>) -> Result<SuiteRun> {
    let runs = suite
        .scenarios
        .iter()
        .map(|s| run_scenario(s, base, seed_override))
        .collect::<Result<Vec<_>>>()?;
    let all: Vec<SessionResult> = runs.iter().flat_map(|r| r.results.iter().cloned()).collect();
    Ok(SuiteRun { name: suite.name.clone(), comparison: compare_costs(&all)?, runs })
}

/// Convenience: load, run and report one scenario/suite file.
pub fn run_file(path: &Path, out_dir: Option<&Path>, seed_override: Option<u64>) -> Result<SuiteRun> {
    let suite = load_suite(path)?;
    let base = path.parent().unwrap_or(Path::new("."));
    let run = run_suite(&suite, base, seed_override)?;
    if let Some(dir) = out_dir {
        run.write_reports(dir)?;
    }
    Ok(run)
}

#[derive(Clone, Debug)]
pub enum ParamsSpec {
    Q(u64),
    Bits { bits: u32, seed: u64 },
}

/// Writes `params.json` and `table.json` into `out_dir`.
pub fn gen_fixtures(params: &ParamsSpec, table_size: usize, table_seed: u64, out_dir: &Path) -> Result<(PathBuf, PathBuf)> {
    let params = match *params {
        ParamsSpec::Q(q) => PairingParams::from_q(q)?,
        ParamsSpec::Bits { bits, seed } => PairingParams::generate(bits, seed)?,
    };
    let table = RandTable::generate(&params, table_size, table_seed)?;
    fs::create_dir_all(out_dir)?;
    let params_path = out_dir.join("params.json");
    fs::write(&params_path, serde_json::to_string(&params)? + "\n")?;
    let table_path = out_dir.join("table.json");
    table.save(&table_path)?;
    Ok((params_path, table_path))
}

/// Loads a transcript file and runs the passive attack on it.
pub fn eavesdrop_file(params: &PairingParams, path: &Path) -> Result<Option<(G1Elem, G2Elem)>> {
    eavesdrop_recover(params, &Transcript::from_jsonl(&fs::read_to_string(path)?)?)
}
