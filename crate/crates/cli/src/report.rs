//! JSON report types. Servers are 1-based; file indices, rounds and blocks
//! are 0-based.

use pirlab_core::collusion::{RatePlan, ServerSet};
use pirlab_core::rate::{to_f64, Rate};
use pirlab_core::schemes::RetrievalScheme;
use pirlab_core::simulator::Transcript;
use pirlab_core::verifier::{OracleVerdict, PrivacyReport};
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateJson {
    pub num: u64,
    pub den: u64,
    pub fraction: String,
    pub decimal: f64,
}

impl From<Rate> for RateJson {
    fn from(r: Rate) -> Self {
        Self {
            num: *r.numer(),
            den: *r.denom(),
            fraction: format!("{}/{}", r.numer(), r.denom()),
            decimal: to_f64(&r),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub rate: RateJson,
    pub plan: serde_json::Value,
    pub privacy: Option<PrivacyJson>,
    pub transcript: Option<TranscriptJson>,
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn one_based(servers: impl IntoIterator<Item = usize>) -> Vec<usize> {
    servers.into_iter().map(|s| s + 1).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct CandidateJson {
    pub t: usize,
    pub i_tilde_size: usize,
    pub rate: RateJson,
}

#[derive(Debug, Clone, Serialize)]
pub struct RatePlanJson {
    pub t: usize,
    pub info_set: Vec<usize>,
    pub retained_servers: Vec<usize>,
    pub rate: RateJson,
    pub candidates: Vec<CandidateJson>,
}

impl From<&RatePlan> for RatePlanJson {
    fn from(plan: &RatePlan) -> Self {
        Self {
            t: plan.t,
            info_set: one_based(plan.info_set.iter().copied()),
            retained_servers: one_based(plan.retained_servers.iter().copied()),
            rate: plan.rate.into(),
            candidates: plan
                .candidates
                .iter()
                .map(|c| CandidateJson {
                    t: c.t,
                    i_tilde_size: c.i_tilde_size,
                    rate: c.rate.into(),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RoundPlanJson {
    /// Servers receiving the shift, per block.
    pub block_supports: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SchemeJson {
    pub kind: &'static str,
    pub t: usize,
    pub retained_servers: Vec<usize>,
    pub retrieval_dim: usize,
    pub blocks: usize,
    pub rounds: Vec<RoundPlanJson>,
    pub downloads: usize,
    pub decoded_symbols: usize,
    pub rate: RateJson,
}

impl From<&RetrievalScheme> for SchemeJson {
    fn from(s: &RetrievalScheme) -> Self {
        let servers = s.retained_servers();
        Self {
            kind: s.kind().name(),
            t: s.protection(),
            retained_servers: one_based(servers.iter().copied()),
            retrieval_dim: s.retrieval_code().k(),
            blocks: s.blocks(),
            rounds: s
                .rounds()
                .iter()
                .map(|r| RoundPlanJson {
                    block_supports: r
                        .block_supports
                        .iter()
                        .map(|sup| one_based(sup.iter().map(|&pos| servers[pos])))
                        .collect(),
                })
                .collect(),
            downloads: s.downloads(),
            decoded_symbols: s.decoded_symbols(),
            rate: s.rate().into(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ServerValue {
    pub server: usize,
    pub value: u32,
}

#[derive(Debug, Clone, Serialize)]
pub struct QueryJson {
    pub server: usize,
    pub query: Vec<u32>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DecodedJson {
    pub block: usize,
    pub server: usize,
    pub value: u32,
}

#[derive(Debug, Clone, Serialize)]
pub struct RoundJson {
    pub queries: Vec<QueryJson>,
    pub responses: Vec<ServerValue>,
    pub decoded: Vec<DecodedJson>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TranscriptJson {
    pub file_index: usize,
    pub seed: u64,
    pub rounds: Vec<RoundJson>,
    pub reconstructed: Vec<u32>,
    pub matches_stored_file: bool,
    pub downloads: usize,
    pub decoded_symbols: usize,
}

impl From<&Transcript> for TranscriptJson {
    fn from(t: &Transcript) -> Self {
        let server = |pos: usize| t.retained_servers[pos] + 1;
        Self {
            file_index: t.file_index,
            seed: t.seed,
            rounds: t
                .rounds
                .iter()
                .map(|r| RoundJson {
                    queries: r
                        .queries
                        .iter()
                        .enumerate()
                        .map(|(pos, q)| QueryJson {
                            server: server(pos),
                            query: q.clone(),
                        })
                        .collect(),
                    responses: r
                        .responses
                        .iter()
                        .enumerate()
                        .map(|(pos, &value)| ServerValue {
                            server: server(pos),
                            value,
                        })
                        .collect(),
                    decoded: r
                        .decoded
                        .iter()
                        .map(|d| DecodedJson {
                            block: d.block,
                            server: server(d.position),
                            value: d.value,
                        })
                        .collect(),
                })
                .collect(),
            reconstructed: t.reconstructed.clone(),
            matches_stored_file: true,
            downloads: t.downloads,
            decoded_symbols: t.decoded_symbols(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ViolationJson {
    pub round: usize,
    pub block: usize,
    pub projected_e: Vec<u32>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SetJson {
    pub set: Vec<usize>,
    pub algebraic: bool,
    pub violation: Option<ViolationJson>,
    /// `"equal"`, `"different"` or `"skipped(<reason>)"`.
    pub oracle: String,
    pub states: u128,
}

#[derive(Debug, Clone, Serialize)]
pub struct PrivacyJson {
    pub overall: bool,
    pub m: usize,
    pub oracle_cap: u128,
    pub failing_sets: Vec<Vec<usize>>,
    pub sets: Vec<SetJson>,
}

pub fn oracle_label(v: &OracleVerdict) -> String {
    match v {
        OracleVerdict::Equal => "equal".into(),
        OracleVerdict::Different => "different".into(),
        OracleVerdict::Skipped { reason } => format!("skipped({reason})"),
    }
}

fn set_json(s: &ServerSet) -> Vec<usize> {
    one_based(s.iter().copied())
}

impl PrivacyJson {
    pub fn new(report: &PrivacyReport, m: usize, cap: u128) -> Self {
        Self {
            overall: report.overall,
            m,
            oracle_cap: cap,
            failing_sets: report.failing_sets().into_iter().map(set_json).collect(),
            sets: report
                .sets
                .iter()
                .map(|s| SetJson {
                    set: set_json(&s.set),
                    algebraic: s.algebraic,
                    violation: s.violation.as_ref().map(|v| ViolationJson {
                        round: v.round,
                        block: v.block,
                        projected_e: v.projected_e.clone(),
                    }),
                    oracle: oracle_label(&s.oracle),
                    states: s.states,
                })
                .collect(),
        }
    }
}
