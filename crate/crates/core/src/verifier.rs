//! Privacy certification.
//!
//! Two independent routes decide whether a colluding set learns the index
//! of the requested file:
//!
//! * algebraically, by testing whether the projected shift `e_T` lies in the
//!   projected retrieval code `D|_T`;
//! * operationally, by enumerating every randomness assignment, tabulating
//!   the exact distribution of the colluders' queries for each file index,
//!   and comparing the distributions.
//!
//! The randomness of distinct rounds and blocks is independent, so the joint
//! query distribution is a product over (round, block) factors. Two products
//! of probability distributions agree iff their factors agree, so the oracle
//! enumerates and compares factor by factor.

use std::collections::HashMap;

use crate::codes::LinearCode;
use crate::collusion::{CollusionPattern, ServerSet};
use crate::error::{Error, Result};
use crate::schemes::{first_violation, RetrievalScheme, SecurityViolation};

pub const DEFAULT_ORACLE_CAP: u128 = 1_000_000;

/// True iff `e` restricted to `positions` is a codeword of `D` restricted there.
pub fn algebraic_check(d: &LinearCode, e: &[u32], positions: &[usize]) -> bool {
    let projected: Vec<u32> = positions.iter().map(|&p| e[p]).collect();
    if projected.iter().all(|&v| v == 0) {
        return true;
    }
    d.generator().select_columns(positions).row_space_contains(&projected)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OracleVerdict {
    /// All file indices induce the same query distribution.
    Equal,
    Different,
    Skipped {
        reason: String,
    },
}

impl OracleVerdict {
    pub fn as_bool(&self) -> Option<bool> {
        match self {
            OracleVerdict::Equal => Some(true),
            OracleVerdict::Different => Some(false),
            OracleVerdict::Skipped { .. } => None,
        }
    }
}

/// Randomness states of one factor: a uniform `D`-codeword per file.
pub fn factor_states(d: &LinearCode, m: usize) -> u128 {
    d.field().order().checked_pow((d.k() * m) as u32).unwrap_or(u128::MAX)
}

/// Exact distribution of the queries seen at `positions` when file
/// `file_index` out of `m` is requested with shift `e`: maps each joint view
/// (server-major, file-minor) to the number of randomness states producing it.
pub fn projected_distribution(
    d: &LinearCode,
    e: &[u32],
    positions: &[usize],
    m: usize,
    file_index: usize,
) -> HashMap<Vec<u32>, u64> {
    let f = d.field();
    let p = f.modulus();
    let dim = d.k();
    let g = d.generator();

    // Every codeword of D projected to the colluders, indexed by message.
    let per_file = f.order().pow(dim as u32) as usize;
    let mut projected: Vec<Vec<u32>> = Vec::with_capacity(per_file);
    let mut msg = vec![0u32; dim];
    for _ in 0..per_file {
        let word: Vec<u32> = positions
            .iter()
            .map(|&pos| (0..dim).fold(0, |acc, r| f.add(acc, f.mul(msg[r], g.get(r, pos)))))
            .collect();
        projected.push(word);
        for digit in msg.iter_mut() {
            *digit += 1;
            if *digit < p {
                break;
            }
            *digit = 0;
        }
    }

    let mut dist = HashMap::new();
    let mut choice = vec![0usize; m];
    loop {
        let mut view = Vec::with_capacity(positions.len() * m);
        for (t, &pos) in positions.iter().enumerate() {
            for (file, &c) in choice.iter().enumerate() {
                let mut v = projected[c][t];
                if file == file_index {
                    v = f.add(v, e[pos]);
                }
                view.push(v);
            }
        }
        *dist.entry(view).or_insert(0u64) += 1;

        let mut i = 0;
        loop {
            if i == m {
                return dist;
            }
            choice[i] += 1;
            if choice[i] < per_file {
                break;
            }
            choice[i] = 0;
            i += 1;
        }
    }
}

/// Compares the colluders' query distributions across all `m` file indices
/// for one retrieval code and shift.
pub fn distribution_oracle_single(
    d: &LinearCode,
    e: &[u32],
    positions: &[usize],
    m: usize,
    cap: u128,
) -> OracleVerdict {
    if m < 2 {
        return OracleVerdict::Skipped {
            reason: "a single file has no index to hide".into(),
        };
    }
    let states = factor_states(d, m);
    if states > cap {
        return OracleVerdict::Skipped {
            reason: format!("states={states} exceeds cap={cap}"),
        };
    }
    let reference = projected_distribution(d, e, positions, m, 0);
    for i in 1..m {
        if projected_distribution(d, e, positions, m, i) != reference {
            return OracleVerdict::Different;
        }
    }
    OracleVerdict::Equal
}

/// Oracle verdict for one colluding set, with the number of randomness
/// states enumerated per file index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SetOracle {
    pub set: ServerSet,
    pub verdict: OracleVerdict,
    pub states: u128,
}

/// Runs the exact-enumeration oracle for every colluding set of `pattern`
/// against a scheme serving `m` files.
pub fn distribution_oracle(
    scheme: &RetrievalScheme,
    pattern: &CollusionPattern,
    m: usize,
    cap: u128,
) -> Vec<SetOracle> {
    let d = scheme.retrieval_code();
    pattern
        .facets()
        .into_iter()
        .map(|set| {
            let positions = scheme.local_positions(&set);
            if positions.is_empty() {
                return SetOracle {
                    set,
                    verdict: OracleVerdict::Equal,
                    states: 0,
                };
            }
            let mut verdict = OracleVerdict::Equal;
            let mut states = 0u128;
            'factors: for round in scheme.rounds() {
                for b in 0..round.block_supports.len() {
                    let e = round.block_vector(b);
                    match distribution_oracle_single(d, &e, &positions, m, cap) {
                        OracleVerdict::Equal => states += factor_states(d, m),
                        OracleVerdict::Different => {
                            states += factor_states(d, m);
                            verdict = OracleVerdict::Different;
                            break 'factors;
                        }
                        skipped => {
                            verdict = skipped;
                            break 'factors;
                        }
                    }
                }
            }
            SetOracle { set, verdict, states }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SetReport {
    pub set: ServerSet,
    pub algebraic: bool,
    pub violation: Option<SecurityViolation>,
    pub oracle: OracleVerdict,
    pub states: u128,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrivacyReport {
    pub sets: Vec<SetReport>,
    pub overall: bool,
}

impl PrivacyReport {
    pub fn failing_sets(&self) -> Vec<&ServerSet> {
        self.sets
            .iter()
            .filter(|s| !s.algebraic || s.oracle == OracleVerdict::Different)
            .map(|s| &s.set)
            .collect()
    }
}

/// Checks every colluding set of `pattern` both ways. A disagreement between
/// the two methods is an internal error.
pub fn verify_scheme(
    scheme: &RetrievalScheme,
    pattern: &CollusionPattern,
    m: usize,
    cap: u128,
) -> Result<PrivacyReport> {
    let oracle = distribution_oracle(scheme, pattern, m, cap);
    let mut sets = Vec::with_capacity(oracle.len());
    for SetOracle { set, verdict, states } in oracle {
        let violation = first_violation(scheme, &set);
        let algebraic = violation.is_none();
        if let Some(o) = verdict.as_bool() {
            if o != algebraic {
                return Err(Error::MethodDisagreement {
                    set: set.into_iter().collect(),
                    algebraic,
                    oracle: o,
                });
            }
        }
        sets.push(SetReport {
            set,
            algebraic,
            violation,
            oracle: verdict,
            states,
        });
    }
    let overall = sets.iter().all(|s| s.algebraic && s.oracle != OracleVerdict::Different);
    Ok(PrivacyReport { sets, overall })
}
