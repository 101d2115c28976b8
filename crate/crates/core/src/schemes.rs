//! Executable (D, e)-retrieval schemes.
//!
//! Every scheme is described by the same data: the servers it queries, a
//! retrieval code `D` on those servers, and a list of rounds. In each round
//! every block (stripe) of the requested file gets its own 0-1 shift vector;
//! the union of these supports is where coded symbols of the requested file
//! leak into the responses. Construction checks that the schedule is
//! decodable and that the scheme is secure against its target pattern.

use std::collections::BTreeSet;

use crate::codes::{self, GrsSpec, LinearCode};
use crate::collusion::{plan_rate, CollusionPattern, ServerSet};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rate::{rate, Rate};
use crate::verifier::algebraic_check;

/// Unions of parts are searched exhaustively up to this many parts.
pub const MAX_PARTS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SchemeKind {
    /// GRS retrieval code protecting every set of `t` servers.
    Tpir,
    /// t-PIR on a punctured server set with the shift confined to an information set.
    InfoSet,
    /// Repetition retrieval code, shift constant on each colluding group.
    Partition,
    /// Repetition retrieval code, one group carries randomness, the others one stripe each.
    StripedPartition,
}

impl SchemeKind {
    pub fn name(&self) -> &'static str {
        match self {
            SchemeKind::Tpir => "tpir",
            SchemeKind::InfoSet => "infoset",
            SchemeKind::Partition => "partition",
            SchemeKind::StripedPartition => "striped",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundPlan {
    /// Union of the block shifts, indexed by retained position.
    pub e: Vec<u32>,
    /// For each block, the retained positions where its shift is 1.
    pub block_supports: Vec<Vec<usize>>,
}

impl RoundPlan {
    fn new(len: usize, block_supports: Vec<Vec<usize>>) -> Self {
        let mut e = vec![0u32; len];
        for &pos in block_supports.iter().flatten() {
            e[pos] = 1;
        }
        Self { e, block_supports }
    }

    /// The 0-1 shift applied to `block` this round.
    pub fn block_vector(&self, block: usize) -> Vec<u32> {
        let mut v = vec![0u32; self.e.len()];
        for &pos in &self.block_supports[block] {
            v[pos] = 1;
        }
        v
    }
}

#[derive(Debug, Clone)]
pub struct RetrievalScheme {
    kind: SchemeKind,
    storage_code: LinearCode,
    local_code: LinearCode,
    retrieval_code: LinearCode,
    parity_check: Matrix,
    retained_servers: Vec<usize>,
    rounds: Vec<RoundPlan>,
    blocks: usize,
    protection: usize,
    target: CollusionPattern,
    rate: Rate,
}

impl RetrievalScheme {
    pub fn kind(&self) -> SchemeKind {
        self.kind
    }

    /// The storage code on all `n` servers.
    pub fn storage_code(&self) -> &LinearCode {
        &self.storage_code
    }

    /// The storage code restricted to the retained servers.
    pub fn local_code(&self) -> &LinearCode {
        &self.local_code
    }

    pub fn retrieval_code(&self) -> &LinearCode {
        &self.retrieval_code
    }

    /// Rows spanning the dual of `local_code ⋆ retrieval_code`.
    pub fn parity_check(&self) -> &Matrix {
        &self.parity_check
    }

    pub fn retained_servers(&self) -> &[usize] {
        &self.retained_servers
    }

    pub fn rounds(&self) -> &[RoundPlan] {
        &self.rounds
    }

    /// Number of blocks (stripes) each file is split into.
    pub fn blocks(&self) -> usize {
        self.blocks
    }

    /// Coded symbols gathered per block; always `k`-dimensional information.
    pub fn symbols_per_block(&self) -> usize {
        self.storage_code.k()
    }

    /// The collusion size `t` the retrieval code was built for.
    pub fn protection(&self) -> usize {
        self.protection
    }

    pub fn target(&self) -> &CollusionPattern {
        &self.target
    }

    pub fn rate(&self) -> Rate {
        self.rate
    }

    pub fn downloads(&self) -> usize {
        self.rounds.len() * self.retained_servers.len()
    }

    pub fn decoded_symbols(&self) -> usize {
        self.blocks * self.storage_code.k()
    }

    pub fn position_of(&self, server: usize) -> Option<usize> {
        self.retained_servers.iter().position(|&s| s == server)
    }

    /// Positions (in retained coordinates) of the servers of `set` that are retained.
    pub fn local_positions(&self, set: &ServerSet) -> Vec<usize> {
        set.iter().filter_map(|&s| self.position_of(s)).collect()
    }

    fn assemble(parts: SchemeParts) -> Result<Self> {
        let SchemeParts {
            kind,
            storage_code,
            retained_servers,
            retrieval_code,
            rounds,
            blocks,
            protection,
            target,
        } = parts;
        let local_code = if retained_servers.len() == storage_code.len() {
            storage_code.clone()
        } else {
            codes::restrict(&storage_code, &retained_servers)?
        };
        let k = storage_code.k();
        if local_code.k() != k {
            return Err(Error::Infeasible(format!(
                "storage code loses rank on the retained servers ({} < {k})",
                local_code.k()
            )));
        }
        let star = codes::star_product(&local_code, &retrieval_code)?;
        let parity_check = codes::dual(&star).generator().clone();

        validate_schedule(&local_code, &parity_check, &rounds, blocks)?;

        let downloads = (rounds.len() * retained_servers.len()) as u64;
        let scheme = Self {
            kind,
            storage_code,
            local_code,
            retrieval_code,
            parity_check,
            retained_servers,
            rounds,
            blocks,
            protection,
            target,
            rate: rate((blocks * k) as u64, downloads),
        };
        if !scheme_secure_against(&scheme, &scheme.target) {
            return Err(Error::Infeasible(format!(
                "constructed {} scheme is not secure against its target pattern",
                kind.name()
            )));
        }
        Ok(scheme)
    }
}

struct SchemeParts {
    kind: SchemeKind,
    storage_code: LinearCode,
    retained_servers: Vec<usize>,
    retrieval_code: LinearCode,
    rounds: Vec<RoundPlan>,
    blocks: usize,
    protection: usize,
    target: CollusionPattern,
}

/// Per round, the injected positions must be distinct and independent
/// columns of the parity check, so each round's leaked symbols are solvable.
/// Per block, the positions gathered over all rounds must be distinct and
/// carry full rank of the storage code.
fn validate_schedule(local: &LinearCode, h: &Matrix, rounds: &[RoundPlan], blocks: usize) -> Result<()> {
    let mut per_block: Vec<Vec<usize>> = vec![Vec::new(); blocks];
    for (j, round) in rounds.iter().enumerate() {
        if round.block_supports.len() != blocks {
            return Err(Error::Scheduling {
                block: 0,
                reason: format!(
                    "round {j} schedules {} blocks, expected {blocks}",
                    round.block_supports.len()
                ),
            });
        }
        let mut used = BTreeSet::new();
        for (b, support) in round.block_supports.iter().enumerate() {
            for &pos in support {
                if !used.insert(pos) {
                    return Err(Error::Scheduling {
                        block: b,
                        reason: format!("position {pos} used twice in round {j}"),
                    });
                }
                per_block[b].push(pos);
            }
        }
        let cols: Vec<usize> = used.iter().copied().collect();
        if h.select_columns(&cols).rank() != cols.len() {
            let block = round.block_supports.iter().position(|s| !s.is_empty()).unwrap_or(0);
            return Err(Error::Scheduling {
                block,
                reason: format!("round {j}: leaked symbols at {cols:?} are not separable from the interference"),
            });
        }
    }
    for (b, positions) in per_block.iter().enumerate() {
        let distinct: BTreeSet<usize> = positions.iter().copied().collect();
        if distinct.len() != positions.len() {
            return Err(Error::Scheduling {
                block: b,
                reason: format!("positions {positions:?} repeat across rounds"),
            });
        }
        if !local.full_rank_on(positions) {
            return Err(Error::Scheduling {
                block: b,
                reason: format!("storage code is not of full rank on positions {positions:?}"),
            });
        }
    }
    Ok(())
}

fn eval_points_of(code: &LinearCode) -> Vec<u32> {
    match code.eval_points() {
        Some(p) => p.to_vec(),
        None => {
            let f = code.field();
            (0..code.len() as u64).map(|a| f.reduce(a)).collect()
        }
    }
}

fn grs_retrieval_code(storage: &LinearCode, positions: &[usize], t: usize) -> Result<LinearCode> {
    let all = eval_points_of(storage);
    let points = positions.iter().map(|&j| all[j]).collect();
    codes::grs_code(&GrsSpec::new(storage.field(), positions.len(), t).with_eval_points(points))
}

/// The t-collusion scheme on all `n` servers with GRS codes sharing
/// evaluation points; `n - k - t + 1` blocks and `k` rounds. Block `b` reads
/// position `(j * blocks + b) mod n` in round `j` when these `k * blocks`
/// positions are all distinct, and `(j + b) mod n` otherwise.
pub fn build_tpir_scheme(storage: &LinearCode, t: usize) -> Result<RetrievalScheme> {
    let n = storage.len();
    let k = storage.k();
    if t == 0 || k == 0 || t + k > n {
        return Err(Error::Infeasible(format!(
            "no positive rate: t-PIR needs 1 <= t <= n - k (n = {n}, k = {k}, t = {t})"
        )));
    }
    let blocks = n - k - t + 1;
    let all: Vec<usize> = (0..n).collect();
    let retrieval_code = grs_retrieval_code(storage, &all, t)?;
    let rounds = (0..k)
        .map(|j| {
            let step = if k * blocks <= n { blocks } else { 1 };
            RoundPlan::new(n, (0..blocks).map(|b| vec![(j * step + b) % n]).collect())
        })
        .collect();
    RetrievalScheme::assemble(SchemeParts {
        kind: SchemeKind::Tpir,
        storage_code: storage.clone(),
        retained_servers: all,
        retrieval_code,
        rounds,
        blocks,
        protection: t,
        target: CollusionPattern::uniform(n, t)?,
    })
}

/// The information-set scheme: t-PIR for the planner's `t`, punctured to
/// `|I| + k + t - 1` servers, with every shift supported inside `I`.
pub fn build_infoset_scheme(storage: &LinearCode, pattern: &CollusionPattern) -> Result<RetrievalScheme> {
    check_pattern_length(storage, pattern)?;
    let k = storage.k();
    let plan = plan_rate(pattern, k)?;
    if plan.info_set.len() < k {
        return Err(Error::Infeasible(format!(
            "full-file download requires |I| >= k (|I| = {}, k = {k}); the rate plan is still available",
            plan.info_set.len()
        )));
    }
    let retained = plan.retained_servers.clone();
    let info_positions: Vec<usize> = plan
        .info_set
        .iter()
        .map(|s| retained.iter().position(|r| r == s).expect("I is retained"))
        .collect();
    let blocks = info_positions.len();
    let retrieval_code = grs_retrieval_code(storage, &retained, plan.t)?;
    let rounds = (0..k)
        .map(|j| {
            RoundPlan::new(
                retained.len(),
                (0..blocks).map(|b| vec![info_positions[(b + j) % blocks]]).collect(),
            )
        })
        .collect();
    RetrievalScheme::assemble(SchemeParts {
        kind: SchemeKind::InfoSet,
        storage_code: storage.clone(),
        retained_servers: retained,
        retrieval_code,
        rounds,
        blocks,
        protection: plan.t,
        target: pattern.clone(),
    })
}

/// Support of the repetition-scheme shift: the union of parts maximizing
/// `min(w, n - w)`, then larger `w`, then the lexicographically least support.
pub fn partition_support(pattern: &CollusionPattern) -> Result<Vec<usize>> {
    let parts = pattern.partition_parts();
    if parts.len() < 2 {
        return Err(Error::Infeasible(
            "repetition scheme requires a disconnected pattern".into(),
        ));
    }
    if parts.len() > MAX_PARTS {
        return Err(Error::Infeasible(format!(
            "{} parts exceed the search limit of {MAX_PARTS}",
            parts.len()
        )));
    }
    let n = pattern.n();
    let mut best: Option<((usize, usize), Vec<usize>)> = None;
    for mask in 1u32..(1u32 << parts.len()) - 1 {
        let mut support: Vec<usize> = parts
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .flat_map(|(_, p)| p.iter().copied())
            .collect();
        support.sort_unstable();
        let w = support.len();
        let key = (w.min(n - w), w);
        let better = match &best {
            None => true,
            Some((bk, bs)) => key > *bk || (key == *bk && support < *bs),
        };
        if better {
            best = Some((key, support));
        }
    }
    Ok(best.expect("at least two parts give a proper union").1)
}

fn indicator(n: usize, support: &[usize]) -> Vec<u32> {
    let mut e = vec![0u32; n];
    for &j in support {
        e[j] = 1;
    }
    e
}

/// Rate-only planning for the repetition scheme: `rank(C diag(e) C⊥) / n`
/// with the shift chosen by [`partition_support`]. Unlike
/// [`build_partition_scheme`] this does not require a full-file download.
pub fn partition_rate(storage: &LinearCode, pattern: &CollusionPattern) -> Result<(Vec<u32>, Rate)> {
    check_pattern_length(storage, pattern)?;
    let e = indicator(storage.len(), &partition_support(pattern)?);
    let r = codes::rank_masked_product(storage, &e)?;
    Ok((e.clone(), rate(r as u64, storage.len() as u64)))
}

/// The single-round repetition scheme for a disconnected pattern. Requires
/// the shift to expose all `k` symbols of the file, i.e.
/// `rank(C diag(e) C⊥) = k`.
pub fn build_partition_scheme(storage: &LinearCode, pattern: &CollusionPattern) -> Result<RetrievalScheme> {
    check_pattern_length(storage, pattern)?;
    let n = storage.len();
    let k = storage.k();
    let support = partition_support(pattern)?;
    let exposed = codes::rank_masked_product(storage, &indicator(n, &support))?;
    if exposed < k {
        return Err(Error::Infeasible(format!(
            "full-file download requires rank(C diag(e) C⊥) = k, but the best shift exposes {exposed} of {k} symbols"
        )));
    }
    RetrievalScheme::assemble(SchemeParts {
        kind: SchemeKind::Partition,
        storage_code: storage.clone(),
        retained_servers: (0..n).collect(),
        retrieval_code: codes::repetition(storage.field(), n)?,
        rounds: vec![RoundPlan::new(n, vec![support])],
        blocks: 1,
        protection: 1,
        target: pattern.clone(),
    })
}

/// The striped repetition scheme: the first part receives pure randomness,
/// part `σ + 1` receives the shift for stripe `σ`. Exactly `k` servers
/// (lowest indices) of every part are queried.
pub fn build_striped_partition_scheme(storage: &LinearCode, pattern: &CollusionPattern) -> Result<RetrievalScheme> {
    check_pattern_length(storage, pattern)?;
    let k = storage.k();
    let parts = pattern.partition_parts();
    if parts.len() < 2 {
        return Err(Error::Infeasible(
            "repetition scheme requires a disconnected pattern".into(),
        ));
    }
    if let Some(small) = parts.iter().find(|p| p.len() < k) {
        return Err(Error::Infeasible(format!(
            "each part must have size >= k for striped decoding (part {small:?} has {} < {k})",
            small.len()
        )));
    }
    let chosen: Vec<Vec<usize>> = parts.iter().map(|p| p.iter().copied().take(k).collect()).collect();
    let mut retained: Vec<usize> = chosen.iter().flatten().copied().collect();
    retained.sort_unstable();
    let stripes = parts.len() - 1;
    let supports = chosen[1..]
        .iter()
        .map(|servers| {
            servers
                .iter()
                .map(|s| retained.iter().position(|r| r == s).expect("retained"))
                .collect()
        })
        .collect();
    let len = retained.len();
    RetrievalScheme::assemble(SchemeParts {
        kind: SchemeKind::StripedPartition,
        storage_code: storage.clone(),
        retained_servers: retained,
        retrieval_code: codes::repetition(storage.field(), len)?,
        rounds: vec![RoundPlan::new(len, supports)],
        blocks: stripes,
        protection: 1,
        target: pattern.clone(),
    })
}

fn check_pattern_length(storage: &LinearCode, pattern: &CollusionPattern) -> Result<()> {
    if storage.len() != pattern.n() {
        return Err(Error::InvalidPattern(format!(
            "pattern on {} servers for a code of length {}",
            pattern.n(),
            storage.len()
        )));
    }
    Ok(())
}

pub fn scheme_rate(scheme: &RetrievalScheme) -> Rate {
    scheme.rate()
}

/// A colluding set, round and block where the shift escapes `D|_T`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SecurityViolation {
    pub set: ServerSet,
    pub round: usize,
    pub block: usize,
    pub projected_e: Vec<u32>,
}

/// First violation of `e_T ∈ D|_T` for a set `T` of (full-system) servers.
pub fn first_violation(scheme: &RetrievalScheme, set: &ServerSet) -> Option<SecurityViolation> {
    let positions = scheme.local_positions(set);
    if positions.is_empty() {
        return None;
    }
    for (j, round) in scheme.rounds().iter().enumerate() {
        for b in 0..round.block_supports.len() {
            let e = round.block_vector(b);
            if !algebraic_check(scheme.retrieval_code(), &e, &positions) {
                return Some(SecurityViolation {
                    set: set.clone(),
                    round: j,
                    block: b,
                    projected_e: positions.iter().map(|&p| e[p]).collect(),
                });
            }
        }
    }
    None
}

/// True iff every colluding set of `pattern` sees each block shift inside
/// the projection of the retrieval code.
pub fn scheme_secure_against(scheme: &RetrievalScheme, pattern: &CollusionPattern) -> bool {
    pattern.facets().iter().all(|t| first_violation(scheme, t).is_none())
}
