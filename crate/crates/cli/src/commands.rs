use std::fmt::Write as _;

use pirlab_core::collusion::{naive_rate, plan_rate, CollusionPattern};
use pirlab_core::error::Error;
use pirlab_core::rate::{rate, to_f64, Rate};
use pirlab_core::schemes::{
    build_infoset_scheme, build_partition_scheme, build_striped_partition_scheme, build_tpir_scheme, partition_rate,
    RetrievalScheme, SchemeKind,
};
use pirlab_core::simulator::{encode_storage, run_retrieval, StorageSystem, Transcript};
use pirlab_core::verifier::{verify_scheme, OracleVerdict, PrivacyReport};
use serde_json::json;

use crate::config::{CodeSpec, ConfigError, FilesSpec, SystemConfig, ValidConfig};
use crate::report::{PrivacyJson, RateJson, RatePlanJson, Report, SchemeJson, TranscriptJson};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_PRIVACY: i32 = 3;
pub const EXIT_INTERNAL: i32 = 4;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        Self::usage(format!("config error: {e}"))
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Infeasible(_) | Error::Scheduling { .. } => EXIT_INFEASIBLE,
            Error::MethodDisagreement { .. } | Error::ReconstructionMismatch { .. } | Error::SingularSystem(_) => {
                EXIT_INTERNAL
            }
            _ => EXIT_USAGE,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

pub fn fmt_rate(r: Rate) -> String {
    format!("{}/{} ({:.4})", r.numer(), r.denom(), to_f64(&r))
}

fn fmt_servers<'a>(servers: impl IntoIterator<Item = &'a usize>) -> String {
    let inner: Vec<String> = servers.into_iter().map(|s| (s + 1).to_string()).collect();
    format!("{{{}}}", inner.join(","))
}

fn fmt_pattern(p: &CollusionPattern) -> String {
    let sets: Vec<String> = p.maximal_sets().iter().map(fmt_servers).collect();
    if sets.is_empty() {
        "no collusion".into()
    } else {
        sets.join(" ")
    }
}

pub fn build_scheme(cfg: &ValidConfig, kind: SchemeKind, t: Option<usize>) -> Result<RetrievalScheme, CliError> {
    let scheme = match kind {
        SchemeKind::Tpir => build_tpir_scheme(&cfg.code, t.unwrap_or_else(|| cfg.pattern.max_colluding_size()))?,
        SchemeKind::InfoSet => build_infoset_scheme(&cfg.code, &cfg.pattern)?,
        SchemeKind::Partition => build_partition_scheme(&cfg.code, &cfg.pattern)?,
        SchemeKind::StripedPartition => build_striped_partition_scheme(&cfg.code, &cfg.pattern)?,
    };
    Ok(scheme)
}

pub fn build_system(cfg: &ValidConfig, scheme: &RetrievalScheme) -> Result<StorageSystem, CliError> {
    let files = cfg.files(scheme.blocks())?;
    Ok(encode_storage(&files, &cfg.code, scheme.blocks())?)
}

#[derive(Debug, Clone)]
pub struct CommandOutput {
    pub text: String,
    pub report: Report,
}

/// Candidate table, chosen information-set plan, naive t-PIR rate and, for
/// disconnected patterns, the repetition-scheme rates.
pub fn cmd_rate(cfg: &ValidConfig) -> Result<CommandOutput, CliError> {
    let k = cfg.code.k();
    let n = cfg.code.len();
    let plan = plan_rate(&cfg.pattern, k)?;
    let mut text = String::new();
    writeln!(text, "code: [{n},{k}] over F_{}", cfg.field.modulus()).unwrap();
    writeln!(text, "pattern: {}", fmt_pattern(&cfg.pattern)).unwrap();
    writeln!(text, "{:>4} {:>8}  rate", "t", "|I~_t|").unwrap();
    for c in &plan.candidates {
        writeln!(text, "{:>4} {:>8}  {}", c.t, c.i_tilde_size, fmt_rate(c.rate)).unwrap();
    }
    writeln!(
        text,
        "chosen: t={} I={} retained={} ({} servers) rate {}",
        plan.t,
        fmt_servers(&plan.info_set),
        fmt_servers(&plan.retained_servers),
        plan.retained_servers.len(),
        fmt_rate(plan.rate)
    )
    .unwrap();

    let naive = naive_rate(&cfg.pattern, k);
    match naive {
        Some(r) => writeln!(
            text,
            "naive rate (t={}): {}",
            cfg.pattern.max_colluding_size(),
            fmt_rate(r)
        ),
        None => writeln!(text, "naive rate (t={}): none", cfg.pattern.max_colluding_size()),
    }
    .unwrap();

    let disconnected = cfg.pattern.is_disconnected().is_some();
    let mut partition = None;
    let mut striped = None;
    if disconnected {
        match partition_rate(&cfg.code, &cfg.pattern) {
            Ok((_, r)) => {
                writeln!(text, "partition rate: {}", fmt_rate(r)).unwrap();
                partition = Some(r);
            }
            Err(e) => writeln!(text, "partition rate: unavailable ({e})").unwrap(),
        }
        match build_striped_partition_scheme(&cfg.code, &cfg.pattern) {
            Ok(s) => {
                writeln!(text, "striped partition rate: {}", fmt_rate(s.rate())).unwrap();
                striped = Some(s.rate());
            }
            Err(e) => writeln!(text, "striped partition rate: unavailable ({e})").unwrap(),
        }
    }

    let report = Report {
        rate: plan.rate.into(),
        plan: json!({
            "information_set": RatePlanJson::from(&plan),
            "naive_rate": naive.map(RateJson::from),
            "disconnected": disconnected,
            "partition_rate": partition.map(RateJson::from),
            "striped_rate": striped.map(RateJson::from),
        }),
        privacy: None,
        transcript: None,
    };
    Ok(CommandOutput { text, report })
}

fn simulate_scheme(cfg: &ValidConfig, scheme: &RetrievalScheme, i: usize, seed: u64) -> Result<Transcript, CliError> {
    if i >= cfg.m {
        return Err(CliError::usage(format!("file index {i} out of range (m = {})", cfg.m)));
    }
    let system = build_system(cfg, scheme)?;
    Ok(run_retrieval(&system, scheme, i, seed)?)
}

/// Runs one retrieval and reports the transcript.
pub fn cmd_simulate(
    cfg: &ValidConfig,
    kind: SchemeKind,
    t: Option<usize>,
    file_index: usize,
    seed: u64,
) -> Result<CommandOutput, CliError> {
    let scheme = build_scheme(cfg, kind, t)?;
    let transcript = simulate_scheme(cfg, &scheme, file_index, seed)?;
    let text = format!(
        "{} scheme: {} rounds, {} responses, {} symbols decoded, rate {}; file {} reconstructed exactly\n",
        kind.name(),
        transcript.rounds.len(),
        transcript.downloads,
        transcript.decoded_symbols(),
        fmt_rate(scheme.rate()),
        file_index
    );
    Ok(CommandOutput {
        text,
        report: Report {
            rate: scheme.rate().into(),
            plan: serde_json::to_value(SchemeJson::from(&scheme)).expect("scheme serializes"),
            privacy: None,
            transcript: Some(TranscriptJson::from(&transcript)),
        },
    })
}

fn privacy_text(report: &PrivacyReport) -> String {
    let mut text = String::new();
    for s in &report.sets {
        let algebraic = if s.algebraic { "secure" } else { "LEAKS" };
        let oracle = crate::report::oracle_label(&s.oracle);
        writeln!(
            text,
            "  {:<16} algebraic={algebraic:<6} oracle={oracle} states={}",
            fmt_servers(&s.set),
            s.states
        )
        .unwrap();
    }
    text
}

/// Checks the scheme against the configured pattern. The returned flag is
/// the overall verdict.
pub fn cmd_verify(
    cfg: &ValidConfig,
    kind: SchemeKind,
    t: Option<usize>,
    cap: u128,
) -> Result<(CommandOutput, bool), CliError> {
    let scheme = build_scheme(cfg, kind, t)?;
    let report = verify_scheme(&scheme, &cfg.pattern, cfg.m, cap)?;
    let mut text = format!(
        "{} scheme (rate {}) vs pattern {}: {}\n",
        kind.name(),
        fmt_rate(scheme.rate()),
        fmt_pattern(&cfg.pattern),
        if report.overall { "private" } else { "NOT private" }
    );
    text.push_str(&privacy_text(&report));
    let overall = report.overall;
    Ok((
        CommandOutput {
            text,
            report: Report {
                rate: scheme.rate().into(),
                plan: serde_json::to_value(SchemeJson::from(&scheme)).expect("scheme serializes"),
                privacy: Some(PrivacyJson::new(&report, cfg.m, cap)),
                transcript: None,
            },
        },
        overall,
    ))
}

pub const DEMO_NAMES: [&str; 5] = ["two-server", "grs-5-2", "infoset-6-2", "partition-6-3", "stripe-9-3"];

#[derive(Debug, Clone)]
pub struct Demo {
    pub name: &'static str,
    pub description: &'static str,
    pub config: SystemConfig,
    pub kind: SchemeKind,
    pub t: Option<usize>,
    pub expected_rate: Rate,
    /// A pattern the scheme must fail against, 1-based.
    pub leaky_pattern: Option<Vec<Vec<usize>>>,
}

fn grs_config(p: u64, n: usize, k: usize, pattern: Vec<Vec<usize>>) -> SystemConfig {
    SystemConfig {
        p,
        n,
        k,
        stripes: None,
        code: CodeSpec::Grs {
            eval_points: None,
            multipliers: None,
        },
        m: 2,
        files: Some(FilesSpec::Seed(1)),
        pattern,
    }
}

pub fn demo(name: &str) -> Option<Demo> {
    let d = match name {
        "two-server" => Demo {
            name: "two-server",
            description: "replicated file on two servers, one receives d, the other d + e_i",
            config: SystemConfig {
                p: 5,
                n: 2,
                k: 1,
                stripes: None,
                code: CodeSpec::Repetition,
                m: 3,
                files: Some(FilesSpec::Seed(1)),
                pattern: vec![],
            },
            kind: SchemeKind::Tpir,
            t: Some(1),
            expected_rate: rate(1, 2),
            leaky_pattern: Some(vec![vec![1, 2]]),
        },
        "grs-5-2" => {
            let mut pattern: Vec<Vec<usize>> = (1..=5).flat_map(|a| (a + 1..=5).map(move |b| vec![a, b])).collect();
            pattern.push(vec![3, 4, 5]);
            Demo {
                name: "grs-5-2",
                description: "[5,2] storage code over F_5, pattern of all pairs plus {3,4,5}",
                config: SystemConfig {
                    code: CodeSpec::Generator {
                        rows: vec![vec![1, 0, 4, 3, 2], vec![0, 1, 2, 3, 4]],
                    },
                    ..grs_config(5, 5, 2, pattern)
                },
                kind: SchemeKind::InfoSet,
                t: None,
                expected_rate: rate(2, 5),
                leaky_pattern: Some(vec![vec![1, 2, 3]]),
            }
        }
        "infoset-6-2" => Demo {
            name: "infoset-6-2",
            description: "[6,2] GRS over F_7, pattern <{1,2},{3,4,5,6}>",
            config: grs_config(7, 6, 2, vec![vec![1, 2], vec![3, 4, 5, 6]]),
            kind: SchemeKind::InfoSet,
            t: None,
            expected_rate: rate(2, 5),
            leaky_pattern: None,
        },
        "partition-6-3" => Demo {
            name: "partition-6-3",
            description: "[6,3] GRS over F_7, parts {1,2,3} and {4,5,6}",
            config: grs_config(7, 6, 3, vec![vec![1, 2, 3], vec![4, 5, 6]]),
            kind: SchemeKind::Partition,
            t: None,
            expected_rate: rate(1, 2),
            leaky_pattern: Some(vec![vec![1, 2, 3], vec![3, 4], vec![4, 5, 6]]),
        },
        "stripe-9-3" => Demo {
            name: "stripe-9-3",
            description: "[9,3] GRS over F_11, parts {1,2,3}, {4,5,6}, {7,8,9}",
            config: grs_config(11, 9, 3, vec![vec![1, 2, 3], vec![4, 5, 6], vec![7, 8, 9]]),
            kind: SchemeKind::StripedPartition,
            t: None,
            expected_rate: rate(2, 3),
            leaky_pattern: Some(vec![vec![1, 2, 3, 4]]),
        },
        _ => return None,
    };
    Some(d)
}

pub const DEMO_SEEDS: u64 = 20;

/// Plans, simulates and verifies a built-in example. The returned flag is
/// true iff every check passed.
pub fn cmd_demo(name: &str, cap: u128) -> Result<(String, bool), CliError> {
    let d = demo(name).ok_or_else(|| {
        CliError::usage(format!(
            "unknown demo {name:?}; choose one of {}",
            DEMO_NAMES.join(", ")
        ))
    })?;
    let cfg = d.config.validate()?;
    let mut text = format!("demo {}: {}\n", d.name, d.description);
    let mut passed = true;
    let mut check = |text: &mut String, label: &str, ok: bool, detail: String| {
        writeln!(text, "  [{}] {label}: {detail}", if ok { "PASS" } else { "FAIL" }).unwrap();
        passed &= ok;
    };

    if d.kind == SchemeKind::InfoSet {
        let plan = plan_rate(&cfg.pattern, cfg.code.k())?;
        let naive = naive_rate(&cfg.pattern, cfg.code.k());
        check(
            &mut text,
            "plan",
            plan.rate == d.expected_rate,
            format!(
                "t={}, {} retained servers, rate {} (naive {})",
                plan.t,
                plan.retained_servers.len(),
                fmt_rate(plan.rate),
                naive.map_or("none".into(), fmt_rate)
            ),
        );
    }

    let scheme = build_scheme(&cfg, d.kind, d.t)?;
    check(
        &mut text,
        "rate",
        scheme.rate() == d.expected_rate,
        format!("{} (expected {})", fmt_rate(scheme.rate()), fmt_rate(d.expected_rate)),
    );

    let system = build_system(&cfg, &scheme)?;
    let mut runs = 0;
    let mut exact = true;
    for i in 0..cfg.m {
        for seed in 0..DEMO_SEEDS {
            match run_retrieval(&system, &scheme, i, seed) {
                Ok(t) => exact &= t.reconstructed == system.files()[i],
                Err(Error::ReconstructionMismatch { .. }) => exact = false,
                Err(e) => return Err(e.into()),
            }
            runs += 1;
        }
    }
    check(
        &mut text,
        "reconstruction",
        exact,
        format!(
            "{runs} retrievals, {} rounds and {} responses each",
            scheme.rounds().len(),
            scheme.downloads()
        ),
    );

    let report = verify_scheme(&scheme, &cfg.pattern, cfg.m, cap)?;
    let enumerated = report.sets.iter().all(|s| s.oracle == OracleVerdict::Equal);
    check(
        &mut text,
        "privacy",
        report.overall && enumerated,
        format!(
            "{} colluding sets, algebraic and enumerated distributions agree",
            report.sets.len()
        ),
    );

    if let Some(sets) = &d.leaky_pattern {
        let sets0: Vec<Vec<usize>> = sets.iter().map(|s| s.iter().map(|j| j - 1).collect()).collect();
        let leaky = CollusionPattern::from_maximal(cfg.code.len(), &sets0)?;
        let report = verify_scheme(&scheme, &leaky, cfg.m, cap)?;
        let failing: Vec<String> = report.failing_sets().into_iter().map(fmt_servers).collect();
        check(
            &mut text,
            "leak detected",
            !report.overall,
            format!(
                "pattern {} breaks privacy at {}",
                fmt_pattern(&leaky),
                failing.join(" ")
            ),
        );
    }

    writeln!(text, "demo {}: {}", d.name, if passed { "PASS" } else { "FAIL" }).unwrap();
    Ok((text, passed))
}
