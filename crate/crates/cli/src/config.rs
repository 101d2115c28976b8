//! JSON system configuration. Server indices are 1-based in the file and
//! 0-based everywhere else.

use std::fmt;
use std::path::Path;

use pirlab_core::codes::{grs_code, repetition, GrsSpec, LinearCode};
use pirlab_core::collusion::CollusionPattern;
use pirlab_core::field::PrimeField;
use pirlab_core::matrix::Matrix;
use pirlab_core::simulator::random_files;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    /// Field modulus.
    pub p: u64,
    pub n: usize,
    pub k: usize,
    /// Stripes per file; defaults to the number of blocks the chosen scheme retrieves.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stripes: Option<usize>,
    pub code: CodeSpec,
    /// Number of files.
    pub m: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub files: Option<FilesSpec>,
    /// Maximal colluding sets, 1-based.
    #[serde(default)]
    pub pattern: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum CodeSpec {
    Grs {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        eval_points: Option<Vec<u64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        multipliers: Option<Vec<u64>>,
    },
    Repetition,
    /// An explicit `k x n` generator matrix.
    Generator {
        rows: Vec<Vec<u64>>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum FilesSpec {
    /// One symbol array per file, `k * stripes` symbols, stripe-major.
    Explicit(Vec<Vec<u64>>),
    /// Uniform random files from this seed.
    Seed(u64),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl ConfigError {
    fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            path: path.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() {
            write!(f, "{}", self.message)
        } else {
            write!(f, "{}: {}", self.path, self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

/// A configuration that passed validation, in 0-based internal form.
#[derive(Debug, Clone)]
pub struct ValidConfig {
    pub field: PrimeField,
    pub code: LinearCode,
    pub pattern: CollusionPattern,
    pub m: usize,
    pub stripes: Option<usize>,
    files: FilesSpec,
}

impl ValidConfig {
    /// The stored files for a system with `stripes` stripes per file.
    pub fn files(&self, stripes: usize) -> Result<Vec<Vec<u32>>, ConfigError> {
        if let Some(s) = self.stripes {
            if s != stripes {
                return Err(ConfigError::new(
                    "stripes",
                    format!("the scheme retrieves {stripes} blocks per file, config sets {s}"),
                ));
            }
        }
        let len = self.code.k() * stripes;
        match &self.files {
            FilesSpec::Seed(seed) => Ok(random_files(self.field, self.m, len, *seed)),
            FilesSpec::Explicit(files) => {
                if let Some(f) = files.iter().position(|f| f.len() != len) {
                    return Err(ConfigError::new(
                        format!("files.explicit[{f}]"),
                        format!("expected k * stripes = {len} symbols, found {}", files[f].len()),
                    ));
                }
                Ok(files.iter().map(|f| f.iter().map(|&v| v as u32).collect()).collect())
            }
        }
    }
}

pub fn parse(text: &str) -> Result<SystemConfig, ConfigError> {
    serde_json::from_str(text).map_err(|e| ConfigError::new("", format!("invalid config JSON: {e}")))
}

pub fn load(path: &Path) -> Result<SystemConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::new("", format!("cannot read {}: {e}", path.display())))?;
    parse(&text)
}

pub fn to_json(config: &SystemConfig) -> String {
    serde_json::to_string_pretty(config).expect("config serializes")
}

fn check_residues(path: &str, values: &[u64], p: u64) -> Result<(), ConfigError> {
    match values.iter().position(|&v| v >= p) {
        Some(i) => Err(ConfigError::new(
            format!("{path}[{i}]"),
            format!("{} is not a residue mod {p}", values[i]),
        )),
        None => Ok(()),
    }
}

impl SystemConfig {
    pub fn validate(&self) -> Result<ValidConfig, ConfigError> {
        let field = PrimeField::new(self.p).map_err(|e| ConfigError::new("p", e.to_string()))?;
        let (n, k, p) = (self.n, self.k, self.p);
        if n == 0 {
            return Err(ConfigError::new("n", "must be at least 1"));
        }
        if k == 0 || k > n {
            return Err(ConfigError::new("k", format!("must satisfy 1 <= k <= n = {n}")));
        }
        if self.m == 0 {
            return Err(ConfigError::new("m", "at least one file is required"));
        }
        if self.stripes == Some(0) {
            return Err(ConfigError::new("stripes", "must be at least 1"));
        }

        let code = match &self.code {
            CodeSpec::Grs {
                eval_points,
                multipliers,
            } => {
                let mut spec = GrsSpec::new(field, n, k);
                match eval_points {
                    Some(points) => {
                        if points.len() != n {
                            return Err(ConfigError::new(
                                "code.eval_points",
                                format!("expected {n} points, found {}", points.len()),
                            ));
                        }
                        check_residues("code.eval_points", points, p)?;
                        for (i, a) in points.iter().enumerate() {
                            if points[..i].contains(a) {
                                return Err(ConfigError::new(
                                    format!("code.eval_points[{i}]"),
                                    format!("duplicate point {a}"),
                                ));
                            }
                        }
                        spec = spec.with_eval_points(points.iter().map(|&a| a as u32).collect());
                    }
                    None if n as u64 > p => {
                        return Err(ConfigError::new(
                            "n",
                            format!("default evaluation points 0..n-1 need n <= p = {p}"),
                        ));
                    }
                    None => {}
                }
                if let Some(mults) = multipliers {
                    if mults.len() != n {
                        return Err(ConfigError::new(
                            "code.multipliers",
                            format!("expected {n} multipliers, found {}", mults.len()),
                        ));
                    }
                    check_residues("code.multipliers", mults, p)?;
                    if let Some(i) = mults.iter().position(|&v| v == 0) {
                        return Err(ConfigError::new(format!("code.multipliers[{i}]"), "must be nonzero"));
                    }
                    spec = spec.with_multipliers(mults.iter().map(|&v| v as u32).collect());
                }
                grs_code(&spec).map_err(|e| ConfigError::new("code", e.to_string()))?
            }
            CodeSpec::Repetition => {
                if k != 1 {
                    return Err(ConfigError::new("k", "a repetition code has k = 1"));
                }
                repetition(field, n).map_err(|e| ConfigError::new("code", e.to_string()))?
            }
            CodeSpec::Generator { rows } => {
                if rows.len() != k {
                    return Err(ConfigError::new(
                        "code.rows",
                        format!("expected k = {k} rows, found {}", rows.len()),
                    ));
                }
                for (i, row) in rows.iter().enumerate() {
                    if row.len() != n {
                        return Err(ConfigError::new(
                            format!("code.rows[{i}]"),
                            format!("expected n = {n} entries, found {}", row.len()),
                        ));
                    }
                    check_residues(&format!("code.rows[{i}]"), row, p)?;
                }
                let g = Matrix::from_rows(field, rows).map_err(|e| ConfigError::new("code.rows", e.to_string()))?;
                LinearCode::from_generator(g).map_err(|e| ConfigError::new("code.rows", e.to_string()))?
            }
        };

        let mut sets = Vec::with_capacity(self.pattern.len());
        for (i, set) in self.pattern.iter().enumerate() {
            if set.is_empty() {
                return Err(ConfigError::new(
                    format!("pattern[{i}]"),
                    "colluding sets must be non-empty",
                ));
            }
            if let Some(j) = set.iter().position(|&s| s == 0 || s > n) {
                return Err(ConfigError::new(
                    format!("pattern[{i}][{j}]"),
                    format!("server {} is outside 1..={n}", set[j]),
                ));
            }
            sets.push(set.iter().map(|&s| s - 1).collect::<Vec<_>>());
        }
        let pattern =
            CollusionPattern::from_maximal(n, &sets).map_err(|e| ConfigError::new("pattern", e.to_string()))?;

        let files = self.files.clone().unwrap_or(FilesSpec::Seed(0));
        if let FilesSpec::Explicit(files) = &files {
            if files.len() != self.m {
                return Err(ConfigError::new(
                    "files.explicit",
                    format!("expected m = {} files, found {}", self.m, files.len()),
                ));
            }
            for (i, f) in files.iter().enumerate() {
                let path = format!("files.explicit[{i}]");
                if f.is_empty() || f.len() % k != 0 {
                    return Err(ConfigError::new(
                        path,
                        format!("length {} is not a positive multiple of k = {k}", f.len()),
                    ));
                }
                if let Some(s) = self.stripes {
                    if f.len() != k * s {
                        return Err(ConfigError::new(
                            path,
                            format!("expected k * stripes = {} symbols, found {}", k * s, f.len()),
                        ));
                    }
                }
                check_residues(&path, f, p)?;
            }
        }

        Ok(ValidConfig {
            field,
            code,
            pattern,
            m: self.m,
            stripes: self.stripes,
            files,
        })
    }
}
