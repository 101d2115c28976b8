//! Private information retrieval over coded distributed storage with
//! arbitrary server collusion patterns.
//!
//! The crate is organized bottom-up:
//!
//! * [`field`] and [`matrix`]: exact arithmetic and linear algebra over `F_p`.
//! * [`codes`]: linear codes (GRS, repetition, duals, star products).
//! * [`collusion`]: collusion patterns and information-set rate planning.
//! * [`schemes`]: executable retrieval schemes for t-collusion, arbitrary
//!   patterns, and partitioned (optionally striped) server groups.
//! * [`simulator`]: encodes files, plays queries and responses, reconstructs.
//! * [`verifier`]: privacy checks, algebraic and by exact enumeration.

pub mod codes;
pub mod collusion;
pub mod error;
pub mod field;
pub mod matrix;
pub mod rate;
pub mod schemes;
pub mod simulator;
pub mod verifier;

pub use codes::{GrsSpec, LinearCode};
pub use collusion::{CollusionPattern, RatePlan};
pub use error::{Error, Result};
pub use field::{FieldElement, PrimeField};
pub use matrix::Matrix;
pub use rate::Rate;
pub use schemes::{RetrievalScheme, RoundPlan, SchemeKind};
pub use simulator::{StorageSystem, Transcript};
pub use verifier::PrivacyReport;
