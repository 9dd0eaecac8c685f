//! Differentiable quality-diversity (DQD) optimization.
//!
//! The crate is organised bottom-up:
//!
//! * [`archive`]: the grid archive with the MAP-Elites insertion rule and QD metrics.
//! * [`domains`]: analytic benchmark domains (linear projection, planar arm) with exact gradients.
//! * [`cma_es`]: a rank-driven (μ/μ_w, λ)-CMA-ES.
//! * [`operators`]: variation operators, gradient normalization and gradient-ascent steps.
//! * [`ranking`]: CMA-ME's two-stage improvement ranking.
//! * [`schedulers`]: the algorithm loops (MAP-Elites, CMA-ME, OG-MAP-Elites, OMG-MEGA, CMA-MEGA).

pub mod archive;
pub mod cma_es;
pub mod domains;
pub mod error;
pub mod numeric;
pub mod operators;
pub mod ranking;
pub mod schedulers;

pub use archive::{AddResult, AddStatus, ArchiveConfig, ArchiveMetrics, Elite, GridArchive};
pub use cma_es::CmaEs;
pub use domains::{Domain, DomainSpec, Evaluation, Outcome};
pub use error::{QdError, Result};
pub use schedulers::{AlgorithmConfig, AlgorithmKind, Scheduler};
