//! Riemannian stochastic gradient descent on the sphere, Stiefel and
//! Grassmann manifolds, with learning-rate and batch-size schedules,
//! benchmark objectives and evaluable convergence bounds.

pub mod analysis;
pub mod data;
pub mod error;
pub mod manifold;
pub mod optimizer;
pub mod problems;
pub mod schedule;

pub use error::{Error, Result};
pub use manifold::{ManifoldDescriptor, ManifoldKind, ManifoldPoint, TangentVector};
pub use optimizer::{run, rsgd_step, sample_batch, Init, RsgdConfig, RunRecord, TelemetryRow};
pub use problems::{AnyProblem, LrmcProblem, PcaProblem, Problem, SqrtAbsSphereProblem};
pub use schedule::{BatchSchedule, Decay, LrSchedule};
