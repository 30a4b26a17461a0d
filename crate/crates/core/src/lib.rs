//! Optimistic Lagrangian hedging for external and Φ-regret, with runtime
//! auditing of its potential and regret guarantees.

pub mod audit;
pub mod env;
pub mod error;
pub mod fixed_point;
pub mod harness;
pub mod hedger;
pub mod phi;
pub mod potential;
pub mod record;
pub mod schedule;
pub mod vector;

pub use audit::{AuditRecord, AuditSummary, Auditor, BoundContext, BoundKind};
pub use error::{Error, Result};
pub use fixed_point::{fixed_point, SquareMatrix};
pub use hedger::{optimistic_iterate, Fallback, Hedger};
pub use phi::{build_operator, phi_instant_regret, phi_measured_regret, PhiKind, PhiRegret, PhiSet};
pub use potential::{Potential, PotentialSpec, RegretTranslation};
pub use record::RoundRecord;
pub use schedule::{Predictor, StepsizeSchedule};
pub use vector::{instant_regret, Norm, NormPair, RealVec, Simplex};
