//! Rigidity classification for Pham-Brieskorn rings `B_S`, `S = (a_1,...,a_n)`.
//!
//! Everything here is integer arithmetic on exponent tuples: invariants,
//! a prioritized rule engine producing replayable certificates, Proj
//! isomorphism classes and an exhaustive census.

pub mod arith;
pub mod census;
pub mod certificate;
pub mod engine;
pub mod error;
pub mod proj;
pub mod rules;
pub mod tuple;

pub use arith::{Natural, Rational};
pub use census::{run_census, CensusReport, CensusRow, CensusSpec, CensusSummary};
pub use certificate::{check, replay, Certificate, ReplayError, Witness};
pub use engine::{Budget, Classification, KernelBound, KnowledgeBase};
pub use error::{Error, Result};
pub use proj::{proj_classes, proj_edges, ProjClass, ProjEdge, ProjReport};
pub use rules::{RuleId, Status};
pub use tuple::{ExponentTuple, IndexSet, InvariantReport};
