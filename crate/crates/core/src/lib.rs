//! Islamic inheritance (faraid) reasoning toolkit: an exact solver, Arabic
//! MCQ parsing, passage retrieval, an LLM gateway and evaluation harness.

pub mod arabic;
pub mod eval;
pub mod forge;
pub mod fraction;
pub mod gateway;
pub mod heirs;
pub mod http;
pub mod label;
pub mod mcq;
pub mod retrieval;
pub mod rules;
pub mod solver;

pub use fraction::{Fraction, FractionError};
pub use heirs::{
    normalize_case, Blood, CaseError, CaseInput, ClassGroup, DistantKin, HeirClass, HeirParty, Sex,
};
pub use label::ShareLabel;
pub use rules::Rule;
pub use solver::{solve, verdict_for, Allocation, SolveError, SolveResult, Verdict, VerdictKind};
