//! The round-based strategy construction, its multiplicative variant,
//! exhaustive witness searchers and the independent certificate verifier.

mod certificate;
mod multiplicative;
mod run;
mod search;
mod verify;

pub use certificate::{
    BobPolicy, Certificate, Constraint, EngineConfig, EngineError, EngineMode, FamilyGenerator,
    FamilySequence, OracleSpec, StructureKind,
};
pub use multiplicative::run_multiplicative_engine;
pub use run::{g_of, induce_colorings, induced_color, run_engine};
pub use search::{search_witness, SearchKind, SearchOutcome, SearchRequest};
pub use verify::{verify_certificate, VerifyReport};
