//! Certificate and configuration types for engine runs.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coloring::{Color, ColoringError, ColoringFile};
use crate::oracle::{Decision, OracleError};
use crate::semigroup::{Elem, SemigroupError, SemigroupSpec};
use crate::structures::StructureError;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("oracle exhausted in round {round} at {label}; failing commitment has {size} elements")]
    Exhausted { round: usize, label: String, size: usize },
    #[error("no consistent division witness y in round {round}")]
    DivisionExhausted { round: usize },
    #[error("undefined sum in round {round}: bounded carrier overflow, rerun with a larger bound")]
    UndefinedSum { round: usize },
    #[error("state-space guard exceeded: estimated {estimate}, limit {limit}")]
    Guard { estimate: u64, limit: u64 },
    #[error("arity {0} not supported by the engine; colorings of arity 1 or 2 only")]
    ArityUnsupported(usize),
    #[error("input error: {0}")]
    Input(String),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Semigroup(#[from] SemigroupError),
    #[error(transparent)]
    Coloring(#[from] ColoringError),
    #[error(transparent)]
    Structure(#[from] StructureError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EngineMode {
    Fin,
    One,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StructureKind {
    PartiteSumgraph,
    MSumgraph,
    PartiteGraph,
    TildeSumgraph,
}

/// How the simulated Bob answers. The default grabs as many elements as
/// the cap allows, in ascending order, keeping the oracle consistent for
/// the remaining rounds; tests exercise the others.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum BobPolicy {
    /// Largest consistency-preserving reply within the cap.
    Adaptive { cap: usize },
    /// The cap smallest elements, consistency not consulted.
    Smallest { cap: usize },
    /// Explicit replies, one per round.
    Scripted { replies: Vec<Vec<Elem>> },
}

impl Default for BobPolicy {
    fn default() -> Self {
        BobPolicy::Adaptive { cap: 3 }
    }
}

/// The constraint hook: the next block must land inside the image of the
/// accumulated selection.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Constraint {
    /// `f(X) = {s : s > max X}`; forces strictly increasing blocks.
    Tail,
    /// Fixed image per round index (round n+1 must land in `sets[n]`).
    Sets { sets: Vec<Vec<Elem>> },
}

/// Per-round families of finite sets, either explicit or generated over
/// the carrier.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum FamilyGenerator {
    /// All singletons of the carrier, every round.
    Singletons,
    /// All arithmetic progressions of the given length, every round.
    Aps { len: usize },
    /// Explicit families, one per round.
    Explicit { rounds: Vec<Vec<Vec<Elem>>> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilySequence {
    pub generator: FamilyGenerator,
}

impl FamilySequence {
    pub fn singletons() -> Self {
        FamilySequence { generator: FamilyGenerator::Singletons }
    }

    pub fn explicit(rounds: Vec<Vec<Vec<Elem>>>) -> Self {
        FamilySequence { generator: FamilyGenerator::Explicit { rounds } }
    }

    /// The family for a 1-based round over the given carrier elements.
    pub fn family_for(&self, round: usize, carrier: &[Elem]) -> Result<Vec<Vec<Elem>>, EngineError> {
        match &self.generator {
            FamilyGenerator::Singletons => Ok(carrier.iter().map(|&e| vec![e]).collect()),
            FamilyGenerator::Aps { len } => {
                if *len == 0 {
                    return Err(EngineError::Input("ap length must be positive".into()));
                }
                let max = carrier.iter().copied().max().unwrap_or(0);
                let mut out = Vec::new();
                for &a in carrier {
                    for d in 1..=max {
                        let ap: Vec<Elem> =
                            (0..*len as Elem).map(|i| a + i * d).collect();
                        if ap.iter().all(|v| carrier.contains(v)) {
                            out.push(ap);
                        }
                    }
                }
                Ok(out)
            }
            FamilyGenerator::Explicit { rounds } => rounds
                .get(round - 1)
                .cloned()
                .ok_or_else(|| EngineError::Input(format!("no family for round {}", round))),
        }
    }
}

/// Which oracle realization an engine run uses.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum OracleSpec {
    Principal { e: Elem },
    Scripted { script: Vec<Decision> },
    Backtracking { seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EngineConfig {
    pub rounds: usize,
    pub mode: EngineMode,
    #[serde(default)]
    pub bob: BobPolicy,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constraint: Option<Constraint>,
    /// Restart budget for backtracking oracles.
    #[serde(default = "default_retry_budget")]
    pub retry_budget: u64,
    /// Bound on how many candidates Bob scans per round.
    #[serde(default = "default_scan_cap")]
    pub scan_cap: usize,
}

fn default_retry_budget() -> u64 {
    64
}

fn default_scan_cap() -> usize {
    128
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            rounds: 2,
            mode: EngineMode::Fin,
            bob: BobPolicy::default(),
            constraint: None,
            retry_budget: default_retry_budget(),
            scan_cap: default_scan_cap(),
        }
    }
}

/// A self-contained, offline-verifiable run witness. Everything the
/// verifier needs is embedded: carrier, coloring, claimed structure and
/// color, the blocks, and the full oracle decision log.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Certificate {
    pub version: u32,
    pub semigroup: SemigroupSpec,
    pub coloring: ColoringFile,
    pub kind: StructureKind,
    pub arity: usize,
    pub claimed_color: Color,
    pub mode: EngineMode,
    /// The blocks of the claimed structure: `V_n` in fin mode, the
    /// singletons `{a_n}` in one mode, `F_n` in the multiplicative engine.
    pub blocks: Vec<Vec<Elem>>,
    /// The chosen subfamilies, one per round.
    pub families: Vec<Vec<Vec<Elem>>>,
    /// Bob's replies `F_n`.
    pub bob_replies: Vec<Vec<Elem>>,
    /// In one mode, the family members the picks came from.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub member_sets: Option<Vec<Vec<Elem>>>,
    /// In the multiplicative engine, the chosen product elements `y_n`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub products: Option<Vec<Elem>>,
    /// The accumulated selection; its target membership is delegated to
    /// the games module and only recorded here.
    pub collected: Vec<Elem>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constraint: Option<Constraint>,
    pub oracle: OracleSpec,
    pub attempt: u64,
    pub decision_log: Vec<Decision>,
    /// Run manifest attached by the command-line layer.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub manifest: Option<serde_json::Value>,
}

pub const CERTIFICATE_VERSION: u32 = 1;
