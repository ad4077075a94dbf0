//! Verb pattern extraction.
//!
//! Every `verb object` phrase is assigned either to an idiom pattern of its
//! own or to a conceptualized pattern `verb $_C concept` drawn from an isA
//! taxonomy. Assignments are scored by a two-part description length and
//! searched with typicality-guided simulated annealing. Learned patterns then
//! act as a verb-specific prior when conceptualizing entities in context.

pub mod conceptualize;
pub mod corpus;
pub mod error;
pub mod evaluate;
pub mod fixtures;
pub mod mdl;
pub mod patterns;
pub mod solver;
pub mod synthetic;
pub mod taxonomy;
mod tsv;

pub use conceptualize::{
    conceptualize_known_phrase, rank_concepts, verb_concept_prior, Conceptualizer, KnownPhrase,
    PriorStore, VerbConceptPrior,
};
pub use corpus::{IdiomDictionary, PhraseCorpus, PhraseDistribution, VerbPhrase};
pub use error::{Error, Result};
pub use evaluate::{
    assign_baseline, coverage_precision, Baseline, EvalReport, GoldLabel, GoldLabels,
};
pub use mdl::{description_length, DescriptionLength};
pub use patterns::{
    candidate_patterns, pattern_distribution, validate_assignment, Assignment, AssignmentStore,
    PatternKind, PatternRecord, VerbPattern, Violation,
};
pub use solver::{
    brute_force_optimum, solve, typicality, CoolingSchedule, SolveResult, SolverConfig,
};
pub use taxonomy::Taxonomy;
