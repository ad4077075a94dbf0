//! Context-aware conceptualization of an entity.
//!
//! Without a verb, concept `c` of entity `e` with context entities `E` scores
//! `P(e,c) · Π P_T(e_i|c)`. When `e` is the object of a verb `v` with learned
//! patterns, the score becomes `P_T(e|c) · P(c|v) · Π P_T(e_i|c)`, where
//! `P(c|v)` is the probability mass of the verb's conceptualized patterns with
//! concept `c`. Scores are renormalized to sum to one.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::corpus::PhraseDistribution;
use crate::error::{Error, Result};
use crate::patterns::{
    pattern_distribution, Assignment, AssignmentStore, PatternKind, PatternRecord,
};
use crate::taxonomy::Taxonomy;

/// `P(c|v)` for one verb, plus the mass of its idiom patterns.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct VerbConceptPrior {
    pub verb: String,
    pub concepts: BTreeMap<String, f64>,
    pub idiom_mass: f64,
}

impl VerbConceptPrior {
    pub fn probability(&self, concept: &str) -> f64 {
        self.concepts.get(concept).copied().unwrap_or(0.0)
    }
}

pub fn verb_concept_prior(
    assignment: &Assignment,
    dist: &PhraseDistribution,
) -> Result<VerbConceptPrior> {
    let mut prior = VerbConceptPrior {
        verb: assignment.verb().to_owned(),
        ..Default::default()
    };
    for (pattern, p) in pattern_distribution(assignment, dist)? {
        match pattern.kind {
            PatternKind::Concept(c) => *prior.concepts.entry(c).or_default() += p,
            PatternKind::Idiom(_) => prior.idiom_mass += p,
        }
    }
    Ok(prior)
}

/// Verb priors keyed by verb.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PriorStore {
    priors: BTreeMap<String, VerbConceptPrior>,
}

impl PriorStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, prior: VerbConceptPrior) {
        self.priors.insert(prior.verb.clone(), prior);
    }

    pub fn get(&self, verb: &str) -> Option<&VerbConceptPrior> {
        self.priors.get(verb)
    }

    /// Sums the recorded pattern probabilities of each verb.
    pub fn from_records(records: &[PatternRecord]) -> Result<Self> {
        let mut priors: BTreeMap<String, VerbConceptPrior> = BTreeMap::new();
        for record in records {
            let prior = priors
                .entry(record.verb.clone())
                .or_insert_with(|| VerbConceptPrior {
                    verb: record.verb.clone(),
                    ..Default::default()
                });
            match record.pattern_kind()? {
                PatternKind::Concept(c) => {
                    *prior.concepts.entry(c).or_default() += record.probability
                }
                PatternKind::Idiom(_) => prior.idiom_mass += record.probability,
            }
        }
        Ok(PriorStore { priors })
    }
}

/// Ranks concepts for `entity`; see [`Conceptualizer`] for the smoothed variant.
pub fn rank_concepts(
    entity: &str,
    context: &[String],
    verb: Option<&str>,
    taxonomy: &Taxonomy,
    priors: &PriorStore,
) -> Result<Vec<(String, f64)>> {
    Conceptualizer::new(taxonomy, priors).rank(entity, context, verb)
}

#[derive(Debug, Clone, Copy)]
pub struct Conceptualizer<'a> {
    taxonomy: &'a Taxonomy,
    priors: &'a PriorStore,
    smoothing: f64,
}

impl<'a> Conceptualizer<'a> {
    pub fn new(taxonomy: &'a Taxonomy, priors: &'a PriorStore) -> Self {
        Conceptualizer {
            taxonomy,
            priors,
            smoothing: 0.0,
        }
    }

    /// Adds `epsilon` to every context likelihood `P_T(e_i|c)` and to `P(c|v)`.
    /// Candidate concepts are still only the entity's own concepts.
    pub fn with_smoothing(mut self, epsilon: f64) -> Result<Self> {
        if !(epsilon >= 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "smoothing must be a finite non-negative number, got {epsilon}"
            )));
        }
        self.smoothing = epsilon;
        Ok(self)
    }

    pub fn smoothing(&self) -> f64 {
        self.smoothing
    }

    /// Concepts with positive score, best first (ties by name), scores summing to one.
    pub fn rank(
        &self,
        entity: &str,
        context: &[String],
        verb: Option<&str>,
    ) -> Result<Vec<(String, f64)>> {
        if entity.is_empty() {
            return Err(Error::InvalidArgument("entity must be non-empty".into()));
        }
        let eps = self.smoothing;
        let prior = verb.map(|v| self.priors.get(v));
        let mut scored: Vec<(String, f64)> = self
            .taxonomy
            .concept_counts(entity)
            .filter_map(|(concept, _)| {
                let p = self.taxonomy.conditional_probabilities(entity, concept);
                let mut score = match prior {
                    None => p.p_joint,
                    Some(prior) => {
                        let p_cv = prior.map_or(0.0, |pr| pr.probability(concept));
                        p.p_e_given_c * (p_cv + eps)
                    }
                };
                for other in context {
                    score *= self.taxonomy.p_entity_given_concept(other, concept) + eps;
                }
                (score > 0.0).then(|| (concept.to_owned(), score))
            })
            .collect();
        let total: f64 = scored.iter().map(|(_, s)| s).sum();
        if total > 0.0 {
            for (_, s) in &mut scored {
                *s /= total;
            }
        }
        scored.sort_by(|(ca, a), (cb, b)| b.total_cmp(a).then_with(|| ca.cmp(cb)));
        Ok(scored)
    }
}

/// Result of looking a phrase up among learned patterns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum KnownPhrase {
    Concept(String),
    /// The phrase is idiomatic; conceptualizing its object would be wrong.
    IdiomStop,
    Unknown,
}

pub fn conceptualize_known_phrase(
    verb: &str,
    object: &str,
    store: &AssignmentStore,
) -> KnownPhrase {
    match store.lookup(verb, object) {
        Some(PatternKind::Concept(c)) => KnownPhrase::Concept(c.clone()),
        Some(PatternKind::Idiom(_)) => KnownPhrase::IdiomStop,
        None => KnownPhrase::Unknown,
    }
}
