//! Two-part description length of a pattern assignment.
//!
//! Each phrase is encoded by naming its pattern (`l = -log2 P(f(p))`) and then
//! naming the phrase within the pattern (`r = 0` for idioms, otherwise
//! `-log2 P_T(o_p | c)`). The expected lengths under `P(p)` are `L_L` and
//! `L_R`, combined as `L = L_L + θ·L_R`.
//!
//! `L_L` is the entropy of the pattern distribution and `L_R` is a sum of
//! per-pattern cross entropies, so for `θ >= 1` no assignment beats the
//! all-idiom one.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::corpus::{PhraseDistribution, VerbPhrase};
use crate::error::{Error, Result};
use crate::patterns::{check_coverage, Assignment, PatternKind};
use crate::taxonomy::Taxonomy;

pub const DEFAULT_THETA: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DescriptionLength {
    /// Expected pattern code length `L_L`, in bits.
    pub l_patterns: f64,
    /// Expected phrase-given-pattern code length `L_R`, in bits.
    pub l_conditional: f64,
    pub theta: f64,
    pub total: f64,
}

impl DescriptionLength {
    pub fn new(l_patterns: f64, l_conditional: f64, theta: f64) -> Self {
        DescriptionLength {
            l_patterns,
            l_conditional,
            theta,
            total: l_patterns + theta * l_conditional,
        }
    }
}

/// Shannon entropy in bits. Zero entries contribute nothing.
pub fn entropy<I: IntoIterator<Item = f64>>(probs: I) -> f64 {
    probs
        .into_iter()
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.log2())
        .sum()
}

/// `-log2 P_T(o | c)` for a conceptualized target, zero for an idiom.
pub(crate) fn conditional_bits(
    object: &str,
    kind: &PatternKind,
    taxonomy: &Taxonomy,
) -> Result<f64> {
    match kind {
        PatternKind::Idiom(label) if label == object => Ok(0.0),
        PatternKind::Idiom(label) => Err(Error::InvalidAssignment(format!(
            "`{object}` assigned to the idiom pattern of `{label}`"
        ))),
        PatternKind::Concept(concept) => {
            let p = taxonomy.p_entity_given_concept(object, concept);
            if p > 0.0 {
                Ok(-p.log2())
            } else {
                Err(Error::InvalidAssignment(format!(
                    "`{object}` is not an instance of `{concept}`"
                )))
            }
        }
    }
}

fn pattern_masses<'a>(
    assignment: &'a Assignment,
    dist: &PhraseDistribution,
) -> BTreeMap<&'a PatternKind, f64> {
    let mut mass: BTreeMap<&PatternKind, f64> = BTreeMap::new();
    for (object, kind) in assignment.iter() {
        *mass.entry(kind).or_default() += dist.probability(object).unwrap_or(0.0);
    }
    mass
}

/// Per-phrase code lengths `(l, r)` in bits.
pub fn code_lengths_for_phrase(
    phrase: &VerbPhrase,
    assignment: &Assignment,
    dist: &PhraseDistribution,
    taxonomy: &Taxonomy,
) -> Result<(f64, f64)> {
    check_coverage(assignment, dist)?;
    let kind = assignment
        .get(&phrase.object)
        .ok_or_else(|| Error::Inconsistent(format!("phrase `{phrase}` has no pattern")))?;
    let mass = pattern_masses(assignment, dist)[kind];
    let r = conditional_bits(&phrase.object, kind, taxonomy)?;
    Ok((-mass.log2(), r))
}

/// `L_L = -Σ P(p) log2 P(f(p))`, `L_R = -Σ P(p) log2 P_T(p | f(p))`.
pub fn description_length(
    assignment: &Assignment,
    dist: &PhraseDistribution,
    taxonomy: &Taxonomy,
    theta: f64,
) -> Result<DescriptionLength> {
    if !(theta >= 0.0 && theta.is_finite()) {
        return Err(Error::Config(format!(
            "theta must be a finite non-negative number, got {theta}"
        )));
    }
    check_coverage(assignment, dist)?;
    let mass = pattern_masses(assignment, dist);
    let mut l_patterns = 0.0;
    let mut l_conditional = 0.0;
    for (object, _, p) in dist.iter() {
        let kind = assignment.get(object).expect("coverage checked");
        l_patterns -= p * mass[kind].log2();
        l_conditional += p * conditional_bits(object, kind, taxonomy)?;
    }
    Ok(DescriptionLength::new(l_patterns, l_conditional, theta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use approx::assert_abs_diff_eq;

    fn table_one() -> Assignment {
        Assignment::new("eat")
            .with("apple", PatternKind::Concept("food".into()))
            .with("hot_dog", PatternKind::Concept("food".into()))
            .with("breakfast", PatternKind::Concept("meal".into()))
            .with("lunch", PatternKind::Concept("meal".into()))
            .with("dinner", PatternKind::Concept("meal".into()))
            .with("humble_pie", PatternKind::Idiom("humble_pie".into()))
    }

    #[test]
    fn phrase_code_lengths() {
        let t = fixtures::eat_taxonomy();
        let d = fixtures::eat_corpus().phrase_distribution("eat").unwrap();
        let f = table_one();

        let (l, r) =
            code_lengths_for_phrase(&VerbPhrase::new("eat", "dinner"), &f, &d, &t).unwrap();
        assert_abs_diff_eq!(l, 0.584962500721156, epsilon = 1e-12);
        assert_abs_diff_eq!(r, 1.584962500721156, epsilon = 1e-12);

        let (_, r) =
            code_lengths_for_phrase(&VerbPhrase::new("eat", "humble_pie"), &f, &d, &t).unwrap();
        assert_eq!(r, 0.0);

        let (_, r) = code_lengths_for_phrase(&VerbPhrase::new("eat", "apple"), &f, &d, &t).unwrap();
        assert_abs_diff_eq!(r, 2.169925001442312, epsilon = 1e-12);
    }

    #[test]
    fn invalid_target_is_an_error() {
        let t = fixtures::eat_taxonomy();
        let d = fixtures::eat_corpus().phrase_distribution("eat").unwrap();
        let f = table_one().with("breakfast", PatternKind::Concept("food".into()));
        assert!(matches!(
            description_length(&f, &d, &t, 0.25),
            Err(Error::InvalidAssignment(_))
        ));
        assert!(description_length(&table_one(), &d, &t, -1.0).is_err());
    }

    #[test]
    fn fixture_lengths() {
        let t = fixtures::eat_taxonomy();
        let d = fixtures::eat_corpus().phrase_distribution("eat").unwrap();

        let idiom = description_length(&Assignment::all_idiom(&d), &d, &t, 0.25).unwrap();
        assert_eq!(idiom.l_conditional, 0.0);
        assert_abs_diff_eq!(idiom.l_patterns, 2.4903474878666096, epsilon = 1e-9);

        let best = description_length(&table_one(), &d, &t, 0.25).unwrap();
        assert_abs_diff_eq!(best.l_patterns, 1.2243944454059859, epsilon = 1e-9);
        assert_abs_diff_eq!(best.l_conditional, 1.649958334134618, epsilon = 1e-9);
        assert_abs_diff_eq!(best.total, 1.6368840289396402, epsilon = 1e-9);

        let zero = description_length(&table_one(), &d, &t, 0.0).unwrap();
        assert_eq!(zero.total, zero.l_patterns);
    }

    #[test]
    fn entropy_basics() {
        assert_eq!(entropy([1.0]), 0.0);
        assert_eq!(entropy([0.5, 0.5]), 1.0);
        assert_eq!(entropy([0.25; 4]), 2.0);
        assert_eq!(entropy([0.0, 1.0]), 0.0);
    }
}
