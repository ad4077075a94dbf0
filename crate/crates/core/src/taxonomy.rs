//! isA knowledge source: concept/entity co-occurrence counts and the
//! probabilities derived from them.
//!
//! Only direct records are used. There is no transitive closure over the
//! concept hierarchy and no smoothing, so a missing pair has probability zero.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use crate::error::Result;
use crate::tsv;

/// The three probabilities of one (entity, concept) pair.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ConditionalProbabilities {
    /// `n(e,c) / Σ_e' n(e',c)`
    pub p_e_given_c: f64,
    /// `n(e,c) / Σ_c' n(e,c')`
    pub p_c_given_e: f64,
    /// `n(e,c) / Σ n`
    pub p_joint: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Taxonomy {
    // entity -> concept -> count
    by_entity: BTreeMap<String, BTreeMap<String, u64>>,
    concept_totals: BTreeMap<String, u64>,
    entity_totals: BTreeMap<String, u64>,
    total: u64,
}

impl Taxonomy {
    /// Builds a taxonomy from `(concept, entity, count)` records, summing duplicates.
    ///
    /// Records with a zero count are ignored.
    pub fn from_records<I, C, E>(records: I) -> Self
    where
        I: IntoIterator<Item = (C, E, u64)>,
        C: Into<String>,
        E: Into<String>,
    {
        let mut taxonomy = Taxonomy::default();
        for (concept, entity, count) in records {
            taxonomy.add(concept.into(), entity.into(), count);
        }
        taxonomy
    }

    /// Reads `concept<TAB>entity<TAB>count` lines. `#` lines and blank lines are skipped.
    pub fn from_reader<R: BufRead>(reader: R) -> Result<Self> {
        let mut taxonomy = Taxonomy::default();
        tsv::for_each_record(reader, |line, fields| {
            tsv::expect_columns(line, fields, 3)?;
            let count = tsv::parse_count(line, fields[2])?;
            taxonomy.add(fields[0].to_owned(), fields[1].to_owned(), count);
            Ok(())
        })?;
        Ok(taxonomy)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_reader(BufReader::new(File::open(path)?))
    }

    fn add(&mut self, concept: String, entity: String, count: u64) {
        if count == 0 {
            return;
        }
        *self.concept_totals.entry(concept.clone()).or_default() += count;
        *self.entity_totals.entry(entity.clone()).or_default() += count;
        *self
            .by_entity
            .entry(entity)
            .or_default()
            .entry(concept)
            .or_default() += count;
        self.total += count;
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    /// `n(e,c)`, zero for unknown pairs.
    pub fn count(&self, entity: &str, concept: &str) -> u64 {
        self.by_entity
            .get(entity)
            .and_then(|concepts| concepts.get(concept))
            .copied()
            .unwrap_or(0)
    }

    pub fn concept_total(&self, concept: &str) -> u64 {
        self.concept_totals.get(concept).copied().unwrap_or(0)
    }

    pub fn entity_total(&self, entity: &str) -> u64 {
        self.entity_totals.get(entity).copied().unwrap_or(0)
    }

    pub fn grand_total(&self) -> u64 {
        self.total
    }

    pub fn conditional_probabilities(
        &self,
        entity: &str,
        concept: &str,
    ) -> ConditionalProbabilities {
        let n = self.count(entity, concept);
        if n == 0 {
            return ConditionalProbabilities::default();
        }
        let n = n as f64;
        ConditionalProbabilities {
            p_e_given_c: n / self.concept_total(concept) as f64,
            p_c_given_e: n / self.entity_total(entity) as f64,
            p_joint: n / self.total as f64,
        }
    }

    /// `P_T(e|c)`
    pub fn p_entity_given_concept(&self, entity: &str, concept: &str) -> f64 {
        self.conditional_probabilities(entity, concept).p_e_given_c
    }

    /// `P_T(c|e)`
    pub fn p_concept_given_entity(&self, entity: &str, concept: &str) -> f64 {
        self.conditional_probabilities(entity, concept).p_c_given_e
    }

    /// Concepts with a direct record for `entity`, in lexicographic order.
    pub fn concepts_of(&self, entity: &str) -> BTreeSet<String> {
        self.concept_counts(entity)
            .map(|(c, _)| c.to_owned())
            .collect()
    }

    /// `(concept, n(entity, concept))` pairs in lexicographic concept order.
    pub fn concept_counts<'a>(&'a self, entity: &str) -> impl Iterator<Item = (&'a str, u64)> + 'a {
        self.by_entity
            .get(entity)
            .into_iter()
            .flat_map(|m| m.iter().map(|(c, n)| (c.as_str(), *n)))
    }

    pub fn concepts(&self) -> impl Iterator<Item = &str> {
        self.concept_totals.keys().map(String::as_str)
    }

    pub fn entities(&self) -> impl Iterator<Item = &str> {
        self.entity_totals.keys().map(String::as_str)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::fixtures;

    fn parse(text: &str) -> Result<Taxonomy> {
        Taxonomy::from_reader(text.as_bytes())
    }

    #[test]
    fn duplicate_rows_are_summed() {
        let t = parse("meal\tapple\t2\nmeal\tapple\t3\n").unwrap();
        assert_eq!(t.count("apple", "meal"), 5);
        assert_eq!(t.concept_counts("apple").count(), 1);
    }

    #[test]
    fn concept_sum() {
        let t = parse("food\tapple\t20\nfood\thot_dog\t10\n").unwrap();
        assert_eq!(t.concept_total("food"), 30);
    }

    #[test]
    fn negative_count_names_line() {
        let err = parse("# header\nfood\tbread\t3\nfood\tapple\t-1\n").unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn malformed_lines() {
        assert!(parse("food\tapple\n").is_err());
        assert!(parse("food\tapple\t3\textra\n").is_err());
        assert!(parse("food\tapple\tthree\n").is_err());
        assert!(parse("food\tapple\t0\n").is_err());
        assert!(parse("food\t\t3\n").is_err());
    }

    #[test]
    fn empty_taxonomy_is_legal() {
        let t = parse("").unwrap();
        assert!(t.is_empty());
        assert!(t.concepts_of("apple").is_empty());
        assert_eq!(
            t.conditional_probabilities("apple", "food"),
            ConditionalProbabilities::default()
        );
    }

    #[test]
    fn fixture_conditionals() {
        let t = fixtures::eat_taxonomy();
        let p = t.conditional_probabilities("breakfast", "meal");
        assert_eq!(p.p_e_given_c, 8.0 / 24.0);
        assert_eq!(p.p_c_given_e, 8.0 / 9.0);
        assert_eq!(p.p_joint, 8.0 / t.grand_total() as f64);

        assert_eq!(
            t.conditional_probabilities("apple", "meal"),
            ConditionalProbabilities::default()
        );
        assert_eq!(t.p_entity_given_concept("apple", "food"), 20.0 / 90.0);
    }

    #[test]
    fn fixture_concepts_of() {
        let t = fixtures::eat_taxonomy();
        let names = |e: &str| t.concepts_of(e).into_iter().collect::<Vec<_>>();
        assert_eq!(names("breakfast"), ["activity", "meal"]);
        assert!(names("humble_pie").is_empty());
        assert_eq!(names("apple"), ["food"]);
    }

    #[test]
    fn case_sensitive_terms() {
        let t = parse("Food\tApple\t1\n").unwrap();
        assert_eq!(t.count("apple", "food"), 0);
        assert_eq!(t.count("Apple", "Food"), 1);
    }
}
