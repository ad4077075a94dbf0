//! Baseline assignments and the coverage / precision harness.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;
use std::str::FromStr;

use crate::corpus::{PhraseCorpus, VerbPhrase};
use crate::error::{Error, Result};
use crate::patterns::{Assignment, AssignmentStore, PatternKind};
use crate::taxonomy::Taxonomy;
use crate::tsv;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Baseline {
    /// Every phrase is its own idiom.
    Idiom,
    /// Every phrase goes to the concept maximizing `P_T(c|o)`.
    Concept,
}

impl FromStr for Baseline {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ib" => Ok(Baseline::Idiom),
            "cb" => Ok(Baseline::Concept),
            other => Err(Error::InvalidArgument(format!(
                "unknown baseline `{other}`, expected `ib` or `cb`"
            ))),
        }
    }
}

/// Objects without any concept fall back to their idiom under [`Baseline::Concept`].
/// Ties between concepts go to the lexicographically smallest.
pub fn assign_baseline(
    verb: &str,
    corpus: &PhraseCorpus,
    taxonomy: &Taxonomy,
    mode: Baseline,
) -> Result<Assignment> {
    let dist = corpus.phrase_distribution(verb)?;
    let mut out = Assignment::all_idiom(&dist);
    if mode == Baseline::Concept {
        for object in dist.objects() {
            let mut best: Option<(&str, u64)> = None;
            // P_T(c|o) shares the denominator n(o), so comparing counts suffices
            for (concept, n) in taxonomy.concept_counts(object) {
                if best.is_none_or(|(_, m)| n > m) {
                    best = Some((concept, n));
                }
            }
            if let Some((concept, _)) = best {
                out.set(object.clone(), PatternKind::Concept(concept.to_owned()));
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GoldLabel {
    Judged(PatternKind),
    Unjudged,
}

/// Gold judgments keyed by phrase.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GoldLabels {
    labels: BTreeMap<VerbPhrase, GoldLabel>,
}

impl GoldLabels {
    /// Reads `verb<TAB>object<TAB>kind<TAB>label` lines, where `kind` is
    /// `idiom`, `concept` or `unjudged` (the label is then ignored and may be `-`).
    pub fn from_reader<R: BufRead>(reader: R) -> Result<Self> {
        let mut labels = BTreeMap::new();
        tsv::for_each_record(reader, |line, fields| {
            if fields.len() == 3 && fields[2] == "unjudged" {
                labels.insert(VerbPhrase::new(fields[0], fields[1]), GoldLabel::Unjudged);
                return Ok(());
            }
            tsv::expect_columns(line, fields, 4)?;
            let label = if fields[2] == "unjudged" {
                GoldLabel::Unjudged
            } else {
                GoldLabel::Judged(PatternKind::from_parts(fields[2], fields[3]).ok_or_else(
                    || Error::Parse {
                        line,
                        message: format!("unknown pattern kind `{}`", fields[2]),
                    },
                )?)
            };
            labels.insert(VerbPhrase::new(fields[0], fields[1]), label);
            Ok(())
        })?;
        Ok(GoldLabels { labels })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_reader(BufReader::new(File::open(path)?))
    }

    pub fn insert(&mut self, phrase: VerbPhrase, label: GoldLabel) {
        self.labels.insert(phrase, label);
    }

    pub fn get(&self, phrase: &VerbPhrase) -> Option<&GoldLabel> {
        self.labels.get(phrase)
    }
}

/// Reads `verb<TAB>object` test phrases. Extra columns are ignored.
pub fn read_test_phrases<R: BufRead>(reader: R) -> Result<Vec<VerbPhrase>> {
    let mut out = Vec::new();
    tsv::for_each_record(reader, |line, fields| {
        if fields.len() < 2 || fields[0].is_empty() || fields[1].is_empty() {
            return Err(Error::Parse {
                line,
                message: "expected at least `verb<TAB>object`".into(),
            });
        }
        out.push(VerbPhrase::new(fields[0], fields[1]));
        Ok(())
    })?;
    Ok(out)
}

pub fn load_test_phrases(path: impl AsRef<Path>) -> Result<Vec<VerbPhrase>> {
    read_test_phrases(BufReader::new(File::open(path)?))
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub n_all: usize,
    pub n_cover: usize,
    pub n_judged: usize,
    pub n_correct: usize,
    pub coverage: f64,
    /// `None` when no covered phrase carries a judgment.
    pub precision: Option<f64>,
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "n_all\t{}", self.n_all)?;
        writeln!(f, "n_cover\t{}", self.n_cover)?;
        writeln!(f, "n_judged\t{}", self.n_judged)?;
        writeln!(f, "n_correct\t{}", self.n_correct)?;
        writeln!(f, "coverage\t{:.6}", self.coverage)?;
        match self.precision {
            Some(p) => writeln!(f, "precision\t{p:.6}"),
            None => writeln!(f, "precision\tn/a"),
        }
    }
}

/// Coverage is the share of test phrases with a learned pattern; precision is
/// the share of covered, judged phrases whose pattern equals the gold one.
pub fn coverage_precision(
    test: &[VerbPhrase],
    patterns: &AssignmentStore,
    gold: &GoldLabels,
) -> Result<EvalReport> {
    let in_test: BTreeSet<&VerbPhrase> = test.iter().collect();
    if let Some(stray) = gold.labels.keys().find(|p| !in_test.contains(p)) {
        return Err(Error::Inconsistent(format!(
            "gold label for `{stray}` is not in the test set"
        )));
    }

    let mut report = EvalReport {
        n_all: test.len(),
        n_cover: 0,
        n_judged: 0,
        n_correct: 0,
        coverage: 0.0,
        precision: None,
    };
    for phrase in test {
        let Some(learned) = patterns.lookup(&phrase.verb, &phrase.object) else {
            continue;
        };
        report.n_cover += 1;
        if let Some(GoldLabel::Judged(expected)) = gold.get(phrase) {
            report.n_judged += 1;
            if learned == expected {
                report.n_correct += 1;
            }
        }
    }
    if report.n_all > 0 {
        report.coverage = report.n_cover as f64 / report.n_all as f64;
    }
    if report.n_judged > 0 {
        report.precision = Some(report.n_correct as f64 / report.n_judged as f64);
    }
    Ok(report)
}
