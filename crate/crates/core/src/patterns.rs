//! Verb patterns, pattern assignments, and the pattern distribution they induce.
//!
//! A phrase `verb object` may be assigned either to its own idiom pattern
//! (`verb $_I object`) or to a conceptualized pattern `verb $_C concept` for
//! any concept the taxonomy lists for `object`.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::corpus::{PhraseDistribution, VerbPhrase};
use crate::error::{Error, Result};
use crate::taxonomy::Taxonomy;

/// Pattern payload without the verb. Idioms order before concepts.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PatternKind {
    Idiom(String),
    Concept(String),
}

impl PatternKind {
    pub fn label(&self) -> &str {
        match self {
            PatternKind::Idiom(label) | PatternKind::Concept(label) => label,
        }
    }

    pub fn is_idiom(&self) -> bool {
        matches!(self, PatternKind::Idiom(_))
    }

    pub fn concept(&self) -> Option<&str> {
        match self {
            PatternKind::Concept(c) => Some(c),
            PatternKind::Idiom(_) => None,
        }
    }

    fn kind_name(&self) -> &'static str {
        match self {
            PatternKind::Idiom(_) => "idiom",
            PatternKind::Concept(_) => "concept",
        }
    }

    /// Parses the `kind` / `label` pair used by the JSONL and gold formats.
    pub fn from_parts(kind: &str, label: &str) -> Option<Self> {
        if label.is_empty() {
            return None;
        }
        match kind {
            "idiom" => Some(PatternKind::Idiom(label.to_owned())),
            "concept" => Some(PatternKind::Concept(label.to_owned())),
            _ => None,
        }
    }
}

impl fmt::Display for PatternKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PatternKind::Idiom(o) => write!(f, "$_I {o}"),
            PatternKind::Concept(c) => write!(f, "$_C {c}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VerbPattern {
    pub verb: String,
    pub kind: PatternKind,
}

impl VerbPattern {
    pub fn idiom(verb: impl Into<String>, object: impl Into<String>) -> Self {
        VerbPattern {
            verb: verb.into(),
            kind: PatternKind::Idiom(object.into()),
        }
    }

    pub fn concept(verb: impl Into<String>, concept: impl Into<String>) -> Self {
        VerbPattern {
            verb: verb.into(),
            kind: PatternKind::Concept(concept.into()),
        }
    }
}

impl fmt::Display for VerbPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.verb, self.kind)
    }
}

/// Candidate patterns for a phrase: its idiom first, then every concept of the
/// object in lexicographic order.
pub fn candidate_patterns(phrase: &VerbPhrase, taxonomy: &Taxonomy) -> Vec<VerbPattern> {
    std::iter::once(VerbPattern::idiom(&phrase.verb, &phrase.object))
        .chain(
            taxonomy
                .concept_counts(&phrase.object)
                .map(|(c, _)| VerbPattern::concept(&phrase.verb, c)),
        )
        .collect()
}

/// Total mapping from one verb's objects to patterns.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Assignment {
    verb: String,
    targets: BTreeMap<String, PatternKind>,
}

impl Assignment {
    pub fn new(verb: impl Into<String>) -> Self {
        Assignment {
            verb: verb.into(),
            targets: BTreeMap::new(),
        }
    }

    /// Every phrase on its own idiom pattern.
    pub fn all_idiom(dist: &PhraseDistribution) -> Self {
        Assignment {
            verb: dist.verb().to_owned(),
            targets: dist
                .objects()
                .iter()
                .map(|o| (o.clone(), PatternKind::Idiom(o.clone())))
                .collect(),
        }
    }

    pub fn verb(&self) -> &str {
        &self.verb
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn set(&mut self, object: impl Into<String>, kind: PatternKind) -> Option<PatternKind> {
        self.targets.insert(object.into(), kind)
    }

    pub fn with(mut self, object: impl Into<String>, kind: PatternKind) -> Self {
        self.set(object, kind);
        self
    }

    pub fn get(&self, object: &str) -> Option<&PatternKind> {
        self.targets.get(object)
    }

    pub fn pattern(&self, object: &str) -> Option<VerbPattern> {
        self.get(object).map(|kind| VerbPattern {
            verb: self.verb.clone(),
            kind: kind.clone(),
        })
    }

    /// `(object, pattern kind)` pairs in object order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, &PatternKind)> {
        self.targets.iter().map(|(o, k)| (o.as_str(), k))
    }

    /// Number of distinct patterns used.
    pub fn pattern_count(&self) -> usize {
        let mut kinds: Vec<&PatternKind> = self.targets.values().collect();
        kinds.sort();
        kinds.dedup();
        kinds.len()
    }

    /// Canonical text form, one `object<TAB>pattern` per line. Used to break
    /// ties between equally short assignments.
    pub fn serialized(&self) -> String {
        let mut out = String::new();
        for (object, kind) in &self.targets {
            out.push_str(object);
            out.push('\t');
            out.push_str(&kind.to_string());
            out.push('\n');
        }
        out
    }
}

/// `P(a) = Σ_{p : f(p) = a} P(p)`.
pub fn pattern_distribution(
    assignment: &Assignment,
    dist: &PhraseDistribution,
) -> Result<BTreeMap<VerbPattern, f64>> {
    check_coverage(assignment, dist)?;
    let mut out: BTreeMap<VerbPattern, f64> = BTreeMap::new();
    for (object, _, p) in dist.iter() {
        let pattern = assignment.pattern(object).expect("coverage checked");
        *out.entry(pattern).or_default() += p;
    }
    Ok(out)
}

pub(crate) fn check_coverage(assignment: &Assignment, dist: &PhraseDistribution) -> Result<()> {
    if let Some(object) = assignment
        .targets
        .keys()
        .find(|o| dist.probability(o).is_none())
    {
        return Err(Error::Inconsistent(format!(
            "assignment maps `{} {object}`, which is not in the phrase distribution",
            assignment.verb
        )));
    }
    if let Some(object) = dist.objects().iter().find(|o| assignment.get(o).is_none()) {
        return Err(Error::Inconsistent(format!(
            "phrase `{} {object}` has no pattern",
            dist.verb()
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    VerbMismatch {
        assignment: String,
        distribution: String,
    },
    /// An idiom pattern used by a phrase with a different object.
    IdiomMismatch {
        object: String,
        idiom: String,
    },
    /// A conceptualized pattern whose concept has no record for the object.
    NotAnInstance {
        object: String,
        concept: String,
    },
    MissingPhrase(String),
    ExtraPhrase(String),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::VerbMismatch {
                assignment,
                distribution,
            } => {
                write!(f, "assignment verb `{assignment}` differs from distribution verb `{distribution}`")
            }
            Violation::IdiomMismatch { object, idiom } => {
                write!(f, "`{object}` assigned to the idiom pattern of `{idiom}`")
            }
            Violation::NotAnInstance { object, concept } => {
                write!(f, "`{object}` is not an instance of `{concept}`")
            }
            Violation::MissingPhrase(o) => write!(f, "phrase `{o}` is unassigned"),
            Violation::ExtraPhrase(o) => write!(f, "`{o}` is not a retained phrase"),
        }
    }
}

/// Collects every constraint violation of `assignment`.
pub fn validate_assignment(
    assignment: &Assignment,
    taxonomy: &Taxonomy,
    dist: &PhraseDistribution,
) -> std::result::Result<(), Vec<Violation>> {
    let mut violations = Vec::new();
    if assignment.verb != dist.verb() {
        violations.push(Violation::VerbMismatch {
            assignment: assignment.verb.clone(),
            distribution: dist.verb().to_owned(),
        });
    }
    for object in dist.objects() {
        if assignment.get(object).is_none() {
            violations.push(Violation::MissingPhrase(object.clone()));
        }
    }
    for (object, kind) in &assignment.targets {
        if dist.probability(object).is_none() {
            violations.push(Violation::ExtraPhrase(object.clone()));
        }
        match kind {
            PatternKind::Idiom(idiom) if idiom != object => {
                violations.push(Violation::IdiomMismatch {
                    object: object.clone(),
                    idiom: idiom.clone(),
                });
            }
            PatternKind::Concept(concept) if taxonomy.count(object, concept) == 0 => {
                violations.push(Violation::NotAnInstance {
                    object: object.clone(),
                    concept: concept.clone(),
                });
            }
            _ => {}
        }
    }
    if violations.is_empty() {
        Ok(())
    } else {
        Err(violations)
    }
}

/// One line of `patterns.jsonl`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternRecord {
    pub verb: String,
    pub kind: String,
    pub label: String,
    pub probability: f64,
    pub phrases: Vec<PhraseRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhraseRecord {
    pub object: String,
    pub count: u64,
    pub p: f64,
}

impl PatternRecord {
    pub fn pattern_kind(&self) -> Result<PatternKind> {
        PatternKind::from_parts(&self.kind, &self.label).ok_or_else(|| {
            Error::Inconsistent(format!(
                "pattern record for `{}` has kind `{}` and label `{}`",
                self.verb, self.kind, self.label
            ))
        })
    }
}

/// Serializable records for every pattern used by `assignment`, ordered by
/// descending probability, then pattern.
pub fn pattern_records(
    assignment: &Assignment,
    dist: &PhraseDistribution,
) -> Result<Vec<PatternRecord>> {
    check_coverage(assignment, dist)?;
    let mut grouped: BTreeMap<&PatternKind, Vec<PhraseRecord>> = BTreeMap::new();
    for (object, count, p) in dist.iter() {
        let kind = assignment.get(object).expect("coverage checked");
        grouped.entry(kind).or_default().push(PhraseRecord {
            object: object.to_owned(),
            count,
            p,
        });
    }
    let mut records: Vec<(PatternKind, PatternRecord)> = grouped
        .into_iter()
        .map(|(kind, phrases)| {
            let probability = phrases.iter().map(|r| r.p).sum();
            let record = PatternRecord {
                verb: assignment.verb.clone(),
                kind: kind.kind_name().to_owned(),
                label: kind.label().to_owned(),
                probability,
                phrases,
            };
            (kind.clone(), record)
        })
        .collect();
    records.sort_by(|(ka, a), (kb, b)| {
        b.probability
            .total_cmp(&a.probability)
            .then_with(|| ka.cmp(kb))
    });
    Ok(records.into_iter().map(|(_, r)| r).collect())
}

pub fn write_jsonl<W: Write>(mut out: W, records: &[PatternRecord]) -> Result<()> {
    for record in records {
        serde_json::to_writer(&mut out, record).map_err(|e| Error::Io(std::io::Error::other(e)))?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_jsonl<R: BufRead>(reader: R) -> Result<Vec<PatternRecord>> {
    let mut records = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: PatternRecord =
            serde_json::from_str(&line).map_err(|e| Error::parse(idx + 1, e.to_string()))?;
        record
            .pattern_kind()
            .map_err(|e| Error::parse(idx + 1, e.to_string()))?;
        records.push(record);
    }
    Ok(records)
}

/// Learned assignments for many verbs.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AssignmentStore {
    assignments: BTreeMap<String, Assignment>,
}

impl AssignmentStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, assignment: Assignment) {
        self.assignments.insert(assignment.verb.clone(), assignment);
    }

    /// Rebuilds assignments from pattern records. A phrase listed under two
    /// patterns is an error.
    pub fn from_records(records: &[PatternRecord]) -> Result<Self> {
        let mut store = AssignmentStore::new();
        for record in records {
            let kind = record.pattern_kind()?;
            let assignment = store
                .assignments
                .entry(record.verb.clone())
                .or_insert_with(|| Assignment::new(&record.verb));
            for phrase in &record.phrases {
                if assignment.set(&phrase.object, kind.clone()).is_some() {
                    return Err(Error::Inconsistent(format!(
                        "phrase `{} {}` appears under more than one pattern",
                        record.verb, phrase.object
                    )));
                }
            }
        }
        Ok(store)
    }

    pub fn get(&self, verb: &str) -> Option<&Assignment> {
        self.assignments.get(verb)
    }

    pub fn lookup(&self, verb: &str, object: &str) -> Option<&PatternKind> {
        self.get(verb).and_then(|a| a.get(object))
    }

    pub fn iter(&self) -> impl Iterator<Item = &Assignment> {
        self.assignments.values()
    }

    pub fn len(&self) -> usize {
        self.assignments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }
}

impl FromIterator<Assignment> for AssignmentStore {
    fn from_iter<T: IntoIterator<Item = Assignment>>(iter: T) -> Self {
        let mut store = AssignmentStore::new();
        for assignment in iter {
            store.insert(assignment);
        }
        store
    }
}
