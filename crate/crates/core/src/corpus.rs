//! Verb-phrase frequency tables and the per-verb phrase distribution `P(p)`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tsv;

/// Phrases seen fewer times than this are treated as noise.
pub const DEFAULT_MIN_COUNT: u64 = 5;

/// A verb and its direct object, e.g. `eat apple`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VerbPhrase {
    pub verb: String,
    pub object: String,
}

impl VerbPhrase {
    pub fn new(verb: impl Into<String>, object: impl Into<String>) -> Self {
        VerbPhrase {
            verb: verb.into(),
            object: object.into(),
        }
    }
}

impl fmt::Display for VerbPhrase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.verb, self.object)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PhraseCorpus {
    // verb -> object -> count, all counts >= min_count
    verbs: BTreeMap<String, BTreeMap<String, u64>>,
}

impl PhraseCorpus {
    /// Aggregates `(verb, object, count)` rows, then drops phrases whose total
    /// is below `min_count` and verbs left without phrases.
    pub fn from_rows<I, V, O>(rows: I, min_count: u64) -> Result<Self>
    where
        I: IntoIterator<Item = (V, O, u64)>,
        V: Into<String>,
        O: Into<String>,
    {
        let mut raw: BTreeMap<String, BTreeMap<String, u64>> = BTreeMap::new();
        for (verb, object, count) in rows {
            *raw.entry(verb.into())
                .or_default()
                .entry(object.into())
                .or_default() += count;
        }
        Self::filtered(raw, min_count)
    }

    /// Reads `verb<TAB>object<TAB>count` lines.
    pub fn from_reader<R: BufRead>(reader: R, min_count: u64) -> Result<Self> {
        let mut raw: BTreeMap<String, BTreeMap<String, u64>> = BTreeMap::new();
        tsv::for_each_record(reader, |line, fields| {
            tsv::expect_columns(line, fields, 3)?;
            let count = tsv::parse_count(line, fields[2])?;
            *raw.entry(fields[0].to_owned())
                .or_default()
                .entry(fields[1].to_owned())
                .or_default() += count;
            Ok(())
        })?;
        Self::filtered(raw, min_count)
    }

    pub fn load(path: impl AsRef<Path>, min_count: u64) -> Result<Self> {
        Self::from_reader(BufReader::new(File::open(path)?), min_count)
    }

    fn filtered(mut raw: BTreeMap<String, BTreeMap<String, u64>>, min_count: u64) -> Result<Self> {
        if min_count == 0 {
            return Err(Error::Config("min_count must be at least 1".into()));
        }
        for objects in raw.values_mut() {
            objects.retain(|_, n| *n >= min_count);
        }
        raw.retain(|_, objects| !objects.is_empty());
        Ok(PhraseCorpus { verbs: raw })
    }

    pub fn is_empty(&self) -> bool {
        self.verbs.is_empty()
    }

    pub fn verbs(&self) -> impl Iterator<Item = &str> {
        self.verbs.keys().map(String::as_str)
    }

    pub fn contains_verb(&self, verb: &str) -> bool {
        self.verbs.contains_key(verb)
    }

    pub fn phrase_count(&self, verb: &str) -> usize {
        self.verbs.get(verb).map_or(0, BTreeMap::len)
    }

    /// `P(p) = n(p) / Σ n(p_i)` over the verb's retained phrases.
    pub fn phrase_distribution(&self, verb: &str) -> Result<PhraseDistribution> {
        let objects = self
            .verbs
            .get(verb)
            .ok_or_else(|| Error::UnknownVerb(verb.to_owned()))?;
        Ok(PhraseDistribution::from_counts(
            verb,
            objects.iter().map(|(o, n)| (o.clone(), *n)),
        ))
    }
}

/// One verb's retained phrases, ordered by object, with counts and `P(p)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhraseDistribution {
    verb: String,
    objects: Vec<String>,
    counts: Vec<u64>,
    probs: Vec<f64>,
}

impl PhraseDistribution {
    /// Objects must be unique; counts are normalized to probabilities.
    pub fn from_counts<I>(verb: impl Into<String>, counts: I) -> Self
    where
        I: IntoIterator<Item = (String, u64)>,
    {
        let mut pairs: Vec<(String, u64)> = counts.into_iter().collect();
        pairs.sort();
        let total: u64 = pairs.iter().map(|(_, n)| n).sum();
        let probs = pairs
            .iter()
            .map(|(_, n)| {
                if total == 0 {
                    0.0
                } else {
                    *n as f64 / total as f64
                }
            })
            .collect();
        let (objects, counts) = pairs.into_iter().unzip();
        PhraseDistribution {
            verb: verb.into(),
            objects,
            counts,
            probs,
        }
    }

    pub fn verb(&self) -> &str {
        &self.verb
    }

    pub fn len(&self) -> usize {
        self.objects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }

    pub fn objects(&self) -> &[String] {
        &self.objects
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    pub fn total_count(&self) -> u64 {
        self.counts.iter().sum()
    }

    fn index_of(&self, object: &str) -> Option<usize> {
        self.objects
            .binary_search_by(|o| o.as_str().cmp(object))
            .ok()
    }

    pub fn probability(&self, object: &str) -> Option<f64> {
        self.index_of(object).map(|i| self.probs[i])
    }

    pub fn count(&self, object: &str) -> Option<u64> {
        self.index_of(object).map(|i| self.counts[i])
    }

    /// `(object, count, P(p))` in object order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, u64, f64)> {
        self.objects
            .iter()
            .zip(&self.counts)
            .zip(&self.probs)
            .map(|((o, n), p)| (o.as_str(), *n, *p))
    }
}

/// Verb phrases known to be idioms; these stay on their idiom pattern.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IdiomDictionary {
    phrases: BTreeSet<VerbPhrase>,
}

impl IdiomDictionary {
    pub fn new() -> Self {
        Self::default()
    }

    /// Reads `verb<TAB>object` lines.
    pub fn from_reader<R: BufRead>(reader: R) -> Result<Self> {
        let mut dict = IdiomDictionary::default();
        tsv::for_each_record(reader, |line, fields| {
            tsv::expect_columns(line, fields, 2)?;
            dict.insert(VerbPhrase::new(fields[0], fields[1]));
            Ok(())
        })?;
        Ok(dict)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_reader(BufReader::new(File::open(path)?))
    }

    pub fn insert(&mut self, phrase: VerbPhrase) {
        self.phrases.insert(phrase);
    }

    pub fn contains(&self, verb: &str, object: &str) -> bool {
        self.phrases.contains(&VerbPhrase::new(verb, object))
    }

    pub fn len(&self) -> usize {
        self.phrases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phrases.is_empty()
    }

    /// Objects of `verb` listed in the dictionary.
    pub fn objects_for<'a>(&'a self, verb: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.phrases
            .iter()
            .filter(move |p| p.verb == verb)
            .map(|p| p.object.as_str())
    }
}

impl FromIterator<VerbPhrase> for IdiomDictionary {
    fn from_iter<T: IntoIterator<Item = VerbPhrase>>(iter: T) -> Self {
        IdiomDictionary {
            phrases: iter.into_iter().collect(),
        }
    }
}
