//! Seeded random instances for property tests, acceptance runs and benchmarks.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::PhraseCorpus;
use crate::taxonomy::Taxonomy;

/// A one-verb problem: corpus, taxonomy and trade-off weight.
#[derive(Debug, Clone)]
pub struct Instance {
    pub verb: String,
    pub corpus: PhraseCorpus,
    pub taxonomy: Taxonomy,
    pub theta: f64,
}

/// 2–8 phrases over 1–5 concepts; each object gets up to three concepts, so
/// at most four candidate patterns. Concepts also carry up to three entities
/// outside the corpus. Counts are uniform: taxonomy 1–50, corpus 1–30.
/// `theta` is uniform in `[0.1, 0.9]`.
pub fn small_instance<R: Rng + ?Sized>(rng: &mut R) -> Instance {
    let n = rng.gen_range(2..=8);
    let concept_count = rng.gen_range(1..=5);
    let concepts: Vec<String> = (0..concept_count).map(|i| format!("c{i}")).collect();
    let objects: Vec<String> = (0..n).map(|i| format!("o{i}")).collect();

    let mut records = Vec::new();
    for object in &objects {
        let k = rng.gen_range(0..=concept_count.min(3));
        for concept in concepts.choose_multiple(rng, k) {
            records.push((concept.clone(), object.clone(), rng.gen_range(1..=50)));
        }
    }
    for concept in &concepts {
        for j in 0..rng.gen_range(0..=3) {
            records.push((concept.clone(), format!("x{j}"), rng.gen_range(1..=50)));
        }
    }
    let rows: Vec<_> = objects
        .iter()
        .map(|o| ("v", o.clone(), rng.gen_range(1..=30)))
        .collect();
    Instance {
        verb: "v".to_owned(),
        corpus: PhraseCorpus::from_rows(rows, 1).expect("min count 1"),
        taxonomy: Taxonomy::from_records(records),
        theta: rng.gen_range(0.1..=0.9),
    }
}

/// `n` phrases over `max(n / 10, 1)` concepts, 1–3 concepts per object, for timing runs.
pub fn scaling_instance(n: usize, seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let concept_count = (n / 10).max(3);
    let concepts: Vec<String> = (0..concept_count).map(|i| format!("c{i}")).collect();
    let mut records = Vec::new();
    let mut rows = Vec::with_capacity(n);
    for i in 0..n {
        let object = format!("o{i}");
        let k = rng.gen_range(1..=3);
        for concept in concepts.choose_multiple(&mut rng, k) {
            records.push((concept.clone(), object.clone(), rng.gen_range(1..=50)));
        }
        rows.push(("v", object, rng.gen_range(1..=100)));
    }
    Instance {
        verb: "v".to_owned(),
        corpus: PhraseCorpus::from_rows(rows, 1).expect("min count 1"),
        taxonomy: Taxonomy::from_records(records),
        theta: 0.25,
    }
}
