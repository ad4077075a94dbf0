//! The `eat` fixture: a desk-scale instance whose optimum groups fruit and
//! snacks under `food`, meals under `meal`, and leaves `humble_pie` as an idiom.

use crate::corpus::{IdiomDictionary, PhraseCorpus, VerbPhrase};
use crate::taxonomy::Taxonomy;

pub const EAT_CORPUS_TSV: &str = "\
eat\tapple\t5
eat\thot_dog\t5
eat\tbreakfast\t10
eat\tlunch\t8
eat\tdinner\t12
eat\thumble_pie\t5
";

pub const EAT_TAXONOMY_TSV: &str = "\
food\tapple\t20
food\thot_dog\t10
food\tbread\t30
food\tmeat\t30
meal\tbreakfast\t8
meal\tlunch\t8
meal\tdinner\t8
activity\tbreakfast\t1
activity\tlunch\t1
activity\tdinner\t1
activity\tshopping\t50
activity\tfishing\t40
";

/// Extra taxonomy rows for the conceptualization example: `pitaya` is both a
/// fruit and a company name.
pub const PITAYA_TAXONOMY_TSV: &str = "\
food\tpitaya\t3
company\tpitaya\t9
";

pub const EAT_IDIOMS_TSV: &str = "eat\thumble_pie\n";

pub fn eat_corpus() -> PhraseCorpus {
    PhraseCorpus::from_reader(EAT_CORPUS_TSV.as_bytes(), 1).expect("fixture corpus parses")
}

pub fn eat_taxonomy() -> Taxonomy {
    Taxonomy::from_reader(EAT_TAXONOMY_TSV.as_bytes()).expect("fixture taxonomy parses")
}

/// The `eat` taxonomy extended with the `pitaya` rows.
pub fn pitaya_taxonomy() -> Taxonomy {
    let text = format!("{EAT_TAXONOMY_TSV}{PITAYA_TAXONOMY_TSV}");
    Taxonomy::from_reader(text.as_bytes()).expect("fixture taxonomy parses")
}

pub fn eat_idioms() -> IdiomDictionary {
    std::iter::once(VerbPhrase::new("eat", "humble_pie")).collect()
}
