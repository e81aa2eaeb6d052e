// Build ATTRACT constraints from a verb-class lexicon, a dictionary and
// synonym sets, then keep the ones the vector space can use.

use std::collections::BTreeSet;

use verb_transfer::constraints::{
    filter_by_vocabulary, pairs_from_dictionary, pairs_from_synonyms, pairs_from_verb_classes, union,
    BilingualDictionary, Provenance, VerbClassLexicon,
};
use verb_transfer::embedding::{LanguageTag, Token, WordVectorStore};

pub fn run_example() -> verb_transfer::Result<()> {
    let en = LanguageTag::new("en")?;
    let fr = LanguageTag::new("fr")?;

    let mut lexicon = VerbClassLexicon::new(en.clone());
    lexicon.classes.insert(
        "learn-14".into(),
        BTreeSet::from(["learn".into(), "study".into(), "read".into()]),
    );
    let mut dict = BilingualDictionary::new(en.clone(), fr.clone())?;
    dict.pairs.insert(("learn".into(), "apprendre".into()));
    dict.pairs.insert(("study".into(), "etudier".into()));
    dict.pairs.insert(("cram".into(), "bachoter".into()));
    let synonyms = pairs_from_synonyms(&[vec!["apprendre", "etudier"]], &fr);

    let all = union([
        &pairs_from_verb_classes(&lexicon),
        &pairs_from_dictionary(&dict),
        &synonyms,
    ]);
    println!("{} pairs before filtering: {:?}", all.len(), all.counts());

    // "cram" and "bachoter" have no vectors
    let words = [
        (&en, "learn"),
        (&en, "study"),
        (&en, "read"),
        (&fr, "apprendre"),
        (&fr, "etudier"),
    ];
    let store = WordVectorStore::from_entries(
        2,
        words
            .iter()
            .enumerate()
            .map(|(i, (l, w))| Token::new(l, w).map(|t| (t, vec![1.0, i as f64])))
            .collect::<verb_transfer::Result<Vec<_>>>()?,
    )?;
    let filtered = filter_by_vocabulary(&all, &store);
    println!("dropped as out of vocabulary: {:?}", filtered.dropped);
    let xling = filtered.set.with_provenance(&[Provenance::CrossLingual]);
    for (pair, prov) in xling.iter() {
        println!("  {} ~ {}\t{prov}", pair.left(), pair.right());
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> verb_transfer::Result<()> {
    run_example()
}
