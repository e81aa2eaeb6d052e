//! ATTRACT constraint generation.
//!
//! Constraints are undirected word pairs stored in canonical order (smaller
//! rendered token first). Each pair remembers where it came from so that
//! experiment variants can be selected by provenance.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::embedding::{LanguageTag, Token, WordVectorStore};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Verbnet,
    CrossLingual,
    MonoSyn,
}

impl Provenance {
    pub const ALL: [Provenance; 3] = [Provenance::Verbnet, Provenance::CrossLingual, Provenance::MonoSyn];

    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Verbnet => "verbnet",
            Provenance::CrossLingual => "cross_lingual",
            Provenance::MonoSyn => "mono_syn",
        }
    }

    fn bit(self) -> u8 {
        match self {
            Provenance::Verbnet => 1,
            Provenance::CrossLingual => 2,
            Provenance::MonoSyn => 4,
        }
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Set of provenance labels attached to one pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Provenances(u8);

impl Provenances {
    pub fn single(p: Provenance) -> Self {
        Provenances(p.bit())
    }

    pub fn contains(self, p: Provenance) -> bool {
        self.0 & p.bit() != 0
    }

    pub fn insert(&mut self, p: Provenance) {
        self.0 |= p.bit();
    }

    pub fn union(self, other: Provenances) -> Self {
        Provenances(self.0 | other.0)
    }

    pub fn iter(self) -> impl Iterator<Item = Provenance> {
        Provenance::ALL.into_iter().filter(move |p| self.contains(*p))
    }

    /// First label in `verbnet, cross_lingual, mono_syn` order.
    pub fn primary(self) -> Option<Provenance> {
        self.iter().next()
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for Provenances {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let labels: Vec<&str> = self.iter().map(Provenance::as_str).collect();
        f.write_str(&labels.join(","))
    }
}

/// An undirected constraint pair in canonical order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AttractPair {
    left: Token,
    right: Token,
}

impl AttractPair {
    /// Canonical pair of two distinct tokens; `None` for a reflexive pair.
    pub fn new(a: Token, b: Token) -> Option<Self> {
        use std::cmp::Ordering::*;
        match a.cmp(&b) {
            Less => Some(AttractPair { left: a, right: b }),
            Greater => Some(AttractPair { left: b, right: a }),
            Equal => None,
        }
    }

    pub fn left(&self) -> &Token {
        &self.left
    }

    pub fn right(&self) -> &Token {
        &self.right
    }

    pub fn touches(&self, token: &Token) -> bool {
        &self.left == token || &self.right == token
    }
}

/// Per-provenance pair counts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ProvenanceCounts {
    pub verbnet: usize,
    pub cross_lingual: usize,
    pub mono_syn: usize,
}

impl ProvenanceCounts {
    fn bump(&mut self, p: Provenance) {
        match p {
            Provenance::Verbnet => self.verbnet += 1,
            Provenance::CrossLingual => self.cross_lingual += 1,
            Provenance::MonoSyn => self.mono_syn += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.verbnet + self.cross_lingual + self.mono_syn
    }
}

/// Deduplicated collection of ATTRACT pairs.
///
/// Iteration order is the canonical pair order, independent of insertion order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConstraintSet {
    pairs: BTreeMap<AttractPair, Provenances>,
}

impl ConstraintSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a pair, merging labels when it is already present. Reflexive pairs are ignored.
    pub fn add(&mut self, a: Token, b: Token, provenance: Provenance) -> bool {
        match AttractPair::new(a, b) {
            Some(pair) => {
                let fresh = !self.pairs.contains_key(&pair);
                self.pairs.entry(pair).or_default().insert(provenance);
                fresh
            }
            None => false,
        }
    }

    fn add_labelled(&mut self, pair: AttractPair, labels: Provenances) {
        let slot = self.pairs.entry(pair).or_default();
        *slot = slot.union(labels);
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&AttractPair, Provenances)> {
        self.pairs.iter().map(|(p, l)| (p, *l))
    }

    pub fn pairs(&self) -> impl Iterator<Item = &AttractPair> {
        self.pairs.keys()
    }

    pub fn provenance_of(&self, pair: &AttractPair) -> Option<Provenances> {
        self.pairs.get(pair).copied()
    }

    /// Counts each pair once, under its primary label; sums to `len()`.
    pub fn counts(&self) -> ProvenanceCounts {
        let mut c = ProvenanceCounts::default();
        for labels in self.pairs.values() {
            if let Some(p) = labels.primary() {
                c.bump(p);
            }
        }
        c
    }

    /// Counts every label a pair carries, so multi-labelled pairs count more than once.
    pub fn label_counts(&self) -> ProvenanceCounts {
        let mut c = ProvenanceCounts::default();
        for labels in self.pairs.values() {
            labels.iter().for_each(|p| c.bump(p));
        }
        c
    }

    /// Pairs carrying at least one of `allowed`, with other labels stripped.
    pub fn with_provenance(&self, allowed: &[Provenance]) -> ConstraintSet {
        let mut mask = Provenances::default();
        allowed.iter().for_each(|p| mask.insert(*p));
        let pairs = self
            .pairs
            .iter()
            .filter_map(|(pair, labels)| {
                let kept = Provenances(labels.0 & mask.0);
                (!kept.is_empty()).then(|| (pair.clone(), kept))
            })
            .collect();
        ConstraintSet { pairs }
    }

    /// Drops every pair touching a token for which `exclude` returns true.
    pub fn without_tokens(&self, exclude: impl Fn(&Token) -> bool) -> ConstraintSet {
        let pairs = self
            .pairs
            .iter()
            .filter(|(p, _)| !exclude(p.left()) && !exclude(p.right()))
            .map(|(p, l)| (p.clone(), *l))
            .collect();
        ConstraintSet { pairs }
    }

    /// Distinct tokens mentioned by any pair, in sorted order.
    pub fn vocabulary(&self) -> BTreeSet<&Token> {
        self.pairs.keys().flat_map(|p| [p.left(), p.right()]).collect()
    }

    /// Writes the `left<TAB>right<TAB>provenance[,provenance]` diagnostic dump.
    pub fn write_dump(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut out = Vec::new();
        for (pair, labels) in &self.pairs {
            writeln!(out, "{}\t{}\t{}", pair.left(), pair.right(), labels).expect("write to vec");
        }
        fs::write(path, out).map_err(|e| Error::io(path, e))
    }
}

/// Verb classes with subclass members already folded in.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerbClassLexicon {
    pub language: LanguageTag,
    pub classes: BTreeMap<String, BTreeSet<String>>,
}

impl VerbClassLexicon {
    pub fn new(language: LanguageTag) -> Self {
        VerbClassLexicon {
            language,
            classes: BTreeMap::new(),
        }
    }

    /// Reads `class_id<TAB>verb1 verb2 ...` lines. Repeated class ids are merged.
    pub fn load(path: impl AsRef<Path>, language: LanguageTag) -> Result<Self> {
        let path = path.as_ref();
        let mut lexicon = VerbClassLexicon::new(language);
        for (lineno, class, members) in read_class_lines(path)? {
            if members.is_empty() {
                return Err(Error::parse(path, lineno, format!("class {class:?} has no members")));
            }
            lexicon.classes.entry(class).or_default().extend(members);
        }
        Ok(lexicon)
    }
}

/// Parses `class_id<TAB>member member ...` lines into `(line, id, members)`.
pub(crate) fn read_class_lines(path: &Path) -> Result<Vec<(usize, String, Vec<String>)>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let (class, members) = line
            .split_once('\t')
            .ok_or_else(|| Error::parse(path, lineno, "expected class_id<TAB>members"))?;
        let class = class.trim();
        if class.is_empty() {
            return Err(Error::parse(path, lineno, "empty class id"));
        }
        let members = members.split_whitespace().map(str::to_lowercase).collect();
        out.push((lineno, class.to_owned(), members));
    }
    Ok(out)
}

/// Translation pairs between two languages.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BilingualDictionary {
    pub source: LanguageTag,
    pub target: LanguageTag,
    pub pairs: BTreeSet<(String, String)>,
}

impl BilingualDictionary {
    pub fn new(source: LanguageTag, target: LanguageTag) -> Result<Self> {
        if source == target {
            return Err(Error::InvalidConfig(format!(
                "dictionary languages must differ (both {source})"
            )));
        }
        Ok(BilingualDictionary {
            source,
            target,
            pairs: BTreeSet::new(),
        })
    }

    /// Reads `src<TAB>tgt` lines; multiword entries are skipped with a warning.
    pub fn load(path: impl AsRef<Path>, source: LanguageTag, target: LanguageTag) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut dict = BilingualDictionary::new(source, target)?;
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let (src, tgt) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse(path, i + 1, "expected src<TAB>tgt"))?;
            let (src, tgt) = (src.trim(), tgt.trim());
            if src.is_empty() || tgt.is_empty() {
                return Err(Error::parse(path, i + 1, "empty dictionary entry"));
            }
            if src.contains(char::is_whitespace) || tgt.contains(char::is_whitespace) {
                warn!(
                    "{}:{}: skipping multiword entry {src:?} / {tgt:?}",
                    path.display(),
                    i + 1
                );
                continue;
            }
            dict.pairs.insert((src.to_lowercase(), tgt.to_lowercase()));
        }
        Ok(dict)
    }
}

/// Reads one synset per line, members separated by spaces.
pub fn load_synsets(path: impl AsRef<Path>) -> Result<Vec<Vec<String>>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| l.split_whitespace().map(str::to_lowercase).collect())
        .collect())
}

/// All unique within-class pairs of every class.
pub fn pairs_from_verb_classes(lexicon: &VerbClassLexicon) -> ConstraintSet {
    let mut set = ConstraintSet::new();
    for members in lexicon.classes.values() {
        add_all_pairs(&mut set, &lexicon.language, members.iter(), Provenance::Verbnet);
    }
    set
}

/// One cross-lingual pair per translation entry.
pub fn pairs_from_dictionary(dict: &BilingualDictionary) -> ConstraintSet {
    let mut set = ConstraintSet::new();
    for (src, tgt) in &dict.pairs {
        let (Ok(a), Ok(b)) = (Token::new(&dict.source, src), Token::new(&dict.target, tgt)) else {
            warn!("skipping unusable dictionary entry {src:?} / {tgt:?}");
            continue;
        };
        set.add(a, b, Provenance::CrossLingual);
    }
    set
}

/// All unique within-synset pairs for one language.
pub fn pairs_from_synonyms<S: AsRef<str>>(synsets: &[Vec<S>], language: &LanguageTag) -> ConstraintSet {
    let mut set = ConstraintSet::new();
    for synset in synsets {
        add_all_pairs(&mut set, language, synset.iter(), Provenance::MonoSyn);
    }
    set
}

fn add_all_pairs<S: AsRef<str>>(
    set: &mut ConstraintSet,
    language: &LanguageTag,
    members: impl Iterator<Item = S>,
    provenance: Provenance,
) {
    let tokens: BTreeSet<Token> = members
        .filter_map(|m| {
            let m = m.as_ref();
            Token::new(language, m)
                .map_err(|_| warn!("skipping unusable member {m:?}"))
                .ok()
        })
        .collect();
    let tokens: Vec<Token> = tokens.into_iter().collect();
    for (i, a) in tokens.iter().enumerate() {
        for b in &tokens[i + 1..] {
            set.add(a.clone(), b.clone(), provenance);
        }
    }
}

/// Result of vocabulary filtering: the retained pairs and what was dropped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Filtered {
    pub set: ConstraintSet,
    pub dropped: ProvenanceCounts,
}

/// Keeps the pairs whose two tokens are both in `store`.
pub fn filter_by_vocabulary(set: &ConstraintSet, store: &WordVectorStore) -> Filtered {
    let mut kept = ConstraintSet::new();
    let mut dropped = ProvenanceCounts::default();
    for (pair, labels) in set.iter() {
        if store.contains(pair.left()) && store.contains(pair.right()) {
            kept.add_labelled(pair.clone(), labels);
        } else if let Some(p) = labels.primary() {
            dropped.bump(p);
        }
    }
    Filtered { set: kept, dropped }
}

/// Deduplicated union; a pair arriving with several labels keeps all of them.
pub fn union<'a>(sets: impl IntoIterator<Item = &'a ConstraintSet>) -> ConstraintSet {
    let mut out = ConstraintSet::new();
    for set in sets {
        for (pair, labels) in set.iter() {
            out.add_labelled(pair.clone(), labels);
        }
    }
    out
}
