//! Language-tagged word-vector collections.
//!
//! Every word lives in a joint space as a [`Token`] rendered `lang_surface`
//! (`en_ruin`, `fr_ruiner`). Stores from different languages are merged into one
//! [`WordVectorStore`] before specialisation so that constraints can link words
//! across languages.
//!
//! Files use the word2vec textual format: a `V d` header followed by one
//! `word v1 ... vd` row per entry.

use std::collections::HashMap;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use log::warn;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Separator between the language tag and the surface form of a rendered token.
pub const TOKEN_SEPARATOR: char = '_';

/// Short lowercase language identifier, e.g. `en` or `fr`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LanguageTag(String);

impl LanguageTag {
    pub fn new(code: &str) -> Result<Self> {
        let ok = (2..=8).contains(&code.len()) && code.bytes().all(|b| b.is_ascii_lowercase());
        if ok {
            Ok(LanguageTag(code.to_owned()))
        } else {
            Err(Error::InvalidLanguageTag(code.to_owned()))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for LanguageTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::str::FromStr for LanguageTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        LanguageTag::new(s)
    }
}

impl Serialize for LanguageTag {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for LanguageTag {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        LanguageTag::new(&s).map_err(serde::de::Error::custom)
    }
}

/// A word in the joint space, rendered as `lang_surface`.
///
/// Ordering and equality follow the rendered string, which is the tie-break
/// order used throughout the crate.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Token {
    rendered: String,
    split: usize,
}

impl Token {
    pub fn new(language: &LanguageTag, surface: &str) -> Result<Self> {
        if surface.is_empty() || surface.chars().any(char::is_whitespace) {
            return Err(Error::InvalidToken(surface.to_owned()));
        }
        let surface = surface.to_lowercase();
        let rendered = format!("{}{}{}", language.as_str(), TOKEN_SEPARATOR, surface);
        Ok(Token {
            rendered,
            split: language.as_str().len(),
        })
    }

    /// Parses a rendered token, splitting at the first separator.
    pub fn parse(rendered: &str) -> Result<Self> {
        let (lang, surface) = rendered
            .split_once(TOKEN_SEPARATOR)
            .ok_or_else(|| Error::InvalidToken(rendered.to_owned()))?;
        let lang = LanguageTag::new(lang).map_err(|_| Error::InvalidToken(rendered.to_owned()))?;
        if surface.chars().any(|c| c.is_uppercase()) {
            return Err(Error::InvalidToken(rendered.to_owned()));
        }
        Token::new(&lang, surface)
    }

    pub fn language(&self) -> &str {
        &self.rendered[..self.split]
    }

    pub fn surface(&self) -> &str {
        &self.rendered[self.split + 1..]
    }

    pub fn as_str(&self) -> &str {
        &self.rendered
    }

    pub fn is_language(&self, tag: &LanguageTag) -> bool {
        self.language() == tag.as_str()
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.rendered)
    }
}

impl fmt::Debug for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Token({})", self.rendered)
    }
}

impl Serialize for Token {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.rendered)
    }
}

/// Token-indexed dense vectors of a fixed dimension.
///
/// Entries keep insertion order; row `i` of the flat buffer belongs to
/// `tokens()[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct WordVectorStore {
    dimension: usize,
    tokens: Vec<Token>,
    index: HashMap<Token, usize>,
    data: Vec<f64>,
}

/// A store together with the non-fatal issues met while reading it.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub store: WordVectorStore,
    pub warnings: Vec<String>,
}

impl WordVectorStore {
    pub fn new(dimension: usize) -> Self {
        WordVectorStore {
            dimension,
            tokens: Vec::new(),
            index: HashMap::new(),
            data: Vec::new(),
        }
    }

    /// Builds a store from `(token, vector)` pairs; duplicate tokens are an error.
    pub fn from_entries<I>(dimension: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Token, Vec<f64>)>,
    {
        let mut store = WordVectorStore::new(dimension);
        for (token, vector) in entries {
            store.insert(token, &vector)?;
        }
        Ok(store)
    }

    pub fn insert(&mut self, token: Token, vector: &[f64]) -> Result<()> {
        if vector.len() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                got: vector.len(),
            });
        }
        if self.index.contains_key(&token) {
            return Err(Error::DuplicateToken(token.to_string()));
        }
        self.index.insert(token.clone(), self.tokens.len());
        self.tokens.push(token);
        self.data.extend_from_slice(vector);
        Ok(())
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn contains(&self, token: &Token) -> bool {
        self.index.contains_key(token)
    }

    pub fn index_of(&self, token: &Token) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn get(&self, token: &Token) -> Option<&[f64]> {
        self.index_of(token).map(|i| self.row(i))
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dimension..(i + 1) * self.dimension]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.dimension..(i + 1) * self.dimension]
    }

    /// Raw row-major buffer of all vectors.
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Distinct language tags in order of first appearance.
    pub fn languages(&self) -> Vec<String> {
        let mut seen: Vec<String> = Vec::new();
        for t in &self.tokens {
            if !seen.iter().any(|l| l == t.language()) {
                seen.push(t.language().to_owned());
            }
        }
        seen
    }

    /// Sub-store holding only the entries of one language.
    pub fn restrict_to(&self, language: &LanguageTag) -> WordVectorStore {
        let mut out = WordVectorStore::new(self.dimension);
        for (i, t) in self.tokens.iter().enumerate() {
            if t.is_language(language) {
                out.insert(t.clone(), self.row(i)).expect("unique tokens");
            }
        }
        out
    }
}

/// Reads a word2vec textual file, lowercasing and tagging every word.
///
/// When two rows lowercase to the same word the first one is kept and a
/// warning is recorded.
pub fn load_word_vectors(path: impl AsRef<Path>, language: &LanguageTag) -> Result<Loaded> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut lines = BufReader::new(file).lines();

    let header = match lines.next() {
        Some(line) => line.map_err(|e| Error::io(path, e))?,
        None => return Err(Error::parse(path, 1, "missing header")),
    };
    let fields: Vec<&str> = header.split_whitespace().collect();
    let (count, dimension) = match fields.as_slice() {
        [v, d] => match (v.parse::<usize>(), d.parse::<usize>()) {
            (Ok(v), Ok(d)) if d > 0 => (v, d),
            _ => return Err(Error::parse(path, 1, format!("malformed header {header:?}"))),
        },
        _ => return Err(Error::parse(path, 1, format!("malformed header {header:?}"))),
    };

    let mut store = WordVectorStore::new(dimension);
    let mut warnings = Vec::new();
    let mut rows = 0usize;
    let mut vector = Vec::with_capacity(dimension);
    for (offset, line) in lines.enumerate() {
        let lineno = offset + 2;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        rows += 1;
        let mut parts = line.split(' ').filter(|s| !s.is_empty());
        let word = parts.next().expect("non-empty line");
        vector.clear();
        for value in parts {
            let v: f64 = value
                .parse()
                .map_err(|_| Error::parse(path, lineno, format!("bad number {value:?}")))?;
            if !v.is_finite() {
                return Err(Error::parse(path, lineno, format!("non-finite value {value:?}")));
            }
            vector.push(v);
        }
        if vector.len() != dimension {
            return Err(Error::parse(
                path,
                lineno,
                format!("expected {dimension} values, found {}", vector.len()),
            ));
        }
        let token =
            Token::new(language, word).map_err(|_| Error::parse(path, lineno, format!("invalid word {word:?}")))?;
        if store.contains(&token) {
            let msg = format!(
                "{}:{lineno}: {word:?} collides with an earlier entry for {token}; keeping the first",
                path.display()
            );
            warn!("{msg}");
            warnings.push(msg);
            continue;
        }
        store.insert(token, &vector)?;
    }
    if rows != count {
        return Err(Error::parse(
            path,
            1,
            format!("header declares {count} rows but file has {rows}"),
        ));
    }
    Ok(Loaded { store, warnings })
}

/// Writes a store in word2vec textual format with rendered tokens as words.
///
/// Values use the shortest representation that parses back to the same bits.
pub fn save_word_vectors(store: &WordVectorStore, path: impl AsRef<Path>) -> Result<()> {
    write_vectors(store, path.as_ref(), |t| t.as_str())
}

/// Writes a store with bare surfaces as words, suitable for reloading under a tag.
pub fn save_surfaces(store: &WordVectorStore, path: impl AsRef<Path>) -> Result<()> {
    write_vectors(store, path.as_ref(), |t| t.surface())
}

fn write_vectors(store: &WordVectorStore, path: &Path, word: impl Fn(&Token) -> &str) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    let io = |e| Error::io(path, e);
    writeln!(out, "{} {}", store.len(), store.dimension()).map_err(io)?;
    for (i, token) in store.tokens().iter().enumerate() {
        out.write_all(word(token).as_bytes()).map_err(io)?;
        for v in store.row(i) {
            write!(out, " {v}").map_err(io)?;
        }
        out.write_all(b"\n").map_err(io)?;
    }
    out.flush().map_err(io)
}

/// Reads a file written by [`save_word_vectors`], whose words are rendered tokens.
pub fn load_rendered(path: impl AsRef<Path>) -> Result<WordVectorStore> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::parse(path, 1, "missing header"))?;
    let dimension = header
        .split_whitespace()
        .nth(1)
        .and_then(|d| d.parse::<usize>().ok())
        .filter(|&d| d > 0)
        .ok_or_else(|| Error::parse(path, 1, format!("malformed header {header:?}")))?;
    let mut store = WordVectorStore::new(dimension);
    for (offset, line) in lines.enumerate() {
        let lineno = offset + 2;
        let mut parts = line.split(' ');
        let word = parts.next().unwrap_or_default();
        let token = Token::parse(word).map_err(|e| Error::parse(path, lineno, e.to_string()))?;
        let vector = parts
            .map(|v| v.parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::parse(path, lineno, e.to_string()))?;
        store
            .insert(token, &vector)
            .map_err(|e| Error::parse(path, lineno, e.to_string()))?;
    }
    Ok(store)
}

/// Disjoint union of per-language stores into one joint space.
pub fn merge_stores(stores: &[WordVectorStore]) -> Result<WordVectorStore> {
    let Some(first) = stores.first() else {
        return Err(Error::InvalidConfig("merge of zero stores".into()));
    };
    let dimension = first.dimension();
    let mut seen_languages: Vec<String> = Vec::new();
    let mut merged = WordVectorStore::new(dimension);
    for store in stores {
        if store.dimension() != dimension {
            return Err(Error::DimensionMismatch {
                expected: dimension,
                got: store.dimension(),
            });
        }
        for lang in store.languages() {
            if seen_languages.contains(&lang) {
                return Err(Error::DuplicateLanguage(lang));
            }
            seen_languages.push(lang);
        }
    }
    for store in stores {
        for (i, token) in store.tokens().iter().enumerate() {
            merged.insert(token.clone(), store.row(i))?;
        }
    }
    Ok(merged)
}

/// Scales every vector to unit L2 norm.
pub fn unit_normalize(store: &WordVectorStore) -> Result<WordVectorStore> {
    let mut out = store.clone();
    for i in 0..out.len() {
        let row = out.row_mut(i);
        let norm = l2_norm(row);
        if norm == 0.0 {
            return Err(Error::ZeroVector(store.tokens()[i].to_string()));
        }
        row.iter_mut().for_each(|v| *v /= norm);
    }
    Ok(out)
}

/// Top-`n` neighbours of `query` by cosine similarity.
///
/// The query itself is excluded; equal similarities are ordered by rendered token.
pub fn nearest_neighbors(
    store: &WordVectorStore,
    query: &Token,
    n: usize,
    restrict: Option<&LanguageTag>,
) -> Result<Vec<(Token, f64)>> {
    let qi = store
        .index_of(query)
        .ok_or_else(|| Error::UnknownToken(query.to_string()))?;
    let q = store.row(qi);
    let mut scored: Vec<(Token, f64)> = store
        .tokens()
        .iter()
        .enumerate()
        .filter(|&(i, t)| i != qi && restrict.is_none_or(|l| t.is_language(l)))
        .map(|(i, t)| (t.clone(), cosine(q, store.row(i))))
        .collect();
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    scored.truncate(n);
    Ok(scored)
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn l2_norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Cosine similarity; zero when either vector is zero.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let denom = l2_norm(a) * l2_norm(b);
    if denom == 0.0 {
        0.0
    } else {
        dot(a, b) / denom
    }
}
