//! Fixed-length-stanza poetry corpora.
//!
//! Split files are UTF-8 text: every poem is a block of lines separated from
//! the next by a blank line, tokens are separated by spaces and are already
//! lowercased. The loader performs no further normalization.

mod synthetic;
mod vocab;

pub use synthetic::{make_synthetic_corpus, SyntheticCorpus, SyntheticSpec};
pub use vocab::{build_vocab, Vocab, LINE_START, POEM_START, RESERVED, UNK};

use alloc::borrow::ToOwned;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A rhyme scheme such as `AABB`: equal letters mark lines whose ending
/// words must rhyme.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct RhymePattern(String);

impl RhymePattern {
    pub fn new(s: &str) -> Result<Self> {
        if s.is_empty() || !s.chars().all(|c| c.is_ascii_uppercase()) {
            return Err(Error::InvalidSpec(format!(
                "rhyme pattern {s:?} must be a nonempty string of uppercase letters"
            )));
        }
        Ok(RhymePattern(s.to_string()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letters(&self) -> &[u8] {
        self.0.as_bytes()
    }

    /// Number of distinct letters (rhyme classes).
    pub fn classes(&self) -> usize {
        self.0.bytes().collect::<BTreeSet<_>>().len()
    }
}

impl TryFrom<String> for RhymePattern {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        RhymePattern::new(&s)
    }
}

impl From<RhymePattern> for String {
    fn from(p: RhymePattern) -> String {
        p.0
    }
}

impl fmt::Display for RhymePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetSpec {
    pub name: String,
    pub lines_per_poem: usize,
    pub accepted_patterns: Vec<RhymePattern>,
    #[serde(default)]
    pub vocab_cap: Option<usize>,
    /// When set, split files hold blocks of this many lines (e.g. 14-line
    /// sonnets) that are cut into consecutive `lines_per_poem` stanzas.
    /// Leftover lines at the end of a block are the tail stanza; `tail_only`
    /// selects that tail instead of the leading stanzas.
    #[serde(default)]
    pub source_block_lines: Option<usize>,
    #[serde(default)]
    pub tail_only: bool,
}

impl DatasetSpec {
    pub fn new(name: &str, lines_per_poem: usize, patterns: &[&str]) -> Result<Self> {
        let spec = DatasetSpec {
            name: name.to_string(),
            lines_per_poem,
            accepted_patterns: patterns
                .iter()
                .map(|p| RhymePattern::new(p))
                .collect::<Result<_>>()?,
            vocab_cap: None,
            source_block_lines: None,
            tail_only: false,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Shakespeare sonnet quatrains: 14-line source blocks, three quatrains
    /// each, couplet dropped.
    pub fn sonnet() -> Self {
        let mut s = Self::new("sonnet", 4, &["AABB", "ABAB", "ABBA"]).expect("valid builtin");
        s.source_block_lines = Some(14);
        s
    }

    /// The closing couplets of 14-line sonnets as two-line units.
    pub fn sonnet_couplets() -> Self {
        let mut s = Self::new("sonnet-couplet", 2, &["AA"]).expect("valid builtin");
        s.source_block_lines = Some(14);
        s.tail_only = true;
        s
    }

    pub fn limerick() -> Self {
        Self::new("limerick", 5, &["AABBA"]).expect("valid builtin")
    }

    pub fn builtin(name: &str) -> Option<Self> {
        match name {
            "sonnet" => Some(Self::sonnet()),
            "sonnet-couplet" => Some(Self::sonnet_couplets()),
            "limerick" => Some(Self::limerick()),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.lines_per_poem < 2 {
            return Err(Error::InvalidSpec(format!(
                "lines_per_poem must be at least 2, got {}",
                self.lines_per_poem
            )));
        }
        if self.accepted_patterns.is_empty() {
            return Err(Error::InvalidSpec("no accepted patterns".to_string()));
        }
        for p in &self.accepted_patterns {
            RhymePattern::new(p.as_str())?;
            if p.len() != self.lines_per_poem {
                return Err(Error::InvalidSpec(format!(
                    "pattern {p} has length {} but poems have {} lines",
                    p.len(),
                    self.lines_per_poem
                )));
            }
        }
        if let Some(block) = self.source_block_lines {
            if block < self.lines_per_poem {
                return Err(Error::InvalidSpec(format!(
                    "source blocks of {block} lines cannot hold {}-line poems",
                    self.lines_per_poem
                )));
            }
        }
        if self.vocab_cap == Some(0) {
            return Err(Error::InvalidSpec("vocab_cap must be positive".to_string()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Poem {
    pub lines: Vec<Vec<String>>,
    #[serde(default)]
    pub source_id: Option<String>,
}

impl Poem {
    pub fn new(lines: Vec<Vec<String>>) -> Self {
        Poem {
            lines,
            source_id: None,
        }
    }

    /// Builds a poem from space-separated line strings.
    pub fn from_lines(lines: &[&str]) -> Self {
        Poem::new(
            lines
                .iter()
                .map(|l| l.split_whitespace().map(str::to_owned).collect())
                .collect(),
        )
    }

    pub fn validate(&self, lines_per_poem: usize) -> Result<()> {
        if self.lines.len() != lines_per_poem {
            return Err(Error::InvalidPoem(format!(
                "expected {lines_per_poem} lines, found {}",
                self.lines.len()
            )));
        }
        for (i, line) in self.lines.iter().enumerate() {
            if line.is_empty() {
                return Err(Error::InvalidPoem(format!("line {i} is empty")));
            }
            if line.iter().any(|t| t.is_empty() || t.chars().any(char::is_whitespace)) {
                return Err(Error::InvalidPoem(format!("line {i} has a malformed token")));
            }
        }
        Ok(())
    }

    pub fn num_tokens(&self) -> usize {
        self.lines.iter().map(Vec::len).sum()
    }

    pub fn tokens(&self) -> impl Iterator<Item = &str> {
        self.lines.iter().flatten().map(String::as_str)
    }
}

/// Last token of each line, in line order.
pub fn ending_words(poem: &Poem) -> Vec<&str> {
    poem.lines
        .iter()
        .map(|l| l.last().map(String::as_str).unwrap_or(""))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Corpus {
    pub spec: DatasetSpec,
    pub train: Vec<Poem>,
    pub dev: Vec<Poem>,
    pub test: Vec<Poem>,
}

impl Corpus {
    pub fn new(spec: DatasetSpec, train: Vec<Poem>, dev: Vec<Poem>, test: Vec<Poem>) -> Result<Self> {
        spec.validate()?;
        let corpus = Corpus {
            spec,
            train,
            dev,
            test,
        };
        for (name, split) in corpus.splits() {
            for (k, p) in split.iter().enumerate() {
                p.validate(corpus.spec.lines_per_poem)
                    .map_err(|e| Error::InvalidPoem(format!("{name} poem {k}: {e}")))?;
            }
        }
        corpus.check_disjoint()?;
        Ok(corpus)
    }

    pub fn splits(&self) -> [(&'static str, &Vec<Poem>); 3] {
        [("train", &self.train), ("valid", &self.dev), ("test", &self.test)]
    }

    fn check_disjoint(&self) -> Result<()> {
        let mut owner: BTreeMap<&str, &str> = BTreeMap::new();
        for (name, split) in self.splits() {
            for id in split.iter().filter_map(|p| p.source_id.as_deref()) {
                if let Some(prev) = owner.insert(id, name) {
                    if prev != name {
                        return Err(Error::InvalidPoem(format!(
                            "source id {id} appears in both {prev} and {name}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Parses one split file. `split` only labels errors and source ids.
pub fn parse_split(text: &str, spec: &DatasetSpec, split: &str) -> Result<Vec<Poem>> {
    let t = spec.lines_per_poem;
    let mut poems = Vec::new();
    for (block_idx, (first_line, block)) in blocks(text).into_iter().enumerate() {
        let n = block.len();
        let lines: Vec<Vec<String>> = block
            .iter()
            .map(|l| l.split_whitespace().map(str::to_owned).collect())
            .collect();
        match spec.source_block_lines {
            Some(src) if n == src && src != t => {
                let sid = format!("{split}:{block_idx}");
                let full = src / t;
                let stanzas: Vec<Vec<Vec<String>>> = if spec.tail_only {
                    alloc::vec![lines[src - t..].to_vec()]
                } else {
                    (0..full).map(|k| lines[k * t..(k + 1) * t].to_vec()).collect()
                };
                for stanza in stanzas {
                    poems.push(Poem {
                        lines: stanza,
                        source_id: Some(sid.clone()),
                    });
                }
            }
            _ if n == t => poems.push(Poem::new(lines)),
            _ => {
                let expected = match spec.source_block_lines {
                    Some(src) if src != t => format!("{t} or {src}"),
                    _ => format!("{t}"),
                };
                return Err(Error::MalformedBlock {
                    split: split.to_string(),
                    block: block_idx,
                    first_line,
                    expected,
                    found: n,
                });
            }
        }
    }
    if poems.is_empty() {
        return Err(Error::NoPoems {
            split: split.to_string(),
        });
    }
    Ok(poems)
}

/// Groups nonblank lines into blocks; returns 1-based first line numbers.
fn blocks(text: &str) -> Vec<(usize, Vec<&str>)> {
    let mut out = Vec::new();
    let mut cur: Vec<&str> = Vec::new();
    let mut start = 0;
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            if !cur.is_empty() {
                out.push((start, core::mem::take(&mut cur)));
            }
        } else {
            if cur.is_empty() {
                start = i + 1;
            }
            cur.push(line);
        }
    }
    if !cur.is_empty() {
        out.push((start, cur));
    }
    out
}

/// Inverse of [`parse_split`] for `lines_per_poem`-line blocks.
pub fn format_split(poems: &[Poem]) -> String {
    let mut out = String::new();
    for (k, p) in poems.iter().enumerate() {
        if k > 0 {
            out.push('\n');
        }
        for line in &p.lines {
            out.push_str(&line.join(" "));
            out.push('\n');
        }
    }
    out
}

/// Train-split word frequencies.
pub fn word_counts(poems: &[Poem]) -> BTreeMap<&str, usize> {
    let mut counts = BTreeMap::new();
    for tok in poems.iter().flat_map(Poem::tokens) {
        *counts.entry(tok).or_insert(0) += 1;
    }
    counts
}

/// Words ordered by descending frequency, ties broken lexicographically.
pub fn ranked_words<'a>(counts: &BTreeMap<&'a str, usize>) -> Vec<&'a str> {
    let mut ranked: Vec<(&str, usize)> = counts.iter().map(|(w, c)| (*w, *c)).collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
    ranked.into_iter().map(|(w, _)| w).collect()
}

/// Keeps only poems whose every token is among the `cap` most frequent
/// train words.
///
/// Dev and test poems are filtered against the vocabulary that survives in the
/// filtered train split, so a second application is a no-op. A cap at least
/// as large as the train vocabulary leaves the corpus unchanged.
pub fn filter_by_vocab(corpus: &Corpus, cap: usize) -> Result<Corpus> {
    if cap == 0 {
        return Err(Error::InvalidConfig("vocabulary cap must be at least 1".to_string()));
    }
    if cap >= word_counts(&corpus.train).len() {
        return Ok(corpus.clone());
    }
    let mut cur = corpus.clone();
    loop {
        let keep: BTreeSet<String> = {
            let counts = word_counts(&cur.train);
            ranked_words(&counts)
                .into_iter()
                .take(cap)
                .map(str::to_owned)
                .collect()
        };
        let inside = |p: &Poem| p.tokens().all(|t| keep.contains(t));
        let next = Corpus {
            spec: cur.spec.clone(),
            train: cur.train.iter().filter(|p| inside(p)).cloned().collect(),
            dev: cur.dev.iter().filter(|p| inside(p)).cloned().collect(),
            test: cur.test.iter().filter(|p| inside(p)).cloned().collect(),
        };
        if next == cur {
            return Ok(next);
        }
        cur = next;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn poem(lines: &[&str]) -> Poem {
        Poem::from_lines(lines)
    }

    #[test]
    fn ending_words_examples() {
        let p = poem(&["a b", "c d"]);
        assert_eq!(ending_words(&p), vec!["b", "d"]);
        let p = poem(&["x", "y"]);
        assert_eq!(ending_words(&p), vec!["x", "y"]);
        let p = poem(&["a", "b c", "d", "e f g", "h"]);
        assert_eq!(ending_words(&p).len(), 5);
    }

    #[test]
    fn spec_validation() {
        assert!(DatasetSpec::new("x", 4, &["AABB", "ABAB"]).is_ok());
        assert!(DatasetSpec::new("x", 1, &["A"]).is_err());
        assert!(DatasetSpec::new("x", 4, &["AAB"]).is_err());
        assert!(DatasetSpec::new("x", 4, &["aabb"]).is_err());
        assert!(DatasetSpec::new("x", 4, &[]).is_err());
        assert_eq!(DatasetSpec::limerick().lines_per_poem, 5);
        assert_eq!(DatasetSpec::sonnet().accepted_patterns.len(), 3);
    }

    #[test]
    fn parses_blocks_and_names_bad_block() {
        let spec = DatasetSpec::new("t", 2, &["AA"]).unwrap();
        let text = "a b\nc d\n\ne f\ng h\n";
        let poems = parse_split(text, &spec, "train").unwrap();
        assert_eq!(poems.len(), 2);
        assert_eq!(poems[1].lines[0], vec!["e", "f"]);

        let bad = "a b\nc d\n\ne f\n";
        match parse_split(bad, &spec, "train") {
            Err(Error::MalformedBlock { block, found, first_line, .. }) => {
                assert_eq!((block, found, first_line), (1, 1, 4));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn empty_file_has_no_poems() {
        let spec = DatasetSpec::limerick();
        let err = parse_split("\n\n", &spec, "test").unwrap_err();
        assert!(format!("{err}").contains("no poems found"));
    }

    #[test]
    fn sonnet_blocks_split_into_quatrains() {
        let mut text = String::new();
        for i in 0..14 {
            text.push_str(&format!("w{i} end{i}\n"));
        }
        let quatrains = parse_split(&text, &DatasetSpec::sonnet(), "train").unwrap();
        assert_eq!(quatrains.len(), 3);
        assert_eq!(ending_words(&quatrains[2]), vec!["end8", "end9", "end10", "end11"]);
        assert!(quatrains.iter().all(|q| q.source_id.as_deref() == Some("train:0")));

        let couplets = parse_split(&text, &DatasetSpec::sonnet_couplets(), "train").unwrap();
        assert_eq!(couplets.len(), 1);
        assert_eq!(ending_words(&couplets[0]), vec!["end12", "end13"]);
    }

    #[test]
    fn format_then_parse_round_trips() {
        let spec = DatasetSpec::new("t", 3, &["AAA"]).unwrap();
        let poems = vec![poem(&["a b", "c", "d e f"]), poem(&["g", "h i", "j"])];
        let text = format_split(&poems);
        assert_eq!(parse_split(&text, &spec, "train").unwrap(), poems);
    }

    #[test]
    fn splits_must_be_disjoint_by_source() {
        let spec = DatasetSpec::new("t", 2, &["AA"]).unwrap();
        let mut a = poem(&["a", "b"]);
        a.source_id = Some("s1".into());
        let b = a.clone();
        assert!(Corpus::new(spec.clone(), vec![a.clone()], vec![b], vec![]).is_err());
        assert!(Corpus::new(spec, vec![a.clone(), a], vec![], vec![]).is_ok());
    }

    fn toy_corpus() -> Corpus {
        // counts: the=4, cat=2, sat=2, dog=1, hapax=1, ran=1
        let spec = DatasetSpec::new("t", 2, &["AA"]).unwrap();
        Corpus::new(
            spec,
            vec![
                poem(&["the cat", "the sat"]),
                poem(&["the cat", "the sat"]),
                poem(&["dog hapax", "ran"]),
            ],
            vec![poem(&["the cat", "dog"])],
            vec![],
        )
        .unwrap()
    }

    #[test]
    fn filter_drops_poem_with_word_outside_cap() {
        // Hand-ranked: the(4) cat(2) sat(2) dog(1) hapax(1) ran(1);
        // top-5 keeps everything but `ran`, so the third poem goes.
        let c = toy_corpus();
        let f = filter_by_vocab(&c, 5).unwrap();
        assert_eq!(f.train.len(), 2);
        // `dog` survived the cap but no longer appears in the filtered train
        // split, so the dev poem using it is dropped too.
        assert!(f.dev.is_empty());
    }

    #[test]
    fn filter_with_full_cap_is_identity_and_idempotent() {
        let c = toy_corpus();
        assert_eq!(filter_by_vocab(&c, 6).unwrap(), c);
        assert_eq!(filter_by_vocab(&c, 100).unwrap(), c);
        let mut unseen = c.clone();
        unseen.dev.push(poem(&["a novel", "word"]));
        assert_eq!(filter_by_vocab(&unseen, 6).unwrap(), unseen);
        let once = filter_by_vocab(&c, 3).unwrap();
        assert_eq!(filter_by_vocab(&once, 3).unwrap(), once);
    }

    #[test]
    fn ranked_ties_are_lexicographic() {
        let c = toy_corpus();
        let counts = word_counts(&c.train);
        assert_eq!(ranked_words(&counts), vec!["the", "cat", "sat", "dog", "hapax", "ran"]);
    }
}
