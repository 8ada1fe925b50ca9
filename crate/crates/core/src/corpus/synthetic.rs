//! Synthetic rhyme corpora with known ground truth.
//!
//! Each rhyme family is a distinct 3-character suffix; ending words of a
//! family are `prefix + onset + suffix`. Body words alternate consonants and
//! vowels so they can never end in a family suffix. The last-3-characters
//! baseline is therefore an exact rhyme oracle on these corpora.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Corpus, DatasetSpec, Poem, RhymePattern};
use crate::phonetics::PronDict;
use crate::rng::{self, streams};
use crate::{Error, Result};

const VOWELS: &[u8] = b"aeiou";
const CODAS: &[&str] = &[
    "st", "ck", "nd", "ng", "rt", "ll", "nt", "mp", "sh", "th", "rk", "lt", "ft", "sk", "rn",
    "ss", "pt", "lk", "rd", "nk",
];
const CONSONANTS: &[u8] = b"bcdfghklmnprstvwz";
const ONSETS: &[&str] = &[
    "b", "bl", "br", "c", "cl", "cr", "d", "dr", "f", "fl", "fr", "g", "gl", "gr", "h", "j", "k",
    "l", "m", "n", "p", "pl", "pr", "qu", "r", "s", "sc", "sk", "sl", "sm", "sn", "sp", "st", "sw",
    "t", "th", "tr", "v", "w", "wh", "y", "z",
];
const PREFIXES: &[&str] = &["", "be", "re", "de", "un", "con", "mis", "out", "a", "o"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub seed: u64,
    /// Poems in the train split.
    pub n_poems: usize,
    pub n_families: usize,
    pub pattern: RhymePattern,
    pub body_vocab: usize,
    pub words_per_family: usize,
    pub dev_poems: usize,
    pub test_poems: usize,
    /// Body words per line are drawn uniformly from `1..=max_body_words`.
    pub max_body_words: usize,
}

impl SyntheticSpec {
    pub fn new(seed: u64, n_poems: usize, n_families: usize, pattern: &str, body_vocab: usize) -> Result<Self> {
        Ok(SyntheticSpec {
            seed,
            n_poems,
            n_families,
            pattern: RhymePattern::new(pattern)?,
            body_vocab,
            words_per_family: 25,
            dev_poems: (n_poems / 8).max(1),
            test_poems: (n_poems / 8).max(1),
            max_body_words: 3,
        })
    }

    pub fn dataset_spec(&self) -> DatasetSpec {
        DatasetSpec {
            name: format!("synthetic-{}", self.pattern),
            lines_per_poem: self.pattern.len(),
            accepted_patterns: alloc::vec![self.pattern.clone()],
            vocab_cap: None,
            source_block_lines: None,
            tail_only: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticCorpus {
    pub corpus: Corpus,
    /// Ending word -> rhyme family id.
    pub families: BTreeMap<String, usize>,
    /// Family id -> shared suffix.
    pub suffixes: Vec<String>,
}

impl SyntheticCorpus {
    /// Pronunciations in which words rhyme exactly when they share a family.
    pub fn pron_dict(&self) -> PronDict {
        PronDict::from_families(self.families.iter().map(|(w, f)| (w.as_str(), *f)))
    }

    pub fn family(&self, word: &str) -> Option<usize> {
        self.families.get(word).copied()
    }
}

fn suffix_candidates() -> Vec<String> {
    let mut out = Vec::new();
    for coda in CODAS {
        for &v in VOWELS {
            out.push(format!("{}{}", v as char, coda));
        }
    }
    let known: BTreeSet<String> = out.iter().cloned().collect();
    for &v in VOWELS {
        for &a in CONSONANTS {
            for &b in CONSONANTS {
                let s = format!("{}{}{}", v as char, a as char, b as char);
                if !known.contains(&s) {
                    out.push(s);
                }
            }
        }
    }
    out
}

fn body_word<R: Rng + ?Sized>(rng: &mut R) -> String {
    let syllables = rng.gen_range(2..=3);
    let mut w = String::new();
    for _ in 0..syllables {
        w.push(CONSONANTS[rng.gen_range(0..CONSONANTS.len())] as char);
        w.push(VOWELS[rng.gen_range(0..VOWELS.len())] as char);
    }
    if rng.gen_bool(0.5) {
        w.push(CONSONANTS[rng.gen_range(0..CONSONANTS.len())] as char);
    }
    w
}

pub fn make_synthetic_corpus(spec: &SyntheticSpec) -> Result<SyntheticCorpus> {
    let letters: Vec<u8> = spec.pattern.letters().to_vec();
    let classes: BTreeSet<u8> = letters.iter().copied().collect();
    if spec.n_families < classes.len() {
        return Err(Error::Infeasible(format!(
            "pattern {} needs {} families, only {} requested",
            spec.pattern,
            classes.len(),
            spec.n_families
        )));
    }
    let candidates = suffix_candidates();
    if spec.n_families > candidates.len() {
        return Err(Error::Infeasible(format!(
            "at most {} families are available",
            candidates.len()
        )));
    }
    let max_words = ONSETS.len() * PREFIXES.len();
    if spec.words_per_family == 0 || spec.words_per_family > max_words {
        return Err(Error::Infeasible(format!(
            "words_per_family must be in 1..={max_words}"
        )));
    }
    if spec.body_vocab == 0 || spec.n_poems == 0 || spec.max_body_words == 0 {
        return Err(Error::Infeasible("sizes must be positive".to_string()));
    }

    let mut rng = rng::stream(spec.seed, streams::SYNTHETIC);

    let mut pool = candidates;
    pool.shuffle(&mut rng);
    let suffixes: Vec<String> = pool.into_iter().take(spec.n_families).collect();

    let mut stems: Vec<String> = Vec::with_capacity(max_words);
    for p in PREFIXES {
        for o in ONSETS {
            stems.push(format!("{p}{o}"));
        }
    }
    let mut family_words: Vec<Vec<String>> = Vec::with_capacity(spec.n_families);
    let mut families = BTreeMap::new();
    for (f, suffix) in suffixes.iter().enumerate() {
        stems.shuffle(&mut rng);
        let words: Vec<String> = stems
            .iter()
            .take(spec.words_per_family)
            .map(|s| format!("{s}{suffix}"))
            .collect();
        for w in &words {
            families.insert(w.clone(), f);
        }
        family_words.push(words);
    }

    let mut body: BTreeSet<String> = BTreeSet::new();
    let mut attempts = 0usize;
    while body.len() < spec.body_vocab {
        let w = body_word(&mut rng);
        if !families.contains_key(&w) {
            body.insert(w);
        }
        attempts += 1;
        if attempts > spec.body_vocab * 1000 {
            return Err(Error::Infeasible("could not draw enough body words".to_string()));
        }
    }
    let body: Vec<String> = body.into_iter().collect();

    let class_list: Vec<u8> = classes.into_iter().collect();
    let make_poem = |rng: &mut rng::Rng| -> Poem {
        let mut fam_ids: Vec<usize> = (0..spec.n_families).collect();
        fam_ids.shuffle(rng);
        let mut endings: Vec<String> = alloc::vec![String::new(); letters.len()];
        for (k, &letter) in class_list.iter().enumerate() {
            let words = &family_words[fam_ids[k]];
            let slots: Vec<usize> = (0..letters.len()).filter(|&i| letters[i] == letter).collect();
            let chosen: Vec<&String> = if words.len() >= slots.len() {
                words.choose_multiple(rng, slots.len()).collect()
            } else {
                slots.iter().map(|_| words.choose(rng).expect("nonempty")).collect()
            };
            for (slot, w) in slots.into_iter().zip(chosen) {
                endings[slot] = w.clone();
            }
        }
        let lines = endings
            .into_iter()
            .map(|end| {
                let n = rng.gen_range(1..=spec.max_body_words);
                let mut line: Vec<String> = (0..n)
                    .map(|_| body.choose(rng).expect("nonempty").clone())
                    .collect();
                line.push(end);
                line
            })
            .collect();
        Poem::new(lines)
    };

    let train = (0..spec.n_poems).map(|_| make_poem(&mut rng)).collect();
    let dev = (0..spec.dev_poems).map(|_| make_poem(&mut rng)).collect();
    let test = (0..spec.test_poems).map(|_| make_poem(&mut rng)).collect();
    let corpus = Corpus::new(spec.dataset_spec(), train, dev, test)?;
    Ok(SyntheticCorpus {
        corpus,
        families,
        suffixes,
    })
}
