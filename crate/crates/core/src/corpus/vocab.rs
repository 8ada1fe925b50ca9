use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::{ranked_words, word_counts, Corpus, Poem};

pub const UNK: u32 = 0;
/// Terminates right-to-left line generation.
pub const LINE_START: u32 = 1;
/// First input of the ending-word sequence.
pub const POEM_START: u32 = 2;
pub const RESERVED: usize = 3;

const RESERVED_TOKENS: [&str; RESERVED] = ["<unk>", "<s>", "<poem>"];

/// Word/id maps. Ids `0..RESERVED` are the structural markers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vocab {
    words: Vec<String>,
    index: BTreeMap<String, u32>,
}

impl Vocab {
    /// Builds a vocabulary from words in id order (reserved markers are
    /// prepended). Duplicates and marker strings are ignored.
    pub fn from_words<'a>(words: impl IntoIterator<Item = &'a str>) -> Self {
        let mut v = Vocab {
            words: RESERVED_TOKENS.iter().map(|s| s.to_string()).collect(),
            index: BTreeMap::new(),
        };
        for w in words {
            if RESERVED_TOKENS.contains(&w) || v.index.contains_key(w) {
                continue;
            }
            v.index.insert(w.to_string(), v.words.len() as u32);
            v.words.push(w.to_string());
        }
        v
    }

    /// Total size including reserved markers.
    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.len() == RESERVED
    }

    /// Non-reserved words in id order.
    pub fn words(&self) -> &[String] {
        &self.words[RESERVED..]
    }

    pub fn id(&self, word: &str) -> u32 {
        self.index.get(word).copied().unwrap_or(UNK)
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }

    pub fn word(&self, id: u32) -> &str {
        &self.words[id as usize]
    }

    pub fn encode_poem(&self, poem: &Poem) -> Vec<Vec<u32>> {
        poem.lines
            .iter()
            .map(|l| l.iter().map(|w| self.id(w)).collect())
            .collect()
    }

    pub fn decode_line(&self, ids: &[u32]) -> Vec<String> {
        ids.iter().map(|&i| self.word(i).to_string()).collect()
    }
}

/// Vocabulary over the train split; with a cap, only the `cap` most frequent
/// words (ties lexicographic) get ids and everything else maps to UNK.
pub fn build_vocab(corpus: &Corpus, cap: Option<usize>) -> Vocab {
    let counts = word_counts(&corpus.train);
    let ranked = ranked_words(&counts);
    let n = cap.unwrap_or(ranked.len()).min(ranked.len());
    Vocab::from_words(ranked.into_iter().take(n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::DatasetSpec;
    use alloc::vec;

    fn corpus() -> Corpus {
        // a:5 b:3 c:1
        let spec = DatasetSpec::new("t", 3, &["AAA"]).unwrap();
        Corpus::new(
            spec,
            vec![
                Poem::from_lines(&["a a", "a b", "c"]),
                Poem::from_lines(&["a", "b b", "a"]),
            ],
            vec![Poem::from_lines(&["devonly", "a", "b"])],
            vec![],
        )
        .unwrap()
    }

    #[test]
    fn cap_keeps_most_frequent() {
        let v = build_vocab(&corpus(), Some(2));
        assert_eq!(v.words(), &["a".to_string(), "b".to_string()]);
        assert_eq!(v.id("c"), UNK);
        assert_ne!(v.id("a"), UNK);
    }

    #[test]
    fn no_cap_includes_all_train_words() {
        let v = build_vocab(&corpus(), None);
        assert_eq!(v.words().len(), 3);
        assert_eq!(v.id("devonly"), UNK);
    }

    #[test]
    fn real_ids_never_collide_with_reserved() {
        let v = Vocab::from_words(["<unk>", "x", "<s>", "y", "x"]);
        assert_eq!(v.len(), RESERVED + 2);
        for w in v.words() {
            assert!(v.id(w) as usize >= RESERVED);
            assert_eq!(v.word(v.id(w)), w);
        }
    }
}
