//! Pronunciation lookups and the phonetic rhyme oracle.
//!
//! Two words rhyme when some pair of their pronunciations share the same
//! phoneme suffix starting at the last stressed vowel. Stress digits are part
//! of the comparison.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use serde::{Deserialize, Serialize};

use crate::corpus::{DatasetSpec, RhymePattern};
use crate::{Error, Result};

const VOWEL_BASES: &[&str] = &[
    "AA", "AE", "AH", "AO", "AW", "AY", "EH", "ER", "EY", "IH", "IY", "OW", "OY", "UH", "UW",
];

fn split_stress(ph: &str) -> (&str, Option<u8>) {
    match ph.as_bytes().last() {
        Some(d @ b'0'..=b'2') => (&ph[..ph.len() - 1], Some(d - b'0')),
        _ => (ph, None),
    }
}

pub fn is_vowel(ph: &str) -> bool {
    VOWEL_BASES.contains(&split_stress(ph).0)
}

fn valid_phoneme(ph: &str) -> bool {
    let (base, stress) = split_stress(ph);
    if base.is_empty() || !base.bytes().all(|b| b.is_ascii_uppercase()) {
        return false;
    }
    stress.is_none() || VOWEL_BASES.contains(&base)
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Pronunciation(Vec<String>);

impl Pronunciation {
    pub fn new<S: AsRef<str>>(phonemes: &[S]) -> Result<Self> {
        if phonemes.is_empty() {
            return Err(Error::InvalidSpec("empty pronunciation".to_string()));
        }
        for p in phonemes {
            if !valid_phoneme(p.as_ref()) {
                return Err(Error::InvalidSpec(format!("bad phoneme {:?}", p.as_ref())));
            }
        }
        Ok(Pronunciation(phonemes.iter().map(|p| p.as_ref().to_string()).collect()))
    }

    pub fn phonemes(&self) -> &[String] {
        &self.0
    }
}

impl fmt::Display for Pronunciation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.join(" "))
    }
}

/// Phonemes from the last primary/secondary-stressed vowel onward. Falls back
/// to the last vowel of any stress, then to the whole pronunciation.
pub fn rhyming_part(p: &Pronunciation) -> &[String] {
    let ph = p.phonemes();
    let stressed = ph.iter().rposition(|x| {
        is_vowel(x) && matches!(split_stress(x).1, Some(1) | Some(2))
    });
    let start = stressed
        .or_else(|| ph.iter().rposition(|x| is_vowel(x)))
        .unwrap_or(0);
    &ph[start..]
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct PronDict {
    entries: BTreeMap<String, Vec<Pronunciation>>,
}

/// A skipped dictionary line.
#[derive(Clone, Debug, PartialEq)]
pub struct ParseWarning {
    pub line: usize,
    pub message: String,
}

impl PronDict {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, word: &str, p: Pronunciation) {
        let list = self.entries.entry(word.to_lowercase()).or_default();
        if !list.contains(&p) {
            list.push(p);
        }
    }

    pub fn get(&self, word: &str) -> Option<&[Pronunciation]> {
        self.entries.get(word).map(Vec::as_slice)
    }

    pub fn contains(&self, word: &str) -> bool {
        self.entries.contains_key(word)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    /// Parses cmudict text: `WORD  PH1 PH2 ...`, variants as `WORD(n)`,
    /// `;;;` comments. Bad lines are skipped and reported.
    pub fn parse(text: &str) -> Result<(Self, Vec<ParseWarning>)> {
        let mut dict = PronDict::new();
        let mut warnings = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() || line.starts_with(";;;") {
                continue;
            }
            let mut parts = line.split_whitespace();
            let head = parts.next().unwrap_or("");
            let phonemes: Vec<&str> = parts.collect();
            let word = strip_variant(head);
            let parsed = if word.is_empty() {
                Err(Error::InvalidSpec("missing headword".to_string()))
            } else {
                Pronunciation::new(&phonemes)
            };
            match parsed {
                Ok(p) => dict.insert(word, p),
                Err(e) => {
                    log::warn!("cmudict line {}: {e}; skipped", i + 1);
                    warnings.push(ParseWarning {
                        line: i + 1,
                        message: format!("{e}"),
                    });
                }
            }
        }
        if dict.is_empty() {
            return Err(Error::EmptyDictionary);
        }
        Ok((dict, warnings))
    }

    /// Dictionary where words rhyme iff they share a family id.
    pub fn from_families<'a>(words: impl IntoIterator<Item = (&'a str, usize)>) -> Self {
        let mut dict = PronDict::new();
        for (w, f) in words {
            dict.insert(w, family_pronunciation(f));
        }
        dict
    }
}

fn family_pronunciation(family: usize) -> Pronunciation {
    const CODA: &[&str] = &[
        "T", "D", "K", "G", "P", "B", "S", "Z", "F", "V", "M", "N", "NG", "L", "R", "SH", "TH",
        "CH", "JH", "ZH", "DH", "HH", "W", "Y",
    ];
    let n = VOWEL_BASES.len();
    let vowel = format!("{}1", VOWEL_BASES[family % n]);
    let mut ph: Vec<String> = alloc::vec!["S".to_string(), vowel];
    let mut rest = family / n;
    loop {
        ph.push(CODA[rest % CODA.len()].to_string());
        rest /= CODA.len();
        if rest == 0 {
            break;
        }
        rest -= 1;
    }
    Pronunciation(ph)
}

fn strip_variant(head: &str) -> &str {
    match head.find('(') {
        Some(k) if head.ends_with(')') && k > 0 => &head[..k],
        _ => head,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RhymeVerdict {
    Rhyming,
    NonRhyming,
    /// At least one word is missing from the dictionary.
    Unknown,
}

impl fmt::Display for RhymeVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RhymeVerdict::Rhyming => "rhyming",
            RhymeVerdict::NonRhyming => "non_rhyming",
            RhymeVerdict::Unknown => "unknown",
        })
    }
}

pub fn rhymes(w1: &str, w2: &str, dict: &PronDict) -> RhymeVerdict {
    let (Some(a), Some(b)) = (dict.get(w1), dict.get(w2)) else {
        return RhymeVerdict::Unknown;
    };
    let hit = a
        .iter()
        .any(|p1| b.iter().any(|p2| rhyming_part(p1) == rhyming_part(p2)));
    if hit {
        RhymeVerdict::Rhyming
    } else {
        RhymeVerdict::NonRhyming
    }
}

/// True iff both words are at least `k` characters long and share their last
/// `k` characters.
pub fn grapheme_k(w1: &str, w2: &str, k: usize) -> bool {
    let a: Vec<char> = w1.chars().collect();
    let b: Vec<char> = w2.chars().collect();
    if k == 0 || a.len() < k || b.len() < k {
        return false;
    }
    a[a.len() - k..] == b[b.len() - k..]
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strictness {
    /// Only same-letter lines are constrained.
    #[default]
    Lenient,
    /// Additionally, lines with different letters must be verified non-rhyming.
    Strict,
}

pub fn matches_pattern(endings: &[&str], pattern: &RhymePattern, dict: &PronDict) -> Result<bool> {
    matches_pattern_with(endings, pattern, dict, Strictness::Lenient)
}

pub fn matches_pattern_with(
    endings: &[&str],
    pattern: &RhymePattern,
    dict: &PronDict,
    strictness: Strictness,
) -> Result<bool> {
    if endings.len() != pattern.len() {
        return Err(Error::LengthMismatch {
            expected: pattern.len(),
            found: endings.len(),
        });
    }
    let letters = pattern.letters();
    for i in 0..endings.len() {
        for j in i + 1..endings.len() {
            let verdict = rhymes(endings[i], endings[j], dict);
            let ok = if letters[i] == letters[j] {
                verdict == RhymeVerdict::Rhyming
            } else {
                strictness == Strictness::Lenient || verdict == RhymeVerdict::NonRhyming
            };
            if !ok {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Patterns of `spec` satisfied by `endings`; empty when none is.
pub fn accepted_patterns<'a>(
    endings: &[&str],
    spec: &'a DatasetSpec,
    dict: &PronDict,
    strictness: Strictness,
) -> Vec<&'a RhymePattern> {
    spec.accepted_patterns
        .iter()
        .filter(|p| matches_pattern_with(endings, p, dict, strictness).unwrap_or(false))
        .collect()
}

pub fn accepted(endings: &[&str], spec: &DatasetSpec, dict: &PronDict) -> bool {
    !accepted_patterns(endings, spec, dict, Strictness::Lenient).is_empty()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    const MINI: &str = ";;; test excerpt
CAT  K AE1 T
HAT  HH AE1 T
DOG  D AO1 G
LOG  L AO1 G
LIVE  L AY1 V
LIVE(2)  L IH1 V
GIVE  G IH1 V
FIVE  F AY1 V
TODAY  T AH0 D EY1
DAY  D EY1
SUN  S AH1 N
TREE  T R IY1
NIGHT  N AY1 T
LIGHT  L AY1 T
";

    fn dict() -> PronDict {
        PronDict::parse(MINI).unwrap().0
    }

    fn pron(s: &str) -> Pronunciation {
        Pronunciation::new(&s.split_whitespace().collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn parses_entries_variants_and_comments() {
        let d = dict();
        assert_eq!(d.get("cat").unwrap(), &[pron("K AE1 T")]);
        assert_eq!(d.get("live").unwrap().len(), 2);
        assert!(!d.contains(";;;"));
        assert_eq!(d.len(), 13);
    }

    #[test]
    fn bad_lines_warn_and_empty_is_error() {
        let (d, w) = PronDict::parse("CAT  K AE1 T\nBAD  K3 X\n").unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(w.len(), 1);
        assert_eq!(w[0].line, 2);
        assert_eq!(PronDict::parse(";;; only\n"), Err(Error::EmptyDictionary));
    }

    #[test]
    fn stress_digit_only_on_vowels() {
        assert!(Pronunciation::new(&["K1"]).is_err());
        assert!(Pronunciation::new::<&str>(&[]).is_err());
        assert!(Pronunciation::new(&["AE0"]).is_ok());
    }

    #[test]
    fn rhyming_part_examples() {
        assert_eq!(rhyming_part(&pron("K AE1 T")), &["AE1", "T"]);
        assert_eq!(rhyming_part(&pron("T AH0 D EY1")), &["EY1"]);
        assert_eq!(rhyming_part(&pron("HH M")), &["HH", "M"]);
        // no stressed vowel: last vowel
        assert_eq!(rhyming_part(&pron("AH0 B AH0 T")), &["AH0", "T"]);
        // secondary stress after primary
        assert_eq!(rhyming_part(&pron("R EY1 N B OW2")), &["OW2"]);
    }

    #[test]
    fn verdicts() {
        let d = dict();
        assert_eq!(rhymes("cat", "hat", &d), RhymeVerdict::Rhyming);
        assert_eq!(rhymes("cat", "dog", &d), RhymeVerdict::NonRhyming);
        assert_eq!(rhymes("cat", "zzqx", &d), RhymeVerdict::Unknown);
        assert_eq!(rhymes("live", "give", &d), RhymeVerdict::Rhyming);
        assert_eq!(rhymes("live", "five", &d), RhymeVerdict::Rhyming);
        assert_eq!(rhymes("give", "five", &d), RhymeVerdict::NonRhyming);
        assert_eq!(rhymes("today", "day", &d), RhymeVerdict::Rhyming);
    }

    #[test]
    fn grapheme_examples() {
        assert!(grapheme_k("night", "light", 3));
        assert!(!grapheme_k("day", "dog", 1));
        assert!(!grapheme_k("a", "spa", 2));
        assert!(grapheme_k("spa", "spa", 3));
    }

    #[test]
    fn pattern_examples() {
        let d = dict();
        let aabb = RhymePattern::new("AABB").unwrap();
        assert!(matches_pattern(&["cat", "hat", "dog", "log"], &aabb, &d).unwrap());
        assert!(!matches_pattern(&["cat", "dog", "hat", "log"], &aabb, &d).unwrap());
        assert!(!matches_pattern(&["cat", "zzqx", "dog", "log"], &aabb, &d).unwrap());
        assert!(matches_pattern(&["cat", "hat"], &aabb, &d).is_err());
        // relabeling invariance
        let bbaa = RhymePattern::new("BBAA").unwrap();
        assert!(matches_pattern(&["cat", "hat", "dog", "log"], &bbaa, &d).unwrap());
    }

    #[test]
    fn lenient_vs_strict() {
        let d = dict();
        let aabb = RhymePattern::new("AABB").unwrap();
        let all_same = ["cat", "hat", "cat", "hat"];
        assert!(matches_pattern_with(&all_same, &aabb, &d, Strictness::Lenient).unwrap());
        assert!(!matches_pattern_with(&all_same, &aabb, &d, Strictness::Strict).unwrap());
    }

    #[test]
    fn accepted_examples() {
        let d = dict();
        let sonnet = DatasetSpec::sonnet();
        assert!(accepted(&["cat", "dog", "hat", "log"], &sonnet, &d));
        assert!(accepted(&["cat", "dog", "log", "hat"], &sonnet, &d));
        assert!(!accepted(&["cat", "dog", "sun", "tree"], &sonnet, &d));
        let lim = DatasetSpec::limerick();
        assert!(accepted(&["night", "light", "dog", "log", "cat"], &lim, &d) == false);
        assert!(accepted(&["night", "light", "dog", "log", "night"], &lim, &d));
        let hits = accepted_patterns(&["cat", "hat", "dog", "log"], &sonnet, &d, Strictness::Lenient);
        assert_eq!(hits, vec![&sonnet.accepted_patterns[0]]);
    }

    #[test]
    fn family_dictionary_rhymes_within_family_only() {
        let d = PronDict::from_families([("ab", 0), ("cb", 0), ("xy", 1), ("zz", 400)]);
        assert_eq!(rhymes("ab", "cb", &d), RhymeVerdict::Rhyming);
        assert_eq!(rhymes("ab", "xy", &d), RhymeVerdict::NonRhyming);
        assert_eq!(rhymes("zz", "xy", &d), RhymeVerdict::NonRhyming);
    }

    #[test]
    fn family_pronunciations_are_distinct() {
        let parts: alloc::collections::BTreeSet<Vec<String>> = (0..2000)
            .map(|f| rhyming_part(&family_pronunciation(f)).to_vec())
            .collect();
        assert_eq!(parts.len(), 2000);
    }
}
