//! Sampling efficiency, held-out likelihood and the rhyme-pair probe.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{ending_words, DatasetSpec, Poem};
use crate::discriminator::WordEncoder;
use crate::generator::{Generator, Policy, SampleConfig};
use crate::nn::math::cosine;
use crate::phonetics::{accepted_patterns, grapheme_k, rhymes, PronDict, RhymeVerdict, Strictness};
use crate::rng::{self, streams};
use crate::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplingReport {
    pub schema_version: u32,
    pub n_samples: usize,
    pub n_accepted: usize,
    pub fraction: f64,
    /// `1 / fraction`; `None` when nothing was accepted.
    pub expected_samples: Option<f64>,
    pub expected_samples_infinite: bool,
    pub per_pattern: BTreeMap<String, usize>,
    pub temperature: Option<f64>,
    pub seed: Option<u64>,
    pub strictness: Strictness,
}

/// Draws `n` ending tuples from `draw` and checks each against the spec.
pub fn sampling_report<F>(
    spec: &DatasetSpec,
    dict: &PronDict,
    n: usize,
    strictness: Strictness,
    mut draw: F,
) -> Result<SamplingReport>
where
    F: FnMut() -> Vec<String>,
{
    if n == 0 {
        return Err(Error::InvalidConfig("need at least one sample".to_string()));
    }
    let mut per_pattern: BTreeMap<String, usize> =
        spec.accepted_patterns.iter().map(|p| (p.as_str().to_string(), 0)).collect();
    let mut n_accepted = 0;
    for _ in 0..n {
        let words = draw();
        let endings: Vec<&str> = words.iter().map(String::as_str).collect();
        let matched = accepted_patterns(&endings, spec, dict, strictness);
        if !matched.is_empty() {
            n_accepted += 1;
        }
        for p in matched {
            *per_pattern.entry(p.as_str().to_string()).or_default() += 1;
        }
    }
    let fraction = n_accepted as f64 / n as f64;
    Ok(SamplingReport {
        schema_version: SCHEMA_VERSION,
        n_samples: n,
        n_accepted,
        fraction,
        expected_samples: (n_accepted > 0).then(|| n as f64 / n_accepted as f64),
        expected_samples_infinite: n_accepted == 0,
        per_pattern,
        temperature: None,
        seed: None,
        strictness,
    })
}

/// Draws `n` unconstrained samples from the generator and reports the
/// fraction whose endings satisfy an accepted pattern. Acceptance depends
/// only on ending words, so line bodies are not sampled.
pub fn sampling_efficiency(
    gen: &Generator,
    dict: &PronDict,
    n: usize,
    config: &SampleConfig,
    strictness: Strictness,
) -> Result<SamplingReport> {
    config.validate()?;
    let policy = Policy {
        temperature: config.temperature,
        forbid_unk: config.forbid_unk,
    };
    let mut r = rng::stream(config.seed, streams::EVAL);
    let mut report = sampling_report(&gen.spec, dict, n, strictness, || {
        sample_ending_words(gen, policy, &mut r)
    })?;
    report.temperature = Some(config.temperature);
    report.seed = Some(config.seed);
    Ok(report)
}

pub(crate) fn sample_ending_words<R: Rng + ?Sized>(gen: &Generator, policy: Policy, rng: &mut R) -> Vec<String> {
    gen.sample_ending_ids(policy, rng)
        .ids
        .iter()
        .map(|&i| gen.vocab.word(i).to_string())
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NllReport {
    pub schema_version: u32,
    pub nll_per_token: f64,
    pub word_tokens: usize,
    pub poems: usize,
}

/// Summed `-log p(x)` over the split divided by its word-token count. Line
/// terminators contribute to the numerator but are not counted as tokens.
pub fn heldout_nll(poems: &[Poem], gen: &Generator) -> Result<NllReport> {
    if poems.is_empty() {
        return Err(Error::EmptySplit);
    }
    let (mut nll, mut tokens) = (0.0, 0);
    for p in poems {
        let lp = gen.log_prob(p);
        nll -= lp.total();
        tokens += lp.word_tokens();
    }
    Ok(NllReport {
        schema_version: SCHEMA_VERSION,
        nll_per_token: nll / tokens as f64,
        word_tokens: tokens,
        poems: poems.len(),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledPair {
    pub first: String,
    pub second: String,
    pub rhyming: bool,
}

/// All within-poem ending-word pairs that the dictionary can label, and the
/// number of pairs skipped because a word was missing.
pub fn probe_pairs(poems: &[Poem], dict: &PronDict) -> (Vec<LabeledPair>, usize) {
    let mut pairs = Vec::new();
    let mut skipped = 0;
    for poem in poems {
        let ends = ending_words(poem);
        for i in 0..ends.len() {
            for j in i + 1..ends.len() {
                match rhymes(ends[i], ends[j], dict) {
                    RhymeVerdict::Unknown => skipped += 1,
                    v => pairs.push(LabeledPair {
                        first: ends[i].to_string(),
                        second: ends[j].to_string(),
                        rhyming: v == RhymeVerdict::Rhyming,
                    }),
                }
            }
        }
    }
    (pairs, skipped)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub tn: usize,
}

impl Confusion {
    pub fn add(&mut self, predicted: bool, actual: bool) {
        match (predicted, actual) {
            (true, true) => self.tp += 1,
            (true, false) => self.fp += 1,
            (false, true) => self.fn_ += 1,
            (false, false) => self.tn += 1,
        }
    }

    pub fn precision(&self) -> f64 {
        ratio(self.tp, self.tp + self.fp)
    }

    pub fn recall(&self) -> f64 {
        ratio(self.tp, self.tp + self.fn_)
    }

    pub fn f1(&self) -> f64 {
        let (p, r) = (self.precision(), self.recall());
        if p + r > 0.0 {
            2.0 * p * r / (p + r)
        } else {
            0.0
        }
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.fn_ + self.tn
    }
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub schema_version: u32,
    pub method: String,
    pub threshold: Option<f64>,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub counts: Confusion,
    pub n_skipped_oov_pairs: usize,
    /// Pairs are pooled over the whole split before computing F1.
    pub pooling: String,
}

impl ProbeReport {
    fn new(method: String, threshold: Option<f64>, counts: Confusion, skipped: usize) -> Self {
        ProbeReport {
            schema_version: SCHEMA_VERSION,
            method,
            threshold,
            precision: counts.precision(),
            recall: counts.recall(),
            f1: counts.f1(),
            counts,
            n_skipped_oov_pairs: skipped,
            pooling: "micro".to_string(),
        }
    }
}

/// Threshold maximizing F1 when predicting `score > threshold`. Candidates
/// are the midpoints between consecutive distinct scores plus both
/// infinities; ties go to the larger threshold.
pub fn best_threshold(scored: &[(f64, bool)]) -> Result<(f64, f64)> {
    if !scored.iter().any(|s| s.1) {
        return Err(Error::NoPositiveLabels);
    }
    let mut sorted: Vec<(f64, bool)> = scored.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let positives = sorted.iter().filter(|s| s.1).count();
    // Sweep from "everything positive" upward, moving one group of equal
    // scores to the negative side at a time.
    let mut tp = positives;
    let mut fp = sorted.len() - positives;
    let f1 = |tp: usize, fp: usize| {
        Confusion {
            tp,
            fp,
            fn_: positives - tp,
            tn: 0,
        }
        .f1()
    };
    let mut best = (f64::NEG_INFINITY, f1(tp, fp));
    let mut i = 0;
    while i < sorted.len() {
        let v = sorted[i].0;
        while i < sorted.len() && sorted[i].0 == v {
            if sorted[i].1 {
                tp -= 1;
            } else {
                fp -= 1;
            }
            i += 1;
        }
        let threshold = if i < sorted.len() {
            v + (sorted[i].0 - v) / 2.0
        } else {
            f64::INFINITY
        };
        let score = f1(tp, fp);
        if score >= best.1 {
            best = (threshold, score);
        }
    }
    Ok(best)
}

fn encode_cached<'a, E: WordEncoder>(cache: &mut BTreeMap<&'a str, Vec<f64>>, enc: &E, word: &'a str) {
    if !cache.contains_key(word) {
        cache.insert(word, enc.encode(word));
    }
}

fn pair_scores<E: WordEncoder>(pairs: &[LabeledPair], encoder: &E) -> Vec<(f64, bool)> {
    let mut cache: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for p in pairs {
        encode_cached(&mut cache, encoder, &p.first);
        encode_cached(&mut cache, encoder, &p.second);
    }
    pairs
        .iter()
        .map(|p| (cosine(&cache[p.first.as_str()], &cache[p.second.as_str()]), p.rhyming))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdChoice {
    pub threshold: f64,
    pub dev_f1: f64,
    pub n_pairs: usize,
    pub n_skipped_oov_pairs: usize,
}

pub fn tune_threshold<E: WordEncoder>(dev: &[Poem], encoder: &E, dict: &PronDict) -> Result<ThresholdChoice> {
    let (pairs, skipped) = probe_pairs(dev, dict);
    if pairs.is_empty() {
        return Err(Error::NoLabeledPairs);
    }
    let (threshold, dev_f1) = best_threshold(&pair_scores(&pairs, encoder))?;
    Ok(ThresholdChoice {
        threshold,
        dev_f1,
        n_pairs: pairs.len(),
        n_skipped_oov_pairs: skipped,
    })
}

/// Predicts a pair as rhyming when the cosine of its encodings exceeds
/// `threshold`.
pub fn rhyme_probe<E: WordEncoder>(test: &[Poem], encoder: &E, dict: &PronDict, threshold: f64) -> Result<ProbeReport> {
    let (pairs, skipped) = probe_pairs(test, dict);
    if pairs.is_empty() {
        return Err(Error::NoLabeledPairs);
    }
    let mut c = Confusion::default();
    for (score, actual) in pair_scores(&pairs, encoder) {
        c.add(score > threshold, actual);
    }
    Ok(ProbeReport::new("encoder".to_string(), Some(threshold), c, skipped))
}

/// Predicts a pair as rhyming when the last `k` characters match.
pub fn grapheme_probe(test: &[Poem], k: usize, dict: &PronDict) -> Result<ProbeReport> {
    if !(1..=3).contains(&k) {
        return Err(Error::InvalidConfig(alloc::format!("grapheme k must be 1, 2 or 3, got {k}")));
    }
    let (pairs, skipped) = probe_pairs(test, dict);
    if pairs.is_empty() {
        return Err(Error::NoLabeledPairs);
    }
    let mut c = Confusion::default();
    for p in &pairs {
        c.add(grapheme_k(&p.first, &p.second, k), p.rhyming);
    }
    Ok(ProbeReport::new(alloc::format!("grapheme-{k}"), None, c, skipped))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phonetics::Pronunciation;
    use alloc::vec;
    use proptest::prelude::*;

    fn dict() -> PronDict {
        let mut d = PronDict::new();
        for (w, p) in [
            ("night", "N AY1 T"),
            ("light", "L AY1 T"),
            ("day", "D EY1"),
            ("may", "M EY1"),
            ("cat", "K AE1 T"),
            ("dog", "D AO1 G"),
        ] {
            let ph: Vec<&str> = p.split(' ').collect();
            d.insert(w, Pronunciation::new(&ph).unwrap());
        }
        d
    }

    #[test]
    fn sampling_arithmetic() {
        let spec = DatasetSpec::new("q", 4, &["AABB"]).unwrap();
        let d = dict();
        let mut k = 0;
        let r = sampling_report(&spec, &d, 10, Strictness::Lenient, || {
            k += 1;
            let w = if k % 2 == 0 { ["night", "light", "day", "may"] } else { ["night", "day", "cat", "dog"] };
            w.iter().map(|s| s.to_string()).collect()
        })
        .unwrap();
        assert_eq!(r.n_accepted, 5);
        assert_eq!(r.fraction, 0.5);
        assert_eq!(r.expected_samples, Some(2.0));
        assert_eq!(r.per_pattern["AABB"], 5);
    }

    #[test]
    fn forced_rhyming_sampler_is_always_accepted() {
        let spec = DatasetSpec::sonnet();
        let r = sampling_report(&spec, &dict(), 50, Strictness::Lenient, || {
            ["night", "light", "day", "may"].iter().map(|s| s.to_string()).collect()
        })
        .unwrap();
        assert_eq!(r.fraction, 1.0);
        assert_eq!(r.expected_samples, Some(1.0));
    }

    #[test]
    fn zero_acceptance_is_flagged_infinite() {
        let spec = DatasetSpec::new("q", 4, &["AABB"]).unwrap();
        let r = sampling_report(&spec, &dict(), 3, Strictness::Lenient, || {
            ["night", "day", "cat", "dog"].iter().map(|s| s.to_string()).collect()
        })
        .unwrap();
        assert!(r.expected_samples_infinite);
        assert_eq!(r.expected_samples, None);
    }

    #[test]
    fn separable_threshold_is_the_midpoint() {
        let (t, f1) = best_threshold(&[(0.9, true), (0.1, false)]).unwrap();
        assert_eq!(t, 0.5);
        assert_eq!(f1, 1.0);
    }

    #[test]
    fn identical_scores_pick_a_sentinel() {
        let (t, f1) = best_threshold(&[(0.3, true), (0.3, false), (0.3, false)]).unwrap();
        assert_eq!(t, f64::NEG_INFINITY);
        assert!((f1 - 0.5).abs() < 1e-12);
    }

    #[test]
    fn no_positive_labels_is_an_error() {
        assert!(matches!(best_threshold(&[(0.2, false)]), Err(Error::NoPositiveLabels)));
    }

    #[test]
    fn confusion_arithmetic() {
        let c = Confusion { tp: 2, fp: 1, fn_: 1, tn: 5 };
        assert!((c.precision() - 2.0 / 3.0).abs() < 1e-12);
        assert!((c.recall() - 2.0 / 3.0).abs() < 1e-12);
        assert!((c.f1() - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(Confusion::default().f1(), 0.0);
    }

    #[test]
    fn grapheme_probe_labels_night_light() {
        let poems = vec![Poem::from_lines(&["a night", "a light", "a day", "zzz"])];
        let r = grapheme_probe(&poems, 3, &dict()).unwrap();
        // night/light TP; day pairs TN; pairs with "zzz" skipped.
        assert_eq!(r.counts, Confusion { tp: 1, fp: 0, fn_: 0, tn: 2 });
        assert_eq!(r.n_skipped_oov_pairs, 3);
        assert!(matches!(grapheme_probe(&[], 2, &dict()), Err(Error::NoLabeledPairs)));
    }

    fn f1_at(scored: &[(f64, bool)], t: f64) -> f64 {
        let mut c = Confusion::default();
        for &(s, y) in scored {
            c.add(s > t, y);
        }
        c.f1()
    }

    proptest! {
        #[test]
        fn tuned_threshold_is_optimal(scored in prop::collection::vec((0u8..20, any::<bool>()), 1..40)) {
            let scored: Vec<(f64, bool)> = scored.iter().map(|&(s, y)| (s as f64 / 20.0, y)).collect();
            prop_assume!(scored.iter().any(|s| s.1));
            let (t, f1) = best_threshold(&scored).unwrap();
            prop_assert!((f1_at(&scored, t) - f1).abs() < 1e-12);
            let mut candidates = vec![f64::NEG_INFINITY, f64::INFINITY];
            for &(a, _) in &scored {
                for &(b, _) in &scored {
                    candidates.push((a + b) / 2.0);
                }
            }
            for c in candidates {
                prop_assert!(f1_at(&scored, c) <= f1 + 1e-12);
            }
        }
    }
}
