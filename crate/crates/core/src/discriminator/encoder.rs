use alloc::vec;
use alloc::vec::Vec;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::nn::{Embedding, Lstm, LstmState, LstmStep, Parameterized};

/// Fixed character inventory; anything else maps to the reserved OOV id.
pub struct CharInventory;

impl CharInventory {
    pub const CHARS: &'static str = "abcdefghijklmnopqrstuvwxyz'-";

    /// Known characters plus one OOV slot.
    pub const fn size() -> usize {
        Self::CHARS.len() + 1
    }

    pub const fn oov() -> usize {
        Self::CHARS.len()
    }

    pub fn id(c: char) -> usize {
        Self::CHARS
            .chars()
            .position(|k| k == c)
            .unwrap_or(Self::oov())
    }

    pub fn encode(word: &str) -> Vec<usize> {
        word.chars().map(Self::id).collect()
    }
}

/// Anything that maps a word to a vector.
pub trait WordEncoder {
    fn encode(&self, word: &str) -> Vec<f64>;
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EncoderConfig {
    pub char_dim: usize,
    pub hidden: usize,
}

impl Default for EncoderConfig {
    fn default() -> Self {
        EncoderConfig {
            char_dim: 32,
            hidden: 128,
        }
    }
}

/// Character-level LSTM; a word is represented by its last hidden state.
#[derive(Clone, Debug, PartialEq)]
pub struct CharEncoder {
    pub config: EncoderConfig,
    pub embedding: Embedding,
    pub lstm: Lstm,
}

#[derive(Clone, Debug)]
pub(crate) struct EncodeTrace {
    ids: Vec<usize>,
    steps: Vec<LstmStep>,
}

impl EncodeTrace {
    pub(crate) fn output(&self, hidden: usize) -> Vec<f64> {
        match self.steps.last() {
            Some(s) => s.h.clone(),
            None => vec![0.0; hidden],
        }
    }
}

impl CharEncoder {
    pub fn new<R: Rng + ?Sized>(config: EncoderConfig, rng: &mut R) -> Self {
        CharEncoder {
            embedding: Embedding::new(CharInventory::size(), config.char_dim, 0.5, rng),
            lstm: Lstm::new(config.char_dim, config.hidden, rng),
            config,
        }
    }

    pub fn dim(&self) -> usize {
        self.config.hidden
    }

    pub(crate) fn trace(&self, word: &str) -> EncodeTrace {
        let ids = CharInventory::encode(word);
        let mut state = LstmState::zeros(self.config.hidden);
        let mut steps = Vec::with_capacity(ids.len());
        for &c in &ids {
            let step = self.lstm.step(self.embedding.get(c), &state);
            state = step.state();
            steps.push(step);
        }
        EncodeTrace { ids, steps }
    }

    /// Backpropagates gradients w.r.t. the final hidden (and optionally cell)
    /// state.
    pub(crate) fn backward(&self, trace: &EncodeTrace, dh_final: &[f64], dc_final: Option<&[f64]>, grad: &mut CharEncoder) {
        let h = self.config.hidden;
        let mut dh = dh_final.to_vec();
        let mut dc = match dc_final {
            Some(d) => d.to_vec(),
            None => vec![0.0; h],
        };
        for (k, step) in trace.steps.iter().enumerate().rev() {
            let mut dx = vec![0.0; self.config.char_dim];
            let mut dh_prev = vec![0.0; h];
            let mut dc_prev = vec![0.0; h];
            self.lstm
                .step_backward(step, &dh, &dc, &mut grad.lstm, &mut dx, &mut dh_prev, &mut dc_prev);
            self.embedding.backward(trace.ids[k], &dx, &mut grad.embedding);
            dh = dh_prev;
            dc = dc_prev;
        }
    }
}

impl WordEncoder for CharEncoder {
    fn encode(&self, word: &str) -> Vec<f64> {
        self.trace(word).output(self.config.hidden)
    }
}

impl Parameterized for CharEncoder {
    fn tensors(&self) -> Vec<&[f64]> {
        let mut t = self.embedding.tensors();
        t.extend(self.lstm.tensors());
        t
    }

    fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        let mut t = self.embedding.tensors_mut();
        t.extend(self.lstm.tensors_mut());
        t
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    #[test]
    fn encodes_deterministically_with_fixed_dim() {
        let enc = CharEncoder::new(EncoderConfig::default(), &mut rng::stream(1, 0));
        let a = enc.encode("cat");
        assert_eq!(a.len(), 128);
        assert_eq!(a, enc.encode("cat"));
        assert_ne!(a, enc.encode("hat"));
    }

    #[test]
    fn unseen_characters_use_oov_slot() {
        assert_eq!(CharInventory::id('é'), CharInventory::oov());
        assert_eq!(CharInventory::id('<'), CharInventory::oov());
        let enc = CharEncoder::new(EncoderConfig::default(), &mut rng::stream(1, 0));
        let v = enc.encode("café");
        assert!(v.iter().all(|x| x.is_finite()));
        assert_eq!(v, enc.encode("caf\u{263a}"));
    }
}
