use alloc::vec;
use alloc::vec::Vec;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::encoder::{CharEncoder, CharInventory};
use crate::nn::softmax::{argmax, log_prob_grad_acc, log_softmax_masked};
use crate::nn::{Adam, Embedding, Linear, Lstm, LstmState, LstmStep, Parameterized};
use crate::rng::{self, Rng};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PretrainConfig {
    pub epochs: usize,
    pub lr: f64,
    pub batch_size: usize,
    pub clip: f64,
    pub seed: u64,
}

impl Default for PretrainConfig {
    fn default() -> Self {
        PretrainConfig {
            epochs: 10,
            lr: 3e-3,
            batch_size: 8,
            clip: 5.0,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PretrainEpoch {
    pub epoch: usize,
    /// Mean cross-entropy per predicted symbol (characters plus end marker).
    pub loss: f64,
    /// Teacher-forced next-symbol accuracy over the epoch.
    pub accuracy: f64,
}

/// Character encoder plus a throwaway decoder that reconstructs the word
/// from the encoder's last hidden state.
#[derive(Clone, Debug, PartialEq)]
pub struct CharAutoencoder {
    pub encoder: CharEncoder,
    pub dec_embedding: Embedding,
    pub decoder: Lstm,
    pub out: Linear,
}

/// Decoder input id for the start symbol and output id for the end symbol.
const MARK: usize = CharInventory::size();

impl CharAutoencoder {
    pub fn new(encoder: CharEncoder, seed: u64) -> Self {
        let mut r = rng::stream(seed, rng::streams::PRETRAIN);
        let (d, h) = (encoder.config.char_dim, encoder.config.hidden);
        CharAutoencoder {
            dec_embedding: Embedding::new(MARK + 1, d, 0.5, &mut r),
            decoder: Lstm::new(d, h, &mut r),
            out: Linear::new(h, MARK + 1, &mut r),
            encoder,
        }
    }

    fn targets(word: &str) -> (Vec<usize>, Vec<usize>) {
        let chars = CharInventory::encode(word);
        let mut inputs = vec![MARK];
        inputs.extend_from_slice(&chars);
        let mut targets = chars;
        targets.push(MARK);
        (inputs, targets)
    }

    /// Returns (summed loss, correct predictions, predictions), adding
    /// `coeff * d loss` into `grad` when given.
    fn word(&self, word: &str, coeff: f64, grad: Option<&mut CharAutoencoder>) -> (f64, usize, usize) {
        let h = self.encoder.config.hidden;
        let trace = self.encoder.trace(word);
        let mut state = LstmState {
            h: trace.output(h),
            c: vec![0.0; h],
        };
        let (inputs, targets) = Self::targets(word);
        let mut steps: Vec<LstmStep> = Vec::with_capacity(inputs.len());
        let mut dlogits: Vec<Vec<f64>> = Vec::with_capacity(inputs.len());
        let (mut loss, mut correct) = (0.0, 0);
        for (&x, &y) in inputs.iter().zip(&targets) {
            let step = self.decoder.step(self.dec_embedding.get(x), &state);
            state = step.state();
            let logits = self.out.forward(&step.h);
            let lp = log_softmax_masked(&logits, 1.0, |_| true);
            loss -= lp[y];
            if argmax(&lp) == y {
                correct += 1;
            }
            if grad.is_some() {
                let mut d = vec![0.0; lp.len()];
                log_prob_grad_acc(&lp, y, 1.0, -coeff, &mut d);
                dlogits.push(d);
            }
            steps.push(step);
        }
        if let Some(g) = grad {
            let d = self.encoder.config.char_dim;
            let mut dh = vec![0.0; h];
            let mut dc = vec![0.0; h];
            for k in (0..steps.len()).rev() {
                self.out.backward(&steps[k].h, &dlogits[k], &mut g.out, Some(&mut dh));
                let mut dx = vec![0.0; d];
                let mut dh_prev = vec![0.0; h];
                let mut dc_prev = vec![0.0; h];
                self.decoder
                    .step_backward(&steps[k], &dh, &dc, &mut g.decoder, &mut dx, &mut dh_prev, &mut dc_prev);
                self.dec_embedding.backward(inputs[k], &dx, &mut g.dec_embedding);
                dh = dh_prev;
                dc = dc_prev;
            }
            self.encoder.backward(&trace, &dh, None, &mut g.encoder);
        }
        (loss, correct, targets.len())
    }

    pub fn loss(&self, word: &str) -> f64 {
        self.word(word, 1.0, None).0
    }

    /// Teacher-forced next-symbol accuracy over `words`.
    pub fn accuracy<S: AsRef<str>>(&self, words: &[S]) -> f64 {
        let (mut c, mut n) = (0, 0);
        for w in words {
            let (_, ci, ni) = self.word(w.as_ref(), 1.0, None);
            c += ci;
            n += ni;
        }
        if n == 0 {
            0.0
        } else {
            c as f64 / n as f64
        }
    }
}

impl Parameterized for CharAutoencoder {
    fn tensors(&self) -> Vec<&[f64]> {
        let mut t = self.encoder.tensors();
        t.extend(self.dec_embedding.tensors());
        t.extend(self.decoder.tensors());
        t.extend(self.out.tensors());
        t
    }

    fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        let mut t = self.encoder.tensors_mut();
        t.extend(self.dec_embedding.tensors_mut());
        t.extend(self.decoder.tensors_mut());
        t.extend(self.out.tensors_mut());
        t
    }
}

/// Epoch-at-a-time autoencoder training.
pub struct Pretrainer {
    pub model: CharAutoencoder,
    config: PretrainConfig,
    words: Vec<alloc::string::String>,
    adam: Adam,
    rng: Rng,
    epoch: usize,
}

impl Pretrainer {
    pub fn new<S: AsRef<str>>(encoder: CharEncoder, words: &[S], config: PretrainConfig) -> Self {
        let model = CharAutoencoder::new(encoder, config.seed);
        let adam = Adam::new(&model, config.lr);
        Pretrainer {
            adam,
            model,
            words: words.iter().map(|w| w.as_ref().into()).collect(),
            rng: rng::substream(config.seed, rng::streams::PRETRAIN, 1),
            config,
            epoch: 0,
        }
    }

    pub fn run_epoch(&mut self) -> PretrainEpoch {
        let mut order: Vec<usize> = (0..self.words.len()).collect();
        order.shuffle(&mut self.rng);
        let (mut loss, mut correct, mut total) = (0.0, 0, 0);
        let mut grad = self.model.zeros_like();
        for batch in order.chunks(self.config.batch_size.max(1)) {
            grad.fill(0.0);
            let coeff = 1.0 / batch.len() as f64;
            for &i in batch {
                let (l, c, n) = self.model.word(&self.words[i], coeff, Some(&mut grad));
                loss += l;
                correct += c;
                total += n;
            }
            if !grad.is_finite() {
                log::warn!("skipping non-finite pretraining batch");
                continue;
            }
            grad.clip_norm(self.config.clip);
            self.adam.step(&mut self.model, &grad);
        }
        self.epoch += 1;
        let n = total.max(1) as f64;
        let stats = PretrainEpoch {
            epoch: self.epoch,
            loss: loss / n,
            accuracy: correct as f64 / n,
        };
        log::info!(
            "pretrain epoch {} loss {:.4} accuracy {:.4}",
            stats.epoch,
            stats.loss,
            stats.accuracy
        );
        stats
    }

    pub fn into_encoder(self) -> CharEncoder {
        self.model.encoder
    }
}

/// Trains `encoder` as the front half of a character autoencoder over
/// `words` and returns it with per-epoch statistics.
pub fn pretrain_encoder<S: AsRef<str>>(
    encoder: CharEncoder,
    words: &[S],
    config: &PretrainConfig,
) -> (CharEncoder, Vec<PretrainEpoch>) {
    if config.epochs == 0 || words.is_empty() {
        return (encoder, Vec::new());
    }
    let mut trainer = Pretrainer::new(encoder, words, config.clone());
    let stats = (0..config.epochs).map(|_| trainer.run_epoch()).collect();
    (trainer.into_encoder(), stats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discriminator::{EncoderConfig, WordEncoder};
    use crate::nn::math::cosine;
    use alloc::format;
    use alloc::string::String;

    fn small_encoder(seed: u64) -> CharEncoder {
        CharEncoder::new(EncoderConfig { char_dim: 5, hidden: 6 }, &mut rng::stream(seed, 0))
    }

    #[test]
    fn zero_epochs_is_a_no_op() {
        let enc = small_encoder(1);
        let cfg = PretrainConfig { epochs: 0, ..Default::default() };
        let (out, stats) = pretrain_encoder(enc.clone(), &["cat", "dog"], &cfg);
        assert_eq!(out, enc);
        assert!(stats.is_empty());
    }

    #[test]
    fn deterministic_given_seed() {
        let cfg = PretrainConfig { epochs: 2, seed: 4, ..Default::default() };
        let words = ["cat", "hat", "dog"];
        let a = pretrain_encoder(small_encoder(1), &words, &cfg);
        let b = pretrain_encoder(small_encoder(1), &words, &cfg);
        assert_eq!(a.0, b.0);
        assert_eq!(a.1, b.1);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let ae = CharAutoencoder::new(small_encoder(3), 2);
        let mut g = ae.zeros_like();
        ae.word("light", 1.0, Some(&mut g));
        let base = ae.flatten();
        let an = g.flatten();
        let mut probe = ae.clone();
        for k in (0..base.len()).step_by(5) {
            let mut v = base.clone();
            v[k] += 1e-5;
            probe.assign_flat(&v).unwrap();
            let up = probe.loss("light");
            v[k] -= 2e-5;
            probe.assign_flat(&v).unwrap();
            let down = probe.loss("light");
            let fd = (up - down) / 2e-5;
            let rel = (fd - an[k]).abs() / (fd.abs() + an[k].abs()).max(1e-4);
            assert!(rel < 1e-4, "param {k}: fd {fd} analytic {}", an[k]);
        }
    }

    fn family_vocab() -> Vec<String> {
        let onsets = ["b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "w", "z", "br", "cl", "fl", "gr", "pl"];
        let suffixes = ["ight", "anana", "ore", "ay", "ine"];
        let mut out = Vec::new();
        for s in suffixes {
            for o in onsets {
                out.push(format!("{o}{s}"));
            }
        }
        out.push("light".into());
        out.push("night".into());
        out.push("banana".into());
        out
    }

    #[test]
    fn pretraining_groups_shared_suffixes() {
        let words = family_vocab();
        let enc = CharEncoder::new(EncoderConfig { char_dim: 16, hidden: 32 }, &mut rng::stream(5, 0));
        let cfg = PretrainConfig { epochs: 10, seed: 5, ..Default::default() };
        let (enc, _) = pretrain_encoder(enc, &words, &cfg);
        let light = enc.encode("light");
        let near = cosine(&light, &enc.encode("night"));
        let far = cosine(&light, &enc.encode("banana"));
        assert!(near > far, "light~night {near} light~banana {far}");
    }
}
