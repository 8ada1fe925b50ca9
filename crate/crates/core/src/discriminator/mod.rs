//! Discriminators that judge a poem only through its line-ending words.
//!
//! [`StructuredDiscriminator`] compares every pair of ending-word encodings
//! by cosine similarity and classifies the resulting matrix with a small
//! convolutional network. [`SequenceDiscriminator`] is the ablation that runs
//! an LSTM over the encodings instead.

mod encoder;
mod pretrain;
mod sequence;
mod structured;

pub use encoder::{CharEncoder, CharInventory, EncoderConfig, WordEncoder};
pub use pretrain::{pretrain_encoder, CharAutoencoder, PretrainConfig, PretrainEpoch, Pretrainer};
pub use sequence::SequenceDiscriminator;
pub use structured::{similarity_backward, similarity_matrix, ConvClassifier, SimilarityMatrix, StructuredDiscriminator};

use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::corpus::{ending_words, Poem};
use crate::nn::math::{ln, sigmoid};
use crate::nn::Parameterized;
use crate::{Error, Result};

/// Floor applied inside the logs of the discriminator loss.
pub const LOG_EPS: f64 = 1e-7;

pub trait Discriminator: Parameterized {
    fn lines(&self) -> usize;
    fn encoder(&self) -> &CharEncoder;
    fn encoder_mut(&mut self) -> &mut CharEncoder;

    /// Pre-sigmoid output for a poem with these ending words.
    fn logit(&self, endings: &[&str]) -> Result<f64>;

    /// Adds `coeff * d logit / d params` into `grad`; returns the logit.
    fn logit_backward(&self, endings: &[&str], coeff: f64, grad: &mut Self) -> Result<f64>;

    /// Probability that the poem is real.
    fn score(&self, endings: &[&str]) -> Result<f64> {
        Ok(sigmoid(self.logit(endings)?))
    }

    fn score_poem(&self, poem: &Poem) -> Result<f64> {
        self.score(&ending_words(poem))
    }

    fn check_lines(&self, endings: &[&str]) -> Result<()> {
        if endings.len() != self.lines() {
            return Err(Error::LengthMismatch {
                expected: self.lines(),
                found: endings.len(),
            });
        }
        Ok(())
    }
}

/// `-log f(real) - log(1 - f(fake))` from probabilities, with both logs
/// floored at [`LOG_EPS`].
pub fn loss_from_scores(real: f64, fake: f64) -> f64 {
    -ln(real.max(LOG_EPS)) - ln((1.0 - fake).max(LOG_EPS))
}

pub fn disc_loss<D: Discriminator>(disc: &D, real: &[&str], fake: &[&str]) -> Result<f64> {
    Ok(loss_from_scores(disc.score(real)?, disc.score(fake)?))
}

/// Computes the loss and adds `coeff * d loss / d params` into `grad`.
pub fn disc_loss_backward<D: Discriminator>(
    disc: &D,
    real: &[&str],
    fake: &[&str],
    coeff: f64,
    grad: &mut D,
) -> Result<f64> {
    Ok(pair_backward(disc, real, fake, coeff, grad)?.0)
}

/// As [`disc_loss_backward`], also returning both scores.
pub(crate) fn pair_backward<D: Discriminator>(
    disc: &D,
    real: &[&str],
    fake: &[&str],
    coeff: f64,
    grad: &mut D,
) -> Result<(f64, f64, f64)> {
    let pr = disc.score(real)?;
    let pf = disc.score(fake)?;
    // d/da -ln(sigmoid(a)) = p - 1 ; d/da -ln(1 - sigmoid(a)) = p
    if pr > LOG_EPS {
        disc.logit_backward(real, coeff * (pr - 1.0), grad)?;
    }
    if 1.0 - pf > LOG_EPS {
        disc.logit_backward(fake, coeff * pf, grad)?;
    }
    Ok((loss_from_scores(pr, pf), pr, pf))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Architecture {
    Structured,
    Sequence,
}

#[derive(Clone, Debug, PartialEq)]
pub enum AnyDiscriminator {
    Structured(StructuredDiscriminator),
    Sequence(SequenceDiscriminator),
}

impl AnyDiscriminator {
    pub fn architecture(&self) -> Architecture {
        match self {
            AnyDiscriminator::Structured(_) => Architecture::Structured,
            AnyDiscriminator::Sequence(_) => Architecture::Sequence,
        }
    }

    pub fn new(arch: Architecture, encoder: CharEncoder, lines: usize, seed: u64) -> Result<Self> {
        Ok(match arch {
            Architecture::Structured => {
                AnyDiscriminator::Structured(StructuredDiscriminator::new(encoder, lines, seed)?)
            }
            Architecture::Sequence => {
                AnyDiscriminator::Sequence(SequenceDiscriminator::new(encoder, lines, seed)?)
            }
        })
    }
}

impl Parameterized for AnyDiscriminator {
    fn tensors(&self) -> Vec<&[f64]> {
        match self {
            AnyDiscriminator::Structured(d) => d.tensors(),
            AnyDiscriminator::Sequence(d) => d.tensors(),
        }
    }

    fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        match self {
            AnyDiscriminator::Structured(d) => d.tensors_mut(),
            AnyDiscriminator::Sequence(d) => d.tensors_mut(),
        }
    }
}

impl Discriminator for AnyDiscriminator {
    fn lines(&self) -> usize {
        match self {
            AnyDiscriminator::Structured(d) => d.lines(),
            AnyDiscriminator::Sequence(d) => d.lines(),
        }
    }

    fn encoder(&self) -> &CharEncoder {
        match self {
            AnyDiscriminator::Structured(d) => d.encoder(),
            AnyDiscriminator::Sequence(d) => d.encoder(),
        }
    }

    fn encoder_mut(&mut self) -> &mut CharEncoder {
        match self {
            AnyDiscriminator::Structured(d) => d.encoder_mut(),
            AnyDiscriminator::Sequence(d) => d.encoder_mut(),
        }
    }

    fn logit(&self, endings: &[&str]) -> Result<f64> {
        match self {
            AnyDiscriminator::Structured(d) => d.logit(endings),
            AnyDiscriminator::Sequence(d) => d.logit(endings),
        }
    }

    fn logit_backward(&self, endings: &[&str], coeff: f64, grad: &mut Self) -> Result<f64> {
        match (self, grad) {
            (AnyDiscriminator::Structured(d), AnyDiscriminator::Structured(g)) => d.logit_backward(endings, coeff, g),
            (AnyDiscriminator::Sequence(d), AnyDiscriminator::Sequence(g)) => d.logit_backward(endings, coeff, g),
            _ => Err(Error::Shape("gradient buffer has a different architecture".into())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::math::ln;

    #[test]
    fn analytic_loss_values() {
        assert!((loss_from_scores(0.5, 0.5) - 2.0 * ln(2.0)).abs() < 1e-12);
        assert!((loss_from_scores(0.9, 0.1) - 0.210721).abs() < 1e-5);
        let floor = loss_from_scores(1.0, 0.0);
        assert!((0.0..1e-12).contains(&floor));
        // saturated the wrong way: clamped, finite
        let worst = loss_from_scores(0.0, 1.0);
        assert!((worst - 2.0 * -ln(LOG_EPS)).abs() < 1e-9);
    }
}
