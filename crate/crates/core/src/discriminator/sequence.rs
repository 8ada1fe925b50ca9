use alloc::vec;
use alloc::vec::Vec;

use super::encoder::{CharEncoder, EncodeTrace};
use super::Discriminator;
use crate::nn::{Linear, Lstm, LstmState, LstmStep, Parameterized};
use crate::{rng, Error, Result};

/// Ablation: an LSTM reads the ending-word encodings in line order and its
/// final state is classified directly, with no pairwise comparison.
#[derive(Clone, Debug, PartialEq)]
pub struct SequenceDiscriminator {
    pub encoder: CharEncoder,
    pub lines: usize,
    pub lstm: Lstm,
    pub out: Linear,
}

impl SequenceDiscriminator {
    pub fn new(encoder: CharEncoder, lines: usize, seed: u64) -> Result<Self> {
        if lines == 0 {
            return Err(Error::InvalidConfig("sequence discriminator needs at least one line".into()));
        }
        let mut r = rng::stream(seed, rng::streams::DISCRIMINATOR_INIT);
        let h = encoder.dim();
        Ok(SequenceDiscriminator {
            lstm: Lstm::new(h, h, &mut r),
            out: Linear::new(h, 1, &mut r),
            encoder,
            lines,
        })
    }

    fn run(&self, endings: &[&str]) -> (Vec<EncodeTrace>, Vec<LstmStep>, f64) {
        let h = self.lstm.hidden_dim();
        let traces: Vec<EncodeTrace> = endings.iter().map(|w| self.encoder.trace(w)).collect();
        let mut state = LstmState::zeros(h);
        let mut steps = Vec::with_capacity(traces.len());
        for t in &traces {
            let step = self.lstm.step(&t.output(self.encoder.dim()), &state);
            state = step.state();
            steps.push(step);
        }
        let logit = self.out.forward(&state.h)[0];
        (traces, steps, logit)
    }
}

impl Parameterized for SequenceDiscriminator {
    fn tensors(&self) -> Vec<&[f64]> {
        let mut t = self.encoder.tensors();
        t.extend(self.lstm.tensors());
        t.extend(self.out.tensors());
        t
    }

    fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        let mut t = self.encoder.tensors_mut();
        t.extend(self.lstm.tensors_mut());
        t.extend(self.out.tensors_mut());
        t
    }
}

impl Discriminator for SequenceDiscriminator {
    fn lines(&self) -> usize {
        self.lines
    }

    fn encoder(&self) -> &CharEncoder {
        &self.encoder
    }

    fn encoder_mut(&mut self) -> &mut CharEncoder {
        &mut self.encoder
    }

    fn logit(&self, endings: &[&str]) -> Result<f64> {
        self.check_lines(endings)?;
        Ok(self.run(endings).2)
    }

    fn logit_backward(&self, endings: &[&str], coeff: f64, grad: &mut Self) -> Result<f64> {
        self.check_lines(endings)?;
        let (traces, steps, logit) = self.run(endings);
        let h = self.lstm.hidden_dim();
        let last_h = &steps.last().expect("at least one line").h;
        let mut dh = vec![0.0; h];
        self.out.backward(last_h, &[coeff], &mut grad.out, Some(&mut dh));
        let mut dc = vec![0.0; h];
        for (step, trace) in steps.iter().zip(&traces).rev() {
            let mut dx = vec![0.0; self.encoder.dim()];
            let mut dh_prev = vec![0.0; h];
            let mut dc_prev = vec![0.0; h];
            self.lstm
                .step_backward(step, &dh, &dc, &mut grad.lstm, &mut dx, &mut dh_prev, &mut dc_prev);
            self.encoder.backward(trace, &dx, None, &mut grad.encoder);
            dh = dh_prev;
            dc = dc_prev;
        }
        Ok(logit)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discriminator::EncoderConfig;

    #[test]
    fn logit_gradient_matches_finite_differences() {
        let enc = CharEncoder::new(EncoderConfig { char_dim: 5, hidden: 6 }, &mut rng::stream(2, 0));
        let d = SequenceDiscriminator::new(enc, 4, 7).unwrap();
        let words = ["moon", "june", "sea", "free"];
        let mut g = d.zeros_like();
        d.logit_backward(&words, 1.0, &mut g).unwrap();
        let base = d.flatten();
        let an = g.flatten();
        let mut probe = d.clone();
        for k in (0..base.len()).step_by(3) {
            let mut v = base.clone();
            v[k] += 1e-5;
            probe.assign_flat(&v).unwrap();
            let up = probe.logit(&words).unwrap();
            v[k] -= 2e-5;
            probe.assign_flat(&v).unwrap();
            let down = probe.logit(&words).unwrap();
            let fd = (up - down) / 2e-5;
            let rel = (fd - an[k]).abs() / (fd.abs() + an[k].abs()).max(1e-4);
            assert!(rel < 1e-4, "param {k}: fd {fd} analytic {}", an[k]);
        }
    }

    #[test]
    fn works_for_two_lines() {
        let enc = CharEncoder::new(EncoderConfig { char_dim: 4, hidden: 4 }, &mut rng::stream(2, 0));
        let d = SequenceDiscriminator::new(enc, 2, 1).unwrap();
        let p = d.score(&["a", "b"]).unwrap();
        assert!(p > 0.0 && p < 1.0);
    }
}
