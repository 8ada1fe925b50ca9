use alloc::vec;
use alloc::vec::Vec;

use super::encoder::{CharEncoder, EncodeTrace};
use super::Discriminator;
use crate::nn::math::{dot, norm};
use crate::nn::{Conv2x2, Linear, Parameterized};
use crate::{rng, Error, Result};

/// Symmetric matrix of pairwise cosine similarities with a unit diagonal.
#[derive(Clone, Debug, PartialEq)]
pub struct SimilarityMatrix {
    n: usize,
    values: Vec<f64>,
}

impl SimilarityMatrix {
    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }
}

/// Pairwise cosine similarities. A zero-norm representation has similarity 0
/// with everything else; the diagonal is always exactly 1.
pub fn similarity_matrix(reps: &[Vec<f64>]) -> SimilarityMatrix {
    let n = reps.len();
    let norms: Vec<f64> = reps.iter().map(|r| norm(r)).collect();
    if norms.contains(&0.0) {
        log::warn!("zero-norm word representation in similarity matrix");
    }
    let mut values = vec![0.0; n * n];
    for i in 0..n {
        values[i * n + i] = 1.0;
        for j in i + 1..n {
            let s = if norms[i] == 0.0 || norms[j] == 0.0 {
                0.0
            } else {
                (dot(&reps[i], &reps[j]) / (norms[i] * norms[j])).clamp(-1.0, 1.0)
            };
            values[i * n + j] = s;
            values[j * n + i] = s;
        }
    }
    SimilarityMatrix { n, values }
}

/// Gradient of a scalar w.r.t. the representations, given its gradient
/// w.r.t. every matrix entry (row-major, `n * n`).
pub fn similarity_backward(reps: &[Vec<f64>], dsim: &[f64]) -> Vec<Vec<f64>> {
    let n = reps.len();
    let norms: Vec<f64> = reps.iter().map(|r| norm(r)).collect();
    let mut out: Vec<Vec<f64>> = reps.iter().map(|r| vec![0.0; r.len()]).collect();
    for i in 0..n {
        for j in i + 1..n {
            if norms[i] == 0.0 || norms[j] == 0.0 {
                continue;
            }
            let g = dsim[i * n + j] + dsim[j * n + i];
            if g == 0.0 {
                continue;
            }
            let nn = norms[i] * norms[j];
            let s = dot(&reps[i], &reps[j]) / nn;
            let (ai, aj) = (s / (norms[i] * norms[i]), s / (norms[j] * norms[j]));
            for k in 0..reps[i].len() {
                out[i][k] += g * (reps[j][k] / nn - ai * reps[i][k]);
                out[j][k] += g * (reps[i][k] / nn - aj * reps[j][k]);
            }
        }
    }
    out
}

/// Two 2x2 convolutions with ReLU, then a linear layer to one logit.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvClassifier {
    pub lines: usize,
    pub conv1: Conv2x2,
    pub conv2: Conv2x2,
    pub out: Linear,
}

struct ConvTrace {
    a1: Vec<f64>,
    r1: Vec<f64>,
    a2: Vec<f64>,
    r2: Vec<f64>,
}

fn relu(v: &[f64]) -> Vec<f64> {
    v.iter().map(|&x| x.max(0.0)).collect()
}

fn relu_backward(pre: &[f64], d: &mut [f64]) {
    for (g, &a) in d.iter_mut().zip(pre) {
        if a <= 0.0 {
            *g = 0.0;
        }
    }
}

impl ConvClassifier {
    pub const CHANNELS: (usize, usize) = (16, 32);

    pub fn new(lines: usize, seed: u64) -> Result<Self> {
        if lines < 3 {
            return Err(Error::InvalidConfig(alloc::format!(
                "structured discriminator needs at least 3 lines, got {lines}"
            )));
        }
        let mut r = rng::stream(seed, rng::streams::DISCRIMINATOR_INIT);
        let (c1, c2) = Self::CHANNELS;
        let m = lines - 2;
        Ok(ConvClassifier {
            lines,
            conv1: Conv2x2::new(1, c1, &mut r),
            conv2: Conv2x2::new(c1, c2, &mut r),
            out: Linear::new(c2 * m * m, 1, &mut r),
        })
    }

    fn run(&self, sim: &[f64]) -> (f64, ConvTrace) {
        let t = self.lines;
        let a1 = self.conv1.forward(sim, t);
        let r1 = relu(&a1);
        let a2 = self.conv2.forward(&r1, t - 1);
        let r2 = relu(&a2);
        let logit = self.out.forward(&r2)[0];
        (logit, ConvTrace { a1, r1, a2, r2 })
    }

    pub fn logit(&self, sim: &SimilarityMatrix) -> Result<f64> {
        if sim.size() != self.lines {
            return Err(Error::LengthMismatch {
                expected: self.lines,
                found: sim.size(),
            });
        }
        Ok(self.run(sim.as_slice()).0)
    }

    /// Returns the logit and `coeff * d logit / d sim`.
    fn backward(&self, sim: &[f64], coeff: f64, grad: &mut ConvClassifier) -> (f64, Vec<f64>) {
        let t = self.lines;
        let (logit, tr) = self.run(sim);
        let mut dr2 = vec![0.0; tr.r2.len()];
        self.out.backward(&tr.r2, &[coeff], &mut grad.out, Some(&mut dr2));
        relu_backward(&tr.a2, &mut dr2);
        let mut dr1 = self.conv2.backward(&tr.r1, t - 1, &dr2, &mut grad.conv2);
        relu_backward(&tr.a1, &mut dr1);
        let dsim = self.conv1.backward(sim, t, &dr1, &mut grad.conv1);
        (logit, dsim)
    }
}

impl Parameterized for ConvClassifier {
    fn tensors(&self) -> Vec<&[f64]> {
        let mut t = self.conv1.tensors();
        t.extend(self.conv2.tensors());
        t.extend(self.out.tensors());
        t
    }

    fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        let mut t = self.conv1.tensors_mut();
        t.extend(self.conv2.tensors_mut());
        t.extend(self.out.tensors_mut());
        t
    }
}

/// Encodes each ending word, builds the similarity matrix and classifies it.
#[derive(Clone, Debug, PartialEq)]
pub struct StructuredDiscriminator {
    pub encoder: CharEncoder,
    pub classifier: ConvClassifier,
}

impl StructuredDiscriminator {
    pub fn new(encoder: CharEncoder, lines: usize, seed: u64) -> Result<Self> {
        Ok(StructuredDiscriminator {
            encoder,
            classifier: ConvClassifier::new(lines, seed)?,
        })
    }

    fn traces(&self, endings: &[&str]) -> (Vec<EncodeTrace>, Vec<Vec<f64>>) {
        let h = self.encoder.dim();
        let traces: Vec<EncodeTrace> = endings.iter().map(|w| self.encoder.trace(w)).collect();
        let reps = traces.iter().map(|t| t.output(h)).collect();
        (traces, reps)
    }

    pub fn similarity(&self, endings: &[&str]) -> SimilarityMatrix {
        similarity_matrix(&self.traces(endings).1)
    }
}

impl Parameterized for StructuredDiscriminator {
    fn tensors(&self) -> Vec<&[f64]> {
        let mut t = self.encoder.tensors();
        t.extend(self.classifier.tensors());
        t
    }

    fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        let mut t = self.encoder.tensors_mut();
        t.extend(self.classifier.tensors_mut());
        t
    }
}

impl Discriminator for StructuredDiscriminator {
    fn lines(&self) -> usize {
        self.classifier.lines
    }

    fn encoder(&self) -> &CharEncoder {
        &self.encoder
    }

    fn encoder_mut(&mut self) -> &mut CharEncoder {
        &mut self.encoder
    }

    fn logit(&self, endings: &[&str]) -> Result<f64> {
        self.check_lines(endings)?;
        self.classifier.logit(&self.similarity(endings))
    }

    fn logit_backward(&self, endings: &[&str], coeff: f64, grad: &mut Self) -> Result<f64> {
        self.check_lines(endings)?;
        let (traces, reps) = self.traces(endings);
        let sim = similarity_matrix(&reps);
        let (logit, dsim) = self.classifier.backward(sim.as_slice(), coeff, &mut grad.classifier);
        let dreps = similarity_backward(&reps, &dsim);
        for (trace, d) in traces.iter().zip(&dreps) {
            self.encoder.backward(trace, d, None, &mut grad.encoder);
        }
        Ok(logit)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discriminator::{disc_loss, disc_loss_backward, EncoderConfig};
    use proptest::prelude::*;

    fn small(lines: usize, seed: u64) -> StructuredDiscriminator {
        let cfg = EncoderConfig { char_dim: 6, hidden: 8 };
        let enc = CharEncoder::new(cfg, &mut rng::stream(seed, 0));
        StructuredDiscriminator::new(enc, lines, seed).unwrap()
    }

    fn fd_check<P: Parameterized>(params: &P, analytic: &P, f: impl Fn(&P) -> f64) -> f64 {
        let base = params.flatten();
        let grad = analytic.flatten();
        let mut worst: f64 = 0.0;
        let h = 1e-5;
        let stride = (base.len() / 400).max(1);
        let mut probe = params.clone();
        for k in (0..base.len()).step_by(stride) {
            let mut v = base.clone();
            v[k] += h;
            probe.assign_flat(&v).unwrap();
            let up = f(&probe);
            v[k] -= 2.0 * h;
            probe.assign_flat(&v).unwrap();
            let down = f(&probe);
            let fd = (up - down) / (2.0 * h);
            let rel = (fd - grad[k]).abs() / (fd.abs() + grad[k].abs()).max(1e-4);
            worst = worst.max(rel);
        }
        worst
    }

    #[test]
    fn logit_gradient_matches_finite_differences() {
        let d = small(4, 3);
        let words = ["cat", "hat", "dog", "lo"];
        let mut g = d.zeros_like();
        d.logit_backward(&words, 1.0, &mut g).unwrap();
        let err = fd_check(&d, &g, |p| p.logit(&words).unwrap());
        assert!(err < 1e-4, "relative error {err}");
    }

    #[test]
    fn loss_gradient_matches_finite_differences() {
        let d = small(4, 5);
        let real = ["night", "light", "day", "may"];
        let fake = ["sun", "tree", "moon", "x"];
        let mut g = d.zeros_like();
        d_loss(&d, &real, &fake, &mut g);
        let err = fd_check(&d, &g, |p| disc_loss(p, &real, &fake).unwrap());
        assert!(err < 1e-4, "relative error {err}");
    }

    fn d_loss(d: &StructuredDiscriminator, real: &[&str], fake: &[&str], g: &mut StructuredDiscriminator) {
        disc_loss_backward(d, real, fake, 1.0, g).unwrap();
    }

    #[test]
    fn similarity_gradient_matches_finite_differences() {
        let reps = vec![
            vec![0.3, -0.2, 0.5],
            vec![0.1, 0.4, -0.3],
            vec![-0.6, 0.2, 0.2],
        ];
        let weights: Vec<f64> = (0..9).map(|k| 0.1 * k as f64 - 0.3).collect();
        let f = |r: &[Vec<f64>]| -> f64 {
            similarity_matrix(r).as_slice().iter().zip(&weights).map(|(a, b)| a * b).sum()
        };
        let d = similarity_backward(&reps, &weights);
        for i in 0..3 {
            for k in 0..3 {
                let mut up = reps.clone();
                up[i][k] += 1e-6;
                let mut down = reps.clone();
                down[i][k] -= 1e-6;
                let fd = (f(&up) - f(&down)) / 2e-6;
                assert!((fd - d[i][k]).abs() < 1e-7, "{i},{k}: {fd} vs {}", d[i][k]);
            }
        }
    }

    #[test]
    fn zeroed_output_layer_scores_one_half() {
        let mut d = small(4, 1);
        d.classifier.out.fill(0.0);
        for w in [["a", "b", "c", "d"], ["night", "light", "x", "y"]] {
            assert_eq!(d.score(&w).unwrap(), 0.5);
        }
    }

    #[test]
    fn permuting_lines_changes_logit() {
        let d = small(4, 9);
        let a = d.logit(&["cat", "hat", "dog", "log"]).unwrap();
        let b = d.logit(&["cat", "dog", "hat", "log"]).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn rejects_wrong_line_count_and_small_t() {
        let d = small(4, 1);
        assert!(matches!(
            d.logit(&["a", "b", "c"]),
            Err(Error::LengthMismatch { expected: 4, found: 3 })
        ));
        assert!(ConvClassifier::new(2, 0).is_err());
        assert!(ConvClassifier::new(3, 0).is_ok());
    }

    #[test]
    fn zero_norm_rows_are_zero_off_diagonal() {
        let s = similarity_matrix(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![2.0, 0.0]]);
        assert_eq!(s.get(0, 0), 1.0);
        assert_eq!(s.get(0, 1), 0.0);
        assert_eq!(s.get(2, 0), 0.0);
        assert_eq!(s.get(1, 2), 1.0);
    }

    #[test]
    fn identical_endings_fill_matrix_with_ones() {
        let d = small(4, 2);
        let s = d.similarity(&["day", "day", "day", "day"]);
        for v in s.as_slice() {
            assert!((v - 1.0).abs() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn similarity_invariants(reps in prop::collection::vec(prop::collection::vec(-5.0f64..5.0, 4), 2..7)) {
            let s = similarity_matrix(&reps);
            let n = reps.len();
            for i in 0..n {
                prop_assert_eq!(s.get(i, i), 1.0);
                for j in 0..n {
                    prop_assert_eq!(s.get(i, j), s.get(j, i));
                    prop_assert!((-1.0..=1.0).contains(&s.get(i, j)));
                }
            }
        }

        #[test]
        fn encoder_similarity_invariants(words in prop::collection::vec("[a-z'-]{0,8}", 4)) {
            let d = small(4, 4);
            let w: Vec<&str> = words.iter().map(|s| s.as_str()).collect();
            let s = d.similarity(&w);
            for i in 0..4 {
                prop_assert_eq!(s.get(i, i), 1.0);
                for j in 0..4 {
                    prop_assert_eq!(s.get(i, j), s.get(j, i));
                    prop_assert!((-1.0..=1.0).contains(&s.get(i, j)));
                }
            }
            let p = d.score(&w).unwrap();
            prop_assert!(p > 0.0 && p < 1.0);
        }
    }
}
