use alloc::vec;
use alloc::vec::Vec;
use rand::Rng;

use super::Parameterized;

/// 2D convolution with 2x2 kernels, stride 1 and no padding.
///
/// Inputs and outputs are channel-major `[c][row][col]` buffers over square
/// maps; an `n x n` input yields an `(n-1) x (n-1)` output.
#[derive(Clone, Debug, PartialEq)]
pub struct Conv2x2 {
    in_channels: usize,
    out_channels: usize,
    /// `[out][in][ky][kx]`
    pub w: Vec<f64>,
    pub b: Vec<f64>,
}

impl Conv2x2 {
    pub fn new<R: Rng + ?Sized>(in_channels: usize, out_channels: usize, rng: &mut R) -> Self {
        let bound = 1.0 / libm::sqrt((in_channels * 4) as f64);
        Conv2x2 {
            in_channels,
            out_channels,
            w: (0..out_channels * in_channels * 4)
                .map(|_| rng.gen_range(-bound..=bound))
                .collect(),
            b: (0..out_channels)
                .map(|_| rng.gen_range(-bound..=bound))
                .collect(),
        }
    }

    pub fn in_channels(&self) -> usize {
        self.in_channels
    }

    pub fn out_channels(&self) -> usize {
        self.out_channels
    }

    #[inline]
    fn widx(&self, o: usize, i: usize, ky: usize, kx: usize) -> usize {
        ((o * self.in_channels + i) * 2 + ky) * 2 + kx
    }

    pub fn forward(&self, input: &[f64], n: usize) -> Vec<f64> {
        debug_assert_eq!(input.len(), self.in_channels * n * n);
        let m = n - 1;
        let mut out = vec![0.0; self.out_channels * m * m];
        for o in 0..self.out_channels {
            for y in 0..m {
                for x in 0..m {
                    let mut acc = self.b[o];
                    for i in 0..self.in_channels {
                        let base = i * n * n;
                        for ky in 0..2 {
                            for kx in 0..2 {
                                acc += self.w[self.widx(o, i, ky, kx)]
                                    * input[base + (y + ky) * n + x + kx];
                            }
                        }
                    }
                    out[(o * m + y) * m + x] = acc;
                }
            }
        }
        out
    }

    /// Accumulates kernel/bias gradients and returns the input gradient.
    pub fn backward(&self, input: &[f64], n: usize, dout: &[f64], grad: &mut Conv2x2) -> Vec<f64> {
        let m = n - 1;
        let mut dinput = vec![0.0; input.len()];
        for o in 0..self.out_channels {
            for y in 0..m {
                for x in 0..m {
                    let d = dout[(o * m + y) * m + x];
                    if d == 0.0 {
                        continue;
                    }
                    grad.b[o] += d;
                    for i in 0..self.in_channels {
                        let base = i * n * n;
                        for ky in 0..2 {
                            for kx in 0..2 {
                                let wi = self.widx(o, i, ky, kx);
                                let ii = base + (y + ky) * n + x + kx;
                                grad.w[wi] += d * input[ii];
                                dinput[ii] += d * self.w[wi];
                            }
                        }
                    }
                }
            }
        }
        dinput
    }
}

impl Parameterized for Conv2x2 {
    fn tensors(&self) -> Vec<&[f64]> {
        vec![&self.w, &self.b]
    }

    fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        vec![&mut self.w, &mut self.b]
    }
}
