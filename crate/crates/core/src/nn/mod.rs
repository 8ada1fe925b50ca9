//! Minimal dense layers with hand-written backward passes.
//!
//! Gradients are stored in a value of the same type as the layer (see
//! [`Parameterized::zeros_like`]), which keeps optimizers, gradient checks and
//! checkpoints generic over any model that can list its tensors.

mod adam;
mod conv;
mod layers;
mod lstm;
pub mod math;
mod matrix;
pub mod softmax;

pub use adam::Adam;
pub use conv::Conv2x2;
pub use layers::{Embedding, Linear};
pub use lstm::{Lstm, LstmState, LstmStep};
pub use matrix::Matrix;

use alloc::vec::Vec;

/// A model whose trainable state is a fixed, ordered list of `f64` tensors.
pub trait Parameterized: Clone {
    fn tensors(&self) -> Vec<&[f64]>;
    fn tensors_mut(&mut self) -> Vec<&mut [f64]>;

    fn zeros_like(&self) -> Self {
        let mut out = self.clone();
        out.fill(0.0);
        out
    }

    fn fill(&mut self, value: f64) {
        for t in self.tensors_mut() {
            t.fill(value);
        }
    }

    fn num_params(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }

    fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.num_params());
        for t in self.tensors() {
            out.extend_from_slice(t);
        }
        out
    }

    /// Overwrites all tensors from a flat buffer laid out as [`Self::flatten`].
    fn assign_flat(&mut self, flat: &[f64]) -> crate::Result<()> {
        let n = self.num_params();
        if flat.len() != n {
            return Err(crate::Error::DimensionMismatch {
                expected: n,
                found: flat.len(),
            });
        }
        let mut offset = 0;
        for t in self.tensors_mut() {
            let len = t.len();
            t.copy_from_slice(&flat[offset..offset + len]);
            offset += len;
        }
        Ok(())
    }

    /// `self += scale * other`, tensor by tensor.
    fn add_scaled(&mut self, other: &Self, scale: f64) {
        for (dst, src) in self.tensors_mut().into_iter().zip(other.tensors()) {
            for (d, s) in dst.iter_mut().zip(src) {
                *d += scale * s;
            }
        }
    }

    fn sq_norm(&self) -> f64 {
        self.tensors()
            .iter()
            .map(|t| t.iter().map(|x| x * x).sum::<f64>())
            .sum()
    }

    fn is_finite(&self) -> bool {
        self.tensors().iter().all(|t| t.iter().all(|x| x.is_finite()))
    }

    /// Rescales the whole gradient so its global L2 norm is at most `max_norm`.
    /// Returns the norm before clipping.
    fn clip_norm(&mut self, max_norm: f64) -> f64 {
        let norm = math::sqrt(self.sq_norm());
        if norm > max_norm && norm.is_finite() {
            let scale = max_norm / norm;
            for t in self.tensors_mut() {
                for x in t.iter_mut() {
                    *x *= scale;
                }
            }
        }
        norm
    }
}
