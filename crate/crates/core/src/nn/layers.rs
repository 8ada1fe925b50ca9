use alloc::vec;
use alloc::vec::Vec;
use rand::Rng;

use super::{Matrix, Parameterized};

/// Affine map `y = W x + b`.
#[derive(Clone, Debug, PartialEq)]
pub struct Linear {
    pub w: Matrix,
    pub b: Vec<f64>,
}

impl Linear {
    pub fn new<R: Rng + ?Sized>(input: usize, output: usize, rng: &mut R) -> Self {
        let bound = 1.0 / libm::sqrt(input.max(1) as f64);
        Linear {
            w: Matrix::uniform(output, input, bound, rng),
            b: vec![0.0; output],
        }
    }

    pub fn input_dim(&self) -> usize {
        self.w.cols()
    }

    pub fn output_dim(&self) -> usize {
        self.w.rows()
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        let mut y = self.b.clone();
        self.w.matvec_acc(x, &mut y);
        y
    }

    /// Accumulates parameter gradients into `grad` and, when given, `W^T dy`
    /// into `dx`.
    pub fn backward(&self, x: &[f64], dy: &[f64], grad: &mut Linear, dx: Option<&mut [f64]>) {
        grad.w.outer_acc(dy, x);
        for (gb, g) in grad.b.iter_mut().zip(dy) {
            *gb += g;
        }
        if let Some(dx) = dx {
            self.w.matvec_t_acc(dy, dx);
        }
    }
}

impl Parameterized for Linear {
    fn tensors(&self) -> Vec<&[f64]> {
        vec![self.w.as_slice(), &self.b]
    }

    fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        vec![self.w.as_mut_slice(), &mut self.b]
    }
}

/// Lookup table of `n` vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct Embedding {
    pub table: Matrix,
}

impl Embedding {
    pub fn new<R: Rng + ?Sized>(n: usize, dim: usize, bound: f64, rng: &mut R) -> Self {
        Embedding {
            table: Matrix::uniform(n, dim, bound, rng),
        }
    }

    pub fn len(&self) -> usize {
        self.table.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.table.rows() == 0
    }

    pub fn dim(&self) -> usize {
        self.table.cols()
    }

    #[inline]
    pub fn get(&self, id: usize) -> &[f64] {
        self.table.row(id)
    }

    pub fn backward(&self, id: usize, dy: &[f64], grad: &mut Embedding) {
        super::math::axpy(1.0, dy, grad.table.row_mut(id));
    }
}

impl Parameterized for Embedding {
    fn tensors(&self) -> Vec<&[f64]> {
        vec![self.table.as_slice()]
    }

    fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        vec![self.table.as_mut_slice()]
    }
}
