use alloc::vec;
use alloc::vec::Vec;
use rand::Rng;

use super::math::{sigmoid, tanh};
use super::{Matrix, Parameterized};

/// Single-layer LSTM. Gate blocks in `w` and `b` are ordered
/// input, forget, candidate, output; the weight matrix acts on `[x; h_prev]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Lstm {
    input: usize,
    hidden: usize,
    pub w: Matrix,
    pub b: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LstmState {
    pub h: Vec<f64>,
    pub c: Vec<f64>,
}

impl LstmState {
    pub fn zeros(hidden: usize) -> Self {
        LstmState {
            h: vec![0.0; hidden],
            c: vec![0.0; hidden],
        }
    }
}

/// Everything one forward step needs to run backward later.
#[derive(Clone, Debug)]
pub struct LstmStep {
    xh: Vec<f64>,
    c_prev: Vec<f64>,
    gates: Vec<f64>,
    tanh_c: Vec<f64>,
    pub c: Vec<f64>,
    pub h: Vec<f64>,
}

impl LstmStep {
    pub fn state(&self) -> LstmState {
        LstmState {
            h: self.h.clone(),
            c: self.c.clone(),
        }
    }
}

impl Lstm {
    pub fn new<R: Rng + ?Sized>(input: usize, hidden: usize, rng: &mut R) -> Self {
        let bound = 1.0 / libm::sqrt(hidden as f64);
        let mut b = vec![0.0; 4 * hidden];
        b[hidden..2 * hidden].fill(1.0);
        Lstm {
            input,
            hidden,
            w: Matrix::uniform(4 * hidden, input + hidden, bound, rng),
            b,
        }
    }

    pub fn input_dim(&self) -> usize {
        self.input
    }

    pub fn hidden_dim(&self) -> usize {
        self.hidden
    }

    pub fn step(&self, x: &[f64], prev: &LstmState) -> LstmStep {
        let h = self.hidden;
        debug_assert_eq!(x.len(), self.input);
        let mut xh = Vec::with_capacity(self.input + h);
        xh.extend_from_slice(x);
        xh.extend_from_slice(&prev.h);

        let mut gates = self.b.clone();
        self.w.matvec_acc(&xh, &mut gates);
        for k in 0..h {
            gates[k] = sigmoid(gates[k]);
            gates[h + k] = sigmoid(gates[h + k]);
            gates[2 * h + k] = tanh(gates[2 * h + k]);
            gates[3 * h + k] = sigmoid(gates[3 * h + k]);
        }
        let mut c = vec![0.0; h];
        let mut tanh_c = vec![0.0; h];
        let mut hn = vec![0.0; h];
        for k in 0..h {
            c[k] = gates[h + k] * prev.c[k] + gates[k] * gates[2 * h + k];
            tanh_c[k] = tanh(c[k]);
            hn[k] = gates[3 * h + k] * tanh_c[k];
        }
        LstmStep {
            xh,
            c_prev: prev.c.clone(),
            gates,
            tanh_c,
            c,
            h: hn,
        }
    }

    /// Backpropagates `dh`/`dc` (gradients w.r.t. this step's outputs) into
    /// the parameters, the input and the previous state. All outputs are
    /// accumulated, never overwritten.
    #[allow(clippy::too_many_arguments)]
    pub fn step_backward(
        &self,
        step: &LstmStep,
        dh: &[f64],
        dc: &[f64],
        grad: &mut Lstm,
        dx: &mut [f64],
        dh_prev: &mut [f64],
        dc_prev: &mut [f64],
    ) {
        let h = self.hidden;
        let g = &step.gates;
        let mut da = vec![0.0; 4 * h];
        for k in 0..h {
            let (i, f, cand, o) = (g[k], g[h + k], g[2 * h + k], g[3 * h + k]);
            let tc = step.tanh_c[k];
            let dct = dc[k] + dh[k] * o * (1.0 - tc * tc);
            da[k] = dct * cand * i * (1.0 - i);
            da[h + k] = dct * step.c_prev[k] * f * (1.0 - f);
            da[2 * h + k] = dct * i * (1.0 - cand * cand);
            da[3 * h + k] = dh[k] * tc * o * (1.0 - o);
            dc_prev[k] += dct * f;
        }
        grad.w.outer_acc(&da, &step.xh);
        for (gb, d) in grad.b.iter_mut().zip(&da) {
            *gb += d;
        }
        let mut dxh = vec![0.0; self.input + h];
        self.w.matvec_t_acc(&da, &mut dxh);
        for (d, s) in dx.iter_mut().zip(&dxh[..self.input]) {
            *d += s;
        }
        for (d, s) in dh_prev.iter_mut().zip(&dxh[self.input..]) {
            *d += s;
        }
    }
}

impl Parameterized for Lstm {
    fn tensors(&self) -> Vec<&[f64]> {
        vec![self.w.as_slice(), &self.b]
    }

    fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        vec![self.w.as_mut_slice(), &mut self.b]
    }
}
