//! Hierarchical poem language model.
//!
//! Generation runs in two stages. An ending-word LSTM emits the `T` line
//! endings, last line first. A line LSTM then writes each line right to left:
//! its initial hidden state is a learned projection of the line's ending-word
//! embedding concatenated with the final ending-net state, its first input is
//! the ending word itself, and it stops by emitting the line-start marker (or
//! at the length cap). Lines are produced last line first.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{DatasetSpec, Poem, Vocab, LINE_START, POEM_START, UNK};
use crate::nn::math::tanh;
use crate::nn::softmax::{log_prob_grad_acc, log_softmax_masked, sample_log_probs};
use crate::nn::{Embedding, Linear, Lstm, LstmState, LstmStep, Parameterized};
use crate::rng::{self, streams};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub embed_dim: usize,
    pub hidden: usize,
    /// Word tokens per line, ending word included.
    pub max_line_length: usize,
    /// Half-width of the uniform embedding init.
    pub init_bound: f64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            embed_dim: 100,
            hidden: 128,
            max_line_length: 12,
            init_bound: 0.05,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleConfig {
    pub temperature: f64,
    pub forbid_unk: bool,
    pub seed: u64,
    pub max_line_length: usize,
}

impl Default for SampleConfig {
    fn default() -> Self {
        SampleConfig {
            temperature: 0.7,
            forbid_unk: true,
            seed: 0,
            max_line_length: 12,
        }
    }
}

impl SampleConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.temperature > 0.0) || !self.temperature.is_finite() {
            return Err(Error::InvalidConfig("temperature must be positive".to_string()));
        }
        if self.max_line_length == 0 {
            return Err(Error::InvalidConfig("max_line_length must be at least 1".to_string()));
        }
        Ok(())
    }

    fn policy(&self) -> Policy {
        Policy {
            temperature: self.temperature,
            forbid_unk: self.forbid_unk,
        }
    }
}

/// The distribution tokens are drawn from: model logits divided by
/// `temperature`, optionally with UNK removed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Policy {
    pub temperature: f64,
    pub forbid_unk: bool,
}

impl Policy {
    /// The model's own distribution.
    pub const MODEL: Policy = Policy {
        temperature: 1.0,
        forbid_unk: false,
    };

    fn ending_allowed(self) -> impl Fn(usize) -> bool {
        move |i| {
            i != LINE_START as usize && i != POEM_START as usize && !(self.forbid_unk && i == UNK as usize)
        }
    }

    fn body_allowed(self) -> impl Fn(usize) -> bool {
        move |i| i != POEM_START as usize && !(self.forbid_unk && i == UNK as usize)
    }
}

/// Word vectors read from an external embedding file.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PretrainedEmbeddings {
    pub dim: usize,
    pub vectors: BTreeMap<String, Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorParams {
    pub embedding: Embedding,
    pub ending_lstm: Lstm,
    pub ending_out: Linear,
    /// `[embedding(ending); ending context] -> line initial state`
    pub cond: Linear,
    pub line_lstm: Lstm,
    pub line_out: Linear,
}

impl Parameterized for GeneratorParams {
    fn tensors(&self) -> Vec<&[f64]> {
        let mut t = self.embedding.tensors();
        t.extend(self.ending_lstm.tensors());
        t.extend(self.ending_out.tensors());
        t.extend(self.cond.tensors());
        t.extend(self.line_lstm.tensors());
        t.extend(self.line_out.tensors());
        t
    }

    fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        let mut t = self.embedding.tensors_mut();
        t.extend(self.ending_lstm.tensors_mut());
        t.extend(self.ending_out.tensors_mut());
        t.extend(self.cond.tensors_mut());
        t.extend(self.line_lstm.tensors_mut());
        t.extend(self.line_out.tensors_mut());
        t
    }
}

impl GeneratorParams {
    pub fn new<R: Rng + ?Sized>(vocab_size: usize, config: &GeneratorConfig, rng: &mut R) -> Self {
        let (e, h) = (config.embed_dim, config.hidden);
        GeneratorParams {
            embedding: Embedding::new(vocab_size, e, config.init_bound, rng),
            ending_lstm: Lstm::new(e, h, rng),
            ending_out: Linear::new(h, vocab_size, rng),
            cond: Linear::new(e + h, h, rng),
            line_lstm: Lstm::new(e, h, rng),
            line_out: Linear::new(h, vocab_size, rng),
        }
    }
}

/// Per-token log-probabilities of one poem, all in line order. Body tokens of
/// a line are listed in generation (right-to-left) order.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TokenLogProbs {
    pub ending: Vec<f64>,
    pub body: Vec<f64>,
    /// Line-start markers that closed each line; not word tokens.
    pub terminators: Vec<f64>,
}

impl TokenLogProbs {
    pub fn word_tokens(&self) -> usize {
        self.ending.len() + self.body.len()
    }

    /// Summed log-probability of the word tokens.
    pub fn word_log_prob(&self) -> f64 {
        self.ending.iter().sum::<f64>() + self.body.iter().sum::<f64>()
    }

    /// `log p(x)`, terminators included.
    pub fn total(&self) -> f64 {
        self.word_log_prob() + self.terminators.iter().sum::<f64>()
    }

    /// `-log p(x)` over the number of word tokens.
    pub fn per_token_nll(&self) -> f64 {
        -self.total() / self.word_tokens() as f64
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scope {
    Full,
    /// Only the ending-word log-probabilities.
    EndingsOnly,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Generator {
    pub spec: DatasetSpec,
    pub vocab: Vocab,
    pub config: GeneratorConfig,
    pub params: GeneratorParams,
}

/// Ending words drawn from the generator, in line order.
#[derive(Clone, Debug, PartialEq)]
pub struct EndingSample {
    pub ids: Vec<u32>,
    pub log_probs: Vec<f64>,
    pub context: Vec<f64>,
}

struct EndingPass {
    steps: Vec<LstmStep>,
    /// Log-prob vectors for each predicted position, in generation order.
    log_probs: Vec<Vec<f64>>,
}

impl EndingPass {
    fn context(&self) -> &[f64] {
        &self.steps.last().expect("at least one step").h
    }
}

struct LinePass {
    init_input: Vec<f64>,
    init: Vec<f64>,
    inputs: Vec<u32>,
    steps: Vec<LstmStep>,
    targets: Vec<u32>,
    log_probs: Vec<Vec<f64>>,
}

impl Generator {
    pub fn new(
        vocab: Vocab,
        spec: DatasetSpec,
        config: GeneratorConfig,
        seed: u64,
        pretrained: Option<&PretrainedEmbeddings>,
    ) -> Result<Self> {
        spec.validate()?;
        if config.embed_dim == 0 || config.hidden == 0 || config.max_line_length == 0 {
            return Err(Error::InvalidConfig("generator dimensions must be positive".to_string()));
        }
        let mut rng = rng::stream(seed, streams::GENERATOR_INIT);
        let mut params = GeneratorParams::new(vocab.len(), &config, &mut rng);
        if let Some(pre) = pretrained {
            if pre.dim != config.embed_dim {
                return Err(Error::DimensionMismatch {
                    expected: config.embed_dim,
                    found: pre.dim,
                });
            }
            for w in vocab.words() {
                if let Some(v) = pre.vectors.get(w) {
                    if v.len() != pre.dim {
                        return Err(Error::DimensionMismatch {
                            expected: pre.dim,
                            found: v.len(),
                        });
                    }
                    let id = vocab.id(w) as usize;
                    params.embedding.table.row_mut(id).copy_from_slice(v);
                }
            }
        }
        Ok(Generator {
            spec,
            vocab,
            config,
            params,
        })
    }

    pub fn lines(&self) -> usize {
        self.spec.lines_per_poem
    }

    pub fn encode(&self, poem: &Poem) -> Vec<Vec<u32>> {
        self.vocab.encode_poem(poem)
    }

    fn ending_forward(&self, gen_order: &[u32], policy: Policy) -> EndingPass {
        let p = &self.params;
        let mut state = LstmState::zeros(self.config.hidden);
        let mut steps = Vec::with_capacity(gen_order.len() + 1);
        let mut log_probs = Vec::with_capacity(gen_order.len());
        let mut input = POEM_START;
        for k in 0..=gen_order.len() {
            let step = p.ending_lstm.step(p.embedding.get(input as usize), &state);
            state = step.state();
            if k < gen_order.len() {
                let logits = p.ending_out.forward(&step.h);
                log_probs.push(log_softmax_masked(&logits, policy.temperature, policy.ending_allowed()));
                input = gen_order[k];
            }
            steps.push(step);
        }
        EndingPass { steps, log_probs }
    }

    fn line_init(&self, ending: u32, context: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let mut x = self.params.embedding.get(ending as usize).to_vec();
        x.extend_from_slice(context);
        let init: Vec<f64> = self.params.cond.forward(&x).into_iter().map(tanh).collect();
        (x, init)
    }

    /// `line` is in reading order and ends with its ending word.
    fn line_forward(&self, line: &[u32], context: &[f64], policy: Policy) -> LinePass {
        let p = &self.params;
        let n = line.len();
        let ending = line[n - 1];
        let (init_input, init) = self.line_init(ending, context);
        let mut inputs: Vec<u32> = Vec::with_capacity(n);
        inputs.push(ending);
        inputs.extend(line[..n - 1].iter().rev());
        let mut targets: Vec<u32> = line[..n - 1].iter().rev().copied().collect();
        if n < self.config.max_line_length {
            targets.push(LINE_START);
        }
        let mut state = LstmState {
            h: init.clone(),
            c: vec![0.0; self.config.hidden],
        };
        let mut steps = Vec::with_capacity(targets.len());
        let mut log_probs = Vec::with_capacity(targets.len());
        for t in 0..targets.len() {
            let step = p.line_lstm.step(p.embedding.get(inputs[t] as usize), &state);
            state = step.state();
            let logits = p.line_out.forward(&step.h);
            log_probs.push(log_softmax_masked(&logits, policy.temperature, policy.body_allowed()));
            steps.push(step);
        }
        LinePass {
            init_input,
            init,
            inputs,
            steps,
            targets,
            log_probs,
        }
    }

    /// Backpropagates `coeff * d log p(line)` and returns the gradient w.r.t.
    /// the ending context.
    fn line_backward(&self, pass: &LinePass, policy: Policy, coeff: f64, grad: &mut GeneratorParams) -> Vec<f64> {
        let p = &self.params;
        let h = self.config.hidden;
        let e = self.config.embed_dim;
        let mut dh_next = vec![0.0; h];
        let mut dc_next = vec![0.0; h];
        for t in (0..pass.steps.len()).rev() {
            let step = &pass.steps[t];
            let mut dlogits = vec![0.0; self.vocab.len()];
            log_prob_grad_acc(&pass.log_probs[t], pass.targets[t] as usize, policy.temperature, coeff, &mut dlogits);
            let mut dh = dh_next.clone();
            p.line_out.backward(&step.h, &dlogits, &mut grad.line_out, Some(&mut dh));
            let mut dx = vec![0.0; e];
            let mut dh_prev = vec![0.0; h];
            let mut dc_prev = vec![0.0; h];
            p.line_lstm
                .step_backward(step, &dh, &dc_next, &mut grad.line_lstm, &mut dx, &mut dh_prev, &mut dc_prev);
            p.embedding.backward(pass.inputs[t] as usize, &dx, &mut grad.embedding);
            dh_next = dh_prev;
            dc_next = dc_prev;
        }
        let dpre: Vec<f64> = dh_next
            .iter()
            .zip(&pass.init)
            .map(|(d, y)| d * (1.0 - y * y))
            .collect();
        let mut dx = vec![0.0; e + h];
        p.cond.backward(&pass.init_input, &dpre, &mut grad.cond, Some(&mut dx));
        p.embedding.backward(pass.inputs[0] as usize, &dx[..e], &mut grad.embedding);
        dx[e..].to_vec()
    }

    fn ending_backward(
        &self,
        pass: &EndingPass,
        gen_order: &[u32],
        policy: Policy,
        coeff: f64,
        dcontext: Option<&[f64]>,
        grad: &mut GeneratorParams,
    ) {
        let p = &self.params;
        let h = self.config.hidden;
        let e = self.config.embed_dim;
        let mut dh_next = match dcontext {
            Some(d) => d.to_vec(),
            None => vec![0.0; h],
        };
        let mut dc_next = vec![0.0; h];
        for k in (0..pass.steps.len()).rev() {
            let step = &pass.steps[k];
            let mut dh = dh_next.clone();
            if k < gen_order.len() {
                let mut dlogits = vec![0.0; self.vocab.len()];
                log_prob_grad_acc(&pass.log_probs[k], gen_order[k] as usize, policy.temperature, coeff, &mut dlogits);
                p.ending_out.backward(&step.h, &dlogits, &mut grad.ending_out, Some(&mut dh));
            }
            let mut dx = vec![0.0; e];
            let mut dh_prev = vec![0.0; h];
            let mut dc_prev = vec![0.0; h];
            p.ending_lstm
                .step_backward(step, &dh, &dc_next, &mut grad.ending_lstm, &mut dx, &mut dh_prev, &mut dc_prev);
            let input = if k == 0 { POEM_START } else { gen_order[k - 1] };
            p.embedding.backward(input as usize, &dx, &mut grad.embedding);
            dh_next = dh_prev;
            dc_next = dc_prev;
        }
    }

    /// Scores an encoded poem under `policy` and, when `grad` is given, adds
    /// `coeff * d log p / d params` into it. With [`Scope::EndingsOnly`] the
    /// line model is not evaluated.
    pub fn accumulate(
        &self,
        poem: &[Vec<u32>],
        scope: Scope,
        policy: Policy,
        coeff: f64,
        grad: Option<&mut GeneratorParams>,
    ) -> TokenLogProbs {
        let t = poem.len();
        let gen_order: Vec<u32> = poem.iter().rev().map(|l| *l.last().expect("nonempty line")).collect();
        let ending_pass = self.ending_forward(&gen_order, policy);
        let mut out = TokenLogProbs {
            ending: (0..t)
                .map(|i| ending_pass.log_probs[t - 1 - i][gen_order[t - 1 - i] as usize])
                .collect(),
            ..Default::default()
        };
        let line_passes: Vec<LinePass> = match scope {
            Scope::Full => poem
                .iter()
                .map(|l| self.line_forward(l, ending_pass.context(), policy))
                .collect(),
            Scope::EndingsOnly => Vec::new(),
        };
        for lp in &line_passes {
            let n_body = lp.inputs.len() - 1;
            for (k, &target) in lp.targets.iter().enumerate() {
                let v = lp.log_probs[k][target as usize];
                if k < n_body {
                    out.body.push(v);
                } else {
                    out.terminators.push(v);
                }
            }
        }
        if let Some(grad) = grad {
            let mut dctx = vec![0.0; self.config.hidden];
            for lp in &line_passes {
                let d = self.line_backward(lp, policy, coeff, grad);
                crate::nn::math::axpy(1.0, &d, &mut dctx);
            }
            let dctx = if line_passes.is_empty() { None } else { Some(dctx.as_slice()) };
            self.ending_backward(&ending_pass, &gen_order, policy, coeff, dctx, grad);
        }
        out
    }

    /// Log-probabilities of `poem` under the model. Out-of-vocabulary words
    /// are scored as UNK.
    pub fn log_prob(&self, poem: &Poem) -> TokenLogProbs {
        let ids = self.encode(poem);
        self.accumulate(&ids, Scope::Full, Policy::MODEL, 0.0, None)
    }

    /// Samples ending ids under `policy`.
    pub fn sample_ending_ids<R: Rng + ?Sized>(&self, policy: Policy, rng: &mut R) -> EndingSample {
        let p = &self.params;
        let t = self.lines();
        let mut state = LstmState::zeros(self.config.hidden);
        let mut input = POEM_START;
        let mut gen_ids = Vec::with_capacity(t);
        let mut gen_lps = Vec::with_capacity(t);
        for k in 0..=t {
            let step = p.ending_lstm.step(p.embedding.get(input as usize), &state);
            state = step.state();
            if k < t {
                let logits = p.ending_out.forward(&step.h);
                let lp = log_softmax_masked(&logits, policy.temperature, policy.ending_allowed());
                let id = sample_log_probs(&lp, rng) as u32;
                gen_ids.push(id);
                gen_lps.push(lp[id as usize]);
                input = id;
            }
        }
        gen_ids.reverse();
        gen_lps.reverse();
        EndingSample {
            ids: gen_ids,
            log_probs: gen_lps,
            context: state.h,
        }
    }

    /// Samples the `T` ending words (line order) and their sampling
    /// log-probabilities.
    pub fn sample_ending_words(&self, config: &SampleConfig) -> (Vec<String>, Vec<f64>) {
        let mut rng = rng::stream(config.seed, streams::SAMPLING);
        let s = self.sample_ending_ids(config.policy(), &mut rng);
        (
            s.ids.iter().map(|&i| self.vocab.word(i).to_string()).collect(),
            s.log_probs,
        )
    }

    fn sample_line_body<R: Rng + ?Sized>(
        &self,
        ending: u32,
        context: &[f64],
        config: &SampleConfig,
        rng: &mut R,
    ) -> (Vec<u32>, Vec<f64>, Option<f64>) {
        let p = &self.params;
        let policy = config.policy();
        let (_, init) = self.line_init(ending, context);
        let mut state = LstmState {
            h: init,
            c: vec![0.0; self.config.hidden],
        };
        let mut input = ending;
        let mut body = Vec::new();
        let mut lps = Vec::new();
        let mut terminator = None;
        while body.len() + 1 < config.max_line_length {
            let step = p.line_lstm.step(p.embedding.get(input as usize), &state);
            state = step.state();
            let logits = p.line_out.forward(&step.h);
            let lp = log_softmax_masked(&logits, policy.temperature, policy.body_allowed());
            let id = sample_log_probs(&lp, rng) as u32;
            if id == LINE_START {
                terminator = Some(lp[id as usize]);
                break;
            }
            body.push(id);
            lps.push(lp[id as usize]);
            input = id;
        }
        body.reverse();
        (body, lps, terminator)
    }

    /// Samples a full poem with its per-token sampling log-probabilities.
    pub fn sample_poem_with<R: Rng + ?Sized>(&self, config: &SampleConfig, rng: &mut R) -> (Poem, TokenLogProbs) {
        let t = self.lines();
        let endings = self.sample_ending_ids(config.policy(), rng);
        let mut lines: Vec<Vec<u32>> = vec![Vec::new(); t];
        let mut body_lps: Vec<Vec<f64>> = vec![Vec::new(); t];
        let mut terms: Vec<Option<f64>> = vec![None; t];
        for i in (0..t).rev() {
            let (mut body, lps, term) = self.sample_line_body(endings.ids[i], &endings.context, config, rng);
            body.push(endings.ids[i]);
            lines[i] = body;
            body_lps[i] = lps;
            terms[i] = term;
        }
        let poem = Poem::new(lines.iter().map(|l| self.vocab.decode_line(l)).collect());
        let lps = TokenLogProbs {
            ending: endings.log_probs,
            body: body_lps.into_iter().flatten().collect(),
            terminators: terms.into_iter().flatten().collect(),
        };
        (poem, lps)
    }

    pub fn sample_poem(&self, config: &SampleConfig) -> Poem {
        let mut rng = rng::stream(config.seed, streams::SAMPLING);
        self.sample_poem_with(config, &mut rng).0
    }
}
