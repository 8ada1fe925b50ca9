//! Joint training: likelihood for the generator, a REINFORCE estimate of the
//! adversarial term on ending words, and discriminator updates.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{ending_words, Corpus, Poem};
use crate::discriminator::{pair_backward, AnyDiscriminator, Architecture, Discriminator, LOG_EPS};
use crate::evaluation::{heldout_nll, sample_ending_words, sampling_report};
use crate::generator::{Generator, Policy, Scope};
use crate::nn::math::ln;
use crate::nn::{Adam, Parameterized};
use crate::phonetics::{PronDict, Strictness};
use crate::rng::{self, streams};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    RhymeLm,
    RhymeGan,
    RhymeGanNs,
}

impl Mode {
    pub fn architecture(self) -> Option<Architecture> {
        match self {
            Mode::RhymeLm => None,
            Mode::RhymeGan => Some(Architecture::Structured),
            Mode::RhymeGanNs => Some(Architecture::Sequence),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::RhymeLm => "rhyme_lm",
            Mode::RhymeGan => "rhyme_gan",
            Mode::RhymeGanNs => "rhyme_gan_ns",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rhyme_lm" => Ok(Mode::RhymeLm),
            "rhyme_gan" => Ok(Mode::RhymeGan),
            "rhyme_gan_ns" => Ok(Mode::RhymeGanNs),
            _ => Err(Error::InvalidConfig(alloc::format!("unknown mode {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RewardKind {
    /// `-log(1 - f)`
    #[default]
    Literal,
    /// `log f`
    NonSaturating,
}

impl RewardKind {
    pub fn reward(self, score: f64) -> f64 {
        match self {
            RewardKind::Literal => -ln((1.0 - score).max(LOG_EPS)),
            RewardKind::NonSaturating => ln(score.max(LOG_EPS)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub mode: Mode,
    pub lambda: f64,
    pub batch_size: usize,
    pub gen_lr: f64,
    pub disc_lr: f64,
    pub disc_steps: usize,
    pub baseline_decay: f64,
    pub epochs: usize,
    pub seed: u64,
    /// Policy-gradient samples per real poem in each generator step.
    pub samples_per_real: usize,
    pub reward: RewardKind,
    pub clip: f64,
    /// Mask UNK when sampling fakes and policy-gradient samples.
    pub forbid_unk: bool,
    /// Samples drawn for the per-epoch acceptance estimate; 0 disables it.
    pub eval_samples: usize,
    pub eval_temperature: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            mode: Mode::RhymeGan,
            lambda: 0.1,
            batch_size: 32,
            gen_lr: 1e-3,
            disc_lr: 1e-3,
            disc_steps: 1,
            baseline_decay: 0.9,
            epochs: 10,
            seed: 0,
            samples_per_real: 1,
            reward: RewardKind::Literal,
            clip: 5.0,
            forbid_unk: true,
            eval_samples: 1000,
            eval_temperature: 0.7,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return bad("lambda must be a finite nonnegative number");
        }
        if self.batch_size == 0 {
            return bad("batch_size must be positive");
        }
        if !(self.gen_lr > 0.0) || !(self.disc_lr > 0.0) {
            return bad("learning rates must be positive");
        }
        if !(0.0..1.0).contains(&self.baseline_decay) {
            return bad("baseline_decay must be in [0, 1)");
        }
        if self.samples_per_real == 0 {
            return bad("samples_per_real must be positive");
        }
        if !(self.clip > 0.0) {
            return bad("clip must be positive");
        }
        if !(self.eval_temperature > 0.0) {
            return bad("eval_temperature must be positive");
        }
        Ok(())
    }

    /// The adversarial weight actually applied; always 0 for the plain
    /// language model.
    pub fn adversarial_weight(&self) -> f64 {
        match self.mode {
            Mode::RhymeLm => 0.0,
            _ => self.lambda,
        }
    }

    /// Distribution used for fakes and policy-gradient samples.
    pub fn sampling_policy(&self) -> Policy {
        Policy {
            temperature: 1.0,
            forbid_unk: self.forbid_unk,
        }
    }
}

/// Exponential moving average of observed rewards.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RewardBaseline {
    pub value: f64,
    pub decay: f64,
}

impl RewardBaseline {
    pub fn new(decay: f64) -> Self {
        RewardBaseline { value: 0.0, decay }
    }

    pub fn update(&mut self, reward: f64) {
        self.value = self.decay * self.value + (1.0 - self.decay) * reward;
    }
}

/// Anything that scores ending words as real with a probability.
pub trait EndingScorer {
    fn score_endings(&self, endings: &[&str]) -> Result<f64>;
}

impl<D: Discriminator> EndingScorer for D {
    fn score_endings(&self, endings: &[&str]) -> Result<f64> {
        self.score(endings)
    }
}

/// Samples `n` ending tuples under `policy` and adds
/// `-scale * (r - baseline) * d log p(endings)` into `grad` for each.
/// Returns the rewards.
#[allow(clippy::too_many_arguments)]
pub fn reinforce_accumulate<S: EndingScorer + ?Sized, R: Rng + ?Sized>(
    gen: &Generator,
    scorer: &S,
    n: usize,
    policy: Policy,
    reward: RewardKind,
    baseline: f64,
    scale: f64,
    rng: &mut R,
    grad: &mut crate::generator::GeneratorParams,
) -> Result<Vec<f64>> {
    let mut rewards = Vec::with_capacity(n);
    for _ in 0..n {
        let sample = gen.sample_ending_ids(policy, rng);
        let words: Vec<&str> = sample.ids.iter().map(|&i| gen.vocab.word(i)).collect();
        let r = reward.reward(scorer.score_endings(&words)?);
        let lines: Vec<Vec<u32>> = sample.ids.iter().map(|&i| vec![i]).collect();
        gen.accumulate(&lines, Scope::EndingsOnly, policy, -scale * (r - baseline), Some(grad));
        rewards.push(r);
    }
    Ok(rewards)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenStepStats {
    /// Mean negative log-likelihood per poem.
    pub mle_loss: f64,
    pub word_nll: f64,
    pub word_tokens: usize,
    pub mean_reward: Option<f64>,
    pub baseline: f64,
    pub grad_norm: f64,
    pub skipped: bool,
}

/// One generator update on `batch`: mean negative log-likelihood plus, when
/// `lambda > 0` and a scorer is given, the policy-gradient term.
#[allow(clippy::too_many_arguments)]
pub fn generator_step<S: EndingScorer + ?Sized, R: Rng + ?Sized>(
    gen: &mut Generator,
    adam: &mut Adam,
    batch: &[Poem],
    scorer: Option<&S>,
    cfg: &TrainConfig,
    baseline: &mut RewardBaseline,
    rng: &mut R,
) -> Result<GenStepStats> {
    let mut grad = gen.params.zeros_like();
    let b = batch.len().max(1) as f64;
    let (mut total, mut word_lp, mut tokens) = (0.0, 0.0, 0);
    for poem in batch {
        let ids = gen.encode(poem);
        let lp = gen.accumulate(&ids, Scope::Full, Policy::MODEL, -1.0 / b, Some(&mut grad));
        total -= lp.total();
        word_lp += lp.total();
        tokens += lp.word_tokens();
    }
    let lambda = cfg.adversarial_weight();
    let mut rewards = Vec::new();
    if lambda > 0.0 {
        if let Some(scorer) = scorer {
            let n = batch.len() * cfg.samples_per_real;
            rewards = reinforce_accumulate(
                gen,
                scorer,
                n,
                cfg.sampling_policy(),
                cfg.reward,
                baseline.value,
                lambda / n.max(1) as f64,
                rng,
                &mut grad,
            )?;
        }
    }
    let mean_reward = (!rewards.is_empty()).then(|| rewards.iter().sum::<f64>() / rewards.len() as f64);
    let mut stats = GenStepStats {
        mle_loss: total / b,
        word_nll: -word_lp / tokens.max(1) as f64,
        word_tokens: tokens,
        mean_reward,
        baseline: baseline.value,
        grad_norm: 0.0,
        skipped: false,
    };
    if !stats.mle_loss.is_finite() || !mean_reward.unwrap_or(0.0).is_finite() || !grad.is_finite() {
        log::warn!("non-finite generator loss or gradient; skipping batch");
        stats.skipped = true;
        return Ok(stats);
    }
    stats.grad_norm = grad.clip_norm(cfg.clip);
    adam.step(&mut gen.params, &grad);
    if let Some(r) = mean_reward {
        baseline.update(r);
    }
    Ok(stats)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscStepStats {
    pub loss: f64,
    pub mean_real_score: f64,
    pub mean_fake_score: f64,
    pub grad_norm: f64,
    pub skipped: bool,
}

/// One discriminator update: every real poem is paired with one freshly
/// sampled fake and the mean pair loss is descended.
pub fn discriminator_step<D: Discriminator, R: Rng + ?Sized>(
    disc: &mut D,
    adam: &mut Adam,
    gen: &Generator,
    real: &[Poem],
    cfg: &TrainConfig,
    rng: &mut R,
) -> Result<DiscStepStats> {
    let mut grad = disc.zeros_like();
    let pairs = real.len().max(1) as f64;
    let (mut loss, mut real_score, mut fake_score) = (0.0, 0.0, 0.0);
    for poem in real {
        let real_end = ending_words(poem);
        let fake = sample_ending_words(gen, cfg.sampling_policy(), rng);
        let fake_end: Vec<&str> = fake.iter().map(String::as_str).collect();
        let (l, pr, pf) = pair_backward(disc, &real_end, &fake_end, 1.0 / pairs, &mut grad)?;
        loss += l;
        real_score += pr;
        fake_score += pf;
    }
    let mut stats = DiscStepStats {
        loss: loss / pairs,
        mean_real_score: real_score / pairs,
        mean_fake_score: fake_score / pairs,
        grad_norm: 0.0,
        skipped: false,
    };
    if !stats.loss.is_finite() || !grad.is_finite() {
        log::warn!("non-finite discriminator loss or gradient; skipping batch");
        stats.skipped = true;
        return Ok(stats);
    }
    stats.grad_norm = grad.clip_norm(cfg.clip);
    adam.step(disc, &grad);
    Ok(stats)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepKind {
    Discriminator,
    Generator,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub epoch: usize,
    /// Index of the batch within the run.
    pub batch: usize,
    pub kind: StepKind,
    pub loss: f64,
    pub mean_reward: Option<f64>,
    pub baseline: Option<f64>,
    pub mean_real_score: Option<f64>,
    pub mean_fake_score: Option<f64>,
    pub skipped: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_nll: f64,
    pub dev_nll: Option<f64>,
    pub acceptance_fraction: Option<f64>,
    pub eval_samples: usize,
    pub mean_disc_loss: Option<f64>,
    pub mean_reward: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainLog {
    pub steps: Vec<StepRecord>,
    pub epochs: Vec<EpochRecord>,
}

impl TrainLog {
    pub fn schedule(&self) -> Vec<StepKind> {
        self.steps.iter().map(|s| s.kind).collect()
    }
}

pub enum TrainEvent<'a> {
    Step(&'a StepRecord),
    Epoch {
        record: &'a EpochRecord,
        generator: &'a Generator,
        discriminator: Option<&'a AnyDiscriminator>,
    },
}

pub struct TrainOutcome {
    pub generator: Generator,
    pub discriminator: Option<AnyDiscriminator>,
    pub log: TrainLog,
}

fn mean(v: &[f64]) -> Option<f64> {
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

/// Runs `cfg.epochs` epochs over the training split. Each batch gets
/// `cfg.disc_steps` discriminator updates followed by one generator update.
/// `observer` sees every record and, after each epoch, the current models.
pub fn train(
    corpus: &Corpus,
    mut gen: Generator,
    disc: Option<AnyDiscriminator>,
    cfg: &TrainConfig,
    dict: &PronDict,
    observer: &mut dyn FnMut(TrainEvent<'_>) -> Result<()>,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    if corpus.train.is_empty() {
        return Err(Error::EmptySplit);
    }
    let mut disc = match (cfg.mode.architecture(), disc) {
        (None, _) => None,
        (Some(arch), Some(d)) if d.architecture() == arch => Some(d),
        (Some(arch), _) => {
            return Err(Error::InvalidConfig(alloc::format!(
                "mode {} needs a {arch:?} discriminator",
                cfg.mode
            )))
        }
    };
    if let Some(d) = &disc {
        if d.lines() != gen.lines() {
            return Err(Error::LengthMismatch {
                expected: gen.lines(),
                found: d.lines(),
            });
        }
    }
    let mut gen_adam = Adam::new(&gen.params, cfg.gen_lr);
    let mut disc_adam = disc.as_ref().map(|d| Adam::new(d, cfg.disc_lr));
    let mut baseline = RewardBaseline::new(cfg.baseline_decay);
    let mut shuffle_rng = rng::stream(cfg.seed, streams::SHUFFLE);
    let mut fake_rng = rng::stream(cfg.seed, streams::FAKES);
    let mut pg_rng = rng::stream(cfg.seed, streams::REINFORCE);
    let mut log = TrainLog::default();
    let mut order: Vec<usize> = (0..corpus.train.len()).collect();
    let mut batch_index = 0;

    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut shuffle_rng);
        let (mut word_nll, mut tokens) = (0.0, 0usize);
        let mut disc_losses = Vec::new();
        let mut rewards = Vec::new();
        for chunk in order.chunks(cfg.batch_size) {
            let batch: Vec<Poem> = chunk.iter().map(|&i| corpus.train[i].clone()).collect();
            if let (Some(d), Some(adam)) = (disc.as_mut(), disc_adam.as_mut()) {
                for _ in 0..cfg.disc_steps {
                    let s = discriminator_step(d, adam, &gen, &batch, cfg, &mut fake_rng)?;
                    disc_losses.push(s.loss);
                    let rec = StepRecord {
                        epoch,
                        batch: batch_index,
                        kind: StepKind::Discriminator,
                        loss: s.loss,
                        mean_reward: None,
                        baseline: None,
                        mean_real_score: Some(s.mean_real_score),
                        mean_fake_score: Some(s.mean_fake_score),
                        skipped: s.skipped,
                    };
                    observer(TrainEvent::Step(&rec))?;
                    log.steps.push(rec);
                }
            }
            let s = generator_step(&mut gen, &mut gen_adam, &batch, disc.as_ref(), cfg, &mut baseline, &mut pg_rng)?;
            if !s.skipped {
                word_nll += s.word_nll * s.word_tokens as f64;
                tokens += s.word_tokens;
            }
            if let Some(r) = s.mean_reward {
                rewards.push(r);
            }
            let rec = StepRecord {
                epoch,
                batch: batch_index,
                kind: StepKind::Generator,
                loss: s.mle_loss,
                mean_reward: s.mean_reward,
                baseline: s.mean_reward.map(|_| baseline.value),
                mean_real_score: None,
                mean_fake_score: None,
                skipped: s.skipped,
            };
            observer(TrainEvent::Step(&rec))?;
            log.steps.push(rec);
            batch_index += 1;
        }

        let dev_nll = if corpus.dev.is_empty() {
            None
        } else {
            Some(heldout_nll(&corpus.dev, &gen)?.nll_per_token)
        };
        let acceptance_fraction = if cfg.eval_samples > 0 {
            let mut r = rng::substream(cfg.seed, streams::EVAL, epoch as u64);
            let policy = Policy {
                temperature: cfg.eval_temperature,
                forbid_unk: true,
            };
            let report = sampling_report(&gen.spec, dict, cfg.eval_samples, Strictness::Lenient, || {
                sample_ending_words(&gen, policy, &mut r)
            })?;
            Some(report.fraction)
        } else {
            None
        };
        let record = EpochRecord {
            epoch,
            train_nll: word_nll / tokens.max(1) as f64,
            dev_nll,
            acceptance_fraction,
            eval_samples: cfg.eval_samples,
            mean_disc_loss: mean(&disc_losses),
            mean_reward: mean(&rewards),
        };
        log::info!(
            "epoch {} train_nll {:.4} dev_nll {:?} acceptance {:?} disc_loss {:?}",
            epoch,
            record.train_nll,
            record.dev_nll,
            record.acceptance_fraction,
            record.mean_disc_loss
        );
        observer(TrainEvent::Epoch {
            record: &record,
            generator: &gen,
            discriminator: disc.as_ref(),
        })?;
        log.epochs.push(record);
    }
    Ok(TrainOutcome {
        generator: gen,
        discriminator: disc,
        log,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{make_synthetic_corpus, SyntheticSpec};
    use crate::corpus::{build_vocab, DatasetSpec, Vocab};
    use crate::discriminator::{CharEncoder, EncoderConfig, StructuredDiscriminator};
    use crate::generator::{GeneratorConfig, GeneratorParams};
    use crate::nn::math::{exp, sqrt};

    struct Table;

    impl EndingScorer for Table {
        fn score_endings(&self, e: &[&str]) -> Result<f64> {
            let v = |w: &str| match w {
                "a" => 0.0,
                "b" => 1.0,
                _ => 2.0,
            };
            Ok(0.05 + 0.1 * (3.0 * v(e[0]) + v(e[1])))
        }
    }

    struct Constant(f64);

    impl EndingScorer for Constant {
        fn score_endings(&self, _: &[&str]) -> Result<f64> {
            Ok(self.0)
        }
    }

    fn toy_generator() -> Generator {
        let cfg = GeneratorConfig {
            embed_dim: 3,
            hidden: 3,
            max_line_length: 3,
            init_bound: 0.8,
        };
        let spec = DatasetSpec::new("toy", 2, &["AA"]).unwrap();
        Generator::new(Vocab::from_words(["a", "b", "c"]), spec, cfg, 11, None).unwrap()
    }

    const POLICY: Policy = Policy {
        temperature: 1.0,
        forbid_unk: true,
    };

    fn outcomes(gen: &Generator) -> Vec<Vec<Vec<u32>>> {
        let ids: Vec<u32> = ["a", "b", "c"].iter().map(|w| gen.vocab.id(w)).collect();
        let mut out = Vec::new();
        for &x in &ids {
            for &y in &ids {
                out.push(vec![vec![x], vec![y]]);
            }
        }
        out
    }

    fn expected_reward(gen: &Generator) -> f64 {
        let mut e = 0.0;
        for o in outcomes(gen) {
            let lp = gen.accumulate(&o, Scope::EndingsOnly, POLICY, 0.0, None);
            let words: Vec<&str> = o.iter().map(|l| gen.vocab.word(l[0])).collect();
            e += exp(lp.total()) * RewardKind::Literal.reward(Table.score_endings(&words).unwrap());
        }
        e
    }

    #[test]
    fn toy_policy_mass_is_one() {
        let gen = toy_generator();
        let total: f64 = outcomes(&gen)
            .iter()
            .map(|o| exp(gen.accumulate(o, Scope::EndingsOnly, POLICY, 0.0, None).total()))
            .sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn reinforce_matches_enumerated_gradient() {
        let gen = toy_generator();
        // Exact gradient of E[r] by enumerating all nine outcomes.
        let mut exact = gen.params.zeros_like();
        for o in outcomes(&gen) {
            let lp = gen.accumulate(&o, Scope::EndingsOnly, POLICY, 0.0, None);
            let words: Vec<&str> = o.iter().map(|l| gen.vocab.word(l[0])).collect();
            let w = exp(lp.total()) * RewardKind::Literal.reward(Table.score_endings(&words).unwrap());
            gen.accumulate(&o, Scope::EndingsOnly, POLICY, w, Some(&mut exact));
        }
        let exact = exact.flatten();

        // The enumeration agrees with finite differences of E[r].
        let base = gen.params.flatten();
        let mut probe = gen.clone();
        for k in 0..base.len() {
            let mut v = base.clone();
            v[k] += 1e-6;
            probe.params.assign_flat(&v).unwrap();
            let up = expected_reward(&probe);
            v[k] -= 2e-6;
            probe.params.assign_flat(&v).unwrap();
            let down = expected_reward(&probe);
            let fd = (up - down) / 2e-6;
            assert!((fd - exact[k]).abs() < 1e-7, "param {k}: fd {fd} exact {}", exact[k]);
        }

        let n = 100_000;
        let mut sum = vec![0.0; base.len()];
        let mut sq = vec![0.0; base.len()];
        let mut r = rng::stream(0, streams::REINFORCE);
        for _ in 0..n {
            let mut g = gen.params.zeros_like();
            reinforce_accumulate(&gen, &Table, 1, POLICY, RewardKind::Literal, 0.0, -1.0, &mut r, &mut g).unwrap();
            for (k, x) in g.flatten().into_iter().enumerate() {
                sum[k] += x;
                sq[k] += x * x;
            }
        }
        for k in 0..base.len() {
            let m = sum[k] / n as f64;
            let se = sqrt((sq[k] / n as f64 - m * m).max(0.0) / n as f64);
            assert!((m - exact[k]).abs() <= 3.0 * se + 1e-12, "param {k}: mc {m} exact {} se {se}", exact[k]);
        }
    }

    #[test]
    fn reward_equal_to_baseline_contributes_nothing() {
        let gen = toy_generator();
        let f = 0.3;
        let b = RewardKind::Literal.reward(f);
        let mut g = gen.params.zeros_like();
        let mut r = rng::stream(1, 0);
        reinforce_accumulate(&gen, &Constant(f), 50, POLICY, RewardKind::Literal, b, 0.1, &mut r, &mut g).unwrap();
        assert!(g.flatten().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn baseline_starts_at_zero_and_tracks_rewards() {
        let mut b = RewardBaseline::new(0.9);
        assert_eq!(b.value, 0.0);
        b.update(1.0);
        assert!((b.value - 0.1).abs() < 1e-15);
        b.update(1.0);
        assert!((b.value - 0.19).abs() < 1e-15);
    }

    #[test]
    fn rewards_follow_their_definitions() {
        assert!((RewardKind::Literal.reward(0.5) - ln(2.0)).abs() < 1e-15);
        assert!((RewardKind::NonSaturating.reward(0.5) + ln(2.0)).abs() < 1e-15);
        assert!(RewardKind::Literal.reward(1.0).is_finite());
        assert!(RewardKind::NonSaturating.reward(0.0).is_finite());
    }

    fn tiny_setup() -> (Corpus, PronDict, Generator, AnyDiscriminator) {
        let mut s = SyntheticSpec::new(3, 40, 4, "AABB", 6).unwrap();
        s.words_per_family = 3;
        s.dev_poems = 6;
        s.test_poems = 6;
        let syn = make_synthetic_corpus(&s).unwrap();
        let vocab = build_vocab(&syn.corpus, None);
        let gcfg = GeneratorConfig {
            embed_dim: 6,
            hidden: 8,
            max_line_length: 5,
            init_bound: 0.1,
        };
        let gen = Generator::new(vocab, syn.corpus.spec.clone(), gcfg, 1, None).unwrap();
        let enc = CharEncoder::new(EncoderConfig { char_dim: 4, hidden: 6 }, &mut rng::stream(1, 0));
        let disc = AnyDiscriminator::Structured(StructuredDiscriminator::new(enc, 4, 1).unwrap());
        (syn.corpus.clone(), syn.pron_dict(), gen, disc)
    }

    fn run(mode: Mode, lambda: f64, disc_steps: usize) -> TrainOutcome {
        let (corpus, dict, gen, disc) = tiny_setup();
        let cfg = TrainConfig {
            mode,
            lambda,
            disc_steps,
            epochs: 2,
            batch_size: 8,
            eval_samples: 20,
            ..Default::default()
        };
        train(&corpus, gen, Some(disc), &cfg, &dict, &mut |_| Ok(())).unwrap()
    }

    #[test]
    fn lambda_zero_reduces_to_the_language_model() {
        let lm = run(Mode::RhymeLm, 0.1, 1);
        let gan = run(Mode::RhymeGan, 0.0, 1);
        let bits = |g: &GeneratorParams| g.flatten().iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&lm.generator.params), bits(&gan.generator.params));
        let dev = |o: &TrainOutcome| o.log.epochs.iter().map(|e| e.dev_nll).collect::<Vec<_>>();
        assert_eq!(dev(&lm), dev(&gan));
        assert!(lm.discriminator.is_none());
        assert!(gan.discriminator.is_some());
    }

    #[test]
    fn adversarial_term_changes_the_generator() {
        let lm = run(Mode::RhymeLm, 0.1, 1);
        let gan = run(Mode::RhymeGan, 0.1, 1);
        assert_ne!(lm.generator.params, gan.generator.params);
        assert!(gan.log.steps.iter().all(|s| s.loss.is_finite()));
    }

    #[test]
    fn schedule_interleaves_discriminator_steps() {
        let out = run(Mode::RhymeGan, 0.1, 2);
        let sched = out.log.schedule();
        // 34 training poems in batches of 8: 5 batches per epoch.
        assert_eq!(sched.len(), 2 * 5 * 3);
        for chunk in sched.chunks(3) {
            assert_eq!(chunk, [StepKind::Discriminator, StepKind::Discriminator, StepKind::Generator]);
        }
    }

    #[test]
    fn uninformative_discriminator_loss_is_two_ln_two() {
        let (corpus, _, gen, mut disc) = tiny_setup();
        if let AnyDiscriminator::Structured(d) = &mut disc {
            d.classifier.out.fill(0.0);
        }
        let mut adam = Adam::new(&disc, 1e-3);
        let before = gen.params.clone();
        let s = discriminator_step(&mut disc, &mut adam, &gen, &corpus.train[..8], &TrainConfig::default(), &mut rng::stream(0, 5)).unwrap();
        assert!((s.loss - 2.0 * ln(2.0)).abs() < 1e-12);
        assert_eq!(gen.params, before);
    }

    #[test]
    fn rejects_mismatched_discriminator() {
        let (corpus, dict, gen, disc) = tiny_setup();
        let cfg = TrainConfig {
            mode: Mode::RhymeGanNs,
            ..Default::default()
        };
        assert!(train(&corpus, gen, Some(disc), &cfg, &dict, &mut |_| Ok(())).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(TrainConfig::default().validate().is_ok());
        let bad = TrainConfig { lambda: -1.0, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = TrainConfig { baseline_decay: 1.0, ..Default::default() };
        assert!(bad.validate().is_err());
        assert_eq!("rhyme_gan_ns".parse::<Mode>().unwrap(), Mode::RhymeGanNs);
        assert!("gan".parse::<Mode>().is_err());
    }
}
