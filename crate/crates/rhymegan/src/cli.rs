//! The `rhymegan` command line.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use log::{info, warn};
use serde::Serialize;
use serde_json::json;

use rhymegan_core::corpus::{
    build_vocab, filter_by_vocab, make_synthetic_corpus, Corpus, DatasetSpec, Poem, SyntheticSpec,
};
use rhymegan_core::discriminator::{
    pretrain_encoder, similarity_matrix, AnyDiscriminator, CharEncoder, Pretrainer, WordEncoder,
};
use rhymegan_core::evaluation::{
    grapheme_probe, heldout_nll, rhyme_probe, sampling_efficiency, tune_threshold, ProbeReport,
};
use rhymegan_core::generator::Generator;
use rhymegan_core::phonetics::{rhymes, rhyming_part, PronDict};
use rhymegan_core::rng::{self, streams};
use rhymegan_core::training::{train, Mode, TrainEvent};

use crate::checkpoint;
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::io;
use crate::jsonl::{JsonlWriter, TRAIN_LOG_FILE};

pub const DATA_DIR_ENV: &str = "RHYME_DATA_DIR";
pub const GENERATOR_CKPT: &str = "generator.ckpt";
pub const DISCRIMINATOR_CKPT: &str = "discriminator.ckpt";
pub const ENCODER_CKPT: &str = "encoder.ckpt";

#[derive(Debug, Parser)]
#[command(name = "rhymegan", version, about = "Poetry generation with a learned rhyme discriminator")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Corpus directory with train/valid/test splits.
    #[arg(long, global = true)]
    pub corpus: Option<PathBuf>,
    /// Pronunciation dictionary in cmudict format.
    #[arg(long, global = true)]
    pub cmudict: Option<PathBuf>,
    /// Built-in spec name (sonnet, sonnet-couplet, limerick) or a spec file.
    #[arg(long, global = true)]
    pub spec: Option<String>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub lambda: Option<f64>,
    /// rhyme_lm, rhyme_gan or rhyme_gan_ns.
    #[arg(long, global = true)]
    pub mode: Option<Mode>,
    #[arg(long, global = true)]
    pub temperature: Option<f64>,
    #[arg(long, global = true)]
    pub n: Option<usize>,
    #[arg(long, global = true)]
    pub epochs: Option<usize>,
    /// Checkpoint file, or a directory containing the expected checkpoint.
    #[arg(long, global = true)]
    pub checkpoint: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// key = value configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Override any configuration key.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    pub set: Vec<String>,
    /// Print JSON instead of a summary table.
    #[arg(long, global = true)]
    pub json: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate a raw corpus, apply the vocabulary cap and write it to --out.
    PrepareData,
    /// Write a synthetic rhyme corpus with known families to --out.
    MakeSynthetic(SyntheticArgs),
    /// Pretrain the character encoder as an autoencoder.
    PretrainEncoder {
        /// Word list (one per line); defaults to the corpus vocabulary.
        #[arg(long)]
        words: Option<PathBuf>,
    },
    /// Train a generator, optionally against a discriminator.
    Train,
    /// Print poems sampled from a generator checkpoint.
    Sample,
    /// Fraction of sampled poems whose endings satisfy an accepted pattern.
    EvalSampling {
        /// Also require lines with different letters not to rhyme.
        #[arg(long)]
        strict: bool,
    },
    /// Held-out negative log-likelihood per word token.
    EvalNll {
        #[arg(long, default_value = "test")]
        split: String,
    },
    /// Rhyme classification of ending-word pairs against the dictionary.
    EvalProbe {
        /// `encoder` (needs --checkpoint) or `grapheme-K` for K in 1..=3.
        #[arg(long, default_value = "encoder")]
        method: String,
    },
    /// Whether two words rhyme according to the dictionary.
    RhymeCheck { first: String, second: String },
    /// Pairwise cosine similarities of encoder outputs for a word list, as TSV.
    ProbeExport { words: PathBuf },
}

#[derive(Debug, Args)]
pub struct SyntheticArgs {
    #[arg(long, default_value_t = 2000)]
    pub poems: usize,
    #[arg(long, default_value_t = 20)]
    pub families: usize,
    #[arg(long, default_value = "AABB")]
    pub pattern: String,
    #[arg(long, default_value_t = 200)]
    pub body_vocab: usize,
    #[arg(long, default_value_t = 25)]
    pub words_per_family: usize,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::PrepareData => "prepare-data",
            Command::MakeSynthetic(_) => "make-synthetic",
            Command::PretrainEncoder { .. } => "pretrain-encoder",
            Command::Train => "train",
            Command::Sample => "sample",
            Command::EvalSampling { .. } => "eval-sampling",
            Command::EvalNll { .. } => "eval-nll",
            Command::EvalProbe { .. } => "eval-probe",
            Command::RhymeCheck { .. } => "rhyme-check",
            Command::ProbeExport { .. } => "probe-export",
        }
    }
}

/// Parses `argv` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let (code, out) = run_captured(argv);
    print!("{out}");
    code
}

/// Like [`run`], but returns standard output instead of printing it.
/// Usage errors and failures still go to standard error.
pub fn run_captured<I, T>(argv: I) -> (i32, String)
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = e.print();
                return (2, String::new());
            }
            return (0, e.to_string());
        }
    };
    let mut stdout = String::new();
    let result = resolve_config(&cli).and_then(|cfg| execute(&cli, &cfg, &mut stdout));
    let code = match result {
        Ok(()) => 0,
        Err(Error::Config(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    };
    (code, stdout)
}

/// Defaults, then the --config file, then --set overrides, then named flags.
pub fn resolve_config(cli: &Cli) -> Result<RunConfig> {
    let g = &cli.global;
    let mut cfg = RunConfig {
        command: cli.command.name().to_string(),
        ..RunConfig::default()
    };
    if let Some(path) = &g.config {
        cfg.apply_file(path)?;
    }
    for kv in &g.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("--set expects KEY=VALUE, got {kv:?}")))?;
        cfg.set(k.trim(), v.trim())?;
    }
    macro_rules! flag {
        ($field:ident) => {
            if let Some(v) = &g.$field {
                cfg.$field = v.clone().into();
            }
        };
    }
    flag!(corpus);
    flag!(cmudict);
    flag!(spec);
    flag!(checkpoint);
    flag!(out);
    flag!(n);
    if let Some(v) = g.seed {
        cfg.seed = v;
    }
    if let Some(v) = g.lambda {
        cfg.lambda = v;
    }
    if let Some(v) = g.mode {
        cfg.mode = v;
    }
    if let Some(v) = g.temperature {
        cfg.temperature = v;
    }
    if let Some(v) = g.epochs {
        cfg.epochs = v;
    }
    if cfg.corpus.is_none() {
        if let (Ok(root), Some(spec)) = (std::env::var(DATA_DIR_ENV), &cfg.spec) {
            let dir = Path::new(&root).join(spec);
            if dir.is_dir() {
                cfg.corpus = Some(dir);
            }
        }
    }
    Ok(cfg)
}

fn execute(cli: &Cli, cfg: &RunConfig, stdout: &mut String) -> Result<()> {
    let json = cli.global.json;
    match &cli.command {
        Command::PrepareData => prepare_data(cfg, json, stdout),
        Command::MakeSynthetic(args) => make_synthetic(cfg, args, json, stdout),
        Command::PretrainEncoder { words } => pretrain(cfg, words.as_deref(), json, stdout),
        Command::Train => train_cmd(cfg, json, stdout),
        Command::Sample => sample(cfg, json, stdout),
        Command::EvalSampling { strict } => eval_sampling(cfg, *strict, json, stdout),
        Command::EvalNll { split } => eval_nll(cfg, split, json, stdout),
        Command::EvalProbe { method } => eval_probe(cfg, method, json, stdout),
        Command::RhymeCheck { first, second } => rhyme_check(cfg, first, second, json, stdout),
        Command::ProbeExport { words } => probe_export(cfg, words, stdout),
    }
}

fn require<'a, T>(value: &'a Option<T>, flag: &str) -> Result<&'a T> {
    value.as_ref().ok_or_else(|| Error::Config(format!("{flag} is required")))
}

fn corpus_dir(cfg: &RunConfig) -> Result<&Path> {
    cfg.corpus
        .as_deref()
        .ok_or_else(|| Error::Config(format!("--corpus is required (or set {DATA_DIR_ENV} and --spec)")))
}

/// The spec from --spec, else `spec.txt` in the corpus directory.
fn dataset_spec(cfg: &RunConfig) -> Result<DatasetSpec> {
    if let Some(name) = &cfg.spec {
        return io::resolve_spec(name);
    }
    if let Some(dir) = &cfg.corpus {
        let path = dir.join(io::SPEC_FILE);
        if path.is_file() {
            return io::read_spec_file(&path);
        }
    }
    Err(Error::Config("--spec is required".into()))
}

/// --cmudict, else the corpus's `families.tsv`, else a cmudict under the data dir.
fn pron_dict(cfg: &RunConfig) -> Result<PronDict> {
    if let Some(path) = &cfg.cmudict {
        return io::read_pron_dict(path);
    }
    if let Some(dir) = &cfg.corpus {
        let path = dir.join(io::FAMILIES_FILE);
        if path.is_file() {
            let families = io::read_families(&path)?;
            return Ok(PronDict::from_families(families.iter().map(|(w, f)| (w.as_str(), *f))));
        }
    }
    if let Ok(root) = std::env::var(DATA_DIR_ENV) {
        for name in ["cmudict.dict", "cmudict-0.7b"] {
            let path = Path::new(&root).join(name);
            if path.is_file() {
                return io::read_pron_dict(&path);
            }
        }
    }
    Err(Error::Config("--cmudict is required".into()))
}

fn checkpoint_path(cfg: &RunConfig, default_name: &str) -> Result<PathBuf> {
    let path = require(&cfg.checkpoint, "--checkpoint")?;
    Ok(if path.is_dir() { path.join(default_name) } else { path.clone() })
}

fn out_dir(cfg: &RunConfig) -> Result<&Path> {
    Ok(require(&cfg.out, "--out")?.as_path())
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("reports serialize");
    text.push('\n');
    io::write_atomic(&dir.join(name), text.as_bytes())
}

/// Prints the report as JSON or a table, and saves it under --out if given.
fn emit<T: Serialize>(cfg: &RunConfig, name: &str, report: &T, json: bool, stdout: &mut String) -> Result<()> {
    if let Some(dir) = &cfg.out {
        write_json(dir, name, report)?;
        cfg.write_resolved(dir)?;
    }
    let value = serde_json::to_value(report).expect("reports serialize");
    if json {
        let _ = writeln!(stdout, "{}", serde_json::to_string_pretty(&value).expect("json"));
    } else {
        table(&value, stdout);
    }
    Ok(())
}

fn table(value: &serde_json::Value, stdout: &mut String) {
    let Some(map) = value.as_object() else {
        let _ = writeln!(stdout, "{value}");
        return;
    };
    let width = map.keys().map(String::len).max().unwrap_or(0);
    for (k, v) in map {
        let text = match v {
            serde_json::Value::String(s) => s.clone(),
            serde_json::Value::Null => "-".into(),
            other => other.to_string(),
        };
        let _ = writeln!(stdout, "{k:<width$}  {text}");
    }
}

fn word_refs(words: &[String]) -> Vec<&str> {
    words.iter().map(String::as_str).collect()
}

fn new_encoder(cfg: &RunConfig) -> CharEncoder {
    CharEncoder::new(
        cfg.encoder_config(),
        &mut rng::substream(cfg.seed, streams::DISCRIMINATOR_INIT, 1),
    )
}

fn split_counts(c: &Corpus) -> serde_json::Value {
    json!({"train": c.train.len(), "dev": c.dev.len(), "test": c.test.len()})
}

fn prepare_data(cfg: &RunConfig, json: bool, stdout: &mut String) -> Result<()> {
    let spec = dataset_spec(cfg)?;
    let out = out_dir(cfg)?;
    let raw = io::load_corpus(corpus_dir(cfg)?, &spec)?;
    let corpus = match cfg.vocab_cap.or(spec.vocab_cap) {
        Some(cap) => filter_by_vocab(&raw, cap)?,
        None => raw.clone(),
    };
    io::write_corpus(out, &corpus)?;
    io::write_atomic(&out.join(io::SPEC_FILE), io::format_spec_file(&corpus.spec).as_bytes())?;
    let report = json!({
        "spec": corpus.spec.name,
        "loaded": split_counts(&raw),
        "kept": split_counts(&corpus),
        "vocab": build_vocab(&corpus, None).len(),
    });
    emit(cfg, "prepare_report.json", &report, json, stdout)
}

fn make_synthetic(cfg: &RunConfig, args: &SyntheticArgs, json: bool, stdout: &mut String) -> Result<()> {
    let out = out_dir(cfg)?;
    let mut spec = SyntheticSpec::new(cfg.seed, args.poems, args.families, &args.pattern, args.body_vocab)?;
    spec.words_per_family = args.words_per_family;
    let syn = make_synthetic_corpus(&spec)?;
    io::write_corpus(out, &syn.corpus)?;
    io::write_families(&out.join(io::FAMILIES_FILE), &syn.families)?;
    io::write_atomic(&out.join(io::SPEC_FILE), io::format_spec_file(&syn.corpus.spec).as_bytes())?;
    let report = json!({
        "spec": syn.corpus.spec.name,
        "splits": split_counts(&syn.corpus),
        "families": syn.suffixes.len(),
        "family_words": syn.families.len(),
        "vocab": build_vocab(&syn.corpus, None).len(),
    });
    emit(cfg, "synthetic_report.json", &report, json, stdout)
}

fn corpus_words(cfg: &RunConfig) -> Result<Vec<String>> {
    let spec = dataset_spec(cfg)?;
    let corpus = io::load_corpus(corpus_dir(cfg)?, &spec)?;
    Ok(build_vocab(&corpus, cfg.vocab_cap.or(spec.vocab_cap)).words().to_vec())
}

fn pretrain(cfg: &RunConfig, words: Option<&Path>, json: bool, stdout: &mut String) -> Result<()> {
    let out = out_dir(cfg)?;
    let words = match words {
        Some(path) => io::read_word_list(path)?,
        None => corpus_words(cfg)?,
    };
    let mut log = JsonlWriter::create(&out.join("pretrain_log.jsonl"))?;
    let mut trainer = Pretrainer::new(new_encoder(cfg), &words, cfg.pretrain_config());
    let mut last = None;
    for _ in 0..cfg.pretrain_epochs {
        let epoch = trainer.run_epoch();
        info!("pretrain epoch {} loss {:.4} accuracy {:.4}", epoch.epoch, epoch.loss, epoch.accuracy);
        log.write("epoch", &epoch)?;
        last = Some(epoch);
    }
    log.flush()?;
    let encoder = trainer.into_encoder();
    checkpoint::save_encoder(&out.join(ENCODER_CKPT), &encoder)?;
    let report = json!({
        "words": words.len(),
        "epochs": cfg.pretrain_epochs,
        "final_loss": last.as_ref().map(|e| e.loss),
        "final_accuracy": last.as_ref().map(|e| e.accuracy),
    });
    emit(cfg, "pretrain_report.json", &report, json, stdout)
}

fn train_cmd(cfg: &RunConfig, json: bool, stdout: &mut String) -> Result<()> {
    let out = out_dir(cfg)?;
    let spec = dataset_spec(cfg)?;
    let corpus = io::load_corpus(corpus_dir(cfg)?, &spec)?;
    let dict = pron_dict(cfg)?;
    let tcfg = cfg.train_config();
    tcfg.validate()?;
    std::fs::create_dir_all(out).map_err(crate::error::io_err(out))?;
    cfg.write_resolved(out)?;

    let vocab = build_vocab(&corpus, cfg.vocab_cap.or(spec.vocab_cap));
    let embeddings = cfg.embeddings.as_deref().map(io::read_embeddings).transpose()?;
    let gen = Generator::new(vocab, spec.clone(), cfg.generator_config(), cfg.seed, embeddings.as_ref())?;
    info!("vocabulary {} words, {} training poems", gen.vocab.len(), corpus.train.len());

    let disc = match tcfg.mode.architecture() {
        None => None,
        Some(arch) => {
            let encoder = match &cfg.encoder {
                Some(path) => checkpoint::load_encoder(path)?,
                None => {
                    let words = word_refs(gen.vocab.words());
                    let (enc, epochs) = pretrain_encoder(new_encoder(cfg), &words, &cfg.pretrain_config());
                    if let Some(e) = epochs.last() {
                        info!("encoder pretraining accuracy {:.4}", e.accuracy);
                    }
                    enc
                }
            };
            Some(AnyDiscriminator::new(arch, encoder, spec.lines_per_poem, cfg.seed)?)
        }
    };

    let mut log = JsonlWriter::create(&out.join(TRAIN_LOG_FILE))?;
    let gen_path = out.join(GENERATOR_CKPT);
    let disc_path = out.join(DISCRIMINATOR_CKPT);
    let mut observer = |event: TrainEvent<'_>| -> rhymegan_core::Result<()> {
        let written = match event {
            TrainEvent::Step(step) => log.step(step),
            TrainEvent::Epoch {
                record,
                generator,
                discriminator,
            } => {
                info!(
                    "epoch {} train nll {:.4} dev nll {} acceptance {}",
                    record.epoch,
                    record.train_nll,
                    record.dev_nll.map_or("-".into(), |v| format!("{v:.4}")),
                    record.acceptance_fraction.map_or("-".into(), |v| format!("{v:.4}")),
                );
                log.epoch(record)
                    .and_then(|()| checkpoint::save_generator(&gen_path, generator))
                    .and_then(|()| match discriminator {
                        Some(d) => checkpoint::save_discriminator(&disc_path, d),
                        None => Ok(()),
                    })
            }
        };
        written.map_err(|e| rhymegan_core::Error::InvalidConfig(format!("writing outputs: {e}")))
    };
    let outcome = train(&corpus, gen, disc, &tcfg, &dict, &mut observer)?;
    log.flush()?;
    checkpoint::save_generator(&gen_path, &outcome.generator)?;
    if let Some(d) = &outcome.discriminator {
        checkpoint::save_discriminator(&disc_path, d)?;
    }
    let last = outcome.log.epochs.last();
    let skipped = outcome.log.steps.iter().filter(|s| s.skipped).count();
    if skipped > 0 {
        warn!("{skipped} steps were skipped for non-finite values");
    }
    let report = json!({
        "mode": tcfg.mode.as_str(),
        "epochs": outcome.log.epochs.len(),
        "steps": outcome.log.steps.len(),
        "skipped_steps": skipped,
        "train_nll": last.map(|e| e.train_nll),
        "dev_nll": last.and_then(|e| e.dev_nll),
        "acceptance_fraction": last.and_then(|e| e.acceptance_fraction),
        "generator": gen_path,
        "discriminator": outcome.discriminator.as_ref().map(|_| disc_path.clone()),
    });
    emit(cfg, "train_report.json", &report, json, stdout)
}

fn load_generator(cfg: &RunConfig) -> Result<Generator> {
    checkpoint::load_generator(&checkpoint_path(cfg, GENERATOR_CKPT)?, None)
}

fn sample(cfg: &RunConfig, json: bool, stdout: &mut String) -> Result<()> {
    let gen = load_generator(cfg)?;
    let n = cfg.n.unwrap_or(5);
    let scfg = cfg.sample_config();
    scfg.validate()?;
    let mut rng = rng::stream(cfg.seed, streams::SAMPLING);
    let poems: Vec<Poem> = (0..n).map(|_| gen.sample_poem_with(&scfg, &mut rng).0).collect();
    if let Some(dir) = &cfg.out {
        io::write_atomic(&dir.join("samples.txt"), rhymegan_core::corpus::format_split(&poems).as_bytes())?;
        cfg.write_resolved(dir)?;
    }
    if json {
        let lines: Vec<Vec<String>> = poems.iter().map(|p| p.lines.iter().map(|l| l.join(" ")).collect()).collect();
        let _ = writeln!(stdout, "{}", serde_json::to_string_pretty(&json!({ "poems": lines })).expect("json"));
    } else {
        stdout.push_str(&rhymegan_core::corpus::format_split(&poems));
    }
    Ok(())
}

fn eval_sampling(cfg: &RunConfig, strict: bool, json: bool, stdout: &mut String) -> Result<()> {
    let gen = load_generator(cfg)?;
    let dict = pron_dict(cfg)?;
    let strictness = if strict {
        rhymegan_core::phonetics::Strictness::Strict
    } else {
        cfg.strictness
    };
    let report = sampling_efficiency(&gen, &dict, cfg.n.unwrap_or(10_000), &cfg.sample_config(), strictness)?;
    emit(cfg, "sampling_report.json", &report, json, stdout)
}

fn eval_nll(cfg: &RunConfig, split: &str, json: bool, stdout: &mut String) -> Result<()> {
    let gen = load_generator(cfg)?;
    let corpus = io::load_corpus(corpus_dir(cfg)?, &gen.spec)?;
    let poems = match split {
        "train" => &corpus.train,
        "dev" | "valid" => &corpus.dev,
        "test" => &corpus.test,
        other => return Err(Error::Config(format!("unknown split {other:?}"))),
    };
    let report = heldout_nll(poems, &gen)?;
    emit(cfg, "nll_report.json", &report, json, stdout)
}

fn eval_probe(cfg: &RunConfig, method: &str, json: bool, stdout: &mut String) -> Result<()> {
    let spec = dataset_spec(cfg)?;
    let corpus = io::load_corpus(corpus_dir(cfg)?, &spec)?;
    let dict = pron_dict(cfg)?;
    let report: ProbeReport = if method == "encoder" {
        let encoder = checkpoint::load_encoder(&checkpoint_path(cfg, DISCRIMINATOR_CKPT)?)?;
        let choice = tune_threshold(&corpus.dev, &encoder, &dict)?;
        info!("threshold {:.4} (dev f1 {:.4})", choice.threshold, choice.dev_f1);
        rhyme_probe(&corpus.test, &encoder, &dict, choice.threshold)?
    } else if let Some(k) = method.strip_prefix("grapheme-") {
        let k = k
            .parse()
            .map_err(|_| Error::Config(format!("bad grapheme suffix length in {method:?}")))?;
        grapheme_probe(&corpus.test, k, &dict)?
    } else {
        return Err(Error::Config(format!("unknown probe method {method:?}")));
    };
    emit(cfg, "probe_report.json", &report, json, stdout)
}

#[derive(Serialize)]
struct WordParts {
    word: String,
    rhyming_parts: Vec<String>,
}

fn rhyme_check(cfg: &RunConfig, first: &str, second: &str, json: bool, stdout: &mut String) -> Result<()> {
    let dict = pron_dict(cfg)?;
    let (first, second) = (first.to_lowercase(), second.to_lowercase());
    let parts = |w: &str| WordParts {
        word: w.to_string(),
        rhyming_parts: dict
            .get(w)
            .unwrap_or(&[])
            .iter()
            .map(|p| rhyming_part(p).join(" "))
            .collect(),
    };
    let verdict = rhymes(&first, &second, &dict);
    let (a, b) = (parts(&first), parts(&second));
    if json {
        let value = json!({ "verdict": verdict, "first": a, "second": b });
        let _ = writeln!(stdout, "{}", serde_json::to_string_pretty(&value).expect("json"));
    } else {
        let _ = writeln!(stdout, "{verdict}");
        for w in [&a, &b] {
            let shown = if w.rhyming_parts.is_empty() {
                "(not in dictionary)".to_string()
            } else {
                w.rhyming_parts.join(" | ")
            };
            let _ = writeln!(stdout, "{}\t{}", w.word, shown);
        }
    }
    Ok(())
}

fn probe_export(cfg: &RunConfig, words: &Path, stdout: &mut String) -> Result<()> {
    let path = checkpoint_path(cfg, DISCRIMINATOR_CKPT)?;
    let encoder = checkpoint::load_encoder(&path)?;
    let words = io::read_word_list(words)?;
    let reps: Vec<Vec<f64>> = words.iter().map(|w| encoder.encode(w)).collect();
    let sim = similarity_matrix(&reps);
    let mut tsv = String::from("word");
    for w in &words {
        tsv.push('\t');
        tsv.push_str(w);
    }
    tsv.push('\n');
    for (i, w) in words.iter().enumerate() {
        tsv.push_str(w);
        for j in 0..words.len() {
            let _ = write!(tsv, "\t{:.6}", sim.get(i, j));
        }
        tsv.push('\n');
    }
    match &cfg.out {
        Some(dir) => {
            io::write_atomic(&dir.join("probe.tsv"), tsv.as_bytes())?;
            cfg.write_resolved(dir)?;
        }
        None => stdout.push_str(&tsv),
    }
    Ok(())
}
