//! Run configuration: defaults, then a `key = value` file, then command-line
//! flags. The fully resolved configuration is written next to every output.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use rhymegan_core::discriminator::{EncoderConfig, PretrainConfig};
use rhymegan_core::generator::{GeneratorConfig, SampleConfig};
use rhymegan_core::phonetics::Strictness;
use rhymegan_core::training::{Mode, RewardKind, TrainConfig};

use crate::error::{Error, Result};
use crate::io::write_atomic;

pub const RESOLVED_CONFIG_FILE: &str = "config.resolved";

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_key_values(text: &str) -> std::result::Result<BTreeMap<String, String>, String> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected key = value", i + 1))?;
        out.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub tool_version: String,
    pub command: String,
    pub spec: Option<String>,
    pub corpus: Option<PathBuf>,
    pub cmudict: Option<PathBuf>,
    pub checkpoint: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub seed: u64,

    pub mode: Mode,
    pub lambda: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub gen_lr: f64,
    pub disc_lr: f64,
    pub disc_steps: usize,
    pub baseline_decay: f64,
    pub samples_per_real: usize,
    pub reward: RewardKind,
    pub clip: f64,
    pub forbid_unk: bool,
    pub eval_samples: usize,

    pub temperature: f64,
    /// Number of samples; each subcommand has its own default.
    pub n: Option<usize>,
    pub strictness: Strictness,

    pub embed_dim: usize,
    pub hidden: usize,
    pub max_line_length: usize,
    pub embeddings: Option<PathBuf>,
    pub vocab_cap: Option<usize>,

    pub char_dim: usize,
    pub encoder_hidden: usize,
    pub pretrain_epochs: usize,
    pub pretrain_lr: f64,
    pub encoder: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let t = TrainConfig::default();
        let g = GeneratorConfig::default();
        let s = SampleConfig::default();
        let e = EncoderConfig::default();
        let p = PretrainConfig::default();
        RunConfig {
            tool_version: crate::VERSION.to_string(),
            command: String::new(),
            spec: None,
            corpus: None,
            cmudict: None,
            checkpoint: None,
            out: None,
            seed: 0,
            mode: t.mode,
            lambda: t.lambda,
            epochs: t.epochs,
            batch_size: t.batch_size,
            gen_lr: t.gen_lr,
            disc_lr: t.disc_lr,
            disc_steps: t.disc_steps,
            baseline_decay: t.baseline_decay,
            samples_per_real: t.samples_per_real,
            reward: t.reward,
            clip: t.clip,
            forbid_unk: t.forbid_unk,
            eval_samples: t.eval_samples,
            temperature: s.temperature,
            n: None,
            strictness: Strictness::default(),
            embed_dim: g.embed_dim,
            hidden: g.hidden,
            max_line_length: g.max_line_length,
            embeddings: None,
            vocab_cap: None,
            char_dim: e.char_dim,
            encoder_hidden: e.hidden,
            pretrain_epochs: p.epochs,
            pretrain_lr: p.lr,
            encoder: None,
        }
    }
}

impl RunConfig {
    fn to_map(&self) -> serde_json::Map<String, Value> {
        match serde_json::to_value(self).expect("config serializes") {
            Value::Object(m) => m,
            _ => unreachable!("config is a struct"),
        }
    }

    /// Sets one field from its textual form. `none` (or an empty value)
    /// clears an optional field.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let map = self.to_map();
        if !map.contains_key(key) {
            return Err(Error::Config(format!("unknown config key {key:?}")));
        }
        let mut candidates = Vec::new();
        if value.is_empty() || value == "none" {
            candidates.push(Value::Null);
        }
        if let Ok(v) = serde_json::from_str::<Value>(value) {
            if v.is_number() || v.is_boolean() {
                candidates.push(v);
            }
        }
        candidates.push(Value::String(value.to_string()));
        let mut last_err = None;
        for candidate in candidates {
            let mut m = map.clone();
            m.insert(key.to_string(), candidate);
            match serde_json::from_value::<RunConfig>(Value::Object(m)) {
                Ok(cfg) => {
                    *self = cfg;
                    return Ok(());
                }
                Err(e) => last_err = Some(e),
            }
        }
        Err(Error::Config(format!(
            "{key}: cannot use {value:?}: {}",
            last_err.expect("at least one candidate")
        )))
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = crate::io::read_text(path)?;
        let kv = parse_key_values(&text).map_err(|m| crate::error::format_err(path, m))?;
        for (k, v) in kv {
            if k == "tool_version" || k == "command" {
                continue;
            }
            self.set(&k, &v)?;
        }
        Ok(())
    }

    /// `key = value` lines in field order; `none` marks an unset option.
    pub fn to_key_values(&self) -> String {
        let mut out = String::new();
        let fields = serde_json::to_value(self).expect("config serializes");
        // serde_json::Map is ordered by key; keep it that way for stable diffs.
        for (k, v) in fields.as_object().expect("struct") {
            let text = match v {
                Value::Null => "none".to_string(),
                Value::String(s) => s.clone(),
                other => other.to_string(),
            };
            out.push_str(&format!("{k} = {text}\n"));
        }
        out
    }

    /// Writes the resolved configuration (with the tool version) into `dir`.
    pub fn write_resolved(&self, dir: &Path) -> Result<()> {
        write_atomic(&dir.join(RESOLVED_CONFIG_FILE), self.to_key_values().as_bytes())
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            mode: self.mode,
            lambda: self.lambda,
            batch_size: self.batch_size,
            gen_lr: self.gen_lr,
            disc_lr: self.disc_lr,
            disc_steps: self.disc_steps,
            baseline_decay: self.baseline_decay,
            epochs: self.epochs,
            seed: self.seed,
            samples_per_real: self.samples_per_real,
            reward: self.reward,
            clip: self.clip,
            forbid_unk: self.forbid_unk,
            eval_samples: self.eval_samples,
            eval_temperature: self.temperature,
        }
    }

    pub fn generator_config(&self) -> GeneratorConfig {
        GeneratorConfig {
            embed_dim: self.embed_dim,
            hidden: self.hidden,
            max_line_length: self.max_line_length,
            ..GeneratorConfig::default()
        }
    }

    pub fn sample_config(&self) -> SampleConfig {
        SampleConfig {
            temperature: self.temperature,
            forbid_unk: self.forbid_unk,
            seed: self.seed,
            max_line_length: self.max_line_length,
        }
    }

    pub fn encoder_config(&self) -> EncoderConfig {
        EncoderConfig {
            char_dim: self.char_dim,
            hidden: self.encoder_hidden,
        }
    }

    pub fn pretrain_config(&self) -> PretrainConfig {
        PretrainConfig {
            epochs: self.pretrain_epochs,
            lr: self.pretrain_lr,
            seed: self.seed,
            ..PretrainConfig::default()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn key_values_round_trip() {
        let mut c = RunConfig::default();
        c.set("lambda", "0.5").unwrap();
        c.set("mode", "rhyme_gan_ns").unwrap();
        c.set("corpus", "/data/sonnet").unwrap();
        c.set("forbid_unk", "false").unwrap();
        c.set("vocab_cap", "9000").unwrap();
        let text = c.to_key_values();
        let mut d = RunConfig::default();
        for (k, v) in parse_key_values(&text).unwrap() {
            d.set(&k, &v).unwrap();
        }
        assert_eq!(c, d);
        assert_eq!(d.mode, Mode::RhymeGanNs);
        assert_eq!(d.vocab_cap, Some(9000));
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        let mut c = RunConfig::default();
        assert!(c.set("lamda", "0.1").is_err());
        assert!(c.set("lambda", "abc").is_err());
        assert!(c.set("mode", "gan").is_err());
        assert!(c.set("forbid_unk", "yes").is_err());
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let kv = parse_key_values("# hi\n\nseed = 3 # trailing\n").unwrap();
        assert_eq!(kv.len(), 1);
        assert_eq!(kv["seed"], "3");
    }
}
