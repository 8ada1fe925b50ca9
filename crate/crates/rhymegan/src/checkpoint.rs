//! Binary checkpoint container.
//!
//! Layout: the 8-byte magic `RHYMEGAN`, a little-endian `u32` format
//! version, a little-endian `u64` header length, a JSON header, a
//! little-endian `u64` parameter count and the parameters as little-endian
//! `f64` in [`Parameterized::flatten`] order.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use rhymegan_core::corpus::{DatasetSpec, Vocab};
use rhymegan_core::discriminator::{AnyDiscriminator, Architecture, CharEncoder, CharInventory, EncoderConfig};
use rhymegan_core::generator::{Generator, GeneratorConfig};
use rhymegan_core::nn::Parameterized;
use rhymegan_core::rng;

use crate::error::{format_err, io_err, Error, Result};
use crate::io::write_atomic;

pub const MAGIC: &[u8; 8] = b"RHYMEGAN";
pub const FORMAT_VERSION: u32 = 1;

fn sha256_hex(data: &[u8]) -> String {
    hex::encode(Sha256::digest(data))
}

/// Hash over every vocabulary entry, reserved markers included, in id order.
pub fn vocab_hash(vocab: &Vocab) -> String {
    let words: Vec<&str> = (0..vocab.len() as u32).map(|i| vocab.word(i)).collect();
    sha256_hex(words.join("\n").as_bytes())
}

pub fn char_inventory_hash() -> String {
    sha256_hex(format!("{}|oov={}", CharInventory::CHARS, CharInventory::oov()).as_bytes())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Header {
    Generator {
        vocab_hash: String,
        /// Non-reserved words in id order.
        vocab: Vec<String>,
        spec: DatasetSpec,
        config: GeneratorConfig,
    },
    Discriminator {
        char_inventory_hash: String,
        architecture: Architecture,
        lines: usize,
        encoder: EncoderConfig,
    },
    Encoder {
        char_inventory_hash: String,
        encoder: EncoderConfig,
    },
}

fn encode(header: &Header, params: &[f64]) -> Result<Vec<u8>> {
    let json = serde_json::to_vec(header).map_err(|e| Error::Config(e.to_string()))?;
    let mut out = Vec::with_capacity(8 + 4 + 8 + json.len() + 8 + 8 * params.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(json.len() as u64).to_le_bytes());
    out.extend_from_slice(&json);
    out.extend_from_slice(&(params.len() as u64).to_le_bytes());
    for p in params {
        out.extend_from_slice(&p.to_le_bytes());
    }
    Ok(out)
}

fn take<'a>(path: &Path, bytes: &mut &'a [u8], n: usize) -> Result<&'a [u8]> {
    if bytes.len() < n {
        return Err(format_err(path, "truncated checkpoint"));
    }
    let (head, rest) = bytes.split_at(n);
    *bytes = rest;
    Ok(head)
}

fn decode(path: &Path) -> Result<(Header, Vec<f64>)> {
    let data = std::fs::read(path).map_err(io_err(path))?;
    let mut b = data.as_slice();
    if take(path, &mut b, 8)? != MAGIC {
        return Err(format_err(path, "not a rhymegan checkpoint"));
    }
    let version = u32::from_le_bytes(take(path, &mut b, 4)?.try_into().expect("4 bytes"));
    if version != FORMAT_VERSION {
        return Err(format_err(path, format!("unsupported checkpoint version {version}")));
    }
    let hlen = u64::from_le_bytes(take(path, &mut b, 8)?.try_into().expect("8 bytes")) as usize;
    let header: Header = serde_json::from_slice(take(path, &mut b, hlen)?)
        .map_err(|e| format_err(path, format!("bad header: {e}")))?;
    let n = u64::from_le_bytes(take(path, &mut b, 8)?.try_into().expect("8 bytes")) as usize;
    if b.len() != n * 8 {
        return Err(format_err(path, "parameter section has the wrong length"));
    }
    let params = b
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    Ok((header, params))
}

fn generator_header(gen: &Generator) -> Header {
    Header::Generator {
        vocab_hash: vocab_hash(&gen.vocab),
        vocab: gen.vocab.words().to_vec(),
        spec: gen.spec.clone(),
        config: gen.config.clone(),
    }
}

pub fn save_generator(path: &Path, gen: &Generator) -> Result<()> {
    write_atomic(path, &encode(&generator_header(gen), &gen.params.flatten())?)
}

/// Loads a generator. When `expected` is given, its hash must match the
/// checkpoint's vocabulary.
pub fn load_generator(path: &Path, expected: Option<&Vocab>) -> Result<Generator> {
    let (header, params) = decode(path)?;
    let Header::Generator {
        vocab_hash: stored,
        vocab,
        spec,
        config,
    } = header
    else {
        return Err(format_err(path, "not a generator checkpoint"));
    };
    let vocab = Vocab::from_words(vocab.iter().map(String::as_str));
    let actual = vocab_hash(&vocab);
    if actual != stored {
        return Err(Error::VocabMismatch {
            expected: stored,
            found: actual,
        });
    }
    if let Some(v) = expected {
        let want = vocab_hash(v);
        if want != stored {
            return Err(Error::VocabMismatch {
                expected: want,
                found: stored,
            });
        }
    }
    let mut gen = Generator::new(vocab, spec, config, 0, None)?;
    gen.params.assign_flat(&params)?;
    Ok(gen)
}

fn check_inventory(stored: &str) -> Result<()> {
    let want = char_inventory_hash();
    if stored != want {
        return Err(Error::InventoryMismatch {
            expected: want,
            found: stored.to_string(),
        });
    }
    Ok(())
}

fn blank_encoder(config: EncoderConfig) -> CharEncoder {
    CharEncoder::new(config, &mut rng::stream(0, 0))
}

pub fn save_discriminator(path: &Path, disc: &AnyDiscriminator) -> Result<()> {
    use rhymegan_core::discriminator::Discriminator;
    let header = Header::Discriminator {
        char_inventory_hash: char_inventory_hash(),
        architecture: disc.architecture(),
        lines: disc.lines(),
        encoder: disc.encoder().config.clone(),
    };
    write_atomic(path, &encode(&header, &disc.flatten())?)
}

pub fn load_discriminator(path: &Path) -> Result<AnyDiscriminator> {
    let (header, params) = decode(path)?;
    let Header::Discriminator {
        char_inventory_hash,
        architecture,
        lines,
        encoder,
    } = header
    else {
        return Err(format_err(path, "not a discriminator checkpoint"));
    };
    check_inventory(&char_inventory_hash)?;
    let mut disc = AnyDiscriminator::new(architecture, blank_encoder(encoder), lines, 0)?;
    disc.assign_flat(&params)?;
    Ok(disc)
}

pub fn save_encoder(path: &Path, enc: &CharEncoder) -> Result<()> {
    let header = Header::Encoder {
        char_inventory_hash: char_inventory_hash(),
        encoder: enc.config.clone(),
    };
    write_atomic(path, &encode(&header, &enc.flatten())?)
}

/// Loads a character encoder from either an encoder or a discriminator
/// checkpoint.
pub fn load_encoder(path: &Path) -> Result<CharEncoder> {
    let (header, params) = decode(path)?;
    match header {
        Header::Encoder {
            char_inventory_hash,
            encoder,
        } => {
            check_inventory(&char_inventory_hash)?;
            let mut enc = blank_encoder(encoder);
            enc.assign_flat(&params)?;
            Ok(enc)
        }
        Header::Discriminator { .. } => {
            use rhymegan_core::discriminator::Discriminator;
            Ok(load_discriminator(path)?.encoder().clone())
        }
        Header::Generator { .. } => Err(format_err(path, "generator checkpoints hold no character encoder")),
    }
}

/// Reads only the header.
pub fn read_header(path: &Path) -> Result<Header> {
    Ok(decode(path)?.0)
}
