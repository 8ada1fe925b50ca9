//! Core of a poetry generator trained against a structured adversary.
//!
//! The generator is a hierarchical recurrent language model that first
//! samples the line-ending words of a poem and then fills each line right to
//! left. The discriminator only sees the ending words: a character-level
//! encoder maps each word to a vector, the pairwise cosine similarities form a
//! `T x T` matrix, and a small 2D convolutional classifier scores that matrix.
//! Because rhyme is the dominant spatial pattern in such a matrix, the encoder
//! ends up learning a rhyme metric without any phonetic input.
//!
//! This crate is `no_std` and needs only `alloc`. File formats, checkpoints
//! and the command-line driver live in the `rhymegan` crate.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod corpus;
pub mod discriminator;
mod error;
pub mod evaluation;
pub mod generator;
pub mod nn;
pub mod phonetics;
pub mod rng;
pub mod training;

pub use error::{Error, Result};
