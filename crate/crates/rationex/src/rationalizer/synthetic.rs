//! Synthetic corpora with planted rationales.
//!
//! The vocabulary is split into positive-content, negative-content, and
//! filler ids. The frozen embedding table plants two orthogonal unit
//! directions: a content direction shared by all content tokens and a
//! polarity direction added with the token's sign. Labels are deterministic
//! functions of the tokens inside the planted rationale, so a model that
//! recovers the rationale can recover the label.

use serde::{Deserialize, Serialize};

use super::{ToyHyper, ToyModel};
use crate::error::{Error, Result};
use crate::graph::budget_from_pct;
use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const VOCAB_SIZE: usize = 50;
pub const EMBED_DIM: usize = 16;
const POSITIVE_CONTENT: std::ops::Range<usize> = 0..10;
const NEGATIVE_CONTENT: std::ops::Range<usize> = 10..20;
const FILLER: std::ops::Range<usize> = 20..50;

/// `Some(true)` for positive content, `Some(false)` for negative content,
/// `None` for filler.
pub fn token_polarity(token: usize) -> Option<bool> {
    if POSITIVE_CONTENT.contains(&token) {
        Some(true)
    } else if NEGATIVE_CONTENT.contains(&token) {
        Some(false)
    } else {
        None
    }
}

/// The ground-truth structure an example was generated around.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum PlantedRationale {
    /// Binary token mask for highlight tasks.
    Mask(Vec<u8>),
    /// Aligned `(premise, hypothesis)` index pairs for matching tasks.
    Alignment(Vec<(usize, usize)>),
}

/// One synthetic document (or premise/hypothesis pair) with its label and
/// planted rationale. Matching examples store both sequences in `tokens`
/// with the split point in `premise_len`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticExample {
    pub tokens: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub premise_len: Option<usize>,
    pub label: usize,
    pub planted_rationale: PlantedRationale,
}

impl SyntheticExample {
    /// Splits a matching example into its premise and hypothesis sequences.
    pub fn split_pair(&self) -> Result<(&[usize], &[usize])> {
        let lp = self.premise_len.ok_or(Error::InvalidParameter {
            name: "premise_len",
            reason: "example is not a premise/hypothesis pair".into(),
        })?;
        if lp == 0 || lp >= self.tokens.len() {
            return Err(Error::InvalidParameter {
                name: "premise_len",
                reason: format!("split {lp} invalid for {} tokens", self.tokens.len()),
            });
        }
        Ok(self.tokens.split_at(lp))
    }
}

/// Builds the frozen embedding table: per-token uniform noise plus a planted
/// content direction (all content tokens) and a signed polarity direction.
pub fn build_embeddings(dim: usize, seed: u64) -> Result<Vec<f64>> {
    if dim < 2 {
        return Err(Error::InvalidParameter {
            name: "dim",
            reason: "embedding dimension must be at least 2".into(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let direction = |rng: &mut ChaCha8Rng| -> Vec<f64> {
        let v: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-9);
        v.into_iter().map(|x| x / norm).collect()
    };
    let content = direction(&mut rng);
    // orthogonalize the polarity direction against the content direction
    let mut polarity = direction(&mut rng);
    let dot: f64 = content.iter().zip(&polarity).map(|(a, b)| a * b).sum();
    for (p, c) in polarity.iter_mut().zip(&content) {
        *p -= dot * c;
    }
    let norm = polarity.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-9);
    for p in &mut polarity {
        *p /= norm;
    }
    let mut table = Vec::with_capacity(VOCAB_SIZE * dim);
    for token in 0..VOCAB_SIZE {
        for k in 0..dim {
            let mut v = rng.random_range(-0.25..0.25);
            match token_polarity(token) {
                Some(true) => v += content[k] + polarity[k],
                Some(false) => v += content[k] - polarity[k],
                None => {}
            }
            table.push(v);
        }
    }
    Ok(table)
}

/// A ready-to-train model over the standard synthetic vocabulary; the
/// embedding table and weight init both derive from `hyper.seed`.
pub fn standard_model(hyper: ToyHyper) -> Result<ToyModel> {
    let table = build_embeddings(EMBED_DIM, hyper.seed)?;
    ToyModel::new(VOCAB_SIZE, EMBED_DIM, table, hyper)
}

fn content_token(rng: &mut ChaCha8Rng, positive: bool) -> usize {
    if positive {
        rng.random_range(POSITIVE_CONTENT)
    } else {
        rng.random_range(NEGATIVE_CONTENT)
    }
}

/// Generates highlight documents: one contiguous content span of length
/// `ceil(budget_pct% of doc_len)` (an 80/20 polarity mix, ties redrawn)
/// inside filler. The label is the majority polarity of the span tokens.
pub fn highlight_examples(
    num_examples: usize,
    doc_len: usize,
    budget_pct: f64,
    seed: u64,
) -> Result<Vec<SyntheticExample>> {
    if doc_len == 0 {
        return Err(Error::Empty("document"));
    }
    let span = budget_from_pct(budget_pct, doc_len);
    if span == 0 || span > doc_len {
        return Err(Error::InvalidParameter {
            name: "budget_pct",
            reason: format!("span {span} invalid for doc_len {doc_len}"),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut examples = Vec::with_capacity(num_examples);
    for _ in 0..num_examples {
        let start = rng.random_range(0..=doc_len - span);
        let majority_positive: bool = rng.random();
        let (span_tokens, label) = loop {
            let drawn: Vec<usize> = (0..span)
                .map(|_| {
                    let keep_majority = rng.random::<f64>() < 0.8;
                    content_token(&mut rng, majority_positive == keep_majority)
                })
                .collect();
            let positives = drawn
                .iter()
                .filter(|&&t| token_polarity(t) == Some(true))
                .count();
            // redraw exact ties so the majority label is well defined
            if 2 * positives != span {
                break (drawn, usize::from(2 * positives > span));
            }
        };
        let mut tokens = Vec::with_capacity(doc_len);
        let mut mask = vec![0u8; doc_len];
        for pos in 0..doc_len {
            if pos >= start && pos < start + span {
                tokens.push(span_tokens[pos - start]);
                mask[pos] = 1;
            } else {
                tokens.push(rng.random_range(FILLER));
            }
        }
        examples.push(SyntheticExample {
            tokens,
            premise_len: None,
            label,
            planted_rationale: PlantedRationale::Mask(mask),
        });
    }
    Ok(examples)
}

/// Generates premise/hypothesis pairs with planted aligned content pairs
/// inside filler. The label is determined by the aligned pairs' polarities:
/// 0 if every pair agrees, 2 if every pair disagrees, 1 otherwise.
pub fn matching_examples(
    num_examples: usize,
    premise_len: usize,
    hypothesis_len: usize,
    seed: u64,
) -> Result<Vec<SyntheticExample>> {
    let max_pairs = premise_len.min(hypothesis_len);
    if max_pairs < 2 {
        return Err(Error::InvalidParameter {
            name: "premise_len",
            reason: "matching examples need room for at least 2 aligned pairs".into(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut examples = Vec::with_capacity(num_examples);
    for _ in 0..num_examples {
        let k = rng.random_range(2..=max_pairs.min(4));
        let mut rows: Vec<usize> = (0..premise_len).collect();
        let mut cols: Vec<usize> = (0..hypothesis_len).collect();
        rows.shuffle(&mut rng);
        cols.shuffle(&mut rng);
        let mut pairs: Vec<(usize, usize)> =
            rows[..k].iter().copied().zip(cols[..k].iter().copied()).collect();
        pairs.sort_unstable();
        // 0: all pairs agree, 2: all disagree, 1: mixed
        let intent = rng.random_range(0..3u8);
        let mut tokens = vec![usize::MAX; premise_len + hypothesis_len];
        for (index, &(i, j)) in pairs.iter().enumerate() {
            let premise_positive: bool = rng.random();
            let agree = match intent {
                0 => true,
                2 => false,
                // force one of each, then mix freely
                _ => index == 0 || (index != 1 && rng.random()),
            };
            tokens[i] = content_token(&mut rng, premise_positive);
            tokens[premise_len + j] = content_token(&mut rng, premise_positive == agree);
        }
        for slot in tokens.iter_mut() {
            if *slot == usize::MAX {
                *slot = rng.random_range(FILLER);
            }
        }
        let agreements = pairs.iter().filter(|&&(i, j)| {
            token_polarity(tokens[i]) == token_polarity(tokens[premise_len + j])
        });
        let agree_count = agreements.count();
        let label = if agree_count == pairs.len() {
            0
        } else if agree_count == 0 {
            2
        } else {
            1
        };
        examples.push(SyntheticExample {
            tokens,
            premise_len: Some(premise_len),
            label,
            planted_rationale: PlantedRationale::Alignment(pairs),
        });
    }
    Ok(examples)
}
