//! Toy end-to-end rationalizers with hand-derived gradients.
//!
//! Two miniature pipelines exercise the structured layer exactly as a full
//! model would, while staying small enough for manual backpropagation:
//!
//! * **Highlights**: a linear generator scores each token, the budgeted
//!   sequence graph relaxes the scores into a mask `z`, and a linear
//!   predictor classifies the `z`-weighted bag of embeddings. Gradients reach
//!   the generator through the solver's vector-Jacobian product.
//! * **Matchings**: pairwise alignment scores come from frozen embedding dot
//!   products, the matching graph relaxes them into an alignment matrix `Z`,
//!   and a 3-way classifier reads aligned-augmented mean-pooled features.
//!   In faithful mode the raw premise encoding is dropped, so premise
//!   information reaches the classifier only through `Z`.
//!
//! Encoders are embedding lookups plus linear maps; the embedding table is
//! frozen, standing in for pretrained vectors.

pub mod synthetic;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{
    build_highlight_graph, build_matching_graph, AlignmentMatrix, MatchingVariant, Scores,
};
use crate::solver::{lp_sparsemap_solve, lp_sparsemap_vjp, ConsensusConfig, ConsensusState};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use synthetic::{PlantedRationale, SyntheticExample};

/// Training hyperparameters; `temperature` is the train-time solver
/// temperature (test-time extraction passes its own config).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ToyHyper {
    pub learning_rate: f64,
    pub temperature: f64,
    pub budget_pct: f64,
    /// Transition bonus for adjacent selected tokens in highlight graphs.
    pub transition: f64,
    pub seed: u64,
}

impl Default for ToyHyper {
    fn default() -> Self {
        ToyHyper {
            learning_rate: 0.05,
            temperature: 0.1,
            budget_pct: 20.0,
            transition: 0.005,
            seed: 0,
        }
    }
}

/// A complete toy model: frozen embeddings, highlight generator/predictor,
/// and the matching classifier head.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ToyModel {
    pub vocab_size: usize,
    pub dim: usize,
    /// Frozen `vocab_size x dim` table, row-major.
    pub embeddings: Vec<f64>,
    /// Token scorer: `s_i = generator_weights . e_i + generator_bias`.
    pub generator_weights: Vec<f64>,
    pub generator_bias: f64,
    /// Binary classifier over the z-masked bag of embeddings.
    pub predictor_weights: Vec<f64>,
    pub predictor_bias: f64,
    /// 3-way classifier over the `8 * dim` matching feature vector, row-major.
    pub matching_weights: Vec<f64>,
    pub matching_bias: Vec<f64>,
    pub hyper: ToyHyper,
}

impl ToyModel {
    /// Builds a model around a frozen embedding table; trainable weights are
    /// initialized to small values seeded by `hyper.seed`.
    pub fn new(
        vocab_size: usize,
        dim: usize,
        embeddings: Vec<f64>,
        hyper: ToyHyper,
    ) -> Result<Self> {
        if vocab_size == 0 || dim == 0 {
            return Err(Error::Empty("embedding table"));
        }
        if embeddings.len() != vocab_size * dim {
            return Err(Error::Dimension {
                what: "embedding table",
                expected: vocab_size * dim,
                got: embeddings.len(),
            });
        }
        if embeddings.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("embeddings"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(hyper.seed);
        let mut small = |n: usize| -> Vec<f64> {
            (0..n).map(|_| rng.random_range(-0.1..0.1)).collect()
        };
        Ok(ToyModel {
            vocab_size,
            dim,
            embeddings,
            generator_weights: small(dim),
            generator_bias: 0.0,
            predictor_weights: small(dim),
            predictor_bias: 0.0,
            matching_weights: small(3 * 8 * dim),
            matching_bias: vec![0.0; 3],
            hyper,
        })
    }

    pub fn embedding(&self, token: usize) -> &[f64] {
        &self.embeddings[token * self.dim..(token + 1) * self.dim]
    }

    fn check_tokens(&self, tokens: &[usize]) -> Result<()> {
        if tokens.is_empty() {
            return Err(Error::Empty("token sequence"));
        }
        if let Some(&t) = tokens.iter().find(|&&t| t >= self.vocab_size) {
            return Err(Error::InvalidParameter {
                name: "tokens",
                reason: format!("token id {t} outside vocabulary of {}", self.vocab_size),
            });
        }
        Ok(())
    }

    /// Generator scores for a token sequence.
    pub fn generator_scores(&self, tokens: &[usize]) -> Result<Scores> {
        self.check_tokens(tokens)?;
        let values = tokens
            .iter()
            .map(|&t| {
                self.embedding(t)
                    .iter()
                    .zip(&self.generator_weights)
                    .map(|(e, w)| e * w)
                    .sum::<f64>()
                    + self.generator_bias
            })
            .collect();
        Scores::new(values)
    }
}

/// A relaxed highlight with its inputs and solver diagnostics.
#[derive(Debug, Clone)]
pub struct HighlightExtraction {
    /// Relaxed mask in `[0,1]^L`.
    pub z: Vec<f64>,
    /// Generator scores the mask was extracted from.
    pub scores: Scores,
    /// Forward solver convergence flag.
    pub converged: bool,
    /// Full consensus state, reusable for the backward pass.
    pub state: ConsensusState,
}

/// Scores tokens with the generator and relaxes them on the budgeted
/// sequence graph under `config`.
pub fn extract_highlight(
    model: &ToyModel,
    tokens: &[usize],
    config: &ConsensusConfig,
) -> Result<HighlightExtraction> {
    let scores = model.generator_scores(tokens)?;
    let graph = build_highlight_graph(tokens.len(), model.hyper.budget_pct, model.hyper.transition)?;
    let state = lp_sparsemap_solve(&graph, &scores, config)?;
    Ok(HighlightExtraction {
        z: state.u.clone(),
        converged: state.converged,
        scores,
        state,
    })
}

/// A relaxed alignment with its inputs and solver diagnostics.
#[derive(Debug, Clone)]
pub struct MatchingExtraction {
    /// Relaxed alignment, `premise_len x hypothesis_len`.
    pub alignment: AlignmentMatrix,
    /// Pairwise embedding dot-product scores.
    pub scores: AlignmentMatrix,
    pub converged: bool,
    pub state: ConsensusState,
}

/// Computes pairwise alignment scores `s_ij = <e(premise_i), e(hyp_j)>` and
/// relaxes them on the chosen matching graph under `config`.
pub fn extract_matching(
    model: &ToyModel,
    premise: &[usize],
    hypothesis: &[usize],
    variant: MatchingVariant,
    config: &ConsensusConfig,
) -> Result<MatchingExtraction> {
    model.check_tokens(premise)?;
    model.check_tokens(hypothesis)?;
    let (lp, lh) = (premise.len(), hypothesis.len());
    let mut data = Vec::with_capacity(lp * lh);
    for &p in premise {
        let ep = model.embedding(p);
        for &h in hypothesis {
            let eh = model.embedding(h);
            data.push(ep.iter().zip(eh).map(|(a, b)| a * b).sum());
        }
    }
    let scores = AlignmentMatrix::new(lp, lh, data)?;
    let graph = build_matching_graph(lp, lh, variant)?;
    let state = lp_sparsemap_solve(&graph, &Scores::new(scores.as_flat().to_vec())?, config)?;
    let alignment = AlignmentMatrix::new(lp, lh, state.u.clone())?;
    Ok(MatchingExtraction {
        alignment,
        scores,
        converged: state.converged,
        state,
    })
}

/// Positive-class probability of the `z`-masked bag of embeddings:
/// `sigmoid(predictor . sum_i z_i e_i + bias)`.
pub fn predict_highlight(model: &ToyModel, tokens: &[usize], z: &[f64]) -> Result<f64> {
    model.check_tokens(tokens)?;
    if z.len() != tokens.len() {
        return Err(Error::Dimension {
            what: "mask",
            expected: tokens.len(),
            got: z.len(),
        });
    }
    let mut bag = vec![0.0; model.dim];
    for (&t, &zi) in tokens.iter().zip(z) {
        for (b, e) in bag.iter_mut().zip(model.embedding(t)) {
            *b += zi * e;
        }
    }
    let logit = model
        .predictor_weights
        .iter()
        .zip(&bag)
        .map(|(w, b)| w * b)
        .sum::<f64>()
        + model.predictor_bias;
    Ok(sigmoid(logit))
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn softmax3(logits: &[f64; 3]) -> [f64; 3] {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps = [
        (logits[0] - max).exp(),
        (logits[1] - max).exp(),
        (logits[2] - max).exp(),
    ];
    let total: f64 = exps.iter().sum();
    [exps[0] / total, exps[1] / total, exps[2] / total]
}

/// The matching feature vector `[r_P, r_H, r_P - r_H, r_P . r_H]` built from
/// alignment-augmented, mean-pooled token vectors.
///
/// Each premise token contributes `[h_i, (Z h^H)_i]`; in faithful mode the
/// raw block is zeroed so the premise reaches the classifier only through
/// the alignment. Each hypothesis token contributes `[h_j, (Z^T h^P)_j]`.
fn matching_features(
    model: &ToyModel,
    premise: &[usize],
    hypothesis: &[usize],
    z: &AlignmentMatrix,
    faithful: bool,
) -> Vec<f64> {
    let d = model.dim;
    let (lp, lh) = (premise.len(), hypothesis.len());
    let mut r_p = vec![0.0; 2 * d];
    for (i, &p) in premise.iter().enumerate() {
        if !faithful {
            for (k, e) in model.embedding(p).iter().enumerate() {
                r_p[k] += e;
            }
        }
        for (j, &h) in hypothesis.iter().enumerate() {
            let zij = z.get(i, j);
            if zij != 0.0 {
                for (k, e) in model.embedding(h).iter().enumerate() {
                    r_p[d + k] += zij * e;
                }
            }
        }
    }
    for v in &mut r_p {
        *v /= lp as f64;
    }
    let mut r_h = vec![0.0; 2 * d];
    for (j, &h) in hypothesis.iter().enumerate() {
        for (k, e) in model.embedding(h).iter().enumerate() {
            r_h[k] += e;
        }
        for (i, &p) in premise.iter().enumerate() {
            let zij = z.get(i, j);
            if zij != 0.0 {
                for (k, e) in model.embedding(p).iter().enumerate() {
                    r_h[d + k] += zij * e;
                }
            }
        }
    }
    for v in &mut r_h {
        *v /= lh as f64;
    }
    let mut features = Vec::with_capacity(8 * d);
    features.extend_from_slice(&r_p);
    features.extend_from_slice(&r_h);
    features.extend(r_p.iter().zip(&r_h).map(|(a, b)| a - b));
    features.extend(r_p.iter().zip(&r_h).map(|(a, b)| a * b));
    features
}

/// 3-way class probabilities for a premise/hypothesis pair under a given
/// alignment. With `faithful` set, premise tokens influence the output only
/// through their alignment rows: a zeroed row makes the output exactly
/// invariant to that token.
pub fn predict_matching(
    model: &ToyModel,
    premise: &[usize],
    hypothesis: &[usize],
    z: &AlignmentMatrix,
    faithful: bool,
) -> Result<[f64; 3]> {
    model.check_tokens(premise)?;
    model.check_tokens(hypothesis)?;
    if z.rows() != premise.len() || z.cols() != hypothesis.len() {
        return Err(Error::Dimension {
            what: "alignment matrix",
            expected: premise.len() * hypothesis.len(),
            got: z.rows() * z.cols(),
        });
    }
    let features = matching_features(model, premise, hypothesis, z, faithful);
    let width = 8 * model.dim;
    let mut logits = [0.0; 3];
    for c in 0..3 {
        logits[c] = model.matching_weights[c * width..(c + 1) * width]
            .iter()
            .zip(&features)
            .map(|(w, f)| w * f)
            .sum::<f64>()
            + model.matching_bias[c];
    }
    Ok(softmax3(&logits))
}

/// A trained model plus its per-epoch mean loss curve; serializable as a
/// checkpoint.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainOutcome {
    pub model: ToyModel,
    pub epoch_losses: Vec<f64>,
}

/// Trains the model by plain per-example gradient descent on cross-entropy.
///
/// Highlight examples train the generator and predictor, with the generator
/// gradient flowing through the solver's vector-Jacobian product; matching
/// examples train the faithful classifier head over features built from
/// overlapping-pairs extractions (embeddings and alignment scores are
/// frozen). The solver runs in train config at `model.hyper.temperature`.
/// Examples are visited in order, so the whole run is a pure function of the
/// model seed and data. A non-finite loss aborts with diagnostics.
pub fn train_toy(
    model: &ToyModel,
    data: &[SyntheticExample],
    epochs: usize,
) -> Result<TrainOutcome> {
    if data.is_empty() {
        return Err(Error::Empty("training data"));
    }
    let mut model = model.clone();
    let config = ConsensusConfig::train(model.hyper.temperature);
    let lr = model.hyper.learning_rate;
    let mut epoch_losses = Vec::with_capacity(epochs);
    for epoch in 0..epochs {
        let mut total_loss = 0.0;
        for (index, example) in data.iter().enumerate() {
            let loss = match &example.planted_rationale {
                PlantedRationale::Mask(_) => {
                    train_highlight_step(&mut model, example, &config, lr)?
                }
                PlantedRationale::Alignment(_) => {
                    train_matching_step(&mut model, example, &config, lr)?
                }
            };
            if !loss.is_finite() {
                return Err(Error::Training(format!(
                    "non-finite loss at epoch {epoch}, example {index}"
                )));
            }
            total_loss += loss;
        }
        epoch_losses.push(total_loss / data.len() as f64);
    }
    Ok(TrainOutcome {
        model,
        epoch_losses,
    })
}

/// One SGD step on a highlight example; returns the pre-update loss.
fn train_highlight_step(
    model: &mut ToyModel,
    example: &SyntheticExample,
    config: &ConsensusConfig,
    lr: f64,
) -> Result<f64> {
    if example.label > 1 {
        return Err(Error::Training(format!(
            "highlight label {} is not binary",
            example.label
        )));
    }
    let tokens = &example.tokens;
    let extraction = extract_highlight(model, tokens, config)?;
    let z = &extraction.z;
    let p = predict_highlight(model, tokens, z)?;
    let y = example.label as f64;
    let eps = 1e-12;
    let loss = -(y * (p + eps).ln() + (1.0 - y) * (1.0 - p + eps).ln());
    if !loss.is_finite() {
        // leave the model untouched; the caller reports the divergence
        return Ok(loss);
    }

    let dlogit = p - y;
    // predictor gradient on the masked bag
    let mut bag = vec![0.0; model.dim];
    for (&t, &zi) in tokens.iter().zip(z) {
        for (b, e) in bag.iter_mut().zip(model.embedding(t)) {
            *b += zi * e;
        }
    }
    // loss gradient w.r.t. the mask, then through the solver to the scores
    let dz: Vec<f64> = tokens
        .iter()
        .map(|&t| {
            dlogit
                * model
                    .predictor_weights
                    .iter()
                    .zip(model.embedding(t))
                    .map(|(w, e)| w * e)
                    .sum::<f64>()
        })
        .collect();
    let ds = lp_sparsemap_vjp(&extraction.state, &dz)?.grad;

    for (k, b) in bag.iter().enumerate() {
        model.predictor_weights[k] -= lr * dlogit * b;
    }
    model.predictor_bias -= lr * dlogit;
    for (i, &t) in tokens.iter().enumerate() {
        let g = ds[i];
        if g != 0.0 {
            let base = t * model.dim;
            for k in 0..model.dim {
                model.generator_weights[k] -= lr * g * model.embeddings[base + k];
            }
            model.generator_bias -= lr * g;
        }
    }
    Ok(loss)
}

/// One SGD step on a matching example; returns the pre-update loss.
fn train_matching_step(
    model: &mut ToyModel,
    example: &SyntheticExample,
    config: &ConsensusConfig,
    lr: f64,
) -> Result<f64> {
    if example.label > 2 {
        return Err(Error::Training(format!(
            "matching label {} outside the 3 classes",
            example.label
        )));
    }
    let (premise, hypothesis) = example.split_pair()?;
    let extraction = extract_matching(
        model,
        premise,
        hypothesis,
        MatchingVariant::AtMostOne2,
        config,
    )?;
    let probs = predict_matching(model, premise, hypothesis, &extraction.alignment, true)?;
    let y = example.label;
    let eps = 1e-12;
    let loss = -(probs[y] + eps).ln();
    if !loss.is_finite() {
        return Ok(loss);
    }

    let features = matching_features(model, premise, hypothesis, &extraction.alignment, true);
    let width = 8 * model.dim;
    for c in 0..3 {
        let dlogit = probs[c] - if c == y { 1.0 } else { 0.0 };
        for (k, f) in features.iter().enumerate() {
            model.matching_weights[c * width + k] -= lr * dlogit * f;
        }
        model.matching_bias[c] -= lr * dlogit;
    }
    Ok(loss)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::budget_from_pct;

    fn tiny_model(embeddings: Vec<f64>, vocab: usize, dim: usize) -> ToyModel {
        ToyModel::new(vocab, dim, embeddings, ToyHyper::default()).unwrap()
    }

    #[test]
    fn extraction_matches_dominant_structure() {
        // D=1 embeddings make generator scores equal the embedding values
        let mut model = tiny_model(vec![5.0, 5.0, -5.0, -5.0], 4, 1);
        model.generator_weights = vec![1.0];
        model.generator_bias = 0.0;
        model.hyper.budget_pct = 50.0;
        model.hyper.transition = 0.0;
        let config = ConsensusConfig::inference();
        let out = extract_highlight(&model, &[0, 1, 2, 3], &config).unwrap();
        let expected = [1.0, 1.0, 0.0, 0.0];
        for (a, b) in out.z.iter().zip(expected) {
            assert!((a - b).abs() <= 1e-2, "{:?}", out.z);
        }
        assert_eq!(out.scores.as_slice(), &[5.0, 5.0, -5.0, -5.0]);
    }

    #[test]
    fn extraction_with_full_budget_selects_everything_positive() {
        let mut model = tiny_model(vec![2.0, 1.0, 3.0], 3, 1);
        model.generator_weights = vec![1.0];
        model.hyper.budget_pct = 100.0;
        model.hyper.transition = 0.0;
        let out = extract_highlight(&model, &[0, 1, 2], &ConsensusConfig::inference()).unwrap();
        for v in &out.z {
            assert!((v - 1.0).abs() <= 1e-2, "{:?}", out.z);
        }
    }

    #[test]
    fn extraction_respects_budget() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let dim = 4;
        let vocab = 12;
        let table: Vec<f64> = (0..vocab * dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut model = tiny_model(table, vocab, dim);
        model.hyper.budget_pct = 25.0; // B = 3 for L = 12
        let tokens: Vec<usize> = (0..12).map(|_| rng.random_range(0..vocab)).collect();
        let budget = budget_from_pct(25.0, 12);
        assert_eq!(budget, 3);
        for config in [ConsensusConfig::inference(), ConsensusConfig::train(0.1)] {
            let out = extract_highlight(&model, &tokens, &config).unwrap();
            let total: f64 = out.z.iter().sum();
            assert!(total <= budget as f64 + 1e-3, "sum {total}");
        }
    }

    #[test]
    fn predict_highlight_masking_semantics() {
        let model = tiny_model(vec![1.0, 0.5, -2.0, 0.25, 3.0, -1.0], 3, 2);
        // empty rationale exposes only the bias
        let p = predict_highlight(&model, &[0, 1, 2], &[0.0, 0.0, 0.0]).unwrap();
        assert!((p - sigmoid(model.predictor_bias)).abs() < 1e-15);
        // zeroing one coordinate removes that token's contribution exactly
        let with_all = predict_highlight(&model, &[0, 1], &[1.0, 1.0]).unwrap();
        let without_1 = predict_highlight(&model, &[0, 1], &[1.0, 0.0]).unwrap();
        let only_0 = predict_highlight(&model, &[0], &[1.0]).unwrap();
        assert_eq!(without_1, only_0);
        assert_ne!(with_all, without_1);
        // duplicate tokens add linearly: z=[1,1] on (t,t) == z=[2] on (t)
        let twice = predict_highlight(&model, &[1, 1], &[1.0, 1.0]).unwrap();
        let doubled = predict_highlight(&model, &[1], &[2.0]).unwrap();
        assert!((twice - doubled).abs() < 1e-15);
    }

    #[test]
    fn matching_extraction_identity_for_self_dominant_embeddings() {
        // orthogonal, self-dominant embeddings: e_i . e_j maximal at i == j
        let dim = 3;
        let mut table = vec![0.0; 3 * dim];
        for i in 0..3 {
            table[i * dim + i] = 2.0;
        }
        let model = tiny_model(table, 3, dim);
        let out = extract_matching(
            &model,
            &[0, 1, 2],
            &[0, 1, 2],
            MatchingVariant::XorAtMostOne,
            &ConsensusConfig::inference(),
        )
        .unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!(
                    (out.alignment.get(i, j) - expected).abs() <= 1e-2,
                    "Z[{i}][{j}] = {}",
                    out.alignment.get(i, j)
                );
            }
        }
        // scores are plain dot products
        assert!((out.scores.get(1, 1) - 4.0).abs() < 1e-12);
        assert!(out.scores.get(0, 1).abs() < 1e-12);
    }

    #[test]
    fn matching_budget_variant_bounds_total_mass() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let dim = 4;
        let vocab = 10;
        let table: Vec<f64> = (0..vocab * dim).map(|_| rng.random_range(0.2..1.0)).collect();
        let model = tiny_model(table, vocab, dim);
        let premise: Vec<usize> = (0..5).map(|_| rng.random_range(0..vocab)).collect();
        let hypothesis: Vec<usize> = (0..6).map(|_| rng.random_range(0..vocab)).collect();
        let out = extract_matching(
            &model,
            &premise,
            &hypothesis,
            MatchingVariant::Budget { budget: 4 },
            &ConsensusConfig::inference(),
        )
        .unwrap();
        let total: f64 = out.alignment.as_flat().iter().sum();
        assert!(total <= 4.0 + 1e-3, "mass {total}");
    }

    #[test]
    fn matching_all_negative_scores_empty_alignment() {
        let dim = 2;
        // <e_0, e_1> = -0.75: every premise/hypothesis pair scores negative
        let table = vec![1.0, 0.5, -1.0, 0.5];
        let model = tiny_model(table, 2, dim);
        let out = extract_matching(
            &model,
            &[0, 0],
            &[1, 1],
            MatchingVariant::AtMostOne2,
            &ConsensusConfig::inference(),
        )
        .unwrap();
        for v in out.alignment.as_flat() {
            assert!(v.abs() <= 1e-2);
        }
    }

    #[test]
    fn faithful_zero_alignment_hides_premise() {
        let mut rng = ChaCha8Rng::seed_from_u64(35);
        let dim = 4;
        let vocab = 8;
        let table: Vec<f64> = (0..vocab * dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let model = tiny_model(table, vocab, dim);
        let z = AlignmentMatrix::zeros(3, 3).unwrap();
        let a = predict_matching(&model, &[0, 1, 2], &[3, 4, 5], &z, true).unwrap();
        let b = predict_matching(&model, &[6, 7, 0], &[3, 4, 5], &z, true).unwrap();
        assert_eq!(a, b);
        // non-faithful mode does see the premise
        let c = predict_matching(&model, &[0, 1, 2], &[3, 4, 5], &z, false).unwrap();
        let d = predict_matching(&model, &[6, 7, 0], &[3, 4, 5], &z, false).unwrap();
        assert_ne!(c, d);
    }

    #[test]
    fn identity_alignment_on_identical_sequences_zeroes_difference_block() {
        let mut rng = ChaCha8Rng::seed_from_u64(36);
        let dim = 3;
        let vocab = 6;
        let table: Vec<f64> = (0..vocab * dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let model = tiny_model(table, vocab, dim);
        let tokens = [1usize, 3, 5];
        let mut z = AlignmentMatrix::zeros(3, 3).unwrap();
        for i in 0..3 {
            z.set(i, i, 1.0);
        }
        let features = matching_features(&model, &tokens, &tokens, &z, false);
        // blocks: [r_p (2d), r_h (2d), r_p - r_h (2d), r_p . r_h (2d)]
        for k in 0..2 * dim {
            assert!(features[4 * dim + k].abs() < 1e-12);
        }
    }

    #[test]
    fn probabilities_are_normalized() {
        let model = tiny_model(vec![0.3, -0.2, 0.8, 0.1], 2, 2);
        let mut z = AlignmentMatrix::zeros(1, 1).unwrap();
        z.set(0, 0, 0.7);
        let p = predict_matching(&model, &[0], &[1], &z, false).unwrap();
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(p.iter().all(|&v| v > 0.0));
    }

    #[test]
    fn rejects_mismatched_shapes_and_unknown_tokens() {
        let model = tiny_model(vec![0.0; 8], 4, 2);
        assert!(predict_highlight(&model, &[0, 1], &[1.0]).is_err());
        assert!(predict_highlight(&model, &[9], &[1.0]).is_err());
        let z = AlignmentMatrix::zeros(2, 2).unwrap();
        assert!(predict_matching(&model, &[0], &[1, 2], &z, true).is_err());
        assert!(extract_highlight(&model, &[], &ConsensusConfig::inference()).is_err());
    }

    fn highlight_loss(model: &ToyModel, example: &SyntheticExample, config: &ConsensusConfig) -> f64 {
        let extraction = extract_highlight(model, &example.tokens, config).unwrap();
        let p = predict_highlight(model, &example.tokens, &extraction.z).unwrap();
        let y = example.label as f64;
        -(y * (p + 1e-12).ln() + (1.0 - y) * (1.0 - p + 1e-12).ln())
    }

    #[test]
    fn zero_learning_rate_is_a_null_update() {
        let mut hyper = ToyHyper::default();
        hyper.learning_rate = 0.0;
        hyper.seed = 3;
        let model = synthetic::standard_model(hyper).unwrap();
        let data = synthetic::highlight_examples(12, 20, 20.0, 4).unwrap();
        let config = ConsensusConfig::train(model.hyper.temperature);
        let initial: f64 =
            data.iter().map(|ex| highlight_loss(&model, ex, &config)).sum::<f64>() / 12.0;
        let out = train_toy(&model, &data, 1).unwrap();
        assert_eq!(out.model.generator_weights, model.generator_weights);
        assert_eq!(out.model.generator_bias, model.generator_bias);
        assert_eq!(out.model.predictor_weights, model.predictor_weights);
        assert_eq!(out.model.predictor_bias, model.predictor_bias);
        assert_eq!(out.model.matching_weights, model.matching_weights);
        assert!((out.epoch_losses[0] - initial).abs() < 1e-12);
    }

    #[test]
    fn training_reduces_highlight_loss() {
        let mut hyper = ToyHyper::default();
        hyper.seed = 9;
        let model = synthetic::standard_model(hyper).unwrap();
        let data = synthetic::highlight_examples(200, 20, 20.0, 10).unwrap();
        let out = train_toy(&model, &data, 3).unwrap();
        assert_eq!(out.epoch_losses.len(), 3);
        assert!(
            out.epoch_losses[2] < out.epoch_losses[0],
            "losses {:?}",
            out.epoch_losses
        );
    }

    #[test]
    fn training_reduces_matching_loss() {
        let mut hyper = ToyHyper::default();
        hyper.seed = 21;
        let model = synthetic::standard_model(hyper).unwrap();
        let data = synthetic::matching_examples(150, 4, 5, 22).unwrap();
        let out = train_toy(&model, &data, 3).unwrap();
        assert!(
            out.epoch_losses[2] < out.epoch_losses[0],
            "losses {:?}",
            out.epoch_losses
        );
    }

    #[test]
    fn loss_curves_are_bit_identical_across_reruns() {
        let mut hyper = ToyHyper::default();
        hyper.seed = 14;
        let data = synthetic::highlight_examples(60, 20, 20.0, 15).unwrap();
        let run = || {
            let model = synthetic::standard_model(hyper.clone()).unwrap();
            train_toy(&model, &data, 2).unwrap().epoch_losses
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn end_to_end_gradient_matches_finite_differences() {
        let mut hyper = ToyHyper::default();
        hyper.seed = 27;
        hyper.budget_pct = 30.0;
        let model = synthetic::standard_model(hyper).unwrap();
        let data = synthetic::highlight_examples(4, 10, 30.0, 28).unwrap();
        let config = ConsensusConfig::train(model.hyper.temperature);
        let n = data.len() as f64;

        // analytic batch gradient w.r.t. generator weights and bias
        let mut grad = vec![0.0; model.dim + 1];
        for ex in &data {
            let extraction = extract_highlight(&model, &ex.tokens, &config).unwrap();
            let p = predict_highlight(&model, &ex.tokens, &extraction.z).unwrap();
            let dlogit = p - ex.label as f64;
            let dz: Vec<f64> = ex
                .tokens
                .iter()
                .map(|&t| {
                    dlogit
                        * model
                            .predictor_weights
                            .iter()
                            .zip(model.embedding(t))
                            .map(|(w, e)| w * e)
                            .sum::<f64>()
                })
                .collect();
            let ds = lp_sparsemap_vjp(&extraction.state, &dz).unwrap().grad;
            for (i, &t) in ex.tokens.iter().enumerate() {
                for (k, e) in model.embedding(t).iter().enumerate() {
                    grad[k] += ds[i] * e / n;
                }
                grad[model.dim] += ds[i] / n;
            }
        }

        let batch_loss = |m: &ToyModel| -> f64 {
            data.iter().map(|ex| highlight_loss(m, ex, &config)).sum::<f64>() / n
        };
        let step = 1e-5;
        let mut worst = 0.0f64;
        let mut scale = 0.0f64;
        for k in 0..=model.dim {
            let mut plus = model.clone();
            let mut minus = model.clone();
            if k < model.dim {
                plus.generator_weights[k] += step;
                minus.generator_weights[k] -= step;
            } else {
                plus.generator_bias += step;
                minus.generator_bias -= step;
            }
            let fd = (batch_loss(&plus) - batch_loss(&minus)) / (2.0 * step);
            worst = worst.max((grad[k] - fd).abs());
            scale = scale.max(fd.abs());
        }
        assert!(
            worst <= 1e-3 * scale.max(1e-6),
            "max abs err {worst}, scale {scale}"
        );
    }

    #[test]
    fn non_finite_loss_aborts_with_diagnostics() {
        let mut model = synthetic::standard_model(ToyHyper::default()).unwrap();
        model.predictor_bias = f64::NAN;
        let data = synthetic::highlight_examples(3, 10, 30.0, 2).unwrap();
        let err = train_toy(&model, &data, 1).unwrap_err();
        assert!(err.to_string().contains("epoch 0"), "{err}");
    }
}
