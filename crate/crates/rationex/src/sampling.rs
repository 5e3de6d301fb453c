//! Gibbs distributions and stochastic extraction baselines.
//!
//! [`gibbs_enumerate`] tabulates `p(z; s) = exp(score(z; s)) / Z` exactly over
//! the feasible set of a small graph. [`perturb_and_map_sample`] draws
//! approximate samples by adding Gumbel(0,1) noise to each variable's score
//! and solving the perturbed MAP exactly. [`gumbel_matching`] perturbs an
//! alignment score matrix and returns either relaxed (softmax) or hard
//! (argmax) alignments in both directions.
//!
//! All randomness flows through a seeded ChaCha stream, so every output is
//! reproducible from its recorded 64-bit seed.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{AlignmentMatrix, Assignment, FactorGraph, Scores};
use crate::oracles::{factor_map, map_global_brute_force, BRUTE_FORCE_MAX_VARIABLES};

/// Hard cap for exact Gibbs enumeration.
pub const GIBBS_MAX_VARIABLES: usize = 20;

/// The exact Gibbs distribution of a graph: every feasible assignment, its
/// probability, and the log-partition value.
///
/// Assignments are listed in enumeration order with variable 0 varying
/// fastest, so for two unconstrained variables the order is
/// `00, 10, 01, 11`.
#[derive(Debug, Clone)]
pub struct GibbsTable {
    pub assignments: Vec<Assignment>,
    pub probabilities: Vec<f64>,
    pub log_partition: f64,
}

fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = values.iter().map(|v| (v - max).exp()).sum();
    max + sum.ln()
}

/// Exactly enumerates the Gibbs distribution `p(z; s)` over feasible
/// assignments of `graph` (at most [`GIBBS_MAX_VARIABLES`] variables).
pub fn gibbs_enumerate(graph: &FactorGraph, s: &Scores) -> Result<GibbsTable> {
    graph.check_scores(s)?;
    let l = graph.num_variables();
    if l > GIBBS_MAX_VARIABLES {
        return Err(Error::TooLarge {
            what: "Gibbs enumeration",
            limit: GIBBS_MAX_VARIABLES,
            got: l,
        });
    }
    let mut assignments = Vec::new();
    let mut scores = Vec::new();
    let mut bits = vec![0u8; l];
    for mask in 0u64..(1u64 << l) {
        for (i, b) in bits.iter_mut().enumerate() {
            *b = ((mask >> i) & 1) as u8;
        }
        let assignment = Assignment::new(bits.clone());
        if let Some(score) = graph.score(s.as_slice(), &assignment) {
            assignments.push(assignment);
            scores.push(score);
        }
    }
    if assignments.is_empty() {
        return Err(Error::InvalidGraph(
            "no feasible assignment under the hard constraints".into(),
        ));
    }
    let log_partition = log_sum_exp(&scores);
    let probabilities = scores.iter().map(|v| (v - log_partition).exp()).collect();
    Ok(GibbsTable {
        assignments,
        probabilities,
        log_partition,
    })
}

/// One standard Gumbel(0,1) draw via `-ln(-ln(U))`, `U` uniform on the open
/// unit interval (endpoints resampled).
pub fn gumbel<R: Rng>(rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            return -(-u.ln()).ln();
        }
    }
}

/// Draws `n` perturb-and-MAP samples: each sample is the exact MAP of
/// `s + g` with fresh i.i.d. Gumbel(0,1) noise `g` per variable.
///
/// Exact MAP uses the factor's own oracle on single-factor graphs and the
/// brute force otherwise, so the graph must either have one factor or at most
/// [`BRUTE_FORCE_MAX_VARIABLES`] variables. Samples are always feasible and
/// the sequence is a pure function of `seed`.
pub fn perturb_and_map_sample(
    graph: &FactorGraph,
    s: &Scores,
    seed: u64,
    n: usize,
) -> Result<Vec<Assignment>> {
    graph.check_scores(s)?;
    let l = graph.num_variables();
    let single_factor = graph.factors().len() == 1;
    if !single_factor && l > BRUTE_FORCE_MAX_VARIABLES {
        return Err(Error::TooLarge {
            what: "perturb-and-MAP (multi-factor graphs use the brute force)",
            limit: BRUTE_FORCE_MAX_VARIABLES,
            got: l,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = Vec::with_capacity(n);
    for _ in 0..n {
        let perturbed: Vec<f64> = s.as_slice().iter().map(|&v| v + gumbel(&mut rng)).collect();
        let assignment = if single_factor {
            let factor = &graph.factors()[0];
            let local: Vec<f64> = factor.members.iter().map(|&m| perturbed[m]).collect();
            let result = factor_map(&factor.kind, &local)?;
            let mut bits = vec![0u8; l];
            for (j, &m) in factor.members.iter().enumerate() {
                bits[m] = result.assignment.bits[j];
            }
            Assignment::new(bits)
        } else {
            map_global_brute_force(graph, &Scores::new(perturbed)?)?.assignment
        };
        samples.push(assignment);
    }
    Ok(samples)
}

/// How [`gumbel_matching`] turns perturbed scores into alignments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GumbelMode {
    /// Relaxed alignments: softmax of perturbed scores over each row
    /// (premise side) and each column (hypothesis side), scaled by a
    /// temperature.
    Train { temperature: f64 },
    /// Hard alignments: row-wise and column-wise argmax indicators.
    Test,
}

impl GumbelMode {
    /// Train mode at the default temperature 0.1.
    pub fn train() -> Self {
        GumbelMode::Train { temperature: 0.1 }
    }
}

/// A perturbed alignment pair: premise-to-hypothesis (row-normalized or row
/// argmax) and hypothesis-to-premise (column-normalized or column argmax),
/// both `rows x cols`, plus the seed that generated the perturbation.
#[derive(Debug, Clone)]
pub struct MatchingSample {
    pub row_alignment: AlignmentMatrix,
    pub col_alignment: AlignmentMatrix,
    pub seed: u64,
}

/// Perturbs `scores` with i.i.d. Gumbel(0,1) noise and extracts alignments in
/// both directions according to `mode`.
pub fn gumbel_matching(
    scores: &AlignmentMatrix,
    seed: u64,
    mode: GumbelMode,
) -> Result<MatchingSample> {
    if let GumbelMode::Train { temperature } = mode {
        if !temperature.is_finite() || temperature <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "temperature",
                reason: format!("must be positive, got {temperature}"),
            });
        }
    }
    let (rows, cols) = (scores.rows(), scores.cols());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut perturbed = scores.clone();
    for i in 0..rows {
        for j in 0..cols {
            perturbed.set(i, j, perturbed.get(i, j) + gumbel(&mut rng));
        }
    }
    let mut row_alignment = AlignmentMatrix::zeros(rows, cols)?;
    let mut col_alignment = AlignmentMatrix::zeros(rows, cols)?;
    match mode {
        GumbelMode::Test => {
            for i in 0..rows {
                let mut best = 0;
                for j in 1..cols {
                    if perturbed.get(i, j) > perturbed.get(i, best) {
                        best = j;
                    }
                }
                row_alignment.set(i, best, 1.0);
            }
            for j in 0..cols {
                let mut best = 0;
                for i in 1..rows {
                    if perturbed.get(i, j) > perturbed.get(best, j) {
                        best = i;
                    }
                }
                col_alignment.set(best, j, 1.0);
            }
        }
        GumbelMode::Train { temperature } => {
            for i in 0..rows {
                let logits: Vec<f64> =
                    (0..cols).map(|j| perturbed.get(i, j) / temperature).collect();
                let lse = log_sum_exp(&logits);
                for j in 0..cols {
                    row_alignment.set(i, j, (logits[j] - lse).exp());
                }
            }
            for j in 0..cols {
                let logits: Vec<f64> =
                    (0..rows).map(|i| perturbed.get(i, j) / temperature).collect();
                let lse = log_sum_exp(&logits);
                for i in 0..rows {
                    col_alignment.set(i, j, (logits[i] - lse).exp());
                }
            }
        }
    }
    Ok(MatchingSample {
        row_alignment,
        col_alignment,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{
        build_matching_graph, Factor, FactorKind, MatchingVariant,
    };

    fn unconstrained_pair(s0: f64, s1: f64) -> (FactorGraph, Scores) {
        let g = FactorGraph::new(
            2,
            vec![Factor::new(FactorKind::Budget { budget: 2 }, vec![0, 1])],
        )
        .unwrap();
        (g, Scores::new(vec![s0, s1]).unwrap())
    }

    #[test]
    fn gibbs_matches_hand_weights() {
        let (g, s) = unconstrained_pair(2.0f64.ln(), 0.0);
        let table = gibbs_enumerate(&g, &s).unwrap();
        // order 00, 10, 01, 11 with weights 1, 2, 1, 2
        let expected = [1.0 / 6.0, 2.0 / 6.0, 1.0 / 6.0, 2.0 / 6.0];
        assert_eq!(table.assignments.len(), 4);
        assert_eq!(table.assignments[1].bits, vec![1, 0]);
        for (p, e) in table.probabilities.iter().zip(expected) {
            assert!((p - e).abs() < 1e-12);
        }
        assert!((table.log_partition - 6.0f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn gibbs_xor_symmetry_and_support() {
        let g = FactorGraph::new(2, vec![Factor::new(FactorKind::Xor, vec![0, 1])]).unwrap();
        let table = gibbs_enumerate(&g, &Scores::new(vec![0.0, 0.0]).unwrap()).unwrap();
        assert_eq!(table.assignments.len(), 2);
        assert_eq!(table.assignments[0].bits, vec![1, 0]);
        assert_eq!(table.assignments[1].bits, vec![0, 1]);
        assert!((table.probabilities[0] - 0.5).abs() < 1e-12);
        assert!((table.probabilities[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn gibbs_uniform_on_zero_scores() {
        let (g, s) = unconstrained_pair(0.0, 0.0);
        let table = gibbs_enumerate(&g, &s).unwrap();
        for p in &table.probabilities {
            assert!((p - 0.25).abs() < 1e-12);
        }
    }

    #[test]
    fn gibbs_normalizes_and_matches_direct_summation() {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..30 {
            let l = rng.random_range(2..=10);
            let budget = rng.random_range(1..=l);
            let g = FactorGraph::new(
                l,
                vec![Factor::new(
                    FactorKind::SeqBudget {
                        edge_scores: (0..l - 1).map(|_| rng.random_range(-1.0..1.0)).collect(),
                        budget,
                    },
                    (0..l).collect(),
                )],
            )
            .unwrap();
            let s = Scores::new((0..l).map(|_| rng.random_range(-2.0..2.0)).collect()).unwrap();
            let table = gibbs_enumerate(&g, &s).unwrap();
            let total: f64 = table.probabilities.iter().sum();
            assert!((total - 1.0).abs() <= 1e-10);
            // direct (unstabilized) summation as the independent reference
            let direct: f64 = table
                .assignments
                .iter()
                .map(|a| g.score(s.as_slice(), a).unwrap().exp())
                .sum();
            assert!((table.log_partition - direct.ln()).abs() <= 1e-9);
        }
    }

    #[test]
    fn gibbs_guards_size() {
        let g = FactorGraph::new(
            21,
            vec![Factor::new(FactorKind::Budget { budget: 1 }, (0..21).collect())],
        )
        .unwrap();
        let s = Scores::new(vec![0.0; 21]).unwrap();
        assert!(matches!(
            gibbs_enumerate(&g, &s),
            Err(Error::TooLarge { .. })
        ));
    }

    #[test]
    fn gumbel_mean_matches_euler_mascheroni() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let n = 1_000_000;
        let mean: f64 = (0..n).map(|_| gumbel(&mut rng)).sum::<f64>() / n as f64;
        assert!((mean - 0.5772).abs() < 0.02, "mean {mean}");
    }

    #[test]
    fn perturb_and_map_is_deterministic_and_feasible() {
        let g = build_matching_graph(3, 3, MatchingVariant::XorAtMostOne).unwrap();
        let s = Scores::new((0..9).map(|i| (i % 4) as f64 * 0.5).collect()).unwrap();
        let a = perturb_and_map_sample(&g, &s, 17, 50).unwrap();
        let b = perturb_and_map_sample(&g, &s, 17, 50).unwrap();
        assert_eq!(a, b);
        let c = perturb_and_map_sample(&g, &s, 18, 50).unwrap();
        assert_ne!(a, c);
        for sample in &a {
            assert!(g.score(s.as_slice(), sample).is_some(), "infeasible sample");
        }
    }

    #[test]
    fn perturb_and_map_mode_matches_map_on_large_gap() {
        let g = FactorGraph::new(3, vec![Factor::new(FactorKind::Xor, vec![0, 1, 2])]).unwrap();
        let s = Scores::new(vec![10.0, 0.0, 0.0]).unwrap();
        let samples = perturb_and_map_sample(&g, &s, 5, 1000).unwrap();
        let hits = samples.iter().filter(|a| a.bits[0] == 1).count();
        assert!(hits > 990, "only {hits}/1000 samples at the MAP");
    }

    /// Sampler-mode diagnostic: with a MAP score gap of at least 3, the
    /// empirical mode over 20k samples lands on the true MAP.
    #[test]
    fn perturb_and_map_empirical_mode_on_gapped_instances() {
        use rand::Rng;
        use std::collections::HashMap;
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let mut checked = 0;
        while checked < 5 {
            let l = rng.random_range(3..=8);
            let budget = rng.random_range(1..=l - 1);
            let g = FactorGraph::new(
                l,
                vec![Factor::new(
                    FactorKind::Budget { budget },
                    (0..l).collect(),
                )],
            )
            .unwrap();
            let s = Scores::new((0..l).map(|_| rng.random_range(-4.0..4.0)).collect()).unwrap();
            let table = gibbs_enumerate(&g, &s).unwrap();
            let mut scored: Vec<f64> = table
                .assignments
                .iter()
                .map(|a| g.score(s.as_slice(), a).unwrap())
                .collect();
            scored.sort_by(|a, b| b.partial_cmp(a).unwrap());
            if scored[0] - scored[1] < 3.0 {
                continue; // gap too small for the diagnostic
            }
            checked += 1;
            let map = map_global_brute_force(&g, &s).unwrap().assignment;
            let samples = perturb_and_map_sample(&g, &s, 1000 + checked as u64, 20_000).unwrap();
            let mut counts: HashMap<Vec<u8>, usize> = HashMap::new();
            for a in samples {
                *counts.entry(a.bits).or_default() += 1;
            }
            let mode = counts.iter().max_by_key(|(_, &c)| c).unwrap().0.clone();
            assert_eq!(mode, map.bits);
        }
    }

    #[test]
    fn gumbel_matching_test_mode_prefers_dominant_diagonal() {
        let s = AlignmentMatrix::new(2, 2, vec![5.0, 0.0, 0.0, 5.0]).unwrap();
        let sample = gumbel_matching(&s, 0, GumbelMode::Test).unwrap();
        assert_eq!(sample.seed, 0);
        assert_eq!(sample.row_alignment.as_flat(), &[1.0, 0.0, 0.0, 1.0]);
        assert_eq!(sample.col_alignment.as_flat(), &[1.0, 0.0, 0.0, 1.0]);
        // hard alignments: one per row / one per column
        let wide = AlignmentMatrix::new(3, 5, vec![0.0; 15]).unwrap();
        let sample = gumbel_matching(&wide, 7, GumbelMode::Test).unwrap();
        for i in 0..3 {
            assert_eq!(sample.row_alignment.row_sum(i), 1.0);
        }
        for j in 0..5 {
            assert_eq!(sample.col_alignment.col_sum(j), 1.0);
        }
        assert!(sample
            .row_alignment
            .as_flat()
            .iter()
            .all(|&v| v == 0.0 || v == 1.0));
    }

    #[test]
    fn gumbel_matching_train_mode_is_normalized() {
        let s = AlignmentMatrix::new(3, 4, (0..12).map(|i| i as f64 * 0.3).collect()).unwrap();
        let sample = gumbel_matching(&s, 42, GumbelMode::train()).unwrap();
        for i in 0..3 {
            assert!((sample.row_alignment.row_sum(i) - 1.0).abs() < 1e-10);
        }
        for j in 0..4 {
            assert!((sample.col_alignment.col_sum(j) - 1.0).abs() < 1e-10);
        }
        assert!(sample
            .row_alignment
            .as_flat()
            .iter()
            .chain(sample.col_alignment.as_flat())
            .all(|&v| (0.0..=1.0).contains(&v)));
        // same seed reproduces the perturbation exactly
        let again = gumbel_matching(&s, 42, GumbelMode::train()).unwrap();
        assert_eq!(sample.row_alignment, again.row_alignment);
        assert_eq!(sample.col_alignment, again.col_alignment);
        assert!(gumbel_matching(&s, 42, GumbelMode::Train { temperature: 0.0 }).is_err());
    }
}
