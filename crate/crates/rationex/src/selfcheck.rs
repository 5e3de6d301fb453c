//! Randomized oracle suites certifying the whole stack.
//!
//! Each criterion checks one layer against an independent reference: brute
//! force for MAP oracles, the closed-form simplex projection for the XOR
//! relaxation, central finite differences for gradients, direct summation
//! for sampling, constraint arithmetic for consensus feasibility, and
//! planted ground truth for end-to-end training. The CLI `selfcheck`
//! subcommand and the acceptance test suite both drive [`run_all`].

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{
    build_highlight_graph, build_matching_graph, Assignment, Factor, FactorGraph, FactorKind,
    MatchingVariant, Scores,
};
use crate::metrics;
use crate::oracles::{factor_map, map_global_brute_force};
use crate::rationalizer::{
    extract_highlight, predict_matching, synthetic, train_toy, PlantedRationale, ToyHyper,
};
use crate::sampling::{gibbs_enumerate, perturb_and_map_sample};
use crate::solver::{
    lp_sparsemap_solve, lp_sparsemap_vjp, sparsemap_solve, sparsemap_vjp, ConsensusConfig,
};

/// Outcome of one acceptance criterion.
#[derive(Debug, Clone)]
pub struct CriterionReport {
    /// 1-based criterion number.
    pub index: usize,
    pub name: &'static str,
    pub passed: bool,
    pub details: String,
    pub seconds: f64,
}

impl CriterionReport {
    /// One-line pass/fail summary.
    pub fn line(&self) -> String {
        format!(
            "criterion {}: {} — {} [{}] ({:.1}s)",
            self.index,
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.details,
            self.seconds
        )
    }
}

pub const CRITERIA_COUNT: usize = 8;

/// Runs one criterion (1-based). The wall-clock budget is part of the check.
pub fn run_criterion(index: usize) -> Result<CriterionReport> {
    type Body = fn() -> Result<(bool, String)>;
    let (name, budget, body): (&'static str, f64, Body) = match index {
        1 => ("factor MAP oracles match brute force", 30.0, oracle_equivalence),
        2 => ("XOR relaxation matches simplex projection", 5.0, sparsemax_equivalence),
        3 => ("solver gradients match finite differences", 120.0, gradient_fidelity),
        4 => ("consensus feasibility on 6x8 matchings", 120.0, constraint_feasibility),
        5 => ("low-temperature inference recovers the MAP", 60.0, map_recovery),
        6 => ("sampling matches exact enumeration", 60.0, sampling_correctness),
        7 => ("toy rationalizers train end to end", 930.0, rationalizer_end_to_end),
        8 => ("single-factor consensus equals direct solve", 10.0, reduction_identity),
        _ => {
            return Err(Error::InvalidParameter {
                name: "criterion",
                reason: format!("must be in [1, {CRITERIA_COUNT}], got {index}"),
            })
        }
    };
    let started = Instant::now();
    let (mut passed, mut details) = match body() {
        Ok(outcome) => outcome,
        Err(e) => (false, format!("errored: {e}")),
    };
    let seconds = started.elapsed().as_secs_f64();
    if seconds > budget {
        passed = false;
        details.push_str(&format!("; exceeded the {budget:.0}s budget"));
    }
    Ok(CriterionReport {
        index,
        name,
        passed,
        details,
        seconds,
    })
}

/// Runs every criterion in order.
pub fn run_all() -> Vec<CriterionReport> {
    (1..=CRITERIA_COUNT)
        .map(|i| run_criterion(i).expect("criterion index in range"))
        .collect()
}

fn uniform(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(lo..hi)).collect()
}

/// Random factor kind over `l >= 2` variables; `kind_id` in 0..5.
fn random_kind(rng: &mut ChaCha8Rng, kind_id: usize, l: usize) -> FactorKind {
    match kind_id {
        0 => FactorKind::Xor,
        1 => FactorKind::AtMostOne,
        2 => FactorKind::Budget {
            budget: rng.random_range(1..=l.min(5)),
        },
        3 => FactorKind::Pair {
            edge_score: rng.random_range(-2.0..2.0),
        },
        _ => FactorKind::SeqBudget {
            edge_scores: uniform(rng, l - 1, -2.0, 2.0),
            budget: rng.random_range(1..=l.min(5)),
        },
    }
}

fn single_factor_graph(kind: FactorKind, l: usize) -> Result<FactorGraph> {
    FactorGraph::new(l, vec![Factor::new(kind, (0..l).collect())])
}

/// Criterion 1: specialized MAP oracles vs exhaustive enumeration.
fn oracle_equivalence() -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst: f64 = 0.0;
    let mut count = 0usize;
    for kind_id in 0..5 {
        for _ in 0..1000 {
            let l = if kind_id == 3 { 2 } else { rng.random_range(2..=12) };
            let s = uniform(&mut rng, l, -2.0, 2.0);
            let kind = random_kind(&mut rng, kind_id, l);
            let fast = factor_map(&kind, &s)?;
            let graph = single_factor_graph(kind, l)?;
            let brute = map_global_brute_force(&graph, &Scores::new(s)?)?;
            worst = worst.max((fast.score - brute.score).abs());
            count += 1;
        }
    }
    Ok((
        worst <= 1e-9,
        format!("{count} instances, max MAP score gap {worst:.2e}"),
    ))
}

/// Closed-form sparsemax: Euclidean projection of `s` onto the simplex.
fn sparsemax_projection(s: &[f64]) -> Vec<f64> {
    let mut sorted = s.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).expect("finite scores"));
    let mut cumulative = 0.0;
    let mut tau = sorted[0] - 1.0;
    for (k, &v) in sorted.iter().enumerate() {
        cumulative += v;
        let candidate = (cumulative - 1.0) / (k + 1) as f64;
        if v > candidate {
            tau = candidate;
        }
    }
    s.iter().map(|&v| (v - tau).max(0.0)).collect()
}

/// Criterion 2: the XOR factor at T=1 reproduces sparsemax exactly.
fn sparsemax_equivalence() -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let l = rng.random_range(2..=10);
        let s = uniform(&mut rng, l, -2.0, 2.0);
        let factor = Factor::new(FactorKind::Xor, (0..l).collect());
        let solution = sparsemap_solve(&factor, &s, 1.0)?;
        let reference = sparsemax_projection(&s);
        for (a, b) in solution.z.iter().zip(&reference) {
            worst = worst.max((a - b).abs());
        }
    }
    Ok((
        worst <= 1e-6,
        format!("1000 vectors, max coordinate gap {worst:.2e}"),
    ))
}

fn support_signature(active: &[(Assignment, f64)]) -> Vec<Vec<u8>> {
    let mut sig: Vec<Vec<u8>> = active.iter().map(|(a, _)| a.bits.clone()).collect();
    sig.sort();
    sig
}

fn consensus_signature(state: &crate::solver::ConsensusState) -> (Vec<Vec<Vec<u8>>>, Vec<u8>) {
    let supports = state
        .active_supports()
        .into_iter()
        .map(|factor_support| {
            let mut sig: Vec<Vec<u8>> = factor_support.into_iter().map(|a| a.bits).collect();
            sig.sort();
            sig
        })
        .collect();
    // box-boundary pattern; clipped coordinates land exactly on 0 or 1
    let boundary = state
        .u
        .iter()
        .map(|&v| {
            if v == 0.0 {
                0
            } else if v == 1.0 {
                1
            } else {
                2
            }
        })
        .collect();
    (supports, boundary)
}

/// Criterion 3: analytic vjps vs central finite differences, filtered to
/// instances whose certifying supports stay fixed under the perturbations.
fn gradient_fidelity() -> Result<(bool, String)> {
    let step = 1e-5;
    let mut rng = ChaCha8Rng::seed_from_u64(103);

    // single-factor layer
    let mut accepted = 0usize;
    let mut attempts = 0usize;
    let mut worst_single: f64 = 0.0;
    'single: while accepted < 100 && attempts < 4000 {
        attempts += 1;
        let kind_id = rng.random_range(0..5);
        let l = if kind_id == 3 { 2 } else { rng.random_range(3..=8) };
        let temperature = if rng.random() { 1.0 } else { 0.5 };
        let kind = random_kind(&mut rng, kind_id, l);
        let factor = Factor::new(kind, (0..l).collect());
        let mut s = uniform(&mut rng, l, -2.0, 2.0);
        let base = sparsemap_solve(&factor, &s, temperature)?;
        if !base.converged || base.active_set.iter().any(|(_, w)| *w < 1e-4) {
            continue;
        }
        let signature = support_signature(&base.active_set);
        let upstream = uniform(&mut rng, l, -1.0, 1.0);
        let vjp = sparsemap_vjp(&base, &upstream)?;
        if vjp.approximate {
            continue;
        }
        let mut fd = vec![0.0; l];
        for k in 0..l {
            let mut sided = [0.0; 2];
            for (side, delta) in [(0usize, step), (1, -step)] {
                s[k] += delta;
                let moved = sparsemap_solve(&factor, &s, temperature)?;
                s[k] -= delta;
                if support_signature(&moved.active_set) != signature {
                    continue 'single;
                }
                sided[side] = moved.z.iter().zip(&upstream).map(|(z, u)| z * u).sum();
            }
            fd[k] = (sided[0] - sided[1]) / (2.0 * step);
        }
        // vertex-locked solutions have a true gradient of exactly zero; the
        // scale floor keeps their probes (solver noise, ~1e-10) judged in
        // absolute terms instead of dividing noise by noise
        let scale = fd.iter().fold(1e-4f64, |m, v| m.max(v.abs()));
        let err = vjp
            .grad
            .iter()
            .zip(&fd)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        worst_single = worst_single.max(err / scale);
        accepted += 1;
    }
    let single_ok = accepted == 100 && worst_single <= 1e-4;
    let single_detail = format!(
        "single-factor {accepted}/100 stable (of {attempts}), max rel err {worst_single:.2e}"
    );

    // consensus layer on small matchings, with the full run unrolled; the
    // tight tolerance keeps finite-difference probes above solver noise
    let config = ConsensusConfig {
        temperature: 0.1,
        rho: 1.0,
        max_iters: 30_000,
        tol: 1e-12,
        unroll_window: 30_000,
    };
    let mut accepted_lp = 0usize;
    let mut attempts_lp = 0usize;
    let mut worst_lp: f64 = 0.0;
    'consensus: while accepted_lp < 50 && attempts_lp < 1000 {
        attempts_lp += 1;
        let rows = rng.random_range(2..=4);
        let cols = rng.random_range(2..=4);
        let variant = match attempts_lp % 3 {
            0 => MatchingVariant::XorAtMostOne,
            1 => MatchingVariant::AtMostOne2,
            _ => MatchingVariant::Budget {
                budget: rng.random_range(2..=rows.min(cols)),
            },
        };
        let graph = build_matching_graph(rows, cols, variant)?;
        let l = rows * cols;
        let mut s = uniform(&mut rng, l, -1.0, 1.0);
        let base = lp_sparsemap_solve(&graph, &Scores::new(s.clone())?, &config)?;
        if !base.converged {
            continue;
        }
        let signature = consensus_signature(&base);
        let upstream = uniform(&mut rng, l, -1.0, 1.0);
        let vjp = lp_sparsemap_vjp(&base, &upstream)?;
        if vjp.approximate {
            continue;
        }
        // probing a coordinate subset keeps the FD solve count bounded
        let mut coords: Vec<usize> = (0..l).collect();
        coords.shuffle(&mut rng);
        coords.truncate(6);
        // same scale floor as the single-factor layer: integral consensus
        // solutions are locally constant and both probe sides read ~1e-10
        let mut scale = 1e-4f64;
        let mut err = 0.0f64;
        for &k in &coords {
            let mut sided = [0.0; 2];
            for (side, delta) in [(0usize, step), (1, -step)] {
                s[k] += delta;
                let moved = lp_sparsemap_solve(&graph, &Scores::new(s.clone())?, &config)?;
                s[k] -= delta;
                if !moved.converged || consensus_signature(&moved) != signature {
                    continue 'consensus;
                }
                sided[side] = moved.u.iter().zip(&upstream).map(|(z, u)| z * u).sum();
            }
            let fd = (sided[0] - sided[1]) / (2.0 * step);
            scale = scale.max(fd.abs());
            err = err.max((vjp.grad[k] - fd).abs());
        }
        worst_lp = worst_lp.max(err / scale);
        accepted_lp += 1;
    }
    let lp_ok = accepted_lp == 50 && worst_lp <= 1e-3;
    let lp_detail = format!(
        "consensus {accepted_lp}/50 stable (of {attempts_lp}), max rel err {worst_lp:.2e}"
    );
    Ok((single_ok && lp_ok, format!("{single_detail}; {lp_detail}")))
}

/// Criterion 4: constraint bounds on the relaxed solution at the inference
/// configuration, across all matching variants.
fn constraint_feasibility() -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(104);
    let config = ConsensusConfig::inference();
    let (rows, cols) = (6usize, 8usize);
    let mut worst_row_dev: f64 = 0.0; // |sum - 1| for XOR rows
    let mut worst_excess: f64 = 0.0; // overshoot of at-most-one / budget caps
    let mut converged = 0usize;
    for index in 0..200 {
        let budget = rng.random_range(2..=6);
        let variant = match index % 3 {
            0 => MatchingVariant::XorAtMostOne,
            1 => MatchingVariant::AtMostOne2,
            _ => MatchingVariant::Budget { budget },
        };
        let graph = build_matching_graph(rows, cols, variant)?;
        let s = Scores::new(uniform(&mut rng, rows * cols, -2.0, 2.0))?;
        let state = lp_sparsemap_solve(&graph, &s, &config)?;
        converged += usize::from(state.converged);
        let u = &state.u;
        for i in 0..rows {
            let row: f64 = (0..cols).map(|j| u[i * cols + j]).sum();
            if variant == MatchingVariant::XorAtMostOne {
                worst_row_dev = worst_row_dev.max((row - 1.0).abs());
            } else {
                worst_excess = worst_excess.max(row - 1.0);
            }
        }
        for j in 0..cols {
            let col: f64 = (0..rows).map(|i| u[i * cols + j]).sum();
            worst_excess = worst_excess.max(col - 1.0);
        }
        if matches!(variant, MatchingVariant::Budget { .. }) {
            let total: f64 = u.iter().sum();
            worst_excess = worst_excess.max(total - budget as f64);
        }
    }
    let ok = worst_row_dev <= 1e-3 && worst_excess <= 1e-3;
    Ok((
        ok,
        format!(
            "200 instances, XOR row deviation {worst_row_dev:.2e}, cap excess {worst_excess:.2e}, {converged} converged"
        ),
    ))
}

/// Criterion 5: with a unique MAP and a score gap >= 0.1, low-temperature
/// inference lands within 1e-2 of the MAP vertex.
fn map_recovery() -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(105);
    let config = ConsensusConfig::inference();
    let mut accepted = 0usize;
    let mut attempts = 0usize;
    let mut worst: f64 = 0.0;
    while accepted < 200 && attempts < 4000 {
        attempts += 1;
        let kind_id = rng.random_range(0..5);
        let l = if kind_id == 3 { 2 } else { rng.random_range(2..=12) };
        let kind = random_kind(&mut rng, kind_id, l);
        let graph = single_factor_graph(kind, l)?;
        let s = uniform(&mut rng, l, -2.0, 2.0);
        // top-two feasible scores by enumeration
        let mut best: Option<(f64, Assignment)> = None;
        let mut second = f64::NEG_INFINITY;
        for mask in 0u64..(1 << l) {
            let bits: Vec<u8> = (0..l).map(|i| ((mask >> i) & 1) as u8).collect();
            let assignment = Assignment::new(bits);
            if let Some(score) = graph.score(&s, &assignment) {
                match &best {
                    Some((top, _)) if score <= *top => second = second.max(score),
                    _ => {
                        if let Some((top, _)) = &best {
                            second = second.max(*top);
                        }
                        best = Some((score, assignment));
                    }
                }
            }
        }
        let (top, map) = best.expect("feasible set is never empty");
        if top - second < 0.1 {
            continue;
        }
        let state = lp_sparsemap_solve(&graph, &Scores::new(s)?, &config)?;
        for (ui, bi) in state.u.iter().zip(&map.bits) {
            worst = worst.max((ui - *bi as f64).abs());
        }
        accepted += 1;
    }
    Ok((
        accepted == 200 && worst <= 1e-2,
        format!("{accepted}/200 gapped instances (of {attempts}), max deviation {worst:.2e}"),
    ))
}

/// Criterion 6: enumeration vs direct summation, plus feasible and
/// deterministic perturb-and-MAP samples.
fn sampling_correctness() -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(106);
    let mut worst: f64 = 0.0;

    // frozen hand instance: free bits scored [ln 2, 0] give weights
    // (1, 2, 1, 2)/6 in the fastest-first enumeration order
    let free = single_factor_graph(FactorKind::Budget { budget: 2 }, 2)?;
    let table = gibbs_enumerate(&free, &Scores::new(vec![2.0f64.ln(), 0.0])?)?;
    let hand = [1.0 / 6.0, 2.0 / 6.0, 1.0 / 6.0, 2.0 / 6.0];
    if table.assignments[1].bits != vec![1, 0] {
        return Ok((false, "enumeration order is not variable-0-fastest".into()));
    }
    for (p, h) in table.probabilities.iter().zip(hand) {
        worst = worst.max((p - h).abs());
    }

    for trial in 0..100 {
        let (graph, l) = match trial % 3 {
            0 => {
                let kind_id = rng.random_range(0..5);
                let l = if kind_id == 3 { 2 } else { rng.random_range(2..=10) };
                (single_factor_graph(random_kind(&mut rng, kind_id, l), l)?, l)
            }
            1 => (build_matching_graph(2, 3, MatchingVariant::XorAtMostOne)?, 6),
            _ => {
                let l = rng.random_range(4..=10);
                (build_highlight_graph(l, 40.0, 0.3)?, l)
            }
        };
        let s = Scores::new(uniform(&mut rng, l, -2.0, 2.0))?;
        let table = gibbs_enumerate(&graph, &s)?;
        // independent reference: direct summation in plain probability space
        let reference: Vec<f64> = {
            let raw: Vec<f64> = table
                .assignments
                .iter()
                .map(|a| graph.score(s.as_slice(), a).expect("enumerated as feasible"))
                .collect();
            let max = raw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let weights: Vec<f64> = raw.iter().map(|r| (r - max).exp()).collect();
            let total: f64 = weights.iter().sum();
            weights.into_iter().map(|w| w / total).collect()
        };
        for (p, q) in table.probabilities.iter().zip(&reference) {
            worst = worst.max((p - q).abs());
        }

        let seed = rng.random();
        let samples = perturb_and_map_sample(&graph, &s, seed, 20)?;
        let replay = perturb_and_map_sample(&graph, &s, seed, 20)?;
        if samples != replay {
            return Ok((false, format!("seed {seed} replay diverged")));
        }
        if samples
            .iter()
            .any(|a| graph.score(s.as_slice(), a).is_none())
        {
            return Ok((false, format!("seed {seed} produced an infeasible sample")));
        }
    }
    Ok((
        worst <= 1e-9,
        format!("100 graphs x 20 samples, max probability gap {worst:.2e}"),
    ))
}

/// Criterion 7: planted-rationale training reaches F1 >= 0.8 with a
/// decreasing loss curve, and faithful matching is exactly invariant to
/// tokens whose alignment row is zero.
fn rationalizer_end_to_end() -> Result<(bool, String)> {
    let epochs = 5;
    let per_seed_budget = 300.0;
    let mut f1s = Vec::new();
    let mut monotone = true;
    let mut within_budget = true;
    for seed in [11u64, 12, 13] {
        let started = Instant::now();
        let hyper = ToyHyper {
            seed,
            ..ToyHyper::default()
        };
        let model = synthetic::standard_model(hyper)?;
        let data = synthetic::highlight_examples(2000, 20, 20.0, seed.wrapping_mul(1000) + 7)?;
        let out = train_toy(&model, &data, epochs)?;
        monotone &= out
            .epoch_losses
            .windows(2)
            .all(|w| w[1] < w[0] + 1e-12);
        let config = ConsensusConfig::inference();
        let mut preds = Vec::with_capacity(data.len());
        let mut golds = Vec::with_capacity(data.len());
        for ex in &data {
            preds.push(extract_highlight(&out.model, &ex.tokens, &config)?.z);
            let PlantedRationale::Mask(mask) = &ex.planted_rationale else {
                unreachable!("highlight generator emits masks");
            };
            golds.push(mask.iter().map(|&b| b as f64).collect());
        }
        f1s.push(metrics::token_f1(&preds, &golds, 0.0)?.token_f1);
        within_budget &= started.elapsed().as_secs_f64() < per_seed_budget;
    }
    let mean_f1 = f1s.iter().sum::<f64>() / f1s.len() as f64;

    let mut rng = ChaCha8Rng::seed_from_u64(107);
    let mut invariant = 0usize;
    for _ in 0..100 {
        let hyper = ToyHyper {
            seed: rng.random(),
            ..ToyHyper::default()
        };
        let model = synthetic::standard_model(hyper)?;
        let premise: Vec<usize> = (0..4).map(|_| rng.random_range(0..synthetic::VOCAB_SIZE)).collect();
        let hypothesis: Vec<usize> =
            (0..5).map(|_| rng.random_range(0..synthetic::VOCAB_SIZE)).collect();
        let mut z = crate::graph::AlignmentMatrix::zeros(4, 5)?;
        for i in 0..4 {
            for j in 0..5 {
                z.set(i, j, rng.random_range(0.0..1.0));
            }
        }
        let row = rng.random_range(0..4);
        for j in 0..5 {
            z.set(row, j, 0.0);
        }
        let before = predict_matching(&model, &premise, &hypothesis, &z, true)?;
        let mut substituted = premise.clone();
        substituted[row] = (premise[row] + rng.random_range(1..synthetic::VOCAB_SIZE))
            % synthetic::VOCAB_SIZE;
        let after = predict_matching(&model, &substituted, &hypothesis, &z, true)?;
        invariant += usize::from(before == after);
    }

    let passed = mean_f1 >= 0.8 && monotone && within_budget && invariant == 100;
    Ok((
        passed,
        format!(
            "mean F1 {mean_f1:.3} over seeds (per-seed {f1s:.3?}), losses monotone: {monotone}, invariance {invariant}/100"
        ),
    ))
}

/// Criterion 8: the consensus entry point on single-factor graphs is the
/// direct solver, bit for bit, forward and backward.
fn reduction_identity() -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(108);
    for trial in 0..100 {
        let temperature = [1e-3, 0.1, 1.0][trial % 3];
        let (graph, l) = if trial % 4 == 0 {
            let l = rng.random_range(3..=10);
            (build_highlight_graph(l, 30.0, 0.2)?, l)
        } else {
            let kind_id = rng.random_range(0..5);
            let l = if kind_id == 3 { 2 } else { rng.random_range(2..=10) };
            (single_factor_graph(random_kind(&mut rng, kind_id, l), l)?, l)
        };
        let s = uniform(&mut rng, l, -2.0, 2.0);
        let config = ConsensusConfig {
            temperature,
            ..ConsensusConfig::inference()
        };
        let state = lp_sparsemap_solve(&graph, &Scores::new(s.clone())?, &config)?;
        let direct = sparsemap_solve(&graph.factors()[0], &s, temperature)?;
        if state.u != direct.z {
            return Ok((false, format!("forward mismatch on trial {trial}")));
        }
        let upstream = uniform(&mut rng, l, -1.0, 1.0);
        let through = lp_sparsemap_vjp(&state, &upstream)?;
        let straight = sparsemap_vjp(&direct, &upstream)?;
        if through.grad != straight.grad {
            return Ok((false, format!("backward mismatch on trial {trial}")));
        }
    }
    Ok((true, "100 graphs identical forward and backward".into()))
}
