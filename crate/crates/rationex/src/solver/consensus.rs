//! Consensus solver for the multi-factor relaxation over the unit box.
//!
//! The problem
//!
//! ```text
//! max_{u in [0,1]^L}  s . u + sum_f h_f(u_f) - (T/2) ||u||^2
//! ```
//!
//! (each factor's local copy constrained to its vertex hull) is split by
//! giving factor `f` the degree-normalized share `s_i / deg(i)` of every
//! member's score and a local variable `z_f` tied to the global `u` by a
//! scaled dual `v_f`. One iteration performs
//!
//! ```text
//! z_f  <-  active-set solve with scores (theta_f / rho + u_f - v_f)
//!          and edge parameters divided by rho
//! u_i  <-  clip_[0,1]( rho * sum_{f : i in f} (z_{f,i} + v_{f,i})
//!                      / (T + rho * deg(i)) )
//! v_f  <-  v_f + z_f - u_f
//! ```
//!
//! which is the standard two-block alternating scheme with penalty `rho` on
//! the objective multiplied through by `T` (the multiplication keeps score
//! magnitudes bounded as `T -> 0`; the maximizer is unchanged). The residual
//! tracked per iteration is the largest of the primal disagreements (local vs
//! global, both coordinate-wise and in per-factor sums) and the dual movement
//! `rho * |u - u_prev|`; primal agreement alone can hold transiently right
//! after an averaging step, so both halves gate convergence. The returned
//! state is the best iterate seen, so its reported residual never increases
//! across the window it was selected from.
//!
//! With one factor the consensus problem IS the single-factor problem, so the
//! solver short-circuits to [`sparsemap_solve`] and the backward pass to
//! [`sparsemap_vjp`], making the reduction exact to the last bit.
//!
//! The backward pass unrolls the recorded final iterations (a bounded-memory
//! window, `unroll_window`) and backpropagates through each step: through the
//! dual and averaging updates by linearity, through the clip by zeroing
//! saturated coordinates, and through each factor subproblem by the same
//! bordered-system Jacobian as [`sparsemap_vjp`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Assignment, FactorGraph, Scores};
use crate::solver::active_set::solve_active_set;
use crate::solver::kkt::solve_bordered;
use crate::solver::{
    sparsemap_solve, sparsemap_vjp, SparseSolution, VjpResult, ACTIVE_SET_GAP_TOL,
    MAX_ACTIVE_SET_ITERS,
};
use nalgebra::DMatrix;

/// Consensus solver parameters; the whole block round-trips through JSON.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConsensusConfig {
    /// Annealing temperature `T`.
    #[serde(alias = "T", default = "defaults::temperature")]
    pub temperature: f64,
    /// Penalty weight coupling locals to the global vector.
    #[serde(default = "defaults::rho")]
    pub rho: f64,
    /// Iteration cap.
    #[serde(default = "defaults::max_iters")]
    pub max_iters: usize,
    /// Residual tolerance declaring convergence.
    #[serde(default = "defaults::tol")]
    pub tol: f64,
    /// How many final iterations the backward pass records and unrolls.
    #[serde(alias = "K", default = "defaults::unroll_window")]
    pub unroll_window: usize,
}

mod defaults {
    pub fn temperature() -> f64 {
        1e-3
    }
    pub fn rho() -> f64 {
        1.0
    }
    pub fn max_iters() -> usize {
        1000
    }
    pub fn tol() -> f64 {
        1e-3
    }
    pub fn unroll_window() -> usize {
        10
    }
}

impl Default for ConsensusConfig {
    fn default() -> Self {
        Self::inference()
    }
}

impl ConsensusConfig {
    /// Test-time configuration: near-zero temperature, full iteration budget.
    pub fn inference() -> Self {
        ConsensusConfig {
            temperature: defaults::temperature(),
            rho: defaults::rho(),
            max_iters: defaults::max_iters(),
            tol: defaults::tol(),
            unroll_window: defaults::unroll_window(),
        }
    }

    /// Train-time configuration: moderate temperature, 10 iterations.
    pub fn train(temperature: f64) -> Self {
        ConsensusConfig {
            temperature,
            max_iters: 10,
            ..Self::inference()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.temperature.is_finite() || self.temperature <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "temperature",
                reason: format!("must be positive, got {}", self.temperature),
            });
        }
        if !self.rho.is_finite() || self.rho <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "rho",
                reason: format!("must be positive, got {}", self.rho),
            });
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidParameter {
                name: "max_iters",
                reason: "must be at least 1".into(),
            });
        }
        if !self.tol.is_finite() || self.tol <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "tol",
                reason: format!("must be positive, got {}", self.tol),
            });
        }
        Ok(())
    }
}

/// Per-iteration tape entry: each factor's certified support plus the clip
/// pattern of the averaging step.
#[derive(Debug, Clone)]
struct IterRecord {
    supports: Vec<Vec<Assignment>>,
    clip_mask: Vec<bool>,
}

#[derive(Debug, Clone)]
enum Backward {
    SingleFactor {
        solution: SparseSolution,
        members: Vec<usize>,
    },
    Unrolled {
        members: Vec<Vec<usize>>,
        degrees: Vec<usize>,
        rho: f64,
        temperature: f64,
        records: Vec<IterRecord>,
    },
}

impl ConsensusState {
    /// Certifying per-factor supports of the returned iterate: for each
    /// factor, the feasible assignments carrying nonzero weight, in factor
    /// order. Useful for inspecting which structures the relaxation mixes
    /// and for detecting support changes between nearby problems.
    pub fn active_supports(&self) -> Vec<Vec<Assignment>> {
        match &self.backward {
            Backward::SingleFactor { solution, .. } => {
                vec![solution.active_set.iter().map(|(a, _)| a.clone()).collect()]
            }
            Backward::Unrolled { records, .. } => records
                .last()
                .map(|record| record.supports.clone())
                .unwrap_or_default(),
        }
    }
}

/// Converged (or best-effort) consensus iterate plus diagnostics and the
/// recorded tape for the backward pass.
#[derive(Debug, Clone)]
pub struct ConsensusState {
    /// Global relaxed solution in `[0,1]^L`.
    pub u: Vec<f64>,
    /// Per-factor local solutions, indexed like the graph's factors.
    pub locals: Vec<Vec<f64>>,
    /// Per-factor scaled dual vectors.
    pub duals: Vec<Vec<f64>>,
    /// Iterations run (the returned iterate is the best-residual one).
    pub iterations: usize,
    /// Largest local/global disagreement of the returned iterate.
    pub max_residual: f64,
    /// Raw residual after each iteration.
    pub residual_history: Vec<f64>,
    /// Whether `max_residual <= tol`.
    pub converged: bool,
    backward: Backward,
}

struct BestIterate {
    u: Vec<f64>,
    locals: Vec<Vec<f64>>,
    duals: Vec<Vec<f64>>,
    residual: f64,
    records: Vec<IterRecord>,
}

/// Runs consensus optimization of the relaxed problem on `graph`.
///
/// Scores are split across covering factors by degree; each iteration solves
/// one active-set subproblem per factor, averages shared variables into `u`
/// (clipped to the unit box), and updates the duals. Stops when the residual
/// reaches `config.tol` or after `config.max_iters` iterations; the returned
/// state is the best-residual iterate and reports convergence through
/// [`ConsensusState::converged`] rather than an error.
pub fn lp_sparsemap_solve(
    graph: &FactorGraph,
    s: &Scores,
    config: &ConsensusConfig,
) -> Result<ConsensusState> {
    graph.check_scores(s)?;
    config.validate()?;
    let scores = s.as_slice();

    if graph.factors().len() == 1 {
        let factor = &graph.factors()[0];
        let local_scores: Vec<f64> = factor.members.iter().map(|&m| scores[m]).collect();
        let solution = sparsemap_solve(factor, &local_scores, config.temperature)?;
        let mut u = vec![0.0; graph.num_variables()];
        for (j, &m) in factor.members.iter().enumerate() {
            u[m] = solution.z[j];
        }
        return Ok(ConsensusState {
            locals: vec![solution.z.clone()],
            duals: vec![vec![0.0; factor.arity()]],
            iterations: solution.iterations,
            max_residual: 0.0,
            residual_history: vec![0.0],
            converged: solution.converged,
            backward: Backward::SingleFactor {
                members: factor.members.clone(),
                solution,
            },
            u,
        });
    }

    let l = graph.num_variables();
    let factors = graph.factors();
    let degrees = graph.degrees();
    let rho = config.rho;
    let t = config.temperature;

    // degree-normalized score shares, in canonical subproblem units
    let theta: Vec<Vec<f64>> = factors
        .iter()
        .map(|f| {
            f.members
                .iter()
                .map(|&m| scores[m] / degrees[m] as f64)
                .collect()
        })
        .collect();
    let scaled_kinds: Vec<_> = factors
        .iter()
        .map(|f| f.kind.with_edge_scale(1.0 / rho))
        .collect();

    let mut u = vec![0.5; l];
    let mut u_prev = u.clone();
    let mut locals: Vec<Vec<f64>> = factors.iter().map(|f| vec![0.0; f.arity()]).collect();
    let mut duals = locals.clone();
    let mut records: Vec<IterRecord> = Vec::new();
    let mut residual_history = Vec::new();
    let mut best: Option<BestIterate> = None;
    let mut iterations = 0;

    for _ in 1..=config.max_iters {
        iterations += 1;
        let mut supports = Vec::with_capacity(factors.len());
        for (fi, f) in factors.iter().enumerate() {
            let q: Vec<f64> = f
                .members
                .iter()
                .enumerate()
                .map(|(j, &m)| theta[fi][j] / rho + u[m] - duals[fi][j])
                .collect();
            let out = solve_active_set(&scaled_kinds[fi], &q, MAX_ACTIVE_SET_ITERS, ACTIVE_SET_GAP_TOL)?;
            locals[fi] = out.z;
            supports.push(out.vertices);
        }

        let mut accum = vec![0.0; l];
        for (fi, f) in factors.iter().enumerate() {
            for (j, &m) in f.members.iter().enumerate() {
                accum[m] += locals[fi][j] + duals[fi][j];
            }
        }
        let mut clip_mask = vec![false; l];
        for i in 0..l {
            let raw = rho * accum[i] / (t + rho * degrees[i] as f64);
            clip_mask[i] = !(0.0..=1.0).contains(&raw);
            u[i] = raw.clamp(0.0, 1.0);
        }

        let mut residual = 0.0f64;
        for i in 0..l {
            residual = residual.max(rho * (u[i] - u_prev[i]).abs());
        }
        u_prev.copy_from_slice(&u);
        for (fi, f) in factors.iter().enumerate() {
            let mut local_sum = 0.0;
            let mut global_sum = 0.0;
            for (j, &m) in f.members.iter().enumerate() {
                let diff = locals[fi][j] - u[m];
                duals[fi][j] += diff;
                residual = residual.max(diff.abs());
                local_sum += locals[fi][j];
                global_sum += u[m];
            }
            residual = residual.max((local_sum - global_sum).abs());
        }
        residual_history.push(residual);

        records.push(IterRecord { supports, clip_mask });
        if records.len() > config.unroll_window.max(1) {
            records.remove(0);
        }

        let improved = best.as_ref().map_or(true, |b| residual < b.residual);
        if improved {
            best = Some(BestIterate {
                u: u.clone(),
                locals: locals.clone(),
                duals: duals.clone(),
                residual,
                records: records.clone(),
            });
        }
        if residual <= config.tol {
            break;
        }
    }

    let best = best.expect("at least one iteration ran");
    let converged = best.residual <= config.tol;
    Ok(ConsensusState {
        u: best.u,
        locals: best.locals,
        duals: best.duals,
        iterations,
        max_residual: best.residual,
        residual_history,
        converged,
        backward: Backward::Unrolled {
            members: factors.iter().map(|f| f.members.clone()).collect(),
            degrees: degrees.to_vec(),
            rho,
            temperature: t,
            records: best.records,
        },
    })
}

/// Applies the subproblem Jacobian `A S A^T` for one recorded support, where
/// `S` is the top-left block of the inverse bordered system. Supports of size
/// one are locally constant.
fn apply_support_jacobian(support: &[Assignment], g: &[f64], approximate: &mut bool) -> Vec<f64> {
    let k = support.len();
    let n = g.len();
    if k <= 1 {
        return vec![0.0; n];
    }
    let gram = DMatrix::from_fn(k, k, |i, j| {
        support[i]
            .bits
            .iter()
            .zip(&support[j].bits)
            .filter(|&(&a, &b)| a == 1 && b == 1)
            .count() as f64
    });
    let rhs: Vec<f64> = support.iter().map(|a| a.dot(g)).collect();
    let solve = solve_bordered(&gram, &rhs, 0.0);
    *approximate |= solve.pseudo_inverse;
    let mut out = vec![0.0; n];
    for (a, &x) in support.iter().zip(&solve.x) {
        for (i, &b) in a.bits.iter().enumerate() {
            if b == 1 {
                out[i] += x;
            }
        }
    }
    out
}

/// Returns `(du/ds)^T . upstream` by unrolling the recorded iterations.
///
/// Truncation to the recorded window bounds memory and matches the
/// train-time iteration budget; at a tight fixed point the truncated product
/// converges to the implicit derivative as the window grows. The result is
/// flagged approximate when the forward state had not converged or a
/// rank-deficient subproblem system was met.
pub fn lp_sparsemap_vjp(state: &ConsensusState, upstream: &[f64]) -> Result<VjpResult> {
    if upstream.len() != state.u.len() {
        return Err(Error::Dimension {
            what: "upstream",
            expected: state.u.len(),
            got: upstream.len(),
        });
    }
    match &state.backward {
        Backward::SingleFactor { solution, members } => {
            let local_upstream: Vec<f64> = members.iter().map(|&m| upstream[m]).collect();
            let local = sparsemap_vjp(solution, &local_upstream)?;
            let mut grad = vec![0.0; upstream.len()];
            for (j, &m) in members.iter().enumerate() {
                grad[m] = local.grad[j];
            }
            Ok(VjpResult {
                grad,
                approximate: local.approximate || !state.converged,
            })
        }
        Backward::Unrolled {
            members,
            degrees,
            rho,
            temperature,
            records,
        } => {
            let l = upstream.len();
            let mut approximate = !state.converged;
            let mut ubar = upstream.to_vec();
            let mut vbar: Vec<Vec<f64>> = members.iter().map(|m| vec![0.0; m.len()]).collect();
            let mut sbar = vec![0.0; l];
            for record in records.iter().rev() {
                // dual update v^t = v^{t-1} + z^t - u^t|_f : pass vbar through
                // to z and subtract from u; vbar keeps accumulating for t-1
                let mut zbar: Vec<Vec<f64>> = vbar.clone();
                for (fi, mem) in members.iter().enumerate() {
                    for (j, &m) in mem.iter().enumerate() {
                        ubar[m] -= vbar[fi][j];
                    }
                }
                // averaging step with clip: saturated coordinates are flat
                let mut gain = vec![0.0; l];
                for i in 0..l {
                    if !record.clip_mask[i] {
                        gain[i] = ubar[i] * rho / (temperature + rho * degrees[i] as f64);
                    }
                }
                for (fi, mem) in members.iter().enumerate() {
                    for (j, &m) in mem.iter().enumerate() {
                        zbar[fi][j] += gain[m];
                        vbar[fi][j] += gain[m];
                    }
                }
                // subproblem solves and their score inputs
                let mut ubar_prev = vec![0.0; l];
                for (fi, mem) in members.iter().enumerate() {
                    let qbar =
                        apply_support_jacobian(&record.supports[fi], &zbar[fi], &mut approximate);
                    for (j, &m) in mem.iter().enumerate() {
                        sbar[m] += qbar[j] / (rho * degrees[m] as f64);
                        ubar_prev[m] += qbar[j];
                        vbar[fi][j] -= qbar[j];
                    }
                }
                ubar = ubar_prev;
            }
            Ok(VjpResult {
                grad: sbar,
                approximate,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_highlight_graph, build_matching_graph, MatchingVariant};
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_scores(rng: &mut ChaCha8Rng, l: usize) -> Scores {
        Scores::new((0..l).map(|_| rng.random_range(-2.0..2.0)).collect()).unwrap()
    }

    #[test]
    fn dominant_diagonal_recovers_identity_alignment() {
        let g = build_matching_graph(2, 2, MatchingVariant::XorAtMostOne).unwrap();
        let s = Scores::new(vec![5.0, 0.0, 0.0, 5.0]).unwrap();
        let state = lp_sparsemap_solve(&g, &s, &ConsensusConfig::inference()).unwrap();
        assert!(state.converged);
        let expected = [1.0, 0.0, 0.0, 1.0];
        for (a, b) in state.u.iter().zip(expected) {
            assert!((a - b).abs() <= 1e-2, "{:?}", state.u);
        }
    }

    #[test]
    fn single_factor_graph_reduces_to_sparsemap_bit_for_bit() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let l = rng.random_range(2..=12);
            let g = build_highlight_graph(l, 35.0, 0.1).unwrap();
            let s = random_scores(&mut rng, l);
            let config = ConsensusConfig {
                temperature: 0.1,
                ..ConsensusConfig::inference()
            };
            let state = lp_sparsemap_solve(&g, &s, &config).unwrap();
            let direct = sparsemap_solve(&g.factors()[0], s.as_slice(), 0.1).unwrap();
            assert_eq!(state.u, direct.z);
            assert_eq!(state.max_residual, 0.0);
            // backward reduces identically
            let upstream: Vec<f64> = (0..l).map(|_| rng.random_range(-1.0..1.0)).collect();
            let via_state = lp_sparsemap_vjp(&state, &upstream).unwrap();
            let via_direct = sparsemap_vjp(&direct, &upstream).unwrap();
            for (a, b) in via_state.grad.iter().zip(&via_direct.grad) {
                assert!((a - b).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn matching_feasibility_at_low_temperature() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let g = build_matching_graph(6, 8, MatchingVariant::XorAtMostOne).unwrap();
        for trial in 0..5 {
            let s = random_scores(&mut rng, 48);
            let state = lp_sparsemap_solve(&g, &s, &ConsensusConfig::inference()).unwrap();
            assert!(
                state.converged,
                "trial {trial}: residual {} after {} iterations",
                state.max_residual, state.iterations
            );
            for i in 0..6 {
                let row: f64 = (0..8).map(|j| state.u[i * 8 + j]).sum();
                assert!((row - 1.0).abs() <= 1e-3, "row {i} sums to {row}");
            }
            for j in 0..8 {
                let col: f64 = (0..6).map(|i| state.u[i * 8 + j]).sum();
                assert!(col <= 1.0 + 1e-3, "column {j} sums to {col}");
            }
            assert!(state.u.iter().all(|&v| (0.0..=1.0).contains(&v)));
        }
    }

    #[test]
    fn reported_residual_is_best_of_history() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let g = build_matching_graph(4, 5, MatchingVariant::AtMostOne2).unwrap();
        let s = random_scores(&mut rng, 20);
        let state = lp_sparsemap_solve(&g, &s, &ConsensusConfig::inference()).unwrap();
        let best = state
            .residual_history
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        assert_eq!(state.max_residual, best);
    }

    #[test]
    fn budget_variant_respects_global_budget() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let g = build_matching_graph(4, 4, MatchingVariant::Budget { budget: 2 }).unwrap();
        // positive scores make the budget bind
        let s = Scores::new((0..16).map(|_| rng.random_range(0.5..2.0)).collect()).unwrap();
        let state = lp_sparsemap_solve(&g, &s, &ConsensusConfig::inference()).unwrap();
        assert!(state.converged);
        let total: f64 = state.u.iter().sum();
        assert!(total <= 2.0 + 1e-3, "total mass {total}");
    }

    #[test]
    fn zero_upstream_gives_zero_gradient() {
        let g = build_matching_graph(3, 3, MatchingVariant::AtMostOne2).unwrap();
        let s = Scores::new((0..9).map(|i| (i as f64) * 0.1 - 0.4).collect()).unwrap();
        let config = ConsensusConfig {
            temperature: 0.1,
            ..ConsensusConfig::inference()
        };
        let state = lp_sparsemap_solve(&g, &s, &config).unwrap();
        let vjp = lp_sparsemap_vjp(&state, &vec![0.0; 9]).unwrap();
        assert!(vjp.grad.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn unconverged_state_is_flagged() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let g = build_matching_graph(5, 6, MatchingVariant::XorAtMostOne).unwrap();
        let s = random_scores(&mut rng, 30);
        let config = ConsensusConfig {
            max_iters: 2,
            temperature: 0.1,
            ..ConsensusConfig::inference()
        };
        let state = lp_sparsemap_solve(&g, &s, &config).unwrap();
        assert!(!state.converged);
        let vjp = lp_sparsemap_vjp(&state, &vec![1.0; 30]).unwrap();
        assert!(vjp.approximate);
    }

    #[test]
    fn config_json_round_trip() {
        let text = r#"{"T": 0.1, "rho": 2.0, "max_iters": 50, "tol": 1e-4, "K": 7}"#;
        let config: ConsensusConfig = serde_json::from_str(text).unwrap();
        assert_eq!(config.temperature, 0.1);
        assert_eq!(config.rho, 2.0);
        assert_eq!(config.max_iters, 50);
        assert_eq!(config.unroll_window, 7);
        let defaulted: ConsensusConfig = serde_json::from_str("{}").unwrap();
        assert_eq!(defaulted.temperature, 1e-3);
        assert_eq!(defaulted.max_iters, 1000);
        let back = serde_json::to_string(&config).unwrap();
        let again: ConsensusConfig = serde_json::from_str(&back).unwrap();
        assert_eq!(again.tol, 1e-4);
    }

    #[test]
    fn rejects_invalid_config_and_scores() {
        let g = build_matching_graph(2, 2, MatchingVariant::AtMostOne2).unwrap();
        let s = Scores::new(vec![0.0; 4]).unwrap();
        let bad_t = ConsensusConfig {
            temperature: 0.0,
            ..ConsensusConfig::inference()
        };
        assert!(lp_sparsemap_solve(&g, &s, &bad_t).is_err());
        let bad_len = Scores::new(vec![0.0; 3]).unwrap();
        assert!(lp_sparsemap_solve(&g, &bad_len, &ConsensusConfig::inference()).is_err());
    }
}
