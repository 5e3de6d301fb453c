//! Active-set solver for the canonical vertex-hull QP.
//!
//! Solves
//!
//! ```text
//! max_{w in simplex}  F(w) = sum_a w_a (a . q + eta(a)) - 1/2 ||A w||^2
//! ```
//!
//! where the columns of `A` are feasible vertices of one factor and `eta` is
//! the factor's structured score (already scaled into canonical units by the
//! caller). Vertices are generated lazily by the factor's MAP oracle on
//! residual scores `q - z`; the restricted problem over the current vertices
//! is solved through the bordered KKT system, with Wolfe-style line-search
//! and drop steps keeping the weights feasible. The objective never
//! decreases: any candidate step that fails to improve F (possible only in
//! rank-deficient corner cases) is rejected and the method stops at the
//! current certified iterate.

use crate::error::Result;
use crate::graph::{Assignment, FactorKind};
use crate::oracles::factor_map;
use crate::solver::kkt::solve_bordered;
use nalgebra::DMatrix;

pub(crate) struct ActiveSetOutcome {
    pub z: Vec<f64>,
    pub vertices: Vec<Assignment>,
    pub weights: Vec<f64>,
    pub objective: f64,
    pub objective_history: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub pseudo_inverse: bool,
}

struct Restricted {
    vertices: Vec<Assignment>,
    etas: Vec<f64>,
    weights: Vec<f64>,
}

impl Restricted {
    fn combine(&self, n: usize) -> Vec<f64> {
        let mut z = vec![0.0; n];
        for (a, &w) in self.vertices.iter().zip(&self.weights) {
            for (i, &b) in a.bits.iter().enumerate() {
                if b == 1 {
                    z[i] += w;
                }
            }
        }
        z
    }

    fn objective(&self, q: &[f64]) -> f64 {
        let z = self.combine(q.len());
        let linear: f64 = self
            .vertices
            .iter()
            .zip(&self.etas)
            .zip(&self.weights)
            .map(|((a, &eta), &w)| w * (a.dot(q) + eta))
            .sum();
        linear - 0.5 * z.iter().map(|v| v * v).sum::<f64>()
    }

    fn gram(&self) -> DMatrix<f64> {
        let k = self.vertices.len();
        DMatrix::from_fn(k, k, |i, j| {
            self.vertices[i]
                .bits
                .iter()
                .zip(&self.vertices[j].bits)
                .filter(|&(&a, &b)| a == 1 && b == 1)
                .count() as f64
        })
    }

    fn linear_coeffs(&self, q: &[f64]) -> Vec<f64> {
        self.vertices
            .iter()
            .zip(&self.etas)
            .map(|(a, &eta)| a.dot(q) + eta)
            .collect()
    }

    fn drop_negligible(&mut self) {
        let keep: Vec<bool> = self.weights.iter().map(|&w| w > 1e-12).collect();
        if keep.iter().all(|&k| k) {
            return;
        }
        let mut idx = 0;
        self.vertices.retain(|_| {
            let k = keep[idx];
            idx += 1;
            k
        });
        idx = 0;
        self.etas.retain(|_| {
            let k = keep[idx];
            idx += 1;
            k
        });
        idx = 0;
        self.weights.retain(|_| {
            let k = keep[idx];
            idx += 1;
            k
        });
    }

    /// Solves the restricted QP over the current vertices, keeping weights on
    /// the simplex. Returns whether any KKT solve was rank deficient.
    fn optimize(&mut self, q: &[f64]) -> bool {
        let mut pseudo_inverse = false;
        let mut current = self.objective(q);
        // each pass either finishes or drops a vertex, so 2k + 4 is generous
        for _ in 0..(2 * self.vertices.len() + 4) {
            if self.vertices.len() == 1 {
                self.weights = vec![1.0];
                return pseudo_inverse;
            }
            let solve = solve_bordered(&self.gram(), &self.linear_coeffs(q), 1.0);
            pseudo_inverse |= solve.pseudo_inverse;
            let affine = solve.x;
            if affine.iter().all(|&w| w >= -1e-11) {
                let mut cleaned: Vec<f64> = affine.iter().map(|&w| w.max(0.0)).collect();
                let total: f64 = cleaned.iter().sum();
                for w in &mut cleaned {
                    *w /= total;
                }
                let trial = Restricted {
                    vertices: self.vertices.clone(),
                    etas: self.etas.clone(),
                    weights: cleaned.clone(),
                };
                if trial.objective(q) >= current - 1e-12 {
                    self.weights = cleaned;
                }
                self.drop_negligible();
                return pseudo_inverse;
            }
            // move toward the affine optimum until the first weight hits zero
            let mut step = 1.0f64;
            for (&w, &wa) in self.weights.iter().zip(&affine) {
                if wa < 0.0 && w - wa > 0.0 {
                    step = step.min(w / (w - wa));
                }
            }
            let moved: Vec<f64> = self
                .weights
                .iter()
                .zip(&affine)
                .map(|(&w, &wa)| (w + step * (wa - w)).max(0.0))
                .collect();
            let trial = Restricted {
                vertices: self.vertices.clone(),
                etas: self.etas.clone(),
                weights: moved.clone(),
            };
            let trial_obj = trial.objective(q);
            if trial_obj < current - 1e-12 {
                // degenerate affine solve failed to improve; keep the iterate
                return pseudo_inverse;
            }
            current = trial_obj;
            self.weights = moved;
            self.drop_negligible();
        }
        pseudo_inverse
    }
}

/// Runs the active-set method for the factor kind `kind` (edge parameters
/// already in canonical units) on canonical scores `q`.
///
/// Stops when no MAP call can improve the objective by more than `gap_tol`
/// or after `max_iters` vertex generations; the latter is reported through
/// `converged = false` with the best iterate so far.
pub(crate) fn solve_active_set(
    kind: &FactorKind,
    q: &[f64],
    max_iters: usize,
    gap_tol: f64,
) -> Result<ActiveSetOutcome> {
    let n = q.len();
    let init = factor_map(kind, q)?;
    let init_eta = kind.extra_score(&init.assignment.bits);
    let mut set = Restricted {
        vertices: vec![init.assignment],
        etas: vec![init_eta],
        weights: vec![1.0],
    };
    let mut pseudo_inverse = false;
    let mut objective = set.objective(q);
    let mut history = vec![objective];
    let mut converged = false;
    let mut iterations = 0;

    for iter in 1..=max_iters {
        iterations = iter;
        let z = set.combine(n);
        let residual: Vec<f64> = q.iter().zip(&z).map(|(&qi, &zi)| qi - zi).collect();
        let candidate = factor_map(kind, &residual)?;
        // value of the current iterate under the linearized objective:
        // sum_a w_a (a.(q - z) + eta_a) = b.w - ||z||^2
        let b_dot_w: f64 = set
            .linear_coeffs(q)
            .iter()
            .zip(&set.weights)
            .map(|(&b, &w)| b * w)
            .sum();
        let z_sq: f64 = z.iter().map(|v| v * v).sum();
        let gap = candidate.score - (b_dot_w - z_sq);
        if gap <= gap_tol {
            converged = true;
            break;
        }
        if set.vertices.contains(&candidate.assignment) {
            // the oracle cannot produce a new vertex; the restricted solve is
            // already optimal over everything reachable
            break;
        }
        let eta = kind.extra_score(&candidate.assignment.bits);
        set.vertices.push(candidate.assignment);
        set.etas.push(eta);
        set.weights.push(0.0);
        pseudo_inverse |= set.optimize(q);
        objective = set.objective(q);
        history.push(objective);
    }

    let z = set.combine(n);
    Ok(ActiveSetOutcome {
        z,
        vertices: set.vertices,
        weights: set.weights,
        objective,
        objective_history: history,
        iterations,
        converged,
        pseudo_inverse,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn xor_fractional_solution() {
        // canonical scores chosen so two vertices share the optimum support
        let out = solve_active_set(&FactorKind::Xor, &[1.1, 0.9, -2.0], 100, 1e-9).unwrap();
        assert!(out.converged);
        assert!((out.z[0] - 0.6).abs() < 1e-9);
        assert!((out.z[1] - 0.4).abs() < 1e-9);
        assert!(out.z[2].abs() < 1e-12);
        assert_eq!(out.vertices.len(), 2);
    }

    #[test]
    fn dominant_vertex_converges_immediately() {
        let out = solve_active_set(&FactorKind::Xor, &[50.0, 0.0, 0.0], 100, 1e-9).unwrap();
        assert!(out.converged);
        assert_eq!(out.iterations, 1);
        assert_eq!(out.vertices.len(), 1);
        assert_eq!(out.z, vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn objective_history_is_monotone() {
        let kind = FactorKind::SeqBudget {
            edge_scores: vec![5.0; 7],
            budget: 4,
        };
        let q = [3.0, -1.0, 2.0, 0.5, 0.4, -0.2, 1.5, 1.0];
        let out = solve_active_set(&kind, &q, 100, 1e-9).unwrap();
        assert!(out.converged);
        for pair in out.objective_history.windows(2) {
            assert!(pair[1] >= pair[0] - 1e-12);
        }
    }
}
