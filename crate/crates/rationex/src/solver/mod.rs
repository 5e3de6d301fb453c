//! Regularized structured inference: SparseMAP on one factor and its
//! consensus extension over factor graphs, both with vector-Jacobian
//! products for end-to-end training.
//!
//! The single-factor problem is
//!
//! ```text
//! max_{z in conv(Z_f)}  (s/T) . z + h(z)/T - 1/2 ||z||^2
//! ```
//!
//! solved by an active-set method driven by the factor's exact MAP oracle
//! ([`sparsemap_solve`]). Low temperatures `T` anneal the solution toward the
//! MAP vertex; moderate temperatures yield sparse convex combinations of a
//! few structures. The multi-factor relaxation over the unit box is solved by
//! consensus splitting ([`lp_sparsemap_solve`]). Backward passes
//! differentiate the converged active set exactly ([`sparsemap_vjp`]) or
//! unroll the last consensus iterations ([`lp_sparsemap_vjp`]).

mod active_set;
mod consensus;
mod kkt;

pub use consensus::{lp_sparsemap_solve, lp_sparsemap_vjp, ConsensusConfig, ConsensusState};

use crate::error::{Error, Result};
use crate::graph::{Assignment, Factor};
use active_set::solve_active_set;
use nalgebra::DMatrix;

/// Vertex-generation cap for the active-set method.
pub const MAX_ACTIVE_SET_ITERS: usize = 100;

/// The active-set method stops once no MAP call can improve its objective by
/// more than this.
pub const ACTIVE_SET_GAP_TOL: f64 = 1e-9;

/// Weights below this are dropped from the certified active set.
const SUPPORT_EPS: f64 = 1e-12;

/// A solution of the temperature-scaled, l2-regularized problem on one
/// factor's vertex hull.
#[derive(Debug, Clone)]
pub struct SparseSolution {
    /// Marginal vector, a convex combination of feasible vertices.
    pub z: Vec<f64>,
    /// The certifying support: feasible assignments and simplex weights.
    pub active_set: Vec<(Assignment, f64)>,
    /// Objective value in canonical units (scores divided by temperature).
    pub objective: f64,
    /// Objective after each vertex generation; non-decreasing.
    pub objective_history: Vec<f64>,
    /// Number of MAP oracle rounds performed.
    pub iterations: usize,
    /// False when the gap tolerance was not certified within the cap.
    pub converged: bool,
    temperature: f64,
    /// Weights came from a rank-deficient (pseudo-inverse) restricted solve.
    degenerate: bool,
}

impl SparseSolution {
    /// Temperature the solution was computed at.
    pub fn temperature(&self) -> f64 {
        self.temperature
    }
}

/// A vector-Jacobian product plus a trust flag.
#[derive(Debug, Clone)]
pub struct VjpResult {
    pub grad: Vec<f64>,
    /// True when the product involved a rank-deficient (pseudo-inverse)
    /// solve or an unconverged forward state.
    pub approximate: bool,
}

/// Solves the regularized problem on `factor`'s vertex hull at temperature
/// `temperature` for local scores `s`.
///
/// Scores and structured parameters are divided by the temperature before
/// solving; the returned objective is in those canonical units.
pub fn sparsemap_solve(factor: &Factor, s: &[f64], temperature: f64) -> Result<SparseSolution> {
    if s.len() != factor.arity() {
        return Err(Error::Dimension {
            what: "factor scores",
            expected: factor.arity(),
            got: s.len(),
        });
    }
    if s.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("scores"));
    }
    if !temperature.is_finite() || temperature <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "temperature",
            reason: format!("must be positive, got {temperature}"),
        });
    }
    let q: Vec<f64> = s.iter().map(|&v| v / temperature).collect();
    let kind = factor.kind.with_edge_scale(1.0 / temperature);
    let out = solve_active_set(&kind, &q, MAX_ACTIVE_SET_ITERS, ACTIVE_SET_GAP_TOL)?;
    let active_set = out
        .vertices
        .into_iter()
        .zip(out.weights)
        .filter(|&(_, w)| w > SUPPORT_EPS)
        .collect();
    Ok(SparseSolution {
        z: out.z,
        active_set,
        objective: out.objective,
        objective_history: out.objective_history,
        iterations: out.iterations,
        converged: out.converged,
        temperature,
        degenerate: out.pseudo_inverse,
    })
}

/// Returns `(dz/ds)^T . upstream` at a solved instance.
///
/// Differentiates the stationarity conditions of the restricted problem on
/// the certified support: with `A` the matrix of active vertices, the product
/// is `A x / T` where `x` solves the bordered system with right-hand side
/// `A^T upstream`. A support of size one or zero has a locally constant
/// solution, so the product is zero.
pub fn sparsemap_vjp(solution: &SparseSolution, upstream: &[f64]) -> Result<VjpResult> {
    if upstream.len() != solution.z.len() {
        return Err(Error::Dimension {
            what: "upstream",
            expected: solution.z.len(),
            got: upstream.len(),
        });
    }
    let k = solution.active_set.len();
    if k <= 1 {
        return Ok(VjpResult {
            grad: vec![0.0; solution.z.len()],
            approximate: solution.degenerate || !solution.converged,
        });
    }
    let vertices: Vec<&Assignment> = solution.active_set.iter().map(|(a, _)| a).collect();
    let gram = DMatrix::from_fn(k, k, |i, j| {
        vertices[i]
            .bits
            .iter()
            .zip(&vertices[j].bits)
            .filter(|&(&a, &b)| a == 1 && b == 1)
            .count() as f64
    });
    let rhs: Vec<f64> = vertices.iter().map(|a| a.dot(upstream)).collect();
    let solve = kkt::solve_bordered(&gram, &rhs, 0.0);
    let mut grad = vec![0.0; solution.z.len()];
    for (a, &x) in vertices.iter().zip(&solve.x) {
        for (i, &b) in a.bits.iter().enumerate() {
            if b == 1 {
                grad[i] += x;
            }
        }
    }
    for g in &mut grad {
        *g /= solution.temperature;
    }
    Ok(VjpResult {
        grad,
        approximate: solve.pseudo_inverse || solution.degenerate || !solution.converged,
    })
}
