//! Dense symmetric KKT solves shared by the forward and backward passes.
//!
//! Systems have the bordered form
//!
//! ```text
//! [ M   1 ] [ x      ]   [ rhs_top    ]
//! [ 1^T 0 ] [ mult   ] = [ rhs_bottom ]
//! ```
//!
//! with `M` the Gram matrix of active vertices. `M` is PSD but can be rank
//! deficient (affinely dependent vertices), so an LU solve is verified by its
//! residual and falls back to a smallest-norm least-squares solution via SVD.

use nalgebra::{DMatrix, DVector};

pub(crate) struct KktSolve {
    pub x: Vec<f64>,
    /// Equality-constraint dual; part of the solve's contract and asserted
    /// in tests, untouched by production callers.
    #[allow(dead_code)]
    pub multiplier: f64,
    /// True when the system was rank deficient and the smallest-norm
    /// least-squares solution was used.
    pub pseudo_inverse: bool,
}

pub(crate) fn solve_bordered(gram: &DMatrix<f64>, rhs_top: &[f64], rhs_bottom: f64) -> KktSolve {
    let k = rhs_top.len();
    debug_assert_eq!(gram.nrows(), k);
    let mut kkt = DMatrix::<f64>::zeros(k + 1, k + 1);
    kkt.view_mut((0, 0), (k, k)).copy_from(gram);
    for i in 0..k {
        kkt[(i, k)] = 1.0;
        kkt[(k, i)] = 1.0;
    }
    let mut rhs = DVector::<f64>::zeros(k + 1);
    for (i, &v) in rhs_top.iter().enumerate() {
        rhs[i] = v;
    }
    rhs[k] = rhs_bottom;

    let scale = 1.0 + rhs.amax();
    if let Some(sol) = kkt.clone().lu().solve(&rhs) {
        let residual = (&kkt * &sol - &rhs).amax();
        if residual <= 1e-8 * scale {
            return KktSolve {
                x: sol.as_slice()[..k].to_vec(),
                multiplier: sol[k],
                pseudo_inverse: false,
            };
        }
    }
    let svd = kkt.svd(true, true);
    let smax = svd.singular_values.amax();
    let eps = if smax > 0.0 { smax * 1e-12 } else { f64::MIN_POSITIVE };
    let sol = svd
        .solve(&rhs, eps)
        .expect("SVD solve with computed U and V cannot fail");
    KktSolve {
        x: sol.as_slice()[..k].to_vec(),
        multiplier: sol[k],
        pseudo_inverse: true,
    }
}
