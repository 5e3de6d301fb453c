//! Backward-pass check: the solver's vector-Jacobian product against central
//! finite differences of the forward solve.

use rationex::graph::{Factor, FactorKind};
use rationex::solver::{sparsemap_solve, sparsemap_vjp};

fn main() -> rationex::Result<()> {
    let factor = Factor::new(FactorKind::Budget { budget: 2 }, (0..4).collect());
    let mut s = vec![1.0, 0.6, 0.2, -0.4];
    let temperature = 0.7;
    let upstream = [0.3, -1.0, 0.5, 0.8];

    let base = sparsemap_solve(&factor, &s, temperature)?;
    let vjp = sparsemap_vjp(&base, &upstream)?;

    let step = 1e-6;
    let mut worst = 0.0f64;
    println!("coord    vjp          finite diff");
    for k in 0..s.len() {
        let mut sides = [0.0; 2];
        for (slot, delta) in [(0usize, step), (1, -step)] {
            s[k] += delta;
            let moved = sparsemap_solve(&factor, &s, temperature)?;
            s[k] -= delta;
            sides[slot] = moved.z.iter().zip(&upstream).map(|(z, u)| z * u).sum();
        }
        let fd = (sides[0] - sides[1]) / (2.0 * step);
        worst = worst.max((vjp.grad[k] - fd).abs());
        println!("{k}     {:+.8}  {:+.8}", vjp.grad[k], fd);
    }
    println!("max abs gap {worst:.2e}");
    assert!(worst <= 1e-6);
    Ok(())
}
