//! A single budget factor relaxed at several temperatures: high temperature
//! spreads mass over a few structures, low temperature snaps to the MAP.

use rationex::graph::{Factor, FactorKind};
use rationex::solver::sparsemap_solve;

fn main() -> rationex::Result<()> {
    let s = [2.0, 1.9, 0.3, -0.5];
    let factor = Factor::new(FactorKind::Budget { budget: 2 }, (0..s.len()).collect());

    for temperature in [2.0, 0.5, 0.01] {
        let sol = sparsemap_solve(&factor, &s, temperature)?;
        println!("T = {temperature}");
        println!("  relaxed mask {:?}", rounded(&sol.z));
        println!("  support ({} structures):", sol.active_set.len());
        for (vertex, weight) in &sol.active_set {
            println!("    {:?} with weight {:.4}", vertex.to_f64(), weight);
        }
    }
    Ok(())
}

fn rounded(z: &[f64]) -> Vec<f64> {
    z.iter().map(|v| (v * 1e4).round() / 1e4).collect()
}
