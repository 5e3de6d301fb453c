//! Budgeted contiguous highlights: the same token scores relaxed under
//! tighter and looser budgets, with a contiguity bonus gluing neighbors.

use rationex::graph::{build_highlight_graph, Scores};
use rationex::solver::{lp_sparsemap_solve, ConsensusConfig};

fn main() -> rationex::Result<()> {
    // two positive regions; the budget decides whether both fit
    let s = Scores::new(vec![1.5, 1.4, -0.2, -1.0, 1.2, 1.1, -0.8, -0.9])?;

    for budget_pct in [25.0, 50.0, 100.0] {
        let graph = build_highlight_graph(s.len(), budget_pct, 0.1)?;
        let state = lp_sparsemap_solve(&graph, &s, &ConsensusConfig::inference())?;
        let mask: Vec<f64> = state.u.iter().map(|v| (v * 100.0).round() / 100.0).collect();
        let picked: Vec<usize> = mask
            .iter()
            .enumerate()
            .filter(|(_, v)| **v > 0.5)
            .map(|(i, _)| i)
            .collect();
        println!("budget {budget_pct:>5.1}%  mask {mask:?}  tokens {picked:?}");
    }
    Ok(())
}
