//! Relaxed alignment inference on one score matrix under all three matching
//! variants. Row constraints, column caps, and the budget change which cells
//! survive.

use rationex::graph::{build_matching_graph, AlignmentMatrix, MatchingVariant, Scores};
use rationex::solver::{lp_sparsemap_solve, ConsensusConfig};

fn main() -> rationex::Result<()> {
    // premise token 2 is attracted to both hypothesis tokens 0 and 2
    let scores = AlignmentMatrix::new(
        3,
        3,
        vec![2.0, -1.0, 0.1, -0.5, 1.5, -0.2, 1.2, 0.3, 1.1],
    )?;
    let variants = [
        MatchingVariant::XorAtMostOne,
        MatchingVariant::AtMostOne2,
        MatchingVariant::Budget { budget: 2 },
    ];

    for variant in variants {
        let graph = build_matching_graph(scores.rows(), scores.cols(), variant)?;
        let state = lp_sparsemap_solve(
            &graph,
            &Scores::new(scores.as_flat().to_vec())?,
            &ConsensusConfig::inference(),
        )?;
        println!(
            "{variant:?}  converged {} in {} iterations",
            state.converged, state.iterations
        );
        for i in 0..scores.rows() {
            let row: Vec<f64> = (0..scores.cols())
                .map(|j| (state.u[i * scores.cols() + j] * 100.0).round() / 100.0)
                .collect();
            println!("  row {i}: {row:?}");
        }
    }
    Ok(())
}
