//! Exact MAP on each factor kind, cross-checked against brute force.

use rationex::graph::{Factor, FactorGraph, FactorKind, Scores};
use rationex::oracles::{factor_map, map_global_brute_force};

fn main() -> rationex::Result<()> {
    let s = [1.2, -0.3, 0.8, -1.5, 0.4];
    let kinds = [
        FactorKind::Xor,
        FactorKind::AtMostOne,
        FactorKind::Budget { budget: 2 },
        FactorKind::SeqBudget {
            edge_scores: vec![0.5; 4],
            budget: 2,
        },
    ];

    for kind in kinds {
        let direct = factor_map(&kind, &s)?;
        let graph = FactorGraph::new(s.len(), vec![Factor::new(kind.clone(), (0..s.len()).collect())])?;
        let brute = map_global_brute_force(&graph, &Scores::new(s.to_vec())?)?;
        assert!((direct.score - brute.score).abs() <= 1e-12);
        println!(
            "{:<10} argmax {:?}  score {:+.3}",
            kind.name(),
            direct.assignment.to_f64(),
            direct.score
        );
    }

    // the pairwise bonus flips the argmax once it outweighs a negative score
    for edge in [0.0, 2.0] {
        let pair = factor_map(&FactorKind::Pair { edge_score: edge }, &[1.0, -0.8])?;
        println!(
            "Pair(r={edge:+.1})  argmax {:?}  score {:+.3}",
            pair.assignment.to_f64(),
            pair.score
        );
    }
    Ok(())
}
