//! Exact MAP oracles, one per factor kind, plus a global brute force.
//!
//! Each oracle maximizes `s . z + extra_score(z)` over the factor's feasible
//! bit patterns and documents its deterministic tie-breaking rule. The
//! brute force enumerates full joint assignments and is the reference the
//! specialized oracles are tested against.

use crate::error::{Error, Result};
use crate::graph::{Assignment, FactorGraph, FactorKind, Scores};

/// An exact maximizer and its total (unary + structured) score.
#[derive(Debug, Clone, PartialEq)]
pub struct MapResult {
    pub assignment: Assignment,
    pub score: f64,
}

fn check_scores(s: &[f64]) -> Result<()> {
    if s.is_empty() {
        return Err(Error::Empty("scores"));
    }
    if s.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("scores"));
    }
    Ok(())
}

/// Index of the maximal score, lowest index on ties.
fn argmax(s: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in s.iter().enumerate().skip(1) {
        if v > s[best] {
            best = i;
        }
    }
    best
}

/// MAP under "exactly one on": the argmax variable, lowest index on ties.
pub fn map_xor(s: &[f64]) -> Result<MapResult> {
    check_scores(s)?;
    let best = argmax(s);
    let mut bits = vec![0u8; s.len()];
    bits[best] = 1;
    Ok(MapResult {
        assignment: Assignment::new(bits),
        score: s[best],
    })
}

/// MAP under "at most one on": the argmax variable if its score is strictly
/// positive (lowest index on ties), otherwise the empty assignment.
pub fn map_at_most_one(s: &[f64]) -> Result<MapResult> {
    check_scores(s)?;
    let best = argmax(s);
    let mut bits = vec![0u8; s.len()];
    if s[best] > 0.0 {
        bits[best] = 1;
    }
    Ok(MapResult {
        score: s[best].max(0.0),
        assignment: Assignment::new(bits),
    })
}

/// MAP under "at most `budget` on": all strictly positive scores when they
/// fit the budget, otherwise the `budget` largest positive ones. Ties are
/// resolved toward lower indices.
pub fn map_budget(s: &[f64], budget: usize) -> Result<MapResult> {
    check_scores(s)?;
    if budget > s.len() {
        return Err(Error::InvalidParameter {
            name: "budget",
            reason: format!("exceeds {} variables", s.len()),
        });
    }
    let mut order: Vec<usize> = (0..s.len()).collect();
    // stable sort on descending score keeps lower indices first among ties
    order.sort_by(|&a, &b| s[b].partial_cmp(&s[a]).unwrap());
    let mut bits = vec![0u8; s.len()];
    let mut score = 0.0;
    for &i in order.iter().take(budget) {
        if s[i] > 0.0 {
            bits[i] = 1;
            score += s[i];
        } else {
            break;
        }
    }
    Ok(MapResult {
        assignment: Assignment::new(bits),
        score,
    })
}

/// MAP of a two-variable factor with an agreement bonus `edge_score` added
/// when both are on. Enumerates the four configurations; ties prefer fewer
/// selected variables, then lexicographically smaller bit patterns.
pub fn map_pair(s: &[f64], edge_score: f64) -> Result<MapResult> {
    check_scores(s)?;
    if s.len() != 2 {
        return Err(Error::Dimension {
            what: "pair scores",
            expected: 2,
            got: s.len(),
        });
    }
    if !edge_score.is_finite() {
        return Err(Error::NonFinite("edge score"));
    }
    let configs: [[u8; 2]; 4] = [[0, 0], [0, 1], [1, 0], [1, 1]];
    let mut best = MapResult {
        assignment: Assignment::new(vec![0, 0]),
        score: 0.0,
    };
    for bits in configs {
        let mut v = 0.0;
        if bits[0] == 1 {
            v += s[0];
        }
        if bits[1] == 1 {
            v += s[1];
        }
        if bits == [1, 1] {
            v += edge_score;
        }
        if v > best.score {
            best = MapResult {
                assignment: Assignment::new(bits.to_vec()),
                score: v,
            };
        }
    }
    Ok(best)
}

/// MAP of a budgeted token chain: at most `budget` variables on, each
/// adjacent on-on pair `(i, i + 1)` adding `edge_scores[i]`.
///
/// Dynamic program over (position, budget spent, current bit) in O(L * B)
/// states; backtrace ties prefer the previous bit off, and the final state
/// scan prefers the last bit off, then fewer selections.
pub fn map_seq_budget(s: &[f64], edge_scores: &[f64], budget: usize) -> Result<MapResult> {
    check_scores(s)?;
    let l = s.len();
    if edge_scores.len() + 1 != l {
        return Err(Error::Dimension {
            what: "edge scores",
            expected: l - 1,
            got: edge_scores.len(),
        });
    }
    if edge_scores.iter().any(|r| !r.is_finite()) {
        return Err(Error::NonFinite("edge scores"));
    }
    if budget > l {
        return Err(Error::InvalidParameter {
            name: "budget",
            reason: format!("exceeds {l} variables"),
        });
    }
    const NEG: f64 = f64::NEG_INFINITY;
    let width = budget + 1;
    // dp[b * 2 + c]: best score of a prefix ending at the current position
    // with b variables on so far and current bit c.
    let mut dp = vec![NEG; width * 2];
    dp[0] = 0.0;
    if budget >= 1 {
        dp[3] = s[0]; // b = 1, c = 1
    }
    // prev_bit[(i * width + b) * 2 + c]: backtrace pointer into position i - 1
    let mut prev_bit = vec![0u8; l * width * 2];
    for i in 1..l {
        let mut next = vec![NEG; width * 2];
        for b in 0..width {
            let off0 = dp[b * 2];
            let off1 = dp[b * 2 + 1];
            let (val, prev) = if off0 >= off1 { (off0, 0) } else { (off1, 1) };
            next[b * 2] = val;
            prev_bit[(i * width + b) * 2] = prev;
            if b >= 1 {
                let on0 = dp[(b - 1) * 2];
                let on1 = dp[(b - 1) * 2 + 1] + edge_scores[i - 1];
                let (val, prev) = if on0 >= on1 { (on0, 0) } else { (on1, 1) };
                next[b * 2 + 1] = val + s[i];
                prev_bit[(i * width + b) * 2 + 1] = prev;
            }
        }
        dp = next;
    }
    let mut best = NEG;
    let (mut cur_b, mut cur_c) = (0usize, 0u8);
    for c in 0..2u8 {
        for b in 0..width {
            let v = dp[b * 2 + c as usize];
            if v > best {
                best = v;
                cur_b = b;
                cur_c = c;
            }
        }
    }
    let mut bits = vec![0u8; l];
    bits[l - 1] = cur_c;
    for i in (1..l).rev() {
        let prev = prev_bit[(i * width + cur_b) * 2 + cur_c as usize];
        if cur_c == 1 {
            cur_b -= 1;
        }
        cur_c = prev;
        bits[i - 1] = prev;
    }
    Ok(MapResult {
        assignment: Assignment::new(bits),
        score: best,
    })
}

/// Dispatches to the specialized oracle for `kind` on local scores `s`.
pub fn factor_map(kind: &FactorKind, s: &[f64]) -> Result<MapResult> {
    match kind {
        FactorKind::Xor => map_xor(s),
        FactorKind::AtMostOne => map_at_most_one(s),
        FactorKind::Budget { budget } => map_budget(s, *budget),
        FactorKind::Pair { edge_score } => map_pair(s, *edge_score),
        FactorKind::SeqBudget {
            edge_scores,
            budget,
        } => map_seq_budget(s, edge_scores, *budget),
    }
}

/// Hard cap for exhaustive joint enumeration.
pub const BRUTE_FORCE_MAX_VARIABLES: usize = 22;

/// Global MAP by enumerating all 2^L joint assignments (L <= 22).
///
/// Infeasible assignments (any violated hard factor) are skipped; ties are
/// broken toward the lexicographically smallest bit vector, `bits[0]` most
/// significant.
pub fn map_global_brute_force(graph: &FactorGraph, s: &Scores) -> Result<MapResult> {
    graph.check_scores(s)?;
    let l = graph.num_variables();
    if l > BRUTE_FORCE_MAX_VARIABLES {
        return Err(Error::TooLarge {
            what: "brute-force MAP",
            limit: BRUTE_FORCE_MAX_VARIABLES,
            got: l,
        });
    }
    let mut best: Option<MapResult> = None;
    let mut bits = vec![0u8; l];
    for mask in 0u64..(1u64 << l) {
        for (i, b) in bits.iter_mut().enumerate() {
            *b = ((mask >> (l - 1 - i)) & 1) as u8;
        }
        let assignment = Assignment::new(bits.clone());
        if let Some(score) = graph.score(s.as_slice(), &assignment) {
            let better = match &best {
                None => true,
                Some(cur) => score > cur.score,
            };
            if better {
                best = Some(MapResult { assignment, score });
            }
        }
    }
    best.ok_or_else(|| {
        Error::InvalidGraph("no feasible assignment under the hard constraints".into())
    })
}
