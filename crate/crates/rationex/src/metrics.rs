//! Rationale quality metrics.
//!
//! Corpus scores are macro-averaged: each document gets its own precision,
//! recall, and F1 against the gold mask, and the corpus value is the plain
//! mean over documents.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Macro-averaged rationale agreement scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RationaleEval {
    pub token_f1: f64,
    pub precision: f64,
    pub recall: f64,
    /// Mean fraction of tokens per document carrying nonzero mass.
    pub avg_rationale_size: f64,
}

/// Compares predicted (relaxed or binary) masks against gold binary masks.
///
/// A predicted token counts as selected when its mass is strictly above
/// `threshold` (default 0: any nonzero mass selects). Per document,
/// `F1 = 2PR/(P+R)` with the zero conventions: an empty side makes its
/// ratio 0, `F1 = 0` when `P + R = 0`, and a document where both masks are
/// empty scores 1 across the board. `avg_rationale_size` counts strictly
/// nonzero predicted mass, independent of the threshold.
pub fn token_f1(preds: &[Vec<f64>], golds: &[Vec<f64>], threshold: f64) -> Result<RationaleEval> {
    if preds.is_empty() {
        return Err(Error::Empty("prediction list"));
    }
    if preds.len() != golds.len() {
        return Err(Error::Dimension {
            what: "gold mask list",
            expected: preds.len(),
            got: golds.len(),
        });
    }
    if !(threshold >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "threshold",
            reason: format!("must be a real >= 0, got {threshold}"),
        });
    }
    let mut f1_total = 0.0;
    let mut precision_total = 0.0;
    let mut recall_total = 0.0;
    let mut size_total = 0.0;
    for (doc, (pred, gold)) in preds.iter().zip(golds).enumerate() {
        if pred.len() != gold.len() {
            return Err(Error::Dimension {
                what: "gold mask",
                expected: pred.len(),
                got: gold.len(),
            });
        }
        if pred.is_empty() {
            return Err(Error::Empty("document mask"));
        }
        if pred.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("predicted mask"));
        }
        if gold.iter().any(|&g| g != 0.0 && g != 1.0) {
            return Err(Error::InvalidParameter {
                name: "gold",
                reason: format!("document {doc} has non-binary gold entries"),
            });
        }
        let mut tp = 0usize;
        let mut pred_count = 0usize;
        let mut gold_count = 0usize;
        for (&p, &g) in pred.iter().zip(gold) {
            let selected = p > threshold;
            pred_count += usize::from(selected);
            gold_count += usize::from(g == 1.0);
            tp += usize::from(selected && g == 1.0);
        }
        let (precision, recall, f1) = if pred_count == 0 && gold_count == 0 {
            (1.0, 1.0, 1.0)
        } else {
            let p = if pred_count > 0 {
                tp as f64 / pred_count as f64
            } else {
                0.0
            };
            let r = if gold_count > 0 {
                tp as f64 / gold_count as f64
            } else {
                0.0
            };
            let f1 = if p + r > 0.0 { 2.0 * p * r / (p + r) } else { 0.0 };
            (p, r, f1)
        };
        precision_total += precision;
        recall_total += recall;
        f1_total += f1;
        size_total += pred.iter().filter(|&&v| v != 0.0).count() as f64 / pred.len() as f64;
    }
    let n = preds.len() as f64;
    Ok(RationaleEval {
        token_f1: f1_total / n,
        precision: precision_total / n,
        recall: recall_total / n,
        avg_rationale_size: size_total / n,
    })
}

/// Mean over documents of the fraction of tokens with nonzero mass.
pub fn rationale_size(preds: &[Vec<f64>]) -> Result<f64> {
    if preds.is_empty() {
        return Err(Error::Empty("prediction list"));
    }
    let mut total = 0.0;
    for pred in preds {
        if pred.is_empty() {
            return Err(Error::Empty("document mask"));
        }
        total += pred.iter().filter(|&&v| v != 0.0).count() as f64 / pred.len() as f64;
    }
    Ok(total / preds.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_overlap_scores_half() {
        let eval = token_f1(&[vec![1.0, 1.0, 0.0, 0.0]], &[vec![1.0, 0.0, 1.0, 0.0]], 0.0).unwrap();
        assert_eq!(eval.precision, 0.5);
        assert_eq!(eval.recall, 0.5);
        assert_eq!(eval.token_f1, 0.5);
        assert_eq!(eval.avg_rationale_size, 0.5);
    }

    #[test]
    fn perfect_match_scores_one() {
        let gold = vec![vec![1.0, 0.0, 1.0], vec![0.0, 1.0, 0.0]];
        let eval = token_f1(&gold, &gold, 0.0).unwrap();
        assert_eq!(eval.token_f1, 1.0);
        assert_eq!(eval.precision, 1.0);
        assert_eq!(eval.recall, 1.0);
    }

    #[test]
    fn empty_prediction_against_nonempty_gold_scores_zero() {
        let eval = token_f1(&[vec![0.0, 0.0, 0.0]], &[vec![1.0, 0.0, 1.0]], 0.0).unwrap();
        assert_eq!(eval.token_f1, 0.0);
        assert_eq!(eval.precision, 0.0);
        assert_eq!(eval.recall, 0.0);
    }

    #[test]
    fn corpus_scores_are_macro_averaged() {
        // doc 1 perfect, doc 2 disjoint: mean F1 = 0.5 regardless of lengths
        let preds = vec![vec![1.0, 1.0], vec![1.0, 0.0, 0.0, 0.0]];
        let golds = vec![vec![1.0, 1.0], vec![0.0, 1.0, 1.0, 1.0]];
        let eval = token_f1(&preds, &golds, 0.0).unwrap();
        assert_eq!(eval.token_f1, 0.5);
    }

    #[test]
    fn threshold_separates_relaxed_mass_from_selection() {
        // 0.4 is nonzero (counts toward size) but below the 0.5 threshold
        let eval = token_f1(&[vec![0.4, 0.9]], &[vec![0.0, 1.0]], 0.5).unwrap();
        assert_eq!(eval.token_f1, 1.0);
        assert_eq!(eval.avg_rationale_size, 1.0);
        let strict = token_f1(&[vec![0.4, 0.9]], &[vec![0.0, 1.0]], 0.0).unwrap();
        assert!((strict.token_f1 - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn both_empty_document_counts_as_perfect() {
        let eval = token_f1(&[vec![0.0, 0.0]], &[vec![0.0, 0.0]], 0.0).unwrap();
        assert_eq!(eval.token_f1, 1.0);
    }

    #[test]
    fn rationale_size_examples() {
        assert_eq!(rationale_size(&[vec![1.0, 0.0, 1.0, 0.0]]).unwrap(), 0.5);
        assert_eq!(rationale_size(&[vec![0.0, 0.0, 0.0]]).unwrap(), 0.0);
        let mixed = rationale_size(&[vec![1.0, 1.0], vec![0.0, 0.0, 0.0, 0.0]]).unwrap();
        assert_eq!(mixed, 0.5);
        // relaxed mass counts once nonzero, regardless of magnitude
        assert_eq!(rationale_size(&[vec![0.1, 0.0]]).unwrap(), 0.5);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(token_f1(&[], &[], 0.0).is_err());
        assert!(token_f1(&[vec![1.0]], &[vec![1.0, 0.0]], 0.0).is_err());
        assert!(token_f1(&[vec![1.0]], &[vec![0.5]], 0.0).is_err());
        assert!(token_f1(&[vec![1.0]], &[vec![1.0]], -1.0).is_err());
        assert!(token_f1(&[vec![f64::NAN]], &[vec![1.0]], 0.0).is_err());
        assert!(rationale_size(&[]).is_err());
        assert!(rationale_size(&[vec![]]).is_err());
    }
}
