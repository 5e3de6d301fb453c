//! Factor graphs over binary variables.
//!
//! A [`FactorGraph`] couples `L` binary variables through hard constraint
//! factors (exactly-one, at-most-one, budget) and structured factors that add
//! score terms of their own (pairwise agreement, budgeted sequences). Graphs
//! are plain data: inference lives in [`crate::oracles`] and [`crate::solver`].
//!
//! Two builders cover the tasks this crate ships end to end:
//! [`build_highlight_graph`] (one budgeted-sequence factor over a token range)
//! and [`build_matching_graph`] (row/column constraints over a flattened
//! alignment matrix).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-variable scores `s` for a graph with `L` variables.
///
/// Wraps the raw vector so constructors can reject non-finite entries once,
/// letting inference code assume clean input.
#[derive(Debug, Clone, PartialEq)]
pub struct Scores(Vec<f64>);

impl Scores {
    /// Validates that every score is finite.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("scores"));
        }
        Ok(Scores(values))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

impl AsRef<[f64]> for Scores {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// One joint binary configuration, `bits[i]` in {0, 1}.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Assignment {
    pub bits: Vec<u8>,
}

impl Assignment {
    pub fn new(bits: Vec<u8>) -> Self {
        debug_assert!(bits.iter().all(|&b| b <= 1));
        Assignment { bits }
    }

    pub fn zeros(len: usize) -> Self {
        Assignment { bits: vec![0; len] }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// Number of selected variables.
    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b == 1).count()
    }

    /// The assignment as 0.0/1.0 coordinates of the corresponding vertex.
    pub fn to_f64(&self) -> Vec<f64> {
        self.bits.iter().map(|&b| b as f64).collect()
    }

    /// Unary part of the score: `sum_i s[i] * bits[i]`.
    pub fn dot(&self, s: &[f64]) -> f64 {
        debug_assert_eq!(s.len(), self.bits.len());
        self.bits
            .iter()
            .zip(s)
            .map(|(&b, &si)| if b == 1 { si } else { 0.0 })
            .sum()
    }
}

/// Constraint or structured-score semantics of a factor.
///
/// Hard factors (`Xor`, `AtMostOne`, `Budget`) restrict which local
/// configurations are feasible and add no score. Structured factors (`Pair`,
/// `SeqBudget`) carry extra score parameters evaluated on the local bits.
#[derive(Debug, Clone, PartialEq)]
pub enum FactorKind {
    /// Exactly one member is on.
    Xor,
    /// At most one member is on.
    AtMostOne,
    /// At most `budget` members are on; `budget >= 1`.
    Budget { budget: usize },
    /// Two members with an agreement bonus `edge_score * z1 * z2`.
    Pair { edge_score: f64 },
    /// A token chain: at most `budget` on, plus `edge_scores[i]` whenever
    /// members `i` and `i + 1` are both on. `edge_scores.len() == arity - 1`.
    SeqBudget { edge_scores: Vec<f64>, budget: usize },
}

impl FactorKind {
    pub fn name(&self) -> &'static str {
        match self {
            FactorKind::Xor => "XOR",
            FactorKind::AtMostOne => "AtMostOne",
            FactorKind::Budget { .. } => "Budget",
            FactorKind::Pair { .. } => "Pair",
            FactorKind::SeqBudget { .. } => "SeqBudget",
        }
    }

    /// Whether the local bit pattern satisfies the factor's hard constraint.
    pub fn is_feasible(&self, bits: &[u8]) -> bool {
        let ones = bits.iter().filter(|&&b| b == 1).count();
        match self {
            FactorKind::Xor => ones == 1,
            FactorKind::AtMostOne => ones <= 1,
            FactorKind::Budget { budget } => ones <= *budget,
            FactorKind::Pair { .. } => true,
            FactorKind::SeqBudget { budget, .. } => ones <= *budget,
        }
    }

    /// Structured score added on top of the unary scores (0 for hard factors).
    pub fn extra_score(&self, bits: &[u8]) -> f64 {
        match self {
            FactorKind::Xor | FactorKind::AtMostOne | FactorKind::Budget { .. } => 0.0,
            FactorKind::Pair { edge_score } => {
                if bits[0] == 1 && bits[1] == 1 {
                    *edge_score
                } else {
                    0.0
                }
            }
            FactorKind::SeqBudget { edge_scores, .. } => edge_scores
                .iter()
                .enumerate()
                .filter(|&(i, _)| bits[i] == 1 && bits[i + 1] == 1)
                .map(|(_, &r)| r)
                .sum(),
        }
    }

    /// Copy with every edge-score parameter multiplied by `scale`.
    ///
    /// Solvers use this to move a factor into the canonical temperature- or
    /// penalty-scaled subproblem; hard constraints are unaffected.
    pub fn with_edge_scale(&self, scale: f64) -> FactorKind {
        match self {
            FactorKind::Pair { edge_score } => FactorKind::Pair {
                edge_score: edge_score * scale,
            },
            FactorKind::SeqBudget {
                edge_scores,
                budget,
            } => FactorKind::SeqBudget {
                edge_scores: edge_scores.iter().map(|r| r * scale).collect(),
                budget: *budget,
            },
            other => other.clone(),
        }
    }
}

/// A factor: a kind applied to an ordered list of member variables.
#[derive(Debug, Clone, PartialEq)]
pub struct Factor {
    pub kind: FactorKind,
    pub members: Vec<usize>,
}

impl Factor {
    pub fn new(kind: FactorKind, members: Vec<usize>) -> Self {
        Factor { kind, members }
    }

    pub fn arity(&self) -> usize {
        self.members.len()
    }

    /// Structural checks against a graph with `num_variables` variables.
    ///
    /// Members must be distinct and in range. `Pair` has arity 2. `Budget`
    /// needs `1 <= budget <= arity`. `SeqBudget` must span the full variable
    /// range in order (it models one token chain) with `edge_scores` matching
    /// the number of adjacent pairs and `budget <= arity`.
    pub fn validate(&self, num_variables: usize) -> Result<()> {
        if self.members.is_empty() {
            return Err(Error::InvalidFactor(format!(
                "{} factor has no members",
                self.kind.name()
            )));
        }
        let mut seen = vec![false; num_variables];
        for &m in &self.members {
            if m >= num_variables {
                return Err(Error::InvalidFactor(format!(
                    "member {m} out of range for {num_variables} variables"
                )));
            }
            if seen[m] {
                return Err(Error::InvalidFactor(format!("duplicate member {m}")));
            }
            seen[m] = true;
        }
        match &self.kind {
            FactorKind::Xor | FactorKind::AtMostOne => {}
            FactorKind::Budget { budget } => {
                if *budget == 0 || *budget > self.arity() {
                    return Err(Error::InvalidFactor(format!(
                        "Budget factor needs 1 <= budget <= {}, got {budget}",
                        self.arity()
                    )));
                }
            }
            FactorKind::Pair { edge_score } => {
                if self.arity() != 2 {
                    return Err(Error::InvalidFactor(format!(
                        "Pair factor needs exactly 2 members, got {}",
                        self.arity()
                    )));
                }
                if !edge_score.is_finite() {
                    return Err(Error::NonFinite("Pair edge score"));
                }
            }
            FactorKind::SeqBudget {
                edge_scores,
                budget,
            } => {
                if self.members.len() != num_variables
                    || self.members.iter().enumerate().any(|(i, &m)| m != i)
                {
                    return Err(Error::InvalidFactor(
                        "SeqBudget members must be the full token range in order".into(),
                    ));
                }
                if edge_scores.len() + 1 != self.arity() {
                    return Err(Error::Dimension {
                        what: "SeqBudget edge scores",
                        expected: self.arity() - 1,
                        got: edge_scores.len(),
                    });
                }
                if edge_scores.iter().any(|r| !r.is_finite()) {
                    return Err(Error::NonFinite("SeqBudget edge scores"));
                }
                if *budget > self.arity() {
                    return Err(Error::InvalidFactor(format!(
                        "SeqBudget budget {budget} exceeds length {}",
                        self.arity()
                    )));
                }
            }
        }
        Ok(())
    }

    /// Extracts the local bit pattern of a global assignment.
    pub fn project(&self, assignment: &Assignment) -> Vec<u8> {
        self.members.iter().map(|&m| assignment.bits[m]).collect()
    }
}

/// A validated factor graph over `num_variables` binary variables.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorGraph {
    num_variables: usize,
    factors: Vec<Factor>,
    degree: Vec<usize>,
}

impl FactorGraph {
    /// Builds and validates a graph. Every variable must belong to at least
    /// one factor, so a feasible global configuration always exists for the
    /// constraint semantics above (all-zeros is feasible for everything but
    /// `Xor`, which always admits a single-one configuration).
    pub fn new(num_variables: usize, factors: Vec<Factor>) -> Result<Self> {
        if num_variables == 0 {
            return Err(Error::InvalidGraph("graph has no variables".into()));
        }
        if factors.is_empty() {
            return Err(Error::InvalidGraph("graph has no factors".into()));
        }
        let mut degree = vec![0usize; num_variables];
        for f in &factors {
            f.validate(num_variables)?;
            for &m in &f.members {
                degree[m] += 1;
            }
        }
        if let Some(orphan) = degree.iter().position(|&d| d == 0) {
            return Err(Error::InvalidGraph(format!(
                "variable {orphan} belongs to no factor"
            )));
        }
        Ok(FactorGraph {
            num_variables,
            factors,
            degree,
        })
    }

    pub fn num_variables(&self) -> usize {
        self.num_variables
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    /// Number of factors variable `i` belongs to.
    pub fn degree(&self, i: usize) -> usize {
        self.degree[i]
    }

    pub fn degrees(&self) -> &[usize] {
        &self.degree
    }

    /// Checks scores against the graph dimension.
    pub fn check_scores(&self, s: &Scores) -> Result<()> {
        if s.len() != self.num_variables {
            return Err(Error::Dimension {
                what: "scores",
                expected: self.num_variables,
                got: s.len(),
            });
        }
        Ok(())
    }

    /// Total score of a full assignment, or `None` if any factor is violated.
    pub fn score(&self, s: &[f64], assignment: &Assignment) -> Option<f64> {
        debug_assert_eq!(assignment.len(), self.num_variables);
        let mut total = assignment.dot(s);
        for f in &self.factors {
            let local = f.project(assignment);
            if !f.kind.is_feasible(&local) {
                return None;
            }
            total += f.kind.extra_score(&local);
        }
        Some(total)
    }
}

/// Budget implied by a percentage: `ceil(budget_pct / 100 * len)`.
///
/// The small slack keeps exact percentages (e.g. 10% of 20) from tipping over
/// to the next integer through floating-point noise.
pub fn budget_from_pct(budget_pct: f64, len: usize) -> usize {
    ((budget_pct / 100.0) * len as f64 - 1e-9).ceil() as usize
}

/// Builds the highlight-extraction graph: one [`FactorKind::SeqBudget`] factor
/// over all `num_tokens` variables, with every adjacent pair sharing the same
/// transition bonus `edge_score` and a budget of `ceil(budget_pct% of length)`.
///
/// `budget_pct` must lie in (0, 100]; `edge_score` must be non-negative
/// (a negative transition bonus would reward scattering, which this graph is
/// designed to penalize).
pub fn build_highlight_graph(
    num_tokens: usize,
    budget_pct: f64,
    edge_score: f64,
) -> Result<FactorGraph> {
    if num_tokens == 0 {
        return Err(Error::Empty("token range"));
    }
    if !budget_pct.is_finite() || budget_pct <= 0.0 || budget_pct > 100.0 {
        return Err(Error::InvalidParameter {
            name: "budget_pct",
            reason: format!("must be in (0, 100], got {budget_pct}"),
        });
    }
    if !edge_score.is_finite() || edge_score < 0.0 {
        return Err(Error::InvalidParameter {
            name: "edge_score",
            reason: format!("must be a finite non-negative number, got {edge_score}"),
        });
    }
    let budget = budget_from_pct(budget_pct, num_tokens);
    let factor = Factor::new(
        FactorKind::SeqBudget {
            edge_scores: vec![edge_score; num_tokens - 1],
            budget,
        },
        (0..num_tokens).collect(),
    );
    FactorGraph::new(num_tokens, vec![factor])
}

/// A dense `rows x cols` score or alignment matrix, stored row-major so that
/// entry `(i, j)` corresponds to graph variable `i * cols + j` of
/// [`build_matching_graph`]. Serializes as an array of row arrays.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignmentMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl AlignmentMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Empty("alignment matrix"));
        }
        if data.len() != rows * cols {
            return Err(Error::Dimension {
                what: "matrix data",
                expected: rows * cols,
                got: data.len(),
            });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("matrix entries"));
        }
        Ok(AlignmentMatrix { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        Self::new(rows, cols, vec![0.0; rows * cols])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.cols + j] = value;
    }

    /// Row-major flattening, matching the matching-graph variable order.
    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// Sum of row `i`.
    pub fn row_sum(&self, i: usize) -> f64 {
        self.row(i).iter().sum()
    }

    /// Sum of column `j`.
    pub fn col_sum(&self, j: usize) -> f64 {
        (0..self.rows).map(|i| self.get(i, j)).sum()
    }
}

impl Serialize for AlignmentMatrix {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<&[f64]> = (0..self.rows).map(|i| self.row(i)).collect();
        rows.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for AlignmentMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as DeError;
        let rows = Vec::<Vec<f64>>::deserialize(deserializer)?;
        if rows.is_empty() {
            return Err(D::Error::custom("matrix has no rows"));
        }
        let cols = rows[0].len();
        if rows.iter().any(|r| r.len() != cols) {
            return Err(D::Error::custom("matrix rows have unequal lengths"));
        }
        let data: Vec<f64> = rows.into_iter().flatten().collect();
        AlignmentMatrix::new(data.len() / cols.max(1), cols, data).map_err(D::Error::custom)
    }
}

/// Constraint pattern for alignment matrices in [`build_matching_graph`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatchingVariant {
    /// Every row selects exactly one column; every column at most one row.
    XorAtMostOne,
    /// Rows and columns each select at most one.
    AtMostOne2,
    /// `AtMostOne2` plus a global budget on the number of aligned pairs.
    Budget { budget: usize },
}

/// Builds a matching graph over an `num_rows x num_cols` alignment matrix.
///
/// Variable `i * num_cols + j` is the indicator for aligning row `i` with
/// column `j` (row-major flattening). Factors are emitted rows first, then
/// columns, then the optional global budget; this order is part of the
/// serialized format.
pub fn build_matching_graph(
    num_rows: usize,
    num_cols: usize,
    variant: MatchingVariant,
) -> Result<FactorGraph> {
    if num_rows == 0 || num_cols == 0 {
        return Err(Error::Empty("alignment matrix"));
    }
    let num_variables = num_rows * num_cols;
    let mut factors = Vec::with_capacity(num_rows + num_cols + 1);
    let row_kind = match variant {
        MatchingVariant::XorAtMostOne => FactorKind::Xor,
        MatchingVariant::AtMostOne2 | MatchingVariant::Budget { .. } => FactorKind::AtMostOne,
    };
    for i in 0..num_rows {
        let members = (0..num_cols).map(|j| i * num_cols + j).collect();
        factors.push(Factor::new(row_kind.clone(), members));
    }
    for j in 0..num_cols {
        let members = (0..num_rows).map(|i| i * num_cols + j).collect();
        factors.push(Factor::new(FactorKind::AtMostOne, members));
    }
    if let MatchingVariant::Budget { budget } = variant {
        if budget == 0 || budget > num_variables {
            return Err(Error::InvalidParameter {
                name: "budget",
                reason: format!("must be in [1, {num_variables}], got {budget}"),
            });
        }
        factors.push(Factor::new(
            FactorKind::Budget { budget },
            (0..num_variables).collect(),
        ));
    }
    FactorGraph::new(num_variables, factors)
}

// Serialization. The wire format keeps factor parameters in a "params" object
// so all kinds share one record shape:
//   {"num_variables": L,
//    "factors": [{"kind": "SeqBudget", "members": [0,1,2],
//                 "params": {"r": [0.5, 0.5], "B": 2}}]}

#[derive(Serialize, Deserialize)]
struct FactorRecord {
    kind: String,
    members: Vec<usize>,
    #[serde(default, skip_serializing_if = "Params::is_empty")]
    params: Params,
}

#[derive(Serialize, Deserialize, Default)]
struct Params {
    #[serde(rename = "B", default, skip_serializing_if = "Option::is_none")]
    budget: Option<usize>,
    #[serde(rename = "r", default, skip_serializing_if = "Option::is_none")]
    edge: Option<EdgeParam>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum EdgeParam {
    Scalar(f64),
    Vector(Vec<f64>),
}

impl Params {
    fn is_empty(&self) -> bool {
        self.budget.is_none() && self.edge.is_none()
    }
}

#[derive(Serialize, Deserialize)]
struct GraphRecord {
    num_variables: usize,
    factors: Vec<FactorRecord>,
}

impl Serialize for FactorGraph {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let factors = self
            .factors
            .iter()
            .map(|f| {
                let params = match &f.kind {
                    FactorKind::Xor | FactorKind::AtMostOne => Params::default(),
                    FactorKind::Budget { budget } => Params {
                        budget: Some(*budget),
                        edge: None,
                    },
                    FactorKind::Pair { edge_score } => Params {
                        budget: None,
                        edge: Some(EdgeParam::Scalar(*edge_score)),
                    },
                    FactorKind::SeqBudget {
                        edge_scores,
                        budget,
                    } => Params {
                        budget: Some(*budget),
                        edge: Some(EdgeParam::Vector(edge_scores.clone())),
                    },
                };
                FactorRecord {
                    kind: f.kind.name().to_string(),
                    members: f.members.clone(),
                    params,
                }
            })
            .collect();
        GraphRecord {
            num_variables: self.num_variables,
            factors,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for FactorGraph {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as DeError;
        let record = GraphRecord::deserialize(deserializer)?;
        let mut factors = Vec::with_capacity(record.factors.len());
        for fr in record.factors {
            let kind = match fr.kind.as_str() {
                "XOR" => FactorKind::Xor,
                "AtMostOne" => FactorKind::AtMostOne,
                "Budget" => FactorKind::Budget {
                    budget: fr
                        .params
                        .budget
                        .ok_or_else(|| D::Error::custom("Budget factor missing params.B"))?,
                },
                "Pair" => match fr.params.edge {
                    Some(EdgeParam::Scalar(r)) => FactorKind::Pair { edge_score: r },
                    _ => return Err(D::Error::custom("Pair factor needs scalar params.r")),
                },
                "SeqBudget" => {
                    let edge_scores = match fr.params.edge {
                        Some(EdgeParam::Vector(v)) => v,
                        _ => return Err(D::Error::custom("SeqBudget factor needs array params.r")),
                    };
                    let budget = fr
                        .params
                        .budget
                        .ok_or_else(|| D::Error::custom("SeqBudget factor missing params.B"))?;
                    FactorKind::SeqBudget {
                        edge_scores,
                        budget,
                    }
                }
                other => return Err(D::Error::custom(format!("unknown factor kind {other:?}"))),
            };
            factors.push(Factor::new(kind, fr.members));
        }
        FactorGraph::new(record.num_variables, factors).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn highlight_graph_shape() {
        let g = build_highlight_graph(20, 10.0, 0.005).unwrap();
        assert_eq!(g.num_variables(), 20);
        assert_eq!(g.factors().len(), 1);
        match &g.factors()[0].kind {
            FactorKind::SeqBudget {
                edge_scores,
                budget,
            } => {
                assert_eq!(*budget, 2);
                assert_eq!(edge_scores.len(), 19);
                assert!(edge_scores.iter().all(|&r| r == 0.005));
            }
            other => panic!("expected SeqBudget, got {other:?}"),
        }
        assert!(g.degrees().iter().all(|&d| d == 1));
    }

    #[test]
    fn budget_rounds_up() {
        assert_eq!(budget_from_pct(20.0, 1), 1);
        assert_eq!(budget_from_pct(10.0, 20), 2);
        assert_eq!(budget_from_pct(15.0, 20), 3);
        assert_eq!(budget_from_pct(100.0, 5), 5);
        assert_eq!(budget_from_pct(20.0, 17), 4); // 3.4 rounds up
        let g = build_highlight_graph(1, 20.0, 0.0).unwrap();
        match &g.factors()[0].kind {
            FactorKind::SeqBudget { budget, .. } => assert_eq!(*budget, 1),
            _ => unreachable!(),
        }
    }

    #[test]
    fn highlight_graph_rejects_bad_params() {
        assert!(build_highlight_graph(0, 20.0, 0.0).is_err());
        assert!(build_highlight_graph(5, 0.0, 0.0).is_err());
        assert!(build_highlight_graph(5, -3.0, 0.0).is_err());
        assert!(build_highlight_graph(5, 120.0, 0.0).is_err());
        assert!(build_highlight_graph(5, 20.0, -0.1).is_err());
        assert!(build_highlight_graph(5, 20.0, f64::NAN).is_err());
    }

    #[test]
    fn matching_graph_xor_at_most_one() {
        let g = build_matching_graph(3, 4, MatchingVariant::XorAtMostOne).unwrap();
        assert_eq!(g.num_variables(), 12);
        assert_eq!(g.factors().len(), 7);
        for (i, f) in g.factors().iter().take(3).enumerate() {
            assert_eq!(f.kind, FactorKind::Xor);
            assert_eq!(f.members, vec![i * 4, i * 4 + 1, i * 4 + 2, i * 4 + 3]);
        }
        for (j, f) in g.factors().iter().skip(3).enumerate() {
            assert_eq!(f.kind, FactorKind::AtMostOne);
            assert_eq!(f.members, vec![j, 4 + j, 8 + j]);
        }
        assert!(g.degrees().iter().all(|&d| d == 2));
    }

    #[test]
    fn matching_graph_budget() {
        let g = build_matching_graph(2, 2, MatchingVariant::Budget { budget: 4 }).unwrap();
        assert_eq!(g.factors().len(), 5);
        let last = g.factors().last().unwrap();
        assert_eq!(last.kind, FactorKind::Budget { budget: 4 });
        assert_eq!(last.members, vec![0, 1, 2, 3]);
        assert!(g.degrees().iter().all(|&d| d == 3));
        assert!(build_matching_graph(2, 2, MatchingVariant::Budget { budget: 0 }).is_err());
        assert!(build_matching_graph(2, 2, MatchingVariant::Budget { budget: 5 }).is_err());
    }

    #[test]
    fn matching_graph_degenerate_sizes() {
        let g = build_matching_graph(1, 1, MatchingVariant::AtMostOne2).unwrap();
        assert_eq!(g.num_variables(), 1);
        assert_eq!(g.degree(0), 2);
    }

    #[test]
    fn factor_validation_catches_structural_errors() {
        assert!(FactorGraph::new(
            3,
            vec![Factor::new(FactorKind::Xor, vec![0, 1, 3])]
        )
        .is_err());
        assert!(FactorGraph::new(
            3,
            vec![Factor::new(FactorKind::Xor, vec![0, 1, 1])]
        )
        .is_err());
        // variable 2 uncovered
        assert!(FactorGraph::new(
            3,
            vec![Factor::new(FactorKind::Xor, vec![0, 1])]
        )
        .is_err());
        assert!(FactorGraph::new(
            2,
            vec![Factor::new(FactorKind::Pair { edge_score: 0.5 }, vec![0])]
        )
        .is_err());
        assert!(FactorGraph::new(
            2,
            vec![Factor::new(FactorKind::Budget { budget: 3 }, vec![0, 1])]
        )
        .is_err());
        // SeqBudget must cover the whole range in order
        assert!(FactorGraph::new(
            3,
            vec![Factor::new(
                FactorKind::SeqBudget {
                    edge_scores: vec![0.1],
                    budget: 1
                },
                vec![0, 2]
            )]
        )
        .is_err());
    }

    #[test]
    fn score_checks_feasibility() {
        let g = build_matching_graph(2, 2, MatchingVariant::XorAtMostOne).unwrap();
        let s = [1.0, 2.0, 3.0, 4.0];
        // rows pick columns 1 and 0: feasible permutation
        let ok = Assignment::new(vec![0, 1, 1, 0]);
        assert_eq!(g.score(&s, &ok), Some(5.0));
        // row 0 picks nothing: XOR violated
        let bad = Assignment::new(vec![0, 0, 1, 0]);
        assert_eq!(g.score(&s, &bad), None);
        // both rows pick column 0: column AtMostOne violated
        let clash = Assignment::new(vec![1, 0, 1, 0]);
        assert_eq!(g.score(&s, &clash), None);
    }

    #[test]
    fn seq_budget_extra_score() {
        let kind = FactorKind::SeqBudget {
            edge_scores: vec![0.5, 0.5, 0.5],
            budget: 2,
        };
        assert_eq!(kind.extra_score(&[1, 1, 0, 0]), 0.5);
        assert_eq!(kind.extra_score(&[1, 0, 1, 0]), 0.0);
        assert!(!kind.is_feasible(&[1, 1, 1, 0]));
        assert!(kind.is_feasible(&[0, 0, 0, 0]));
    }

    #[test]
    fn json_round_trip_preserves_graph() {
        let graphs = vec![
            build_highlight_graph(6, 30.0, 0.005).unwrap(),
            build_matching_graph(2, 3, MatchingVariant::XorAtMostOne).unwrap(),
            build_matching_graph(3, 2, MatchingVariant::Budget { budget: 2 }).unwrap(),
            FactorGraph::new(
                2,
                vec![Factor::new(FactorKind::Pair { edge_score: -0.5 }, vec![0, 1])],
            )
            .unwrap(),
        ];
        for g in graphs {
            let text = serde_json::to_string(&g).unwrap();
            let back: FactorGraph = serde_json::from_str(&text).unwrap();
            assert_eq!(g, back);
        }
    }

    #[test]
    fn json_wire_shape() {
        let g = build_highlight_graph(3, 67.0, 0.25).unwrap();
        let v: serde_json::Value = serde_json::to_value(&g).unwrap();
        assert_eq!(v["num_variables"], 3);
        assert_eq!(v["factors"][0]["kind"], "SeqBudget");
        assert_eq!(v["factors"][0]["members"], serde_json::json!([0, 1, 2]));
        assert_eq!(v["factors"][0]["params"]["B"], 3);
        assert_eq!(v["factors"][0]["params"]["r"], serde_json::json!([0.25, 0.25]));

        let am = build_matching_graph(1, 2, MatchingVariant::AtMostOne2).unwrap();
        let v: serde_json::Value = serde_json::to_value(&am).unwrap();
        assert!(v["factors"][0].get("params").is_none());
    }

    #[test]
    fn json_rejects_malformed_graphs() {
        let missing_budget = r#"{"num_variables": 2, "factors": [
            {"kind": "Budget", "members": [0, 1], "params": {}}]}"#;
        assert!(serde_json::from_str::<FactorGraph>(missing_budget).is_err());
        let unknown = r#"{"num_variables": 1, "factors": [
            {"kind": "Parity", "members": [0]}]}"#;
        assert!(serde_json::from_str::<FactorGraph>(unknown).is_err());
        let uncovered = r#"{"num_variables": 3, "factors": [
            {"kind": "XOR", "members": [0, 1]}]}"#;
        assert!(serde_json::from_str::<FactorGraph>(uncovered).is_err());
    }

    #[test]
    fn alignment_matrix_round_trip_and_sums() {
        let m = AlignmentMatrix::new(2, 3, vec![1.0, 0.0, 0.5, 0.0, 1.0, 0.5]).unwrap();
        assert_eq!(m.get(1, 2), 0.5);
        assert_eq!(m.row_sum(0), 1.5);
        assert_eq!(m.col_sum(2), 1.0);
        let text = serde_json::to_string(&m).unwrap();
        assert_eq!(text, "[[1.0,0.0,0.5],[0.0,1.0,0.5]]");
        let back: AlignmentMatrix = serde_json::from_str(&text).unwrap();
        assert_eq!(m, back);
        assert!(AlignmentMatrix::new(2, 2, vec![0.0; 3]).is_err());
        assert!(serde_json::from_str::<AlignmentMatrix>("[[1.0],[2.0,3.0]]").is_err());
    }

    #[test]
    fn scores_reject_non_finite() {
        assert!(Scores::new(vec![0.0, f64::NAN]).is_err());
        assert!(Scores::new(vec![f64::INFINITY]).is_err());
        assert_eq!(Scores::new(vec![1.0, -2.0]).unwrap().len(), 2);
    }
}
