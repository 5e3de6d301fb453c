//! JSON file formats and loading helpers.
//!
//! Everything on disk is JSON:
//!
//! * **Graph**: `{"num_variables": L, "factors": [{"kind": "XOR" |
//!   "AtMostOne" | "Budget" | "Pair" | "SeqBudget", "members": [..],
//!   "params": {"B": .., "r": ..}}]}` with `params` omitted where the kind
//!   takes none (`r` is a number for `Pair`, an array for `SeqBudget`).
//! * **Scores**: either a JSON array (one score per variable) or an
//!   array-of-arrays (row-major matrix; rows index the premise side).
//! * **Solver config**: object with optional `temperature` (alias `T`),
//!   `rho`, `max_iters`, `tol`, `unroll_window` (alias `K`); `{}` gives the
//!   inference defaults.
//! * **Masks**: array of per-document arrays, possibly ragged.
//! * **Checkpoint**: a trained model plus its loss curve.
//!
//! Loaders wrap parse failures with the file path and the parser's
//! line/column context. Writers emit pretty-printed JSON with a trailing
//! newline; output bytes are a pure function of the value.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{AlignmentMatrix, FactorGraph, Scores};
use crate::rationalizer::TrainOutcome;
use crate::solver::ConsensusConfig;

/// Contents of a scores file: a flat vector or a row-major matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScoresInput {
    Vector(Vec<f64>),
    Matrix(AlignmentMatrix),
}

impl ScoresInput {
    /// Total number of scores, which must match the graph's variable count.
    pub fn len(&self) -> usize {
        match self {
            ScoresInput::Vector(v) => v.len(),
            ScoresInput::Matrix(m) => m.rows() * m.cols(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Flattens to a validated score vector (matrices in row-major order).
    pub fn into_scores(self) -> Result<Scores> {
        match self {
            ScoresInput::Vector(v) => Scores::new(v),
            ScoresInput::Matrix(m) => Scores::new(m.as_flat().to_vec()),
        }
    }

    /// Matrix shape when the file held one.
    pub fn shape(&self) -> Option<(usize, usize)> {
        match self {
            ScoresInput::Vector(_) => None,
            ScoresInput::Matrix(m) => Some((m.rows(), m.cols())),
        }
    }
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::File {
        path: path.display().to_string(),
        detail: e.to_string(),
    })?;
    serde_json::from_str(&text).map_err(|e| Error::File {
        path: path.display().to_string(),
        detail: e.to_string(),
    })
}

pub fn load_graph(path: &Path) -> Result<FactorGraph> {
    read_json(path)
}

pub fn load_scores(path: &Path) -> Result<ScoresInput> {
    let input: ScoresInput = read_json(path)?;
    if input.is_empty() {
        return Err(Error::File {
            path: path.display().to_string(),
            detail: "scores file holds no values".into(),
        });
    }
    Ok(input)
}

pub fn load_config(path: &Path) -> Result<ConsensusConfig> {
    let config: ConsensusConfig = read_json(path)?;
    config.validate()?;
    Ok(config)
}

pub fn load_masks(path: &Path) -> Result<Vec<Vec<f64>>> {
    read_json(path)
}

pub fn load_checkpoint(path: &Path) -> Result<TrainOutcome> {
    read_json(path)
}

/// Serializes `value` as pretty JSON with a trailing newline.
pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    Ok(text)
}

/// Writes `value` as pretty JSON to `path`.
pub fn save_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    std::fs::write(path, to_json_string(value)?)?;
    Ok(())
}
