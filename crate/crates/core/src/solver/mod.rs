//! Baseline Match-Up solver: three affinity features summed into one
//! similarity matrix, then a maximum-weight assignment.

pub mod assignment;
pub mod features;
pub mod matrix;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::label::{AnswerKey, Label, PredictedKey};
use crate::model::MatchUpPuzzle;

pub use assignment::{assignment_total, exhaustive_assignment, hungarian_assignment, Assignment};
pub use features::{cooccurrence_affinity, length_affinity, name_anchor_affinity};
pub use matrix::{MatrixError, SimilarityMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeatureWeights {
    pub w_length: f64,
    pub w_names: f64,
    pub w_cooccur: f64,
}

impl Default for FeatureWeights {
    fn default() -> Self {
        FeatureWeights {
            w_length: 1.0,
            w_names: 3.0,
            w_cooccur: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("weight {name} must be finite and non-negative, got {value}")]
    InvalidWeight { name: &'static str, value: f64 },
    #[error("at least one weight must be strictly positive")]
    AllWeightsZero,
    #[error("puzzle {id} has {sources} sources and {targets} targets")]
    SizeMismatch {
        id: String,
        sources: usize,
        targets: usize,
    },
    #[error("puzzle {id} has fewer than 2 items")]
    TooSmall { id: String },
}

impl FeatureWeights {
    pub fn new(w_length: f64, w_names: f64, w_cooccur: f64) -> Result<Self, SolveError> {
        let w = FeatureWeights {
            w_length,
            w_names,
            w_cooccur,
        };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<(), SolveError> {
        for (name, value) in [
            ("w_length", self.w_length),
            ("w_names", self.w_names),
            ("w_cooccur", self.w_cooccur),
        ] {
            if !value.is_finite() || value < 0.0 {
                return Err(SolveError::InvalidWeight { name, value });
            }
        }
        if self.w_length == 0.0 && self.w_names == 0.0 && self.w_cooccur == 0.0 {
            return Err(SolveError::AllWeightsZero);
        }
        Ok(())
    }

    pub fn scaled(&self, factor: f64) -> Self {
        FeatureWeights {
            w_length: self.w_length * factor,
            w_names: self.w_names * factor,
            w_cooccur: self.w_cooccur * factor,
        }
    }
}

/// The three feature matrices of one puzzle.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrices {
    pub length: SimilarityMatrix,
    pub names: SimilarityMatrix,
    pub cooccurrence: SimilarityMatrix,
}

impl FeatureMatrices {
    pub fn compute(source_items: &[String], target_items: &[String]) -> Self {
        let ((length, names), cooccurrence) = rayon::join(
            || {
                rayon::join(
                    || length_affinity(source_items, target_items),
                    || name_anchor_affinity(source_items, target_items),
                )
            },
            || cooccurrence_affinity(source_items, target_items),
        );
        FeatureMatrices {
            length,
            names,
            cooccurrence,
        }
    }

    /// `w_length·L + w_names·N + w_cooccur·C`.
    pub fn combine(&self, weights: &FeatureWeights) -> SimilarityMatrix {
        let mut combined = self.length.scaled(weights.w_length);
        combined.add_scaled(&self.names, weights.w_names);
        combined.add_scaled(&self.cooccurrence, weights.w_cooccur);
        combined
    }
}

fn check_puzzle(puzzle: &MatchUpPuzzle) -> Result<(), SolveError> {
    let (s, t) = (puzzle.source_items.len(), puzzle.target_items.len());
    if s != t {
        return Err(SolveError::SizeMismatch {
            id: puzzle.meta.id.clone(),
            sources: s,
            targets: t,
        });
    }
    if s < 2 {
        return Err(SolveError::TooSmall {
            id: puzzle.meta.id.clone(),
        });
    }
    Ok(())
}

pub fn build_similarity(
    puzzle: &MatchUpPuzzle,
    weights: &FeatureWeights,
) -> Result<SimilarityMatrix, SolveError> {
    weights.validate()?;
    check_puzzle(puzzle)?;
    Ok(FeatureMatrices::compute(&puzzle.source_items, &puzzle.target_items).combine(weights))
}

/// Maximum-weight bijection as an answer key (row i gets label columns[i] + 1).
pub fn solve_assignment(matrix: &SimilarityMatrix) -> AnswerKey {
    let a = assignment::solve_assignment(matrix);
    AnswerKey::new(a.columns.into_iter().map(Label::from_index).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics {
    pub features: FeatureMatrices,
    pub combined: SimilarityMatrix,
    pub total: f64,
    /// The combined matrix is constant, so every permutation ties.
    pub uninformative: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub key: AnswerKey,
    pub diagnostics: Diagnostics,
}

impl Solution {
    pub fn predicted(&self) -> PredictedKey {
        PredictedKey::from(&self.key)
    }
}

pub fn solve(puzzle: &MatchUpPuzzle, weights: &FeatureWeights) -> Result<Solution, SolveError> {
    weights.validate()?;
    check_puzzle(puzzle)?;
    let features = FeatureMatrices::compute(&puzzle.source_items, &puzzle.target_items);
    let combined = features.combine(weights);
    let a = assignment::solve_assignment(&combined);
    Ok(Solution {
        key: AnswerKey::new(a.columns.iter().map(|&c| Label::from_index(c)).collect()),
        diagnostics: Diagnostics {
            uninformative: combined.is_constant(),
            features,
            combined,
            total: a.total,
        },
    })
}
