use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Pipeline stage that a decode failure is attributed to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Detection,
    Ocr,
    Pairing,
    AxisSplit,
    FitX,
    FitY,
    Evaluation,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Stage::Detection => "detection",
            Stage::Ocr => "ocr",
            Stage::Pairing => "pairing",
            Stage::AxisSplit => "axis_split",
            Stage::FitX => "fit_x",
            Stage::FitY => "fit_y",
            Stage::Evaluation => "evaluation",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid bounding box: {0}")]
    InvalidBox(String),

    #[error("degenerate calibration: {0}")]
    CalibrationDegenerate(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("layout error: {0}")]
    Layout(String),

    #[error("detection error: {0}")]
    Detection(String),

    #[error("empty label: {0}")]
    EmptyLabel(String),

    #[error("decode error at {stage}: {reason}")]
    Decode { stage: Stage, reason: String },

    #[error("degenerate axis: {0}")]
    DegenerateAxis(String),

    #[error("evaluation error: {0}")]
    Evaluation(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("image error: {0}")]
    Image(#[from] image::ImageError),
}

impl Error {
    pub(crate) fn decode(stage: Stage, reason: impl Into<String>) -> Self {
        Error::Decode {
            stage,
            reason: reason.into(),
        }
    }

    /// Stage this error is attributed to when it aborts a chart.
    pub fn stage(&self) -> Stage {
        match self {
            Error::Decode { stage, .. } => *stage,
            Error::Detection(_) => Stage::Detection,
            Error::EmptyLabel(_) => Stage::Ocr,
            Error::Evaluation(_) => Stage::Evaluation,
            _ => Stage::Detection,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
