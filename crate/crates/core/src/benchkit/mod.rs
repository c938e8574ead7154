//! Benchmark answer aggregation and round-trip interoperability reports.

mod ingest;
mod interop;
mod metrics;
mod synthesis;

use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::geomgen::Slot;

pub use ingest::{read_answers, read_answers_csv, read_answers_jsonl, CSV_MAGIC, JSONL_MAGIC};
pub use interop::{roundtrip_report, InteropReport, SIZE_RATIO_BAND};
pub use metrics::{
    consistency, consistency_vector, pairwise_agreement, visibility_ratio, visibility_vector,
    FOLLOW_UP_QUESTIONS, Q_DISPLAYED, Q_POSITION, Q_SHADING, Q_SHAPE,
};
pub use synthesis::{
    synthesis_matrix, Cell, ScoreAccumulator, SynthesisMatrix, CONSISTENCY_CAVEAT,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BenchError {
    #[error("no displayed/not-displayed answers for {0}")]
    NoAnswers(Slot),
    #[error("{slot}: {eligible} eligible respondent(s), need at least 2")]
    TooFewRespondents { slot: Slot, eligible: usize },
    #[error("line {line}: {reason}")]
    Format { line: usize, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SupportScore {
    Full,
    Partial,
    None,
    NotApplicable,
}

impl SupportScore {
    /// Numeric value; `None` for NotApplicable.
    pub fn value(self) -> Option<f64> {
        self.half_units().map(|h| f64::from(h) / 2.0)
    }

    pub(crate) fn half_units(self) -> Option<u32> {
        match self {
            Self::Full => Some(2),
            Self::Partial => Some(1),
            Self::None => Some(0),
            Self::NotApplicable => None,
        }
    }

    pub(crate) fn from_half_units(h: u32) -> Self {
        match h {
            0 => Self::None,
            1 => Self::Partial,
            _ => Self::Full,
        }
    }
}

impl fmt::Display for SupportScore {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Full => "1",
            Self::Partial => "0.5",
            Self::None => "0",
            Self::NotApplicable => "n/a",
        })
    }
}

impl FromStr for SupportScore {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.trim().to_ascii_lowercase().as_str() {
            "1" | "1.0" | "full" => Self::Full,
            "0.5" | ".5" | "partial" => Self::Partial,
            "0" | "0.0" | "none" => Self::None,
            "n/a" | "na" | "notapplicable" | "not applicable" => Self::NotApplicable,
            other => return Err(format!("unknown support score {other:?}")),
        })
    }
}

impl Serialize for SupportScore {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum TimingBucket {
    Immediate,
    UnderMinute,
    OneToFive,
    FiveToTwenty,
    TwentyToHour,
    OverHour,
    Crashed,
    NotPossible,
    NoResult,
}

impl TimingBucket {
    pub const ALL: [Self; 9] = [
        Self::Immediate,
        Self::UnderMinute,
        Self::OneToFive,
        Self::FiveToTwenty,
        Self::TwentyToHour,
        Self::OverHour,
        Self::Crashed,
        Self::NotPossible,
        Self::NoResult,
    ];

    /// Whether the bucket is a measured duration.
    pub fn is_timing(self) -> bool {
        self < Self::Crashed
    }
}

impl FromStr for TimingBucket {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key: String = s
            .chars()
            .filter(char::is_ascii_alphanumeric)
            .collect::<String>()
            .to_ascii_lowercase();
        Self::ALL
            .into_iter()
            .find(|b| format!("{b:?}").to_ascii_lowercase() == key)
            .ok_or_else(|| format!("unknown timing bucket {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Category {
    Georeferencing,
    Semantics,
    Geometry,
    Visualization,
    Editing,
    Query,
    AnalysisType1,
    AnalysisType2,
    Export,
    Timing,
    GeometryItem,
}

impl Category {
    pub const ALL: [Self; 11] = [
        Self::Georeferencing,
        Self::Semantics,
        Self::Geometry,
        Self::Visualization,
        Self::Editing,
        Self::Query,
        Self::AnalysisType1,
        Self::AnalysisType2,
        Self::Export,
        Self::Timing,
        Self::GeometryItem,
    ];
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl FromStr for Category {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().replace([' ', '_', '-'], "").to_ascii_lowercase();
        Self::ALL
            .into_iter()
            .find(|c| c.to_string().to_ascii_lowercase() == key)
            .ok_or_else(|| format!("unknown category {s:?}"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(untagged)]
pub enum AnswerValue {
    Score(SupportScore),
    Timing(TimingBucket),
    Text(String),
}

impl AnswerValue {
    /// Reads a yes/no answer.
    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Self::Score(SupportScore::Full) => Some(true),
            Self::Score(SupportScore::None) => Some(false),
            Self::Text(t) => match t.trim().to_ascii_lowercase().as_str() {
                "y" | "yes" | "true" => Some(true),
                "n" | "no" | "false" => Some(false),
                _ => None,
            },
            _ => None,
        }
    }
}

impl fmt::Display for AnswerValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Score(s) => s.fmt(f),
            Self::Timing(t) => fmt::Debug::fmt(t, f),
            Self::Text(t) => f.write_str(t),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnswerRecord {
    pub respondent: String,
    pub software: String,
    pub version: String,
    pub tester_expertise: u8,
    pub dataset: String,
    pub question_id: String,
    pub category: Category,
    pub value: AnswerValue,
    pub item_slot: Option<Slot>,
}
