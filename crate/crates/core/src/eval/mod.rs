//! Evaluation harnesses and their CSV reports.

mod reward;
mod steering;
mod table1;

pub use reward::{read_reward_csv, reward_error, sign_bucket, OutcomeError, RewardErrorReport, SIGN_TOLERANCE};
pub use steering::{read_steering_csv, steering_accuracy, steering_labels, LabelAccuracy, SteeringReport};
pub use table1::{read_table1_csv, run_table1_protocol, GameRow, Table1Report, Table1Row};

use crate::backends::BackendError;
use crate::domains::DomainError;
use crate::game::GameError;

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("invalid evaluation request: {0}")]
    Invalid(String),
    #[error("csv: {0}")]
    Csv(String),
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Domain(#[from] DomainError),
}

impl From<csv::Error> for EvalError {
    fn from(e: csv::Error) -> Self {
        EvalError::Csv(e.to_string())
    }
}

impl EvalError {
    /// True when the failure came from a backend rather than from the request itself.
    pub fn is_backend(&self) -> bool {
        matches!(self, EvalError::Backend(_) | EvalError::Game(GameError::Backend(_)))
    }
}

pub(crate) fn write_csv<R: serde::Serialize>(header: &[&str], rows: &[R]) -> String {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(header).expect("in-memory csv");
    for r in rows {
        w.serialize(r).expect("in-memory csv");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8 csv")
}

pub(crate) fn read_csv<R: serde::de::DeserializeOwned>(text: &str, header: &[&str]) -> Result<Vec<R>, EvalError> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let found: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if found != header {
        return Err(EvalError::Csv(format!("expected header {header:?}, found {found:?}")));
    }
    r.deserialize().map(|row| row.map_err(EvalError::from)).collect()
}
