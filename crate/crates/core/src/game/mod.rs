//! The dialogue game: configuration, histories, infostates, prompt rendering and the
//! memoizing transition engine.

mod config;
mod engine;
mod infostate;
mod prompt;
mod state;

pub use config::{
    canonical_private, format_number, normalize_label, DomainId, GameConfig, InfoValue, PrivateInfo,
    Scenario, ANY_LABEL,
};
pub use engine::{CallStats, DialogueGame, Transcript};
pub use infostate::InfostateKey;
pub use prompt::{format_prompt, instruction_line, render_message, render_template, render_thread};
pub use state::{DialogueState, Event, Move, NodeKind};

use thiserror::Error;

use crate::backends::BackendError;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum GameError {
    #[error("invalid config: {0}")]
    ConfigInvalid(String),
    #[error("wrong node kind: expected {expected}, found {found:?}")]
    WrongNodeKind { expected: &'static str, found: NodeKind },
    #[error("illegal action: {0}")]
    IllegalAction(String),
    #[error("template error: {0}")]
    Template(String),
    #[error("state is not terminal")]
    NotTerminal,
    #[error(transparent)]
    Backend(#[from] BackendError),
}
