use std::io;

use collide_sic::channel::ChannelError;
use collide_sic::construct::ConstructError;
use collide_sic::corr::CorrError;
use collide_sic::verify::VerifyError;
use collide_sic::RationalError;
use thiserror::Error;

/// Process exit codes.
pub const EXIT_OK: i32 = 0;
pub const EXIT_VERDICT_FALSE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Budget(String),
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Budget(_) => EXIT_BUDGET,
            CliError::Config(_) | CliError::Io { .. } => EXIT_CONFIG,
        }
    }

    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }
}

fn corr_is_budget(e: &CorrError) -> bool {
    matches!(e, CorrError::BudgetExceeded { .. })
}

fn construct_is_budget(e: &ConstructError) -> bool {
    match e {
        ConstructError::TooManyPermutations { .. } | ConstructError::PeriodTooLarge(_) => true,
        ConstructError::Corr(c) => corr_is_budget(c),
        _ => false,
    }
}

fn channel_is_budget(e: &ChannelError) -> bool {
    matches!(e, ChannelError::BudgetExceeded { .. })
}

fn classify(budget: bool, msg: String) -> CliError {
    if budget {
        CliError::Budget(msg)
    } else {
        CliError::Config(msg)
    }
}

impl From<CorrError> for CliError {
    fn from(e: CorrError) -> Self {
        classify(corr_is_budget(&e), e.to_string())
    }
}

impl From<ConstructError> for CliError {
    fn from(e: ConstructError) -> Self {
        classify(construct_is_budget(&e), e.to_string())
    }
}

impl From<ChannelError> for CliError {
    fn from(e: ChannelError) -> Self {
        classify(channel_is_budget(&e), e.to_string())
    }
}

impl From<VerifyError> for CliError {
    fn from(e: VerifyError) -> Self {
        let budget = match &e {
            VerifyError::BudgetExceeded { .. } => true,
            VerifyError::Corr(c) => corr_is_budget(c),
            VerifyError::Construct(c) => construct_is_budget(c),
            VerifyError::Channel(c) => channel_is_budget(c),
            VerifyError::Config(_) => false,
        };
        classify(budget, e.to_string())
    }
}

impl From<RationalError> for CliError {
    fn from(e: RationalError) -> Self {
        CliError::Config(e.to_string())
    }
}
