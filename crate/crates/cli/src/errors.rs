//! Error classification for exit codes.

use std::fmt;

use baire::ahc::AhcError;
use baire::bench::BenchError;
use baire::digits::CodecError;
use baire::redshift::PipelineError;
use baire::regression::RegressionError;
use baire::tree::TreeError;

/// Top-level failure, classified for the exit code: 2 validation, 3 I/O,
/// 4 data.
#[derive(Debug)]
pub enum AppError {
    Validation(String),
    Io(String),
    Data(String),
}

impl AppError {
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Validation(_) => 2,
            AppError::Io(_) => 3,
            AppError::Data(_) => 4,
        }
    }

    pub fn validation(msg: impl Into<String>) -> Self {
        AppError::Validation(msg.into())
    }
}

impl fmt::Display for AppError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // The wrapped messages are self-descriptive; the class shows up in
        // the exit code.
        match self {
            AppError::Validation(m) | AppError::Io(m) | AppError::Data(m) => f.write_str(m),
        }
    }
}

impl From<std::io::Error> for AppError {
    fn from(e: std::io::Error) -> Self {
        AppError::Io(e.to_string())
    }
}

impl From<CodecError> for AppError {
    fn from(e: CodecError) -> Self {
        match e {
            CodecError::UnsupportedBase(_)
            | CodecError::ZeroPrecision
            | CodecError::PrecisionOverflow { .. }
            | CodecError::IncompatibleParams => AppError::Validation(e.to_string()),
            CodecError::NonFinite(_) | CodecError::MalformedDigits(_) => {
                AppError::Data(e.to_string())
            }
        }
    }
}

impl From<TreeError> for AppError {
    fn from(e: TreeError) -> Self {
        match e {
            TreeError::Codec(inner) => inner.into(),
            TreeError::DepthExceedsPrecision { .. } | TreeError::DepthOutOfRange { .. } => {
                AppError::Validation(e.to_string())
            }
            TreeError::Io(inner) => AppError::Io(inner.to_string()),
            TreeError::DuplicateId(_)
            | TreeError::UnknownId(_)
            | TreeError::MembersNotMaterialized(_)
            | TreeError::Malformed(_) => AppError::Data(e.to_string()),
        }
    }
}

impl From<PipelineError> for AppError {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Io(inner) => AppError::Io(inner.to_string()),
            PipelineError::Csv(inner) if inner.is_io_error() => AppError::Io(inner.to_string()),
            PipelineError::Codec(inner) => inner.into(),
            PipelineError::DepthOutOfRange { .. } => AppError::Validation(e.to_string()),
            PipelineError::Csv(_)
            | PipelineError::MissingColumn(_)
            | PipelineError::MalformedBudgetExceeded { .. }
            | PipelineError::EmptyTable => AppError::Data(e.to_string()),
        }
    }
}

impl From<RegressionError> for AppError {
    fn from(e: RegressionError) -> Self {
        match e {
            RegressionError::InvalidConfig(_) => AppError::Validation(e.to_string()),
            RegressionError::Tree(inner) => inner.into(),
            RegressionError::Io(inner) => AppError::Io(inner.to_string()),
            RegressionError::TooFewPairs { .. }
            | RegressionError::NonFinite { .. }
            | RegressionError::NonFiniteQuery(_)
            | RegressionError::EmptyTestSet
            | RegressionError::Malformed(_) => AppError::Data(e.to_string()),
        }
    }
}

impl From<AhcError> for AppError {
    fn from(e: AhcError) -> Self {
        match e {
            AhcError::TooManyObservations { .. } => AppError::Validation(e.to_string()),
            _ => AppError::Data(e.to_string()),
        }
    }
}

impl From<BenchError> for AppError {
    fn from(e: BenchError) -> Self {
        match e {
            BenchError::InvalidConfig(_) => AppError::Validation(e.to_string()),
            BenchError::Tree(inner) => inner.into(),
            BenchError::Ahc(inner) => inner.into(),
            BenchError::Codec(inner) => inner.into(),
        }
    }
}
