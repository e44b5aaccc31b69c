use std::fmt;

use sfwm::Error;

/// Usage or configuration problems.
pub const EXIT_CONFIG: i32 = 2;
/// Malformed or inconsistent input data.
pub const EXIT_DATA: i32 = 3;
/// The model could not be evaluated.
pub const EXIT_NUMERICAL: i32 = 4;

/// A failure reported as `error: CODE: message` with its exit status.
#[derive(Debug)]
pub struct Failure {
    pub code: &'static str,
    pub exit: i32,
    pub message: String,
}

impl Failure {
    pub fn config(code: &'static str, message: impl Into<String>) -> Self {
        Failure {
            code,
            exit: EXIT_CONFIG,
            message: message.into(),
        }
    }

    pub fn data(code: &'static str, message: impl Into<String>) -> Self {
        Failure {
            code,
            exit: EXIT_DATA,
            message: message.into(),
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // Keep the report on one line.
        write!(f, "{}: {}", self.code, self.message.replace('\n', " "))
    }
}

/// Machine-readable code and exit status of a library error.
pub fn classify(e: &Error) -> (&'static str, i32) {
    match e {
        Error::InvalidParameter { .. } => ("CONFIG_INVALID_VALUE", EXIT_CONFIG),
        Error::UncorrectedRates => ("UNCORRECTED_RATES", EXIT_CONFIG),
        Error::SeriesTooShort { .. } => ("SERIES_TOO_SHORT", EXIT_CONFIG),
        Error::Parse { .. } => ("PARSE_ERROR", EXIT_DATA),
        Error::Io { .. } => ("IO_ERROR", EXIT_DATA),
        Error::InvalidSeries(_) => ("INVALID_SERIES", EXIT_DATA),
        Error::InconsistentRates { .. } => ("INCONSISTENT_RATES", EXIT_DATA),
        Error::MissingNormalization => ("MISSING_NORMALIZATION", EXIT_DATA),
        Error::WindowTooSmall { .. } => ("BACKGROUND_WINDOW_TOO_SMALL", EXIT_DATA),
        Error::WindowOverlapsPeak { .. } => ("BACKGROUND_WINDOW_OVERLAPS_PEAK", EXIT_DATA),
        Error::NoWavePacket => ("NO_WAVEPACKET", EXIT_DATA),
        Error::Convergence { .. } => ("QUADRATURE_NOT_CONVERGED", EXIT_NUMERICAL),
        Error::GridOverflow { .. } => ("GRID_OVERFLOW", EXIT_NUMERICAL),
        Error::EmptySpectrum => ("EMPTY_SPECTRUM", EXIT_NUMERICAL),
        Error::PeakAtEndpoint(_) | Error::NoCrossing(_) => ("WIDTH_UNDEFINED", EXIT_NUMERICAL),
        Error::Pipeline { source, .. } => match classify(source) {
            // Fit-level pipeline failures arrive with their cause flattened
            // to text; the point could not be evaluated either way.
            ("INVALID_SERIES", _) => ("PIPELINE_FAILED", EXIT_NUMERICAL),
            other => other,
        },
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let (code, exit) = classify(&e);
        Failure {
            code,
            exit,
            message: e.to_string(),
        }
    }
}

pub type Outcome<T> = std::result::Result<T, Failure>;
