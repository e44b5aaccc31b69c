use std::fmt;
use std::path::PathBuf;

/// Which flank of a peak an extraction failed on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Side::Left => f.write_str("left"),
            Side::Right => f.write_str("right"),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error(
        "quadrature did not converge: achieved relative error {achieved:.3e} \
         (requested {requested:.3e}) after {panels} panels"
    )]
    Convergence {
        achieved: f64,
        requested: f64,
        panels: usize,
    },

    #[error(
        "spectral amplitude still {edge_ratio:.3e} of peak at the grid edge \
         after {widenings} widenings"
    )]
    GridOverflow { widenings: usize, edge_ratio: f64 },

    #[error("empty spectrum")]
    EmptySpectrum,

    #[error("peak lies on the {0} endpoint of the curve")]
    PeakAtEndpoint(Side),

    #[error("no half-maximum crossing on the {0} side of the peak")]
    NoCrossing(Side),

    #[error("pair rate {r_g} exceeds singles rate {singles}")]
    InconsistentRates { r_g: f64, singles: f64 },

    #[error("cross-correlation curve is not background-normalised")]
    MissingNormalization,

    #[error("absolute rates requested from data that is not saturation-corrected")]
    UncorrectedRates,

    #[error("{}", parse_message(path, *line, key.as_deref(), message))]
    Parse {
        path: PathBuf,
        line: Option<usize>,
        key: Option<String>,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("background window holds {bins} bins, at least {required} required")]
    WindowTooSmall { bins: usize, required: usize },

    #[error("background window [{lo}, {hi}] ns overlaps the wave-packet peak at {peak} ns")]
    WindowOverlapsPeak { lo: f64, hi: f64, peak: f64 },

    #[error("no wave packet detected")]
    NoWavePacket,

    #[error("series has {points} points, at least {required} required")]
    SeriesTooShort { points: usize, required: usize },

    #[error("invalid series: {0}")]
    InvalidSeries(String),

    #[error("pipeline failed at Δc/2π = {delta_c_ghz} GHz: {source}")]
    Pipeline {
        delta_c_ghz: f64,
        #[source]
        source: Box<Error>,
    },
}

fn parse_message(path: &std::path::Path, line: Option<usize>, key: Option<&str>, message: &str) -> String {
    match (line, key) {
        (Some(line), _) => format!("{}:{}: {}", path.display(), line, message),
        (None, Some(key)) => format!("{}: key `{}`: {}", path.display(), key, message),
        (None, None) => format!("{}: {}", path.display(), message),
    }
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
