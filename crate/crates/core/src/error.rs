use thiserror::Error;

use crate::geometry::Vertex;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid sample: {0}")]
    InvalidSample(String),

    /// The readings sum to (numerically) zero, which places the source at
    /// infinity; its range cannot be recovered.
    #[error("range unrecoverable: readings sum to {sum:e}, source is effectively at infinity")]
    AtInfinity { sum: f64 },

    /// The three triangle readings carry no in-plane component, so the
    /// source lies on the face normal and has no defined bearing.
    #[error("degenerate readings: source lies on the face normal, bearing undefined")]
    DegenerateReadings,

    /// The solve resolved the source onto the vertical axis of the array.
    #[error("bearing undefined: source lies on the vertical axis at elevation {elevation_deg}°")]
    BearingUndefined {
        elevation_deg: f64,
        chosen_vertex: Option<Vertex>,
    },

    #[error("source and array are coplanar: elevation {elevation_deg}° gives no range")]
    Coplanar { elevation_deg: f64 },

    #[error("not enough points for a harmonic-{harmonic} fit: need {needed}, got {got}")]
    InsufficientPoints {
        harmonic: u32,
        needed: usize,
        got: usize,
    },

    #[error("solve failed at range {range_m} m, bearing {bearing_deg}°, elevation {elevation_deg}°: {source}")]
    SweepPoint {
        range_m: f64,
        bearing_deg: f64,
        elevation_deg: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for the two failure modes that mean "the readings do not pin down a bearing".
    pub fn is_degenerate(&self) -> bool {
        matches!(
            self,
            Error::DegenerateReadings | Error::BearingUndefined { .. }
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
