//! Raw arrival readings to mean-zero path differences, and the
//! sum-of-squares distance recovery identities.
//!
//! Every reading here is a path-length (or time) lag: larger means the
//! wavefront reached that receiver later.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{TetraArray, TriangleFace, Vertex};

/// Relative guard below which a reading sum counts as zero.
const AT_INFINITY_GUARD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TdoaUnit {
    Seconds,
    Meters,
}

impl fmt::Display for TdoaUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TdoaUnit::Seconds => "seconds",
            TdoaUnit::Meters => "meters",
        })
    }
}

impl FromStr for TdoaUnit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "s" | "sec" | "seconds" => Ok(TdoaUnit::Seconds),
            "m" | "meters" | "metres" => Ok(TdoaUnit::Meters),
            other => Err(Error::invalid(
                "unit",
                format!("`{other}` is not seconds or meters"),
            )),
        }
    }
}

/// Four arrival readings, indexed by [`Vertex`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TdoaSample {
    values: [f64; 4],
    unit: TdoaUnit,
}

impl TdoaSample {
    pub fn new(values: [f64; 4], unit: TdoaUnit) -> Result<Self> {
        if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidSample(format!(
                "reading at vertex {} is not finite ({v})",
                Vertex::from_index(i).expect("index < 4")
            )));
        }
        Ok(TdoaSample { values, unit })
    }

    pub fn seconds(values: [f64; 4]) -> Result<Self> {
        Self::new(values, TdoaUnit::Seconds)
    }

    pub fn meters(values: [f64; 4]) -> Result<Self> {
        Self::new(values, TdoaUnit::Meters)
    }

    pub fn values(&self) -> [f64; 4] {
        self.values
    }

    pub fn unit(&self) -> TdoaUnit {
        self.unit
    }

    pub fn value(&self, v: Vertex) -> f64 {
        self.values[v.index()]
    }

    /// Readings as path lengths, meters.
    pub fn to_meters(&self, propagation_speed: f64) -> [f64; 4] {
        match self.unit {
            TdoaUnit::Meters => self.values,
            TdoaUnit::Seconds => self.values.map(|t| t * propagation_speed),
        }
    }

    /// Readings as arrival times, seconds.
    pub fn to_seconds(&self, propagation_speed: f64) -> [f64; 4] {
        match self.unit {
            TdoaUnit::Seconds => self.values,
            TdoaUnit::Meters => self.values.map(|m| m / propagation_speed),
        }
    }
}

/// Mean-zero path-length lags, meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormalizedReadings {
    r: [f64; 4],
    /// Smallest raw reading (m), subtracted first.
    pub min_subtracted: f64,
    /// Mean of the min-subtracted readings (m), subtracted second.
    pub mean_offset: f64,
}

impl NormalizedReadings {
    pub fn values(&self) -> [f64; 4] {
        self.r
    }

    pub fn value(&self, v: Vertex) -> f64 {
        self.r[v.index()]
    }

    /// Re-wraps the readings as a meter-valued sample.
    pub fn as_sample(&self) -> TdoaSample {
        TdoaSample {
            values: self.r,
            unit: TdoaUnit::Meters,
        }
    }

    /// True when some reading is larger than the circumradius allows for a
    /// plane wave, which only happens with a curved (near-field) wavefront.
    pub fn exceeds_circumradius(&self, array: &TetraArray) -> bool {
        self.r.iter().any(|r| r.abs() > array.circumradius())
    }
}

/// Converts a sample to meters, subtracts the minimum, then subtracts the
/// mean so the four readings sum to zero.
pub fn normalize(sample: &TdoaSample, array: &TetraArray) -> Result<NormalizedReadings> {
    let raw = sample.to_meters(array.propagation_speed());
    if raw.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidSample(
            "readings overflow after unit conversion".into(),
        ));
    }
    let min = raw.iter().copied().fold(f64::INFINITY, f64::min);
    let shifted = raw.map(|v| v - min);
    let mean = shifted.iter().sum::<f64>() / 4.0;
    Ok(NormalizedReadings {
        r: shifted.map(|v| v - mean),
        min_subtracted: min,
        mean_offset: mean,
    })
}

/// Which of the triangle constraints the readings satisfy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConstraintState {
    Raw,
    /// Readings sum to zero.
    ZeroSum,
    /// Readings sum to zero and their squares sum to `1.5 R²`.
    Scaled,
}

/// Three readings on a triangle face.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TriangleReadings {
    r: [f64; 3],
    state: ConstraintState,
}

impl TriangleReadings {
    pub fn raw(r: [f64; 3]) -> Self {
        TriangleReadings {
            r,
            state: ConstraintState::Raw,
        }
    }

    pub(crate) fn with_state(r: [f64; 3], state: ConstraintState) -> Self {
        TriangleReadings { r, state }
    }

    pub fn values(&self) -> [f64; 3] {
        self.r
    }

    pub fn state(&self) -> ConstraintState {
        self.state
    }
}

/// Recovers the centroid distance `x` from readings `r_k = d_k - x`, where
/// `d_k` is the true distance from the source to vertex `k`:
///
/// `x = (4R² - Σ r_k²) / (2 Σ r_k)`
///
/// TDOA alone never supplies readings of this form; this is a check on the
/// geometry rather than part of the direction solve.
pub fn recover_distance_tetra(r_relative: &[f64; 4], array: &TetraArray) -> Result<f64> {
    let r = array.circumradius();
    recover_distance(r_relative, 4.0 * r * r, r)
}

/// Triangle counterpart of [`recover_distance_tetra`]:
/// `x = (3R² - Σ r_k²) / (2 Σ r_k)`, with `3R² = l²`.
pub fn recover_distance_triangle(r_relative: &[f64; 3], face: &TriangleFace) -> Result<f64> {
    let r = face.circumradius();
    recover_distance(r_relative, 3.0 * r * r, r)
}

fn recover_distance(r: &[f64], sum_sq_radius: f64, radius: f64) -> Result<f64> {
    if r.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidSample(
            "relative distances must be finite".into(),
        ));
    }
    let sum: f64 = r.iter().sum();
    if sum.abs() < AT_INFINITY_GUARD * radius {
        return Err(Error::AtInfinity { sum });
    }
    let sum_sq: f64 = r.iter().map(|v| v * v).sum();
    Ok((sum_sq_radius - sum_sq) / (2.0 * sum))
}
