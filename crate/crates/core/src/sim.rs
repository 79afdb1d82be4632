//! Exact forward models: spherical wavefronts from a point source at finite
//! range, and plane waves from a source at infinity.
//!
//! No noise is added. Near-field distortion in the spherical model comes
//! purely from the geometry.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::angles::direction;
use crate::error::{Error, Result};
use crate::geometry::TetraArray;
use crate::normalize::TdoaSample;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceRange {
    /// Distance from the array centroid, meters.
    Finite(f64),
    AtInfinity,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceSpec {
    pub bearing_deg: f64,
    pub elevation_deg: f64,
    pub range: SourceRange,
}

impl SourceSpec {
    pub fn at_range(bearing_deg: f64, elevation_deg: f64, range_m: f64) -> Self {
        SourceSpec {
            bearing_deg,
            elevation_deg,
            range: SourceRange::Finite(range_m),
        }
    }

    pub fn far_field(bearing_deg: f64, elevation_deg: f64) -> Self {
        SourceSpec {
            bearing_deg,
            elevation_deg,
            range: SourceRange::AtInfinity,
        }
    }

    /// Unit vector from the array centroid towards the source.
    pub fn direction(&self) -> Vector3<f64> {
        direction(self.bearing_deg, self.elevation_deg)
    }

    /// Source position, or `None` at infinity.
    pub fn position(&self) -> Option<Vector3<f64>> {
        match self.range {
            SourceRange::Finite(r) => Some(self.direction() * r),
            SourceRange::AtInfinity => None,
        }
    }

    fn check_angles(&self) -> Result<()> {
        if !self.bearing_deg.is_finite() {
            return Err(Error::invalid("bearing", "must be finite"));
        }
        if !(self.elevation_deg.is_finite() && self.elevation_deg.abs() <= 90.0) {
            return Err(Error::invalid(
                "elevation",
                format!("must lie in [-90, 90], got {}", self.elevation_deg),
            ));
        }
        Ok(())
    }
}

/// Arrival lags (m) relative to the earliest receiver for a point source.
///
/// `|P - v| - |P|` is evaluated as `(|v|² - 2 P·v) / (|P - v| + |P|)`, which
/// keeps full relative precision at ranges where the direct difference
/// would cancel away the curvature term.
pub fn spherical_lags_m(source: &SourceSpec, array: &TetraArray) -> Result<[f64; 4]> {
    source.check_angles()?;
    let range = match source.range {
        SourceRange::Finite(r) if r.is_finite() && r > 0.0 => r,
        SourceRange::Finite(r) => {
            return Err(Error::invalid(
                "range",
                format!("must be finite and > 0, got {r}"),
            ))
        }
        SourceRange::AtInfinity => {
            return Err(Error::invalid(
                "range",
                "spherical model needs a finite range",
            ))
        }
    };
    let p = source.direction() * range;
    let excess = array
        .vertices()
        .map(|v| (v.norm_squared() - 2.0 * p.dot(&v)) / ((p - v).norm() + range));
    Ok(relative_to_first(excess))
}

/// Arrival lags (m) relative to the earliest receiver for a plane wave:
/// `-u·v_k - min_j(-u·v_j)`.
pub fn plane_lags_m(source: &SourceSpec, array: &TetraArray) -> Result<[f64; 4]> {
    source.check_angles()?;
    if source.range != SourceRange::AtInfinity {
        return Err(Error::invalid(
            "range",
            "plane-wave model needs a source at infinity",
        ));
    }
    let u = source.direction();
    Ok(relative_to_first(array.vertices().map(|v| -u.dot(&v))))
}

/// Spherical-wavefront sample in seconds.
pub fn simulate_spherical(source: &SourceSpec, array: &TetraArray) -> Result<TdoaSample> {
    let lags = spherical_lags_m(source, array)?;
    TdoaSample::seconds(lags.map(|m| m / array.propagation_speed()))
}

/// Plane-wave sample in seconds.
pub fn simulate_plane(source: &SourceSpec, array: &TetraArray) -> Result<TdoaSample> {
    let lags = plane_lags_m(source, array)?;
    TdoaSample::seconds(lags.map(|m| m / array.propagation_speed()))
}

/// Dispatches on the source range.
pub fn simulate(source: &SourceSpec, array: &TetraArray) -> Result<TdoaSample> {
    match source.range {
        SourceRange::Finite(_) => simulate_spherical(source, array),
        SourceRange::AtInfinity => simulate_plane(source, array),
    }
}

fn relative_to_first(values: [f64; 4]) -> [f64; 4] {
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    values.map(|v| v - min)
}
