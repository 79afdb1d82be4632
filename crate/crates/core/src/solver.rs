//! Bearing and elevation from normalized TDOA readings.
//!
//! The full solve runs in a fixed sequence of direct steps:
//!
//! 1. normalize the four readings to mean-zero lags;
//! 2. read, at every vertex, the angle of the source above the plane normal
//!    to that vertex's centroid line (`asin(s_k / R)` with `s_k = -r_k`);
//! 3. pick the vertex with the shallowest such angle; the tetrahedron's
//!    symmetry guarantees one within `±acos(1/3)/2 ≈ 35.26°`;
//! 4. take the bearing from the face opposite that vertex (mean removal,
//!    projection and scaling of its three readings, then fusion of the
//!    three cosine readings with `atan2`);
//! 5. rotate the face-local (bearing, elevation) pair back into the array
//!    frame.
//!
//! The method is exact for a plane wave; with a curved wavefront the
//! residual error falls off as `1/range`.

use serde::Serialize;

use crate::angles::{bearing_elevation, normalize_bearing};
use crate::error::{Error, Result};
use crate::geometry::{TetraArray, TriangleFace, Vertex};
use crate::normalize::{
    normalize, ConstraintState, NormalizedReadings, TdoaSample, TriangleReadings,
};

/// Degeneracy guard on the projected triangle readings, relative to the
/// face circumradius.
const DEGENERATE_GUARD: f64 = 1e-12;

/// A scale factor this close to 1 is rounding noise on an in-plane source.
/// `acos(1/S)` has infinite slope at `S = 1`, so a few ulps of noise would
/// otherwise surface as ~1e-6° of spurious elevation.
const IN_PLANE_SLACK: f64 = 16.0 * f64::EPSILON;

/// Scale factors below `1 - NEAR_FIELD_SLACK` are a near-field artefact and
/// flag the result as clamped.
const NEAR_FIELD_SLACK: f64 = 1e-9;

/// Below this horizontal magnitude the solved direction is treated as vertical.
const VERTICAL_GUARD: f64 = 1e-10;

/// Half the tetrahedron dihedral angle, `acos(1/3)/2`, in degrees. In the
/// far field at least one vertex always reads within this angle.
pub fn best_vertex_bound_deg() -> f64 {
    (1.0f64 / 3.0).acos().to_degrees() / 2.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveMode {
    FullTetra,
    DegradedTriangle,
}

/// Out-of-band knowledge of which side of the face plane the source is on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SignHint {
    Above,
    Below,
}

impl std::str::FromStr for SignHint {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "above" | "up" | "+" => Ok(SignHint::Above),
            "below" | "down" | "-" => Ok(SignHint::Below),
            other => Err(Error::invalid(
                "sign_hint",
                format!("`{other}` is not above or below"),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DirectionEstimate {
    /// Array-frame bearing, `[0, 360)`.
    pub bearing_deg: f64,
    /// Array-frame elevation, `[-90, 90]`.
    pub elevation_deg: f64,
    /// Elevation reference. In full mode the vertex whose normal plane was
    /// used; in degraded mode the vertex opposite the face, when known.
    pub chosen_vertex: Option<Vertex>,
    /// Elevation relative to the reference plane (the face opposite
    /// `chosen_vertex`), signed towards that vertex.
    pub local_elevation_deg: f64,
    pub mode: SolveMode,
    /// An arccos argument or the triangle scale factor had to be clamped.
    pub clamped: bool,
    /// Degraded mode without a sign hint: the source may equally be mirrored
    /// through the face plane. The reported elevation takes the "above" branch.
    pub ambiguous: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VertexAngleReading {
    pub vertex: Vertex,
    /// Angle of the source above the plane through the centroid normal to
    /// this vertex's centroid line; positive on the vertex's side.
    pub angle_to_plane_deg: f64,
    pub clamped: bool,
}

/// Per-vertex elevation readings, `90° - acos(s_k / R)` with `s_k = -r_k`.
///
/// The nearest vertex has the smallest lag, hence the largest `s_k`. Any
/// `|s_k / R| > 1` (only possible with a curved wavefront) is clamped and
/// flagged.
pub fn vertex_angles(readings: &NormalizedReadings, array: &TetraArray) -> [VertexAngleReading; 4] {
    let r = array.circumradius();
    Vertex::ALL.map(|v| {
        let ratio = -readings.value(v) / r;
        let clamped = ratio.abs() > 1.0;
        // 90 - acos(x) == asin(x); asin keeps full precision near zero
        let angle = ratio.clamp(-1.0, 1.0).asin().to_degrees();
        VertexAngleReading {
            vertex: v,
            angle_to_plane_deg: angle,
            clamped,
        }
    })
}

/// The vertex whose reading is closest to its normal plane. Ties go to the
/// earliest vertex in `a, b, c, d` order.
pub fn select_best_vertex(angles: &[VertexAngleReading; 4]) -> Vertex {
    let mut best = angles[0];
    for a in &angles[1..] {
        if a.angle_to_plane_deg.abs() < best.angle_to_plane_deg.abs() {
            best = *a;
        }
    }
    best.vertex
}

/// Triangle readings after preparation, plus the scale factor `S` that
/// took the projected readings to the constraint circle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PreparedTriangle {
    pub readings: TriangleReadings,
    pub scale_factor: f64,
}

/// Prepares three face readings for bearing extraction.
///
/// Subtracts the minimum, then the mean (the projection
/// `Q = P - (P·N)N` with `N = (1,1,1)/√3`), then scales to
/// `O = √(1.5 R²) · Q / ‖Q‖` so that `Σ O_k = 0` and `Σ O_k² = 1.5 R²`,
/// with `R` the face circumradius. Returns `O` and `S = √(1.5 R²) / ‖Q‖`.
///
/// The preparation is sign-agnostic; [`triangle_bearing`] reads the result
/// as path advance (larger towards the source), so callers holding arrival
/// lags negate them first.
pub fn prepare_triangle(raw: [f64; 3], face: &TriangleFace) -> Result<PreparedTriangle> {
    if raw.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidSample(
            "triangle readings must be finite".into(),
        ));
    }
    let r = face.circumradius();
    let min = raw.iter().copied().fold(f64::INFINITY, f64::min);
    let shifted = raw.map(|v| v - min);
    let mean = shifted.iter().sum::<f64>() / 3.0;
    let q = shifted.map(|v| v - mean);
    let q_norm = q.iter().map(|v| v * v).sum::<f64>().sqrt();
    if q_norm < DEGENERATE_GUARD * r {
        return Err(Error::DegenerateReadings);
    }
    let target = (1.5 * r * r).sqrt();
    let scale = target / q_norm;
    let o = q.map(|v| v * scale);
    Ok(PreparedTriangle {
        readings: TriangleReadings::with_state(o, ConstraintState::Scaled),
        scale_factor: scale,
    })
}

/// In-plane bearing, degrees in `[0, 360)`, fused from the three prepared
/// readings: `atan2(Σ r_k sin az_k, Σ r_k cos az_k)`.
///
/// The bearing is the direction of `Σ r_k w_k` where `w_k` are the vertex
/// positions, so it does not depend on how the face's basis is chosen.
pub fn triangle_bearing(prepared: &TriangleReadings, face: &TriangleFace) -> f64 {
    debug_assert_ne!(prepared.state(), ConstraintState::Raw);
    let (mut sy, mut sx) = (0.0, 0.0);
    for (r, az) in prepared.values().iter().zip(face.vertex_azimuths_deg()) {
        let (s, c) = az.to_radians().sin_cos();
        sy += r * s;
        sx += r * c;
    }
    normalize_bearing(sy.atan2(sx).to_degrees())
}

/// Per-vertex bearing readings `acos(r_k / R)`, degrees: the angle between
/// the source and each vertex direction, without the side it falls on.
/// Diagnostic only; [`triangle_bearing`] is the fused estimate.
pub fn vertex_bearing_angles(prepared: &TriangleReadings, face: &TriangleFace) -> [f64; 3] {
    let r = face.circumradius();
    prepared
        .values()
        .map(|v| (v / r).clamp(-1.0, 1.0).acos().to_degrees())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TriangleElevation {
    /// Unsigned angle between the source and the face plane.
    pub magnitude_deg: f64,
    pub clamped: bool,
}

/// Unsigned elevation above the face plane from the preparation scale
/// factor: `acos(1/S)`.
///
/// A plane wave at angle `θ` to the face gives `Σ r² = 1.5 R² cos² θ` before
/// scaling, hence `S = 1 / cos θ`. `S < 1` only arises from wavefront
/// curvature; the elevation is then taken as 0 and flagged when the
/// shortfall exceeds rounding.
pub fn triangle_elevation(scale_factor: f64) -> TriangleElevation {
    if scale_factor <= 1.0 + IN_PLANE_SLACK {
        return TriangleElevation {
            magnitude_deg: 0.0,
            clamped: scale_factor < 1.0 - NEAR_FIELD_SLACK,
        };
    }
    TriangleElevation {
        magnitude_deg: (1.0 / scale_factor).clamp(0.0, 1.0).acos().to_degrees(),
        clamped: false,
    }
}

/// Full four-receiver solve.
pub fn solve_full(sample: &TdoaSample, array: &TetraArray) -> Result<DirectionEstimate> {
    let readings = normalize(sample, array)?;
    let angles = vertex_angles(&readings, array);
    let chosen = select_best_vertex(&angles);
    let clamped = angles.iter().any(|a| a.clamped);
    let local_elevation = angles[chosen.index()].angle_to_plane_deg;

    let face = array.face(chosen);
    let advance = chosen.others().map(|m| -readings.value(m));

    let direction = match prepare_triangle(advance, &face) {
        Ok(prepared) => {
            let bearing = triangle_bearing(&prepared.readings, &face);
            face.frame()
                .to_array(bearing.to_radians(), local_elevation.to_radians())
        }
        // Nothing in the face plane: the source sits on the chosen vertex axis.
        Err(Error::DegenerateReadings) if local_elevation != 0.0 => {
            array.axis(chosen) * local_elevation.signum()
        }
        Err(e) => return Err(e),
    };

    finish(
        direction,
        Some(chosen),
        local_elevation,
        SolveMode::FullTetra,
        clamped,
        false,
    )
}

/// Three-receiver solve when one antenna is shielded.
///
/// `lags` are the arrival lags (meters) at the face's vertices, in the
/// face's vertex order. The elevation magnitude comes from the preparation
/// scale factor; its sign comes from `sign_hint` when given. Without a hint
/// the "above" branch (towards the shielded vertex) is reported and the
/// estimate is flagged ambiguous unless the source is in the face plane.
pub fn solve_degraded(
    lags: [f64; 3],
    face: &TriangleFace,
    sign_hint: Option<SignHint>,
) -> Result<DirectionEstimate> {
    let advance = lags.map(|v| -v);
    let prepared = prepare_triangle(advance, face)?;
    let bearing = triangle_bearing(&prepared.readings, face);
    let elevation = triangle_elevation(prepared.scale_factor);
    let magnitude = elevation.magnitude_deg;

    let (local_elevation, ambiguous) = match sign_hint {
        Some(SignHint::Above) => (magnitude, false),
        Some(SignHint::Below) => (-magnitude, false),
        None => (magnitude, magnitude != 0.0),
    };

    let direction = face
        .frame()
        .to_array(bearing.to_radians(), local_elevation.to_radians());
    let excluded = face.members().map(|m| {
        Vertex::ALL
            .into_iter()
            .find(|v| !m.contains(v))
            .expect("a face leaves one vertex out")
    });

    finish(
        direction,
        excluded,
        local_elevation,
        SolveMode::DegradedTriangle,
        elevation.clamped,
        ambiguous,
    )
}

fn finish(
    direction: nalgebra::Vector3<f64>,
    chosen_vertex: Option<Vertex>,
    local_elevation_deg: f64,
    mode: SolveMode,
    clamped: bool,
    ambiguous: bool,
) -> Result<DirectionEstimate> {
    let (bearing_deg, elevation_deg) = bearing_elevation(&direction);
    if direction.x.hypot(direction.y) < VERTICAL_GUARD * direction.norm() {
        return Err(Error::BearingUndefined {
            elevation_deg: 90.0f64.copysign(direction.z),
            chosen_vertex,
        });
    }
    Ok(DirectionEstimate {
        bearing_deg,
        elevation_deg,
        chosen_vertex,
        local_elevation_deg,
        mode,
        clamped,
        ambiguous,
    })
}

/// Slant range to a source at a known height difference:
/// `|h / sin(elevation)|`.
pub fn range_from_altitude(height_difference: f64, elevation_deg: f64) -> Result<f64> {
    let s = elevation_deg.to_radians().sin();
    if s.abs() < 1e-12 {
        return Err(Error::Coplanar { elevation_deg });
    }
    if !height_difference.is_finite() {
        return Err(Error::invalid("height_difference", "must be finite"));
    }
    Ok((height_difference / s).abs())
}
