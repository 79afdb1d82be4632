//! Small angle helpers shared across modules.

use nalgebra::Vector3;

/// Wraps an angle in degrees into `[0, 360)`.
pub fn normalize_bearing(deg: f64) -> f64 {
    let b = deg.rem_euclid(360.0);
    // rem_euclid can round up to exactly 360 for tiny negative inputs
    if b >= 360.0 {
        0.0
    } else {
        b
    }
}

/// Wraps a signed angular difference in degrees into `(-180, 180]`.
pub fn wrap_signed(deg: f64) -> f64 {
    let w = (deg + 180.0).rem_euclid(360.0) - 180.0;
    if w <= -180.0 {
        w + 360.0
    } else {
        w
    }
}

/// Unit vector for a bearing / elevation pair in the canonical frame.
pub fn direction(bearing_deg: f64, elevation_deg: f64) -> Vector3<f64> {
    let (sb, cb) = bearing_deg.to_radians().sin_cos();
    let (se, ce) = elevation_deg.to_radians().sin_cos();
    Vector3::new(ce * cb, ce * sb, se)
}

/// Bearing and elevation (degrees) of a non-zero vector. The bearing of a
/// vertical vector is reported as 0.
pub fn bearing_elevation(v: &Vector3<f64>) -> (f64, f64) {
    let horizontal = v.x.hypot(v.y);
    let bearing = normalize_bearing(v.y.atan2(v.x).to_degrees());
    let elevation = v.z.atan2(horizontal).to_degrees();
    (bearing, elevation)
}
