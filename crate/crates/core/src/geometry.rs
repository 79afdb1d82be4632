//! Regular tetrahedron and equilateral-triangle geometry.
//!
//! The array frame puts the centroid at the origin, vertex `d` on +z and the
//! base face `a, b, c` in the plane `z = -R/3`, where `R` is the
//! circumradius. Seen from above, `a` lies at bearing 90°, `c` at 210° and
//! `b` at 330°.

use std::fmt;
use std::str::FromStr;

use nalgebra::{Vector2, Vector3};
use serde::{Deserialize, Serialize};

use crate::angles::normalize_bearing;
use crate::error::{Error, Result};

/// Receiver position on the tetrahedron.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Vertex {
    A,
    B,
    C,
    D,
}

impl Vertex {
    pub const ALL: [Vertex; 4] = [Vertex::A, Vertex::B, Vertex::C, Vertex::D];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Vertex> {
        Self::ALL.get(i).copied()
    }

    /// The other three vertices, in `a < b < c < d` order.
    pub fn others(self) -> [Vertex; 3] {
        let mut out = [Vertex::A; 3];
        let mut n = 0;
        for v in Self::ALL {
            if v != self {
                out[n] = v;
                n += 1;
            }
        }
        out
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Vertex::A => "a",
            Vertex::B => "b",
            Vertex::C => "c",
            Vertex::D => "d",
        };
        f.write_str(s)
    }
}

impl FromStr for Vertex {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "a" => Ok(Vertex::A),
            "b" => Ok(Vertex::B),
            "c" => Ok(Vertex::C),
            "d" => Ok(Vertex::D),
            other => Err(Error::invalid(
                "vertex",
                format!("`{other}` is not one of a, b, c, d"),
            )),
        }
    }
}

/// A regular tetrahedron of receivers.
#[derive(Debug, Clone, PartialEq)]
pub struct TetraArray {
    edge_length: f64,
    circumradius: f64,
    vertices: [Vector3<f64>; 4],
    propagation_speed: f64,
}

impl TetraArray {
    /// Builds the array from its edge length (m) and the propagation speed
    /// of the signal (m/s).
    pub fn new(edge_length: f64, propagation_speed: f64) -> Result<Self> {
        if !(edge_length.is_finite() && edge_length > 0.0) {
            return Err(Error::invalid(
                "edge_length",
                format!("must be finite and > 0, got {edge_length}"),
            ));
        }
        if !(propagation_speed.is_finite() && propagation_speed > 0.0) {
            return Err(Error::invalid(
                "propagation_speed",
                format!("must be finite and > 0, got {propagation_speed}"),
            ));
        }

        let r = 6f64.sqrt() / 4.0 * edge_length;
        let t = (2.0 * r * r).sqrt();
        let s6 = 6f64.sqrt();
        let vertices = [
            Vector3::new(0.0, 2.0 * t / 3.0, -r / 3.0),
            Vector3::new(s6 * r / 3.0, -t / 3.0, -r / 3.0),
            Vector3::new(-s6 * r / 3.0, -t / 3.0, -r / 3.0),
            Vector3::new(0.0, 0.0, r),
        ];

        Ok(TetraArray {
            edge_length,
            circumradius: r,
            vertices,
            propagation_speed,
        })
    }

    pub fn edge_length(&self) -> f64 {
        self.edge_length
    }

    pub fn circumradius(&self) -> f64 {
        self.circumradius
    }

    pub fn propagation_speed(&self) -> f64 {
        self.propagation_speed
    }

    pub fn vertices(&self) -> &[Vector3<f64>; 4] {
        &self.vertices
    }

    pub fn vertex(&self, v: Vertex) -> Vector3<f64> {
        self.vertices[v.index()]
    }

    /// Unit vector from the centroid towards `v`.
    pub fn axis(&self, v: Vertex) -> Vector3<f64> {
        self.vertices[v.index()] / self.circumradius
    }

    /// The face opposite `excluded`, expressed in its own plane.
    ///
    /// The face frame is right-handed with its normal pointing towards the
    /// excluded vertex, so "above the face" means "on the excluded vertex's
    /// side". For the base face (`excluded = d`) the frame coincides with the
    /// array frame.
    pub fn face(&self, excluded: Vertex) -> TriangleFace {
        let members = excluded.others();
        let normal = self.axis(excluded);
        let x = Vector3::x();
        let e1 = (x - normal * x.dot(&normal)).normalize();
        let e2 = normal.cross(&e1);
        let pts = members.map(|m| self.vertex(m));
        let centroid = (pts[0] + pts[1] + pts[2]) / 3.0;
        let local = pts.map(|p| {
            let q = p - centroid;
            Vector2::new(q.dot(&e1), q.dot(&e2))
        });

        TriangleFace::from_parts(
            self.edge_length,
            local,
            Some(members),
            FaceFrame {
                centroid,
                e1,
                e2,
                normal,
            },
        )
    }

    /// Receiver enable window for gating: the time a wavefront needs to
    /// cross the circumscribed sphere, which bounds the arrival spread.
    /// Seconds.
    pub fn gating_window(&self) -> f64 {
        2.0 * self.circumradius / self.propagation_speed
    }
}

/// Placement of a face plane inside the array frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FaceFrame {
    pub centroid: Vector3<f64>,
    pub e1: Vector3<f64>,
    pub e2: Vector3<f64>,
    pub normal: Vector3<f64>,
}

impl FaceFrame {
    /// The array frame itself: face in the xy-plane, normal along +z.
    pub fn canonical() -> Self {
        FaceFrame {
            centroid: Vector3::zeros(),
            e1: Vector3::x(),
            e2: Vector3::y(),
            normal: Vector3::z(),
        }
    }

    /// Maps an in-plane bearing and out-of-plane elevation (radians) to a
    /// unit vector in the array frame.
    pub fn to_array(&self, bearing_rad: f64, elevation_rad: f64) -> Vector3<f64> {
        let (sb, cb) = bearing_rad.sin_cos();
        let (se, ce) = elevation_rad.sin_cos();
        (self.e1 * cb + self.e2 * sb) * ce + self.normal * se
    }
}

/// An equilateral triangle of receivers, in its own plane with the
/// centroid at the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleFace {
    edge_length: f64,
    circumradius: f64,
    vertices: [Vector2<f64>; 3],
    vertex_azimuths_deg: [f64; 3],
    members: Option<[Vertex; 3]>,
    frame: FaceFrame,
}

impl TriangleFace {
    /// A free-standing triangle in the xy-plane with vertices at azimuths
    /// 90°, 210° and 330°, matching the base face of a [`TetraArray`].
    pub fn equilateral(edge_length: f64) -> Result<Self> {
        if !(edge_length.is_finite() && edge_length > 0.0) {
            return Err(Error::invalid(
                "edge_length",
                format!("must be finite and > 0, got {edge_length}"),
            ));
        }
        let r = edge_length / 3f64.sqrt();
        let vertices = [90.0f64, 210.0, 330.0].map(|az| {
            let (s, c) = az.to_radians().sin_cos();
            Vector2::new(r * c, r * s)
        });
        Ok(Self::from_parts(
            edge_length,
            vertices,
            None,
            FaceFrame::canonical(),
        ))
    }

    fn from_parts(
        edge_length: f64,
        vertices: [Vector2<f64>; 3],
        members: Option<[Vertex; 3]>,
        frame: FaceFrame,
    ) -> Self {
        let vertex_azimuths_deg = vertices.map(|p| normalize_bearing(p.y.atan2(p.x).to_degrees()));
        TriangleFace {
            edge_length,
            circumradius: edge_length / 3f64.sqrt(),
            vertices,
            vertex_azimuths_deg,
            members,
            frame,
        }
    }

    pub fn edge_length(&self) -> f64 {
        self.edge_length
    }

    pub fn circumradius(&self) -> f64 {
        self.circumradius
    }

    pub fn vertices(&self) -> &[Vector2<f64>; 3] {
        &self.vertices
    }

    /// In-plane directions of the vertices seen from the centroid, degrees.
    pub fn vertex_azimuths_deg(&self) -> [f64; 3] {
        self.vertex_azimuths_deg
    }

    /// Which array vertices make up this face, if it was cut from a tetrahedron.
    pub fn members(&self) -> Option<[Vertex; 3]> {
        self.members
    }

    pub fn frame(&self) -> &FaceFrame {
        &self.frame
    }

    /// Vertex positions in the array frame.
    pub fn vertices_3d(&self) -> [Vector3<f64>; 3] {
        let f = &self.frame;
        self.vertices.map(|p| f.centroid + f.e1 * p.x + f.e2 * p.y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn rejects_non_positive_parameters() {
        assert!(TetraArray::new(0.0, 1.0).is_err());
        assert!(TetraArray::new(-1.0, 1.0).is_err());
        assert!(TetraArray::new(1.0, 0.0).is_err());
        assert!(TetraArray::new(f64::NAN, 1.0).is_err());
        assert!(TetraArray::new(1.0, f64::INFINITY).is_err());
        assert!(TriangleFace::equilateral(0.0).is_err());
    }

    #[test]
    fn half_meter_edge_circumradius() {
        let a = TetraArray::new(0.5, 3e8).unwrap();
        assert_relative_eq!(a.circumradius(), 6f64.sqrt() / 8.0, max_relative = 1e-15);
        assert_relative_eq!(a.circumradius(), 0.306_186, epsilon = 1e-6);
    }

    #[test]
    fn unit_radius_puts_d_on_z() {
        let a = TetraArray::new(4.0 / 6f64.sqrt(), 1.0).unwrap();
        let d = a.vertex(Vertex::D);
        assert_relative_eq!(d.x, 0.0);
        assert_relative_eq!(d.y, 0.0);
        assert_relative_eq!(d.z, 1.0, max_relative = 1e-15);
    }

    #[test]
    fn unit_edge_sum_of_squares() {
        let a = TetraArray::new(1.0, 1.0).unwrap();
        let s: f64 = a.vertices().iter().map(|v| v.norm_squared()).sum();
        assert_relative_eq!(s, 1.5, max_relative = 1e-14);
    }

    #[test]
    fn vertices_match_closed_form_table() {
        let a = TetraArray::new(4.0 / 6f64.sqrt(), 1.0).unwrap();
        let r = a.circumradius();
        let t = (2.0 * r * r).sqrt();
        let expect = [
            [0.0, 2.0 * t / 3.0, -r / 3.0],
            [6f64.sqrt() * r / 3.0, -t / 3.0, -r / 3.0],
            [-(6f64.sqrt()) * r / 3.0, -t / 3.0, -r / 3.0],
            [0.0, 0.0, r],
        ];
        for (v, e) in a.vertices().iter().zip(expect) {
            for i in 0..3 {
                assert_relative_eq!(v[i], e[i], epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn base_face_radius_and_azimuths() {
        // Oracle: project the base vertices onto the xy-plane directly.
        let a = TetraArray::new(4.0 / 6f64.sqrt(), 1.0).unwrap();
        let face = a.face(Vertex::D);
        let expect_r = (1.0f64 - 1.0 / 9.0).sqrt();
        assert_relative_eq!(expect_r, 2.0 * 2f64.sqrt() / 3.0, max_relative = 1e-15);
        assert_relative_eq!(face.circumradius(), expect_r, max_relative = 1e-14);
        for (p, v) in face
            .vertices()
            .iter()
            .zip([Vertex::A, Vertex::B, Vertex::C])
        {
            let q = a.vertex(v);
            assert_relative_eq!(p.norm(), q.x.hypot(q.y), max_relative = 1e-14);
            assert_relative_eq!(p.x, q.x, epsilon = 1e-14);
            assert_relative_eq!(p.y, q.y, epsilon = 1e-14);
        }
        let az = face.vertex_azimuths_deg();
        assert_relative_eq!(az[0], 90.0, epsilon = 1e-12);
        assert_relative_eq!(az[1], 330.0, epsilon = 1e-12);
        assert_relative_eq!(az[2], 210.0, epsilon = 1e-12);
        assert_eq!(face.members(), Some([Vertex::A, Vertex::B, Vertex::C]));
    }

    #[test]
    fn every_face_is_regular_and_centred() {
        let a = TetraArray::new(0.5, 1.0).unwrap();
        for v in Vertex::ALL {
            let f = a.face(v);
            let p = f.vertices();
            for (i, j) in [(0, 1), (1, 2), (0, 2)] {
                assert_relative_eq!((p[i] - p[j]).norm(), 0.5, max_relative = 1e-12);
            }
            let c = (p[0] + p[1] + p[2]) / 3.0;
            assert!(c.norm() < 1e-15);
            let az = f.vertex_azimuths_deg();
            let mut sorted = az;
            sorted.sort_by(f64::total_cmp);
            assert_relative_eq!(sorted[1] - sorted[0], 120.0, epsilon = 1e-9);
            assert_relative_eq!(sorted[2] - sorted[1], 120.0, epsilon = 1e-9);
            // 3D placement reproduces the array vertices
            for (q, m) in f.vertices_3d().iter().zip(f.members().unwrap()) {
                assert!((q - a.vertex(m)).norm() < 1e-14);
            }
            // frame is right-handed and orthonormal
            let fr = f.frame();
            assert_relative_eq!(fr.e1.cross(&fr.e2).dot(&fr.normal), 1.0, epsilon = 1e-14);
            assert!(fr.e1.dot(&fr.normal).abs() < 1e-15);
        }
    }

    #[test]
    fn gating_window_examples() {
        let rf = TetraArray::new(0.5, 3e8).unwrap();
        assert_relative_eq!(
            rf.gating_window(),
            2.0 * (6f64.sqrt() / 8.0) / 3e8,
            max_relative = 1e-14
        );
        assert_relative_eq!(rf.gating_window(), 2.0412e-9, max_relative = 1e-4);
        let water = TetraArray::new(0.5, 1500.0).unwrap();
        assert_relative_eq!(water.gating_window(), 4.0825e-4, max_relative = 1e-4);
        let a = TetraArray::new(2.0, 7.0).unwrap();
        assert_eq!(a.gating_window(), 2.0 * a.circumradius() / 7.0);
    }

    #[test]
    fn vertex_parsing() {
        assert_eq!("D".parse::<Vertex>().unwrap(), Vertex::D);
        assert_eq!(" b ".parse::<Vertex>().unwrap(), Vertex::B);
        assert!("e".parse::<Vertex>().is_err());
        assert_eq!(Vertex::B.others(), [Vertex::A, Vertex::C, Vertex::D]);
        assert_eq!(Vertex::from_index(3), Some(Vertex::D));
        assert_eq!(Vertex::from_index(4), None);
    }
}
