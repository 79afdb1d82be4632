mod common;

use nalgebra::{Rotation3, Vector3};
use proptest::prelude::*;
use tetradf::angles::direction;
use tetradf::geometry::{TetraArray, TriangleFace, Vertex};
use tetradf::normalize::{
    normalize, recover_distance_tetra, recover_distance_triangle, TdoaSample,
};
use tetradf::sim::{simulate_plane, simulate_spherical, SourceSpec};
use tetradf::solver::{
    best_vertex_bound_deg, prepare_triangle, select_best_vertex, solve_full, triangle_elevation,
    vertex_angles, VertexAngleReading,
};

use common::{angle_diff, distance_excess};

fn array() -> TetraArray {
    TetraArray::new(0.5, 299_792_458.0).unwrap()
}

fn unit_vector() -> impl Strategy<Value = Vector3<f64>> {
    (-1.0f64..=1.0, 0.0f64..std::f64::consts::TAU).prop_map(|(z, phi)| {
        let h = (1.0 - z * z).sqrt();
        Vector3::new(h * phi.cos(), h * phi.sin(), z)
    })
}

fn sample_from(values: [f64; 4]) -> TdoaSample {
    TdoaSample::meters(values).unwrap()
}

proptest! {
    #[test]
    fn sum_of_squares_identity(l in 1e-3f64..1e3) {
        let a = TetraArray::new(l, 1.0).unwrap();
        let r = a.circumradius();
        prop_assert!(((4.0 * r * r) - 1.5 * l * l).abs() <= 1e-12 * 1.5 * l * l);
        let s: f64 = a.vertices().iter().map(|v| v.norm_squared()).sum();
        prop_assert!((s - 1.5 * l * l).abs() <= 1e-12 * 1.5 * l * l);
    }

    #[test]
    fn face_sum_of_squares_identity(l in 1e-3f64..1e3) {
        let a = TetraArray::new(l, 1.0).unwrap();
        for v in Vertex::ALL {
            let f = a.face(v);
            let s: f64 = f.vertices().iter().map(|p| p.norm_squared()).sum();
            prop_assert!((s - l * l).abs() <= 1e-12 * l * l);
            // face centroid lies opposite its excluded vertex, at -v/3
            let c = f.frame().centroid;
            prop_assert!((c + a.vertex(v) / 3.0).norm() <= 1e-12 * l);
        }
    }

    #[test]
    fn normalize_is_idempotent(v in prop::array::uniform4(-10.0f64..10.0)) {
        let a = array();
        let once = normalize(&sample_from(v), &a).unwrap();
        let twice = normalize(&once.as_sample(), &a).unwrap();
        for (x, y) in once.values().iter().zip(twice.values()) {
            prop_assert!((x - y).abs() <= 1e-12);
        }
        prop_assert!(once.values().iter().sum::<f64>().abs() < 1e-9 * a.circumradius());
    }

    #[test]
    fn normalize_ignores_common_offset(v in prop::array::uniform4(-1.0f64..1.0), k in -1e3f64..1e3) {
        let a = array();
        let base = normalize(&sample_from(v), &a).unwrap();
        let moved = normalize(&sample_from(v.map(|x| x + k)), &a).unwrap();
        for (x, y) in base.values().iter().zip(moved.values()) {
            prop_assert!((x - y).abs() <= 1e-12 * (1.0 + k.abs()));
        }
    }

    #[test]
    fn tetra_distance_roundtrip(u in unit_vector(), log_x in (0.1f64).ln()..(1e6f64).ln()) {
        let a = array();
        let x = log_x.exp() * a.circumradius();
        let p = u * x;
        let r = a.vertices().map(|v| distance_excess(&p, &v));
        let got = recover_distance_tetra(&r, &a).unwrap();
        prop_assert!(((got - x) / x).abs() < 1e-9, "x = {x}, got {got}");
    }

    #[test]
    fn triangle_distance_forms_agree(r in prop::array::uniform3(-1.0f64..1.0), l in 0.1f64..10.0) {
        let face = TriangleFace::equilateral(l).unwrap();
        prop_assume!(r.iter().sum::<f64>().abs() > 1e-6);
        let got = recover_distance_triangle(&r, &face).unwrap();
        let sum: f64 = r.iter().sum();
        let via_edge = (l * l - r.iter().map(|v| v * v).sum::<f64>()) / (2.0 * sum);
        prop_assert!((got - via_edge).abs() <= 1e-12 * got.abs().max(via_edge.abs()).max(1.0));
    }

    #[test]
    fn far_field_solve_is_exact(u in unit_vector()) {
        let a = array();
        let lags = a.vertices().map(|v| -u.dot(&v));
        let sample = sample_from(lags);
        let (b, e) = common::bearing_elevation_of(&u);
        prop_assume!(e.abs() < 89.9);
        let est = solve_full(&sample, &a).unwrap();
        prop_assert!(est.local_elevation_deg.abs() <= best_vertex_bound_deg() + 1e-9);
        prop_assert!(angle_diff(est.bearing_deg, b) < 1e-6);
        prop_assert!((est.elevation_deg - e).abs() < 1e-6);
        prop_assert!(!est.clamped);
    }

    #[test]
    fn rotating_source_by_120_rotates_bearing(
        b in 0.0f64..360.0,
        e in -35.0f64..35.0,
        log_range in 0.0f64..(1e4f64).ln(),
    ) {
        let a = array();
        let range = log_range.exp();
        let s0 = simulate_spherical(&SourceSpec::at_range(b, e, range), &a).unwrap();
        let s1 = simulate_spherical(&SourceSpec::at_range(b + 120.0, e, range), &a).unwrap();
        // +120° about z carries a → c → b → a
        let (v0, v1) = (s0.values(), s1.values());
        for (from, to) in [(0, 2), (2, 1), (1, 0), (3, 3)] {
            prop_assert!((v0[from] - v1[to]).abs() <= 1e-12 * a.gating_window());
        }
        let e0 = solve_full(&s0, &a).unwrap();
        let e1 = solve_full(&s1, &a).unwrap();
        prop_assert!(angle_diff(e1.bearing_deg, e0.bearing_deg + 120.0) < 1e-9);
        prop_assert!((e1.elevation_deg - e0.elevation_deg).abs() < 1e-9);
    }

    #[test]
    fn best_vertex_ignores_reading_scale(u in unit_vector(), lambda in 0.05f64..1.0) {
        let a = array();
        let readings = normalize(&sample_from(a.vertices().map(|v| -u.dot(&v))), &a).unwrap();
        let scaled = normalize(&sample_from(readings.values().map(|r| r * lambda)), &a).unwrap();
        let base: [VertexAngleReading; 4] = vertex_angles(&readings, &a);
        let shrunk = vertex_angles(&scaled, &a);
        prop_assume!(base.iter().chain(shrunk.iter()).all(|r| !r.clamped));
        // near-ties can legitimately flip under rounding
        let mut mags: Vec<f64> = base.iter().map(|r| r.angle_to_plane_deg.abs()).collect();
        mags.sort_by(f64::total_cmp);
        prop_assume!(mags[1] - mags[0] > 1e-9);
        prop_assert_eq!(select_best_vertex(&base), select_best_vertex(&shrunk));
    }

    #[test]
    fn prepared_triangle_constraints(raw in prop::array::uniform3(-100.0f64..100.0), l in 0.01f64..10.0) {
        let face = TriangleFace::equilateral(l).unwrap();
        let r = face.circumradius();
        match prepare_triangle(raw, &face) {
            Ok(p) => {
                let o = p.readings.values();
                prop_assert!(o.iter().sum::<f64>().abs() <= 1e-9 * r);
                let sq: f64 = o.iter().map(|v| v * v).sum();
                prop_assert!((sq - 1.5 * r * r).abs() <= 1e-9 * 1.5 * r * r);
                prop_assert!(p.scale_factor > 0.0);
            }
            Err(e) => prop_assert!(e.is_degenerate()),
        }
    }

    #[test]
    fn triangle_elevation_inverts_plane_wave(b in 0.0f64..360.0, e in 0.0f64..89.0) {
        let face = TriangleFace::equilateral(0.5).unwrap();
        let u = direction(b, e);
        let advance = face.vertices_3d().map(|v| u.dot(&v));
        let p = prepare_triangle(advance, &face).unwrap();
        let got = triangle_elevation(p.scale_factor);
        prop_assert!((got.magnitude_deg - e).abs() < 1e-6, "{e} -> {}", got.magnitude_deg);
        prop_assert!(!got.clamped);
    }
}

#[test]
fn plane_and_spherical_agree_in_the_far_field() {
    let a = array();
    for b in (0..360).step_by(30) {
        for e in [-30.0, 0.0, 25.0] {
            let b = b as f64;
            let far = solve_full(
                &simulate_plane(&SourceSpec::far_field(b, e), &a).unwrap(),
                &a,
            )
            .unwrap();
            let near = solve_full(
                &simulate_spherical(&SourceSpec::at_range(b, e, 1e9), &a).unwrap(),
                &a,
            )
            .unwrap();
            assert!(angle_diff(far.bearing_deg, near.bearing_deg) < 1e-6);
            assert!((far.elevation_deg - near.elevation_deg).abs() < 1e-6);
        }
    }
}

#[test]
fn near_field_error_shrinks_with_range() {
    let a = array();
    let mut previous = f64::INFINITY;
    for exp in 0..=6 {
        let range = 10f64.powi(exp);
        let mut worst = 0.0f64;
        for b in (0..360).step_by(5) {
            for e in (-35..=35).step_by(5) {
                let (b, e) = (b as f64, e as f64);
                let s = simulate_spherical(&SourceSpec::at_range(b, e, range), &a).unwrap();
                let est = solve_full(&s, &a).unwrap();
                let truth = direction(b, e);
                let got = direction(est.bearing_deg, est.elevation_deg);
                worst = worst.max(truth.angle(&got).to_degrees());
            }
        }
        assert!(worst < previous, "range {range}: {worst} !< {previous}");
        // error falls off roughly as 1/range
        if exp > 1 {
            assert!((worst * range / (previous * range / 10.0) - 1.0).abs() < 0.1);
        }
        previous = worst;
    }
}

#[test]
fn zenith_rotation_matches_geometry() {
    // vertex frame: +120° about z maps a to c, c to b, b to a
    let a = array();
    let rot = Rotation3::from_axis_angle(&Vector3::z_axis(), 120f64.to_radians());
    for (from, to) in [
        (Vertex::A, Vertex::C),
        (Vertex::C, Vertex::B),
        (Vertex::B, Vertex::A),
        (Vertex::D, Vertex::D),
    ] {
        assert!((rot * a.vertex(from) - a.vertex(to)).norm() < 1e-15);
    }
}
