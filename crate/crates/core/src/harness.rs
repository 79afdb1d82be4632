//! Near-field error sweeps.
//!
//! For each range and each (bearing, elevation) grid point a point source is
//! simulated with an exact spherical wavefront, solved, and the angular
//! errors converted to a positional error: each angular error becomes the
//! chord it subtends, `2 d sin(α/2)`, and the two chords combine by
//! Pythagoras. Per-range aggregates and harmonic fits of the error curves
//! summarise the sweep.

use std::io::Write;

use nalgebra::{Matrix3, Vector3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::angles::wrap_signed;
use crate::error::{Error, Result};
use crate::geometry::TetraArray;
use crate::sim::{simulate_spherical, SourceSpec};
use crate::solver::solve_full;

/// Header of the per-record CSV output.
pub const CSV_HEADER: [&str; 8] = [
    "range_m",
    "bearing_deg",
    "elev_deg",
    "est_bearing_deg",
    "est_elev_deg",
    "bearing_err_deg",
    "elev_err_deg",
    "pos_err_cm",
];

/// Inclusive angle grid `start, start + step, …, ≤ stop`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngleGrid {
    pub start_deg: f64,
    pub stop_deg: f64,
    pub step_deg: f64,
}

impl AngleGrid {
    pub fn new(start_deg: f64, stop_deg: f64, step_deg: f64) -> Self {
        AngleGrid {
            start_deg,
            stop_deg,
            step_deg,
        }
    }

    fn validate(&self, name: &'static str) -> Result<()> {
        let AngleGrid {
            start_deg,
            stop_deg,
            step_deg,
        } = *self;
        if ![start_deg, stop_deg, step_deg]
            .iter()
            .all(|v| v.is_finite())
        {
            return Err(Error::invalid(name, "grid bounds must be finite"));
        }
        if step_deg <= 0.0 {
            return Err(Error::invalid(
                name,
                format!("step must be > 0, got {step_deg}"),
            ));
        }
        if stop_deg < start_deg {
            return Err(Error::invalid(
                name,
                format!("stop {stop_deg} is below start {start_deg}"),
            ));
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<f64> {
        // small slack so an exact multiple of the step keeps its endpoint
        let n = ((self.stop_deg - self.start_deg) / self.step_deg + 1e-9).floor() as usize;
        (0..=n)
            .map(|i| self.start_deg + i as f64 * self.step_deg)
            .collect()
    }
}

/// Radius of the circle on which a bearing error is measured as a chord.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChordRadius {
    /// `d · cos(elevation)`: the circle the source actually moves on when
    /// only its bearing changes.
    #[default]
    Horizontal,
    /// `d`: the bearing chord measured as if in the horizontal plane.
    Range,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub edge_length_m: f64,
    pub propagation_speed_mps: f64,
    pub ranges_m: Vec<f64>,
    pub bearing: AngleGrid,
    pub elevation: AngleGrid,
    pub chord_radius: ChordRadius,
}

impl Default for SweepConfig {
    /// Half-meter array; decade ranges from 1 m to 1000 km; bearings 0–360°
    /// and elevations ±35° in 5° steps.
    fn default() -> Self {
        SweepConfig {
            edge_length_m: 0.5,
            propagation_speed_mps: 299_792_458.0,
            ranges_m: vec![1.0, 10.0, 100.0, 1e3, 1e4, 1e5, 1e6],
            bearing: AngleGrid::new(0.0, 360.0, 5.0),
            elevation: AngleGrid::new(-35.0, 35.0, 5.0),
            chord_radius: ChordRadius::Horizontal,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        TetraArray::new(self.edge_length_m, self.propagation_speed_mps)?;
        if self.ranges_m.is_empty() {
            return Err(Error::invalid("ranges_m", "at least one range is required"));
        }
        if let Some(r) = self.ranges_m.iter().find(|r| !(r.is_finite() && **r > 0.0)) {
            return Err(Error::invalid(
                "ranges_m",
                format!("ranges must be finite and > 0, got {r}"),
            ));
        }
        self.bearing.validate("bearing")?;
        self.elevation.validate("elevation")?;
        if self.elevation.start_deg < -90.0 || self.elevation.stop_deg > 90.0 {
            return Err(Error::invalid(
                "elevation",
                "grid must lie within [-90, 90]",
            ));
        }
        Ok(())
    }

    /// Ranges in ascending order without duplicates.
    pub fn sorted_ranges(&self) -> Vec<f64> {
        let mut r = self.ranges_m.clone();
        r.sort_by(f64::total_cmp);
        r.dedup();
        r
    }
}

/// One solved grid point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorRecord {
    pub range_m: f64,
    pub bearing_deg: f64,
    pub elev_deg: f64,
    pub est_bearing_deg: f64,
    pub est_elev_deg: f64,
    /// Signed, wrapped into `(-180, 180]`.
    pub bearing_err_deg: f64,
    pub elev_err_deg: f64,
    pub pos_err_cm: f64,
}

/// Chord subtended by an angular error at a distance: `2 d sin(|α|/2)`.
pub fn chord_error(angular_error_deg: f64, distance: f64) -> f64 {
    2.0 * distance * (angular_error_deg.abs().to_radians() / 2.0).sin()
}

/// Positional error (m) from bearing and elevation errors at a given true
/// elevation and distance.
pub fn positional_error(
    bearing_err_deg: f64,
    elev_err_deg: f64,
    true_elevation_deg: f64,
    distance: f64,
    radius: ChordRadius,
) -> f64 {
    let bearing_radius = match radius {
        ChordRadius::Horizontal => distance * true_elevation_deg.to_radians().cos(),
        ChordRadius::Range => distance,
    };
    chord_error(bearing_err_deg, bearing_radius).hypot(chord_error(elev_err_deg, distance))
}

/// Least-squares fit of `offset + A sin(kθ + φ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HarmonicFit {
    pub harmonic: u32,
    pub offset: f64,
    /// Coefficient of `sin(kθ)`.
    pub sin_coef: f64,
    /// Coefficient of `cos(kθ)`.
    pub cos_coef: f64,
    /// `|A|`, always non-negative.
    pub amplitude: f64,
    /// `φ` in degrees, `(-180, 180]`.
    pub phase_deg: f64,
    /// Root-mean-square residual.
    pub residual_rms: f64,
    pub points: usize,
}

impl HarmonicFit {
    pub fn eval(&self, theta_deg: f64) -> f64 {
        let (s, c) = (self.harmonic as f64 * theta_deg.to_radians()).sin_cos();
        self.offset + self.sin_coef * s + self.cos_coef * c
    }
}

/// Fits `value(θ) ≈ offset + s·sin(kθ) + c·cos(kθ)` to `(θ°, value)` pairs.
/// The phase is left free; the amplitude is reported as `hypot(s, c)`.
pub fn fit_sinusoid(samples: &[(f64, f64)], harmonic: u32) -> Result<HarmonicFit> {
    if harmonic == 0 {
        return Err(Error::invalid("harmonic", "must be at least 1"));
    }
    let needed = 2 * harmonic as usize + 1;
    if samples.len() < needed {
        return Err(Error::InsufficientPoints {
            harmonic,
            needed,
            got: samples.len(),
        });
    }

    let k = harmonic as f64;
    let basis = |theta: f64| {
        let (s, c) = (k * theta.to_radians()).sin_cos();
        Vector3::new(1.0, s, c)
    };
    let mut normal = Matrix3::zeros();
    let mut rhs = Vector3::zeros();
    for &(theta, y) in samples {
        let b = basis(theta);
        normal += b * b.transpose();
        rhs += b * y;
    }
    let eig = normal.symmetric_eigenvalues();
    if eig.min() <= 1e-12 * eig.max() {
        return Err(Error::invalid(
            "samples",
            "sample angles do not determine the harmonic",
        ));
    }
    let coef = normal
        .cholesky()
        .map(|ch| ch.solve(&rhs))
        .ok_or_else(|| Error::invalid("samples", "sample angles do not determine the harmonic"))?;

    let sse: f64 = samples
        .iter()
        .map(|&(theta, y)| (y - basis(theta).dot(&coef)).powi(2))
        .sum();

    Ok(HarmonicFit {
        harmonic,
        offset: coef[0],
        sin_coef: coef[1],
        cos_coef: coef[2],
        amplitude: coef[1].hypot(coef[2]),
        phase_deg: wrap_signed(coef[2].atan2(coef[1]).to_degrees()),
        residual_rms: (sse / samples.len() as f64).sqrt(),
        points: samples.len(),
    })
}

/// Error-curve fit for one elevation slice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SliceFit {
    pub elevation_deg: f64,
    pub fit: HarmonicFit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RangeSummary {
    pub range_m: f64,
    pub points: usize,
    pub min_cm: f64,
    pub avg_cm: f64,
    pub max_cm: f64,
    /// Grid points where the solver had to clamp an arccos argument.
    pub clamped_points: usize,
    /// Third-harmonic fit of bearing error over the whole grid; absent when
    /// the grid has too few bearings to fit.
    pub bearing_fit: Option<HarmonicFit>,
    /// Third-harmonic fit of elevation error, per elevation slice.
    pub elevation_fits: Vec<SliceFit>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepMetadata {
    pub generator: String,
    pub version: String,
    pub grid_points_per_range: usize,
    pub config: SweepConfig,
}

/// The JSON summary document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub metadata: SweepMetadata,
    pub ranges: Vec<RangeSummary>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub config: SweepConfig,
    /// Sorted by (range, bearing, elevation).
    pub records: Vec<ErrorRecord>,
    pub summaries: Vec<RangeSummary>,
}

/// Harmonic used for all error-curve fits: the array has three-fold
/// symmetry about its vertical axis.
pub const ERROR_HARMONIC: u32 = 3;

/// Runs the sweep. Grid points are solved in parallel on the current rayon
/// pool; output order does not depend on scheduling.
pub fn run_sweep(config: &SweepConfig) -> Result<SweepReport> {
    config.validate()?;
    let array = TetraArray::new(config.edge_length_m, config.propagation_speed_mps)?;
    let bearings = config.bearing.points();
    let elevations = config.elevation.points();
    let ranges = config.sorted_ranges();

    let mut grid = Vec::with_capacity(ranges.len() * bearings.len() * elevations.len());
    for &r in &ranges {
        for &b in &bearings {
            for &e in &elevations {
                grid.push((r, b, e));
            }
        }
    }

    let solved: Vec<(ErrorRecord, bool)> = grid
        .par_iter()
        .map(|&(range, bearing, elevation)| {
            solve_point(&array, range, bearing, elevation, config.chord_radius).map_err(|e| {
                Error::SweepPoint {
                    range_m: range,
                    bearing_deg: bearing,
                    elevation_deg: elevation,
                    source: Box::new(e),
                }
            })
        })
        .collect::<Result<_>>()?;

    // the grid is built in (range, bearing, elevation) order and the
    // parallel collect preserves it
    let (records, clamped): (Vec<ErrorRecord>, Vec<bool>) = solved.into_iter().unzip();

    let mut summaries = Vec::with_capacity(ranges.len());
    for &range in &ranges {
        let idx: Vec<usize> = (0..records.len())
            .filter(|&i| records[i].range_m == range)
            .collect();
        let subset: Vec<ErrorRecord> = idx.iter().map(|&i| records[i]).collect();
        let clamped_points = idx.iter().filter(|&&i| clamped[i]).count();
        summaries.push(summarize(range, &subset, &elevations, clamped_points));
    }

    Ok(SweepReport {
        config: config.clone(),
        records,
        summaries,
    })
}

fn solve_point(
    array: &TetraArray,
    range: f64,
    bearing: f64,
    elevation: f64,
    radius: ChordRadius,
) -> Result<(ErrorRecord, bool)> {
    let sample = simulate_spherical(&SourceSpec::at_range(bearing, elevation, range), array)?;
    let est = solve_full(&sample, array)?;
    let bearing_err = wrap_signed(est.bearing_deg - bearing);
    let elev_err = est.elevation_deg - elevation;
    let pos_err_cm = positional_error(bearing_err, elev_err, elevation, range, radius) * 100.0;
    Ok((
        ErrorRecord {
            range_m: range,
            bearing_deg: bearing,
            elev_deg: elevation,
            est_bearing_deg: est.bearing_deg,
            est_elev_deg: est.elevation_deg,
            bearing_err_deg: bearing_err,
            elev_err_deg: elev_err,
            pos_err_cm,
        },
        est.clamped,
    ))
}

fn summarize(
    range: f64,
    records: &[ErrorRecord],
    elevations: &[f64],
    clamped_points: usize,
) -> RangeSummary {
    let (min_cm, avg_cm, max_cm) = aggregate(records);
    let bearing_fit = fit_sinusoid(
        &records
            .iter()
            .map(|r| (r.bearing_deg, r.bearing_err_deg))
            .collect::<Vec<_>>(),
        ERROR_HARMONIC,
    )
    .ok();
    let elevation_fits = elevations
        .iter()
        .filter_map(|&e| {
            let slice: Vec<(f64, f64)> = records
                .iter()
                .filter(|r| r.elev_deg == e)
                .map(|r| (r.bearing_deg, r.elev_err_deg))
                .collect();
            // too few bearings for a fit: leave the slice out
            fit_sinusoid(&slice, ERROR_HARMONIC)
                .ok()
                .map(|fit| SliceFit {
                    elevation_deg: e,
                    fit,
                })
        })
        .collect();
    RangeSummary {
        range_m: range,
        points: records.len(),
        min_cm,
        avg_cm,
        max_cm,
        clamped_points,
        bearing_fit,
        elevation_fits,
    }
}

/// Min, mean and max positional error (cm) of a set of records.
pub fn aggregate(records: &[ErrorRecord]) -> (f64, f64, f64) {
    if records.is_empty() {
        return (f64::NAN, f64::NAN, f64::NAN);
    }
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    let mut sum = 0.0;
    for r in records {
        min = min.min(r.pos_err_cm);
        max = max.max(r.pos_err_cm);
        sum += r.pos_err_cm;
    }
    (min, sum / records.len() as f64, max)
}

impl SweepReport {
    pub fn records_at(&self, range_m: f64) -> impl Iterator<Item = &ErrorRecord> {
        self.records.iter().filter(move |r| r.range_m == range_m)
    }

    pub fn summary_at(&self, range_m: f64) -> Option<&RangeSummary> {
        self.summaries.iter().find(|s| s.range_m == range_m)
    }

    /// Elevation-error fit for one elevation slice at one range.
    pub fn elevation_fit(&self, range_m: f64, elevation_deg: f64) -> Option<&HarmonicFit> {
        self.summary_at(range_m)?
            .elevation_fits
            .iter()
            .find(|f| f.elevation_deg == elevation_deg)
            .map(|f| &f.fit)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        for r in &self.records {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn summary(&self) -> SweepSummary {
        SweepSummary {
            metadata: SweepMetadata {
                generator: "tetradf".into(),
                version: env!("CARGO_PKG_VERSION").into(),
                grid_points_per_range: self.config.bearing.points().len()
                    * self.config.elevation.points().len(),
                config: self.config.clone(),
            },
            ranges: self.summaries.clone(),
        }
    }

    pub fn write_json<W: Write>(&self, writer: W) -> Result<()> {
        let mut writer = writer;
        serde_json::to_writer_pretty(&mut writer, &self.summary())
            .map_err(|e| Error::Io(e.to_string()))?;
        writeln!(writer)?;
        Ok(())
    }

    /// Distance / min / average / max table, errors in centimeters to two
    /// decimals.
    pub fn summary_table(&self) -> String {
        summary_table(&self.summaries)
    }
}

pub fn summary_table(summaries: &[RangeSummary]) -> String {
    let mut out = format!(
        "{:>12}  {:>10}  {:>10}  {:>10}  {:>14}\n",
        "Distance (m)", "Min (cm)", "Avg (cm)", "Max (cm)", "Bearing A3 (°)"
    );
    for s in summaries {
        out.push_str(&format!(
            "{:>12}  {:>10.2}  {:>10.2}  {:>10.2}  {:>14.3e}\n",
            s.range_m,
            s.min_cm,
            s.avg_cm,
            s.max_cm,
            s.bearing_fit.map_or(f64::NAN, |f| f.amplitude)
        ));
    }
    out
}
