use std::path::Path;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::csv_io::{read_gps_file, read_imu_file, read_truth_file, TruthRecord};
use crate::aligner::AidFix;
use crate::attitude::UnitQuaternion;
use crate::earth::{wrap_pi, GeodeticPosition, NavVelocity};
use crate::error::{Error, Result};
use crate::increments::ImuInterval;
use crate::sim::ImuSample;

/// Relative tolerance on sample spacing and time matching.
const TIME_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IngestOptions {
    /// Longest allowed spacing between aiding fixes (s).
    pub max_gap: f64,
}

impl Default for IngestOptions {
    fn default() -> Self {
        Self { max_gap: 2.0 }
    }
}

/// Everything an alignment run consumes: one IMU interval per update, the
/// aiding fix at every update endpoint and, in simulation, the true attitude
/// at those endpoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignmentInput {
    pub interval: f64,
    pub intervals: Vec<ImuInterval>,
    /// `intervals.len() + 1` fixes.
    pub fixes: Vec<AidFix>,
    /// Quaternions of `C_n^b`, one per fix.
    pub truth: Option<Vec<UnitQuaternion>>,
}

/// Groups fixed-rate IMU samples into update intervals. Returns the start time
/// of the first interval and the grouped increments; a trailing partial
/// interval is dropped.
pub fn pair_imu(samples: &[ImuSample], interval: f64) -> Result<(f64, Vec<ImuInterval>)> {
    if samples.len() < 2 {
        return Err(Error::InvalidInput("need at least two IMU samples".into()));
    }
    let dt = samples[1].t_end - samples[0].t_end;
    if dt.is_nan() || dt <= 0.0 {
        return Err(Error::Format {
            line: 3,
            message: "IMU timestamps must increase".into(),
        });
    }
    for (i, w) in samples.windows(2).enumerate() {
        let d = w[1].t_end - w[0].t_end;
        if (d - dt).abs() > TIME_TOLERANCE * dt {
            return Err(Error::Format {
                line: i + 3,
                message: format!("IMU sample spacing {d} s differs from {dt} s"),
            });
        }
    }
    let ratio = interval / dt;
    let per_update = ratio.round();
    if (ratio - per_update).abs() > TIME_TOLERANCE * ratio
        || per_update < 2.0
        || !(per_update as usize).is_multiple_of(2)
    {
        return Err(Error::RateMismatch {
            imu_rate: 1.0 / dt,
            interval,
        });
    }
    let per_update = per_update as usize;
    let half = per_update / 2;
    let sum = |s: &[ImuSample]| -> (Vector3<f64>, Vector3<f64>) {
        s.iter().fold((Vector3::zeros(), Vector3::zeros()), |a, x| {
            (a.0 + x.dtheta, a.1 + x.dv)
        })
    };
    let intervals = samples
        .chunks_exact(per_update)
        .map(|c| {
            let (t1, v1) = sum(&c[..half]);
            let (t2, v2) = sum(&c[half..]);
            ImuInterval::new(t1, t2, v1, v2)
        })
        .collect();
    Ok((samples[0].t_end - dt, intervals))
}

/// Linear interpolation of the aiding fixes to `times`. Times beyond the last
/// fix are rejected; the caller truncates first.
pub fn interpolate_fixes(
    gps: &[AidFix],
    times: &[f64],
    opts: &IngestOptions,
) -> Result<Vec<AidFix>> {
    let (first, last) = match (gps.first(), gps.last()) {
        (Some(f), Some(l)) => (f.t, l.t),
        _ => return Err(Error::InvalidInput("no aiding fixes".into())),
    };
    for (i, w) in gps.windows(2).enumerate() {
        let gap = w[1].t - w[0].t;
        if gap.is_nan() || gap <= 0.0 {
            return Err(Error::Format {
                line: i + 3,
                message: "aiding timestamps must increase".into(),
            });
        }
        if gap > opts.max_gap {
            return Err(Error::Gap {
                at: w[0].t,
                gap,
                max: opts.max_gap,
            });
        }
    }
    let slack = TIME_TOLERANCE * (last - first).abs().max(1.0);
    times
        .iter()
        .map(|&t| {
            if t < first - slack || t > last + slack {
                return Err(Error::InvalidInput(format!(
                    "t = {t} s outside the aiding span [{first}, {last}]"
                )));
            }
            let j = gps.partition_point(|f| f.t <= t);
            if j == 0 {
                return Ok(AidFix { t, ..gps[0] });
            }
            if j == gps.len() {
                return Ok(AidFix { t, ..gps[j - 1] });
            }
            let (a, b) = (&gps[j - 1], &gps[j]);
            let w = (t - a.t) / (b.t - a.t);
            let lon = a.p.lon + w * wrap_pi(b.p.lon - a.p.lon);
            Ok(AidFix {
                t,
                v: NavVelocity(a.v.0 + (b.v.0 - a.v.0) * w),
                p: GeodeticPosition {
                    lon: wrap_pi(lon),
                    lat: a.p.lat + w * (b.p.lat - a.p.lat),
                    height: a.p.height + w * (b.p.height - a.p.height),
                },
            })
        })
        .collect()
}

fn match_truth(truth: &[TruthRecord], times: &[f64]) -> Result<Vec<UnitQuaternion>> {
    times
        .iter()
        .map(|&t| {
            let j = truth.partition_point(|r| r.t < t);
            let tol = TIME_TOLERANCE * t.abs().max(1.0) * 1e-3;
            [j.checked_sub(1), Some(j)]
                .into_iter()
                .flatten()
                .filter_map(|i| truth.get(i))
                .find(|r| (r.t - t).abs() <= tol)
                .map(|r| r.q)
                .ok_or_else(|| Error::InvalidInput(format!("no truth record at t = {t} s")))
        })
        .collect()
}

/// Builds the alignment input from in-memory logs: pairs the IMU samples,
/// truncates to the aiding span and interpolates fixes to every endpoint.
pub fn ingest(
    imu: &[ImuSample],
    gps: &[AidFix],
    truth: Option<&[TruthRecord]>,
    interval: f64,
    opts: &IngestOptions,
) -> Result<AlignmentInput> {
    if !(interval.is_finite() && interval > 0.0) {
        return Err(Error::InvalidInput(format!(
            "update interval must be positive, got {interval}"
        )));
    }
    let (t0, mut intervals) = pair_imu(imu, interval)?;
    let last_fix = gps.last().map(|f| f.t).unwrap_or(f64::NEG_INFINITY);
    let slack = TIME_TOLERANCE * interval;
    let covered = (0..=intervals.len())
        .take_while(|&k| t0 + k as f64 * interval <= last_fix + slack)
        .count();
    if covered < 2 {
        return Err(Error::InvalidInput(
            "aiding fixes do not cover a single update interval".into(),
        ));
    }
    intervals.truncate(covered - 1);
    let times: Vec<f64> = (0..covered).map(|k| t0 + k as f64 * interval).collect();
    let fixes = interpolate_fixes(gps, &times, opts)?;
    let truth = truth.map(|t| match_truth(t, &times)).transpose()?;
    Ok(AlignmentInput {
        interval,
        intervals,
        fixes,
        truth,
    })
}

/// [`ingest`] on CSV files.
pub fn ingest_logs(
    imu_file: &Path,
    gps_file: &Path,
    truth_file: Option<&Path>,
    interval: f64,
    opts: &IngestOptions,
) -> Result<AlignmentInput> {
    let imu = read_imu_file(imu_file)?;
    let gps = read_gps_file(gps_file)?;
    let truth = truth_file.map(read_truth_file).transpose()?;
    ingest(&imu, &gps, truth.as_deref(), interval, opts)
}
