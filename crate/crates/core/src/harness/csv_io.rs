//! Headered CSV logs. Floats are written in shortest round-trip form, so a
//! write followed by a read reproduces every value bit for bit.

use std::io::{Read, Write};
use std::path::Path;

use nalgebra::{Vector3, Vector4};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::aligner::AidFix;
use crate::attitude::UnitQuaternion;
use crate::earth::{GeodeticPosition, NavVelocity};
use crate::error::{Error, Result};
use crate::sim::ImuSample;

pub const IMU_HEADER: [&str; 7] = [
    "t_end_s", "dtheta_x", "dtheta_y", "dtheta_z", "dv_x", "dv_y", "dv_z",
];
pub const GPS_HEADER: [&str; 7] = [
    "t_s", "lat_rad", "lon_rad", "h_m", "vN_mps", "vU_mps", "vE_mps",
];
pub const TRUTH_HEADER: [&str; 11] = [
    "t_s", "q_s", "q_x", "q_y", "q_z", "vN", "vU", "vE", "lat", "lon", "h",
];

#[derive(Debug, Serialize, Deserialize)]
struct ImuRow {
    t_end_s: f64,
    dtheta_x: f64,
    dtheta_y: f64,
    dtheta_z: f64,
    dv_x: f64,
    dv_y: f64,
    dv_z: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[allow(non_snake_case)]
struct GpsRow {
    t_s: f64,
    lat_rad: f64,
    lon_rad: f64,
    h_m: f64,
    vN_mps: f64,
    vU_mps: f64,
    vE_mps: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[allow(non_snake_case)]
struct TruthRow {
    t_s: f64,
    q_s: f64,
    q_x: f64,
    q_y: f64,
    q_z: f64,
    vN: f64,
    vU: f64,
    vE: f64,
    lat: f64,
    lon: f64,
    h: f64,
}

/// Attitude, velocity and position truth at one instant. `q` encodes
/// `C_n^b` in the aligners' convention.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruthRecord {
    pub t: f64,
    pub q: UnitQuaternion,
    pub v: NavVelocity,
    pub p: GeodeticPosition,
}

fn write_rows<W: Write, T: Serialize>(out: W, rows: impl IntoIterator<Item = T>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(|e| Error::Io(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

fn read_rows<R: Read, T: DeserializeOwned>(input: R, header: &[&str]) -> Result<Vec<T>> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(input);
    let found = r.headers().map_err(|e| csv_error(e, 1))?.clone();
    if found.iter().map(str::trim).ne(header.iter().copied()) {
        return Err(Error::Format {
            line: 1,
            message: format!(
                "expected header '{}', found '{}'",
                header.join(","),
                found.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }
    let mut rows = Vec::new();
    for (i, rec) in r.deserialize::<T>().enumerate() {
        rows.push(rec.map_err(|e| csv_error(e, i + 2))?);
    }
    Ok(rows)
}

fn csv_error(e: csv::Error, fallback_line: usize) -> Error {
    let line = e
        .position()
        .map(|p| p.line() as usize)
        .unwrap_or(fallback_line);
    match e.kind() {
        csv::ErrorKind::Io(_) => Error::Io(e.to_string()),
        _ => Error::Format {
            line,
            message: e.to_string(),
        },
    }
}

fn check_finite(values: &[f64], line: usize) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::Format {
            line,
            message: "non-finite value".into(),
        })
    }
}

pub fn write_imu<W: Write>(out: W, samples: &[ImuSample]) -> Result<()> {
    write_rows(
        out,
        samples.iter().map(|s| ImuRow {
            t_end_s: s.t_end,
            dtheta_x: s.dtheta.x,
            dtheta_y: s.dtheta.y,
            dtheta_z: s.dtheta.z,
            dv_x: s.dv.x,
            dv_y: s.dv.y,
            dv_z: s.dv.z,
        }),
    )
}

pub fn read_imu<R: Read>(input: R) -> Result<Vec<ImuSample>> {
    let rows: Vec<ImuRow> = read_rows(input, &IMU_HEADER)?;
    rows.into_iter()
        .enumerate()
        .map(|(i, r)| {
            check_finite(
                &[
                    r.t_end_s, r.dtheta_x, r.dtheta_y, r.dtheta_z, r.dv_x, r.dv_y, r.dv_z,
                ],
                i + 2,
            )?;
            Ok(ImuSample {
                t_end: r.t_end_s,
                dtheta: Vector3::new(r.dtheta_x, r.dtheta_y, r.dtheta_z),
                dv: Vector3::new(r.dv_x, r.dv_y, r.dv_z),
            })
        })
        .collect()
}

pub fn write_gps<W: Write>(out: W, fixes: &[AidFix]) -> Result<()> {
    write_rows(
        out,
        fixes.iter().map(|f| GpsRow {
            t_s: f.t,
            lat_rad: f.p.lat,
            lon_rad: f.p.lon,
            h_m: f.p.height,
            vN_mps: f.v.north(),
            vU_mps: f.v.up(),
            vE_mps: f.v.east(),
        }),
    )
}

pub fn read_gps<R: Read>(input: R) -> Result<Vec<AidFix>> {
    let rows: Vec<GpsRow> = read_rows(input, &GPS_HEADER)?;
    rows.into_iter()
        .enumerate()
        .map(|(i, r)| {
            check_finite(
                &[
                    r.t_s, r.lat_rad, r.lon_rad, r.h_m, r.vN_mps, r.vU_mps, r.vE_mps,
                ],
                i + 2,
            )?;
            if r.lat_rad.abs() > std::f64::consts::FRAC_PI_2 {
                return Err(Error::Format {
                    line: i + 2,
                    message: format!("latitude {} rad out of range", r.lat_rad),
                });
            }
            Ok(AidFix {
                t: r.t_s,
                v: NavVelocity::new(r.vN_mps, r.vU_mps, r.vE_mps),
                p: GeodeticPosition {
                    lon: r.lon_rad,
                    lat: r.lat_rad,
                    height: r.h_m,
                },
            })
        })
        .collect()
}

pub fn write_truth<W: Write>(out: W, truth: &[TruthRecord]) -> Result<()> {
    write_rows(
        out,
        truth.iter().map(|r| TruthRow {
            t_s: r.t,
            q_s: r.q.s,
            q_x: r.q.eta.x,
            q_y: r.q.eta.y,
            q_z: r.q.eta.z,
            vN: r.v.north(),
            vU: r.v.up(),
            vE: r.v.east(),
            lat: r.p.lat,
            lon: r.p.lon,
            h: r.p.height,
        }),
    )
}

pub fn read_truth<R: Read>(input: R) -> Result<Vec<TruthRecord>> {
    let rows: Vec<TruthRow> = read_rows(input, &TRUTH_HEADER)?;
    rows.into_iter()
        .enumerate()
        .map(|(i, r)| {
            let line = i + 2;
            check_finite(
                &[
                    r.t_s, r.q_s, r.q_x, r.q_y, r.q_z, r.vN, r.vU, r.vE, r.lat, r.lon, r.h,
                ],
                line,
            )?;
            let q = Vector4::new(r.q_s, r.q_x, r.q_y, r.q_z);
            if (q.norm() - 1.0).abs() > 1e-9 {
                return Err(Error::Format {
                    line,
                    message: "quaternion is not unit length".into(),
                });
            }
            Ok(TruthRecord {
                t: r.t_s,
                // stored values are already canonical unit quaternions
                q: UnitQuaternion {
                    s: r.q_s,
                    eta: Vector3::new(r.q_x, r.q_y, r.q_z),
                },
                v: NavVelocity::new(r.vN, r.vU, r.vE),
                p: GeodeticPosition {
                    lon: r.lon,
                    lat: r.lat,
                    height: r.h,
                },
            })
        })
        .collect()
}

fn create(path: &Path) -> Result<std::io::BufWriter<std::fs::File>> {
    Ok(std::io::BufWriter::new(std::fs::File::create(path)?))
}

fn open(path: &Path) -> Result<std::io::BufReader<std::fs::File>> {
    std::fs::File::open(path)
        .map(std::io::BufReader::new)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub fn write_imu_file(path: &Path, samples: &[ImuSample]) -> Result<()> {
    write_imu(create(path)?, samples)
}

pub fn read_imu_file(path: &Path) -> Result<Vec<ImuSample>> {
    read_imu(open(path)?)
}

pub fn write_gps_file(path: &Path, fixes: &[AidFix]) -> Result<()> {
    write_gps(create(path)?, fixes)
}

pub fn read_gps_file(path: &Path) -> Result<Vec<AidFix>> {
    read_gps(open(path)?)
}

pub fn write_truth_file(path: &Path, truth: &[TruthRecord]) -> Result<()> {
    write_truth(create(path)?, truth)
}

pub fn read_truth_file(path: &Path) -> Result<Vec<TruthRecord>> {
    read_truth(open(path)?)
}
