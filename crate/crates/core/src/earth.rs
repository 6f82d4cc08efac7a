//! WGS-84 earth model in a North-Up-East local-level frame.
//!
//! Every vector in this crate that lives in the navigation frame is ordered
//! `[north, up, east]`. Positions are curvilinear `[longitude, latitude, height]`.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// WGS-84 semi-major axis (m).
pub const SEMI_MAJOR_AXIS: f64 = 6_378_137.0;
/// WGS-84 flattening.
pub const FLATTENING: f64 = 1.0 / 298.257_223_563;
/// First eccentricity squared.
pub const ECCENTRICITY_SQ: f64 = FLATTENING * (2.0 - FLATTENING);
/// WGS-84 earth rotation rate (rad/s).
pub const EARTH_RATE: f64 = 7.292_115e-5;
/// Normal gravity on the equator (m/s^2).
pub const GRAVITY_EQUATOR: f64 = 9.780_325_335_9;
/// Somigliana constant `k = (b*g_p - a*g_e) / (a*g_e)`.
pub const SOMIGLIANA_K: f64 = 0.001_931_852_652_41;
/// Linear free-air gradient (m/s^2 per m).
pub const FREE_AIR_GRADIENT: f64 = 3.086e-6;
/// Standard gravity, used for unit conversions of accelerometer specs.
pub const STANDARD_GRAVITY: f64 = 9.806_65;

/// Below this `|cos L|` the curvature matrix is treated as singular.
const POLAR_COS_LIMIT: f64 = 1e-9;

/// Curvilinear position: longitude and latitude in radians, height above the
/// ellipsoid in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeodeticPosition {
    pub lon: f64,
    pub lat: f64,
    pub height: f64,
}

impl GeodeticPosition {
    /// Builds a position, wrapping longitude into `(-pi, pi]`.
    pub fn new(lon: f64, lat: f64, height: f64) -> Result<Self> {
        if !(lon.is_finite() && lat.is_finite() && height.is_finite()) {
            return Err(Error::InvalidInput("non-finite position".into()));
        }
        if lat.abs() > std::f64::consts::FRAC_PI_2 {
            return Err(Error::InvalidInput(format!(
                "latitude {lat} outside [-pi/2, pi/2]"
            )));
        }
        Ok(Self {
            lon: wrap_pi(lon),
            lat,
            height,
        })
    }

    /// `[lon, lat, h]` in the order used by the curvature matrix.
    pub fn as_vector(&self) -> Vector3<f64> {
        Vector3::new(self.lon, self.lat, self.height)
    }

    pub fn from_vector(p: &Vector3<f64>) -> Result<Self> {
        Self::new(p[0], p[1], p[2])
    }
}

/// Ground velocity resolved in the N-U-E frame (m/s).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct NavVelocity(pub Vector3<f64>);

impl NavVelocity {
    pub fn new(north: f64, up: f64, east: f64) -> Self {
        Self(Vector3::new(north, up, east))
    }

    pub fn north(&self) -> f64 {
        self.0[0]
    }

    pub fn up(&self) -> f64 {
        self.0[1]
    }

    pub fn east(&self) -> f64 {
        self.0[2]
    }
}

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_pi(angle: f64) -> f64 {
    use std::f64::consts::{PI, TAU};
    let mut a = angle % TAU;
    if a <= -PI {
        a += TAU;
    } else if a > PI {
        a -= TAU;
    }
    a
}

/// Meridian (`R_N`) and transverse (`R_E`) radii of curvature at latitude `lat`.
pub fn radii_of_curvature(lat: f64) -> (f64, f64) {
    let s = lat.sin();
    let w2 = 1.0 - ECCENTRICITY_SQ * s * s;
    let w = w2.sqrt();
    let transverse = SEMI_MAJOR_AXIS / w;
    let meridian = SEMI_MAJOR_AXIS * (1.0 - ECCENTRICITY_SQ) / (w2 * w);
    (meridian, transverse)
}

fn check_polar(lat: f64) -> Result<f64> {
    let c = lat.cos();
    if c.abs() < POLAR_COS_LIMIT {
        Err(Error::PolarSingularity { latitude: lat })
    } else {
        Ok(c)
    }
}

/// Local curvature matrix mapping N-U-E velocity to `[lon, lat, h]` rates.
pub fn curvature_matrix(p: &GeodeticPosition) -> Result<Matrix3<f64>> {
    let cos_lat = check_polar(p.lat)?;
    let (rn, re) = radii_of_curvature(p.lat);
    Ok(Matrix3::new(
        0.0,
        0.0,
        1.0 / ((re + p.height) * cos_lat),
        1.0 / (rn + p.height),
        0.0,
        0.0,
        0.0,
        1.0,
        0.0,
    ))
}

/// Closed-form inverse of [`curvature_matrix`].
pub fn curvature_matrix_inverse(p: &GeodeticPosition) -> Result<Matrix3<f64>> {
    let cos_lat = check_polar(p.lat)?;
    let (rn, re) = radii_of_curvature(p.lat);
    Ok(Matrix3::new(
        0.0,
        rn + p.height,
        0.0,
        0.0,
        0.0,
        1.0,
        (re + p.height) * cos_lat,
        0.0,
        0.0,
    ))
}

/// Earth rotation rate resolved in the N-U-E frame.
pub fn earth_rate_n(lat: f64) -> Vector3<f64> {
    Vector3::new(EARTH_RATE * lat.cos(), EARTH_RATE * lat.sin(), 0.0)
}

/// Transport rate: rotation of the local-level frame relative to the earth
/// caused by moving over the ellipsoid.
pub fn transport_rate_n(v: &NavVelocity, p: &GeodeticPosition) -> Result<Vector3<f64>> {
    check_polar(p.lat)?;
    let (rn, re) = radii_of_curvature(p.lat);
    let re_h = re + p.height;
    Ok(Vector3::new(
        v.east() / re_h,
        v.east() * p.lat.tan() / re_h,
        -v.north() / (rn + p.height),
    ))
}

/// `omega_in^n = omega_ie^n + omega_en^n`.
pub fn nav_rate_n(v: &NavVelocity, p: &GeodeticPosition) -> Result<Vector3<f64>> {
    Ok(earth_rate_n(p.lat) + transport_rate_n(v, p)?)
}

/// Normal gravity magnitude: Somigliana on the ellipsoid plus a linear
/// free-air correction.
pub fn gravity_magnitude(lat: f64, height: f64) -> f64 {
    let s2 = lat.sin().powi(2);
    let surface = GRAVITY_EQUATOR * (1.0 + SOMIGLIANA_K * s2) / (1.0 - ECCENTRICITY_SQ * s2).sqrt();
    surface - FREE_AIR_GRADIENT * height
}

/// Gravity vector in N-U-E; always points down.
pub fn gravity_n(p: &GeodeticPosition) -> Vector3<f64> {
    Vector3::new(0.0, -gravity_magnitude(p.lat, p.height), 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_6, PI};

    fn pos(lat: f64, h: f64) -> GeodeticPosition {
        GeodeticPosition::new(0.3, lat, h).unwrap()
    }

    #[test]
    fn radii_at_equator_and_pole() {
        let (rn, re) = radii_of_curvature(0.0);
        assert_eq!(re, SEMI_MAJOR_AXIS);
        // a(1 - e^2) evaluated from the defining constants
        assert!((rn - 6_335_439.327_083).abs() < 1e-3, "{rn}");

        let (rn, re) = radii_of_curvature(FRAC_PI_2);
        let polar = SEMI_MAJOR_AXIS / (1.0 - ECCENTRICITY_SQ).sqrt();
        assert!((rn - polar).abs() < 1e-6);
        assert!((re - polar).abs() < 1e-6);
    }

    #[test]
    fn curvature_matrix_structure() {
        let p = GeodeticPosition::new(0.0, 0.0, 0.0).unwrap();
        let rc = curvature_matrix(&p).unwrap();
        let pdot = rc * Vector3::new(0.0, 1.0, 0.0);
        assert_eq!(pdot, Vector3::new(0.0, 0.0, 1.0));

        let (rn, _) = radii_of_curvature(0.0);
        let pdot = rc * Vector3::new(rn, 0.0, 0.0);
        assert!((pdot[1] - 1.0).abs() < 1e-15);
        assert_eq!(pdot[0], 0.0);
    }

    #[test]
    fn curvature_inverse_pair() {
        for deg in (-80..=80).step_by(5) {
            let p = pos((deg as f64).to_radians(), 1234.5);
            let prod = curvature_matrix(&p).unwrap() * curvature_matrix_inverse(&p).unwrap();
            assert!((prod - Matrix3::identity()).norm() < 1e-12, "lat {deg}");
        }
    }

    #[test]
    fn poles_are_rejected() {
        let p = GeodeticPosition {
            lon: 0.0,
            lat: FRAC_PI_2,
            height: 0.0,
        };
        assert!(matches!(
            curvature_matrix(&p),
            Err(Error::PolarSingularity { .. })
        ));
        assert!(matches!(
            transport_rate_n(&NavVelocity::default(), &p),
            Err(Error::PolarSingularity { .. })
        ));
        assert!(GeodeticPosition::new(0.0, 1.6, 0.0).is_err());
    }

    #[test]
    fn longitude_wraps() {
        let p = GeodeticPosition::new(3.0 * PI / 2.0, 0.1, 0.0).unwrap();
        assert!((p.lon + PI / 2.0).abs() < 1e-15);
        assert_eq!(wrap_pi(-PI), PI);
        assert_eq!(wrap_pi(PI), PI);
    }

    #[test]
    fn earth_rate_components() {
        assert_eq!(earth_rate_n(0.0), Vector3::new(EARTH_RATE, 0.0, 0.0));
        let w = earth_rate_n(FRAC_PI_2);
        assert!(w[0].abs() < 1e-20 && (w[1] - EARTH_RATE).abs() < 1e-20);
        let w = earth_rate_n(FRAC_PI_6);
        assert!((w[0] - EARTH_RATE * 3f64.sqrt() / 2.0).abs() < 1e-19);
        assert!((w[1] - EARTH_RATE / 2.0).abs() < 1e-19);
        assert_eq!(w[2], 0.0);
    }

    #[test]
    fn transport_rate_cases() {
        let p = pos(0.5, 300.0);
        assert_eq!(
            transport_rate_n(&NavVelocity::default(), &p).unwrap(),
            Vector3::zeros()
        );
        assert_eq!(
            transport_rate_n(&NavVelocity::new(0.0, 12.0, 0.0), &p).unwrap(),
            Vector3::zeros()
        );
        let (rn, _) = radii_of_curvature(0.5);
        let w = transport_rate_n(&NavVelocity::new(100.0, 0.0, 0.0), &p).unwrap();
        assert_eq!(w[0], 0.0);
        assert_eq!(w[1], 0.0);
        assert!((w[2] + 100.0 / (rn + 300.0)).abs() < 1e-20);
    }

    /// Orientation of the N-U-E frame in ECEF coordinates (columns N, U, E).
    fn c_n_to_e(lon: f64, lat: f64) -> Matrix3<f64> {
        let (sl, cl) = lat.sin_cos();
        let (so, co) = lon.sin_cos();
        Matrix3::new(-sl * co, cl * co, -so, -sl * so, cl * so, co, cl, sl, 0.0)
    }

    #[test]
    fn transport_rate_matches_frame_finite_difference() {
        let dt = 1e-3;
        for &lat_deg in &[-60.0, -20.0, 0.0, 35.0, 60.0] {
            for v in [
                NavVelocity::new(300.0, 0.0, 0.0),
                NavVelocity::new(0.0, 0.0, -300.0),
                NavVelocity::new(120.0, 40.0, 160.0),
            ] {
                let p = pos(f64::to_radians(lat_deg), 2000.0);
                let rate = |p: &GeodeticPosition| curvature_matrix(p).unwrap() * v.0;
                // central difference of the frame orientation, with the position
                // pushed along the path by the midpoint rule
                let step = |p: &GeodeticPosition, h: f64| {
                    let mid = p.as_vector() + rate(p) * (h / 2.0);
                    let mid = GeodeticPosition {
                        lon: mid[0],
                        lat: mid[1],
                        height: mid[2],
                    };
                    p.as_vector() + rate(&mid) * h
                };
                let fwd = step(&p, dt);
                let bwd = step(&p, -dt);
                let c_f = c_n_to_e(fwd[0], fwd[1]);
                let c_b = c_n_to_e(bwd[0], bwd[1]);
                let c0 = c_n_to_e(p.lon, p.lat);
                let cdot = (c_f - c_b) / (2.0 * dt);
                let skew = c0.transpose() * cdot;
                let fd = Vector3::new(skew[(2, 1)], skew[(0, 2)], skew[(1, 0)]);
                let analytic = transport_rate_n(&v, &p).unwrap();
                assert!(
                    (fd - analytic).norm() < 1e-8,
                    "lat {lat_deg} {v:?}: {fd} vs {analytic}"
                );
            }
        }
    }

    #[test]
    fn nav_rate_is_sum_and_bounded() {
        let p = pos(0.7, 1000.0);
        let v = NavVelocity::new(80.0, -5.0, 150.0);
        let w = nav_rate_n(&v, &p).unwrap();
        assert_eq!(w, earth_rate_n(p.lat) + transport_rate_n(&v, &p).unwrap());
        let (rn, re) = radii_of_curvature(p.lat);
        let bound = EARTH_RATE
            + v.0.norm() / (rn + p.height)
            + (v.east() * p.lat.tan()).abs() / (re + p.height);
        assert!(w.norm() <= bound);
    }

    #[test]
    fn gravity_model() {
        let g = gravity_n(&GeodeticPosition::new(0.0, 0.0, 0.0).unwrap());
        assert!((g[1] + 9.7803).abs() < 1e-4);
        assert_eq!(g[0], 0.0);
        assert_eq!(g[2], 0.0);
        for deg in (-85..=85).step_by(17) {
            let lat = (deg as f64).to_radians();
            assert!(gravity_magnitude(lat, 1000.0) < gravity_magnitude(lat, 0.0));
            assert!(gravity_n(&pos(lat, 50.0))[1] < 0.0);
        }
    }
}
