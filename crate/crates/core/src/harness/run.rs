use serde::{Deserialize, Serialize};

use super::ingest::AlignmentInput;
use crate::aligner::{Aligner, AttitudeEstimate, Method, PifAligner, VifAligner};
use crate::attitude::{attitude_error, dcm_to_euler, quat_to_dcm};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunOptions {
    /// Solve for the attitude after every `solve_every` updates; 0 solves
    /// only at `epochs` and at the final update.
    pub solve_every: usize,
    /// Extra report times (s from the first fix).
    pub epochs: Vec<f64>,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            solve_every: 1,
            epochs: Vec::new(),
        }
    }
}

/// Provenance of a run.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct RunMeta {
    pub seed: Option<u64>,
    pub run: Option<u64>,
    pub config_hash: Option<String>,
}

/// One eigen solve. Angles in degrees, wrapped to (-180, 180].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    /// Time since the first fix (s).
    pub t: f64,
    /// Roll, pitch, yaw of `C_b^n(t)`; absent while the spectrum is degenerate.
    pub estimate: Option<[f64; 3]>,
    /// `estimate (-) truth`; absent without truth.
    pub error: Option<[f64; 3]>,
    pub lambda_min: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub method: Method,
    pub meta: RunMeta,
    pub updates: usize,
    pub rows: Vec<ReportRow>,
    /// Ascending eigenvalues of the final `K`.
    pub k_spectrum: [f64; 4],
    /// Final attitude; absent when the spectrum is still degenerate at the end.
    pub final_estimate: Option<AttitudeEstimate>,
}

impl RunReport {
    pub fn degenerate_at_end(&self) -> bool {
        self.final_estimate.is_none()
    }

    /// Row closest to `t`, if one lies within half an update interval.
    pub fn row_at(&self, t: f64, interval: f64) -> Option<&ReportRow> {
        self.rows
            .iter()
            .min_by(|a, b| (a.t - t).abs().total_cmp(&(b.t - t).abs()))
            .filter(|r| (r.t - t).abs() <= 0.5 * interval)
    }
}

fn new_aligner(method: Method, input: &AlignmentInput) -> Result<Box<dyn Aligner + Send>> {
    let f0 = input
        .fixes
        .first()
        .ok_or_else(|| Error::InvalidInput("empty alignment input".into()))?;
    Ok(match method {
        Method::Vif => Box::new(VifAligner::new(f0.v, f0.p, input.interval)?),
        Method::Pif => Box::new(PifAligner::new(f0.v, f0.p, input.interval)?),
    })
}

/// Feeds every update to the chosen aligner and records the attitude at the
/// requested times. A degenerate spectrum only blanks the affected rows.
pub fn run_alignment(
    input: &AlignmentInput,
    method: Method,
    opts: &RunOptions,
    meta: RunMeta,
) -> Result<RunReport> {
    if input.fixes.len() != input.intervals.len() + 1 {
        return Err(Error::InvalidInput(format!(
            "{} intervals need {} fixes, got {}",
            input.intervals.len(),
            input.intervals.len() + 1,
            input.fixes.len()
        )));
    }
    if let Some(truth) = &input.truth {
        if truth.len() != input.fixes.len() {
            return Err(Error::InvalidInput("truth does not match the fixes".into()));
        }
    }
    let mut aligner = new_aligner(method, input)?;
    let n = input.intervals.len();
    let t0 = input.fixes[0].t;
    let mut solve_at = vec![false; n + 1];
    for &e in &opts.epochs {
        let k = (e / input.interval).round();
        if k >= 1.0 && (k as usize) <= n {
            solve_at[k as usize] = true;
        }
    }
    if opts.solve_every > 0 {
        for k in (opts.solve_every..=n).step_by(opts.solve_every) {
            solve_at[k] = true;
        }
    }
    solve_at[n] = true;

    let mut rows = Vec::new();
    let mut final_estimate = None;
    for (k, imu) in input.intervals.iter().enumerate() {
        let (prev, next) = (&input.fixes[k], &input.fixes[k + 1]);
        aligner.accumulate(imu, prev, next)?;
        if !solve_at[k + 1] {
            continue;
        }
        let row = match aligner.estimate() {
            Ok(est) => {
                let estimate = dcm_to_euler(&est.current).0.to_degrees();
                let error = input.truth.as_ref().map(|truth| {
                    let c_true = quat_to_dcm(&truth[k + 1]).transpose();
                    attitude_error(&est.current, &c_true).to_degrees()
                });
                if k + 1 == n {
                    final_estimate = Some(est);
                }
                ReportRow {
                    t: next.t - t0,
                    estimate: Some(estimate),
                    error,
                    lambda_min: Some(est.lambda_min),
                }
            }
            Err(Error::DegenerateSpectrum { .. }) => ReportRow {
                t: next.t - t0,
                estimate: None,
                error: None,
                lambda_min: None,
            },
            Err(e) => return Err(e),
        };
        rows.push(row);
    }
    let (k_spectrum, _) = aligner.chains().k.eigen();
    Ok(RunReport {
        method,
        meta,
        updates: n,
        rows,
        k_spectrum,
        final_estimate,
    })
}
