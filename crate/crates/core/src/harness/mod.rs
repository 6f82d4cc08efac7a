//! Log ingestion, alignment runs, Monte-Carlo batches and fine-step oracles.

mod csv_io;
mod ingest;
mod montecarlo;
pub mod oracle;
mod run;

pub use csv_io::{
    read_gps, read_gps_file, read_imu, read_imu_file, read_truth, read_truth_file, write_gps,
    write_gps_file, write_imu, write_imu_file, write_truth, write_truth_file, TruthRecord,
    GPS_HEADER, IMU_HEADER, TRUTH_HEADER,
};
pub use ingest::{ingest, ingest_logs, interpolate_fixes, pair_imu, AlignmentInput, IngestOptions};
pub use montecarlo::{
    mean_and_sigma, monte_carlo, EpochStats, ExcludedRun, McSummary, DEFAULT_EPOCHS,
};
pub use oracle::{
    interval_reference, oracle_integrate, reintegrate_navigation, IntervalReference, OracleState,
};
pub use run::{run_alignment, ReportRow, RunMeta, RunOptions, RunReport};

use std::path::Path;

use crate::aligner::AidFix;
use crate::attitude::dcm_to_quat;
use crate::error::Result;
use crate::sim::{ImuSample, Scenario, SensorErrors};

pub const IMU_FILE: &str = "imu.csv";
pub const GPS_FILE: &str = "gps.csv";
pub const TRUTH_FILE: &str = "truth.csv";

/// Sensor logs of one simulated run, as they would be written to disk.
#[derive(Debug, Clone, PartialEq)]
pub struct Logs {
    pub imu: Vec<ImuSample>,
    pub gps: Vec<AidFix>,
    pub truth: Option<Vec<TruthRecord>>,
}

impl Logs {
    pub fn write_dir(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        write_imu_file(&dir.join(IMU_FILE), &self.imu)?;
        write_gps_file(&dir.join(GPS_FILE), &self.gps)?;
        if let Some(truth) = &self.truth {
            write_truth_file(&dir.join(TRUTH_FILE), truth)?;
        }
        Ok(())
    }

    /// Reads `imu.csv` and `gps.csv`, and `truth.csv` when present.
    pub fn read_dir(dir: &Path) -> Result<Self> {
        let truth_path = dir.join(TRUTH_FILE);
        Ok(Self {
            imu: read_imu_file(&dir.join(IMU_FILE))?,
            gps: read_gps_file(&dir.join(GPS_FILE))?,
            truth: truth_path
                .exists()
                .then(|| read_truth_file(&truth_path))
                .transpose()?,
        })
    }

    pub fn ingest(&self, interval: f64, opts: &IngestOptions) -> Result<AlignmentInput> {
        ingest(&self.imu, &self.gps, self.truth.as_deref(), interval, opts)
    }
}

/// Truth records at every update endpoint of a scenario.
pub fn truth_records(scenario: &Scenario) -> Result<Vec<TruthRecord>> {
    scenario
        .truth
        .iter()
        .map(|s| {
            Ok(TruthRecord {
                t: s.t,
                q: dcm_to_quat(&s.c_b_n.transpose())?,
                v: s.v,
                p: s.p,
            })
        })
        .collect()
}

/// Simulated logs of run `run`.
pub fn simulate_logs(scenario: &Scenario, errors: &SensorErrors, run: u64) -> Result<Logs> {
    Ok(Logs {
        imu: scenario.imu(errors, run),
        gps: scenario.gps(errors, run)?,
        truth: Some(truth_records(scenario)?),
    })
}

/// Alignment input of run `run`, built through the same ingestion path as
/// replayed files.
pub fn simulate_input(
    scenario: &Scenario,
    errors: &SensorErrors,
    run: u64,
) -> Result<AlignmentInput> {
    simulate_logs(scenario, errors, run)?
        .ingest(scenario.config().interval, &IngestOptions::default())
}
