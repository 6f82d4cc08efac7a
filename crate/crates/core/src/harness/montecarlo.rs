use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::run::{run_alignment, RunMeta, RunOptions};
use super::simulate_input;
use crate::aligner::Method;
use crate::error::{Error, Result};
use crate::sim::{Scenario, SensorErrors};

pub const DEFAULT_EPOCHS: [f64; 6] = [5.0, 10.0, 20.0, 60.0, 100.0, 300.0];

/// Error statistics at one epoch (deg).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub t: f64,
    /// Roll, pitch, yaw.
    pub mean: [f64; 3],
    pub three_sigma: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExcludedRun {
    pub run: u64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McSummary {
    pub method: Method,
    pub runs_requested: u64,
    pub runs_completed: u64,
    pub excluded: Vec<ExcludedRun>,
    pub epochs: Vec<EpochStats>,
}

/// Mean and sample standard deviation. Values are sorted first so the result
/// does not depend on their order; deviations are taken from the smallest
/// value so identical inputs give exactly zero spread.
pub fn mean_and_sigma(values: &[f64]) -> (f64, f64) {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    let shift = v[0];
    let (s1, s2) = v.iter().fold((0.0, 0.0), |(a, b), x| {
        let d = x - shift;
        (a + d, b + d * d)
    });
    let mean = shift + s1 / n;
    let var = if v.len() > 1 {
        ((s2 - s1 * s1 / n) / (n - 1.0)).max(0.0)
    } else {
        0.0
    };
    (mean, var.sqrt())
}

/// Independent seeded runs on a shared scenario, executed in parallel.
/// Results are collected in run order, so scheduling never changes them.
pub fn monte_carlo(
    scenario: &Scenario,
    errors: &SensorErrors,
    n_runs: u64,
    method: Method,
    epochs: &[f64],
    config_hash: Option<String>,
) -> Result<McSummary> {
    if n_runs < 2 {
        return Err(Error::InvalidInput(format!(
            "Monte-Carlo needs at least two runs, got {n_runs}"
        )));
    }
    let interval = scenario.config().interval;
    let opts = RunOptions {
        solve_every: 0,
        epochs: epochs.to_vec(),
    };
    let outcomes: Vec<std::result::Result<Vec<[f64; 3]>, String>> = (0..n_runs)
        .into_par_iter()
        .map(|run| {
            let input = simulate_input(scenario, errors, run).map_err(|e| e.to_string())?;
            let meta = RunMeta {
                seed: Some(errors.rng_seed),
                run: Some(run),
                config_hash: config_hash.clone(),
            };
            let report = run_alignment(&input, method, &opts, meta).map_err(|e| e.to_string())?;
            epochs
                .iter()
                .map(|&t| {
                    report
                        .row_at(t, interval)
                        .and_then(|r| r.error)
                        .ok_or_else(|| format!("no attitude solution at t = {t} s"))
                })
                .collect()
        })
        .collect();

    let mut excluded = Vec::new();
    let mut completed = Vec::new();
    for (run, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Ok(errs) => completed.push(errs),
            Err(reason) => excluded.push(ExcludedRun {
                run: run as u64,
                reason,
            }),
        }
    }
    let stats = if completed.is_empty() {
        Vec::new()
    } else {
        epochs
            .iter()
            .enumerate()
            .map(|(i, &t)| {
                let mut mean = [0.0; 3];
                let mut three_sigma = [0.0; 3];
                for axis in 0..3 {
                    let values: Vec<f64> = completed.iter().map(|r| r[i][axis]).collect();
                    let (m, s) = mean_and_sigma(&values);
                    mean[axis] = m;
                    three_sigma[axis] = 3.0 * s;
                }
                EpochStats {
                    t,
                    mean,
                    three_sigma,
                }
            })
            .collect()
    };
    Ok(McSummary {
        method,
        runs_requested: n_runs,
        runs_completed: completed.len() as u64,
        excluded,
        epochs: stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn identical_values_have_zero_spread() {
        let (m, s) = mean_and_sigma(&[0.1; 7]);
        assert_eq!(m, 0.1);
        assert_eq!(s, 0.0);
    }

    #[test]
    fn textbook_values() {
        let (m, s) = mean_and_sigma(&[2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0]);
        assert!((m - 5.0).abs() < 1e-15);
        assert!((s - (32.0f64 / 7.0).sqrt()).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn permutation_invariant(mut v in prop::collection::vec(-1e3..1e3f64, 2..40), seed in any::<u64>()) {
            let a = mean_and_sigma(&v);
            // deterministic shuffle
            let mut x = seed | 1;
            for i in (1..v.len()).rev() {
                x ^= x << 13; x ^= x >> 7; x ^= x << 17;
                v.swap(i, (x % (i as u64 + 1)) as usize);
            }
            let b = mean_and_sigma(&v);
            prop_assert_eq!(a.0.to_bits(), b.0.to_bits());
            prop_assert_eq!(a.1.to_bits(), b.1.to_bits());
        }
    }
}
