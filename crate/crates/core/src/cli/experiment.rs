//! Seeded Monte-Carlo runs and their reports.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bcs::{
    baseline_mini_dis, baseline_ran_loc, baseline_ran_phi, bcs_solve, worker_pool, Instance, Solution,
};
use crate::channel::SubBand;
use crate::error::{Error, Result};
use crate::geometry::Point3;
use crate::rng::SplitMix64;

use super::config::{Algorithm, ExperimentConfig, SeedRange};

const UE_STREAM: u64 = 0;
const RAN_LOC_STREAM: u64 = 1000;
const RAN_PHI_STREAM: u64 = 2000;

/// UE positions for `seed`: `x` then `y` per UE from one SplitMix64 stream,
/// uniform over the floor, at the configured height. The first `U` draws do
/// not depend on how many UEs follow.
pub fn draw_ues(config: &ExperimentConfig, seed: u64, count: usize) -> Vec<Point3> {
    let mut rng = SplitMix64::stream(seed, UE_STREAM);
    (0..count)
        .map(|_| {
            let x = rng.uniform(0.0, config.room_width_m);
            let y = rng.uniform(0.0, config.room_length_m);
            Point3::new(x, y, config.ue_height_m)
        })
        .collect()
}

/// UE sets to run for one seed.
fn ue_sets(config: &ExperimentConfig, seed: u64) -> Vec<Vec<Point3>> {
    match &config.ue_positions {
        Some(p) => vec![p.clone()],
        None => config.ue_counts.iter().map(|&u| draw_ues(config, seed, u)).collect(),
    }
}

pub fn run_algorithm(config: &ExperimentConfig, instance: &Instance, algo: Algorithm, seed: u64) -> Result<Solution> {
    let inner = config.inner();
    let u = instance.scene.ue_count() as u64;
    match algo {
        Algorithm::Bcs => bcs_solve(instance, &config.grid, &inner),
        Algorithm::MiniDis => baseline_mini_dis(instance, &config.grid, &inner),
        Algorithm::RanLoc => baseline_ran_loc(instance, &inner, &mut SplitMix64::stream(seed, RAN_LOC_STREAM + u)),
        Algorithm::RanPhi => {
            baseline_ran_phi(instance, &config.grid, &inner, &mut SplitMix64::stream(seed, RAN_PHI_STREAM + u))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub seed: u64,
    pub algo: Algorithm,
    pub ue_count: usize,
    pub ues: Vec<Point3>,
    pub solution: Option<Solution>,
    /// Diagnostic for a run that failed outright.
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub wallclock_s: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub algo: Algorithm,
    pub ue_count: usize,
    pub runs: usize,
    pub feasible_runs: usize,
    /// Infeasible runs count as zero.
    pub mean_sum_rate_bps: f64,
    pub std_sum_rate_bps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: ExperimentConfig,
    pub ue_height_m: f64,
    pub bands: Vec<SubBand>,
    pub seeds: SeedRange,
    pub records: Vec<RunRecord>,
    pub aggregates: Vec<Aggregate>,
}

fn aggregate(config: &ExperimentConfig, records: &[RunRecord]) -> Vec<Aggregate> {
    let mut counts: Vec<usize> = records.iter().map(|r| r.ue_count).collect();
    counts.sort_unstable();
    counts.dedup();
    let mut out = Vec::new();
    for &algo in &config.algorithms {
        for &u in &counts {
            let rates: Vec<f64> = records
                .iter()
                .filter(|r| r.algo == algo && r.ue_count == u)
                .filter_map(|r| r.solution.as_ref().map(|s| s.sum_rate))
                .collect();
            let feasible = records
                .iter()
                .filter(|r| r.algo == algo && r.ue_count == u)
                .filter(|r| r.solution.as_ref().is_some_and(|s| s.feasible))
                .count();
            let n = rates.len();
            let mean = if n > 0 { rates.iter().sum::<f64>() / n as f64 } else { 0.0 };
            let std = if n > 1 {
                (rates.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
            } else {
                0.0
            };
            out.push(Aggregate {
                algo,
                ue_count: u,
                runs: n,
                feasible_runs: feasible,
                mean_sum_rate_bps: mean,
                std_sum_rate_bps: std,
            });
        }
    }
    out
}

fn run_one(config: &ExperimentConfig, seed: u64, ues: &[Point3], algo: Algorithm, wallclock: bool) -> RunRecord {
    let start = Instant::now();
    let outcome = catch_unwind(AssertUnwindSafe(|| {
        let instance = config.instance(ues.to_vec())?;
        run_algorithm(config, &instance, algo, seed)
    }));
    let elapsed = start.elapsed().as_secs_f64();
    let (solution, error) = match outcome {
        Ok(Ok(s)) => (Some(s), None),
        Ok(Err(e)) => (None, Some(e.to_string())),
        Err(_) => (None, Some("panic during solve".to_string())),
    };
    if let Some(e) = &error {
        eprintln!("seed {seed}, {} UEs, {}: {e}", ues.len(), algo.name());
    }
    RunRecord {
        seed,
        algo,
        ue_count: ues.len(),
        ues: ues.to_vec(),
        solution,
        error,
        wallclock_s: wallclock.then_some(elapsed),
    }
}

/// Runs every selected algorithm for every seed and UE count. Jobs are
/// independent; records come back in (seed, UE count, algorithm) order
/// whatever the worker count.
pub fn run_experiment(config: &ExperimentConfig, seeds: SeedRange, wallclock: bool) -> Result<RunReport> {
    config.validate()?;
    seeds.validate()?;
    let jobs: Vec<(u64, Vec<Point3>)> = seeds
        .iter()
        .flat_map(|seed| ue_sets(config, seed).into_iter().map(move |u| (seed, u)))
        .collect();
    let records: Vec<RunRecord> = worker_pool().install(|| {
        jobs.par_iter()
            .flat_map_iter(|(seed, ues)| {
                config
                    .algorithms
                    .iter()
                    .map(|&a| run_one(config, *seed, ues, a, wallclock))
                    .collect::<Vec<_>>()
            })
            .collect()
    });
    Ok(RunReport {
        aggregates: aggregate(config, &records),
        ue_height_m: config.ue_height_m,
        bands: config.sub_bands()?,
        seeds,
        config: config.clone(),
        records,
    })
}

impl RunReport {
    /// Re-checks every stored solution against its instance.
    pub fn validate(&self) -> Result<()> {
        self.config.validate()?;
        for r in &self.records {
            if r.ues.len() != r.ue_count {
                return Err(Error::Domain(format!("seed {} record lists {} UEs", r.seed, r.ues.len())));
            }
            match (&r.solution, &r.error) {
                (Some(s), _) => {
                    let instance = self.config.instance(r.ues.clone())?;
                    s.check(&instance).map_err(|e| {
                        Error::Domain(format!("seed {}, {} UEs, {}: {e}", r.seed, r.ue_count, r.algo.name()))
                    })?;
                }
                (None, None) => {
                    return Err(Error::Domain(format!("seed {} record has neither solution nor error", r.seed)));
                }
                (None, Some(_)) => {}
            }
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let report: Self = serde_json::from_str(&text).map_err(|e| Error::Config(e.to_string()))?;
        report.validate()?;
        Ok(report)
    }

    pub fn write_summary(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["seed", "algo", "U", "sum_rate_bps", "feasible", "wallclock_s"])?;
        for r in &self.records {
            let (rate, feasible) = match &r.solution {
                Some(s) => (s.sum_rate.to_string(), s.feasible.to_string()),
                None => (String::new(), "false".to_string()),
            };
            w.write_record([
                r.seed.to_string(),
                r.algo.name().to_string(),
                r.ue_count.to_string(),
                rate,
                feasible,
                r.wallclock_s.map(|t| t.to_string()).unwrap_or_default(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_aggregate(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["algo", "U", "runs", "feasible_runs", "mean_sum_rate_bps", "std_sum_rate_bps"])?;
        for a in &self.aggregates {
            w.write_record([
                a.algo.name().to_string(),
                a.ue_count.to_string(),
                a.runs.to_string(),
                a.feasible_runs.to_string(),
                a.mean_sum_rate_bps.to_string(),
                a.std_sum_rate_bps.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Writes `summary.csv`, `aggregate.csv` and `report.json` into `dir`.
    pub fn write_all(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        self.write_summary(&dir.join("summary.csv"))?;
        self.write_aggregate(&dir.join("aggregate.csv"))?;
        let json = serde_json::to_string_pretty(self).map_err(|e| Error::Io(e.to_string()))?;
        std::fs::write(dir.join("report.json"), json)?;
        Ok(())
    }

    pub fn mean(&self, algo: Algorithm, ue_count: usize) -> Option<f64> {
        self.aggregates
            .iter()
            .find(|a| a.algo == algo && a.ue_count == ue_count)
            .map(|a| a.mean_sum_rate_bps)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ue_draws_are_nested_and_inside_the_room() {
        let c = ExperimentConfig::default();
        let four = draw_ues(&c, 7, 4);
        let two = draw_ues(&c, 7, 2);
        assert_eq!(&four[..2], &two[..]);
        assert!(four.iter().all(|p| p.x >= 0.0 && p.x < 5.0 && p.y >= 0.0 && p.y < 8.0 && p.z == 1.0));
        assert_ne!(draw_ues(&c, 8, 1), draw_ues(&c, 7, 1));
    }

    #[test]
    fn aggregates_average_over_runs() {
        let mut c = ExperimentConfig::default();
        c.algorithms = vec![Algorithm::Bcs];
        let rec = |seed, rate: f64| RunRecord {
            seed,
            algo: Algorithm::Bcs,
            ue_count: 1,
            ues: vec![],
            solution: None,
            error: Some(rate.to_string()),
            wallclock_s: None,
        };
        let a = aggregate(&c, &[rec(1, 1.0), rec(2, 2.0)]);
        assert_eq!(a.len(), 1);
        assert_eq!(a[0].runs, 0);
        assert_eq!(a[0].mean_sum_rate_bps, 0.0);
    }
}
