//! Experiment harness: fixed-K power sweeps and joint optimization runs,
//! emitted as schema-stable CSV.

use std::io::Write;

use crate::config::SystemConfig;
use crate::error::Result;
use crate::gee::{optimal_rho, GeeProblem};
use crate::rate::{ergodic_rate, sample_gains, GainSampleSet};
use crate::solver::{
    algorithm1, algorithm2, grid_oracle, max_rate_baseline, GeeSolution, ALGORITHM2_DEFAULT_EPSILON,
};

pub const RESULT_HEADER: &str =
    "experiment_id,K,rho_watts,gee_bits_per_joule,sum_rate_bits_per_channel_use,solver_id,config_hash";

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRow {
    pub experiment_id: String,
    pub k: usize,
    pub rho_watts: f64,
    pub gee: f64,
    /// `K·E[R₁]`, bits per channel use.
    pub sum_rate: f64,
    pub solver_id: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub rows: Vec<ExperimentRow>,
    pub config_hash: String,
}

impl ExperimentResult {
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{RESULT_HEADER}")?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{:.15e},{:.15e},{:.15e},{},{}",
                r.experiment_id, r.k, r.rho_watts, r.gee, r.sum_rate, r.solver_id, self.config_hash
            )?;
        }
        Ok(())
    }

    pub fn rows_for<'a>(&'a self, solver_id: &'a str) -> impl Iterator<Item = &'a ExperimentRow> + 'a {
        self.rows.iter().filter(move |r| r.solver_id == solver_id)
    }
}

/// Solver instance for `cfg` over an existing sample set.
pub fn problem_from_config(cfg: &SystemConfig, gains: GainSampleSet<f64>) -> Result<GeeProblem<f64>> {
    cfg.validate()?;
    GeeProblem::new(gains, cfg.p_c, cfg.rho_max_watts(), cfg.k_min, cfg.k_max, cfg.bandwidth_hz)
}

fn row(prob: &GeeProblem<f64>, id: &str, solver: &str, k: usize, rho: f64) -> Result<ExperimentRow> {
    let kf = k as f64;
    let gee = crate::gee::gee(prob, kf, rho)?;
    let sum_rate = kf * ergodic_rate(&prob.gains, rho, kf)?.value;
    Ok(ExperimentRow {
        experiment_id: id.to_owned(),
        k,
        rho_watts: rho,
        gee,
        sum_rate,
        solver_id: solver.to_owned(),
    })
}

fn solution_row(prob: &GeeProblem<f64>, id: &str, sol: &GeeSolution<f64>) -> Result<ExperimentRow> {
    row(prob, id, sol.solver_id.as_str(), sol.k_star, sol.rho_star)
}

/// Rows `optimal_power` (stationary power clamped to the budget) and
/// `max_power` (full budget) for every feasible `K`, on one sample set.
pub fn fixed_k_rows(prob: &GeeProblem<f64>, experiment_id: &str) -> Result<Vec<ExperimentRow>> {
    let mut rows = Vec::with_capacity(2 * (prob.k_max - prob.k_min + 1));
    for k in prob.k_min..=prob.k_max {
        let rho = optimal_rho(prob, k as f64)?;
        rows.push(row(prob, experiment_id, "optimal_power", k, rho)?);
        rows.push(row(prob, experiment_id, "max_power", k, prob.rho_max)?);
    }
    Ok(rows)
}

/// Antenna counts swept by [`run_fixed_k_sweep`].
pub fn sweep_antenna_counts(cfg: &SystemConfig) -> Vec<usize> {
    if cfg.sweep_n_tx.is_empty() {
        vec![cfg.n_tx_per_aa]
    } else {
        cfg.sweep_n_tx.clone()
    }
}

/// Fixed-K power optimization versus full power, for each swept antenna
/// count. Experiment ids are `fixed_k_nt<N_T>`.
pub fn run_fixed_k_sweep(cfg: &SystemConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let mut rows = Vec::new();
    for n_tx in sweep_antenna_counts(cfg) {
        let sub = SystemConfig { n_tx_per_aa: n_tx, ..cfg.clone() };
        let prob = problem_from_config(&sub, sample_gains(&sub)?)?;
        rows.extend(fixed_k_rows(&prob, &format!("fixed_k_nt{n_tx}"))?);
    }
    Ok(ExperimentResult { rows, config_hash: cfg.config_hash() })
}

/// Joint `(K, ρ)` rows for one sample set: both algorithms, the max-rate
/// baseline and optionally the grid oracle.
pub fn joint_rows(prob: &GeeProblem<f64>, oracle_points: Option<usize>) -> Result<Vec<ExperimentRow>> {
    let id = "joint";
    let alg1 = algorithm1(prob)?;
    let alg2 = algorithm2(prob, prob.rho_max / 2.0, ALGORITHM2_DEFAULT_EPSILON)?;
    let base = max_rate_baseline(prob)?;
    let mut rows = vec![solution_row(prob, id, &alg1)?, solution_row(prob, id, &alg2)?, solution_row(prob, id, &base)?];
    if let Some(n) = oracle_points {
        rows.push(solution_row(prob, id, &grid_oracle(prob, n)?)?);
    }
    Ok(rows)
}

pub fn run_joint(cfg: &SystemConfig, oracle_points: Option<usize>) -> Result<ExperimentResult> {
    let prob = problem_from_config(cfg, sample_gains(cfg)?)?;
    Ok(ExperimentResult { rows: joint_rows(&prob, oracle_points)?, config_hash: cfg.config_hash() })
}
