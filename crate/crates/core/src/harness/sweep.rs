use std::collections::VecDeque;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::ScenarioConfig;
use super::run::{run_example, RunResult};
use crate::error::{Error, Result};
use crate::knowledge::Parameters;

/// `n` evenly spaced values from `start` to `end` inclusive.
pub fn linspace(start: f64, end: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..n)
            .map(|i| {
                if i == n - 1 {
                    end
                } else {
                    start + (end - start) * i as f64 / (n - 1) as f64
                }
            })
            .collect(),
    }
}

/// θ_mc from 0 to the weight sum `M+1` in 15 steps.
pub fn default_theta_mc_grid(feature_count: usize) -> Vec<f64> {
    linspace(0.0, feature_count as f64 + 1.0, 15)
}

/// δ_aw from 0 to 0.5 in 10 steps.
pub fn default_delta_aw_grid() -> Vec<f64> {
    linspace(0.0, 0.5, 10)
}

/// One grid cell: the parameters varied and the run summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SweepCell {
    pub theta_mc: f64,
    pub delta_aw: f64,
    pub result: RunResult,
}

/// Row-major grid over θ_mc (rows) and δ_aw (columns).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SweepResult {
    pub theta_mc: Vec<f64>,
    pub delta_aw: Vec<f64>,
    pub cells: Vec<SweepCell>,
}

/// Runs `base` once per (θ_mc, δ_aw) cell, in parallel.
pub fn sweep(base: &ScenarioConfig, theta_mc: &[f64], delta_aw: &[f64]) -> Result<SweepResult> {
    if theta_mc.is_empty() || delta_aw.is_empty() {
        return Err(Error::Config("sweep ranges must be non-empty".into()));
    }
    base.validate()?;
    let grid: Vec<(f64, f64)> = theta_mc
        .iter()
        .flat_map(|&t| delta_aw.iter().map(move |&d| (t, d)))
        .collect();
    let cells = grid
        .par_iter()
        .map(|&(t, d)| {
            let config = ScenarioConfig {
                parameters: Parameters {
                    theta_mc: t,
                    delta_aw: d,
                    ..base.parameters
                },
                ..base.clone()
            };
            run_example(&config).map(|run| SweepCell {
                theta_mc: t,
                delta_aw: d,
                result: run.result,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult {
        theta_mc: theta_mc.to_vec(),
        delta_aw: delta_aw.to_vec(),
        cells,
    })
}

impl SweepResult {
    pub fn rows(&self) -> usize {
        self.theta_mc.len()
    }

    pub fn columns(&self) -> usize {
        self.delta_aw.len()
    }

    pub fn cell(&self, row: usize, column: usize) -> &SweepCell {
        &self.cells[row * self.columns() + column]
    }

    /// Success flags indexed `[θ_mc row][δ_aw column]`.
    pub fn success_grid(&self) -> Vec<Vec<bool>> {
        (0..self.rows())
            .map(|r| {
                (0..self.columns())
                    .map(|c| self.cell(r, c).result.succeeded())
                    .collect()
            })
            .collect()
    }

    /// Size of the largest 4-connected group of successful cells.
    pub fn largest_success_region(&self) -> usize {
        let grid = self.success_grid();
        let (rows, cols) = (self.rows(), self.columns());
        let mut seen = vec![vec![false; cols]; rows];
        let mut best = 0;
        for r in 0..rows {
            for c in 0..cols {
                if !grid[r][c] || seen[r][c] {
                    continue;
                }
                let mut size = 0;
                let mut queue = VecDeque::from([(r, c)]);
                seen[r][c] = true;
                while let Some((y, x)) = queue.pop_front() {
                    size += 1;
                    let mut visit = |ny: usize, nx: usize| {
                        if grid[ny][nx] && !seen[ny][nx] {
                            seen[ny][nx] = true;
                            queue.push_back((ny, nx));
                        }
                    };
                    if y > 0 {
                        visit(y - 1, x);
                    }
                    if y + 1 < rows {
                        visit(y + 1, x);
                    }
                    if x > 0 {
                        visit(y, x - 1);
                    }
                    if x + 1 < cols {
                        visit(y, x + 1);
                    }
                }
                best = best.max(size);
            }
        }
        best
    }

    /// CSV with a header and one row per cell.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut writer = csv::Writer::from_writer(out);
        writer.write_record([
            "theta_mc",
            "delta_aw",
            "success",
            "steps_to_desired",
            "first_full_coverage_step",
            "final_category_count",
            "residual_category_count",
        ])?;
        for cell in &self.cells {
            let r = &cell.result;
            let opt = |v: Option<u64>| v.map(|s| s.to_string()).unwrap_or_default();
            writer.write_record([
                cell.theta_mc.to_string(),
                cell.delta_aw.to_string(),
                r.succeeded().to_string(),
                opt(r.steps_to_desired),
                opt(r.first_full_coverage_step),
                r.final_category_count.to_string(),
                r.residual_category_count.to_string(),
            ])?;
        }
        writer.flush().map_err(|e| Error::io("<csv>", e))
    }

    /// One JSON object per cell, one per line.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<()> {
        for cell in &self.cells {
            let line = serde_json::to_string(cell).map_err(|e| Error::InvalidValue(e.to_string()))?;
            writeln!(out, "{line}").map_err(|e| Error::io("<jsonl>", e))?;
        }
        Ok(())
    }
}
