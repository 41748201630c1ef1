//! Sweep configs and the cell runner with resume support.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::sync::mpsc;
use std::sync::{Arc, Mutex};

use qstrat_comb::{n_fold_sequential_choi, StrategyChoi};
use qstrat_programs::{evaluate, CrossCheck, EvalOptions, Mode, ProgramError, Quantity};
use qstrat_solver::SolverOptions;
use serde_json::Value;

use crate::csvio::{self, format_sig12};
use crate::spec::{parse_channel_spec, ChannelSpec};
use crate::CliError;

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub channel_a: String,
    pub channel_b: String,
    pub n_values: Vec<usize>,
    pub epsilon: f64,
    /// Which common GADC parameter the grid sweeps on both channels.
    pub sweep_param: String,
    pub grid: Vec<f64>,
    pub quantities: Vec<String>,
    pub modes: Vec<String>,
    pub output_path: String,
    pub solver: SolverOptions,
}

impl SweepConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let v: Value = serde_json::from_str(text)
            .map_err(|e| CliError::Config(format!("config is not JSON: {e}")))?;
        let str_field = |name: &str| -> Result<String, CliError> {
            v.get(name)
                .and_then(Value::as_str)
                .map(str::to_string)
                .ok_or_else(|| CliError::Config(format!("missing string field '{name}'")))
        };
        let f64_field = |name: &str| -> Result<f64, CliError> {
            v.get(name)
                .and_then(Value::as_f64)
                .ok_or_else(|| CliError::Config(format!("missing numeric field '{name}'")))
        };
        let list_field = |name: &str| -> Result<Vec<Value>, CliError> {
            v.get(name)
                .and_then(Value::as_array)
                .cloned()
                .ok_or_else(|| CliError::Config(format!("missing array field '{name}'")))
        };
        let mut solver = SolverOptions::default();
        if let Some(s) = v.get("solver") {
            if let Some(x) = s.get("gap_tol").and_then(Value::as_f64) {
                solver.gap_tol = x;
            }
            if let Some(x) = s.get("feas_tol").and_then(Value::as_f64) {
                solver.feas_tol = x;
            }
            if let Some(x) = s.get("max_iters").and_then(Value::as_u64) {
                solver.max_iters = x as usize;
            }
            if let Some(x) = s.get("step_fraction").and_then(Value::as_f64) {
                solver.step_fraction = x;
            }
        }
        let cfg = SweepConfig {
            channel_a: str_field("channel_a")?,
            channel_b: str_field("channel_b")?,
            n_values: list_field("n_values")?
                .iter()
                .map(|x| {
                    x.as_u64()
                        .map(|u| u as usize)
                        .ok_or_else(|| CliError::Config("n_values entries must be integers".into()))
                })
                .collect::<Result<_, _>>()?,
            epsilon: f64_field("epsilon")?,
            sweep_param: str_field("sweep_param")?,
            grid: list_field("grid")?
                .iter()
                .map(|x| {
                    x.as_f64()
                        .ok_or_else(|| CliError::Config("grid entries must be numbers".into()))
                })
                .collect::<Result<_, _>>()?,
            quantities: list_field("quantities")?
                .iter()
                .map(|x| {
                    x.as_str()
                        .map(str::to_string)
                        .ok_or_else(|| CliError::Config("quantities entries must be strings".into()))
                })
                .collect::<Result<_, _>>()?,
            modes: list_field("modes")?
                .iter()
                .map(|x| {
                    x.as_str()
                        .map(str::to_string)
                        .ok_or_else(|| CliError::Config("modes entries must be strings".into()))
                })
                .collect::<Result<_, _>>()?,
            output_path: str_field("output_path")?,
            solver,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        let list = |xs: &[f64]| -> String {
            let parts: Vec<String> = xs.iter().map(|x| format!("{x}")).collect();
            format!("[{}]", parts.join(","))
        };
        let strs = |xs: &[String]| -> String {
            let parts: Vec<String> = xs
                .iter()
                .map(|x| serde_json::to_string(x).expect("string"))
                .collect();
            format!("[{}]", parts.join(","))
        };
        format!(
            "{{\"channel_a\":{},\"channel_b\":{},\"n_values\":{:?},\"epsilon\":{},\"sweep_param\":{},\"grid\":{},\"quantities\":{},\"modes\":{},\"output_path\":{}}}",
            serde_json::to_string(&self.channel_a).expect("string"),
            serde_json::to_string(&self.channel_b).expect("string"),
            self.n_values,
            self.epsilon,
            serde_json::to_string(&self.sweep_param).expect("string"),
            list(&self.grid),
            strs(&self.quantities),
            strs(&self.modes),
            serde_json::to_string(&self.output_path).expect("string"),
        )
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.n_values.is_empty() || self.n_values.iter().any(|&n| n < 1) {
            return Err(CliError::Config("n_values must be nonempty, each >= 1".into()));
        }
        if !(0.0..=1.0).contains(&self.epsilon) {
            return Err(CliError::Config("epsilon must lie in [0,1]".into()));
        }
        if self.sweep_param != "noise" && self.sweep_param != "gamma" {
            return Err(CliError::Config(format!(
                "sweep_param must be 'noise' or 'gamma', got '{}'",
                self.sweep_param
            )));
        }
        if self.grid.iter().any(|&x| !(0.0..=1.0).contains(&x)) {
            return Err(CliError::Config("grid values must lie in [0,1]".into()));
        }
        if self.quantities.is_empty() || self.modes.is_empty() {
            return Err(CliError::Config("quantities and modes must be nonempty".into()));
        }
        for q in &self.quantities {
            Quantity::parse(q).map_err(|e| CliError::Config(e.to_string()))?;
        }
        for m in &self.modes {
            Mode::parse(m).map_err(|e| CliError::Config(e.to_string()))?;
        }
        let a = parse_channel_spec(&self.channel_a)?;
        let b = parse_channel_spec(&self.channel_b)?;
        if a.gadc_params().is_none() || b.gadc_params().is_none() {
            return Err(CliError::Config(
                "sweeps vary GADC parameters, so both channels must be gadc specs".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub gamma1: f64,
    pub noise1: f64,
    pub gamma2: f64,
    pub noise2: f64,
    pub n: usize,
    pub epsilon: f64,
    pub mode: String,
    pub quantity: String,
    pub value: f64,
    pub gap: f64,
    pub iterations: usize,
    pub status: String,
}

impl ResultRow {
    /// Canonical key: the formatted key columns, so resume matching is
    /// immune to float printing drift.
    pub fn key(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            format_sig12(self.gamma1),
            format_sig12(self.noise1),
            format_sig12(self.gamma2),
            format_sig12(self.noise2),
            self.n,
            format_sig12(self.epsilon),
            self.mode,
            self.quantity
        )
    }
}

#[derive(Debug, Clone)]
struct Cell {
    gamma1: f64,
    noise1: f64,
    gamma2: f64,
    noise2: f64,
    n: usize,
    epsilon: f64,
    mode: Mode,
    quantity: Quantity,
}

impl Cell {
    fn key(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            format_sig12(self.gamma1),
            format_sig12(self.noise1),
            format_sig12(self.gamma2),
            format_sig12(self.noise2),
            self.n,
            format_sig12(self.epsilon),
            self.mode.as_str(),
            self.quantity.as_str()
        )
    }
}

fn build_comb(gamma: f64, noise: f64, n: usize) -> Result<StrategyChoi, CliError> {
    let one = ChannelSpec::Gadc { gamma, noise }.build()?;
    Ok(n_fold_sequential_choi(&one, n)?)
}

fn run_cell(cell: &Cell, solver: &SolverOptions) -> ResultRow {
    let template = ResultRow {
        gamma1: cell.gamma1,
        noise1: cell.noise1,
        gamma2: cell.gamma2,
        noise2: cell.noise2,
        n: cell.n,
        epsilon: cell.epsilon,
        mode: cell.mode.as_str().into(),
        quantity: cell.quantity.as_str().into(),
        value: f64::INFINITY,
        gap: f64::INFINITY,
        iterations: 0,
        status: "build_error".into(),
    };
    let combs = build_comb(cell.gamma1, cell.noise1, cell.n)
        .and_then(|a| build_comb(cell.gamma2, cell.noise2, cell.n).map(|b| (a, b)));
    let (a, b) = match combs {
        Ok(pair) => pair,
        Err(_) => return template,
    };
    let options = EvalOptions {
        solver: solver.clone(),
        cross_check: CrossCheck::Never,
        ..Default::default()
    };
    match evaluate(cell.quantity, &a, &b, cell.epsilon, cell.mode, &options) {
        Ok(result) => ResultRow {
            value: result.value,
            gap: result.gap,
            iterations: result.solver.iterations,
            status: result.solver.status.as_str().into(),
            ..template
        },
        Err(ProgramError::Solver { report, .. }) => ResultRow {
            value: report.primal_value,
            gap: report.gap,
            iterations: report.iterations,
            status: report.status.as_str().into(),
            ..template
        },
        Err(_) => template,
    }
}

/// Runs a sweep, skipping cells already present in the output CSV and
/// appending the missing rows in deterministic key order. Cells run
/// concurrently on `jobs` workers; writes stream through one writer in key
/// order, so an interrupted run leaves a clean resumable prefix.
pub fn run_sweep(cfg: &SweepConfig, jobs: usize) -> Result<Vec<ResultRow>, CliError> {
    cfg.validate()?;
    let spec_a = parse_channel_spec(&cfg.channel_a)?;
    let spec_b = parse_channel_spec(&cfg.channel_b)?;

    // Enumerate cells in deterministic key order.
    let mut cells: Vec<Cell> = Vec::new();
    for &x in &cfg.grid {
        let (a, b) = match cfg.sweep_param.as_str() {
            "noise" => (
                spec_a.with_noise(x).expect("validated gadc"),
                spec_b.with_noise(x).expect("validated gadc"),
            ),
            _ => (
                spec_a.with_gamma(x).expect("validated gadc"),
                spec_b.with_gamma(x).expect("validated gadc"),
            ),
        };
        let (g1, n1) = a.gadc_params().expect("gadc");
        let (g2, n2) = b.gadc_params().expect("gadc");
        for &n in &cfg.n_values {
            for mode in &cfg.modes {
                for quantity in &cfg.quantities {
                    cells.push(Cell {
                        gamma1: g1,
                        noise1: n1,
                        gamma2: g2,
                        noise2: n2,
                        n,
                        epsilon: cfg.epsilon,
                        mode: Mode::parse(mode).expect("validated"),
                        quantity: Quantity::parse(quantity).expect("validated"),
                    });
                }
            }
        }
    }
    cells.sort_by_key(|c| c.key());
    cells.dedup_by_key(|c| c.key());

    // Resume: skip keys already present.
    let path = Path::new(&cfg.output_path);
    let existing: Vec<ResultRow> = if path.exists() {
        csvio::read_csv(path)?
    } else {
        Vec::new()
    };
    let have: BTreeSet<String> = existing.iter().map(ResultRow::key).collect();
    let todo: Vec<(usize, Cell)> = cells
        .into_iter()
        .filter(|c| !have.contains(&c.key()))
        .enumerate()
        .collect();

    let mut new_rows: Vec<ResultRow> = Vec::with_capacity(todo.len());
    if !todo.is_empty() {
        let write_header = !path.exists();
        let (tx, rx) = mpsc::channel::<(usize, ResultRow)>();
        // Workers pop from the back; reverse so low keys run first and the
        // ordered writer can stream.
        let mut stack = todo.clone();
        stack.reverse();
        let queue = Arc::new(Mutex::new(stack));
        let solver = cfg.solver.clone();
        let workers = jobs.max(1);
        std::thread::scope(|scope| {
            for _ in 0..workers {
                let tx = tx.clone();
                let queue = Arc::clone(&queue);
                let solver = solver.clone();
                scope.spawn(move || loop {
                    let item = { queue.lock().expect("queue lock").pop() };
                    let Some((idx, cell)) = item else { break };
                    let row = run_cell(&cell, &solver);
                    if tx.send((idx, row)).is_err() {
                        break;
                    }
                });
            }
            drop(tx);
            // Single writer: flush rows in key order as soon as the prefix
            // is complete.
            let mut pending: BTreeMap<usize, ResultRow> = BTreeMap::new();
            let mut next_to_write = 0usize;
            let mut header_due = write_header;
            for (idx, row) in rx {
                pending.insert(idx, row);
                let mut batch: Vec<ResultRow> = Vec::new();
                while let Some(row) = pending.remove(&next_to_write) {
                    batch.push(row);
                    next_to_write += 1;
                }
                if !batch.is_empty() {
                    csvio::append_rows(path, &batch, header_due).expect("csv write");
                    header_due = false;
                    new_rows.extend(batch);
                }
            }
        });
    }

    let mut all = existing;
    all.extend(new_rows);
    Ok(all)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_config(dir: &Path) -> SweepConfig {
        SweepConfig {
            channel_a: "gadc:0.2:0".into(),
            channel_b: "gadc:0.3:0".into(),
            n_values: vec![1],
            epsilon: 0.05,
            sweep_param: "noise".into(),
            grid: vec![0.0, 0.5, 1.0],
            quantities: vec!["distance".into()],
            modes: vec!["adaptive".into()],
            output_path: dir.join("out.csv").to_string_lossy().into_owned(),
            solver: SolverOptions::default(),
        }
    }

    #[test]
    fn sweep_emits_one_row_per_cell_and_resumes_byte_identically() {
        let dir = std::env::temp_dir().join(format!("qstrat_sweep_{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let cfg = tiny_config(&dir);
        let rows = run_sweep(&cfg, 2).unwrap();
        assert_eq!(rows.len(), 3);
        let bytes1 = std::fs::read(&cfg.output_path).unwrap();
        // Re-run: no new rows, file untouched.
        let rows2 = run_sweep(&cfg, 1).unwrap();
        assert_eq!(rows2.len(), 3);
        let bytes2 = std::fs::read(&cfg.output_path).unwrap();
        assert_eq!(bytes1, bytes2);
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn config_roundtrip_and_validation() {
        let dir = std::env::temp_dir();
        let cfg = tiny_config(&dir);
        let parsed = SweepConfig::from_json(&cfg.to_json()).unwrap();
        assert_eq!(parsed.grid, cfg.grid);
        assert_eq!(parsed.quantities, cfg.quantities);

        let mut bad = cfg.clone();
        bad.grid = vec![1.5];
        assert!(bad.validate().is_err());
        let mut bad2 = cfg;
        bad2.channel_a = "identity:2".into();
        assert!(bad2.validate().is_err());
    }
}
