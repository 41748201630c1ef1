//! Shipped experiment presets for the adaptive-vs-parallel gap studies on
//! generalized amplitude damping channels.
//!
//! fig3 sweeps the common noise parameter for damping 0.2 vs 0.3 and
//! compares the strategy distance against the parallel (diamond) distance.
//! fig4 and fig5 fix the noise pair 0.2 vs 0.3 and sweep the common damping;
//! the distillable-distinguishability gap peaks near damping 0.2 while the
//! cost gap only opens for damping in roughly [0.35, 0.8], so those presets
//! sweep grids that cover both the 0.2 reference point and the region where
//! the gap is numerically resolvable.

use qstrat_solver::SolverOptions;

use crate::sweep::SweepConfig;
use crate::CliError;

pub fn preset_names() -> &'static [&'static str] {
    &["fig3", "fig4", "fig5"]
}

pub fn preset(name: &str, output_override: Option<&str>) -> Result<SweepConfig, CliError> {
    let grid_21: Vec<f64> = (0..=20).map(|k| k as f64 * 0.05).collect();
    let cfg = match name {
        "fig3" => SweepConfig {
            channel_a: "gadc:0.2:0".into(),
            channel_b: "gadc:0.3:0".into(),
            n_values: vec![1, 2, 3],
            epsilon: 0.05,
            sweep_param: "noise".into(),
            grid: grid_21,
            quantities: vec!["distance".into()],
            modes: vec!["adaptive".into(), "parallel".into()],
            output_path: "fig3.csv".into(),
            solver: SolverOptions::default(),
        },
        "fig4" => SweepConfig {
            channel_a: "gadc:0:0.2".into(),
            channel_b: "gadc:0:0.3".into(),
            n_values: vec![1, 2, 3],
            epsilon: 0.05,
            sweep_param: "gamma".into(),
            grid: vec![0.05, 0.2, 0.35, 0.5, 0.65, 0.8, 0.95],
            quantities: vec!["dmin".into()],
            modes: vec!["adaptive".into(), "parallel".into()],
            output_path: "fig4.csv".into(),
            solver: SolverOptions::default(),
        },
        "fig5" => SweepConfig {
            channel_a: "gadc:0:0.2".into(),
            channel_b: "gadc:0:0.3".into(),
            n_values: vec![1, 2, 3],
            epsilon: 0.05,
            sweep_param: "gamma".into(),
            grid: vec![0.2, 0.35, 0.5, 0.65, 0.8],
            quantities: vec!["dmax".into()],
            modes: vec!["adaptive".into(), "parallel".into()],
            output_path: "fig5.csv".into(),
            solver: SolverOptions::default(),
        },
        other => {
            return Err(CliError::Config(format!(
                "unknown preset '{other}'; available: {}",
                preset_names().join(", ")
            )))
        }
    };
    let mut cfg = cfg;
    if let Some(path) = output_override {
        cfg.output_path = path.to_string();
    }
    cfg.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate() {
        for name in preset_names() {
            let cfg = preset(name, Some("/tmp/x.csv")).unwrap();
            assert_eq!(cfg.output_path, "/tmp/x.csv");
            assert!(cfg.grid.iter().all(|&x| (0.0..=1.0).contains(&x)));
        }
        assert!(preset("fig9", None).is_err());
    }
}
