//! Drive the experiment layer from code: a preset, then a config written
//! inline, both rendered as CSV.

use oneway_noise::experiment::{self, ExperimentConfig};

fn main() -> oneway_noise::Result<()> {
    let mut cfg = experiment::preset("fig1")?;
    cfg.sweep.steps = 4;
    print!("{}", experiment::sweep(&cfg)?.to_csv_string()?);

    let cfg = ExperimentConfig::from_json(
        r#"{
            "protocol": "rotation",
            "angles": [0.3, 0.6, 0.9],
            "input": "random",
            "channels": [
                {"kind": "general", "label": "g", "B": 1.0, "C": 0.7, "S": 0.5},
                {"kind": "pf", "label": "pf", "gamma": 1.0}
            ],
            "sweep": {"t_min": 0.0, "t_max": 1.0, "steps": 5},
            "measures": ["fidelity", "negativity"],
            "seed": 11
        }"#,
    )?;
    print!("{}", experiment::sweep(&cfg)?.to_csv_string()?);
    Ok(())
}
