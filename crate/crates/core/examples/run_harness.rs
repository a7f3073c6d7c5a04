// Runs a small recovery-curve experiment in process and writes its outputs.

use pcs_core::harness::{run_experiment, write_outputs, ExperimentConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = ExperimentConfig::from_json(
        r#"{
            "experiment": "recovery_curve",
            "n": 4,
            "m_list": [1, 2, 4],
            "sigma": 0.3,
            "trials": 20,
            "master_seed": 1,
            "prior": {
                "type": "gaussian_mixture",
                "weights": [0.5, 0.5],
                "means": [[1, 0, 0, 0], [-1, 0, 0, 0]],
                "covariances": [
                    [[0.3, 0, 0, 0], [0, 0.3, 0, 0], [0, 0, 0.3, 0], [0, 0, 0, 0.3]],
                    [[0.3, 0, 0, 0], [0, 0.3, 0, 0], [0, 0, 0.3, 0], [0, 0, 0, 0.3]]
                ]
            },
            "methods": ["exact_posterior", "map"]
        }"#,
    )?;
    let out = run_experiment(&cfg)?;
    for (key, value) in out.summary.iter().filter(|(k, _)| k.ends_with("mean_error_l2")) {
        println!("{key:<40} {value:.4}");
    }
    let dir = std::env::temp_dir().join("pcs_run_harness");
    for path in write_outputs(&out, &dir)? {
        println!("wrote {}", path.display());
    }
    Ok(())
}
