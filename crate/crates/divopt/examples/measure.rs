//! quick probe: EA_C vs EA_D vs EA_T ordering at desk scale
use divopt::harness::*;
use std::time::Instant;

fn main() {
    let reps: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(3);
    let gens: usize = std::env::args().nth(2).and_then(|s| s.parse().ok()).unwrap_or(2000);
    let sigma: f64 = std::env::args().nth(3).and_then(|s| s.parse().ok()).unwrap_or(0.025);
    for mode in ["C", "D", "T"] {
        let json = serde_json::json!({
            "domain": "tsp",
            "mode": mode,
            "mu": 20,
            "lambda": 1,
            "generations": gens,
            "alpha": 1.05,
            "features": [
                {"name": "angle_mean", "f_min": 0.8, "f_max": 1.9, "weight": 1.0},
                {"name": "mst_dists_mean", "f_min": 0.13, "f_max": 0.23, "weight": 1.0}
            ],
            "repetitions": reps,
            "base_seed": 42,
            "output_dir": format!("/tmp/smoke/probe_{mode}"),
            "tsp": {"n": 15, "sigma": 0.025}
        });
        let mut json = json;
        json["tsp"]["sigma"] = serde_json::json!(sigma);
        let config: ExperimentConfig = serde_json::from_value(json).unwrap();
        let t0 = Instant::now();
        let summary = run_experiment(&config, 2).unwrap();
        let (min, mean, std) = summary.aggregate.unwrap();
        println!(
            "mode {mode}: min {min:.4} mean {mean:.4} std {std:.4}  ({} reps, {:.1} s)",
            reps,
            t0.elapsed().as_secs_f64()
        );
    }
}
