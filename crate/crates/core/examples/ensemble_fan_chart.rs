//! A single realization against an ensemble: runs the same pertussis
//! scenario with 1 and with 20 realizations and writes both fan charts
//! (the single run collapses to one line).
//!
//!     cargo run --release --example ensemble_fan_chart -- [out_dir]

use std::path::PathBuf;

use epichart::runner;
use epichart::scenario::{ModelPack, ScenarioConfig};

fn main() {
    let out = PathBuf::from(
        std::env::args()
            .nth(1)
            .unwrap_or_else(|| "target/ensemble_fan_chart".into()),
    );
    let mut cfg = ScenarioConfig::new(ModelPack::Pertussis, 5_000);
    cfg.intervention.enabled = false;
    let jobs = std::thread::available_parallelism().map_or(1, |n| n.get());
    for n in [1, 20] {
        cfg.realizations = n;
        let dir = out.join(format!("realizations_{n}"));
        let manifest = runner::run_to_dir(&cfg, &dir, jobs).expect("run");
        println!(
            "{n:>2} realization(s): {} files in {}",
            manifest.artifacts.len(),
            dir.display()
        );
    }
    println!("compare realizations_1/fan_chart.svg with realizations_20/fan_chart.svg");
}
