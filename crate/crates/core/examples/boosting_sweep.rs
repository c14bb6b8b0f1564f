//! Sensitivity of the post-program shingles excess to the length of the
//! boosting window. Writes one output directory per duration.
//!
//!     cargo run --release --example boosting_sweep -- [out_dir] [population] [pairs]

use std::path::PathBuf;

use epichart::metrics::EnsembleSummary;
use epichart::runner;
use epichart::scenario::{ModelPack, ScenarioConfig};

fn main() {
    let mut args = std::env::args().skip(1);
    let out = PathBuf::from(
        args.next()
            .unwrap_or_else(|| "target/boosting_sweep".into()),
    );
    let population = args
        .next()
        .map_or(5_000, |s| s.parse().expect("population"));
    let pairs = args.next().map_or(6, |s| s.parse().expect("pairs"));

    let mut cfg = ScenarioConfig::new(ModelPack::Varicella, population);
    cfg.horizon = 60.0;
    cfg.burn_in = 20.0;
    cfg.realizations = pairs;
    cfg.intervention.boosting_durations = vec![2.0, 3.0, 4.0, 5.0, 6.0, 7.0];

    let started = std::time::Instant::now();
    let jobs = std::thread::available_parallelism().map_or(1, |n| n.get());
    let results = runner::run_ensemble(&cfg, jobs).expect("ensemble");
    let manifest = runner::write_outputs(&cfg, &results, &out, jobs, 0.0).expect("write");

    println!("duration  peak median excess  year of peak");
    for res in &results {
        let diffs = runner::paired_rate_differences(&res.pairs);
        let median = EnsembleSummary::from_series("excess", &diffs)
            .expect("summary")
            .median_series();
        let (t, v) = median
            .times
            .iter()
            .zip(&median.values)
            .filter(|(t, _)| **t >= 0.0)
            .max_by(|a, b| a.1.total_cmp(b.1))
            .expect("post-program years");
        println!(
            "{:>6}y  {v:>18.1}  {t:>12}",
            res.variant.boosting_duration.unwrap()
        );
    }
    println!(
        "{} files under {} in {:.0}s",
        manifest.artifacts.len(),
        out.display(),
        started.elapsed().as_secs_f64()
    );
}
