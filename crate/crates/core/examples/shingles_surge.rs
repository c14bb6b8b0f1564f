//! Seed-paired ensemble of the chickenpox program: the median excess of
//! shingles (vaccination minus baseline) rises after the program starts
//! and turns negative decades later.
//!
//!     cargo run --release --example shingles_surge -- [population] [pairs] [jobs]

use epichart::metrics::EnsembleSummary;
use epichart::runner;
use epichart::scenario::{ModelPack, ScenarioConfig};

fn main() {
    let mut args = std::env::args().skip(1);
    let population = args
        .next()
        .map_or(10_000, |s| s.parse().expect("population"));
    let pairs = args.next().map_or(10, |s| s.parse().expect("pairs"));
    let jobs = args.next().map_or(1, |s| s.parse().expect("jobs"));

    let mut cfg = ScenarioConfig::new(ModelPack::Varicella, population);
    cfg.horizon = 60.0;
    cfg.burn_in = 20.0;
    cfg.realizations = pairs;
    let started = std::time::Instant::now();
    let results = runner::run_ensemble(&cfg, jobs).expect("ensemble");
    let res = &results[0];
    let diffs = runner::paired_rate_differences(&res.pairs);
    let summary = EnsembleSummary::from_series("excess shingles", &diffs).expect("summary");

    println!(
        "{} pairs in {:.1}s",
        res.pairs.len(),
        started.elapsed().as_secs_f64()
    );
    println!("year   q25     median   q75   (per 100,000)");
    for p in summary.points.iter().filter(|p| p.time >= -2.0) {
        let bar = "#".repeat((p.median().max(0.0) / 5.0) as usize);
        println!(
            "{:>4} {:>7.1} {:>7.1} {:>7.1}  {bar}",
            p.time,
            p.quantiles[1],
            p.median(),
            p.quantiles[3]
        );
    }
    let median = summary.median_series();
    let first_negative = median
        .times
        .iter()
        .zip(&median.values)
        .find(|(t, v)| **t > 5.0 && **v < 0.0);
    match first_negative {
        Some((t, _)) => println!("median excess first negative in year {t}"),
        None => println!("median excess still positive at the horizon"),
    }
}
