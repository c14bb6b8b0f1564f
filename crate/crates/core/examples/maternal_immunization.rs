//! Third-trimester pertussis immunization: infant infections with and
//! without the program, and with the antibody transfer switched off.
//!
//!     cargo run --release --example maternal_immunization -- [population] [pairs]

use std::sync::Arc;

use epichart::metrics::{median, Arm};
use epichart::pertussis::{PertussisModel, PertussisParams, PertussisSettings};
use epichart::population::DemographyConfig;

fn infant_infections(settings: PertussisSettings) -> (f64, f64) {
    let (model, sched) = PertussisModel::new(
        Arc::new(PertussisParams::default()),
        &DemographyConfig::default(),
        settings,
    )
    .expect("model");
    let out = model.run(sched);
    let inc = out.headline();
    let post: Vec<usize> = inc
        .grid
        .years()
        .enumerate()
        .filter(|(_, y)| *y >= 0)
        .map(|(k, _)| k)
        .collect();
    let infants: u64 = post.iter().map(|&k| inc.count(k, 0)).sum();
    let maternal = out
        .coverage
        .iter()
        .find(|(l, _)| l == "maternal")
        .map_or(0.0, |c| c.1);
    (infants as f64, maternal)
}

fn main() {
    let mut args = std::env::args().skip(1);
    let population = args
        .next()
        .map_or(10_000, |s| s.parse().expect("population"));
    let pairs: usize = args.next().map_or(10, |s| s.parse().expect("pairs"));

    let mut rows = [Vec::new(), Vec::new(), Vec::new()];
    for r in 0..pairs {
        let base = PertussisSettings::new(Arm::Baseline, r, 7, population);
        let program = PertussisSettings {
            program_start: Some(base.burn_in),
            maternal_coverage: 0.5,
            ..PertussisSettings::new(Arm::Intervention, r, 7, population)
        };
        let no_transfer = PertussisSettings {
            passive_protection: false,
            ..program.clone()
        };
        let (b, _) = infant_infections(base);
        let (p, cov) = infant_infections(program);
        let (n, _) = infant_infections(no_transfer);
        println!("pair {r:>2}: infants infected {b:>4} baseline, {p:>4} program (maternal coverage {cov:.2}), {n:>4} without transfer");
        rows[0].push(b);
        rows[1].push(p);
        rows[2].push(n);
    }
    let m: Vec<f64> = rows.iter().map(|r| median(r)).collect();
    println!("median infant infections over the post-burn-in window:");
    println!("  baseline          {:>6.1}", m[0]);
    println!(
        "  program           {:>6.1}  (benefit {:.1})",
        m[1],
        m[0] - m[1]
    );
    println!(
        "  without transfer  {:>6.1}  (benefit {:.1})",
        m[2],
        m[0] - m[2]
    );
}
