//! Protection of an infant over the first two years: passive antibodies
//! from the mother decay quickly while scheduled doses build a saw-tooth
//! of active protection. Prints a CSV to stdout.
//!
//!     cargo run --example protection_curves > curves.csv

use epichart::pertussis::{ImmunityState, MemoryType, PertussisParams};

fn curve(p: &PertussisParams, mother: f64, blunting: bool) -> Vec<(f64, f64, f64)> {
    let w = p.waning(p.vaccine_memory);
    let mut s = ImmunityState::newborn(mother, p.maternal_transfer, p.waning_passive, 0.0);
    let mut doses = p
        .dose_ages
        .iter()
        .zip(&p.dose_targets)
        .enumerate()
        .peekable();
    let mut out = Vec::new();
    for week in 0..=104 {
        let t = week as f64 / 52.0;
        while let Some((k, (&age, &target))) = doses.peek().copied() {
            if age > t {
                break;
            }
            let blunted = blunting
                && k < p.blunting_dose_cutoff
                && s.blunts(age, p.blunting_passive_threshold).unwrap();
            let target = if blunted {
                target * p.blunting_factor
            } else {
                target
            };
            s.apply_dose(age, target, p.vaccine_memory, w).unwrap();
            doses.next();
        }
        out.push((t, s.active_at(t).unwrap(), s.passive_at(t).unwrap()));
    }
    out
}

fn main() {
    let p = PertussisParams::default();
    assert_eq!(p.vaccine_memory, MemoryType::Acellular);
    let scenarios = [
        ("unvaccinated_mother", 0.2, false),
        ("vaccinated_mother", p.maternal_dose_target, false),
        ("vaccinated_mother_blunting", p.maternal_dose_target, true),
    ];
    println!("scenario,year,active,passive,protection");
    for (name, mother, blunting) in scenarios {
        for (t, a, pp) in curve(&p, mother, blunting) {
            println!("{name},{t:.4},{a:.5},{pp:.5},{:.5}", (a + pp).min(1.0));
        }
    }
}
