//! Seed-controlled ensembles: paired arms, parallel fan-out, CSV/SVG output
//! and the run manifest.

use std::fmt::Write as _;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::metrics::{
    self, paired_difference, svg, AgeBinnedIncidence, Arm, ContactMatrix, EnsembleSummary,
    TimeSeries, INCIDENCE_HEADER, SUMMARY_HEADER,
};
use crate::output::RealizationOutput;
use crate::pertussis::{PertussisModel, PertussisSettings};
use crate::scenario::{ModelPack, ScenarioConfig};
use crate::varicella::{CostCategory, VaricellaParams, VzvModel, VzvSettings};

#[derive(Debug, Error)]
pub enum RunError {
    #[error("realization {realization} ({arm}) failed: {message}")]
    Realization {
        realization: usize,
        arm: Arm,
        message: String,
    },
    #[error("{failed} of {total} realizations failed")]
    Partial { failed: usize, total: usize },
    #[error("cannot build worker pool: {0}")]
    Pool(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

/// One paired ensemble; a chickenpox boosting sweep produces several.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Variant {
    /// Output subdirectory; empty for the scenario root.
    pub name: String,
    pub boosting_duration: Option<f64>,
}

/// Variants of a scenario in output order.
pub fn variants(cfg: &ScenarioConfig) -> Vec<Variant> {
    match cfg.model_pack {
        ModelPack::Varicella => {
            let sweep = cfg.boosting_sweep();
            if sweep.len() == 1 {
                vec![Variant {
                    name: String::new(),
                    boosting_duration: Some(sweep[0]),
                }]
            } else {
                sweep
                    .into_iter()
                    .map(|d| Variant {
                        name: format!("boost_{d}y"),
                        boosting_duration: Some(d),
                    })
                    .collect()
            }
        }
        ModelPack::Pertussis => vec![Variant {
            name: String::new(),
            boosting_duration: None,
        }],
    }
}

pub fn arms(cfg: &ScenarioConfig) -> Vec<Arm> {
    if cfg.intervention.enabled {
        vec![Arm::Baseline, Arm::Intervention]
    } else {
        vec![Arm::Baseline]
    }
}

/// Run one arm of one realization. Both arms of a realization draw from
/// the same streams, so they agree until the intervention starts.
pub fn simulate(
    cfg: &ScenarioConfig,
    variant: &Variant,
    realization: usize,
    arm: Arm,
) -> Result<RealizationOutput, RunError> {
    let program_start = (arm == Arm::Intervention).then(|| cfg.intervention_time());
    let snapshot = cfg.output.snapshot && realization == 0;
    let fail = |message: String| RunError::Realization {
        realization,
        arm,
        message,
    };
    match cfg.model_pack {
        ModelPack::Varicella => {
            let params = Arc::new(VaricellaParams {
                boosting_duration: variant
                    .boosting_duration
                    .unwrap_or(cfg.varicella.boosting_duration),
                ..cfg.varicella.clone()
            });
            let settings = VzvSettings {
                arm,
                realization,
                master_seed: cfg.master_seed,
                population: cfg.population,
                horizon: cfg.horizon,
                burn_in: cfg.burn_in,
                program_start,
                age_bins: cfg.output.age_bins.clone(),
                snapshot,
                trace: false,
            };
            let (model, sched) = VzvModel::new(
                params,
                &cfg.demography,
                Arc::new(cfg.econ.clone()),
                settings,
            )
            .map_err(|e| fail(e.to_string()))?;
            Ok(model.run(sched))
        }
        ModelPack::Pertussis => {
            let iv = &cfg.intervention;
            let settings = PertussisSettings {
                horizon: cfg.horizon,
                burn_in: cfg.burn_in,
                program_start,
                maternal_coverage: iv.maternal_coverage,
                blunting: iv.blunting,
                passive_protection: iv.passive_protection,
                maternal_antibody_duration: iv.maternal_antibody_duration,
                ascertainment: iv.ascertainment.clone(),
                age_bins: cfg.output.age_bins.clone(),
                snapshot,
                trajectory_sample: cfg.output.trajectory_sample,
                survey_size: cfg.output.contact_survey_size,
                ..PertussisSettings::new(arm, realization, cfg.master_seed, cfg.population)
            };
            let (model, sched) =
                PertussisModel::new(Arc::new(cfg.pertussis.clone()), &cfg.demography, settings)
                    .map_err(|e| fail(e.to_string()))?;
            Ok(model.run(sched))
        }
    }
}

/// Run `simulate`, converting a panic into an error.
fn guarded(
    cfg: &ScenarioConfig,
    variant: &Variant,
    realization: usize,
    arm: Arm,
) -> Result<RealizationOutput, RunError> {
    catch_unwind(AssertUnwindSafe(|| {
        simulate(cfg, variant, realization, arm)
    }))
    .unwrap_or_else(|payload| {
        let message = payload
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| payload.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "panic".to_string());
        Err(RunError::Realization {
            realization,
            arm,
            message,
        })
    })
}

/// Both arms of one realization. A failure in either arm drops the pair.
#[derive(Debug, Clone)]
pub struct PairedRealization {
    pub realization: usize,
    pub baseline: RealizationOutput,
    pub intervention: Option<RealizationOutput>,
}

#[derive(Debug)]
pub struct EnsembleResult {
    pub variant: Variant,
    pub pairs: Vec<PairedRealization>,
    pub failures: Vec<RunError>,
}

/// Run every variant, realization and arm on a pool of `jobs` threads.
/// Results are ordered by (variant, realization, arm) whatever the pool size.
pub fn run_ensemble(cfg: &ScenarioConfig, jobs: usize) -> Result<Vec<EnsembleResult>, RunError> {
    let variants = variants(cfg);
    let arms = arms(cfg);
    let tasks: Vec<(usize, usize, Arm)> = (0..variants.len())
        .flat_map(|v| (0..cfg.realizations).map(move |r| (v, r)))
        .flat_map(|(v, r)| arms.iter().map(move |&a| (v, r, a)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| RunError::Pool(e.to_string()))?;
    let results: Vec<Result<RealizationOutput, RunError>> = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(v, r, a)| guarded(cfg, &variants[v], r, a))
            .collect()
    });

    let mut results = results.into_iter();
    let mut out = Vec::with_capacity(variants.len());
    for variant in variants {
        let mut pairs = Vec::new();
        let mut failures = Vec::new();
        for realization in 0..cfg.realizations {
            let mut outputs = Vec::new();
            let mut failed = false;
            for _ in &arms {
                match results.next().expect("one result per task") {
                    Ok(o) => outputs.push(o),
                    Err(e) => {
                        failures.push(e);
                        failed = true;
                    }
                }
            }
            if failed {
                continue;
            }
            let mut it = outputs.into_iter();
            pairs.push(PairedRealization {
                realization,
                baseline: it.next().expect("baseline arm"),
                intervention: it.next(),
            });
        }
        out.push(EnsembleResult {
            variant,
            pairs,
            failures,
        });
    }
    Ok(out)
}

/// Headline rate series (per 100,000) of each pair, per arm.
pub fn headline_rates(pairs: &[PairedRealization], arm: Arm) -> Vec<TimeSeries> {
    pairs
        .iter()
        .filter_map(|p| match arm {
            Arm::Baseline => Some(&p.baseline),
            Arm::Intervention => p.intervention.as_ref(),
        })
        .map(|o| {
            o.headline()
                .rate_series(&format!("{arm} {}", o.realization))
        })
        .collect()
}

/// Paired `intervention - baseline` headline rate series.
pub fn paired_rate_differences(pairs: &[PairedRealization]) -> Vec<TimeSeries> {
    pairs
        .iter()
        .filter_map(|p| {
            let i = p.intervention.as_ref()?;
            paired_difference(
                &p.baseline.headline().rate_series("baseline"),
                &i.headline().rate_series("intervention"),
            )
            .ok()
        })
        .collect()
}

/// Rate per 100,000 person-years by age bin over reporting years `>= 0`.
pub fn post_burn_in_age_rates(inc: &AgeBinnedIncidence) -> Vec<f64> {
    let years: Vec<usize> = inc
        .grid
        .years()
        .enumerate()
        .filter(|(_, y)| *y >= 0)
        .map(|(k, _)| k)
        .collect();
    (0..inc.bins.len())
        .map(|b| {
            let c: u64 = years.iter().map(|&k| inc.count(k, b)).sum();
            let py: f64 = years.iter().map(|&k| inc.person_years(k, b)).sum();
            if py > 0.0 {
                c as f64 / py * 1e5
            } else {
                0.0
            }
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct SeedRow {
    pub realization: usize,
    pub master_seed: u64,
    pub arms: Vec<Arm>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FailureRow {
    pub variant: String,
    pub message: String,
}

/// Everything needed to reproduce a run.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub engine: String,
    pub version: String,
    pub config: ScenarioConfig,
    pub variants: Vec<Variant>,
    pub seeds: Vec<SeedRow>,
    pub jobs: usize,
    pub started_unix: f64,
    pub finished_unix: f64,
    pub artifacts: Vec<String>,
    pub failures: Vec<FailureRow>,
    pub success: bool,
}

fn unix_now() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

struct Writer<'a> {
    root: &'a Path,
    artifacts: Vec<String>,
}

impl Writer<'_> {
    fn write(&mut self, rel: &Path, contents: &str) -> Result<(), RunError> {
        let path = self.root.join(rel);
        let io = |source| RunError::Io {
            path: path.display().to_string(),
            source,
        };
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir).map_err(io)?;
        }
        std::fs::write(&path, contents).map_err(io)?;
        self.artifacts
            .push(rel.to_string_lossy().replace('\\', "/"));
        Ok(())
    }
}

fn arm_outputs(p: &PairedRealization) -> impl Iterator<Item = &RealizationOutput> {
    std::iter::once(&p.baseline).chain(p.intervention.as_ref())
}

fn write_variant(
    cfg: &ScenarioConfig,
    res: &EnsembleResult,
    w: &mut Writer<'_>,
) -> Result<(), RunError> {
    let dir = PathBuf::from(&res.variant.name);
    let pairs = &res.pairs;
    if pairs.is_empty() {
        return Ok(());
    }
    let outcome_names: Vec<String> = pairs[0]
        .baseline
        .outcomes
        .iter()
        .map(|(n, _)| n.clone())
        .collect();

    for (k, name) in outcome_names.iter().enumerate() {
        let mut csv = String::from(INCIDENCE_HEADER);
        for p in pairs {
            for o in arm_outputs(p) {
                metrics::write_incidence_rows(
                    &mut csv,
                    o.arm.label(),
                    o.realization,
                    &o.outcomes[k].1,
                );
            }
        }
        w.write(&dir.join(format!("incidence_{name}.csv")), &csv)?;
        if k == 0 {
            w.write(&dir.join("incidence.csv"), &csv)?;
        }
    }

    let mut summaries = Vec::new();
    for arm in arms(cfg) {
        let series = headline_rates(pairs, arm);
        if let Ok(s) = EnsembleSummary::from_series(arm.label(), &series) {
            summaries.push(s);
        }
    }
    let diffs = paired_rate_differences(pairs);
    let difference = EnsembleSummary::from_series("difference", &diffs).ok();
    let mut csv = String::from(SUMMARY_HEADER);
    for s in &summaries {
        metrics::write_summary_rows(&mut csv, &s.label, s);
    }
    if let Some(d) = &difference {
        metrics::write_summary_rows(&mut csv, "difference", d);
    }
    w.write(&dir.join("summary.csv"), &csv)?;

    let mut csv = String::from("arm,realization,label,share\n");
    for p in pairs {
        for o in arm_outputs(p) {
            for (label, share) in &o.coverage {
                let _ = writeln!(csv, "{},{},{label},{share}", o.arm, o.realization);
            }
        }
    }
    w.write(&dir.join("coverage.csv"), &csv)?;

    if pairs[0].baseline.econ.is_some() {
        let mut csv = String::from("arm,realization,cost_category,total,qalys\n");
        for p in pairs {
            for o in arm_outputs(p) {
                if let Some(l) = &o.econ {
                    for c in CostCategory::ALL {
                        let _ = writeln!(
                            csv,
                            "{},{},{},{},{}",
                            o.arm,
                            o.realization,
                            c.name(),
                            l.cost(c),
                            l.qalys()
                        );
                    }
                }
            }
        }
        w.write(&dir.join("econ.csv"), &csv)?;
    }

    let mut contacts: Option<ContactMatrix> = None;
    for p in pairs {
        if let Some(m) = &p.baseline.contacts {
            match &mut contacts {
                Some(acc) => acc.merge(m),
                None => contacts = Some(m.clone()),
            }
        }
    }
    if let Some(m) = &contacts {
        w.write(&dir.join("contact_matrix.csv"), &m.to_csv())?;
    }

    if pairs
        .iter()
        .any(|p| arm_outputs(p).any(|o| !o.trajectories.is_empty()))
    {
        let mut csv = String::from("arm,realization,agent,label,year,protection\n");
        for p in pairs {
            for o in arm_outputs(p) {
                for tr in &o.trajectories {
                    for (t, v) in &tr.points {
                        let _ = writeln!(
                            csv,
                            "{},{},{},{},{t},{v}",
                            o.arm, o.realization, tr.agent, tr.label
                        );
                    }
                }
            }
        }
        w.write(&dir.join("protection_trajectories.csv"), &csv)?;
    }

    for p in pairs {
        for o in arm_outputs(p) {
            if let Some(s) = &o.snapshot {
                w.write(&dir.join(format!("snapshot_{}.csv", o.arm)), s)?;
            }
        }
    }

    if cfg.output.svg {
        let headline = &outcome_names[0];
        let refs: Vec<&EnsembleSummary> = summaries.iter().collect();
        w.write(
            &dir.join("fan_chart.svg"),
            &svg::fan_chart(
                &format!("{headline} per 100,000"),
                "rate per 100,000",
                &refs,
            ),
        )?;
        if let Some(d) = &difference {
            w.write(
                &dir.join("difference_fan_chart.svg"),
                &svg::fan_chart(
                    &format!("{headline}: intervention minus baseline"),
                    "excess per 100,000",
                    &[d],
                ),
            )?;
        }
        let bins = &pairs[0].baseline.headline().bins;
        let labels: Vec<String> = (0..bins.len()).map(|b| bins.label(b)).collect();
        for arm in arms(cfg) {
            let rows: Vec<Vec<f64>> = pairs
                .iter()
                .filter_map(|p| match arm {
                    Arm::Baseline => Some(&p.baseline),
                    Arm::Intervention => p.intervention.as_ref(),
                })
                .map(|o| post_burn_in_age_rates(o.headline()))
                .collect();
            let medians: Vec<f64> = (0..labels.len())
                .map(|b| metrics::median(&rows.iter().map(|r| r[b]).collect::<Vec<_>>()))
                .collect();
            w.write(
                &dir.join(format!("age_incidence_{arm}.svg")),
                &svg::bar_chart(
                    &format!("{headline} by age, {arm}"),
                    "per 100,000 person-years",
                    &labels,
                    &medians,
                ),
            )?;
        }
        if let Some(m) = &contacts {
            w.write(
                &dir.join("contact_matrix.svg"),
                &svg::heatmap("daily contacts by age", m),
            )?;
        }
    }
    Ok(())
}

/// Write all output files and the manifest under `out`.
pub fn write_outputs(
    cfg: &ScenarioConfig,
    results: &[EnsembleResult],
    out: &Path,
    jobs: usize,
    started_unix: f64,
) -> Result<RunManifest, RunError> {
    let mut w = Writer {
        root: out,
        artifacts: Vec::new(),
    };
    for res in results {
        write_variant(cfg, res, &mut w)?;
    }
    let failures: Vec<FailureRow> = results
        .iter()
        .flat_map(|r| {
            r.failures.iter().map(|e| FailureRow {
                variant: r.variant.name.clone(),
                message: e.to_string(),
            })
        })
        .collect();
    let mut artifacts = w.artifacts.clone();
    artifacts.push("manifest.json".to_string());
    let manifest = RunManifest {
        engine: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: cfg.clone(),
        variants: results.iter().map(|r| r.variant.clone()).collect(),
        seeds: (0..cfg.realizations)
            .map(|realization| SeedRow {
                realization,
                master_seed: cfg.master_seed,
                arms: arms(cfg),
            })
            .collect(),
        jobs,
        started_unix,
        finished_unix: unix_now(),
        artifacts,
        success: failures.is_empty(),
        failures,
    };
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    w.write(Path::new("manifest.json"), &json)?;
    Ok(manifest)
}

/// Run a scenario and write its outputs. Returns the manifest, or
/// [`RunError::Partial`] after writing whatever succeeded.
pub fn run_to_dir(cfg: &ScenarioConfig, out: &Path, jobs: usize) -> Result<RunManifest, RunError> {
    let started = unix_now();
    let results = run_ensemble(cfg, jobs)?;
    let manifest = write_outputs(cfg, &results, out, jobs, started)?;
    if !manifest.success {
        let total = results.len() * cfg.realizations;
        return Err(RunError::Partial {
            failed: manifest.failures.len(),
            total,
        });
    }
    Ok(manifest)
}
