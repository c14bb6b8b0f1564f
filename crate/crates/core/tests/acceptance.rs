//! Acceptance suite. Every criterion prints one PASS/FAIL line; the test
//! fails if any criterion fails. Criteria 1 to 3 run full ensembles and
//! take several minutes on one core.
//!
//!     cargo test --release --test acceptance

use std::collections::HashMap;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::sync::Arc;
use std::time::Instant;

use epichart::engine::{AgentId, Message, MessageKind, Model, RngStream, Scheduler, SimTime};
use epichart::metrics::{median, Arm, EnsembleSummary, TimeSeries};
use epichart::output::RealizationOutput;
use epichart::pertussis::{ImmunityState, MemoryType};
use epichart::population::{DemographyConfig, Point, SpatialIndex, VaccineAttitude};
use epichart::runner::{self, PairedRealization};
use epichart::scenario::{ModelPack, ScenarioConfig};
use epichart::statechart::{
    self, ChartBuilder, ChartHost, ChartInstance, ChartSet, ChartTimer, Rate, StateId, Timeout,
    TimerOutcome, TransitionDef, TransitionId, Trigger,
};
use epichart::varicella::model::kinds;
use epichart::varicella::{attitude_index, Source, VaricellaParams, VzvModel, VzvSettings};

struct Outcome {
    id: usize,
    name: &'static str,
    pass: bool,
    detail: String,
}

fn jobs() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn post_program(s: &TimeSeries) -> impl Iterator<Item = (f64, f64)> + '_ {
    s.times
        .iter()
        .copied()
        .zip(s.values.iter().copied())
        .filter(|(t, _)| *t >= 0.0)
}

fn median_excess(pairs: &[PairedRealization]) -> TimeSeries {
    let diffs = runner::paired_rate_differences(pairs);
    EnsembleSummary::from_series("excess", &diffs)
        .expect("pairs")
        .median_series()
}

fn vzv_ensemble(durations: Vec<f64>) -> Vec<runner::EnsembleResult> {
    let mut cfg = ScenarioConfig::new(ModelPack::Varicella, 20_000);
    cfg.burn_in = 20.0;
    cfg.horizon = 60.0;
    cfg.realizations = 30;
    cfg.intervention.boosting_durations = durations;
    runner::run_ensemble(&cfg, jobs()).expect("ensemble")
}

// 1. positive median excess starting within 5 years, later negative
fn shingles_surge(res: &runner::EnsembleResult, seconds: f64) -> Outcome {
    let m = median_excess(&res.pairs);
    let post: Vec<(f64, f64)> = post_program(&m).collect();
    let start = post.iter().position(|(t, v)| *t <= 5.0 && *v > 0.0);
    let (pass, detail) = match start {
        None => (false, "no positive median excess in years 0-5".to_string()),
        Some(k) => {
            let len = post[k..].iter().take_while(|(_, v)| *v > 0.0).count();
            let negative = post[k + len..].iter().find(|(_, v)| *v < 0.0);
            let peak = post[k..k + len]
                .iter()
                .map(|p| p.1)
                .fold(f64::MIN, f64::max);
            (
                len >= 2 && negative.is_some(),
                format!(
                    "positive from year {} for {len} years (peak {peak:.1}/100k), first negative year {:?}, {} pairs, sweep took {seconds:.0}s",
                    post[k].0,
                    negative.map(|p| p.0),
                    res.pairs.len(),
                ),
            )
        }
    };
    Outcome {
        id: 1,
        name: "shingles surge after vaccination",
        pass,
        detail,
    }
}

// 2. peak median excess non-decreasing in boosting duration
fn boosting_ordering(sweep: &[runner::EnsembleResult]) -> Outcome {
    let peaks: Vec<(f64, f64)> = sweep
        .iter()
        .map(|r| {
            let d = r.variant.boosting_duration.unwrap_or(f64::NAN);
            (
                d,
                post_program(&median_excess(&r.pairs))
                    .map(|p| p.1)
                    .fold(f64::MIN, f64::max),
            )
        })
        .filter(|(d, _)| [2.0, 4.0, 6.0].contains(d))
        .collect();
    let pass = peaks.len() == 3 && peaks.windows(2).all(|w| w[1].1 >= w[0].1);
    let shown: Vec<String> = peaks
        .iter()
        .map(|(d, p)| format!("{d} yr {p:.1}"))
        .collect();
    Outcome {
        id: 2,
        name: "boosting-duration ordering",
        pass,
        detail: format!("peak median excess per 100k: {}", shown.join(", ")),
    }
}

fn infant_infections(o: &RealizationOutput, years: i32) -> f64 {
    let inc = o.headline();
    inc.grid
        .years()
        .enumerate()
        .filter(|(_, y)| (0..years).contains(y))
        .map(|(k, _)| inc.count(k, 0) as f64)
        .sum()
}

// 3. maternal immunization lowers median infant incidence; no transfer shrinks the benefit
fn maternal_immunization() -> Outcome {
    let mut cfg = ScenarioConfig::new(ModelPack::Pertussis, 10_000);
    cfg.realizations = 30;
    cfg.intervention.maternal_coverage = 0.5;
    cfg.output.trajectory_sample = 0;
    cfg.output.contact_survey_size = 0;
    let years = (cfg.horizon - cfg.burn_in) as i32;
    let with = runner::run_ensemble(&cfg, jobs())
        .expect("ensemble")
        .remove(0)
        .pairs;
    cfg.intervention.passive_protection = false;
    let without = runner::run_ensemble(&cfg, jobs())
        .expect("ensemble")
        .remove(0)
        .pairs;

    let arm = |pairs: &[PairedRealization], intervention: bool| -> Vec<f64> {
        pairs
            .iter()
            .map(|p| {
                let o = if intervention {
                    p.intervention.as_ref().unwrap()
                } else {
                    &p.baseline
                };
                infant_infections(o, years)
            })
            .collect()
    };
    let base = median(&arm(&with, false));
    let program = median(&arm(&with, true));
    let no_transfer = median(&arm(&without, true));
    let benefit = base - program;
    let benefit_nt = base - no_transfer;
    Outcome {
        id: 3,
        name: "maternal immunization protects infants",
        pass: program < base && benefit_nt < benefit,
        detail: format!(
            "median infant infections over {years} yr: baseline {base}, program {program} (benefit {benefit}), no transfer {no_transfer} (benefit {benefit_nt})"
        ),
    }
}

// 4. protection level against the closed form, cap and lazy composition
fn protection_math() -> Outcome {
    let mut r = RngStream::new(2024, 0, "acceptance-immunity");
    let mut worst = 0.0_f64;
    let mut worst_compose = 0.0_f64;
    let mut capped = 0;
    for _ in 0..10_000 {
        let pa = r.uniform();
        let pp = r.uniform();
        let wa = r.uniform_range(0.0, 0.5);
        let wp = r.uniform_range(0.0, 8.0);
        let t0 = r.uniform_range(0.0, 50.0);
        let dt = r.uniform_range(0.0, 10.0);
        let s = ImmunityState {
            p_active: pa,
            p_passive: pp,
            memory: MemoryType::Acellular,
            w_active: wa,
            w_passive: wp,
            last_update: t0,
        };
        let expect = (pa * (-wa * dt).exp() + pp * (-wp * dt).exp()).min(1.0);
        if pa * (-wa * dt).exp() + pp * (-wp * dt).exp() > 1.0 {
            capped += 1;
        }
        let got = s.protection_level(t0 + dt).unwrap();
        worst = worst.max((got - expect).abs());

        let mid = t0 + r.uniform() * dt;
        let mut lazy = s;
        lazy.advance(mid).unwrap();
        worst_compose = worst_compose.max((lazy.protection_level(t0 + dt).unwrap() - got).abs());
    }
    Outcome {
        id: 4,
        name: "protection level and waning math",
        pass: worst <= 1e-12 && worst_compose <= 1e-12 && capped > 0,
        detail: format!(
            "max |error| {worst:.1e}, composition {worst_compose:.1e}, {capped} capped states"
        ),
    }
}

const POKE: MessageKind = MessageKind("POKE");

#[derive(Debug)]
enum FuzzEv {
    Timer(ChartTimer),
    Poke,
}

impl From<ChartTimer> for FuzzEv {
    fn from(t: ChartTimer) -> Self {
        FuzzEv::Timer(t)
    }
}

/// Host that checks runtime invariants against its own bookkeeping.
struct Fuzz {
    set: Arc<ChartSet>,
    charts: Vec<[ChartInstance; 2]>,
    rng: RngStream,
    /// Time each transition was last armed, per agent and slot.
    armed: Vec<[HashMap<TransitionId, SimTime>; 2]>,
    /// State each instance is in according to enter/exit callbacks.
    shadow: Vec<[StateId; 2]>,
    sojourns: Vec<f64>,
    violations: Vec<String>,
    fired: u64,
    stale: u64,
    blocked: u64,
    last_t: SimTime,
}

impl Fuzz {
    fn arm_all(&mut self, agent: AgentId, slot: usize, state: StateId, t: SimTime) {
        let set = Arc::clone(&self.set);
        for &tr in set.get(slot).outgoing(state) {
            self.armed[agent.index()][slot].insert(tr, t);
        }
    }
}

impl ChartHost for Fuzz {
    type Event = FuzzEv;
    type Payload = ();

    fn instance(&mut self, agent: AgentId, slot: usize) -> Option<&mut ChartInstance> {
        self.charts.get_mut(agent.index()).map(|c| &mut c[slot])
    }

    fn timer_stream(&mut self, _agent: AgentId, _slot: usize) -> &mut RngStream {
        &mut self.rng
    }

    fn rate(&mut self, agent: AgentId, _slot: usize, _tr: TransitionId, _t: SimTime) -> f64 {
        1.0 + (agent.0 % 3) as f64
    }

    fn timeout(
        &mut self,
        agent: AgentId,
        _slot: usize,
        _tr: TransitionId,
        _t: SimTime,
    ) -> Option<f64> {
        Some(0.3 + 0.1 * (agent.0 % 5) as f64)
    }

    fn guard(
        &mut self,
        _agent: AgentId,
        _slot: usize,
        _tr: TransitionId,
        _t: SimTime,
        _msg: Option<&Message>,
    ) -> bool {
        self.rng.bernoulli(0.6)
    }

    fn on_exit(
        &mut self,
        agent: AgentId,
        slot: usize,
        state: StateId,
        entered: SimTime,
        t: SimTime,
    ) {
        if self.shadow[agent.index()][slot] != state {
            self.violations.push(format!(
                "exit from {state} while shadow is in {}",
                self.shadow[agent.index()][slot]
            ));
        }
        // first sojourn only, so that long waits are never censored
        if slot == 1 && state == 0 && entered == 0.0 {
            self.sojourns.push(t - entered);
        }
    }

    fn on_enter(
        &mut self,
        agent: AgentId,
        slot: usize,
        state: StateId,
        t: SimTime,
        _sched: &mut Scheduler<FuzzEv>,
    ) {
        self.shadow[agent.index()][slot] = state;
        self.arm_all(agent, slot, state, t);
    }

    fn action(
        &mut self,
        agent: AgentId,
        slot: usize,
        tr: TransitionId,
        t: SimTime,
        _msg: Option<&Message>,
        _sched: &mut Scheduler<FuzzEv>,
    ) {
        let set = Arc::clone(&self.set);
        let def = set.get(slot).transition(tr);
        let active = self.charts[agent.index()][slot].state;
        let expected = if def.from == def.to { def.from } else { def.to };
        if active != expected {
            self.violations
                .push(format!("action of {} with instance in {active}", def.name));
        }
        if def.from == def.to {
            if def.internal {
                self.armed[agent.index()][slot].insert(tr, t);
            } else {
                self.arm_all(agent, slot, def.from, t);
            }
        }
    }
}

impl Model for Fuzz {
    type Event = FuzzEv;

    fn handle(&mut self, sched: &mut Scheduler<FuzzEv>, ev: FuzzEv) {
        let t = sched.now();
        if t < self.last_t {
            self.violations
                .push(format!("clock went back from {} to {t}", self.last_t));
        }
        self.last_t = t;
        let set = Arc::clone(&self.set);
        match ev {
            FuzzEv::Timer(timer) => {
                let slot = timer.slot as usize;
                let def = set.get(slot).transition(timer.transition).clone();
                let before = self.charts[timer.agent.index()][slot];
                let armed_at = self.armed[timer.agent.index()][slot]
                    .get(&timer.transition)
                    .copied();
                match statechart::handle_timer(&set, self, sched, timer) {
                    TimerOutcome::Fired => {
                        self.fired += 1;
                        if before.state != def.from {
                            self.violations
                                .push(format!("{} fired from state {}", def.name, before.state));
                        }
                        let wait = match def.trigger {
                            Trigger::Timeout(Timeout::Fixed(d)) => Some(d),
                            Trigger::Timeout(Timeout::Host) => {
                                Some(0.3 + 0.1 * (timer.agent.0 % 5) as f64)
                            }
                            _ => None,
                        };
                        if let (Some(d), Some(a)) = (wait, armed_at) {
                            if (t - a - d).abs() > 1e-9 {
                                self.violations.push(format!(
                                    "{} fired {} after arming, expected {d}",
                                    def.name,
                                    t - a
                                ));
                            }
                        }
                    }
                    TimerOutcome::Stale => self.stale += 1,
                    TimerOutcome::Blocked => {
                        self.blocked += 1;
                        if matches!(def.trigger, Trigger::Rate(_)) {
                            self.armed[timer.agent.index()][slot].insert(timer.transition, t);
                        }
                    }
                    TimerOutcome::Gone => self.violations.push("agent vanished".into()),
                }
            }
            FuzzEv::Poke => {
                let agent = AgentId(self.rng.index(self.charts.len()) as u32);
                match self.rng.index(3) {
                    0 => {
                        let msg = Message {
                            sender: agent,
                            recipient: agent,
                            kind: POKE,
                            delivery_time: t,
                            payload: (),
                        };
                        statechart::deliver(&set, self, sched, &msg);
                    }
                    1 => {
                        statechart::notify(&set, self, sched, agent, 0, t);
                    }
                    _ => {
                        let slot = self.rng.index(2);
                        let state = self.charts[agent.index()][slot].state;
                        statechart::refresh(&set, self, sched, agent, slot, t);
                        self.arm_all(agent, slot, state, t);
                    }
                }
                let dt = self.rng.exponential(2_000.0).unwrap();
                sched.schedule(t + dt, FuzzEv::Poke).unwrap();
            }
        }
    }
}

fn fuzz_charts(sojourn_rate: f64) -> ChartSet {
    let mut a = ChartBuilder::new("alpha");
    let s: Vec<StateId> = ["a0", "a1", "a2", "a3"]
        .iter()
        .map(|n| a.state(n))
        .collect();
    a.initial(s[0]);
    let tr = |n, f, t, g| TransitionDef::new(n, f, t, g);
    a.transition(tr("a01", s[0], s[1], Trigger::Rate(Rate::Fixed(3.0))));
    a.transition(tr("a02", s[0], s[2], Trigger::Timeout(Timeout::Fixed(0.7))));
    a.transition(tr("a03", s[0], s[3], Trigger::Message(POKE)));
    a.transition(tr("a11", s[1], s[1], Trigger::Rate(Rate::Fixed(5.0))).internal());
    a.transition(tr("a10", s[1], s[0], Trigger::Timeout(Timeout::Fixed(0.4))));
    a.transition(tr("a12", s[1], s[2], Trigger::Message(POKE)).guarded());
    a.transition(tr("a22", s[2], s[2], Trigger::Rate(Rate::Fixed(2.0))));
    a.transition(tr("a23", s[2], s[3], Trigger::Rate(Rate::Host)).guarded());
    a.transition(tr("a20", s[2], s[0], Trigger::Message(POKE)));
    a.transition(tr("a30", s[3], s[0], Trigger::Timeout(Timeout::Host)));
    a.transition(tr("a31", s[3], s[1], Trigger::Condition).guarded());

    let mut b = ChartBuilder::new("beta");
    let b0 = b.state("b0");
    let b1 = b.state("b1");
    b.initial(b0);
    b.transition(tr("b01", b0, b1, Trigger::Rate(Rate::Fixed(sojourn_rate))));
    b.transition(tr("b10", b1, b0, Trigger::Timeout(Timeout::Fixed(0.25))));
    b.transition(tr("b11", b1, b1, Trigger::Message(POKE)));
    ChartSet::new(vec![a.build().unwrap(), b.build().unwrap()])
}

fn fuzz_host(agents: usize, sojourn_rate: f64) -> (Fuzz, Scheduler<FuzzEv>) {
    let set = Arc::new(fuzz_charts(sojourn_rate));
    let mut host = Fuzz {
        set: Arc::clone(&set),
        charts: vec![[ChartInstance::new(0, 0.0); 2]; agents],
        rng: RngStream::new(77, 0, "acceptance-fuzz"),
        armed: (0..agents)
            .map(|_| [HashMap::new(), HashMap::new()])
            .collect(),
        shadow: vec![[0, 0]; agents],
        sojourns: Vec::new(),
        violations: Vec::new(),
        fired: 0,
        stale: 0,
        blocked: 0,
        last_t: 0.0,
    };
    let mut sched = Scheduler::new();
    for a in 0..agents as u32 {
        for slot in 0..2 {
            statechart::instantiate(&set, &mut host, &mut sched, AgentId(a), slot, 0.0);
        }
    }
    sched.schedule(0.0, FuzzEv::Poke).unwrap();
    (host, sched)
}

/// Kolmogorov-Smirnov distance between a sample and Exponential(rate).
fn ks_exponential(sample: &mut [f64], rate: f64) -> f64 {
    sample.sort_by(f64::total_cmp);
    let n = sample.len() as f64;
    sample
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = 1.0 - (-rate * x).exp();
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

// 5. exponential sojourns and runtime invariants under fuzzing
fn statechart_semantics() -> Outcome {
    let lambda = 2.5;
    let (mut host, mut sched) = fuzz_host(10_000, lambda);
    let mut t = 0.0;
    while host.sojourns.len() < 10_000 {
        t += 0.05;
        sched.run_until(t, &mut host);
    }
    host.sojourns.truncate(10_000);
    let d = ks_exponential(&mut host.sojourns, lambda);
    let critical = 1.6276 / (10_000f64).sqrt();

    let (mut fuzz, mut sched) = fuzz_host(300, lambda);
    let mut horizon = 0.0;
    while sched.processed() < 1_000_000 {
        horizon += 1.0;
        sched.run_until(horizon, &mut fuzz);
    }
    let exclusive = fuzz.charts.iter().zip(&fuzz.shadow).all(|(c, s)| {
        c[0].state == s[0] && c[1].state == s[1] && (c[0].state as usize) < 4 && c[1].state < 2
    });
    let pass = d < critical
        && exclusive
        && fuzz.violations.is_empty()
        && fuzz.stale > 0
        && fuzz.blocked > 0;
    Outcome {
        id: 5,
        name: "statechart semantics",
        pass,
        detail: format!(
            "KS D={d:.4} (critical {critical:.4}); fuzz {} events, {} fired, {} stale dropped, {} blocked, {} violations{}",
            sched.processed(),
            fuzz.fired,
            fuzz.stale,
            fuzz.blocked,
            fuzz.violations.len(),
            fuzz.violations.first().map(|v| format!(" (first: {v})")).unwrap_or_default()
        ),
    }
}

fn within_3sd(hits: usize, n: usize, p: f64) -> (bool, f64) {
    let sd = (p * (1.0 - p) / n as f64).sqrt();
    let f = hits as f64 / n as f64;
    ((f - p).abs() <= 3.0 * sd, f)
}

/// Dose records of a run with many newborns reaching both dose ages.
struct DoseStudy {
    /// Per attitude: (reached dose-1 age, dose 1 given, reached dose-2 age, dose 2 given).
    by_attitude: [[usize; 4]; 3],
    attitudes: [usize; 3],
}

fn dose_study() -> DoseStudy {
    let mut demography = DemographyConfig::default();
    for b in &mut demography.fertility.bands {
        b[2] *= 40.0;
    }
    let params = VaricellaParams {
        catch_up_enabled: false,
        ..VaricellaParams::default()
    };
    let p = params.clone();
    let horizon = 6.5;
    let settings = VzvSettings {
        arm: Arm::Intervention,
        realization: 0,
        master_seed: 11,
        population: 40_000,
        horizon,
        burn_in: 0.0,
        program_start: Some(0.0),
        age_bins: Default::default(),
        snapshot: false,
        trace: false,
    };
    let (mut model, mut sched) = VzvModel::new(
        Arc::new(params),
        &demography,
        Arc::new(Default::default()),
        settings,
    )
    .expect("model");
    sched.run_until(horizon, &mut model);

    let people = model.population().people();
    let mut given = vec![[false; 2]; people.len()];
    for r in model.log().of_kind(kinds::DOSE) {
        let d = r.value as usize;
        if (1..=2).contains(&d) {
            given[r.agent.index()][d - 1] = true;
        }
    }
    let mut study = DoseStudy {
        by_attitude: [[0; 4]; 3],
        attitudes: [0; 3],
    };
    for (i, person) in people.iter().enumerate() {
        let VaccineAttitude::Category(c) = person.attitude else {
            continue;
        };
        let k = attitude_index(c);
        if person.birth_time >= 0.0 {
            study.attitudes[k] += 1;
        }
        for (d, age) in [p.dose1_age, p.dose2_age].into_iter().enumerate() {
            let at = person.birth_time + age;
            let reached = at <= horizon && person.death_time.is_none_or(|x| x > at);
            if reached && person.birth_time + p.dose1_age >= 0.0 {
                study.by_attitude[k][2 * d] += 1;
                study.by_attitude[k][2 * d + 1] += given[i][d] as usize;
            }
        }
    }
    study
}

// 6. assignment, administration and infection probabilities
fn probabilities(study: &DoseStudy) -> Outcome {
    let p = VaricellaParams::default();
    let mut checks = Vec::new();
    let n_att: usize = study.attitudes.iter().sum();
    for k in 0..3 {
        checks.push((
            format!("attitude {k}"),
            within_3sd(study.attitudes[k], n_att, p.attitude_shares[k]),
            n_att,
        ));
    }
    for k in 0..3 {
        let [n1, g1, n2, g2] = study.by_attitude[k];
        checks.push((
            format!("dose1 attitude {k}"),
            within_3sd(g1, n1, p.dose1_administration[k]),
            n1,
        ));
        checks.push((
            format!("dose2 attitude {k}"),
            within_3sd(g2, n2, p.dose2_administration[k]),
            n2,
        ));
    }

    let params = VaricellaParams {
        initial_force_of_infection: 0.0,
        initial_infectious: 0,
        ..p.clone()
    };
    let settings = VzvSettings {
        arm: Arm::Baseline,
        realization: 0,
        master_seed: 5,
        population: 150_000,
        horizon: 1.0,
        burn_in: 0.0,
        program_start: None,
        age_bins: Default::default(),
        snapshot: false,
        trace: false,
    };
    let (mut model, mut sched) = VzvModel::new(
        Arc::new(params),
        &DemographyConfig::default(),
        Arc::new(Default::default()),
        settings,
    )
    .expect("model");
    let n_agents = model.population().people().len() as u32;
    for (source, prob) in [
        (Source::Chickenpox, p.p_infection_normal),
        (Source::Breakthrough, p.p_infection_breakthrough),
    ] {
        let (mut trials, mut hits) = (0, 0);
        let mut a = 0u32;
        while trials < 100_000 && a < 4 * n_agents {
            let agent = AgentId(a % n_agents);
            a += 1;
            if model.state(agent, 0) != Some(model.ids().susceptible) {
                continue;
            }
            trials += 1;
            hits += model.expose(agent, source, &mut sched).min(1);
        }
        checks.push((
            format!("infection {source:?}"),
            within_3sd(hits, trials, prob),
            trials,
        ));
    }
    let failed: Vec<String> = checks
        .iter()
        .filter(|c| !c.1 .0)
        .map(|c| format!("{} {:.4} (n={})", c.0, c.1 .1, c.2))
        .collect();
    let summary: Vec<String> = checks
        .iter()
        .map(|c| format!("{} {:.3}", c.0, c.1 .1))
        .collect();
    Outcome {
        id: 6,
        name: "attitude, administration and infection probabilities",
        pass: failed.is_empty(),
        detail: if failed.is_empty() {
            summary.join(", ")
        } else {
            format!("outside 3 sd: {}", failed.join(", "))
        },
    }
}

// 7. emergent dose-1 coverage and pertussis dose-4 coverage
fn coverage(study: &DoseStudy) -> Outcome {
    let p = VaricellaParams::default();
    let oracle: f64 = (0..3)
        .map(|k| p.attitude_shares[k] * p.dose1_administration[k])
        .sum();
    let reached: usize = study.by_attitude.iter().map(|r| r[0]).sum();
    let given: usize = study.by_attitude.iter().map(|r| r[1]).sum();
    let share = given as f64 / reached as f64;

    let mut cfg = ScenarioConfig::new(ModelPack::Pertussis, 10_000);
    cfg.realizations = 1;
    cfg.intervention.enabled = false;
    let res = runner::run_ensemble(&cfg, 1).expect("run");
    let dose4 = res[0].pairs[0]
        .baseline
        .coverage
        .iter()
        .find(|(l, _)| l == "dose4")
        .map(|c| c.1)
        .unwrap_or(f64::NAN);
    Outcome {
        id: 7,
        name: "coverage expectation",
        pass: reached >= 100_000 && (share - oracle).abs() <= 0.01 && (0.70..=0.80).contains(&dose4),
        detail: format!(
            "varicella dose 1: {share:.4} vs {oracle:.4} over {reached} agents; pertussis dose 4: {dose4:.3}"
        ),
    }
}

fn read_tree(root: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for e in std::fs::read_dir(&dir).unwrap() {
            let path = e.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else if path.file_name().unwrap() != "manifest.json" {
                let rel = path.strip_prefix(root).unwrap().display().to_string();
                out.push((rel, std::fs::read(&path).unwrap()));
            }
        }
    }
    out.sort();
    out
}

// 8. byte-identical output at any --jobs, accounting identity, spatial oracle
fn determinism(accounting: &[&RealizationOutput]) -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let mut identical = true;
    let mut files = 0;
    for (pack, extra) in [
        (
            "varicella",
            r#", "intervention": {"boosting_durations": [3, 6]}"#,
        ),
        ("pertussis", ""),
    ] {
        let scenario = tmp.path().join(format!("{pack}.json"));
        std::fs::write(
            &scenario,
            format!(r#"{{"model_pack": "{pack}", "population": 1500, "horizon": 16, "burn_in": 8, "realizations": 4{extra}}}"#),
        )
        .unwrap();
        let mut trees = Vec::new();
        for jobs in ["1", "4"] {
            let out = tmp.path().join(format!("{pack}-{jobs}"));
            let status = Command::new(env!("CARGO_BIN_EXE_epichart"))
                .args(["run", "--quiet", "--jobs", jobs, "--scenario"])
                .arg(&scenario)
                .arg("--out")
                .arg(&out)
                .status()
                .unwrap();
            identical &= status.success();
            trees.push(read_tree(&out));
        }
        files += trees[0].len();
        identical &= !trees[0].is_empty() && trees[0] == trees[1];
    }

    let books = accounting.iter().all(|o| o.accounting_holds());

    let mut r = RngStream::new(9, 0, "acceptance-spatial");
    let side = 50.0;
    let mut index = SpatialIndex::new(side, 2.0);
    let points: Vec<Point> = (0..5_000)
        .map(|_| Point::new(r.uniform() * side, r.uniform() * side))
        .collect();
    for (i, p) in points.iter().enumerate() {
        index.insert(AgentId(i as u32), *p);
    }
    let mut spatial = true;
    for _ in 0..1_000 {
        let c = Point::new(r.uniform() * side, r.uniform() * side);
        let radius = r.uniform() * 6.0;
        let exclude = AgentId(r.index(points.len()) as u32);
        let mut got = index.neighbors_within(c, radius, exclude);
        got.sort();
        let brute: Vec<AgentId> = points
            .iter()
            .enumerate()
            .filter(|(i, p)| *i != exclude.index() && p.dist2(c) <= radius * radius)
            .map(|(i, _)| AgentId(i as u32))
            .collect();
        spatial &= got == brute;
    }
    Outcome {
        id: 8,
        name: "determinism and accounting",
        pass: identical && books && spatial,
        detail: format!(
            "jobs 1 vs 4 identical over {files} files: {identical}; accounting over {} runs: {books}; spatial 1000 probes: {spatial}",
            accounting.len()
        ),
    }
}

// 9. diagonal dominance and parent-child bands
fn contact_structure() -> Outcome {
    let mut cfg = ScenarioConfig::new(ModelPack::Pertussis, 10_000);
    cfg.realizations = 1;
    cfg.intervention.enabled = false;
    cfg.output.contact_survey_size = 500;
    let res = runner::run_ensemble(&cfg, 1).expect("run");
    let m = res[0].pairs[0].baseline.contacts.clone().expect("survey");
    let density = m.band_density();
    let diagonal_max = density[1..].iter().all(|v| *v < density[0]);
    let (d_star, _) = density
        .iter()
        .enumerate()
        .skip(2)
        .max_by(|a, b| a.1.total_cmp(b.1))
        .unwrap();
    Outcome {
        id: 9,
        name: "contact structure",
        pass: diagonal_max && (4..=8).contains(&d_star),
        detail: format!(
            "diagonal density {:.4} (next {:.4}); largest band with gap >= 10 yr is {}-{} yr ({:.4})",
            density[0],
            density[1],
            d_star as f64 * m.bin_width(),
            (d_star + 1) as f64 * m.bin_width(),
            density[d_star]
        ),
    }
}

// 10. one realization of 10,000 agents over 50 years per pack under 60 s
fn performance() -> (Outcome, Vec<RealizationOutput>) {
    let mut outs = Vec::new();
    let mut times = Vec::new();
    for pack in [ModelPack::Varicella, ModelPack::Pertussis] {
        let mut cfg = ScenarioConfig::new(pack, 10_000);
        cfg.horizon = 50.0;
        cfg.realizations = 1;
        let variant = &runner::variants(&cfg)[0];
        let started = Instant::now();
        let out = runner::simulate(&cfg, variant, 0, Arm::Intervention).expect("run");
        times.push(started.elapsed().as_secs_f64());
        outs.push(out);
    }
    let o = Outcome {
        id: 10,
        name: "performance envelope",
        pass: times.iter().all(|t| *t < 60.0),
        detail: format!(
            "varicella {:.1}s ({} events), pertussis {:.1}s ({} events)",
            times[0], outs[0].events_processed, times[1], outs[1].events_processed
        ),
    };
    (o, outs)
}

fn main() -> ExitCode {
    let mut results = Vec::new();
    let mut report = |o: Outcome| {
        println!(
            "[{}] criterion {:>2}: {} :: {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.id,
            o.name,
            o.detail
        );
        results.push((o.id, o.pass));
    };
    report(protection_math());
    report(statechart_semantics());
    let study = dose_study();
    report(probabilities(&study));
    report(coverage(&study));
    let (perf, outs) = performance();
    report(perf);
    report(determinism(&outs.iter().collect::<Vec<_>>()));
    report(contact_structure());
    report(maternal_immunization());
    let started = Instant::now();
    let sweep = vzv_ensemble(vec![2.0, 4.0, 5.0, 6.0]);
    let seconds = started.elapsed().as_secs_f64();
    let d5 = sweep
        .iter()
        .find(|r| r.variant.boosting_duration == Some(5.0))
        .expect("5 yr variant");
    report(shingles_surge(d5, seconds));
    report(boosting_ordering(&sweep));

    results.sort();
    let failed: Vec<usize> = results.iter().filter(|r| !r.1).map(|r| r.0).collect();
    if failed.is_empty() {
        println!("acceptance: all {} criteria passed", results.len());
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failed criteria {failed:?}");
        ExitCode::FAILURE
    }
}
