use std::sync::Arc;

use rand_distr::{Beta, Distribution, Poisson};

use super::charts::{self, PertussisIds, COMPLIANCE, FERTILITY, INFECTION, LIFE, VITAL};
use super::immunity::{ImmunityState, MemoryType};
use super::params::age_table_lookup;
use super::PertussisParams;
use crate::engine::{
    AgentId, Message, Model, RngRegistry, RngStream, Scheduler, SimTime, Substream,
};
use crate::metrics::{
    AgeBinnedIncidence, AgeBins, Arm, ContactMatrix, EventLog, EventRecord, YearGrid,
};
use crate::output::{RealizationOutput, Trajectory};
use crate::population::{DemographyConfig, Population, PopulationError, Sex, VaccineAttitude};
use crate::statechart::{
    self, ChartHost, ChartInstance, ChartSet, ChartTimer, StateId, TransitionId,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExposureSource {
    Infectious,
    Imported,
}

pub type PertussisMessage = Message<ExposureSource>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layer {
    Household,
    School,
    Background,
}

#[derive(Debug, Clone, Copy)]
pub enum PertussisEvent {
    Timer(ChartTimer),
    Deliver(PertussisMessage),
    Contact {
        agent: AgentId,
        layer: Layer,
        epoch: u32,
    },
    DoseDue {
        agent: AgentId,
        dose: usize,
    },
    Import,
    Survey,
}

impl From<ChartTimer> for PertussisEvent {
    fn from(t: ChartTimer) -> Self {
        PertussisEvent::Timer(t)
    }
}

pub mod kinds {
    pub const INFECTION: &str = "infection";
    pub const REPORTED: &str = "reported";
    pub const DOSE: &str = "dose";
    pub const MATERNAL_DOSE: &str = "maternal_dose";
    pub const PREGNANCY: &str = "third_trimester";
    pub const BIRTH: &str = "birth";
    pub const DEATH: &str = "death";
}

/// Run settings of one pertussis realization.
#[derive(Debug, Clone)]
pub struct PertussisSettings {
    pub arm: Arm,
    pub realization: usize,
    pub master_seed: u64,
    pub population: usize,
    pub horizon: SimTime,
    pub burn_in: SimTime,
    /// Start of maternal immunization; `None` in the baseline arm.
    pub program_start: Option<SimTime>,
    pub maternal_coverage: f64,
    pub blunting: bool,
    /// Whether the maternal dose raises the antibodies passed to the newborn.
    pub passive_protection: bool,
    pub maternal_antibody_duration: Option<f64>,
    pub ascertainment: Option<Vec<[f64; 2]>>,
    pub age_bins: AgeBins,
    pub snapshot: bool,
    pub trajectory_sample: usize,
    pub survey_size: usize,
}

impl PertussisSettings {
    /// Settings with default outputs for a quick run.
    pub fn new(arm: Arm, realization: usize, master_seed: u64, population: usize) -> Self {
        PertussisSettings {
            arm,
            realization,
            master_seed,
            population,
            horizon: 50.0,
            burn_in: 20.0,
            program_start: None,
            maternal_coverage: 0.0,
            blunting: false,
            passive_protection: true,
            maternal_antibody_duration: None,
            ascertainment: None,
            age_bins: AgeBins::default(),
            snapshot: false,
            trajectory_sample: 0,
            survey_size: 0,
        }
    }
}

#[derive(Debug, Clone)]
struct PAgent {
    charts: [ChartInstance; 5],
    alive: bool,
    death_at: SimTime,
    immunity: ImmunityState,
    next_dose: usize,
    pending: bool,
    dose_times: Vec<SimTime>,
    epoch: u32,
    exposure_protection: f64,
    /// Immunity the mother would have had without this pregnancy's dose.
    counterfactual: Option<ImmunityState>,
    history: Option<Vec<ImmunityState>>,
}

pub struct PertussisModel {
    set: Arc<ChartSet>,
    ids: PertussisIds,
    p: Arc<PertussisParams>,
    s: PertussisSettings,
    pop: Population,
    agents: Vec<PAgent>,
    rng: RngRegistry,
    log: EventLog,
    contacts: ContactMatrix,
    acceptance: Beta<f64>,
    w_passive: f64,
    traced: usize,
}

fn slot_stream(slot: usize) -> Substream {
    match slot {
        INFECTION => Substream::NaturalHistory,
        COMPLIANCE => Substream::Compliance,
        FERTILITY => Substream::Fertility,
        _ => Substream::Demographics,
    }
}

fn choose<I: Iterator<Item = AgentId>>(it: I, rng: &mut RngStream) -> Option<AgentId> {
    let mut chosen = None;
    for (seen, id) in it.enumerate() {
        if seen == 0 || rng.index(seen + 1) == 0 {
            chosen = Some(id);
        }
    }
    chosen
}

impl PertussisModel {
    pub fn new(
        p: Arc<PertussisParams>,
        demography: &DemographyConfig,
        s: PertussisSettings,
    ) -> Result<(Self, Scheduler<PertussisEvent>), PopulationError> {
        let (set, ids) = charts::build(&p);
        let acceptance = Beta::new(p.acceptance_beta[0], p.acceptance_beta[1])
            .map_err(|e| PopulationError::Distribution(e.to_string()))?;
        let mut rng = RngRegistry::new(s.master_seed, s.realization as u64);
        let pop = Population::initialize(
            s.population,
            demography,
            p.background_radius,
            rng.stream(Substream::Initialization),
            |r| VaccineAttitude::Acceptance(acceptance.sample(r)),
        )?;
        let w_passive = s
            .maternal_antibody_duration
            .map(|d| 1.0 / d)
            .unwrap_or(p.waning_passive);
        let mut m = PertussisModel {
            set: Arc::new(set),
            ids,
            p,
            s,
            pop,
            agents: Vec::new(),
            rng,
            log: EventLog::new(),
            contacts: ContactMatrix::new(5.0, 17),
            acceptance,
            w_passive,
            traced: 0,
        };
        let mut sched = Scheduler::new();
        m.initialize(&mut sched);
        Ok((m, sched))
    }

    fn push_agent(
        &mut self,
        id: AgentId,
        t: SimTime,
        immunity: ImmunityState,
        substream: Substream,
    ) {
        let age = self.pop.age(id, t);
        let r = self.rng.stream(substream);
        let death_at = t + self.pop.config().mortality.sample_remaining(age, r);
        let next_dose = self.p.dose_ages.partition_point(|&a| a < age);
        debug_assert_eq!(id.index(), self.agents.len());
        self.agents.push(PAgent {
            charts: [ChartInstance::new(0, t); 5],
            alive: true,
            death_at,
            immunity,
            next_dose,
            pending: false,
            dose_times: Vec::new(),
            epoch: 0,
            exposure_protection: 0.0,
            counterfactual: None,
            history: None,
        });
    }

    fn initialize(&mut self, sched: &mut Scheduler<PertussisEvent>) {
        let set = Arc::clone(&self.set);
        let ids = self.ids;
        let cfg = self.pop.config().clone();
        for i in 0..self.pop.len() {
            let id = AgentId(i as u32);
            let r = self.rng.stream(Substream::Initialization);
            let mut imm = ImmunityState::naive(0.0, self.w_passive);
            if r.bernoulli(self.p.initial_immune_share) {
                imm.p_active = r.uniform();
                imm.memory = MemoryType::Natural;
                imm.w_active = self.p.waning_natural;
            }
            self.push_agent(id, 0.0, imm, Substream::Initialization);
            let person = self.pop.person(id);
            let age = person.age(0.0);
            let life = if age < cfg.school_entry_age {
                ids.preschool
            } else if age < cfg.school_exit_age {
                ids.in_school
            } else if !person.left_home {
                ids.left_school
            } else {
                ids.independent
            };
            statechart::instantiate(&set, self, sched, id, VITAL, 0.0);
            statechart::instantiate(&set, self, sched, id, INFECTION, 0.0);
            statechart::instantiate(&set, self, sched, id, COMPLIANCE, 0.0);
            statechart::instantiate(&set, self, sched, id, FERTILITY, 0.0);
            statechart::instantiate_in(&set, self, sched, id, LIFE, life, 0.0);
            self.schedule_dose(id, 0.0, sched);
        }
        let n = self.p.initial_infectious.min(self.pop.len());
        for _ in 0..n {
            let r = self.rng.stream(Substream::Initialization);
            let id = AgentId(r.index(self.pop.len()) as u32);
            if self.agents[id.index()].charts[INFECTION].state == ids.uninfected {
                statechart::instantiate_in(&set, self, sched, id, INFECTION, ids.infectious, 0.0);
            }
        }
        if self.p.importation_rate > 0.0 {
            let dt = self
                .rng
                .stream(Substream::Transmission)
                .exponential(self.p.importation_rate)
                .expect("positive rate");
            sched.schedule_in(dt, PertussisEvent::Import);
        }
        if self.s.survey_size > 0 {
            sched
                .schedule(self.s.burn_in + 0.5, PertussisEvent::Survey)
                .expect("survey time is in the future");
        }
    }

    fn record(&mut self, t: SimTime, kind: &'static str, agent: AgentId, value: f64) {
        let age = self.pop.age(agent, t);
        self.log.record(EventRecord {
            t,
            kind,
            agent,
            age,
            arm: self.s.arm,
            value,
        });
    }

    fn program_active(&self, t: SimTime) -> bool {
        self.s.program_start.is_some_and(|s| t >= s)
    }

    /// Acceptance governing vaccination: own for household heads, the
    /// household minimum otherwise.
    pub fn effective_acceptance(&self, agent: AgentId) -> f64 {
        let person = self.pop.person(agent);
        let own = person.attitude.acceptance().unwrap_or(1.0);
        let hh = self.pop.household(person.household);
        if hh.parents.contains(&agent) {
            own
        } else {
            self.pop
                .household_acceptance(person.household)
                .unwrap_or(own)
        }
    }

    fn schedule_dose(&mut self, agent: AgentId, t: SimTime, sched: &mut Scheduler<PertussisEvent>) {
        let a = &self.agents[agent.index()];
        let k = a.next_dose;
        let Some(&age) = self.p.dose_ages.get(k) else {
            return;
        };
        let birth = self.pop.person(agent).birth_time;
        let earliest = a
            .dose_times
            .last()
            .map(|d| d + self.p.min_dose_interval)
            .unwrap_or(f64::NEG_INFINITY);
        let at = (birth + age).max(earliest).max(t);
        sched
            .schedule(at, PertussisEvent::DoseDue { agent, dose: k })
            .expect("dose time is not in the past");
    }

    fn administer(&mut self, agent: AgentId, t: SimTime, sched: &mut Scheduler<PertussisEvent>) {
        let k = self.agents[agent.index()].next_dose;
        let mut target = self.p.dose_targets[k];
        let a = &self.agents[agent.index()];
        if self.s.blunting
            && k < self.p.blunting_dose_cutoff
            && a.immunity
                .blunts(t, self.p.blunting_passive_threshold)
                .expect("monotone time")
        {
            target *= self.p.blunting_factor;
        }
        let memory = self.p.vaccine_memory;
        let w = self.p.waning(memory);
        let a = &mut self.agents[agent.index()];
        a.immunity
            .apply_dose(t, target, memory, w)
            .expect("monotone time");
        a.dose_times.push(t);
        a.next_dose += 1;
        a.pending = false;
        self.trace_immunity(agent);
        self.record(t, kinds::DOSE, agent, (k + 1) as f64);
        self.schedule_dose(agent, t, sched);
    }

    fn on_dose_due(&mut self, agent: AgentId, dose: usize, sched: &mut Scheduler<PertussisEvent>) {
        let a = &self.agents[agent.index()];
        if !a.alive || a.next_dose != dose {
            return;
        }
        if a.charts[COMPLIANCE].state == self.ids.on_schedule {
            self.administer(agent, sched.now(), sched);
        } else {
            self.agents[agent.index()].pending = true;
        }
    }

    fn trace_immunity(&mut self, agent: AgentId) {
        let a = &mut self.agents[agent.index()];
        if let Some(h) = a.history.as_mut() {
            h.push(a.immunity);
        }
    }

    fn start_contacts(&mut self, agent: AgentId, sched: &mut Scheduler<PertussisEvent>) {
        let a = &mut self.agents[agent.index()];
        a.epoch = a.epoch.wrapping_add(1);
        let epoch = a.epoch;
        for (layer, rate) in [
            (Layer::Household, self.p.household_contact_rate),
            (Layer::School, self.p.school_contact_rate),
            (Layer::Background, self.p.background_contact_rate),
        ] {
            if rate > 0.0 {
                let dt = self
                    .rng
                    .stream(Substream::Transmission)
                    .exponential(rate)
                    .expect("positive rate");
                sched.schedule_in(
                    dt,
                    PertussisEvent::Contact {
                        agent,
                        layer,
                        epoch,
                    },
                );
            }
        }
    }

    /// A living neighbor of `agent` in `layer`. School contacts are with
    /// classmates (born within `classmate_age_gap`) with probability
    /// `classmate_share`, otherwise with any schoolmate.
    pub fn layer_neighbor(
        &mut self,
        agent: AgentId,
        layer: Layer,
        substream: Substream,
    ) -> Option<AgentId> {
        let r = self.rng.stream(substream);
        match layer {
            Layer::Household => choose(self.pop.household_contacts(agent), r),
            Layer::School => {
                if r.bernoulli(self.p.classmate_share) {
                    let born = self.pop.person(agent).birth_time;
                    let gap = self.p.classmate_age_gap;
                    let pop = &self.pop;
                    let mates = pop
                        .school_contacts(agent)
                        .filter(|m| (pop.person(*m).birth_time - born).abs() <= gap);
                    if let Some(m) = choose(mates, r) {
                        return Some(m);
                    }
                }
                choose(self.pop.school_contacts(agent), r)
            }
            Layer::Background => self
                .pop
                .choose_within(agent, self.p.background_radius, r, |_| true),
        }
    }

    fn on_contact(
        &mut self,
        agent: AgentId,
        layer: Layer,
        epoch: u32,
        sched: &mut Scheduler<PertussisEvent>,
    ) {
        let a = &self.agents[agent.index()];
        if !a.alive || a.epoch != epoch || a.charts[INFECTION].state != self.ids.infectious {
            return;
        }
        if let Some(to) = self.layer_neighbor(agent, layer, Substream::Transmission) {
            self.send(agent, to, ExposureSource::Infectious, sched);
        }
        let rate = match layer {
            Layer::Household => self.p.household_contact_rate,
            Layer::School => self.p.school_contact_rate,
            Layer::Background => self.p.background_contact_rate,
        };
        let dt = self
            .rng
            .stream(Substream::Transmission)
            .exponential(rate)
            .expect("positive rate");
        sched.schedule_in(
            dt,
            PertussisEvent::Contact {
                agent,
                layer,
                epoch,
            },
        );
    }

    fn send(
        &mut self,
        from: AgentId,
        to: AgentId,
        payload: ExposureSource,
        sched: &mut Scheduler<PertussisEvent>,
    ) {
        let msg = Message {
            sender: from,
            recipient: to,
            kind: charts::PERTUSSIS_EXPOSURE,
            delivery_time: sched.now(),
            payload,
        };
        sched.schedule_in(0.0, PertussisEvent::Deliver(msg));
    }

    /// One simulated survey day for a random sample of the living.
    fn survey(&mut self, t: SimTime) {
        let school = Poisson::new(self.p.survey_school_contacts.max(1e-12)).expect("positive mean");
        let background =
            Poisson::new(self.p.survey_background_contacts.max(1e-12)).expect("positive mean");
        for _ in 0..self.s.survey_size {
            let Some(id) = self.pop.random_alive(self.rng.stream(Substream::Survey)) else {
                return;
            };
            let age = self.pop.age(id, t);
            self.contacts.add_observation(age, 1.0);
            let household: Vec<AgentId> = self.pop.household_contacts(id).collect();
            for other in household {
                self.contacts.add_contact(age, self.pop.age(other, t));
            }
            for (layer, dist) in [(Layer::School, &school), (Layer::Background, &background)] {
                let n = dist.sample(self.rng.stream(Substream::Survey)) as usize;
                for _ in 0..n {
                    if let Some(other) = self.layer_neighbor(id, layer, Substream::Survey) {
                        self.contacts.add_contact(age, self.pop.age(other, t));
                    }
                }
            }
        }
    }

    fn give_birth(&mut self, mother: AgentId, t: SimTime, sched: &mut Scheduler<PertussisEvent>) {
        let m = &mut self.agents[mother.index()];
        let counterfactual = m.counterfactual.take();
        let actual = m.immunity.protection_level(t).expect("monotone time");
        let level = match counterfactual {
            Some(c) if !self.s.passive_protection => c.protection_level(t).expect("monotone time"),
            _ => actual,
        };
        let r = self.rng.stream(Substream::Demographics);
        let u = self.acceptance.sample(r);
        let child = self
            .pop
            .add_birth(mother, t, r, VaccineAttitude::Acceptance(u));
        let imm = ImmunityState::newborn(level, self.p.maternal_transfer, self.w_passive, t);
        self.push_agent(child, t, imm, Substream::Demographics);
        if self.traced < self.s.trajectory_sample && t >= self.s.burn_in {
            self.traced += 1;
            self.agents[child.index()].history = Some(vec![imm]);
        }
        let set = Arc::clone(&self.set);
        for slot in [VITAL, INFECTION, COMPLIANCE, FERTILITY, LIFE] {
            statechart::instantiate(&set, self, sched, child, slot, t);
        }
        self.schedule_dose(child, t, sched);
        self.record(t, kinds::BIRTH, child, level);
    }

    pub fn population(&self) -> &Population {
        &self.pop
    }

    pub fn log(&self) -> &EventLog {
        &self.log
    }

    pub fn chart_set(&self) -> &ChartSet {
        &self.set
    }

    pub fn ids(&self) -> &PertussisIds {
        &self.ids
    }

    pub fn immunity(&self, agent: AgentId) -> &ImmunityState {
        &self.agents[agent.index()].immunity
    }

    pub fn state(&self, agent: AgentId, slot: usize) -> Option<StateId> {
        let a = self.agents.get(agent.index())?;
        a.alive.then_some(a.charts[slot].state)
    }

    pub fn doses_received(&self, agent: AgentId) -> usize {
        self.agents[agent.index()].dose_times.len()
    }

    pub fn run(mut self, mut sched: Scheduler<PertussisEvent>) -> RealizationOutput {
        sched.run_until(self.s.horizon, &mut self);
        self.finish(sched.processed())
    }

    pub fn finish(self, events: u64) -> RealizationOutput {
        let horizon = self.s.horizon;
        let grid = YearGrid::new(self.s.burn_in, horizon);
        let mut infections = AgeBinnedIncidence::new(grid, self.s.age_bins.clone());
        for p in self.pop.people() {
            infections.add_exposure(
                p.birth_time,
                p.birth_time.max(0.0),
                p.death_time.unwrap_or(horizon),
            );
        }
        let mut reported = infections.clone();
        for r in self.log.records() {
            match r.kind {
                kinds::INFECTION => infections.add_event(r.t, r.age),
                kinds::REPORTED => reported.add_event(r.t, r.age),
                _ => {}
            }
        }
        let trajectories = self
            .agents
            .iter()
            .enumerate()
            .filter_map(|(i, a)| {
                let h = a.history.as_ref()?;
                let birth = self.pop.people()[i].birth_time;
                let end = self.pop.people()[i]
                    .death_time
                    .unwrap_or(horizon)
                    .min(birth + 2.0);
                let mut points = Vec::new();
                let mut k = 0;
                let mut t = birth;
                while t <= end {
                    while k + 1 < h.len() && h[k + 1].last_update <= t {
                        k += 1;
                    }
                    let level = h[k].protection_level(t).expect("history is ordered");
                    points.push((t - birth, level));
                    t += 1.0 / 52.0;
                }
                Some(Trajectory {
                    agent: i as u32,
                    label: self.s.arm.label().to_string(),
                    points,
                })
            })
            .collect();
        let coverage = self.coverage();
        let snapshot = self.s.snapshot.then(|| {
            self.pop
                .snapshot_csv(horizon, "infection_state,protection,doses", |id| {
                    let a = &self.agents[id.index()];
                    format!(
                        "{},{:.6},{}",
                        self.set
                            .get(INFECTION)
                            .state(a.charts[INFECTION].state)
                            .name,
                        a.immunity.protection_level(horizon).unwrap_or(f64::NAN),
                        a.dose_times.len()
                    )
                })
        });
        RealizationOutput {
            arm: self.s.arm,
            realization: self.s.realization,
            outcomes: vec![
                ("infections".to_string(), infections),
                ("reported".to_string(), reported),
            ],
            econ: None,
            coverage,
            contacts: (self.s.survey_size > 0).then_some(self.contacts),
            trajectories,
            events_processed: events,
            initial_population: self.pop.initial_count(),
            final_population: self.pop.alive_count(),
            births: self.pop.births(),
            deaths: self.pop.deaths(),
            snapshot,
        }
    }

    /// Dose-k coverage: among children born during the run who were alive
    /// half a year past dose-k age inside the reporting window, the share
    /// who had received dose k by then. Plus the maternal dose share.
    pub fn coverage(&self) -> Vec<(String, f64)> {
        let mut rows = Vec::new();
        for (k, &age) in self.p.dose_ages.iter().enumerate() {
            let (mut eligible, mut covered) = (0usize, 0usize);
            for (i, p) in self.pop.people().iter().enumerate() {
                let at = p.birth_time + age + 0.5;
                if p.birth_time < 0.0 || at < self.s.burn_in || at > self.s.horizon {
                    continue;
                }
                if p.death_time.is_some_and(|d| d < at) {
                    continue;
                }
                eligible += 1;
                if self.agents[i].dose_times.get(k).is_some_and(|&d| d <= at) {
                    covered += 1;
                }
            }
            let share = if eligible > 0 {
                covered as f64 / eligible as f64
            } else {
                0.0
            };
            rows.push((format!("dose{}", k + 1), share));
        }
        let pregnancies = self
            .log
            .of_kind(kinds::PREGNANCY)
            .filter(|r| self.program_active(r.t))
            .count();
        let doses = self.log.count(kinds::MATERNAL_DOSE);
        let share = if pregnancies > 0 {
            doses as f64 / pregnancies as f64
        } else {
            0.0
        };
        rows.push(("maternal".to_string(), share));
        rows
    }
}

impl ChartHost for PertussisModel {
    type Event = PertussisEvent;
    type Payload = ExposureSource;

    fn instance(&mut self, agent: AgentId, slot: usize) -> Option<&mut ChartInstance> {
        let a = self.agents.get_mut(agent.index())?;
        if a.alive {
            Some(&mut a.charts[slot])
        } else {
            None
        }
    }

    fn timer_stream(&mut self, _agent: AgentId, slot: usize) -> &mut RngStream {
        self.rng.stream(slot_stream(slot))
    }

    fn rate(&mut self, agent: AgentId, slot: usize, tr: TransitionId, t: SimTime) -> f64 {
        let ids = &self.ids;
        if slot == COMPLIANCE && tr == ids.t_lapse {
            let u = self.effective_acceptance(agent);
            self.p.noncompliance_hazard * (1.0 - u).powi(2)
        } else if slot == COMPLIANCE && tr == ids.t_return {
            let u = self.effective_acceptance(agent);
            self.p.return_hazard * u.powi(2)
        } else if slot == FERTILITY && tr == ids.t_conceive {
            let p = self.pop.person(agent);
            if p.sex == Sex::Female && p.left_home {
                self.pop.config().fertility.rate(p.age(t), p.parity)
            } else {
                0.0
            }
        } else {
            0.0
        }
    }

    fn timeout(
        &mut self,
        agent: AgentId,
        slot: usize,
        tr: TransitionId,
        t: SimTime,
    ) -> Option<f64> {
        let ids = &self.ids;
        let p = self.pop.person(agent);
        let cfg = self.pop.config();
        let at = if slot == VITAL && tr == ids.t_death {
            self.agents[agent.index()].death_at
        } else if slot != LIFE {
            return None;
        } else if tr == ids.t_enter_school {
            p.birth_time + cfg.school_entry_age
        } else if tr == ids.t_leave_school {
            p.birth_time + cfg.school_exit_age
        } else if tr == ids.t_leave_home {
            p.birth_time + p.departure_age.max(cfg.school_exit_age)
        } else {
            return None;
        };
        Some((at - t).max(0.0))
    }

    fn guard(
        &mut self,
        agent: AgentId,
        slot: usize,
        tr: TransitionId,
        t: SimTime,
        _msg: Option<&PertussisMessage>,
    ) -> bool {
        if slot != INFECTION || tr != self.ids.t_infect {
            return true;
        }
        let age = self.pop.age(agent, t);
        let alpha = age_table_lookup(&self.p.protection_threshold, age);
        let level = self.agents[agent.index()]
            .immunity
            .protection_level(t)
            .expect("monotone time");
        if level >= alpha {
            return false;
        }
        self.agents[agent.index()].exposure_protection = level;
        self.rng
            .stream(Substream::Transmission)
            .bernoulli(self.p.p_infection)
    }

    fn on_enter(
        &mut self,
        agent: AgentId,
        slot: usize,
        state: StateId,
        t: SimTime,
        sched: &mut Scheduler<PertussisEvent>,
    ) {
        let ids = self.ids;
        match slot {
            INFECTION if state == ids.latent => {
                let level = self.agents[agent.index()].exposure_protection;
                self.record(t, kinds::INFECTION, agent, level);
                let age = self.pop.age(agent, t);
                let table = self
                    .s
                    .ascertainment
                    .as_deref()
                    .unwrap_or(&self.p.ascertainment);
                let p = age_table_lookup(table, age);
                if self.rng.stream(Substream::Reporting).bernoulli(p) {
                    self.record(t, kinds::REPORTED, agent, level);
                }
            }
            INFECTION if state == ids.infectious => self.start_contacts(agent, sched),
            COMPLIANCE if state == ids.on_schedule => {
                let a = &self.agents[agent.index()];
                if a.pending && self.pop.age(agent, t) < self.p.catch_up_age_limit {
                    self.administer(agent, t, sched);
                }
            }
            FERTILITY if state == ids.trimester3 => {
                self.record(t, kinds::PREGNANCY, agent, 0.0);
                if self.program_active(t)
                    && self.s.maternal_coverage > 0.0
                    && self
                        .rng
                        .stream(Substream::Vaccination)
                        .bernoulli(self.s.maternal_coverage)
                {
                    let memory = self.p.vaccine_memory;
                    let w = self.p.waning(memory);
                    let target = self.p.maternal_dose_target;
                    let a = &mut self.agents[agent.index()];
                    let mut before = a.immunity;
                    before.advance(t).expect("monotone time");
                    a.counterfactual = Some(before);
                    a.immunity
                        .apply_dose(t, target, memory, w)
                        .expect("monotone time");
                    self.record(t, kinds::MATERNAL_DOSE, agent, target);
                }
            }
            LIFE if state == ids.in_school => {
                let r = self.rng.stream(Substream::Demographics);
                self.pop.enroll(agent, r);
            }
            LIFE if state == ids.left_school => self.pop.leave_school(agent),
            LIFE if state == ids.independent => {
                let r = self.rng.stream(Substream::Demographics);
                self.pop.leave_home(agent, r);
                let set = Arc::clone(&self.set);
                statechart::refresh(&set, self, sched, agent, COMPLIANCE, t);
                statechart::refresh(&set, self, sched, agent, FERTILITY, t);
            }
            VITAL if state == ids.dead => {
                self.record(t, kinds::DEATH, agent, 0.0);
                let a = &mut self.agents[agent.index()];
                a.alive = false;
                a.epoch = a.epoch.wrapping_add(1);
                self.pop.kill(agent, t);
            }
            _ => {}
        }
    }

    fn action(
        &mut self,
        agent: AgentId,
        slot: usize,
        tr: TransitionId,
        t: SimTime,
        _msg: Option<&PertussisMessage>,
        sched: &mut Scheduler<PertussisEvent>,
    ) {
        if slot == INFECTION && tr == self.ids.t_recover {
            let w = self.p.waning_natural;
            let a = &mut self.agents[agent.index()];
            a.epoch = a.epoch.wrapping_add(1);
            a.immunity.recover(t, w).expect("monotone time");
            self.trace_immunity(agent);
        } else if slot == FERTILITY && tr == self.ids.t_birth {
            self.give_birth(agent, t, sched);
        }
    }
}

impl Model for PertussisModel {
    type Event = PertussisEvent;

    fn handle(&mut self, sched: &mut Scheduler<PertussisEvent>, event: PertussisEvent) {
        match event {
            PertussisEvent::Timer(timer) => {
                let set = Arc::clone(&self.set);
                statechart::handle_timer(&set, self, sched, timer);
            }
            PertussisEvent::Deliver(msg) => {
                if self.agents[msg.recipient.index()].alive {
                    let set = Arc::clone(&self.set);
                    statechart::deliver(&set, self, sched, &msg);
                }
            }
            PertussisEvent::Contact {
                agent,
                layer,
                epoch,
            } => self.on_contact(agent, layer, epoch, sched),
            PertussisEvent::DoseDue { agent, dose } => self.on_dose_due(agent, dose, sched),
            PertussisEvent::Import => {
                if let Some(to) = self
                    .pop
                    .random_alive(self.rng.stream(Substream::Transmission))
                {
                    self.send(to, to, ExposureSource::Imported, sched);
                }
                let dt = self
                    .rng
                    .stream(Substream::Transmission)
                    .exponential(self.p.importation_rate)
                    .expect("positive rate");
                sched.schedule_in(dt, PertussisEvent::Import);
            }
            PertussisEvent::Survey => {
                let t = sched.now();
                self.survey(t);
                sched.schedule_in(1.0, PertussisEvent::Survey);
            }
        }
    }
}
