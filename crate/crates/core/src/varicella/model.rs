use std::sync::Arc;

use rand_distr::{Distribution, Gamma, Normal};

use super::charts::{self, VzvIds, ADHERENCE, AGING, NATURAL_HISTORY};
use super::econ::{CostCategory, Discounter, EconParams, HealthEconLedger};
use super::params::{attitude_index, ATTITUDES};
use super::VaricellaParams;
use crate::engine::{
    AgentId, Message, Model, RngRegistry, RngStream, Scheduler, SimTime, Substream,
};
use crate::metrics::{AgeBinnedIncidence, AgeBins, Arm, EventLog, EventRecord, YearGrid};
use crate::output::RealizationOutput;
use crate::population::{DemographyConfig, Population, PopulationError, Sex, VaccineAttitude};
use crate::statechart::{
    self, ChartHost, ChartInstance, ChartSet, ChartTimer, StateId, TransitionId,
};

/// Who an exposure came from; sets the infection probability.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    Chickenpox,
    Breakthrough,
    Shingles,
    Exogenous,
    /// Vaccination and death messages.
    Internal,
}

pub type VzvMessage = Message<Source>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContactStream {
    Normal,
    Preferential,
}

#[derive(Debug, Clone, Copy)]
pub enum VzvEvent {
    Timer(ChartTimer),
    Deliver(VzvMessage),
    Contact {
        agent: AgentId,
        stream: ContactStream,
        epoch: u32,
    },
    Exogenous,
}

impl From<ChartTimer> for VzvEvent {
    fn from(t: ChartTimer) -> Self {
        VzvEvent::Timer(t)
    }
}

pub mod kinds {
    pub const CHICKENPOX: &str = "chickenpox";
    pub const SHINGLES: &str = "shingles";
    pub const BOOST: &str = "boost";
    pub const BIRTH: &str = "birth";
    pub const DEATH: &str = "death";
    pub const DOSE: &str = "vaccine_dose";
    pub const DOSE_SUCCESS: &str = "vaccine_protected";
}

#[derive(Debug, Clone)]
struct VzvAgent {
    charts: [ChartInstance; 3],
    alive: bool,
    death_at: SimTime,
    force: f64,
    cmi: f64,
    cmi_time: SimTime,
    boost_until: SimTime,
    epoch: u32,
    infectious_until: SimTime,
    source: Source,
    doses_ok: u8,
    missed_first: bool,
    attitude: usize,
}

/// Run settings of one chickenpox realization.
#[derive(Debug, Clone)]
pub struct VzvSettings {
    pub arm: Arm,
    pub realization: usize,
    pub master_seed: u64,
    pub population: usize,
    pub horizon: SimTime,
    pub burn_in: SimTime,
    /// Simulation time the vaccination program starts; `None` disables it.
    pub program_start: Option<SimTime>,
    pub age_bins: AgeBins,
    pub snapshot: bool,
    /// Record every chart state entry (for path checks in tests).
    pub trace: bool,
}

/// One chickenpox/shingles realization.
pub struct VzvModel {
    set: Arc<ChartSet>,
    ids: VzvIds,
    p: Arc<VaricellaParams>,
    econ: Arc<EconParams>,
    s: VzvSettings,
    pop: Population,
    agents: Vec<VzvAgent>,
    rng: RngRegistry,
    log: EventLog,
    ledgers: Vec<HealthEconLedger>,
    discount: Discounter,
    trace: Vec<(AgentId, usize, StateId, SimTime)>,
    force_dist: Gamma<f64>,
    cmi_dist: Normal<f64>,
}

fn slot_stream(slot: usize) -> Substream {
    match slot {
        NATURAL_HISTORY => Substream::NaturalHistory,
        AGING => Substream::Demographics,
        _ => Substream::Vaccination,
    }
}

impl VzvModel {
    /// Build the initial population and arm every chart.
    pub fn new(
        p: Arc<VaricellaParams>,
        demography: &DemographyConfig,
        econ: Arc<EconParams>,
        s: VzvSettings,
    ) -> Result<(Self, Scheduler<VzvEvent>), PopulationError> {
        let (set, ids) = charts::build(&p);
        let mut rng = RngRegistry::new(s.master_seed, s.realization as u64);
        let shares = p.attitude_shares;
        let pop = Population::initialize(
            s.population,
            demography,
            p.max_range(),
            rng.stream(Substream::Initialization),
            |r| attitude_draw(r, &shares),
        )?;
        let force_dist = Gamma::new(p.force_shape, p.force_scale)
            .map_err(|e| PopulationError::Distribution(e.to_string()))?;
        let cmi_dist = Normal::new(p.initial_cmi_mean, p.initial_cmi_sd)
            .map_err(|e| PopulationError::Distribution(e.to_string()))?;
        let discount = Discounter {
            rate: econ.discount_rate,
            origin: s.burn_in,
            end: s.horizon,
        };
        let mut m = VzvModel {
            set: Arc::new(set),
            ids,
            p,
            econ,
            s,
            pop,
            agents: Vec::new(),
            rng,
            log: EventLog::new(),
            ledgers: Vec::new(),
            discount,
            trace: Vec::new(),
            force_dist,
            cmi_dist,
        };
        let mut sched = Scheduler::new();
        m.initialize(&mut sched);
        Ok((m, sched))
    }

    fn new_agent(&mut self, id: AgentId, t: SimTime, substream: Substream) {
        let person = self.pop.person(id);
        let age = person.age(t);
        let attitude = match person.attitude {
            VaccineAttitude::Category(c) => attitude_index(c),
            VaccineAttitude::Acceptance(_) => 0,
        };
        let r = self.rng.stream(substream);
        let death_at = t + self.pop.config().mortality.sample_remaining(age, r);
        let force = self.force_dist.sample(r) + self.p.force_shift;
        debug_assert_eq!(self.agents.len(), id.index());
        self.agents.push(VzvAgent {
            charts: [ChartInstance::new(0, t); 3],
            alive: true,
            death_at,
            force,
            cmi: 0.0,
            cmi_time: t,
            boost_until: t,
            epoch: 0,
            infectious_until: f64::INFINITY,
            source: Source::Internal,
            doses_ok: 0,
            missed_first: false,
            attitude,
        });
        self.ledgers.push(HealthEconLedger::default());
    }

    fn initialize(&mut self, sched: &mut Scheduler<VzvEvent>) {
        let set = Arc::clone(&self.set);
        let ids = self.ids;
        let n = self.pop.len();
        let mut susceptible = Vec::new();
        for i in 0..n {
            let id = AgentId(i as u32);
            self.new_agent(id, 0.0, Substream::Initialization);
            let age = self.pop.age(id, 0.0);
            let r = self.rng.stream(Substream::Initialization);
            let state = if age < self.p.maternal_protection {
                ids.maternal
            } else if r.bernoulli(
                (-self.p.initial_force_of_infection * (age - self.p.maternal_protection)).exp(),
            ) {
                susceptible.push(id);
                ids.susceptible
            } else {
                ids.recovered_cp
            };
            statechart::instantiate(&set, self, sched, id, AGING, 0.0);
            statechart::instantiate_in(&set, self, sched, id, NATURAL_HISTORY, state, 0.0);
            statechart::instantiate(&set, self, sched, id, ADHERENCE, 0.0);
        }
        for _ in 0..self.p.initial_infectious.min(susceptible.len()) {
            let r = self.rng.stream(Substream::Initialization);
            let k = r.index(susceptible.len());
            let id = susceptible.swap_remove(k);
            statechart::instantiate_in(
                &set,
                self,
                sched,
                id,
                NATURAL_HISTORY,
                ids.infectious_cp,
                0.0,
            );
        }
        if self.p.exogenous_infection_rate > 0.0 {
            let dt = self
                .rng
                .stream(Substream::Transmission)
                .exponential(self.p.exogenous_infection_rate)
                .expect("positive rate");
            sched.schedule_in(dt, VzvEvent::Exogenous);
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

    fn cmi_at(&self, a: &VzvAgent, t: SimTime) -> f64 {
        a.cmi * (-self.p.waning_coefficient * self.p.waning_rate * (t - a.cmi_time)).exp()
    }

    /// Reactivation hazard per year; zero inside a boosting window.
    pub fn reactivation_hazard(&self, agent: AgentId, t: SimTime) -> f64 {
        let a = &self.agents[agent.index()];
        if t < a.boost_until {
            return 0.0;
        }
        self.hazard_bound(a) * (-self.p.cmi_suppression * self.cmi_at(a, t)).exp()
    }

    fn hazard_bound(&self, a: &VzvAgent) -> f64 {
        self.p.reactivation_multiplier * a.force.max(0.0)
    }

    fn program_active_at(&self, t: SimTime) -> bool {
        self.s.program_start.is_some_and(|s| t >= s)
    }

    fn start_contacts(
        &mut self,
        agent: AgentId,
        t: SimTime,
        source: Source,
        until: SimTime,
        sched: &mut Scheduler<VzvEvent>,
    ) {
        let age = self.pop.age(agent, t);
        let a = &mut self.agents[agent.index()];
        a.epoch = a.epoch.wrapping_add(1);
        a.source = source;
        a.infectious_until = until;
        let epoch = a.epoch;
        let [lo, hi] = self.p.preferential_ages;
        let mut streams = vec![(ContactStream::Normal, self.p.contact_rate_normal)];
        if age >= lo && age < hi {
            streams.push((
                ContactStream::Preferential,
                self.p.contact_rate_preferential,
            ));
        }
        for (stream, rate) in streams {
            if rate > 0.0 {
                let dt = self
                    .rng
                    .stream(Substream::Transmission)
                    .exponential(rate)
                    .expect("positive rate");
                sched.schedule_in(
                    dt,
                    VzvEvent::Contact {
                        agent,
                        stream,
                        epoch,
                    },
                );
            }
        }
    }

    fn stop_contacts(&mut self, agent: AgentId) {
        let a = &mut self.agents[agent.index()];
        a.epoch = a.epoch.wrapping_add(1);
        a.infectious_until = f64::NEG_INFINITY;
    }

    fn on_contact(
        &mut self,
        agent: AgentId,
        stream: ContactStream,
        epoch: u32,
        sched: &mut Scheduler<VzvEvent>,
    ) {
        let t = sched.now();
        let a = &self.agents[agent.index()];
        if !a.alive || a.epoch != epoch || t > a.infectious_until {
            return;
        }
        let source = a.source;
        let [lo, hi] = self.p.preferential_ages;
        let modifier = if source == Source::Shingles {
            self.p.shingles_range_modifier
        } else {
            1.0
        };
        let (range, rate) = match stream {
            ContactStream::Normal => (self.p.range_normal * modifier, self.p.contact_rate_normal),
            ContactStream::Preferential => {
                let age = self.pop.age(agent, t);
                if age < lo || age >= hi {
                    return;
                }
                (
                    self.p.range_preferential * modifier,
                    self.p.contact_rate_preferential,
                )
            }
        };
        let r = self.rng.stream(Substream::Transmission);
        let recipient = match stream {
            ContactStream::Normal => self.pop.choose_within(agent, range, r, |_| true),
            ContactStream::Preferential => self.pop.choose_within(agent, range, r, |p| {
                let age = p.age(t);
                age >= lo && age < hi
            }),
        };
        if let Some(to) = recipient {
            self.send(agent, to, charts::VZV_EXPOSURE, source, sched);
        }
        let dt = self
            .rng
            .stream(Substream::Transmission)
            .exponential(rate)
            .expect("positive rate");
        sched.schedule_in(
            dt,
            VzvEvent::Contact {
                agent,
                stream,
                epoch,
            },
        );
    }

    fn send(
        &mut self,
        from: AgentId,
        to: AgentId,
        kind: crate::engine::MessageKind,
        payload: Source,
        sched: &mut Scheduler<VzvEvent>,
    ) {
        let t = sched.now();
        let msg = Message {
            sender: from,
            recipient: to,
            kind,
            delivery_time: t,
            payload,
        };
        sched.schedule_in(0.0, VzvEvent::Deliver(msg));
    }

    fn administer(
        &mut self,
        agent: AgentId,
        dose: u8,
        t: SimTime,
        sched: &mut Scheduler<VzvEvent>,
    ) {
        let failure = if dose == 2 {
            self.p.dose2_failure
        } else {
            self.p.dose1_failure
        };
        self.record(t, kinds::DOSE, agent, f64::from(dose));
        let units = &self.econ.unit_costs;
        self.ledgers[agent.index()].charge(
            CostCategory::VaccineDose,
            1.0,
            units,
            t,
            &self.discount,
        );
        let ok = self
            .rng
            .stream(Substream::Vaccination)
            .bernoulli(1.0 - failure);
        if !ok {
            return;
        }
        let a = &mut self.agents[agent.index()];
        a.doses_ok += 1;
        let kind = if a.doses_ok >= 2 {
            charts::VACCINE_TWO_DOSE
        } else {
            charts::VACCINE_ONE_DOSE
        };
        self.record(t, kinds::DOSE_SUCCESS, agent, f64::from(dose));
        self.send(agent, agent, kind, Source::Internal, sched);
    }

    fn accrue(&mut self, agent: AgentId, state: StateId, from: SimTime, to: SimTime) {
        let tag = self.set.get(NATURAL_HISTORY).state(state).accrual;
        let u = self.econ.utility(tag);
        self.ledgers[agent.index()]
            .accrue(from, to, u, &self.discount)
            .expect("episodes end after they start");
    }

    fn give_birth(&mut self, mother: AgentId, t: SimTime, sched: &mut Scheduler<VzvEvent>) {
        let shares = self.p.attitude_shares;
        let r = self.rng.stream(Substream::Demographics);
        let attitude = attitude_draw(r, &shares);
        let child = self.pop.add_birth(mother, t, r, attitude);
        self.new_agent(child, t, Substream::Demographics);
        let set = Arc::clone(&self.set);
        statechart::instantiate(&set, self, sched, child, AGING, t);
        statechart::instantiate(&set, self, sched, child, NATURAL_HISTORY, t);
        statechart::instantiate(&set, self, sched, child, ADHERENCE, t);
        self.record(t, kinds::BIRTH, child, 0.0);
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

    pub fn ids(&self) -> &VzvIds {
        &self.ids
    }

    /// Active state of `slot` for a living agent.
    pub fn state(&self, agent: AgentId, slot: usize) -> Option<StateId> {
        let a = self.agents.get(agent.index())?;
        a.alive.then_some(a.charts[slot].state)
    }

    /// Living agents per natural-history state.
    pub fn occupancy(&self) -> Vec<usize> {
        let mut counts = vec![0; self.set.get(NATURAL_HISTORY).states().len()];
        for a in self.agents.iter().filter(|a| a.alive) {
            counts[a.charts[NATURAL_HISTORY].state as usize] += 1;
        }
        counts
    }

    /// State entries `(agent, slot, state, time)` when tracing is on.
    pub fn trace(&self) -> &[(AgentId, usize, StateId, SimTime)] {
        &self.trace
    }

    /// Deliver an exposure now, as if from a source of the given type.
    pub fn expose(
        &mut self,
        agent: AgentId,
        source: Source,
        sched: &mut Scheduler<VzvEvent>,
    ) -> usize {
        let msg = Message {
            sender: agent,
            recipient: agent,
            kind: charts::VZV_EXPOSURE,
            delivery_time: sched.now(),
            payload: source,
        };
        if !self.agents[agent.index()].alive {
            return 0;
        }
        let set = Arc::clone(&self.set);
        statechart::deliver(&set, self, sched, &msg)
    }

    /// Run to the horizon and collect outputs.
    pub fn run(mut self, mut sched: Scheduler<VzvEvent>) -> RealizationOutput {
        sched.run_until(self.s.horizon, &mut self);
        self.finish(sched.processed())
    }

    /// Close open accruals at the horizon and build outputs.
    pub fn finish(mut self, events: u64) -> RealizationOutput {
        let horizon = self.s.horizon;
        for i in 0..self.agents.len() {
            let a = &self.agents[i];
            if a.alive {
                let inst = a.charts[NATURAL_HISTORY];
                self.accrue(AgentId(i as u32), inst.state, inst.entry_time, horizon);
            }
        }
        let grid = YearGrid::new(self.s.burn_in, horizon);
        let mut shingles = AgeBinnedIncidence::new(grid, self.s.age_bins.clone());
        for p in self.pop.people() {
            let end = p.death_time.unwrap_or(horizon);
            shingles.add_exposure(p.birth_time, p.birth_time.max(0.0), end);
        }
        let mut chickenpox = shingles.clone();
        for r in self.log.records() {
            match r.kind {
                kinds::SHINGLES => shingles.add_event(r.t, r.age),
                kinds::CHICKENPOX => chickenpox.add_event(r.t, r.age),
                _ => {}
            }
        }
        let mut econ = HealthEconLedger::default();
        for l in &self.ledgers {
            econ.add(l);
        }
        let coverage = self.coverage();
        let snapshot = self.s.snapshot.then(|| {
            let nh = self.set.get(NATURAL_HISTORY);
            self.pop.snapshot_csv(horizon, "vzv_state,doses_ok", |id| {
                let a = &self.agents[id.index()];
                format!(
                    "{},{}",
                    nh.state(a.charts[NATURAL_HISTORY].state).name,
                    a.doses_ok
                )
            })
        });
        RealizationOutput {
            arm: self.s.arm,
            realization: self.s.realization,
            outcomes: vec![
                ("shingles".to_string(), shingles),
                ("chickenpox".to_string(), chickenpox),
            ],
            econ: Some(econ),
            coverage,
            contacts: None,
            trajectories: Vec::new(),
            events_processed: events,
            initial_population: self.pop.initial_count(),
            final_population: self.pop.alive_count(),
            births: self.pop.births(),
            deaths: self.pop.deaths(),
            snapshot,
        }
    }

    /// Share of agents who reached dose ages under the program and were
    /// administered each dose.
    fn coverage(&self) -> Vec<(String, f64)> {
        let Some(start) = self.s.program_start else {
            return Vec::new();
        };
        let mut eligible = [0usize; 2];
        let mut given = [0usize; 2];
        let ages = [self.p.dose1_age, self.p.dose2_age];
        for r in self.log.of_kind(kinds::DOSE) {
            let d = r.value as usize;
            if (1..=2).contains(&d) {
                given[d - 1] += 1;
            }
        }
        for p in self.pop.people() {
            for k in 0..2 {
                let at = p.birth_time + ages[k];
                let reached = at <= self.s.horizon && p.death_time.is_none_or(|d| d > at);
                if reached && at >= start && p.birth_time + self.p.dose1_age >= start {
                    eligible[k] += 1;
                }
            }
        }
        (0..2)
            .map(|k| {
                let share = if eligible[k] > 0 {
                    given[k] as f64 / eligible[k] as f64
                } else {
                    0.0
                };
                (format!("dose{}", k + 1), share)
            })
            .collect()
    }
}

impl VzvModel {
    fn adherence_guard(&mut self, agent: AgentId, tr: TransitionId) -> bool {
        let ids = &self.ids;
        if tr == ids.t_receive_first || tr == ids.t_receive_second {
            let k = self.agents[agent.index()].attitude;
            let p = if tr == ids.t_receive_first {
                self.p.dose1_administration[k]
            } else {
                self.p.dose2_administration[k]
            };
            self.rng.stream(Substream::Vaccination).bernoulli(p)
        } else if tr == ids.t_catch_up {
            self.p.catch_up_enabled
                && self.agents[agent.index()].missed_first
                && self
                    .rng
                    .stream(Substream::Vaccination)
                    .bernoulli(self.p.catch_up_probability)
        } else {
            true
        }
    }
}

fn attitude_draw(r: &mut RngStream, shares: &[f64; 3]) -> VaccineAttitude {
    let k = r.categorical(shares).expect("validated attitude shares");
    VaccineAttitude::Category(ATTITUDES[k])
}

impl ChartHost for VzvModel {
    type Event = VzvEvent;
    type Payload = Source;

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
        let a = &self.agents[agent.index()];
        if slot == AGING {
            let p = self.pop.person(agent);
            return if tr == ids.t_childbirth && p.sex == Sex::Female {
                self.pop.config().fertility.rate(p.age(t), p.parity)
            } else {
                0.0
            };
        }
        if slot != NATURAL_HISTORY {
            return 0.0;
        }
        if tr == ids.t_one_dose_wane {
            self.p.one_dose_waning
        } else if tr == ids.t_two_dose_wane {
            self.p.two_dose_waning
        } else if tr == ids.t_reactivate_mild {
            self.hazard_bound(a) * (1.0 - self.p.phn_probability)
        } else if tr == ids.t_reactivate_phn {
            self.hazard_bound(a) * self.p.phn_probability
        } else {
            // relapse
            self.p.relapse_rate
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
        let birth = self.pop.person(agent).birth_time;
        if slot == NATURAL_HISTORY && tr == ids.t_maternal_wane {
            Some((birth + self.p.maternal_protection - t).max(0.0))
        } else if slot == AGING && tr == ids.t_background_death {
            Some((self.agents[agent.index()].death_at - t).max(0.0))
        } else if slot == AGING && tr == ids.t_update {
            let step = self.p.update_interval;
            let age = t - birth;
            let mut next = ((age / step).floor() + 1.0) * step - age;
            if next < 1e-9 {
                next += step;
            }
            Some(next)
        } else if slot != ADHERENCE {
            None
        } else if tr == ids.t_become_due_first {
            let at = birth + self.p.dose1_age;
            (self.program_active_at(at) && at >= t).then_some(at - t)
        } else if tr == ids.t_due_second_after_received || tr == ids.t_due_second_after_missed {
            Some((birth + self.p.dose2_age - t).max(0.0))
        } else {
            None
        }
    }

    fn guard(
        &mut self,
        agent: AgentId,
        slot: usize,
        tr: TransitionId,
        t: SimTime,
        msg: Option<&VzvMessage>,
    ) -> bool {
        let ids = self.ids;
        if slot == ADHERENCE {
            return self.adherence_guard(agent, tr);
        }
        if slot != NATURAL_HISTORY {
            return true;
        }
        if tr == ids.t_infect_full || tr == ids.t_infect_weak {
            let source = msg.map(|m| m.payload).unwrap_or(Source::Internal);
            let p = if tr == ids.t_infect_weak {
                self.p.p_infection_breakthrough
            } else {
                match source {
                    Source::Chickenpox | Source::Exogenous => self.p.p_infection_normal,
                    Source::Breakthrough => self.p.p_infection_breakthrough,
                    Source::Shingles => self.p.p_infection_shingles,
                    Source::Internal => 0.0,
                }
            };
            self.rng.stream(Substream::Transmission).bernoulli(p)
        } else if tr == ids.t_reactivate_mild || tr == ids.t_reactivate_phn {
            let a = &self.agents[agent.index()];
            let bound = self.hazard_bound(a);
            if bound <= 0.0 {
                return false;
            }
            let accept = self.reactivation_hazard(agent, t) / bound;
            self.rng.stream(Substream::NaturalHistory).bernoulli(accept)
        } else {
            true
        }
    }

    fn on_exit(
        &mut self,
        agent: AgentId,
        slot: usize,
        state: StateId,
        entered: SimTime,
        t: SimTime,
    ) {
        if slot != NATURAL_HISTORY {
            return;
        }
        self.accrue(agent, state, entered, t);
        let ids = &self.ids;
        if state == ids.infectious_cp
            || state == ids.breakthrough
            || state == ids.shingles_mild
            || state == ids.shingles_phn
        {
            self.stop_contacts(agent);
        }
    }

    fn on_enter(
        &mut self,
        agent: AgentId,
        slot: usize,
        state: StateId,
        t: SimTime,
        sched: &mut Scheduler<VzvEvent>,
    ) {
        if self.s.trace {
            self.trace.push((agent, slot, state, t));
        }
        let ids = self.ids;
        match slot {
            NATURAL_HISTORY => {
                if state == ids.infected_full || state == ids.infected_weak {
                    self.record(
                        t,
                        kinds::CHICKENPOX,
                        agent,
                        f64::from(u8::from(state == ids.infected_weak)),
                    );
                    let e = self.econ.chickenpox;
                    self.ledgers[agent.index()].charge_episode(
                        &e,
                        &self.econ.unit_costs,
                        t,
                        &self.discount,
                    );
                } else if state == ids.infectious_cp || state == ids.breakthrough {
                    let source = if state == ids.infectious_cp {
                        Source::Chickenpox
                    } else {
                        Source::Breakthrough
                    };
                    self.start_contacts(agent, t, source, f64::INFINITY, sched);
                    if self
                        .rng
                        .stream(Substream::NaturalHistory)
                        .bernoulli(self.p.chickenpox_fatality)
                    {
                        self.send(
                            agent,
                            agent,
                            charts::DEATH_FROM_INFECTION,
                            Source::Internal,
                            sched,
                        );
                    }
                } else if state == ids.recovered_cp {
                    let draw = self
                        .cmi_dist
                        .sample(self.rng.stream(Substream::NaturalHistory));
                    let a = &mut self.agents[agent.index()];
                    a.cmi = draw.max(self.p.initial_cmi_floor);
                    a.cmi_time = t;
                    a.boost_until = t;
                } else if state == ids.shingles_mild || state == ids.shingles_phn {
                    let phn = state == ids.shingles_phn;
                    self.record(t, kinds::SHINGLES, agent, f64::from(u8::from(phn)));
                    let e = if phn {
                        self.econ.shingles_phn
                    } else {
                        self.econ.shingles_mild
                    };
                    self.ledgers[agent.index()].charge_episode(
                        &e,
                        &self.econ.unit_costs,
                        t,
                        &self.discount,
                    );
                    let until = t + self.p.shingles_infectious_period;
                    self.start_contacts(agent, t, Source::Shingles, until, sched);
                }
            }
            AGING if state == ids.dead => {
                self.record(t, kinds::DEATH, agent, 0.0);
                let inst = self.agents[agent.index()].charts[NATURAL_HISTORY];
                self.accrue(agent, inst.state, inst.entry_time, t);
                self.stop_contacts(agent);
                self.agents[agent.index()].alive = false;
                self.pop.kill(agent, t);
            }
            ADHERENCE if state == ids.missed_first => {
                self.agents[agent.index()].missed_first = true;
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
        _msg: Option<&VzvMessage>,
        sched: &mut Scheduler<VzvEvent>,
    ) {
        let ids = self.ids;
        match slot {
            NATURAL_HISTORY if tr == ids.t_boost => {
                let cmi = self.cmi_at(&self.agents[agent.index()], t);
                let a = &mut self.agents[agent.index()];
                a.cmi = cmi + self.p.boost_amount;
                a.cmi_time = t;
                a.boost_until = t + self.p.boosting_duration;
                self.record(t, kinds::BOOST, agent, 0.0);
            }
            AGING if tr == ids.t_childbirth => self.give_birth(agent, t, sched),
            ADHERENCE if tr == ids.t_receive_first => self.administer(agent, 1, t, sched),
            ADHERENCE if tr == ids.t_receive_second => self.administer(agent, 2, t, sched),
            ADHERENCE if tr == ids.t_catch_up => self.administer(agent, 3, t, sched),
            _ => {}
        }
    }
}

impl Model for VzvModel {
    type Event = VzvEvent;

    fn handle(&mut self, sched: &mut Scheduler<VzvEvent>, event: VzvEvent) {
        match event {
            VzvEvent::Timer(timer) => {
                let set = Arc::clone(&self.set);
                statechart::handle_timer(&set, self, sched, timer);
            }
            VzvEvent::Deliver(msg) => {
                if self.agents[msg.recipient.index()].alive {
                    let set = Arc::clone(&self.set);
                    statechart::deliver(&set, self, sched, &msg);
                }
            }
            VzvEvent::Contact {
                agent,
                stream,
                epoch,
            } => self.on_contact(agent, stream, epoch, sched),
            VzvEvent::Exogenous => {
                let r = self.rng.stream(Substream::Transmission);
                if let Some(to) = self.pop.random_alive(r) {
                    self.send(to, to, charts::VZV_EXPOSURE, Source::Exogenous, sched);
                }
                let dt = self
                    .rng
                    .stream(Substream::Transmission)
                    .exponential(self.p.exogenous_infection_rate)
                    .expect("positive rate");
                sched.schedule_in(dt, VzvEvent::Exogenous);
            }
        }
    }
}
