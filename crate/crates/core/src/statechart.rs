//! Declarative statechart runtime.
//!
//! A [`ChartDefinition`] lists mutually exclusive states and the transitions
//! between them. Each agent carries one [`ChartInstance`] per chart in a
//! [`ChartSet`]; charts of one agent evolve independently unless a model's
//! actions couple them through messages.
//!
//! Rate and timeout triggers are armed on state entry by scheduling a
//! [`ChartTimer`] tagged with the instance's generation counter. Leaving a
//! state bumps the generation, so timers armed for the old state become stale
//! and are dropped when they fire. Competing rate triggers out of one state
//! are armed independently; the earliest wins.
//!
//! Guards and actions are supplied by the model through [`ChartHost`], which
//! keeps this module independent of any disease.

use std::fmt::Write as _;

use thiserror::Error;

use crate::engine::{AgentId, Message, MessageKind, RngStream, Scheduler, SimTime};

pub type StateId = u16;
pub type TransitionId = u16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Rate {
    /// Constant hazard per year.
    Fixed(f64),
    /// Hazard supplied by [`ChartHost::rate`] when the trigger is armed.
    /// A non-positive value leaves the trigger unarmed.
    Host,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Timeout {
    Fixed(f64),
    /// Delay supplied by [`ChartHost::timeout`]; `None` leaves it unarmed.
    Host,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Trigger {
    Rate(Rate),
    Timeout(Timeout),
    Message(MessageKind),
    /// Evaluated through the guard whenever the host calls [`notify`].
    Condition,
}

#[derive(Debug, Clone)]
pub struct StateDef {
    pub name: &'static str,
    /// Accounting tag used by models to accrue time spent in the state.
    pub accrual: Option<&'static str>,
}

#[derive(Debug, Clone)]
pub struct TransitionDef {
    pub name: &'static str,
    pub from: StateId,
    pub to: StateId,
    pub trigger: Trigger,
    pub guarded: bool,
    /// Internal transitions stay inside `from` without exit or entry and
    /// re-arm only themselves.
    pub internal: bool,
}

impl TransitionDef {
    pub fn new(name: &'static str, from: StateId, to: StateId, trigger: Trigger) -> Self {
        TransitionDef {
            name,
            from,
            to,
            trigger,
            guarded: false,
            internal: false,
        }
    }

    pub fn guarded(mut self) -> Self {
        self.guarded = true;
        self
    }

    pub fn internal(mut self) -> Self {
        self.internal = true;
        self
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChartError {
    #[error("chart `{0}` has no initial state")]
    NoInitial(String),
    #[error("chart `{chart}`: initial state set more than once")]
    DuplicateInitial { chart: String },
    #[error("chart `{chart}`: duplicate state `{state}`")]
    DuplicateState { chart: String, state: String },
    #[error("chart `{chart}`: transition `{transition}` references unknown state {state}")]
    UnknownState {
        chart: String,
        transition: String,
        state: StateId,
    },
    #[error("chart `{chart}`: transition `{transition}` has invalid trigger value {value}")]
    InvalidTrigger {
        chart: String,
        transition: String,
        value: f64,
    },
    #[error(
        "chart `{chart}`: internal transition `{transition}` must start and end in the same state"
    )]
    InternalNotSelf { chart: String, transition: String },
}

#[derive(Debug, Clone)]
pub struct ChartDefinition {
    name: &'static str,
    states: Vec<StateDef>,
    transitions: Vec<TransitionDef>,
    initial: StateId,
    outgoing: Vec<Vec<TransitionId>>,
}

impl ChartDefinition {
    pub fn name(&self) -> &'static str {
        self.name
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    pub fn states(&self) -> &[StateDef] {
        &self.states
    }

    pub fn state(&self, id: StateId) -> &StateDef {
        &self.states[id as usize]
    }

    pub fn state_id(&self, name: &str) -> Option<StateId> {
        self.states
            .iter()
            .position(|s| s.name == name)
            .map(|i| i as StateId)
    }

    pub fn transitions(&self) -> &[TransitionDef] {
        &self.transitions
    }

    pub fn transition(&self, id: TransitionId) -> &TransitionDef {
        &self.transitions[id as usize]
    }

    pub fn outgoing(&self, state: StateId) -> &[TransitionId] {
        &self.outgoing[state as usize]
    }

    /// Graphviz rendering of the chart topology.
    pub fn to_dot(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "digraph \"{}\" {{", self.name);
        let _ = writeln!(out, "  rankdir=LR;");
        let _ = writeln!(out, "  node [shape=box, style=rounded];");
        let _ = writeln!(out, "  __start [shape=point];");
        for s in &self.states {
            let _ = writeln!(out, "  \"{}\";", s.name);
        }
        let _ = writeln!(
            out,
            "  __start -> \"{}\";",
            self.states[self.initial as usize].name
        );
        for t in &self.transitions {
            let label = match t.trigger {
                Trigger::Rate(Rate::Fixed(r)) => format!("rate {r}"),
                Trigger::Rate(Rate::Host) => "rate".to_string(),
                Trigger::Timeout(Timeout::Fixed(d)) => format!("timeout {d}"),
                Trigger::Timeout(Timeout::Host) => "timeout".to_string(),
                Trigger::Message(k) => format!("msg {}", k.0),
                Trigger::Condition => "condition".to_string(),
            };
            let guard = if t.guarded { " [g]" } else { "" };
            let style = if t.internal { ", style=dashed" } else { "" };
            let _ = writeln!(
                out,
                "  \"{}\" -> \"{}\" [label=\"{}: {}{}\"{}];",
                self.states[t.from as usize].name,
                self.states[t.to as usize].name,
                t.name,
                label,
                guard,
                style
            );
        }
        out.push_str("}\n");
        out
    }
}

#[derive(Debug)]
pub struct ChartBuilder {
    name: &'static str,
    states: Vec<StateDef>,
    transitions: Vec<TransitionDef>,
    initial: Option<StateId>,
    initial_set_twice: bool,
}

impl ChartBuilder {
    pub fn new(name: &'static str) -> Self {
        ChartBuilder {
            name,
            states: Vec::new(),
            transitions: Vec::new(),
            initial: None,
            initial_set_twice: false,
        }
    }

    pub fn state(&mut self, name: &'static str) -> StateId {
        self.states.push(StateDef {
            name,
            accrual: None,
        });
        (self.states.len() - 1) as StateId
    }

    pub fn state_with_accrual(&mut self, name: &'static str, tag: &'static str) -> StateId {
        self.states.push(StateDef {
            name,
            accrual: Some(tag),
        });
        (self.states.len() - 1) as StateId
    }

    pub fn initial(&mut self, state: StateId) -> &mut Self {
        if self.initial.is_some() {
            self.initial_set_twice = true;
        }
        self.initial = Some(state);
        self
    }

    pub fn transition(&mut self, def: TransitionDef) -> TransitionId {
        self.transitions.push(def);
        (self.transitions.len() - 1) as TransitionId
    }

    pub fn build(self) -> Result<ChartDefinition, ChartError> {
        let chart = self.name.to_string();
        if self.initial_set_twice {
            return Err(ChartError::DuplicateInitial { chart });
        }
        let initial = self
            .initial
            .ok_or_else(|| ChartError::NoInitial(chart.clone()))?;
        for (i, s) in self.states.iter().enumerate() {
            if self.states[..i].iter().any(|o| o.name == s.name) {
                return Err(ChartError::DuplicateState {
                    chart,
                    state: s.name.to_string(),
                });
            }
        }
        let n = self.states.len() as StateId;
        if initial >= n {
            return Err(ChartError::NoInitial(chart));
        }
        let mut outgoing = vec![Vec::new(); self.states.len()];
        for (i, t) in self.transitions.iter().enumerate() {
            for s in [t.from, t.to] {
                if s >= n {
                    return Err(ChartError::UnknownState {
                        chart,
                        transition: t.name.to_string(),
                        state: s,
                    });
                }
            }
            if t.internal && t.from != t.to {
                return Err(ChartError::InternalNotSelf {
                    chart,
                    transition: t.name.to_string(),
                });
            }
            let bad = match t.trigger {
                Trigger::Rate(Rate::Fixed(r)) => !(r > 0.0 && r.is_finite()),
                Trigger::Timeout(Timeout::Fixed(d)) => !(d >= 0.0 && d.is_finite()),
                _ => false,
            };
            if bad {
                let value = match t.trigger {
                    Trigger::Rate(Rate::Fixed(v)) | Trigger::Timeout(Timeout::Fixed(v)) => v,
                    _ => f64::NAN,
                };
                return Err(ChartError::InvalidTrigger {
                    chart,
                    transition: t.name.to_string(),
                    value,
                });
            }
            outgoing[t.from as usize].push(i as TransitionId);
        }
        Ok(ChartDefinition {
            name: self.name,
            states: self.states,
            transitions: self.transitions,
            initial,
            outgoing,
        })
    }
}

/// The charts every agent of a model carries, indexed by slot.
#[derive(Debug, Clone)]
pub struct ChartSet {
    charts: Vec<ChartDefinition>,
}

impl ChartSet {
    pub fn new(charts: Vec<ChartDefinition>) -> Self {
        ChartSet { charts }
    }

    pub fn len(&self) -> usize {
        self.charts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.charts.is_empty()
    }

    pub fn get(&self, slot: usize) -> &ChartDefinition {
        &self.charts[slot]
    }

    pub fn iter(&self) -> impl Iterator<Item = &ChartDefinition> {
        self.charts.iter()
    }

    pub fn total_states(&self) -> usize {
        self.charts.iter().map(|c| c.states.len()).sum()
    }
}

/// Per-agent runtime state of one chart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChartInstance {
    pub state: StateId,
    pub generation: u32,
    pub entry_time: SimTime,
}

impl ChartInstance {
    pub fn new(state: StateId, t: SimTime) -> Self {
        ChartInstance {
            state,
            generation: 0,
            entry_time: t,
        }
    }
}

/// Scheduled firing of a rate or timeout trigger.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChartTimer {
    pub agent: AgentId,
    pub slot: u8,
    pub transition: TransitionId,
    pub generation: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimerOutcome {
    Fired,
    /// The owning instance has left the source state since arming.
    Stale,
    /// The guard rejected the firing.
    Blocked,
    /// The agent no longer exists.
    Gone,
}

/// Model callbacks used by the runtime.
pub trait ChartHost {
    type Event: From<ChartTimer>;
    type Payload: Copy;

    /// Chart instance of a living agent; `None` once the agent is gone.
    fn instance(&mut self, agent: AgentId, slot: usize) -> Option<&mut ChartInstance>;

    /// Stream used to draw rate-trigger waiting times.
    fn timer_stream(&mut self, agent: AgentId, slot: usize) -> &mut RngStream;

    fn rate(&mut self, _agent: AgentId, _slot: usize, _tr: TransitionId, _t: SimTime) -> f64 {
        0.0
    }

    fn timeout(
        &mut self,
        _agent: AgentId,
        _slot: usize,
        _tr: TransitionId,
        _t: SimTime,
    ) -> Option<f64> {
        None
    }

    fn guard(
        &mut self,
        _agent: AgentId,
        _slot: usize,
        _tr: TransitionId,
        _t: SimTime,
        _msg: Option<&Message<Self::Payload>>,
    ) -> bool {
        true
    }

    /// Called when a state is left; `entered` is when it was entered.
    fn on_exit(
        &mut self,
        _agent: AgentId,
        _slot: usize,
        _state: StateId,
        _entered: SimTime,
        _t: SimTime,
    ) {
    }

    fn on_enter(
        &mut self,
        _agent: AgentId,
        _slot: usize,
        _state: StateId,
        _t: SimTime,
        _sched: &mut Scheduler<Self::Event>,
    ) {
    }

    fn action(
        &mut self,
        _agent: AgentId,
        _slot: usize,
        _tr: TransitionId,
        _t: SimTime,
        _msg: Option<&Message<Self::Payload>>,
        _sched: &mut Scheduler<Self::Event>,
    ) {
    }
}

/// Put an agent's chart into its initial state and arm its triggers.
pub fn instantiate<H: ChartHost>(
    set: &ChartSet,
    host: &mut H,
    sched: &mut Scheduler<H::Event>,
    agent: AgentId,
    slot: usize,
    t: SimTime,
) {
    let initial = set.get(slot).initial;
    instantiate_in(set, host, sched, agent, slot, initial, t);
}

/// Put an agent's chart directly into `state` (used when initializing a
/// population whose members are already part-way through their lives).
pub fn instantiate_in<H: ChartHost>(
    set: &ChartSet,
    host: &mut H,
    sched: &mut Scheduler<H::Event>,
    agent: AgentId,
    slot: usize,
    state: StateId,
    t: SimTime,
) {
    if let Some(inst) = host.instance(agent, slot) {
        *inst = ChartInstance::new(state, t);
    } else {
        return;
    }
    host.on_enter(agent, slot, state, t, sched);
    arm_state(set, host, sched, agent, slot, t);
}

/// Invalidate pending timers of the active state and re-arm them, e.g. after
/// a change in a state-dependent hazard.
pub fn refresh<H: ChartHost>(
    set: &ChartSet,
    host: &mut H,
    sched: &mut Scheduler<H::Event>,
    agent: AgentId,
    slot: usize,
    t: SimTime,
) {
    match host.instance(agent, slot) {
        Some(inst) => inst.generation = inst.generation.wrapping_add(1),
        None => return,
    }
    arm_state(set, host, sched, agent, slot, t);
}

fn arm_state<H: ChartHost>(
    set: &ChartSet,
    host: &mut H,
    sched: &mut Scheduler<H::Event>,
    agent: AgentId,
    slot: usize,
    t: SimTime,
) {
    let Some(state) = host.instance(agent, slot).map(|i| i.state) else {
        return;
    };
    for &tr in set.get(slot).outgoing(state) {
        arm_one(set, host, sched, agent, slot, tr, t);
    }
}

fn arm_one<H: ChartHost>(
    set: &ChartSet,
    host: &mut H,
    sched: &mut Scheduler<H::Event>,
    agent: AgentId,
    slot: usize,
    tr: TransitionId,
    t: SimTime,
) {
    let def = set.get(slot).transition(tr);
    let delay = match def.trigger {
        Trigger::Rate(rate) => {
            let r = match rate {
                Rate::Fixed(r) => r,
                Rate::Host => host.rate(agent, slot, tr, t),
            };
            if !(r > 0.0) || !r.is_finite() {
                return;
            }
            host.timer_stream(agent, slot)
                .exponential(r)
                .expect("rate validated above")
        }
        Trigger::Timeout(Timeout::Fixed(d)) => d,
        Trigger::Timeout(Timeout::Host) => match host.timeout(agent, slot, tr, t) {
            Some(d) if d >= 0.0 && d.is_finite() => d,
            _ => return,
        },
        Trigger::Message(_) | Trigger::Condition => return,
    };
    let Some(generation) = host.instance(agent, slot).map(|i| i.generation) else {
        return;
    };
    let timer = ChartTimer {
        agent,
        slot: slot as u8,
        transition: tr,
        generation,
    };
    sched.schedule_in(delay, timer.into());
}

/// Process a fired timer.
pub fn handle_timer<H: ChartHost>(
    set: &ChartSet,
    host: &mut H,
    sched: &mut Scheduler<H::Event>,
    timer: ChartTimer,
) -> TimerOutcome {
    let slot = timer.slot as usize;
    let t = sched.now();
    let def = set.get(slot).transition(timer.transition);
    let Some(inst) = host.instance(timer.agent, slot) else {
        return TimerOutcome::Gone;
    };
    if inst.generation != timer.generation || inst.state != def.from {
        return TimerOutcome::Stale;
    }
    if def.guarded && !host.guard(timer.agent, slot, timer.transition, t, None) {
        if matches!(def.trigger, Trigger::Rate(_)) {
            arm_one(set, host, sched, timer.agent, slot, timer.transition, t);
        }
        return TimerOutcome::Blocked;
    }
    fire(
        set,
        host,
        sched,
        timer.agent,
        slot,
        timer.transition,
        t,
        None,
    );
    TimerOutcome::Fired
}

/// Deliver a message to every chart of its recipient. In each chart the
/// first matching transition out of the active state whose guard passes
/// fires. Returns the number of transitions fired.
pub fn deliver<H: ChartHost>(
    set: &ChartSet,
    host: &mut H,
    sched: &mut Scheduler<H::Event>,
    msg: &Message<H::Payload>,
) -> usize {
    let t = sched.now();
    let mut fired = 0;
    for slot in 0..set.len() {
        let Some(state) = host.instance(msg.recipient, slot).map(|i| i.state) else {
            return fired;
        };
        let chart = set.get(slot);
        for &tr in chart.outgoing(state) {
            let def = chart.transition(tr);
            if def.trigger != Trigger::Message(msg.kind) {
                continue;
            }
            if def.guarded && !host.guard(msg.recipient, slot, tr, t, Some(msg)) {
                continue;
            }
            fire(set, host, sched, msg.recipient, slot, tr, t, Some(msg));
            fired += 1;
            break;
        }
    }
    fired
}

/// Re-evaluate condition triggers of one chart. Returns whether one fired.
pub fn notify<H: ChartHost>(
    set: &ChartSet,
    host: &mut H,
    sched: &mut Scheduler<H::Event>,
    agent: AgentId,
    slot: usize,
    t: SimTime,
) -> bool {
    let Some(state) = host.instance(agent, slot).map(|i| i.state) else {
        return false;
    };
    let chart = set.get(slot);
    for &tr in chart.outgoing(state) {
        if chart.transition(tr).trigger != Trigger::Condition {
            continue;
        }
        if host.guard(agent, slot, tr, t, None) {
            fire(set, host, sched, agent, slot, tr, t, None);
            return true;
        }
    }
    false
}

/// Take a transition unconditionally.
#[allow(clippy::too_many_arguments)]
pub fn fire<H: ChartHost>(
    set: &ChartSet,
    host: &mut H,
    sched: &mut Scheduler<H::Event>,
    agent: AgentId,
    slot: usize,
    tr: TransitionId,
    t: SimTime,
    msg: Option<&Message<H::Payload>>,
) {
    let def = set.get(slot).transition(tr);
    let (from, to, internal) = (def.from, def.to, def.internal);
    let Some(inst) = host.instance(agent, slot) else {
        return;
    };
    debug_assert_eq!(inst.state, from, "firing {} from wrong state", def.name);
    if internal {
        host.action(agent, slot, tr, t, msg, sched);
        arm_one(set, host, sched, agent, slot, tr, t);
        return;
    }
    if from == to {
        // external self-transition: re-arm everything, keep the accrual epoch
        inst.generation = inst.generation.wrapping_add(1);
        host.action(agent, slot, tr, t, msg, sched);
        arm_state(set, host, sched, agent, slot, t);
        return;
    }
    let entered = inst.entry_time;
    host.on_exit(agent, slot, from, entered, t);
    if let Some(inst) = host.instance(agent, slot) {
        inst.state = to;
        inst.generation = inst.generation.wrapping_add(1);
        inst.entry_time = t;
    }
    host.action(agent, slot, tr, t, msg, sched);
    host.on_enter(agent, slot, to, t, sched);
    arm_state(set, host, sched, agent, slot, t);
}
