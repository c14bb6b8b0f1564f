//! SIRS on one chart: infection arrives by guarded message, recovery is a
//! rate trigger and immunity ends after a fixed timeout. Monthly imports
//! restart the epidemic once immunity has waned.
//!
//!     cargo run --example statechart_basics

use std::sync::Arc;

use epichart::engine::{AgentId, Message, MessageKind, Model, RngStream, Scheduler, SimTime};
use epichart::statechart::{
    self, ChartBuilder, ChartHost, ChartInstance, ChartSet, ChartTimer, Rate, StateId, Timeout,
    TransitionDef, TransitionId, Trigger,
};

const EXPOSURE: MessageKind = MessageKind("EXPOSURE");

#[derive(Debug)]
enum Ev {
    Timer(ChartTimer),
    Deliver(Message),
    Contact(AgentId),
    Import,
}

impl From<ChartTimer> for Ev {
    fn from(t: ChartTimer) -> Self {
        Ev::Timer(t)
    }
}

struct Toy {
    set: Arc<ChartSet>,
    charts: Vec<[ChartInstance; 1]>,
    rng: RngStream,
    infectious: StateId,
    t_infect: TransitionId,
    infections: usize,
}

impl ChartHost for Toy {
    type Event = Ev;
    type Payload = ();

    fn instance(&mut self, agent: AgentId, slot: usize) -> Option<&mut ChartInstance> {
        self.charts.get_mut(agent.index()).map(|c| &mut c[slot])
    }

    fn timer_stream(&mut self, _agent: AgentId, _slot: usize) -> &mut RngStream {
        &mut self.rng
    }

    fn guard(
        &mut self,
        _a: AgentId,
        _s: usize,
        _tr: TransitionId,
        _t: SimTime,
        _m: Option<&Message>,
    ) -> bool {
        self.rng.bernoulli(0.6)
    }

    fn on_enter(
        &mut self,
        agent: AgentId,
        _slot: usize,
        state: StateId,
        t: SimTime,
        sched: &mut Scheduler<Ev>,
    ) {
        if state == self.infectious {
            let dt = self.rng.exponential(80.0).unwrap();
            sched.schedule(t + dt, Ev::Contact(agent)).unwrap();
        }
    }

    fn action(
        &mut self,
        _a: AgentId,
        _s: usize,
        tr: TransitionId,
        _t: SimTime,
        _m: Option<&Message>,
        _s2: &mut Scheduler<Ev>,
    ) {
        if tr == self.t_infect {
            self.infections += 1;
        }
    }
}

impl Model for Toy {
    type Event = Ev;

    fn handle(&mut self, sched: &mut Scheduler<Ev>, ev: Ev) {
        let set = self.set.clone();
        match ev {
            Ev::Timer(t) => {
                statechart::handle_timer(&set, self, sched, t);
            }
            Ev::Deliver(m) => {
                statechart::deliver(&set, self, sched, &m);
            }
            Ev::Import => {
                let now = sched.now();
                let target = AgentId(self.rng.index(self.charts.len()) as u32);
                let msg = Message {
                    sender: target,
                    recipient: target,
                    kind: EXPOSURE,
                    delivery_time: now,
                    payload: (),
                };
                statechart::deliver(&set, self, sched, &msg);
                sched.schedule(now + 1.0 / 12.0, Ev::Import).unwrap();
            }
            Ev::Contact(agent) => {
                if self.charts[agent.index()][0].state != self.infectious {
                    return;
                }
                let other = AgentId(self.rng.index(self.charts.len()) as u32);
                let now = sched.now();
                let msg = Message {
                    sender: agent,
                    recipient: other,
                    kind: EXPOSURE,
                    delivery_time: now,
                    payload: (),
                };
                sched.schedule(now, Ev::Deliver(msg)).unwrap();
                let dt = self.rng.exponential(80.0).unwrap();
                sched.schedule(now + dt, Ev::Contact(agent)).unwrap();
            }
        }
    }
}

fn main() {
    let mut b = ChartBuilder::new("sirs");
    let s = b.state("susceptible");
    let i = b.state("infectious");
    let r = b.state("recovered");
    b.initial(s);
    let t_infect =
        b.transition(TransitionDef::new("infect", s, i, Trigger::Message(EXPOSURE)).guarded());
    b.transition(TransitionDef::new(
        "recover",
        i,
        r,
        Trigger::Rate(Rate::Fixed(26.0)),
    ));
    b.transition(TransitionDef::new(
        "wane",
        r,
        s,
        Trigger::Timeout(Timeout::Fixed(2.0)),
    ));
    let set = Arc::new(ChartSet::new(vec![b.build().unwrap()]));
    println!("{}", set.get(0).to_dot());

    let n = 2_000;
    let mut toy = Toy {
        set: set.clone(),
        charts: vec![[ChartInstance::new(s, 0.0)]; n],
        rng: RngStream::new(42, 0, "toy"),
        infectious: i,
        t_infect,
        infections: 0,
    };
    let mut sched = Scheduler::new();
    for a in 0..n as u32 {
        statechart::instantiate(&set, &mut toy, &mut sched, AgentId(a), 0, 0.0);
    }
    for a in 0..10 {
        statechart::fire(
            &set,
            &mut toy,
            &mut sched,
            AgentId(a),
            0,
            t_infect,
            0.0,
            None,
        );
    }
    sched.schedule(0.0, Ev::Import).unwrap();

    println!("year  susceptible  infectious  recovered");
    for year in 1..=10 {
        sched.run_until(year as f64, &mut toy);
        let count = |st: StateId| toy.charts.iter().filter(|c| c[0].state == st).count();
        println!(
            "{year:>4}  {:>11}  {:>10}  {:>9}",
            count(s),
            count(i),
            count(r)
        );
    }
    println!(
        "infections: {}, events: {}",
        toy.infections,
        sched.processed()
    );
}
