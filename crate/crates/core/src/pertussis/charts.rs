//! Infection, compliance, fertility, life-course and vital charts.

use crate::engine::MessageKind;
use crate::statechart::{
    ChartBuilder, ChartSet, Rate, StateId, Timeout, TransitionDef, TransitionId, Trigger,
};

use super::PertussisParams;

pub const PERTUSSIS_EXPOSURE: MessageKind = MessageKind("PERTUSSIS_EXPOSURE");

pub const INFECTION: usize = 0;
pub const COMPLIANCE: usize = 1;
pub const FERTILITY: usize = 2;
pub const LIFE: usize = 3;
pub const VITAL: usize = 4;

#[derive(Debug, Clone, Copy)]
pub struct PertussisIds {
    pub uninfected: StateId,
    pub latent: StateId,
    pub infectious: StateId,
    pub t_infect: TransitionId,
    pub t_recover: TransitionId,

    pub on_schedule: StateId,
    pub non_compliant: StateId,
    pub t_lapse: TransitionId,
    pub t_return: TransitionId,

    pub not_pregnant: StateId,
    pub trimester1: StateId,
    pub trimester2: StateId,
    pub trimester3: StateId,
    pub post_partum: StateId,
    pub t_conceive: TransitionId,
    pub t_birth: TransitionId,

    pub preschool: StateId,
    pub in_school: StateId,
    pub left_school: StateId,
    pub independent: StateId,
    pub t_enter_school: TransitionId,
    pub t_leave_school: TransitionId,
    pub t_leave_home: TransitionId,

    pub alive: StateId,
    pub dead: StateId,
    pub t_death: TransitionId,
}

pub fn build(p: &PertussisParams) -> (ChartSet, PertussisIds) {
    let mut inf = ChartBuilder::new("pertussisInfection");
    let uninfected = inf.state("uninfected");
    let latent = inf.state("latent");
    let infectious = inf.state("infectious");
    inf.initial(uninfected);
    let t_infect = inf.transition(
        TransitionDef::new(
            "infection",
            uninfected,
            latent,
            Trigger::Message(PERTUSSIS_EXPOSURE),
        )
        .guarded(),
    );
    inf.transition(TransitionDef::new(
        "becomeInfectious",
        latent,
        infectious,
        Trigger::Timeout(Timeout::Fixed(p.latent_period)),
    ));
    let t_recover = inf.transition(TransitionDef::new(
        "recover",
        infectious,
        uninfected,
        Trigger::Timeout(Timeout::Fixed(p.infectious_period)),
    ));

    let mut co = ChartBuilder::new("compliance");
    let on_schedule = co.state("onSchedule");
    let non_compliant = co.state("nonCompliant");
    co.initial(on_schedule);
    let t_lapse = co.transition(TransitionDef::new(
        "lapse",
        on_schedule,
        non_compliant,
        Trigger::Rate(Rate::Host),
    ));
    let t_return = co.transition(TransitionDef::new(
        "returnToSchedule",
        non_compliant,
        on_schedule,
        Trigger::Rate(Rate::Host),
    ));

    let mut fe = ChartBuilder::new("fertility");
    let not_pregnant = fe.state("notPregnant");
    let trimester1 = fe.state("trimester1");
    let trimester2 = fe.state("trimester2");
    let trimester3 = fe.state("trimester3");
    let post_partum = fe.state("postPartum");
    fe.initial(not_pregnant);
    let t_conceive = fe.transition(TransitionDef::new(
        "conception",
        not_pregnant,
        trimester1,
        Trigger::Rate(Rate::Host),
    ));
    let tri = Trigger::Timeout(Timeout::Fixed(p.gestation_trimester));
    fe.transition(TransitionDef::new(
        "secondTrimester",
        trimester1,
        trimester2,
        tri,
    ));
    fe.transition(TransitionDef::new(
        "thirdTrimester",
        trimester2,
        trimester3,
        tri,
    ));
    let t_birth = fe.transition(TransitionDef::new("birth", trimester3, post_partum, tri));
    fe.transition(TransitionDef::new(
        "endPostPartum",
        post_partum,
        not_pregnant,
        Trigger::Timeout(Timeout::Fixed(p.postpartum_period)),
    ));

    let mut li = ChartBuilder::new("lifeCourse");
    let preschool = li.state("preschool");
    let in_school = li.state("inSchool");
    let left_school = li.state("leftSchool");
    let independent = li.state("independent");
    li.initial(preschool);
    let t_enter_school = li.transition(TransitionDef::new(
        "enterSchool",
        preschool,
        in_school,
        Trigger::Timeout(Timeout::Host),
    ));
    let t_leave_school = li.transition(TransitionDef::new(
        "graduate",
        in_school,
        left_school,
        Trigger::Timeout(Timeout::Host),
    ));
    let t_leave_home = li.transition(TransitionDef::new(
        "leaveHome",
        left_school,
        independent,
        Trigger::Timeout(Timeout::Host),
    ));

    let mut vi = ChartBuilder::new("vital");
    let alive = vi.state("alive");
    let dead = vi.state("dead");
    vi.initial(alive);
    let t_death = vi.transition(TransitionDef::new(
        "backgroundDeath",
        alive,
        dead,
        Trigger::Timeout(Timeout::Host),
    ));

    let set = ChartSet::new(vec![
        inf.build().expect("infection chart is well formed"),
        co.build().expect("compliance chart is well formed"),
        fe.build().expect("fertility chart is well formed"),
        li.build().expect("life chart is well formed"),
        vi.build().expect("vital chart is well formed"),
    ]);
    let ids = PertussisIds {
        uninfected,
        latent,
        infectious,
        t_infect,
        t_recover,
        on_schedule,
        non_compliant,
        t_lapse,
        t_return,
        not_pregnant,
        trimester1,
        trimester2,
        trimester3,
        post_partum,
        t_conceive,
        t_birth,
        preschool,
        in_school,
        left_school,
        independent,
        t_enter_school,
        t_leave_school,
        t_leave_home,
        alive,
        dead,
        t_death,
    };
    (set, ids)
}
