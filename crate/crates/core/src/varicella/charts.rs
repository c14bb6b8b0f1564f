//! Natural-history, aging and adherence charts of the chickenpox pack.
//!
//! Trigger choices per arrow: fixed-duration stages use timeouts, waning and
//! reactivation use hazards, infection and vaccination arrive as messages.

use crate::engine::MessageKind;
use crate::statechart::{
    ChartBuilder, ChartSet, Rate, StateId, Timeout, TransitionDef, TransitionId, Trigger,
};

use super::VaricellaParams;

pub const VZV_EXPOSURE: MessageKind = MessageKind("VZV_EXPOSURE");
pub const DEATH_FROM_INFECTION: MessageKind = MessageKind("DEATH_FROM_INFECTION");
pub const VACCINE_ONE_DOSE: MessageKind = MessageKind("VACCINE_ONE_DOSE");
pub const VACCINE_TWO_DOSE: MessageKind = MessageKind("VACCINE_TWO_DOSE");

pub const NATURAL_HISTORY: usize = 0;
pub const AGING: usize = 1;
pub const ADHERENCE: usize = 2;

/// State and transition ids of the three charts.
#[derive(Debug, Clone, Copy)]
pub struct VzvIds {
    pub maternal: StateId,
    pub susceptible: StateId,
    pub vacc_one: StateId,
    pub vacc_two: StateId,
    pub breakthrough: StateId,
    pub infected_weak: StateId,
    pub infected_full: StateId,
    pub infectious_cp: StateId,
    pub symptomatic: StateId,
    pub recovered_cp: StateId,
    pub shingles_mild: StateId,
    pub shingles_phn: StateId,
    pub recovered_shingles: StateId,

    pub t_maternal_wane: TransitionId,
    pub t_infect_full: TransitionId,
    pub t_infect_weak: TransitionId,
    pub t_one_dose_wane: TransitionId,
    pub t_two_dose_wane: TransitionId,
    pub t_boost: TransitionId,
    pub t_reactivate_mild: TransitionId,
    pub t_reactivate_phn: TransitionId,

    pub alive: StateId,
    pub dead: StateId,
    pub t_background_death: TransitionId,
    pub t_update: TransitionId,
    pub t_childbirth: TransitionId,

    pub too_young: StateId,
    pub due_first: StateId,
    pub received_first: StateId,
    pub missed_first: StateId,
    pub due_second: StateId,
    pub received_second: StateId,
    pub missed_second: StateId,
    pub catch_up: StateId,
    pub t_become_due_first: TransitionId,
    pub t_receive_first: TransitionId,
    pub t_due_second_after_received: TransitionId,
    pub t_due_second_after_missed: TransitionId,
    pub t_receive_second: TransitionId,
    pub t_catch_up: TransitionId,
}

pub fn build(p: &VaricellaParams) -> (ChartSet, VzvIds) {
    let mut nh = ChartBuilder::new("vzvNaturalHistory");
    let maternal = nh.state("maternalProtection");
    let susceptible = nh.state("susceptible");
    let vacc_one = nh.state("vaccinatedOneDose");
    let vacc_two = nh.state("vaccinatedTwoDose");
    let breakthrough = nh.state_with_accrual("breakthroughInfected", "chickenpox");
    let infected_weak = nh.state("infectedWeak");
    let infected_full = nh.state("infectedFull");
    let infectious_cp = nh.state_with_accrual("infectiousCP", "chickenpox");
    let symptomatic = nh.state_with_accrual("symptomaticNonInfectious", "chickenpox");
    let recovered_cp = nh.state("recoveredCP");
    let shingles_mild = nh.state_with_accrual("shinglesMild", "shingles_mild");
    let shingles_phn = nh.state_with_accrual("shinglesPHN", "shingles_phn");
    let recovered_shingles = nh.state("recoveredShingles");
    nh.initial(maternal);

    let t_maternal_wane = nh.transition(TransitionDef::new(
        "maternalWane",
        maternal,
        susceptible,
        Trigger::Timeout(Timeout::Host),
    ));
    let t_infect_full = nh.transition(
        TransitionDef::new(
            "infection",
            susceptible,
            infected_full,
            Trigger::Message(VZV_EXPOSURE),
        )
        .guarded(),
    );
    nh.transition(TransitionDef::new(
        "vaccineOneDose",
        susceptible,
        vacc_one,
        Trigger::Message(VACCINE_ONE_DOSE),
    ));
    nh.transition(TransitionDef::new(
        "vaccineTwoDoses",
        susceptible,
        vacc_two,
        Trigger::Message(VACCINE_TWO_DOSE),
    ));
    let t_one_dose_wane = nh.transition(TransitionDef::new(
        "oneDoseWaning",
        vacc_one,
        susceptible,
        Trigger::Rate(Rate::Host),
    ));
    nh.transition(TransitionDef::new(
        "secondDose",
        vacc_one,
        vacc_two,
        Trigger::Message(VACCINE_TWO_DOSE),
    ));
    let t_infect_weak = nh.transition(
        TransitionDef::new(
            "breakthroughInfection",
            vacc_one,
            infected_weak,
            Trigger::Message(VZV_EXPOSURE),
        )
        .guarded(),
    );
    let t_two_dose_wane = nh.transition(TransitionDef::new(
        "twoDoseWaning",
        vacc_two,
        susceptible,
        Trigger::Rate(Rate::Host),
    ));
    nh.transition(TransitionDef::new(
        "latentFull",
        infected_full,
        infectious_cp,
        Trigger::Timeout(Timeout::Fixed(p.latent_period)),
    ));
    nh.transition(TransitionDef::new(
        "latentWeak",
        infected_weak,
        breakthrough,
        Trigger::Timeout(Timeout::Fixed(p.latent_period)),
    ));
    nh.transition(TransitionDef::new(
        "endInfectious",
        infectious_cp,
        symptomatic,
        Trigger::Timeout(Timeout::Fixed(p.infectious_period)),
    ));
    nh.transition(TransitionDef::new(
        "endBreakthrough",
        breakthrough,
        symptomatic,
        Trigger::Timeout(Timeout::Fixed(p.infectious_period)),
    ));
    nh.transition(TransitionDef::new(
        "recover",
        symptomatic,
        recovered_cp,
        Trigger::Timeout(Timeout::Fixed(p.symptomatic_period)),
    ));
    let t_boost = nh.transition(TransitionDef::new(
        "exogenousBoost",
        recovered_cp,
        recovered_cp,
        Trigger::Message(VZV_EXPOSURE),
    ));
    let t_reactivate_mild = nh.transition(
        TransitionDef::new(
            "reactivateMild",
            recovered_cp,
            shingles_mild,
            Trigger::Rate(Rate::Host),
        )
        .guarded(),
    );
    let t_reactivate_phn = nh.transition(
        TransitionDef::new(
            "reactivatePHN",
            recovered_cp,
            shingles_phn,
            Trigger::Rate(Rate::Host),
        )
        .guarded(),
    );
    nh.transition(TransitionDef::new(
        "recoverMild",
        shingles_mild,
        recovered_shingles,
        Trigger::Timeout(Timeout::Fixed(p.shingles_mild_duration)),
    ));
    nh.transition(TransitionDef::new(
        "recoverPHN",
        shingles_phn,
        recovered_shingles,
        Trigger::Timeout(Timeout::Fixed(p.shingles_phn_duration)),
    ));
    nh.transition(TransitionDef::new(
        "relapse",
        recovered_shingles,
        shingles_mild,
        Trigger::Rate(Rate::Host),
    ));

    let mut ag = ChartBuilder::new("statechartAging");
    let alive = ag.state("alive");
    let dead = ag.state("dead");
    ag.initial(alive);
    let t_background_death = ag.transition(TransitionDef::new(
        "backgroundDeath",
        alive,
        dead,
        Trigger::Timeout(Timeout::Host),
    ));
    ag.transition(TransitionDef::new(
        "deathFromInfection",
        alive,
        dead,
        Trigger::Message(DEATH_FROM_INFECTION),
    ));
    let t_update = ag.transition(TransitionDef::new(
        "periodicUpdate",
        alive,
        alive,
        Trigger::Timeout(Timeout::Host),
    ));
    let t_childbirth = ag.transition(
        TransitionDef::new("childbirth", alive, alive, Trigger::Rate(Rate::Host)).internal(),
    );

    let mut ad = ChartBuilder::new("vaccinationAdherence");
    let too_young = ad.state("tooYoung");
    let due_first = ad.state("dueFirstDose");
    let received_first = ad.state("receivedFirst");
    let missed_first = ad.state("missedFirst");
    let due_second = ad.state("dueSecondDose");
    let received_second = ad.state("receivedSecond");
    let missed_second = ad.state("missedSecond");
    let catch_up = ad.state("catchUp");
    ad.initial(too_young);
    let t_become_due_first = ad.transition(TransitionDef::new(
        "becomeDueFirst",
        too_young,
        due_first,
        Trigger::Timeout(Timeout::Host),
    ));
    // received is armed before missed, so at equal times it is tried first
    let t_receive_first = ad.transition(
        TransitionDef::new(
            "receiveFirst",
            due_first,
            received_first,
            Trigger::Timeout(Timeout::Fixed(0.0)),
        )
        .guarded(),
    );
    ad.transition(TransitionDef::new(
        "missFirst",
        due_first,
        missed_first,
        Trigger::Timeout(Timeout::Fixed(0.0)),
    ));
    let t_due_second_after_received = ad.transition(TransitionDef::new(
        "becomeDueSecond",
        received_first,
        due_second,
        Trigger::Timeout(Timeout::Host),
    ));
    let t_due_second_after_missed = ad.transition(TransitionDef::new(
        "becomeDueSecondAfterMiss",
        missed_first,
        due_second,
        Trigger::Timeout(Timeout::Host),
    ));
    let t_receive_second = ad.transition(
        TransitionDef::new(
            "receiveSecond",
            due_second,
            received_second,
            Trigger::Timeout(Timeout::Fixed(0.0)),
        )
        .guarded(),
    );
    ad.transition(TransitionDef::new(
        "missSecond",
        due_second,
        missed_second,
        Trigger::Timeout(Timeout::Fixed(0.0)),
    ));
    let t_catch_up = ad.transition(
        TransitionDef::new(
            "catchUpDose",
            received_second,
            catch_up,
            Trigger::Timeout(Timeout::Fixed(0.0)),
        )
        .guarded(),
    );

    let set = ChartSet::new(vec![
        nh.build().expect("natural history chart is well formed"),
        ag.build().expect("aging chart is well formed"),
        ad.build().expect("adherence chart is well formed"),
    ]);
    let ids = VzvIds {
        maternal,
        susceptible,
        vacc_one,
        vacc_two,
        breakthrough,
        infected_weak,
        infected_full,
        infectious_cp,
        symptomatic,
        recovered_cp,
        shingles_mild,
        shingles_phn,
        recovered_shingles,
        t_maternal_wane,
        t_infect_full,
        t_infect_weak,
        t_one_dose_wane,
        t_two_dose_wane,
        t_boost,
        t_reactivate_mild,
        t_reactivate_phn,
        alive,
        dead,
        t_background_death,
        t_update,
        t_childbirth,
        too_young,
        due_first,
        received_first,
        missed_first,
        due_second,
        received_second,
        missed_second,
        catch_up,
        t_become_due_first,
        t_receive_first,
        t_due_second_after_received,
        t_due_second_after_missed,
        t_receive_second,
        t_catch_up,
    };
    (set, ids)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chart_counts() {
        let (set, _) = build(&VaricellaParams::default());
        assert_eq!(set.len(), 3);
        assert_eq!(set.get(NATURAL_HISTORY).states().len(), 13);
        assert_eq!(set.get(AGING).states().len(), 2);
        assert_eq!(set.get(ADHERENCE).states().len(), 8);
        assert_eq!(set.total_states(), 23);
    }

    #[test]
    fn two_doses_protect_against_infection() {
        let (set, ids) = build(&VaricellaParams::default());
        let nh = set.get(NATURAL_HISTORY);
        for &tr in nh.outgoing(ids.vacc_two) {
            assert_ne!(nh.transition(tr).trigger, Trigger::Message(VZV_EXPOSURE));
        }
    }

    #[test]
    fn catch_up_only_after_second_dose() {
        let (set, ids) = build(&VaricellaParams::default());
        let ad = set.get(ADHERENCE);
        let into: Vec<_> = ad
            .transitions()
            .iter()
            .filter(|t| t.to == ids.catch_up)
            .map(|t| t.from)
            .collect();
        assert_eq!(into, vec![ids.received_second]);
    }
}
