//! Synthetic open population: people, households, schools and space.

mod demography;
mod spatial;

use std::collections::VecDeque;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use demography::{AgePyramid, FertilitySchedule, LifeTable};
pub use spatial::{Point, SpatialIndex};

use crate::engine::{AgentId, RngStream, SimTime};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PopulationError {
    #[error("invalid distribution: {0}")]
    Distribution(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sex {
    Female,
    Male,
}

impl Sex {
    pub fn label(self) -> &'static str {
        match self {
            Sex::Female => "F",
            Sex::Male => "M",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AttitudeCategory {
    Acceptor,
    Hesitant,
    Rejecter,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VaccineAttitude {
    Category(AttitudeCategory),
    /// 1 = full acceptance, 0 = full refusal.
    Acceptance(f64),
}

impl VaccineAttitude {
    pub fn label(self) -> String {
        match self {
            VaccineAttitude::Category(c) => format!("{c:?}"),
            VaccineAttitude::Acceptance(u) => format!("{u:.4}"),
        }
    }

    pub fn acceptance(self) -> Option<f64> {
        match self {
            VaccineAttitude::Acceptance(u) => Some(u),
            VaccineAttitude::Category(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HouseholdId(pub u32);

#[derive(Debug, Clone)]
pub struct Person {
    pub id: AgentId,
    pub sex: Sex,
    pub birth_time: SimTime,
    pub death_time: Option<SimTime>,
    pub position: Point,
    pub household: HouseholdId,
    pub school: Option<u32>,
    pub mother: Option<AgentId>,
    pub attitude: VaccineAttitude,
    /// Children born so far.
    pub parity: u32,
    /// Age at which the person moves out of the parental household.
    pub departure_age: f64,
    pub left_home: bool,
}

impl Person {
    pub fn alive(&self) -> bool {
        self.death_time.is_none()
    }

    pub fn age(&self, t: SimTime) -> f64 {
        t - self.birth_time
    }
}

#[derive(Debug, Clone, Default)]
pub struct Household {
    pub members: Vec<AgentId>,
    /// Adults who formed the household; dead parents are kept.
    pub parents: Vec<AgentId>,
    pub position: Option<Point>,
}

#[derive(Debug, Clone, Default)]
pub struct School {
    pub enrolled: Vec<AgentId>,
}

/// Demographic configuration shared by both model packs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DemographyConfig {
    pub age_pyramid: AgePyramid,
    pub mortality: LifeTable,
    pub fertility: FertilitySchedule,
    pub female_share: f64,
    /// Share of initial households headed by a couple.
    pub couple_share: f64,
    /// Weights over 0, 1, 2, ... children for couple households.
    pub couple_children_weights: Vec<f64>,
    /// Weights over 0, 1, 2, ... children for single-adult households.
    pub single_children_weights: Vec<f64>,
    /// Agents per unit area in the urban part of the region.
    pub density_urban: f64,
    pub density_rural: f64,
    /// Share of the initial population placed in the urban part.
    pub urban_share: f64,
    pub school_entry_age: f64,
    pub school_exit_age: f64,
    pub leave_home_min_age: f64,
    pub leave_home_max_age: f64,
    /// Children per school, used to size the school count at initialization.
    pub children_per_school: f64,
    /// Probability that someone leaving home looks for a partner.
    pub partnering_probability: f64,
}

impl Default for DemographyConfig {
    fn default() -> Self {
        DemographyConfig {
            age_pyramid: AgePyramid::default(),
            mortality: LifeTable::default(),
            fertility: FertilitySchedule::default(),
            female_share: 0.5,
            couple_share: 0.65,
            couple_children_weights: vec![0.40, 0.20, 0.26, 0.10, 0.04],
            single_children_weights: vec![0.70, 0.17, 0.09, 0.03, 0.01],
            density_urban: 0.3,
            density_rural: 0.2,
            urban_share: 0.8,
            school_entry_age: 6.0,
            school_exit_age: 18.0,
            leave_home_min_age: 18.0,
            leave_home_max_age: 28.0,
            children_per_school: 400.0,
            partnering_probability: 0.8,
        }
    }
}

fn check_probability(name: &str, p: f64) -> Result<(), PopulationError> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(PopulationError::Distribution(format!(
            "{name} = {p} is not a probability"
        )))
    }
}

fn check_weights(name: &str, w: &[f64]) -> Result<(), PopulationError> {
    if w.is_empty() || w.iter().any(|x| !(*x >= 0.0)) || w.iter().sum::<f64>() <= 0.0 {
        return Err(PopulationError::Distribution(format!(
            "{name} must be non-negative weights with a positive sum"
        )));
    }
    Ok(())
}

impl DemographyConfig {
    pub fn validate(&self) -> Result<(), PopulationError> {
        self.age_pyramid.validate()?;
        self.mortality.validate()?;
        self.fertility.validate()?;
        check_probability("female_share", self.female_share)?;
        check_probability("couple_share", self.couple_share)?;
        check_probability("urban_share", self.urban_share)?;
        check_probability("partnering_probability", self.partnering_probability)?;
        check_weights("couple_children_weights", &self.couple_children_weights)?;
        check_weights("single_children_weights", &self.single_children_weights)?;
        if !(self.density_urban > 0.0 && self.density_rural > 0.0) {
            return Err(PopulationError::Distribution(
                "densities must be positive".into(),
            ));
        }
        if !(self.school_exit_age > self.school_entry_age && self.school_entry_age >= 0.0) {
            return Err(PopulationError::Distribution(
                "school window is empty".into(),
            ));
        }
        if !(self.leave_home_max_age >= self.leave_home_min_age && self.leave_home_min_age >= 0.0) {
            return Err(PopulationError::Distribution(
                "leave-home window is empty".into(),
            ));
        }
        if !(self.children_per_school > 0.0) {
            return Err(PopulationError::Distribution(
                "children_per_school must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Square region split into an urban strip `x < urban_width` and a rural
/// remainder, each sized so that the initial population reaches its density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Region {
    pub side: f64,
    pub urban_width: f64,
    pub urban_share: f64,
}

impl Region {
    pub fn for_population(n: usize, cfg: &DemographyConfig) -> Self {
        let n = n.max(1) as f64;
        let urban_area = n * cfg.urban_share / cfg.density_urban;
        let rural_area = n * (1.0 - cfg.urban_share) / cfg.density_rural;
        let side = (urban_area + rural_area).sqrt();
        Region {
            side,
            urban_width: urban_area / side,
            urban_share: cfg.urban_share,
        }
    }

    pub fn sample(&self, rng: &mut RngStream) -> Point {
        let urban = rng.bernoulli(self.urban_share);
        let x = if urban {
            rng.uniform_range(0.0, self.urban_width)
        } else {
            rng.uniform_range(self.urban_width, self.side)
        };
        let y = rng.uniform_range(0.0, self.side);
        Point::new(x, y)
    }
}

/// The living and dead population of one realization.
#[derive(Debug, Clone)]
pub struct Population {
    people: Vec<Person>,
    households: Vec<Household>,
    schools: Vec<School>,
    index: SpatialIndex,
    region: Region,
    alive: Vec<AgentId>,
    alive_slot: Vec<u32>,
    initial_count: usize,
    births: usize,
    deaths: usize,
    waiting_partners: [VecDeque<AgentId>; 2],
    cfg: DemographyConfig,
}

const NOT_ALIVE: u32 = u32::MAX;

impl Population {
    /// Build the initial population: households drawn from the household-type
    /// distribution, ages from the pyramid, positions uniform in the region.
    ///
    /// `max_radius` sizes the spatial grid; `attitude` assigns each new person
    /// a vaccine attitude.
    pub fn initialize(
        n: usize,
        cfg: &DemographyConfig,
        max_radius: f64,
        rng: &mut RngStream,
        mut attitude: impl FnMut(&mut RngStream) -> VaccineAttitude,
    ) -> Result<Self, PopulationError> {
        cfg.validate()?;
        let region = Region::for_population(n, cfg);
        let mut pop = Population {
            people: Vec::with_capacity(n * 2),
            households: Vec::new(),
            schools: Vec::new(),
            index: SpatialIndex::new(region.side, max_radius.max(1e-6)),
            region,
            alive: Vec::with_capacity(n * 2),
            alive_slot: Vec::with_capacity(n * 2),
            initial_count: 0,
            births: 0,
            deaths: 0,
            waiting_partners: [VecDeque::new(), VecDeque::new()],
            cfg: cfg.clone(),
        };
        let pyramid = &cfg.age_pyramid;
        while pop.people.len() < n {
            let couple = rng.bernoulli(cfg.couple_share);
            let weights = if couple {
                &cfg.couple_children_weights
            } else {
                &cfg.single_children_weights
            };
            let kids = rng
                .categorical(weights)
                .map_err(|e| PopulationError::Distribution(e.to_string()))?;
            let head_age = if kids > 0 {
                pyramid.sample_in(20.0, 55.0, rng)
            } else {
                pyramid.sample_in(cfg.leave_home_min_age, f64::INFINITY, rng)
            };
            let head_sex = if couple || (kids > 0 && rng.bernoulli(0.8)) || rng.bernoulli(0.5) {
                Sex::Female
            } else {
                Sex::Male
            };
            let position = region.sample(rng);
            let hh = HouseholdId(pop.households.len() as u32);
            pop.households.push(Household {
                members: Vec::new(),
                parents: Vec::new(),
                position: Some(position),
            });
            let head = pop.push_person(head_sex, -head_age, hh, None, attitude(rng), rng);
            pop.people[head.index()].left_home = true;
            pop.households[hh.0 as usize].parents.push(head);
            if couple && pop.people.len() < n {
                let partner_age =
                    (head_age + rng.uniform_range(-3.0, 5.0)).max(cfg.leave_home_min_age);
                let other = if head_sex == Sex::Female {
                    Sex::Male
                } else {
                    Sex::Female
                };
                let p = pop.push_person(other, -partner_age, hh, None, attitude(rng), rng);
                pop.people[p.index()].left_home = true;
                pop.households[hh.0 as usize].parents.push(p);
            }
            let mother = pop.households[hh.0 as usize]
                .parents
                .iter()
                .copied()
                .find(|p| pop.people[p.index()].sex == Sex::Female);
            let mother_age = mother
                .map(|m| -pop.people[m.index()].birth_time)
                .unwrap_or(head_age);
            let max_child_age = (mother_age - 16.0).clamp(0.01, cfg.leave_home_min_age);
            for _ in 0..kids {
                if pop.people.len() >= n {
                    break;
                }
                let age = pyramid.sample_in(0.0, max_child_age, rng);
                let sex = if rng.bernoulli(cfg.female_share) {
                    Sex::Female
                } else {
                    Sex::Male
                };
                pop.push_person(sex, -age, hh, mother, attitude(rng), rng);
                if let Some(m) = mother {
                    pop.people[m.index()].parity += 1;
                }
            }
        }
        pop.initial_count = pop.people.len();
        let children = pop
            .people
            .iter()
            .filter(|p| {
                let a = p.age(0.0);
                a >= cfg.school_entry_age && a < cfg.school_exit_age
            })
            .count();
        let n_schools = ((children as f64 / cfg.children_per_school).ceil() as usize).max(1);
        pop.schools = vec![School::default(); n_schools];
        for i in 0..pop.people.len() {
            let a = pop.people[i].age(0.0);
            if a >= cfg.school_entry_age && a < cfg.school_exit_age {
                pop.enroll(AgentId(i as u32), rng);
            }
        }
        Ok(pop)
    }

    fn push_person(
        &mut self,
        sex: Sex,
        birth_time: SimTime,
        household: HouseholdId,
        mother: Option<AgentId>,
        attitude: VaccineAttitude,
        rng: &mut RngStream,
    ) -> AgentId {
        let id = AgentId(self.people.len() as u32);
        let position = self.households[household.0 as usize]
            .position
            .expect("household has a position");
        let departure_age =
            rng.uniform_range(self.cfg.leave_home_min_age, self.cfg.leave_home_max_age);
        self.people.push(Person {
            id,
            sex,
            birth_time,
            death_time: None,
            position,
            household,
            school: None,
            mother,
            attitude,
            parity: 0,
            departure_age,
            left_home: false,
        });
        self.households[household.0 as usize].members.push(id);
        self.index.insert(id, position);
        self.alive_slot.push(self.alive.len() as u32);
        self.alive.push(id);
        id
    }

    pub fn config(&self) -> &DemographyConfig {
        &self.cfg
    }

    pub fn region(&self) -> Region {
        self.region
    }

    pub fn person(&self, id: AgentId) -> &Person {
        &self.people[id.index()]
    }

    pub fn person_mut(&mut self, id: AgentId) -> &mut Person {
        &mut self.people[id.index()]
    }

    pub fn people(&self) -> &[Person] {
        &self.people
    }

    /// Number of agents ever created.
    pub fn len(&self) -> usize {
        self.people.len()
    }

    pub fn is_empty(&self) -> bool {
        self.people.is_empty()
    }

    pub fn is_alive(&self, id: AgentId) -> bool {
        self.people.get(id.index()).is_some_and(|p| p.alive())
    }

    pub fn age(&self, id: AgentId, t: SimTime) -> f64 {
        self.people[id.index()].age(t)
    }

    pub fn alive_ids(&self) -> &[AgentId] {
        &self.alive
    }

    pub fn alive_count(&self) -> usize {
        self.alive.len()
    }

    pub fn initial_count(&self) -> usize {
        self.initial_count
    }

    pub fn births(&self) -> usize {
        self.births
    }

    pub fn deaths(&self) -> usize {
        self.deaths
    }

    /// alive = initial + births - deaths
    pub fn accounting_holds(&self) -> bool {
        self.alive.len() + self.deaths == self.initial_count + self.births
    }

    pub fn households(&self) -> &[Household] {
        &self.households
    }

    pub fn household(&self, id: HouseholdId) -> &Household {
        &self.households[id.0 as usize]
    }

    pub fn schools(&self) -> &[School] {
        &self.schools
    }

    pub fn random_alive(&self, rng: &mut RngStream) -> Option<AgentId> {
        if self.alive.is_empty() {
            None
        } else {
            Some(self.alive[rng.index(self.alive.len())])
        }
    }

    /// Create a newborn in the mother's household at her position.
    pub fn add_birth(
        &mut self,
        mother: AgentId,
        t: SimTime,
        rng: &mut RngStream,
        attitude: VaccineAttitude,
    ) -> AgentId {
        let sex = if rng.bernoulli(self.cfg.female_share) {
            Sex::Female
        } else {
            Sex::Male
        };
        let hh = self.people[mother.index()].household;
        let id = self.push_person(sex, t, hh, Some(mother), attitude, rng);
        self.people[mother.index()].parity += 1;
        self.births += 1;
        id
    }

    /// Remove a person from every structure of the living population.
    pub fn kill(&mut self, id: AgentId, t: SimTime) {
        let p = &mut self.people[id.index()];
        if p.death_time.is_some() {
            return;
        }
        p.death_time = Some(t);
        let (pos, hh, school) = (p.position, p.household, p.school.take());
        self.index.remove(id, pos);
        let members = &mut self.households[hh.0 as usize].members;
        if let Some(i) = members.iter().position(|m| *m == id) {
            members.swap_remove(i);
        }
        if let Some(s) = school {
            let e = &mut self.schools[s as usize].enrolled;
            if let Some(i) = e.iter().position(|m| *m == id) {
                e.swap_remove(i);
            }
        }
        let slot = self.alive_slot[id.index()] as usize;
        let last = *self.alive.last().expect("alive list non-empty");
        self.alive.swap_remove(slot);
        if last != id {
            self.alive_slot[last.index()] = slot as u32;
        }
        self.alive_slot[id.index()] = NOT_ALIVE;
        self.deaths += 1;
    }

    /// Enroll in a school chosen uniformly at random.
    pub fn enroll(&mut self, id: AgentId, rng: &mut RngStream) {
        if self.people[id.index()].school.is_some() || !self.is_alive(id) {
            return;
        }
        let s = rng.index(self.schools.len());
        self.schools[s].enrolled.push(id);
        self.people[id.index()].school = Some(s as u32);
    }

    pub fn leave_school(&mut self, id: AgentId) {
        if let Some(s) = self.people[id.index()].school.take() {
            let e = &mut self.schools[s as usize].enrolled;
            if let Some(i) = e.iter().position(|m| *m == id) {
                e.swap_remove(i);
            }
        }
    }

    fn move_to(&mut self, id: AgentId, hh: HouseholdId) {
        let old = self.people[id.index()].household;
        let members = &mut self.households[old.0 as usize].members;
        if let Some(i) = members.iter().position(|m| *m == id) {
            members.swap_remove(i);
        }
        self.households[hh.0 as usize].members.push(id);
        let new_pos = self.households[hh.0 as usize]
            .position
            .expect("household has a position");
        let old_pos = self.people[id.index()].position;
        self.index.remove(id, old_pos);
        self.index.insert(id, new_pos);
        let p = &mut self.people[id.index()];
        p.household = hh;
        p.position = new_pos;
    }

    /// Move out of the parental household. A partner-seeker first tries to
    /// join the longest-waiting single of the opposite sex; otherwise a new
    /// household is founded at a random position.
    pub fn leave_home(&mut self, id: AgentId, rng: &mut RngStream) -> HouseholdId {
        if !self.is_alive(id) || self.people[id.index()].left_home {
            return self.people[id.index()].household;
        }
        self.people[id.index()].left_home = true;
        let seeking = rng.bernoulli(self.cfg.partnering_probability);
        let sex = self.people[id.index()].sex;
        let other = match sex {
            Sex::Female => 1,
            Sex::Male => 0,
        };
        if seeking {
            while let Some(cand) = self.waiting_partners[other].pop_front() {
                let c = &self.people[cand.index()];
                let hh = c.household;
                if c.alive() && self.households[hh.0 as usize].parents.len() == 1 {
                    self.move_to(id, hh);
                    self.households[hh.0 as usize].parents.push(id);
                    return hh;
                }
            }
        }
        let hh = HouseholdId(self.households.len() as u32);
        let position = self.region.sample(rng);
        self.households.push(Household {
            members: Vec::new(),
            parents: vec![id],
            position: Some(position),
        });
        self.move_to(id, hh);
        if seeking {
            let own = match sex {
                Sex::Female => 0,
                Sex::Male => 1,
            };
            self.waiting_partners[own].push_back(id);
        }
        hh
    }

    /// Living members of `id`'s household other than `id`.
    pub fn household_contacts(&self, id: AgentId) -> impl Iterator<Item = AgentId> + '_ {
        let hh = self.people[id.index()].household;
        self.households[hh.0 as usize]
            .members
            .iter()
            .copied()
            .filter(move |m| *m != id)
    }

    /// Co-enrolled schoolmates of `id`.
    pub fn school_contacts(&self, id: AgentId) -> impl Iterator<Item = AgentId> + '_ {
        let school = self.people[id.index()].school;
        school
            .into_iter()
            .flat_map(move |s| self.schools[s as usize].enrolled.iter().copied())
            .filter(move |m| *m != id)
    }

    /// Exact Euclidean ball query around `id`, excluding `id`.
    pub fn neighbors_within(&self, id: AgentId, radius: f64) -> Vec<AgentId> {
        self.index
            .neighbors_within(self.people[id.index()].position, radius, id)
    }

    /// Uniform choice among neighbors within `radius` satisfying `accept`,
    /// using a reservoir so no list is materialized.
    pub fn choose_within(
        &self,
        id: AgentId,
        radius: f64,
        rng: &mut RngStream,
        mut accept: impl FnMut(&Person) -> bool,
    ) -> Option<AgentId> {
        let mut chosen = None;
        let mut seen = 0usize;
        self.index
            .for_each_within(self.people[id.index()].position, radius, |other, _| {
                if other == id || !accept(&self.people[other.index()]) {
                    return;
                }
                seen += 1;
                if seen == 1 || rng.index(seen) == 0 {
                    chosen = Some(other);
                }
            });
        chosen
    }

    /// Effective household vaccine acceptance: minimum over the living
    /// parents' acceptance, or over all parents if none is alive.
    pub fn household_acceptance(&self, hh: HouseholdId) -> Option<f64> {
        let parents = &self.households[hh.0 as usize].parents;
        let min_of = |alive_only: bool| {
            parents
                .iter()
                .filter(|p| !alive_only || self.is_alive(**p))
                .filter_map(|p| self.people[p.index()].attitude.acceptance())
                .reduce(f64::min)
        };
        min_of(true).or_else(|| min_of(false))
    }

    /// One CSV row per living agent. `extra` appends pack-specific columns.
    pub fn snapshot_csv(
        &self,
        t: SimTime,
        extra_header: &str,
        mut extra: impl FnMut(AgentId) -> String,
    ) -> String {
        let mut out = String::from("id,age,sex,household,school,attitude");
        if !extra_header.is_empty() {
            out.push(',');
            out.push_str(extra_header);
        }
        out.push('\n');
        let mut ids: Vec<AgentId> = self.alive.clone();
        ids.sort();
        for id in ids {
            let p = &self.people[id.index()];
            let _ = write!(
                out,
                "{},{:.4},{},{},{},{}",
                id,
                p.age(t),
                p.sex.label(),
                p.household.0,
                p.school.map(|s| s.to_string()).unwrap_or_default(),
                p.attitude.label()
            );
            let e = extra(id);
            if !e.is_empty() {
                out.push(',');
                out.push_str(&e);
            }
            out.push('\n');
        }
        out
    }

    /// Checks that household membership partitions the living population.
    pub fn households_partition_alive(&self) -> bool {
        let mut seen = vec![false; self.people.len()];
        for hh in &self.households {
            for m in &hh.members {
                if seen[m.index()] || !self.is_alive(*m) {
                    return false;
                }
                seen[m.index()] = true;
            }
        }
        self.alive.iter().all(|id| seen[id.index()])
            && self.alive.iter().all(|id| {
                let hh = self.people[id.index()].household;
                self.households[hh.0 as usize].members.contains(id)
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn acceptor(_: &mut RngStream) -> VaccineAttitude {
        VaccineAttitude::Category(AttitudeCategory::Acceptor)
    }

    #[test]
    fn single_adult_population() {
        let cfg = DemographyConfig {
            couple_share: 0.0,
            single_children_weights: vec![1.0],
            ..Default::default()
        };
        let mut rng = RngStream::new(1, 0, "init");
        let pop = Population::initialize(1, &cfg, 5.0, &mut rng, acceptor).unwrap();
        assert_eq!(pop.alive_count(), 1);
        assert_eq!(pop.households().len(), 1);
        assert!(pop.age(AgentId(0), 0.0) >= 18.0);
    }

    #[test]
    fn bad_distribution_is_rejected() {
        let cfg = DemographyConfig {
            couple_children_weights: vec![0.0, 0.0],
            ..Default::default()
        };
        let mut rng = RngStream::new(1, 0, "init");
        assert!(Population::initialize(10, &cfg, 5.0, &mut rng, acceptor).is_err());
    }

    #[test]
    fn initialization_invariants() {
        let cfg = DemographyConfig::default();
        let mut rng = RngStream::new(2, 0, "init");
        let pop = Population::initialize(3000, &cfg, 10.0, &mut rng, acceptor).unwrap();
        assert_eq!(pop.alive_count(), 3000);
        assert!(pop.households_partition_alive());
        assert!(pop.accounting_holds());
        for p in pop.people() {
            let a = p.age(0.0);
            assert!(a >= 0.0);
            assert_eq!(
                p.school.is_some(),
                a >= cfg.school_entry_age && a < cfg.school_exit_age,
                "age {a}"
            );
            if let Some(m) = p.mother {
                assert_eq!(pop.person(m).household, p.household);
                assert!(pop.age(m, 0.0) - a >= 16.0 - 1e-9);
            }
        }
        let side = pop.region().side;
        let expected = (3000.0 * 0.8 / 0.3 + 3000.0 * 0.2 / 0.2_f64).sqrt();
        assert!((side - expected).abs() < 1e-9);
    }

    #[test]
    fn birth_death_and_leaving_home() {
        let cfg = DemographyConfig::default();
        let mut rng = RngStream::new(3, 0, "init");
        let mut pop = Population::initialize(500, &cfg, 10.0, &mut rng, acceptor).unwrap();
        let mother = pop
            .people()
            .iter()
            .find(|p| p.sex == Sex::Female && p.age(0.0) > 20.0)
            .unwrap()
            .id;
        let att = acceptor(&mut rng);
        let child = pop.add_birth(mother, 1.0, &mut rng, att);
        assert_eq!(pop.age(child, 1.0), 0.0);
        assert_eq!(pop.person(child).household, pop.person(mother).household);
        assert_eq!(pop.person(child).mother, Some(mother));
        assert_eq!(pop.person(child).position, pop.person(mother).position);
        pop.kill(mother, 2.0);
        assert!(!pop.is_alive(mother));
        assert!(pop.accounting_holds());
        assert_eq!(pop.alive_count(), 500);
        let leaver = pop
            .people()
            .iter()
            .find(|p| p.alive() && !p.left_home && p.age(0.0) > 10.0)
            .unwrap()
            .id;
        let old = pop.person(leaver).household;
        let new = pop.leave_home(leaver, &mut rng);
        assert_ne!(old, new);
        assert!(pop.households_partition_alive());
        assert!(!pop.neighbors_within(leaver, 1e-9).contains(&leaver));
    }

    #[test]
    fn household_acceptance_is_min_of_parents() {
        let cfg = DemographyConfig {
            couple_share: 1.0,
            couple_children_weights: vec![0.0, 1.0],
            ..Default::default()
        };
        let mut rng = RngStream::new(4, 0, "init");
        let mut k = 0;
        let pop = Population::initialize(3, &cfg, 5.0, &mut rng, |_| {
            k += 1;
            VaccineAttitude::Acceptance([0.9, 0.4, 0.7][(k - 1) % 3])
        })
        .unwrap();
        assert_eq!(pop.household_acceptance(HouseholdId(0)), Some(0.4));
    }
}
