//! Conditional belief, p-evident events and perceived maximal common p-belief.
//!
//! All comparisons are exact. The load-bearing distinction is between
//! p-evident (`>= p`) and super-p-evident (`> p`) events: the ladder of
//! maximally evident C-indicating events is produced by repeatedly stripping
//! every state whose minimum belief does not strictly exceed the current level.

use std::collections::BTreeSet;
use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::rational::{format_ratio, Rational};
use crate::worldmodel::Partition;
use crate::Player;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum StructureError {
    #[error("state {0} has non-positive measure")]
    NonPositiveMeasure(usize),
    #[error("measures sum to {0}, not 1")]
    MeasureSum(String),
    #[error("partition of player {player} covers {got} states, expected {expected}")]
    PartitionSize {
        player: Player,
        got: usize,
        expected: usize,
    },
    #[error("state space is empty")]
    Empty,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EpistemicError {
    #[error("state index {state} out of range for a space of {len} states")]
    StateOutOfRange { state: usize, len: usize },
    #[error("the evidence level of the empty event is undefined")]
    EmptyEvent,
}

/// A subset of the state space, as an ordered set of state indices.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize)]
pub struct Event(BTreeSet<usize>);

impl Event {
    pub fn empty() -> Self {
        Event(BTreeSet::new())
    }

    pub fn full(num_states: usize) -> Self {
        (0..num_states).collect()
    }

    pub fn contains(&self, state: usize) -> bool {
        self.0.contains(&state)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn union(&self, other: &Event) -> Event {
        Event(self.0.union(&other.0).copied().collect())
    }

    pub fn intersection(&self, other: &Event) -> Event {
        Event(self.0.intersection(&other.0).copied().collect())
    }

    pub fn is_subset(&self, other: &Event) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn insert(&mut self, state: usize) -> bool {
        self.0.insert(state)
    }

    pub fn remove(&mut self, state: usize) -> bool {
        self.0.remove(&state)
    }

    pub fn max_index(&self) -> Option<usize> {
        self.0.last().copied()
    }
}

impl FromIterator<usize> for Event {
    fn from_iter<T: IntoIterator<Item = usize>>(iter: T) -> Self {
        Event(iter.into_iter().collect())
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, s) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{s}")?;
        }
        write!(f, "}}")
    }
}

/// `(Ω, μ, (Π₀, Π₁))` with states identified by index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InformationStructure {
    measure: Vec<Rational>,
    partitions: [Partition; 2],
    block_mass: [Vec<Rational>; 2],
}

impl InformationStructure {
    pub fn new(measure: Vec<Rational>, partitions: [Partition; 2]) -> Result<Self, StructureError> {
        if measure.is_empty() {
            return Err(StructureError::Empty);
        }
        if let Some(s) = measure.iter().position(|m| !m.is_positive()) {
            return Err(StructureError::NonPositiveMeasure(s));
        }
        let total: Rational = measure.iter().sum();
        if !total.is_one() {
            return Err(StructureError::MeasureSum(format_ratio(&total)));
        }
        for p in Player::BOTH {
            let got = partitions[p.index()].num_states();
            if got != measure.len() {
                return Err(StructureError::PartitionSize {
                    player: p,
                    got,
                    expected: measure.len(),
                });
            }
        }
        let block_mass = [0, 1].map(|i| {
            partitions[i]
                .blocks()
                .iter()
                .map(|b| b.iter().map(|&s| &measure[s]).sum())
                .collect()
        });
        Ok(Self {
            measure,
            partitions,
            block_mass,
        })
    }

    pub fn num_states(&self) -> usize {
        self.measure.len()
    }

    pub fn measure(&self, state: usize) -> &Rational {
        &self.measure[state]
    }

    pub fn measures(&self) -> &[Rational] {
        &self.measure
    }

    pub fn partition(&self, player: Player) -> &Partition {
        &self.partitions[player.index()]
    }

    /// `Π_i(ω)`.
    pub fn block(&self, player: Player, state: usize) -> &[usize] {
        self.partitions[player.index()].block_containing(state)
    }

    pub fn block_mass(&self, player: Player, state: usize) -> &Rational {
        let p = player.index();
        &self.block_mass[p][self.partitions[p].block_of(state)]
    }

    pub fn full_event(&self) -> Event {
        Event::full(self.num_states())
    }

    /// `μ(E)`.
    pub fn mass(&self, event: &Event) -> Rational {
        event.iter().map(|s| &self.measure[s]).sum()
    }

    pub fn check_state(&self, state: usize) -> Result<(), EpistemicError> {
        if state < self.num_states() {
            Ok(())
        } else {
            Err(EpistemicError::StateOutOfRange {
                state,
                len: self.num_states(),
            })
        }
    }

    fn check_event(&self, event: &Event) -> Result<(), EpistemicError> {
        match event.max_index() {
            Some(s) => self.check_state(s),
            None => Ok(()),
        }
    }

    /// `P_i(E | ω)` without the index check.
    pub(crate) fn belief_in(&self, player: Player, event: &Event, state: usize) -> Rational {
        let inside: Rational = self
            .block(player, state)
            .iter()
            .filter(|&&s| event.contains(s))
            .map(|&s| &self.measure[s])
            .sum();
        inside / self.block_mass(player, state)
    }

    fn min_belief_unchecked(&self, event: &Event, target: &Event, state: usize) -> Rational {
        Player::BOTH
            .iter()
            .flat_map(|&p| [self.belief_in(p, event, state), self.belief_in(p, target, state)])
            .min()
            .expect("two players")
    }

    fn evidence_level_unchecked(&self, event: &Event, target: &Event) -> Rational {
        event
            .iter()
            .map(|s| self.min_belief_unchecked(event, target, s))
            .min()
            .expect("nonempty event")
    }

    fn super_p_evident_unchecked(&self, event: &Event, target: &Event, level: &Rational) -> Event {
        let mut current = event.clone();
        loop {
            let violators: Vec<usize> = current
                .iter()
                .filter(|&s| self.min_belief_unchecked(&current, target, s) <= *level)
                .collect();
            if violators.is_empty() {
                return current;
            }
            for s in violators {
                current.remove(s);
            }
        }
    }
}

/// `P_i(E | ω) = μ(E ∩ Π_i(ω)) / μ(Π_i(ω))`.
pub fn conditional_belief(
    s: &InformationStructure,
    player: Player,
    event: &Event,
    state: usize,
) -> Result<Rational, EpistemicError> {
    s.check_state(state)?;
    Ok(s.belief_in(player, event, state))
}

/// `min_i min(P_i(E | ω), P_i(C | ω))`.
pub fn min_belief(
    s: &InformationStructure,
    event: &Event,
    target: &Event,
    state: usize,
) -> Result<Rational, EpistemicError> {
    s.check_state(state)?;
    Ok(s.min_belief_unchecked(event, target, state))
}

/// The C-evidence level of `event`: the largest p at which it is a p-evident
/// C-indicating event.
pub fn evidence_level(s: &InformationStructure, event: &Event, target: &Event) -> Result<Rational, EpistemicError> {
    if event.is_empty() {
        return Err(EpistemicError::EmptyEvent);
    }
    s.check_event(event)?;
    Ok(s.evidence_level_unchecked(event, target))
}

/// Strips every state whose minimum belief is at most `level`, rescanning
/// until a pass removes nothing. When `event` is maximally evident at `level`
/// the result is its largest super-evident C-indicating subset (possibly
/// empty).
pub fn super_p_evident(
    s: &InformationStructure,
    event: &Event,
    target: &Event,
    level: &Rational,
) -> Result<Event, EpistemicError> {
    s.check_event(event)?;
    Ok(s.super_p_evident_unchecked(event, target, level))
}

/// Perceived maximal common p-belief in `target` for `player` at `state`: the
/// largest p such that the player p-believes there is common p-belief.
pub fn common_p_belief(
    s: &InformationStructure,
    target: &Event,
    player: Player,
    state: usize,
) -> Result<Rational, EpistemicError> {
    s.check_state(state)?;
    s.check_event(target)?;
    let mut current = s.full_event();
    let mut next = current.clone();
    while s.belief_in(player, &next, state).is_positive() {
        let level = s.evidence_level_unchecked(&next, target);
        current = next;
        next = s.super_p_evident_unchecked(&current, target, &level);
    }
    Ok(s.evidence_level_unchecked(&current, target))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Rung {
    pub event: Event,
    #[serde(with = "crate::rational::serde_ratio")]
    pub level: Rational,
}

/// The nested sequence `E₁ ⊃ E₂ ⊃ … ⊃ Eₙ` of maximally evident C-indicating
/// events, starting from `Ω`, with their C-evidence levels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EvidentLadder {
    pub rungs: Vec<Rung>,
}

impl EvidentLadder {
    pub fn levels(&self) -> Vec<Rational> {
        self.rungs.iter().map(|r| r.level.clone()).collect()
    }

    /// Level of the last rung that intersects `Π_i(ω)`.
    pub fn common_p_belief(
        &self,
        s: &InformationStructure,
        player: Player,
        state: usize,
    ) -> Result<Rational, EpistemicError> {
        s.check_state(state)?;
        let block = s.block(player, state);
        self.rungs
            .iter()
            .rev()
            .find(|r| block.iter().any(|&w| r.event.contains(w)))
            .map(|r| r.level.clone())
            .ok_or(EpistemicError::EmptyEvent)
    }
}

pub fn evident_ladder(s: &InformationStructure, target: &Event) -> Result<EvidentLadder, EpistemicError> {
    s.check_event(target)?;
    let mut rungs: Vec<Rung> = Vec::new();
    let mut current = s.full_event();
    while !current.is_empty() {
        let level = s.evidence_level_unchecked(&current, target);
        let next = s.super_p_evident_unchecked(&current, target, &level);
        match rungs.last_mut() {
            // super_p_evident always strips the minimising state, so equal
            // consecutive events cannot occur; kept for parity with the
            // collapsing construction.
            Some(last) if last.event == current => last.level = level,
            _ => rungs.push(Rung { event: current, level }),
        }
        current = next;
    }
    Ok(EvidentLadder { rungs })
}

/// Every player p-believes `event` at every state of `event`.
pub fn is_p_evident(s: &InformationStructure, event: &Event, level: &Rational) -> bool {
    event
        .iter()
        .all(|w| Player::BOTH.iter().all(|&p| s.belief_in(p, event, w) >= *level))
}

/// Every player p-believes `target` at every state of `event`.
pub fn is_c_indicating(s: &InformationStructure, event: &Event, target: &Event, level: &Rational) -> bool {
    event
        .iter()
        .all(|w| Player::BOTH.iter().all(|&p| s.belief_in(p, target, w) >= *level))
}

/// Both definitional checks at once.
pub fn is_evident_c_indicating(s: &InformationStructure, event: &Event, target: &Event, level: &Rational) -> bool {
    is_p_evident(s, event, level) && is_c_indicating(s, event, target, level)
}

/// `P_i(E|ω)` is zero or at least `level` for every player and state.
pub fn zero_or_threshold(s: &InformationStructure, event: &Event, level: &Rational) -> bool {
    (0..s.num_states()).all(|w| {
        Player::BOTH.iter().all(|&p| {
            let b = s.belief_in(p, event, w);
            b.is_zero() || b >= *level
        })
    })
}
