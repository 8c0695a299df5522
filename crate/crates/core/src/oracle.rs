//! Brute-force reference implementations and random instance generators.
//!
//! Nothing here calls into [`crate::epistemic`]'s ladder walk: beliefs are
//! recomputed from raw measures over bitmask events, and common p-belief is
//! obtained straight from its definition. Two variants are provided:
//!
//! * **exhaustive**: every subset `E ⊆ Ω` is scored by
//!   `min(level(E), P_i(E|ω))`, where `level(E)` is the largest p at which `E`
//!   is p-evident and C-indicating. Exponential in `|Ω|`.
//! * **candidate-p**: every realizable conditional-belief value is tried as a
//!   threshold, largest first, and the largest p-evident C-indicating event at
//!   that threshold is found by weak-inequality fixed-point removal.
//!   Exponential only in the largest block size.

use std::collections::BTreeSet;

use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::epistemic::{self, EpistemicError, Event, InformationStructure, StructureError};
use crate::rational::{self, format_ratio, Rational};
use crate::worldmodel::{Partition, PartitionError};
use crate::Player;

/// State-count cap for the exhaustive variant.
pub const MAX_EXHAUSTIVE_STATES: usize = 12;
/// Block-size cap for the candidate-p variant.
pub const MAX_CANDIDATE_BLOCK: usize = 16;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("exhaustive oracle is capped at {cap} states, structure has {states}")]
    TooManyStates { states: usize, cap: usize },
    #[error("candidate oracle is capped at blocks of {cap} states, found one of {size}")]
    BlockTooLarge { size: usize, cap: usize },
    #[error("the state space has more than 64 states")]
    TooWide,
    #[error(transparent)]
    Epistemic(#[from] EpistemicError),
    #[error(transparent)]
    Structure(#[from] StructureError),
    #[error(transparent)]
    Partition(#[from] PartitionError),
    #[error("malformed structure dump: {0}")]
    Dump(String),
}

/// Bitmask view of a structure.
struct Masks {
    num_states: usize,
    measure: Vec<Rational>,
    blocks: [Vec<u64>; 2],
    block_of: [Vec<usize>; 2],
    block_mass: [Vec<Rational>; 2],
    target: u64,
}

impl Masks {
    fn new(s: &InformationStructure, target: &Event) -> Result<Self, OracleError> {
        let n = s.num_states();
        if n > 64 {
            return Err(OracleError::TooWide);
        }
        if let Some(w) = target.max_index() {
            s.check_state(w)?;
        }
        let measure = s.measures().to_vec();
        let mut blocks = [Vec::new(), Vec::new()];
        let mut block_of = [vec![0; n], vec![0; n]];
        let mut block_mass = [Vec::new(), Vec::new()];
        for p in Player::BOTH {
            let i = p.index();
            for (b, block) in s.partition(p).blocks().iter().enumerate() {
                let mut mask = 0u64;
                let mut mass = Rational::zero();
                for &w in block {
                    mask |= 1 << w;
                    mass += &measure[w];
                    block_of[i][w] = b;
                }
                blocks[i].push(mask);
                block_mass[i].push(mass);
            }
        }
        let target = target.iter().fold(0u64, |m, w| m | 1 << w);
        Ok(Self {
            num_states: n,
            measure,
            blocks,
            block_of,
            block_mass,
            target,
        })
    }

    fn full(&self) -> u64 {
        if self.num_states == 64 {
            u64::MAX
        } else {
            (1u64 << self.num_states) - 1
        }
    }

    fn mass(&self, mask: u64) -> Rational {
        (0..self.num_states)
            .filter(|w| mask >> w & 1 == 1)
            .map(|w| &self.measure[w])
            .sum()
    }

    /// `P_i(E | block b)` for every block of player `i`.
    fn block_beliefs(&self, i: usize, event: u64) -> Vec<Rational> {
        self.blocks[i]
            .iter()
            .zip(&self.block_mass[i])
            .map(|(&b, m)| self.mass(event & b) / m)
            .collect()
    }

    /// Largest p with `event` p-evident and C-indicating.
    fn level(&self, event: u64, target_beliefs: &[Vec<Rational>; 2]) -> Rational {
        let beliefs = [self.block_beliefs(0, event), self.block_beliefs(1, event)];
        let mut level = Rational::one();
        for w in (0..self.num_states).filter(|w| event >> w & 1 == 1) {
            for i in 0..2 {
                let b = self.block_of[i][w];
                level = level.min(beliefs[i][b].clone()).min(target_beliefs[i][b].clone());
            }
        }
        level
    }

    /// Greatest fixpoint of "drop states where some belief in E or C is
    /// below `p`".
    fn largest_evident(&self, p: &Rational, target_beliefs: &[Vec<Rational>; 2]) -> u64 {
        let mut event = self.full();
        loop {
            let beliefs = [self.block_beliefs(0, event), self.block_beliefs(1, event)];
            let keep = (0..self.num_states)
                .filter(|w| event >> w & 1 == 1)
                .filter(|&w| {
                    (0..2).all(|i| {
                        let b = self.block_of[i][w];
                        beliefs[i][b] >= *p && target_beliefs[i][b] >= *p
                    })
                })
                .fold(0u64, |m, w| m | 1 << w);
            if keep == event {
                return event;
            }
            event = keep;
        }
    }

    fn belief_at(&self, i: usize, event: u64, state: usize) -> Rational {
        let b = self.block_of[i][state];
        self.mass(event & self.blocks[i][b]) / &self.block_mass[i][b]
    }

    fn target_beliefs(&self) -> [Vec<Rational>; 2] {
        [self.block_beliefs(0, self.target), self.block_beliefs(1, self.target)]
    }
}

/// Per-player, per-state common p-belief values.
pub type BeliefTable = [Vec<Rational>; 2];

/// Exhaustive-subset oracle for every `(player, state)`.
pub fn exhaustive_table(s: &InformationStructure, target: &Event) -> Result<BeliefTable, OracleError> {
    let n = s.num_states();
    if n > MAX_EXHAUSTIVE_STATES {
        return Err(OracleError::TooManyStates {
            states: n,
            cap: MAX_EXHAUSTIVE_STATES,
        });
    }
    let m = Masks::new(s, target)?;
    let target_beliefs = m.target_beliefs();
    let mut best: BeliefTable = [vec![Rational::zero(); n], vec![Rational::zero(); n]];
    for event in 1..=m.full() {
        let level = m.level(event, &target_beliefs);
        if level.is_zero() {
            continue;
        }
        for i in 0..2 {
            let beliefs = m.block_beliefs(i, event);
            for w in 0..n {
                let score = level.clone().min(beliefs[m.block_of[i][w]].clone());
                if score > best[i][w] {
                    best[i][w] = score;
                }
            }
        }
    }
    Ok(best)
}

/// Exhaustive-subset oracle at a single `(player, state)`.
pub fn brute_force_common_p_belief(
    s: &InformationStructure,
    target: &Event,
    player: Player,
    state: usize,
) -> Result<Rational, OracleError> {
    s.check_state(state)?;
    Ok(exhaustive_table(s, target)?[player.index()][state].clone())
}

/// Every value `μ(S) / μ(B)` for a block `B` of either player and `S ⊆ B`,
/// plus 0 and 1, sorted descending without duplicates.
pub fn candidate_levels(s: &InformationStructure) -> Result<Vec<Rational>, OracleError> {
    let mut values = BTreeSet::from([Rational::zero(), Rational::one()]);
    for p in Player::BOTH {
        for block in s.partition(p).blocks() {
            if block.len() > MAX_CANDIDATE_BLOCK {
                return Err(OracleError::BlockTooLarge {
                    size: block.len(),
                    cap: MAX_CANDIDATE_BLOCK,
                });
            }
            let total: Rational = block.iter().map(|&w| s.measure(w)).sum();
            for subset in 1u32..(1 << block.len()) {
                let part: Rational = block
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| subset >> k & 1 == 1)
                    .map(|(_, &w)| s.measure(w))
                    .sum();
                values.insert(part / &total);
            }
        }
    }
    Ok(values.into_iter().rev().collect())
}

/// Candidate-p oracle for every `(player, state)`.
pub fn candidate_table(s: &InformationStructure, target: &Event) -> Result<BeliefTable, OracleError> {
    let m = Masks::new(s, target)?;
    let target_beliefs = m.target_beliefs();
    let n = s.num_states();
    let mut answer: [Vec<Option<Rational>>; 2] = [vec![None; n], vec![None; n]];
    let mut remaining = 2 * n;
    for p in candidate_levels(s)? {
        if remaining == 0 {
            break;
        }
        let event = m.largest_evident(&p, &target_beliefs);
        for i in 0..2 {
            for w in 0..n {
                if answer[i][w].is_none() && (p.is_zero() || m.belief_at(i, event, w) >= p) {
                    answer[i][w] = Some(p.clone());
                    remaining -= 1;
                }
            }
        }
    }
    Ok(answer.map(|row| row.into_iter().map(|v| v.expect("p = 0 always qualifies")).collect()))
}

/// Candidate-p oracle at a single `(player, state)`.
pub fn candidate_common_p_belief(
    s: &InformationStructure,
    target: &Event,
    player: Player,
    state: usize,
) -> Result<Rational, OracleError> {
    s.check_state(state)?;
    Ok(candidate_table(s, target)?[player.index()][state].clone())
}

/// The largest p-evident C-indicating event at level `p` (weak inequalities).
pub fn largest_p_evident_c_indicating(
    s: &InformationStructure,
    target: &Event,
    p: &Rational,
) -> Result<Event, OracleError> {
    let m = Masks::new(s, target)?;
    let mask = m.largest_evident(p, &m.target_beliefs());
    Ok((0..m.num_states).filter(|w| mask >> w & 1 == 1).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum MeasureStyle {
    Uniform,
    /// Integer weights in `1..=9`, normalised.
    #[default]
    RandomRational,
}

/// Parameters for [`random_structure`]. Partitions are drawn by assigning each
/// state a uniformly random label among a random number of labels; `C` is a
/// uniformly random nonempty subset.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RandomStructureConfig {
    pub seed: u64,
    pub num_states: usize,
    pub measure: MeasureStyle,
}

impl RandomStructureConfig {
    pub fn new(seed: u64, num_states: usize) -> Self {
        Self {
            seed,
            num_states,
            measure: MeasureStyle::default(),
        }
    }
}

/// Deterministic in the seed. `num_states` must be at least 1.
pub fn random_structure(cfg: &RandomStructureConfig) -> (InformationStructure, Event) {
    let n = cfg.num_states.max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let weights: Vec<i64> = match cfg.measure {
        MeasureStyle::Uniform => vec![1; n],
        MeasureStyle::RandomRational => (0..n).map(|_| rng.gen_range(1..=9)).collect(),
    };
    let total: i64 = weights.iter().sum();
    let measure = weights.iter().map(|&w| rational::ratio(w, total)).collect();
    let mut partition = || {
        let labels_count = rng.gen_range(1..=n);
        let labels: Vec<usize> = (0..n).map(|_| rng.gen_range(0..labels_count)).collect();
        Partition::from_labels(&labels)
    };
    let partitions = [partition(), partition()];
    let target = loop {
        let event: Event = (0..n).filter(|_| rng.gen_bool(0.5)).collect();
        if !event.is_empty() {
            break event;
        }
    };
    let s = InformationStructure::new(measure, partitions).expect("generated structures are valid");
    (s, target)
}

/// A random nonempty event, for property tests that need more than `C`.
pub fn random_event<R: Rng>(rng: &mut R, num_states: usize) -> Event {
    let mut states: Vec<usize> = (0..num_states).collect();
    states.shuffle(rng);
    let size = rng.gen_range(1..=num_states);
    states.into_iter().take(size).collect()
}

/// World-model-free JSON form of a structure and target event.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructureDump {
    pub measures: Vec<String>,
    pub partitions: [Vec<Vec<usize>>; 2],
    pub event: Vec<usize>,
}

impl StructureDump {
    pub fn new(s: &InformationStructure, target: &Event) -> Self {
        Self {
            measures: s.measures().iter().map(format_ratio).collect(),
            partitions: [Player::Zero, Player::One].map(|p| s.partition(p).blocks().to_vec()),
            event: target.iter().collect(),
        }
    }

    pub fn load(&self) -> Result<(InformationStructure, Event), OracleError> {
        let measure = self
            .measures
            .iter()
            .map(|m| rational::parse_rational(m).map_err(|e| OracleError::Dump(e.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        let n = measure.len();
        let [p0, p1] = self.partitions.clone();
        let partitions = [Partition::from_blocks(n, p0)?, Partition::from_blocks(n, p1)?];
        let s = InformationStructure::new(measure, partitions)?;
        let target: Event = self.event.iter().copied().collect();
        if let Some(w) = target.max_index() {
            s.check_state(w)?;
        }
        Ok((s, target))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Counterexample {
    pub seed: u64,
    pub player: Player,
    pub state: usize,
    #[serde(with = "crate::rational::serde_ratio")]
    pub algorithm: Rational,
    #[serde(with = "crate::rational::serde_ratio")]
    pub exhaustive: Rational,
    #[serde(with = "crate::rational::serde_ratio")]
    pub candidate: Rational,
    pub structure: StructureDump,
}

#[derive(Debug, Clone, Serialize)]
pub struct FuzzReport {
    pub instances: usize,
    pub comparisons: usize,
    /// Lowest-seed disagreement, if any.
    pub counterexample: Option<Counterexample>,
}

/// Compares the ladder walk with both oracles on one random instance.
pub fn check_instance(cfg: &RandomStructureConfig) -> Result<(usize, Option<Counterexample>), OracleError> {
    let (s, target) = random_structure(cfg);
    let exhaustive = exhaustive_table(&s, &target)?;
    let candidate = candidate_table(&s, &target)?;
    let mut comparisons = 0;
    for p in Player::BOTH {
        for w in 0..s.num_states() {
            comparisons += 1;
            let algorithm = epistemic::common_p_belief(&s, &target, p, w)?;
            let (e, c) = (&exhaustive[p.index()][w], &candidate[p.index()][w]);
            if algorithm != *e || algorithm != *c {
                return Ok((
                    comparisons,
                    Some(Counterexample {
                        seed: cfg.seed,
                        player: p,
                        state: w,
                        algorithm,
                        exhaustive: e.clone(),
                        candidate: c.clone(),
                        structure: StructureDump::new(&s, &target),
                    }),
                ));
            }
        }
    }
    Ok((comparisons, None))
}

/// Runs [`check_instance`] for seeds `0..seeds` in parallel.
pub fn fuzz(seeds: u64, num_states: usize) -> Result<FuzzReport, OracleError> {
    let results = (0..seeds)
        .into_par_iter()
        .map(|seed| check_instance(&RandomStructureConfig::new(seed, num_states)))
        .collect::<Result<Vec<_>, _>>()?;
    let comparisons = results.iter().map(|(c, _)| c).sum();
    let counterexample = results.into_iter().find_map(|(_, ce)| ce);
    Ok(FuzzReport {
        instances: seeds as usize,
        comparisons,
        counterexample,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Property {
    /// Union of p-evident C-indicating events is p-evident C-indicating.
    UnionClosure,
    /// Largest p-evident events shrink as p grows.
    Containment,
    /// Beliefs in a p-evident event are either 0 or at least p.
    ZeroOrThreshold,
    /// Ladder rungs are strictly nested with strictly rising levels.
    Nesting,
    /// Rungs are the largest evident events and agree with the walk.
    Ladder,
    Measurability,
    Monotonicity,
    Relabelling,
}

impl Property {
    pub const ALL: [Property; 8] = [
        Property::UnionClosure,
        Property::Containment,
        Property::ZeroOrThreshold,
        Property::Nesting,
        Property::Ladder,
        Property::Measurability,
        Property::Monotonicity,
        Property::Relabelling,
    ];
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PropertyViolation {
    pub property: Property,
    pub detail: String,
}

impl PropertyViolation {
    fn new(property: Property, detail: String) -> Self {
        Self { property, detail }
    }
}

/// Structural properties of the ladder and of common p-belief that must hold
/// on every instance. Returns one message per failed property.
pub fn property_violations(s: &InformationStructure, target: &Event) -> Result<Vec<PropertyViolation>, OracleError> {
    let n = s.num_states();
    let mut out = Vec::new();
    let ladder = epistemic::evident_ladder(s, target)?;

    for (k, rung) in ladder.rungs.iter().enumerate() {
        if !epistemic::is_evident_c_indicating(s, &rung.event, target, &rung.level) {
            out.push(PropertyViolation::new(
                Property::Ladder,
                format!("rung {k} is not evident and C-indicating at its level"),
            ));
        }
        if !epistemic::zero_or_threshold(s, &rung.event, &rung.level) {
            out.push(PropertyViolation::new(
                Property::ZeroOrThreshold,
                format!("rung {k} has a belief strictly between 0 and its level"),
            ));
        }
        if largest_p_evident_c_indicating(s, target, &rung.level)? != rung.event {
            out.push(PropertyViolation::new(
                Property::Ladder,
                format!("rung {k} is not the largest evident event at its level"),
            ));
        }
        if let Some(prev) = k.checked_sub(1).map(|j| &ladder.rungs[j]) {
            if !(rung.event.is_subset(&prev.event) && rung.event.len() < prev.event.len()) {
                out.push(PropertyViolation::new(
                    Property::Nesting,
                    format!("rung {k} is not strictly nested in rung {}", k - 1),
                ));
            }
            if rung.level <= prev.level {
                out.push(PropertyViolation::new(
                    Property::Nesting,
                    format!("rung {k} does not raise the level"),
                ));
            }
        }
    }

    // Neighbourhood events Π₀(ω) ∪ Π₁(ω), paired up for the union check.
    let neighbourhoods: Vec<Event> = (0..n)
        .map(|w| {
            s.block(Player::Zero, w)
                .iter()
                .chain(s.block(Player::One, w))
                .copied()
                .collect()
        })
        .collect();
    let levels = neighbourhoods
        .iter()
        .map(|e| epistemic::evidence_level(s, e, target))
        .collect::<Result<Vec<_>, _>>()?;
    for a in 0..n {
        for b in a + 1..n {
            let p = (&levels[a]).min(&levels[b]);
            let union = neighbourhoods[a].union(&neighbourhoods[b]);
            if !epistemic::is_evident_c_indicating(s, &union, target, p) {
                out.push(PropertyViolation::new(
                    Property::UnionClosure,
                    format!("union of neighbourhoods of {a} and {b} drops below {}", format_ratio(p)),
                ));
            }
        }
    }

    let mut previous: Option<Event> = None;
    for p in candidate_levels(s)? {
        let largest = largest_p_evident_c_indicating(s, target, &p)?;
        if !epistemic::zero_or_threshold(s, &largest, &p) {
            out.push(PropertyViolation::new(
                Property::ZeroOrThreshold,
                format!(
                    "largest event at {} has a belief strictly between 0 and p",
                    format_ratio(&p)
                ),
            ));
        }
        if let Some(prev) = &previous {
            if !prev.is_subset(&largest) {
                out.push(PropertyViolation::new(
                    Property::Containment,
                    format!(
                        "a higher-level largest event is not inside the one at {}",
                        format_ratio(&p)
                    ),
                ));
            }
        }
        previous = Some(largest);
    }

    let table: Vec<Vec<Rational>> = Player::BOTH
        .iter()
        .map(|&p| (0..n).map(|w| epistemic::common_p_belief(s, target, p, w)).collect())
        .collect::<Result<_, _>>()?;
    for p in Player::BOTH {
        for w in 0..n {
            let value = &table[p.index()][w];
            if *value != ladder.common_p_belief(s, p, w)? {
                out.push(PropertyViolation::new(
                    Property::Ladder,
                    format!("ladder and walk disagree for player {p} at state {w}"),
                ));
            }
            if s.block(p, w).iter().any(|&v| table[p.index()][v] != *value) {
                out.push(PropertyViolation::new(
                    Property::Measurability,
                    format!("common p-belief varies within player {p}'s block of state {w}"),
                ));
            }
            if *value > epistemic::conditional_belief(s, p, target, w)? {
                out.push(PropertyViolation::new(
                    Property::Ladder,
                    format!("common p-belief exceeds first-order belief for player {p} at {w}"),
                ));
            }
        }
    }

    if let Some(extra) = (0..n).find(|w| !target.contains(*w)) {
        let mut wider = target.clone();
        wider.insert(extra);
        for p in Player::BOTH {
            for w in 0..n {
                if epistemic::common_p_belief(s, &wider, p, w)? < table[p.index()][w] {
                    out.push(PropertyViolation::new(
                        Property::Monotonicity,
                        format!("enlarging C lowered common p-belief for player {p} at {w}"),
                    ));
                }
            }
        }
    }

    // Relabelling states ω ↦ n−1−ω must permute the answers accordingly.
    let flip = |w: usize| n - 1 - w;
    let measure: Vec<Rational> = (0..n).map(|w| s.measure(flip(w)).clone()).collect();
    let partitions = [Player::Zero, Player::One].map(|p| {
        let blocks = s
            .partition(p)
            .blocks()
            .iter()
            .map(|b| b.iter().map(|&w| flip(w)).collect())
            .collect();
        Partition::from_blocks(n, blocks)
    });
    let [p0, p1] = partitions;
    let flipped = InformationStructure::new(measure, [p0?, p1?])?;
    let flipped_target: Event = target.iter().map(flip).collect();
    for p in Player::BOTH {
        for w in 0..n {
            if epistemic::common_p_belief(&flipped, &flipped_target, p, flip(w))? != table[p.index()][w] {
                out.push(PropertyViolation::new(
                    Property::Relabelling,
                    format!("relabelling changed common p-belief for player {p} at {w}"),
                ));
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{one, ratio, zero};
    use crate::worldmodel::{builtin_loudspeaker, builtin_messenger, State, WorldModel};

    #[test]
    fn loudspeaker_oracle() {
        let m = WorldModel::build(builtin_loudspeaker(ratio(1, 4)).unwrap()).unwrap();
        let s = m.structure();
        let c = m.state_bit_event();
        let w = m.state_index(&State::from_bits(&[1, 1])).unwrap();
        assert_eq!(brute_force_common_p_belief(s, &c, Player::Zero, w).unwrap(), one());
        assert_eq!(candidate_common_p_belief(s, &c, Player::Zero, w).unwrap(), one());
        let w = m.state_index(&State::from_bits(&[1, 0])).unwrap();
        assert_eq!(
            brute_force_common_p_belief(s, &c, Player::Zero, w).unwrap(),
            ratio(1, 4)
        );
    }

    #[test]
    fn full_target_is_one_everywhere() {
        let (s, _) = random_structure(&RandomStructureConfig::new(3, 7));
        let full = s.full_event();
        for table in [
            exhaustive_table(&s, &full).unwrap(),
            candidate_table(&s, &full).unwrap(),
        ] {
            assert!(table.iter().flatten().all(|v| v.is_one()));
        }
    }

    #[test]
    fn singleton_space() {
        let s = InformationStructure::new(vec![one()], [Partition::trivial(1), Partition::trivial(1)]).unwrap();
        let inside: Event = [0].into_iter().collect();
        assert_eq!(
            brute_force_common_p_belief(&s, &inside, Player::Zero, 0).unwrap(),
            one()
        );
        assert_eq!(
            brute_force_common_p_belief(&s, &Event::empty(), Player::One, 0).unwrap(),
            zero()
        );
        assert_eq!(
            candidate_common_p_belief(&s, &Event::empty(), Player::One, 0).unwrap(),
            zero()
        );
    }

    #[test]
    fn exhaustive_cap() {
        let (s, c) = random_structure(&RandomStructureConfig::new(0, 13));
        assert!(matches!(
            brute_force_common_p_belief(&s, &c, Player::Zero, 0),
            Err(OracleError::TooManyStates { states: 13, cap: 12 })
        ));
    }

    #[test]
    fn generator_is_deterministic_and_valid() {
        let cfg = RandomStructureConfig::new(42, 8);
        let (a, ca) = random_structure(&cfg);
        let (b, cb) = random_structure(&cfg);
        assert_eq!(a, b);
        assert_eq!(ca, cb);
        for seed in 0..500 {
            let (s, c) = random_structure(&RandomStructureConfig::new(seed, 8));
            assert_eq!(s.num_states(), 8);
            assert!(!c.is_empty());
            let dump = StructureDump::new(&s, &c);
            assert_eq!(dump.load().unwrap(), (s, c));
        }
        let (single, _) = random_structure(&RandomStructureConfig::new(9, 1));
        assert_eq!(single.partition(Player::Zero).blocks().len(), 1);
        assert_eq!(single.partition(Player::One).blocks().len(), 1);
        let uniform = RandomStructureConfig {
            measure: MeasureStyle::Uniform,
            ..RandomStructureConfig::new(1, 5)
        };
        assert!(random_structure(&uniform)
            .0
            .measures()
            .iter()
            .all(|m| *m == ratio(1, 5)));
    }

    #[test]
    fn oracle_variants_agree() {
        for seed in 0..60 {
            let (s, c) = random_structure(&RandomStructureConfig::new(seed, 6));
            assert_eq!(
                exhaustive_table(&s, &c).unwrap(),
                candidate_table(&s, &c).unwrap(),
                "seed {seed}"
            );
        }
    }

    #[test]
    fn candidate_oracle_handles_messenger() {
        let m = WorldModel::build(builtin_messenger(ratio(1, 4)).unwrap()).unwrap();
        let private = m.state_index(&State::from_bits(&[1, 1, 0, 1, 0])).unwrap();
        let value = candidate_common_p_belief(m.structure(), &m.state_bit_event(), Player::Zero, private).unwrap();
        assert_eq!(value, ratio(1, 4));
    }

    #[test]
    fn fuzz_small_run_is_clean() {
        let report = fuzz(40, 5).unwrap();
        assert_eq!(report.instances, 40);
        assert_eq!(report.comparisons, 40 * 10);
        assert!(report.counterexample.is_none());
    }

    #[test]
    fn dump_rejects_bad_input() {
        let dump = StructureDump {
            measures: vec!["1/2".into(), "1/2".into()],
            partitions: [vec![vec![0, 1]], vec![vec![0]]],
            event: vec![0],
        };
        assert!(matches!(dump.load(), Err(OracleError::Partition(_))));
    }

    #[test]
    fn properties_hold_on_builtins() {
        for spec in [
            builtin_messenger(ratio(1, 4)).unwrap(),
            builtin_loudspeaker(ratio(1, 3)).unwrap(),
        ] {
            let m = WorldModel::build(spec).unwrap();
            let v = property_violations(m.structure(), &m.state_bit_event()).unwrap();
            assert!(v.is_empty(), "{v:?}");
        }
    }
}
