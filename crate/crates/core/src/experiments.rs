//! Knowledge-condition scenarios, model comparison and the human-agent sweep.

use std::fmt;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::epistemic::{EpistemicError, Event, InformationStructure};
use crate::rational::{self, format_ratio, parse_rational, Rational};
use crate::strategies::{
    cognitive_strategy, matched_p_belief_prob, pair_heuristic, private_heuristic, rational_p_belief_action,
    IteratedMatching, IteratedMaximization, LevelZero, PayoffError, PayoffParams,
};
use crate::worldmodel::{builtin_loudspeaker, builtin_messenger, SpecError, State, WorldModel};
use crate::Player;

/// Levels searched when fitting the iterated reasoning models.
pub const LEVEL_GRID: std::ops::RangeInclusive<u32> = 0..=5;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("cannot read human data {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed human data CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("human data row {row}: {reason}")]
    Row { row: usize, reason: String },
    #[error("human data has no row for condition `{0}`")]
    MissingCondition(Condition),
    #[error("human data lists condition `{0}` twice")]
    DuplicateCondition(Condition),
    #[error("bad risk grid `{input}`: {reason}")]
    Grid { input: String, reason: String },
    #[error("unknown strategy `{0}`")]
    UnknownStrategy(String),
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error(transparent)]
    Epistemic(#[from] EpistemicError),
    #[error(transparent)]
    Payoff(#[from] PayoffError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Condition {
    Private,
    Secondary,
    Tertiary,
    #[serde(rename = "common")]
    CommonKnowledge,
}

impl Condition {
    pub const ALL: [Condition; 4] = [
        Condition::Private,
        Condition::Secondary,
        Condition::Tertiary,
        Condition::CommonKnowledge,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Condition::Private => "private",
            Condition::Secondary => "secondary",
            Condition::Tertiary => "tertiary",
            Condition::CommonKnowledge => "common",
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Condition {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "private" => Ok(Condition::Private),
            "secondary" => Ok(Condition::Secondary),
            "tertiary" => Ok(Condition::Tertiary),
            "common" | "commonknowledge" | "common_knowledge" => Ok(Condition::CommonKnowledge),
            other => Err(format!("unknown condition `{other}`")),
        }
    }
}

/// One scenario: a world model, the state it is in, and the seat the human
/// participant occupies.
#[derive(Debug, Clone)]
pub struct KnowledgeCondition {
    pub name: Condition,
    pub model: Arc<WorldModel>,
    pub state: State,
    pub state_index: usize,
    pub participant: Player,
}

impl KnowledgeCondition {
    fn new(name: Condition, model: Arc<WorldModel>, bits: &[u8], participant: Player) -> Result<Self, SpecError> {
        let state = State::from_bits(bits);
        let state_index = model.state_index(&state)?;
        Ok(Self {
            name,
            model,
            state,
            state_index,
            participant,
        })
    }

    /// The seat an artificial companion takes.
    pub fn agent(&self) -> Player {
        self.participant.other()
    }
}

/// The four scenarios: messenger states for Private, Secondary and Tertiary,
/// the broadcast state of the loudspeaker for Common Knowledge. Participants
/// sit in seat 0 except in Secondary.
pub fn thomas_conditions(delta: Rational) -> Result<Vec<KnowledgeCondition>, SpecError> {
    if !(delta.is_positive_fraction()) {
        return Err(SpecError::DeltaOutOfRange(format_ratio(&delta)));
    }
    let messenger = Arc::new(WorldModel::build(builtin_messenger(delta.clone())?)?);
    let loudspeaker = Arc::new(WorldModel::build(builtin_loudspeaker(delta)?)?);
    Ok(vec![
        KnowledgeCondition::new(Condition::Private, messenger.clone(), &[1, 1, 0, 1, 0], Player::Zero)?,
        KnowledgeCondition::new(Condition::Secondary, messenger.clone(), &[1, 1, 1, 0, 1], Player::One)?,
        KnowledgeCondition::new(Condition::Tertiary, messenger, &[1, 1, 1, 1, 0], Player::Zero)?,
        KnowledgeCondition::new(Condition::CommonKnowledge, loudspeaker, &[1, 1], Player::Zero)?,
    ])
}

trait OpenUnit {
    fn is_positive_fraction(&self) -> bool;
}

impl OpenUnit for Rational {
    fn is_positive_fraction(&self) -> bool {
        *self > Rational::zero() && *self < Rational::one()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StrategyKind {
    RationalPBelief,
    MatchedPBelief,
    IteratedMaximization(u32),
    IteratedMatching(u32),
    PrivateHeuristic,
    PairHeuristic,
    Cognitive,
    AlwaysB,
}

impl StrategyKind {
    pub fn name(self) -> &'static str {
        match self {
            StrategyKind::RationalPBelief => "rational",
            StrategyKind::MatchedPBelief => "matched",
            StrategyKind::IteratedMaximization(_) => "itermax",
            StrategyKind::IteratedMatching(_) => "itermatch",
            StrategyKind::PrivateHeuristic => "private",
            StrategyKind::PairHeuristic => "pair",
            StrategyKind::Cognitive => "cognitive",
            StrategyKind::AlwaysB => "always_b",
        }
    }

    pub fn level(self) -> Option<u32> {
        match self {
            StrategyKind::IteratedMaximization(k) | StrategyKind::IteratedMatching(k) => Some(k),
            _ => None,
        }
    }

    /// Parses a strategy name; `level` is used by the iterated models.
    pub fn parse(name: &str, level: u32) -> Result<Self, DataError> {
        Ok(match name {
            "rational" => StrategyKind::RationalPBelief,
            "matched" => StrategyKind::MatchedPBelief,
            "itermax" => StrategyKind::IteratedMaximization(level),
            "itermatch" => StrategyKind::IteratedMatching(level),
            "private" => StrategyKind::PrivateHeuristic,
            "pair" => StrategyKind::PairHeuristic,
            "cognitive" => StrategyKind::Cognitive,
            "always_b" => StrategyKind::AlwaysB,
            other => return Err(DataError::UnknownStrategy(other.to_string())),
        })
    }

    /// Whether the strategy always returns a pure action.
    pub fn is_pure(self) -> bool {
        !matches!(self, StrategyKind::MatchedPBelief | StrategyKind::IteratedMatching(_))
    }
}

/// Probability that `player` plays `A` at `state` under `kind`, with `C = {x = 1}`.
pub fn evaluate(
    kind: StrategyKind,
    model: &WorldModel,
    payoffs: &PayoffParams,
    player: Player,
    state: usize,
) -> Result<Rational, EpistemicError> {
    let target = model.state_bit_event();
    evaluate_on(
        kind,
        model.structure(),
        &target,
        payoffs,
        LevelZero::default(),
        player,
        state,
    )
}

/// [`evaluate`] for an arbitrary structure and target; `level_zero` only
/// affects iterated maximization.
pub fn evaluate_on(
    kind: StrategyKind,
    s: &InformationStructure,
    c: &Event,
    payoffs: &PayoffParams,
    level_zero: LevelZero,
    player: Player,
    state: usize,
) -> Result<Rational, EpistemicError> {
    Ok(match kind {
        StrategyKind::RationalPBelief => rational_p_belief_action(s, c, payoffs, player, state)?.prob_a(),
        StrategyKind::MatchedPBelief => matched_p_belief_prob(s, c, player, state)?.into_inner(),
        StrategyKind::IteratedMaximization(k) => IteratedMaximization::new(s, c, payoffs)
            .with_level_zero(level_zero)
            .prob_a(k, player, state)?,
        StrategyKind::IteratedMatching(k) => IteratedMatching::new(s, c).prob_a(k, player, state)?.into_inner(),
        StrategyKind::PrivateHeuristic => private_heuristic(s, c, player, state)?.prob_a(),
        StrategyKind::PairHeuristic => pair_heuristic(s, c, player, state)?.prob_a(),
        StrategyKind::Cognitive => cognitive_strategy(s, c, payoffs, player, state)?.prob_a(),
        StrategyKind::AlwaysB => {
            s.check_state(state)?;
            Rational::zero()
        }
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PredictionTable {
    pub model: String,
    pub level: Option<u32>,
    /// Indexed by [`Condition::ALL`] order.
    #[serde(with = "crate::rational::serde_ratio_vec")]
    pub prob_a: Vec<Rational>,
}

impl PredictionTable {
    pub fn get(&self, condition: Condition) -> &Rational {
        &self.prob_a[condition.index()]
    }
}

/// Evaluates `kind` for the participant seat in each condition.
pub fn predict(
    kind: StrategyKind,
    conditions: &[KnowledgeCondition],
    payoffs: &PayoffParams,
) -> Result<PredictionTable, EpistemicError> {
    let mut prob_a = vec![Rational::zero(); Condition::ALL.len()];
    for cond in conditions {
        prob_a[cond.name.index()] = evaluate(kind, &cond.model, payoffs, cond.participant, cond.state_index)?;
    }
    Ok(PredictionTable {
        model: kind.name().to_string(),
        level: kind.level(),
        prob_a,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HumanEntry {
    pub n: u64,
    #[serde(with = "crate::rational::serde_ratio")]
    pub prob_a: Rational,
}

/// Empirical proportion of participants choosing `A` in each condition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HumanData {
    entries: [HumanEntry; 4],
}

impl HumanData {
    pub fn new(entries: [HumanEntry; 4]) -> Result<Self, DataError> {
        for (row, e) in entries.iter().enumerate() {
            if !rational::is_probability(&e.prob_a) {
                return Err(DataError::Row {
                    row,
                    reason: format!("prob_a {} outside [0, 1]", format_ratio(&e.prob_a)),
                });
            }
        }
        Ok(Self { entries })
    }

    /// Reads `condition,n,prob_a` rows; all four conditions must appear once.
    pub fn from_reader<R: Read>(reader: R) -> Result<Self, DataError> {
        let mut csv = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = csv.headers()?.clone();
        let column = |name: &str| {
            headers.iter().position(|h| h == name).ok_or_else(|| DataError::Row {
                row: 0,
                reason: format!("missing column `{name}`"),
            })
        };
        let (ci, ni, pi) = (column("condition")?, column("n")?, column("prob_a")?);
        let mut slots: [Option<HumanEntry>; 4] = Default::default();
        for (k, record) in csv.records().enumerate() {
            let record = record?;
            let row = k + 1;
            let field = |i: usize| record.get(i).unwrap_or("");
            let condition: Condition = field(ci).parse().map_err(|reason| DataError::Row { row, reason })?;
            let n = field(ni).parse::<u64>().map_err(|e| DataError::Row {
                row,
                reason: format!("bad count: {e}"),
            })?;
            let prob_a = parse_rational(field(pi)).map_err(|e| DataError::Row {
                row,
                reason: e.to_string(),
            })?;
            let slot = &mut slots[condition.index()];
            if slot.is_some() {
                return Err(DataError::DuplicateCondition(condition));
            }
            *slot = Some(HumanEntry { n, prob_a });
        }
        let mut entries = Vec::with_capacity(4);
        for (slot, condition) in slots.into_iter().zip(Condition::ALL) {
            entries.push(slot.ok_or(DataError::MissingCondition(condition))?);
        }
        let entries: [HumanEntry; 4] = entries.try_into().expect("four conditions");
        Self::new(entries)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self, DataError> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|source| DataError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_reader(file)
    }

    pub fn get(&self, condition: Condition) -> &HumanEntry {
        &self.entries[condition.index()]
    }

    pub fn prob_a(&self, condition: Condition) -> &Rational {
        &self.entries[condition.index()].prob_a
    }
}

/// Mean over the four conditions of the squared prediction error.
pub fn mse(prediction: &PredictionTable, human: &HumanData) -> Rational {
    let total: Rational = Condition::ALL
        .iter()
        .map(|&c| {
            let diff = prediction.get(c) - human.prob_a(c);
            &diff * &diff
        })
        .sum();
    total / rational::int(Condition::ALL.len() as i64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ModelFamily {
    RationalPBelief,
    MatchedPBelief,
    IteratedMaximization,
    IteratedMatching,
}

impl ModelFamily {
    pub const ALL: [ModelFamily; 4] = [
        ModelFamily::RationalPBelief,
        ModelFamily::MatchedPBelief,
        ModelFamily::IteratedMaximization,
        ModelFamily::IteratedMatching,
    ];

    pub fn at_level(self, level: u32) -> StrategyKind {
        match self {
            ModelFamily::RationalPBelief => StrategyKind::RationalPBelief,
            ModelFamily::MatchedPBelief => StrategyKind::MatchedPBelief,
            ModelFamily::IteratedMaximization => StrategyKind::IteratedMaximization(level),
            ModelFamily::IteratedMatching => StrategyKind::IteratedMatching(level),
        }
    }

    pub fn has_level(self) -> bool {
        matches!(self, ModelFamily::IteratedMaximization | ModelFamily::IteratedMatching)
    }
}

/// Grid search over [`LEVEL_GRID`]; ties go to the smaller level.
pub fn fit_level(
    family: ModelFamily,
    conditions: &[KnowledgeCondition],
    payoffs: &PayoffParams,
    human: &HumanData,
) -> Result<(u32, Rational), EpistemicError> {
    let mut best: Option<(u32, Rational)> = None;
    for k in LEVEL_GRID {
        let err = mse(&predict(family.at_level(k), conditions, payoffs)?, human);
        if best.as_ref().is_none_or(|(_, e)| err < *e) {
            best = Some((k, err));
        }
    }
    Ok(best.expect("nonempty grid"))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ComparisonRow {
    pub table: PredictionTable,
    #[serde(with = "crate::rational::serde_ratio")]
    pub mse: Rational,
}

/// Fits each of the four models and scores it against `human`.
pub fn compare(
    conditions: &[KnowledgeCondition],
    payoffs: &PayoffParams,
    human: &HumanData,
) -> Result<Vec<ComparisonRow>, EpistemicError> {
    ModelFamily::ALL
        .iter()
        .map(|&family| {
            let level = if family.has_level() {
                fit_level(family, conditions, payoffs, human)?.0
            } else {
                0
            };
            let table = predict(family.at_level(level), conditions, payoffs)?;
            let mse = mse(&table, human);
            Ok(ComparisonRow { table, mse })
        })
        .collect()
}

/// Summed payoff over the four conditions, minus the always-`B` baseline of
/// `c` per condition. The agent sits in the companion seat and faces a human
/// who plays `A` with the empirical proportion for that condition; payoffs are
/// evaluated at the condition's actual state.
pub fn marginal_value(
    agent: StrategyKind,
    conditions: &[KnowledgeCondition],
    human: &HumanData,
    payoffs: &PayoffParams,
) -> Result<Rational, EpistemicError> {
    let mut total = Rational::zero();
    for cond in conditions {
        let seat = cond.agent();
        let agent_a = evaluate(agent, &cond.model, payoffs, seat, cond.state_index)?;
        let state_bit = cond.model.state_bit_event().contains(cond.state_index);
        let gain = payoffs.payoff_of_a(state_bit, human.prob_a(cond.name)) - payoffs.c();
        total += agent_a * gain;
    }
    Ok(total)
}

/// Agents compared in the human-agent sweep.
pub const SWEEP_AGENTS: [StrategyKind; 3] = [
    StrategyKind::Cognitive,
    StrategyKind::PrivateHeuristic,
    StrategyKind::PairHeuristic,
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SweepRow {
    #[serde(with = "crate::rational::serde_ratio")]
    pub p_star: Rational,
    pub strategy: String,
    #[serde(with = "crate::rational::serde_ratio")]
    pub marginal_value: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SweepResult {
    #[serde(with = "crate::rational::serde_ratio_vec")]
    pub grid: Vec<Rational>,
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn value(&self, p_star: &Rational, strategy: StrategyKind) -> Option<&Rational> {
        self.rows
            .iter()
            .find(|r| r.p_star == *p_star && r.strategy == strategy.name())
            .map(|r| &r.marginal_value)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("p_star,strategy,marginal_value\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{}\n",
                format_ratio(&r.p_star),
                r.strategy,
                format_ratio(&r.marginal_value)
            ));
        }
        out
    }
}

/// `1/20, 2/20, …, 19/20`.
pub fn default_grid() -> Vec<Rational> {
    (1..20).map(|k| rational::ratio(k, 20)).collect()
}

/// Parses `start:step:end` (inclusive of `end` when it is hit exactly).
pub fn parse_grid(text: &str) -> Result<Vec<Rational>, DataError> {
    let bad = |reason: &str| DataError::Grid {
        input: text.to_string(),
        reason: reason.to_string(),
    };
    let parts: Vec<&str> = text.split(':').collect();
    let [start, step, end] = parts.as_slice() else {
        return Err(bad("expected start:step:end"));
    };
    let parse = |t: &str| parse_rational(t).map_err(|e| bad(&e.to_string()));
    let (start, step, end) = (parse(start)?, parse(step)?, parse(end)?);
    if step <= Rational::zero() {
        return Err(bad("step must be positive"));
    }
    let mut grid = Vec::new();
    let mut p = start;
    while p <= end {
        grid.push(p.clone());
        p += &step;
    }
    check_grid(&grid).map_err(|r| bad(&r))?;
    Ok(grid)
}

fn check_grid(grid: &[Rational]) -> Result<(), String> {
    if grid.is_empty() {
        return Err("empty grid".into());
    }
    if grid.iter().any(|p| !p.is_positive_fraction()) {
        return Err("every risk level must lie strictly between 0 and 1".into());
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err("grid must be strictly increasing".into());
    }
    Ok(())
}

/// Marginal value of each [`SWEEP_AGENTS`] strategy at payoffs `(1, 0, p*, 0)`
/// for every grid point, holding the human proportions fixed.
pub fn human_agent_sweep(
    grid: &[Rational],
    conditions: &[KnowledgeCondition],
    human: &HumanData,
) -> Result<SweepResult, DataError> {
    check_grid(grid).map_err(|reason| DataError::Grid {
        input: grid.iter().map(format_ratio).collect::<Vec<_>>().join(","),
        reason,
    })?;
    let per_point = grid
        .par_iter()
        .map(|p_star| -> Result<Vec<SweepRow>, DataError> {
            let payoffs = PayoffParams::from_risk(p_star.clone())?;
            SWEEP_AGENTS
                .iter()
                .map(|&agent| {
                    Ok(SweepRow {
                        p_star: p_star.clone(),
                        strategy: agent.name().to_string(),
                        marginal_value: marginal_value(agent, conditions, human, &payoffs)?,
                    })
                })
                .collect()
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SweepResult {
        grid: grid.to_vec(),
        rows: per_point.into_iter().flatten().collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{one, ratio, zero};

    fn conds() -> Vec<KnowledgeCondition> {
        thomas_conditions(ratio(1, 4)).unwrap()
    }

    fn human(values: [Rational; 4]) -> HumanData {
        HumanData::new(values.map(|prob_a| HumanEntry { n: 10, prob_a })).unwrap()
    }

    #[test]
    fn condition_table() {
        let c = conds();
        assert_eq!(c.len(), 4);
        assert_eq!(c[0].name, Condition::Private);
        assert_eq!(c[0].state, State::from_bits(&[1, 1, 0, 1, 0]));
        assert_eq!(c[0].participant, Player::Zero);
        assert_eq!(c[1].participant, Player::One);
        assert_eq!(c[2].participant, Player::Zero);
        assert_eq!(c[3].state, State::from_bits(&[1, 1]));
        assert_eq!(c[3].model.spec().variables.len(), 2);
        assert!(thomas_conditions(zero()).is_err());
        assert!(thomas_conditions(one()).is_err());
    }

    #[test]
    fn matched_and_rational_predictions() {
        let pay = PayoffParams::thomas();
        let matched = predict(StrategyKind::MatchedPBelief, &conds(), &pay).unwrap();
        assert_eq!(matched.prob_a, vec![ratio(1, 4), ratio(1, 2), ratio(1, 2), one()]);
        let rational = predict(StrategyKind::RationalPBelief, &conds(), &pay).unwrap();
        assert_eq!(rational.prob_a, vec![zero(), zero(), zero(), one()]);
        let level0 = predict(StrategyKind::IteratedMatching(0), &conds(), &pay).unwrap();
        assert_eq!(level0.prob_a, vec![one(); 4]);
    }

    #[test]
    fn mse_examples() {
        let pred = PredictionTable {
            model: "x".into(),
            level: None,
            prob_a: vec![zero(); 4],
        };
        assert_eq!(mse(&pred, &human([zero(), zero(), zero(), zero()])), zero());
        assert_eq!(mse(&pred, &human([one(), one(), one(), one()])), one());
        assert_eq!(mse(&pred, &human([one(), zero(), zero(), zero()])), ratio(1, 4));
    }

    #[test]
    fn constant_family_fits_level_zero() {
        let h = human([ratio(1, 5), ratio(1, 2), ratio(1, 2), ratio(4, 5)]);
        let (k, _) = fit_level(ModelFamily::MatchedPBelief, &conds(), &PayoffParams::thomas(), &h).unwrap();
        assert_eq!(k, 0);
    }

    #[test]
    fn fit_level_recovers_generating_level() {
        // Human data equal to level-2 iterated matching predictions is fitted
        // exactly at k = 2 unless a lower level predicts identically.
        let pay = PayoffParams::thomas();
        let target = predict(StrategyKind::IteratedMatching(2), &conds(), &pay).unwrap();
        let h = human(target.prob_a.clone().try_into().unwrap());
        let (k, err) = fit_level(ModelFamily::IteratedMatching, &conds(), &pay, &h).unwrap();
        assert_eq!(err, zero());
        assert!(k <= 2);
        let at_k = predict(StrategyKind::IteratedMatching(k), &conds(), &pay).unwrap();
        assert_eq!(at_k.prob_a, target.prob_a);
    }

    #[test]
    fn human_csv_parsing() {
        let text = "condition,n,prob_a\nprivate,20,0.25\nsecondary,20,1/2\ntertiary,20,0.5\ncommon,20,0.9\n";
        let h = HumanData::from_reader(text.as_bytes()).unwrap();
        assert_eq!(h.prob_a(Condition::Private), &ratio(1, 4));
        assert_eq!(h.prob_a(Condition::CommonKnowledge), &ratio(9, 10));
        assert_eq!(h.get(Condition::Secondary).n, 20);

        let missing = "condition,n,prob_a\nprivate,20,0.25\nsecondary,20,1/2\ntertiary,20,0.5\n";
        assert!(matches!(
            HumanData::from_reader(missing.as_bytes()),
            Err(DataError::MissingCondition(Condition::CommonKnowledge))
        ));
        let dup = "condition,n,prob_a\nprivate,1,0\nprivate,1,0\n";
        assert!(matches!(
            HumanData::from_reader(dup.as_bytes()),
            Err(DataError::DuplicateCondition(Condition::Private))
        ));
        let out_of_range = "condition,n,prob_a\nprivate,1,2\nsecondary,1,0\ntertiary,1,0\ncommon,1,0\n";
        assert!(HumanData::from_reader(out_of_range.as_bytes()).is_err());
        let bad_name = "condition,n,prob_a\nmystery,1,0\n";
        assert!(matches!(
            HumanData::from_reader(bad_name.as_bytes()),
            Err(DataError::Row { row: 1, .. })
        ));
        assert!(matches!(
            HumanData::from_path("/nonexistent/human.csv"),
            Err(DataError::Io { .. })
        ));
    }

    #[test]
    fn always_b_has_zero_marginal_value() {
        let h = human([ratio(1, 5), ratio(1, 2), ratio(1, 2), ratio(4, 5)]);
        for p in default_grid() {
            let pay = PayoffParams::from_risk(p).unwrap();
            assert_eq!(
                marginal_value(StrategyKind::AlwaysB, &conds(), &h, &pay).unwrap(),
                zero()
            );
        }
    }

    #[test]
    fn heuristic_marginal_values_by_hand() {
        // Private heuristic plays A in Secondary, Tertiary and Common; pair
        // heuristic only in Tertiary and Common.
        let h = human([ratio(1, 5), ratio(1, 2), ratio(3, 5), ratio(4, 5)]);
        let p = ratio(1, 10);
        let pay = PayoffParams::from_risk(p.clone()).unwrap();
        let private = marginal_value(StrategyKind::PrivateHeuristic, &conds(), &h, &pay).unwrap();
        assert_eq!(private, ratio(1, 2) + ratio(3, 5) + ratio(4, 5) - rational::int(3) * &p);
        let pair = marginal_value(StrategyKind::PairHeuristic, &conds(), &h, &pay).unwrap();
        assert_eq!(pair, ratio(3, 5) + ratio(4, 5) - rational::int(2) * &p);
    }

    #[test]
    fn grid_parsing() {
        assert_eq!(parse_grid("1/20:1/20:19/20").unwrap(), default_grid());
        assert_eq!(
            parse_grid("0.1:0.2:0.5").unwrap(),
            vec![ratio(1, 10), ratio(3, 10), ratio(1, 2)]
        );
        assert!(parse_grid("0:0.1:0.5").is_err());
        assert!(parse_grid("0.1:0:0.5").is_err());
        assert!(parse_grid("0.1:0.1").is_err());
        assert!(parse_grid("0.5:0.1:0.4").is_err());
        assert!(parse_grid("0.5:0.1:1").is_err());
    }

    #[test]
    fn sweep_shape_and_csv() {
        let h = human([ratio(1, 5), ratio(1, 2), ratio(1, 2), ratio(4, 5)]);
        let grid = vec![ratio(1, 4), ratio(3, 4)];
        let sweep = human_agent_sweep(&grid, &conds(), &h).unwrap();
        assert_eq!(sweep.rows.len(), 6);
        assert!(sweep.value(&ratio(1, 4), StrategyKind::Cognitive).is_some());
        let csv = sweep.to_csv();
        assert!(csv.starts_with("p_star,strategy,marginal_value\n1/4,cognitive,"));
        assert_eq!(csv.lines().count(), 7);
        assert!(human_agent_sweep(&[ratio(1, 2), ratio(1, 4)], &conds(), &h).is_err());
    }

    #[test]
    fn strategy_names_round_trip() {
        for kind in [
            StrategyKind::RationalPBelief,
            StrategyKind::MatchedPBelief,
            StrategyKind::IteratedMaximization(3),
            StrategyKind::IteratedMatching(2),
            StrategyKind::PrivateHeuristic,
            StrategyKind::PairHeuristic,
            StrategyKind::Cognitive,
            StrategyKind::AlwaysB,
        ] {
            assert_eq!(
                StrategyKind::parse(kind.name(), kind.level().unwrap_or(0)).unwrap(),
                kind
            );
        }
        assert!(StrategyKind::parse("oracle", 0).is_err());
    }
}
