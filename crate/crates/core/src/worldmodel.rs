//! Declarative generative world models.
//!
//! A [`WorldModelSpec`] is an ordered list of gated Bernoulli variables plus an
//! ordered list of guarded observation rules. Enumerating every assignment with
//! positive probability yields the [`StateSpace`]; grouping states whose
//! observation traces coincide yields each player's [`Partition`].

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::epistemic::{Event, InformationStructure};
use crate::rational::{self, format_ratio, parse_rational, Rational};
use crate::Player;

/// Name of the coordination-relevant state bit every spec must declare.
pub const STATE_BIT: &str = "x";

#[derive(Debug, Error)]
pub enum SpecError {
    #[error("variable `{0}` is declared more than once")]
    DuplicateVariable(String),
    #[error("variable `{variable}` has bias {bias} outside [0, 1]")]
    BiasOutOfRange { variable: String, bias: String },
    #[error("variable `{variable}` is gated on `{gate}`, which is not declared before it")]
    BadGate { variable: String, gate: String },
    #[error("observation rule {rule} references undeclared variable `{name}`")]
    UnknownRuleVariable { rule: usize, name: String },
    #[error("observation rule {rule} has player {player}; expected 0 or 1")]
    BadRulePlayer { rule: usize, player: u8 },
    #[error("no variable named `x` is declared")]
    MissingStateBit,
    #[error("delta {0} is outside [0, 1]")]
    DeltaOutOfRange(String),
    #[error("state {state} has {got} values but the model declares {expected} variables")]
    StateArity { state: String, got: usize, expected: usize },
    #[error("state {0} has zero probability under the model")]
    UnknownState(String),
    #[error("cannot parse state `{0}`: expected comma-separated 0/1 values")]
    BadStateText(String),
    #[error("bad event predicate `{input}`: {reason}")]
    BadPredicate { input: String, reason: String },
    #[error("variable `{variable}`: {source}")]
    BadBias {
        variable: String,
        source: rational::ParseRationalError,
    },
    #[error("cannot read model file {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed model JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unknown builtin model `{0}`")]
    UnknownBuiltin(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VariableSpec {
    pub name: String,
    /// Bernoulli parameter used when every gate variable is 1.
    pub bias: Rational,
    /// Earlier variables that must all be 1; otherwise this variable is 0.
    pub gate: Vec<String>,
}

impl VariableSpec {
    pub fn new(name: &str, bias: Rational) -> Self {
        Self {
            name: name.to_string(),
            bias,
            gate: Vec::new(),
        }
    }

    pub fn gated(name: &str, bias: Rational, gate: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            bias,
            gate: gate.iter().map(|g| g.to_string()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObservationRule {
    /// Fires when every listed variable is 1. Empty guards always fire.
    pub guard: Vec<String>,
    pub player: Player,
    pub observed: Vec<String>,
}

impl ObservationRule {
    pub fn new(guard: &[&str], player: Player, observed: &[&str]) -> Self {
        Self {
            guard: guard.iter().map(|g| g.to_string()).collect(),
            player,
            observed: observed.iter().map(|o| o.to_string()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct WorldModelSpec {
    pub variables: Vec<VariableSpec>,
    pub observations: Vec<ObservationRule>,
}

/// Index-resolved form of a validated spec.
#[derive(Debug, Clone)]
struct Compiled {
    gates: Vec<Vec<usize>>,
    rules: Vec<CompiledRule>,
}

#[derive(Debug, Clone)]
struct CompiledRule {
    guard: Vec<usize>,
    player: Player,
    observed: Vec<usize>,
}

impl WorldModelSpec {
    pub fn variable_index(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v.name == name)
    }

    pub fn validate(&self) -> Result<(), SpecError> {
        self.compile().map(|_| ())
    }

    fn compile(&self) -> Result<Compiled, SpecError> {
        let mut index = HashMap::new();
        let mut gates = Vec::with_capacity(self.variables.len());
        for (pos, var) in self.variables.iter().enumerate() {
            if !rational::is_probability(&var.bias) {
                return Err(SpecError::BiasOutOfRange {
                    variable: var.name.clone(),
                    bias: format_ratio(&var.bias),
                });
            }
            let gate = var
                .gate
                .iter()
                .map(|g| {
                    index.get(g.as_str()).copied().ok_or_else(|| SpecError::BadGate {
                        variable: var.name.clone(),
                        gate: g.clone(),
                    })
                })
                .collect::<Result<Vec<usize>, _>>()?;
            if index.insert(var.name.as_str(), pos).is_some() {
                return Err(SpecError::DuplicateVariable(var.name.clone()));
            }
            gates.push(gate);
        }
        if !index.contains_key(STATE_BIT) {
            return Err(SpecError::MissingStateBit);
        }
        let resolve = |rule: usize, names: &[String]| {
            names
                .iter()
                .map(|n| {
                    index
                        .get(n.as_str())
                        .copied()
                        .ok_or_else(|| SpecError::UnknownRuleVariable { rule, name: n.clone() })
                })
                .collect::<Result<Vec<usize>, _>>()
        };
        let rules = self
            .observations
            .iter()
            .enumerate()
            .map(|(r, rule)| {
                Ok(CompiledRule {
                    guard: resolve(r, &rule.guard)?,
                    player: rule.player,
                    observed: resolve(r, &rule.observed)?,
                })
            })
            .collect::<Result<Vec<_>, SpecError>>()?;
        Ok(Compiled { gates, rules })
    }

    /// Returns a copy with the bias of `x` replaced.
    pub fn with_state_bit_bias(&self, delta: Rational) -> Result<Self, SpecError> {
        check_delta(&delta)?;
        let mut spec = self.clone();
        let var = spec
            .variables
            .iter_mut()
            .find(|v| v.name == STATE_BIT)
            .ok_or(SpecError::MissingStateBit)?;
        var.bias = delta;
        Ok(spec)
    }

    pub fn from_json(text: &str) -> Result<Self, SpecError> {
        let file: SpecFile = serde_json::from_str(text)?;
        file.into_spec()
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self, SpecError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| SpecError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        let file = SpecFile::from_spec(self);
        serde_json::to_string_pretty(&file).expect("spec file serialises")
    }
}

fn check_delta(delta: &Rational) -> Result<(), SpecError> {
    if rational::is_probability(delta) {
        Ok(())
    } else {
        Err(SpecError::DeltaOutOfRange(format_ratio(delta)))
    }
}

/// The messenger model: a messenger may visit either player, reveal `x`, and
/// sometimes tell one player whether it visited the other.
pub fn builtin_messenger(delta: Rational) -> Result<WorldModelSpec, SpecError> {
    check_delta(&delta)?;
    let half = rational::ratio(1, 2);
    Ok(WorldModelSpec {
        variables: vec![
            VariableSpec::new("x", delta),
            VariableSpec::new("visit0", half.clone()),
            VariableSpec::new("visit1", half.clone()),
            VariableSpec::gated("tell_plan0", half.clone(), &["visit0"]),
            VariableSpec::gated("tell_plan1", half, &["visit1"]),
        ],
        observations: vec![
            ObservationRule::new(&["visit0"], Player::Zero, &["x"]),
            ObservationRule::new(&["visit0", "tell_plan0"], Player::Zero, &["visit1", "tell_plan1"]),
            ObservationRule::new(&["visit1"], Player::One, &["x", "visit0"]),
            ObservationRule::new(&["visit1", "tell_plan1"], Player::One, &["tell_plan0"]),
        ],
    })
}

/// The loudspeaker model: a public broadcast reveals `x` to both players.
pub fn builtin_loudspeaker(delta: Rational) -> Result<WorldModelSpec, SpecError> {
    check_delta(&delta)?;
    Ok(WorldModelSpec {
        variables: vec![
            VariableSpec::new("x", delta),
            VariableSpec::new("broadcast", rational::ratio(1, 2)),
        ],
        observations: vec![
            ObservationRule::new(&["broadcast"], Player::Zero, &["x"]),
            ObservationRule::new(&["broadcast"], Player::One, &["x"]),
        ],
    })
}

/// Resolves `builtin:messenger`, `builtin:loudspeaker` or a JSON file path.
/// `delta` overrides the bias of `x`; builtins default to 1/4.
pub fn load_model_spec(source: &str, delta: Option<Rational>) -> Result<WorldModelSpec, SpecError> {
    if let Some(name) = source.strip_prefix("builtin:") {
        let delta = delta.unwrap_or_else(|| rational::ratio(1, 4));
        return match name {
            "messenger" => builtin_messenger(delta),
            "loudspeaker" => builtin_loudspeaker(delta),
            other => Err(SpecError::UnknownBuiltin(other.to_string())),
        };
    }
    let spec = WorldModelSpec::from_path(source)?;
    match delta {
        Some(delta) => spec.with_state_bit_bias(delta),
        None => Ok(spec),
    }
}

/// A full assignment, one bit per declared variable in declaration order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct State(pub Vec<bool>);

impl State {
    pub fn from_bits(bits: &[u8]) -> Self {
        State(bits.iter().map(|&b| b != 0).collect())
    }

    pub fn get(&self, var: usize) -> bool {
        self.0[var]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

fn write_bits(f: &mut fmt::Formatter<'_>, bits: &[bool]) -> fmt::Result {
    write!(f, "(")?;
    for (k, b) in bits.iter().enumerate() {
        if k > 0 {
            write!(f, ",")?;
        }
        write!(f, "{}", u8::from(*b))?;
    }
    write!(f, ")")
}

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_bits(f, &self.0)
    }
}

impl FromStr for State {
    type Err = SpecError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let body = s.trim().trim_start_matches('(').trim_end_matches(')');
        body.split(',')
            .map(|tok| match tok.trim() {
                "0" => Ok(false),
                "1" => Ok(true),
                _ => Err(SpecError::BadStateText(s.to_string())),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(State)
    }
}

/// Values revealed by one fired rule.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Observation {
    pub rule: usize,
    pub values: Vec<bool>,
}

/// Ordered list of everything a player observes at a state.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct ObservationTrace(pub Vec<Observation>);

impl ObservationTrace {
    /// Observed values only, without rule tags.
    pub fn values(&self) -> Vec<Vec<bool>> {
        self.0.iter().map(|o| o.values.clone()).collect()
    }
}

impl fmt::Display for ObservationTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (k, obs) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write_bits(f, &obs.values)?;
        }
        write!(f, "]")
    }
}

/// Positive-probability states with their exact measures.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateSpace {
    states: Vec<State>,
    measure: Vec<Rational>,
}

impl StateSpace {
    pub fn states(&self) -> &[State] {
        &self.states
    }

    pub fn measures(&self) -> &[Rational] {
        &self.measure
    }

    pub fn measure(&self, index: usize) -> &Rational {
        &self.measure[index]
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn index_of(&self, state: &State) -> Option<usize> {
        self.states.binary_search(state).ok()
    }
}

/// Enumerates every gate-consistent assignment of positive probability, in
/// lexicographic order of the assignment tuple.
pub fn enumerate_states(spec: &WorldModelSpec) -> Result<StateSpace, SpecError> {
    let compiled = spec.compile()?;
    let mut partial: Vec<(Vec<bool>, Rational)> = vec![(Vec::new(), Rational::one())];
    for (var, gate) in spec.variables.iter().zip(&compiled.gates) {
        let mut next = Vec::with_capacity(partial.len() * 2);
        for (bits, weight) in partial {
            if !gate.iter().all(|&g| bits[g]) {
                let mut off = bits;
                off.push(false);
                next.push((off, weight));
                continue;
            }
            let p_zero = Rational::one() - &var.bias;
            if !p_zero.is_zero() {
                let mut b = bits.clone();
                b.push(false);
                next.push((b, &weight * p_zero));
            }
            if !var.bias.is_zero() {
                let mut b = bits;
                b.push(true);
                next.push((b, weight * &var.bias));
            }
        }
        partial = next;
    }
    partial.sort_by(|a, b| a.0.cmp(&b.0));
    let (states, measure) = partial.into_iter().map(|(b, w)| (State(b), w)).unzip();
    Ok(StateSpace { states, measure })
}

fn trace(compiled: &Compiled, player: Player, state: &State) -> ObservationTrace {
    ObservationTrace(
        compiled
            .rules
            .iter()
            .enumerate()
            .filter(|(_, r)| r.player == player && r.guard.iter().all(|&g| state.get(g)))
            .map(|(k, r)| Observation {
                rule: k,
                values: r.observed.iter().map(|&v| state.get(v)).collect(),
            })
            .collect(),
    )
}

/// Replays the observation rules for `player` at `state`.
pub fn run_observations(spec: &WorldModelSpec, player: Player, state: &State) -> Result<ObservationTrace, SpecError> {
    let compiled = spec.compile()?;
    check_arity(spec, state)?;
    Ok(trace(&compiled, player, state))
}

fn check_arity(spec: &WorldModelSpec, state: &State) -> Result<(), SpecError> {
    if state.len() != spec.variables.len() {
        return Err(SpecError::StateArity {
            state: state.to_string(),
            got: state.len(),
            expected: spec.variables.len(),
        });
    }
    Ok(())
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PartitionError {
    #[error("state {0} appears in more than one block")]
    Overlap(usize),
    #[error("state {0} is not covered by any block")]
    Uncovered(usize),
    #[error("state {0} is outside the state space")]
    OutOfRange(usize),
    #[error("partition contains an empty block")]
    EmptyBlock,
}

/// Disjoint, exhaustive, nonempty blocks over `0..n`, members sorted, blocks
/// ordered by their smallest member.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Partition {
    blocks: Vec<Vec<usize>>,
    #[serde(skip)]
    block_of: Vec<usize>,
}

impl Partition {
    pub fn from_blocks(num_states: usize, blocks: Vec<Vec<usize>>) -> Result<Self, PartitionError> {
        let mut block_of = vec![usize::MAX; num_states];
        for (b, block) in blocks.iter().enumerate() {
            if block.is_empty() {
                return Err(PartitionError::EmptyBlock);
            }
            for &s in block {
                let slot = block_of.get_mut(s).ok_or(PartitionError::OutOfRange(s))?;
                if *slot != usize::MAX {
                    return Err(PartitionError::Overlap(s));
                }
                *slot = b;
            }
        }
        if let Some(s) = block_of.iter().position(|&b| b == usize::MAX) {
            return Err(PartitionError::Uncovered(s));
        }
        Ok(Self::from_labels(&block_of))
    }

    /// Builds the partition whose blocks are the label classes.
    pub fn from_labels<L: Eq + std::hash::Hash>(labels: &[L]) -> Self {
        let mut ids: HashMap<&L, usize> = HashMap::new();
        let mut blocks: Vec<Vec<usize>> = Vec::new();
        let mut block_of = Vec::with_capacity(labels.len());
        for (s, label) in labels.iter().enumerate() {
            let id = *ids.entry(label).or_insert_with(|| {
                blocks.push(Vec::new());
                blocks.len() - 1
            });
            blocks[id].push(s);
            block_of.push(id);
        }
        Self { blocks, block_of }
    }

    /// The partition with a single block covering every state.
    pub fn trivial(num_states: usize) -> Self {
        Self::from_labels(&vec![(); num_states])
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn block_of(&self, state: usize) -> usize {
        self.block_of[state]
    }

    pub fn block_containing(&self, state: usize) -> &[usize] {
        &self.blocks[self.block_of[state]]
    }

    pub fn num_states(&self) -> usize {
        self.block_of.len()
    }
}

/// Groups the states of `space` by the observation trace `player` receives.
pub fn build_information_partition(
    spec: &WorldModelSpec,
    space: &StateSpace,
    player: Player,
) -> Result<Partition, SpecError> {
    let compiled = spec.compile()?;
    Ok(partition_from_compiled(&compiled, space, player))
}

fn partition_from_compiled(compiled: &Compiled, space: &StateSpace, player: Player) -> Partition {
    let traces: Vec<ObservationTrace> = space.states().iter().map(|s| trace(compiled, player, s)).collect();
    Partition::from_labels(&traces)
}

/// A validated spec together with its state space, partitions and the
/// resulting information structure.
#[derive(Debug, Clone)]
pub struct WorldModel {
    spec: WorldModelSpec,
    compiled: Compiled,
    space: StateSpace,
    structure: InformationStructure,
}

impl WorldModel {
    pub fn build(spec: WorldModelSpec) -> Result<Self, SpecError> {
        let compiled = spec.compile()?;
        let space = enumerate_states(&spec)?;
        let partitions = Player::BOTH.map(|p| partition_from_compiled(&compiled, &space, p));
        let structure = InformationStructure::new(space.measures().to_vec(), partitions)
            .expect("enumerated spaces are valid information structures");
        Ok(Self {
            spec,
            compiled,
            space,
            structure,
        })
    }

    pub fn spec(&self) -> &WorldModelSpec {
        &self.spec
    }

    pub fn space(&self) -> &StateSpace {
        &self.space
    }

    pub fn structure(&self) -> &InformationStructure {
        &self.structure
    }

    pub fn partition(&self, player: Player) -> &Partition {
        self.structure.partition(player)
    }

    pub fn run_observations(&self, player: Player, state: &State) -> ObservationTrace {
        trace(&self.compiled, player, state)
    }

    pub fn state_index(&self, state: &State) -> Result<usize, SpecError> {
        check_arity(&self.spec, state)?;
        self.space
            .index_of(state)
            .ok_or_else(|| SpecError::UnknownState(state.to_string()))
    }

    pub fn state(&self, index: usize) -> &State {
        &self.space.states()[index]
    }

    /// The event where every listed variable takes the given value.
    pub fn event_where(&self, conditions: &[(&str, bool)]) -> Result<Event, SpecError> {
        let resolved = conditions
            .iter()
            .map(|(name, value)| {
                self.spec
                    .variable_index(name)
                    .map(|i| (i, *value))
                    .ok_or_else(|| SpecError::BadPredicate {
                        input: name.to_string(),
                        reason: "undeclared variable".to_string(),
                    })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(self
            .space
            .states()
            .iter()
            .enumerate()
            .filter(|(_, s)| resolved.iter().all(|&(i, v)| s.get(i) == v))
            .map(|(k, _)| k)
            .collect())
    }

    /// `C = {ω : x(ω) = 1}`.
    pub fn state_bit_event(&self) -> Event {
        self.event_where(&[(STATE_BIT, true)])
            .expect("validated specs declare x")
    }

    /// Parses a conjunction such as `x=1` or `x=1 & visit0=0`; `,` and `∧`
    /// are accepted as separators too.
    pub fn parse_event(&self, predicate: &str) -> Result<Event, SpecError> {
        let bad = |reason: &str| SpecError::BadPredicate {
            input: predicate.to_string(),
            reason: reason.to_string(),
        };
        let mut conditions = Vec::new();
        for clause in predicate.split(['&', ',', '∧']) {
            let clause = clause.trim();
            if clause.is_empty() {
                continue;
            }
            let (name, value) = clause.split_once('=').ok_or_else(|| bad("expected var=0 or var=1"))?;
            let value = match value.trim() {
                "0" => false,
                "1" => true,
                _ => return Err(bad("values must be 0 or 1")),
            };
            let name = name.trim();
            if self.spec.variable_index(name).is_none() {
                return Err(bad(&format!("undeclared variable `{name}`")));
            }
            conditions.push((name, value));
        }
        if conditions.is_empty() {
            return Err(bad("empty predicate"));
        }
        self.event_where(&conditions)
    }
}

// JSON file format.

#[derive(Debug, Serialize, Deserialize)]
struct SpecFile {
    variables: Vec<VariableFile>,
    #[serde(default)]
    observations: Vec<RuleFile>,
}

#[derive(Debug, Serialize, Deserialize)]
struct VariableFile {
    name: String,
    bias: BiasText,
    #[serde(default)]
    gate: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum BiasText {
    Text(String),
    Number(serde_json::Number),
}

#[derive(Debug, Serialize, Deserialize)]
struct RuleFile {
    #[serde(default)]
    guard: Vec<String>,
    player: u8,
    observed: Vec<String>,
}

impl SpecFile {
    fn into_spec(self) -> Result<WorldModelSpec, SpecError> {
        let variables = self
            .variables
            .into_iter()
            .map(|v| {
                let text = match &v.bias {
                    BiasText::Text(t) => t.clone(),
                    BiasText::Number(n) => n.to_string(),
                };
                let bias = parse_rational(&text).map_err(|source| SpecError::BadBias {
                    variable: v.name.clone(),
                    source,
                })?;
                Ok(VariableSpec {
                    name: v.name,
                    bias,
                    gate: v.gate,
                })
            })
            .collect::<Result<Vec<_>, SpecError>>()?;
        let observations = self
            .observations
            .into_iter()
            .enumerate()
            .map(|(rule, r)| {
                let player =
                    Player::from_index(r.player as usize).ok_or(SpecError::BadRulePlayer { rule, player: r.player })?;
                Ok(ObservationRule {
                    guard: r.guard,
                    player,
                    observed: r.observed,
                })
            })
            .collect::<Result<Vec<_>, SpecError>>()?;
        let spec = WorldModelSpec {
            variables,
            observations,
        };
        spec.validate()?;
        Ok(spec)
    }

    fn from_spec(spec: &WorldModelSpec) -> Self {
        SpecFile {
            variables: spec
                .variables
                .iter()
                .map(|v| VariableFile {
                    name: v.name.clone(),
                    bias: BiasText::Text(format_ratio(&v.bias)),
                    gate: v.gate.clone(),
                })
                .collect(),
            observations: spec
                .observations
                .iter()
                .map(|r| RuleFile {
                    guard: r.guard.clone(),
                    player: r.player.index() as u8,
                    observed: r.observed.clone(),
                })
                .collect(),
        }
    }
}

/// Sorted state tuples per block, blocks sorted by their first tuple.
pub fn describe_partition(model: &WorldModel, player: Player) -> Vec<Vec<State>> {
    let mut blocks: Vec<Vec<State>> = model
        .partition(player)
        .blocks()
        .iter()
        .map(|b| {
            let mut states: Vec<State> = b.iter().map(|&s| model.state(s).clone()).collect();
            states.sort();
            states
        })
        .collect();
    blocks.sort();
    blocks
}

/// Checks that no two distinct states of a partition block produce different
/// traces, and no two blocks share a trace.
pub fn partition_matches_traces(model: &WorldModel, player: Player) -> bool {
    let partition = model.partition(player);
    let mut seen = HashSet::new();
    partition.blocks().iter().all(|block| {
        let first = model.run_observations(player, model.state(block[0]));
        block
            .iter()
            .all(|&s| model.run_observations(player, model.state(s)) == first)
            && seen.insert(first)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    fn loudspeaker() -> WorldModel {
        WorldModel::build(builtin_loudspeaker(ratio(1, 4)).unwrap()).unwrap()
    }

    fn messenger() -> WorldModel {
        WorldModel::build(builtin_messenger(ratio(1, 4)).unwrap()).unwrap()
    }

    fn st(bits: &[u8]) -> State {
        State::from_bits(bits)
    }

    #[test]
    fn loudspeaker_measures() {
        let m = loudspeaker();
        let space = m.space();
        assert_eq!(space.len(), 4);
        let mu = |b: &[u8]| space.measure(space.index_of(&st(b)).unwrap()).clone();
        assert_eq!(mu(&[1, 1]), ratio(1, 8));
        assert_eq!(mu(&[1, 0]), ratio(1, 8));
        assert_eq!(mu(&[0, 1]), ratio(3, 8));
        assert_eq!(mu(&[0, 0]), ratio(3, 8));
    }

    /// Independent count: filter all 32 tuples by the gate constraints.
    #[test]
    fn messenger_state_count_matches_brute_force() {
        let brute = (0u32..32)
            .map(|m| (0..5).map(|k| m >> (4 - k) & 1 == 1).collect::<Vec<_>>())
            .filter(|b| !(b[3] && !b[1]) && !(b[4] && !b[2]))
            .count();
        assert_eq!(brute, 18);
        let m = messenger();
        assert_eq!(m.space().len(), brute);
        let total: Rational = m.space().measures().iter().sum();
        assert_eq!(total, Rational::one());
        for s in m.space().states() {
            assert!(!(s.get(3) && !s.get(1)));
            assert!(!(s.get(4) && !s.get(2)));
        }
    }

    #[test]
    fn degenerate_bias_collapses_space() {
        let spec = WorldModelSpec {
            variables: vec![VariableSpec::new("x", Rational::one())],
            observations: vec![],
        };
        let space = enumerate_states(&spec).unwrap();
        assert_eq!(space.states(), &[st(&[1])]);
        assert_eq!(space.measure(0), &Rational::one());
    }

    #[test]
    fn run_observations_examples() {
        let spec = builtin_messenger(ratio(1, 4)).unwrap();
        let t = run_observations(&spec, Player::Zero, &st(&[1, 1, 0, 1, 0])).unwrap();
        assert_eq!(t.values(), vec![vec![true], vec![false, false]]);
        assert_eq!(t.to_string(), "[(1),(0,0)]");

        let spec = builtin_loudspeaker(ratio(1, 4)).unwrap();
        let t = run_observations(&spec, Player::One, &st(&[1, 0])).unwrap();
        assert!(t.0.is_empty());
        let t = run_observations(&spec, Player::Zero, &st(&[1, 1])).unwrap();
        assert_eq!(t.to_string(), "[(1)]");
        assert!(run_observations(&spec, Player::Zero, &st(&[1])).is_err());
    }

    #[test]
    fn loudspeaker_partitions() {
        let m = loudspeaker();
        let expected = vec![vec![st(&[0, 0]), st(&[1, 0])], vec![st(&[0, 1])], vec![st(&[1, 1])]];
        assert_eq!(describe_partition(&m, Player::Zero), expected);
        assert_eq!(describe_partition(&m, Player::One), expected);
    }

    #[test]
    fn no_rules_means_trivial_partition() {
        let mut spec = builtin_messenger(ratio(1, 4)).unwrap();
        spec.observations.clear();
        let m = WorldModel::build(spec).unwrap();
        for p in Player::BOTH {
            assert_eq!(m.partition(p).blocks().len(), 1);
            assert_eq!(m.partition(p).blocks()[0].len(), m.space().len());
        }
    }

    #[test]
    fn removing_one_players_rules_collapses_only_that_player() {
        let mut spec = builtin_messenger(ratio(1, 4)).unwrap();
        spec.observations.retain(|r| r.player == Player::Zero);
        let m = WorldModel::build(spec).unwrap();
        assert_eq!(m.partition(Player::One).blocks().len(), 1);
        assert!(m.partition(Player::Zero).blocks().len() > 1);
    }

    #[test]
    fn partitions_agree_with_traces() {
        for m in [loudspeaker(), messenger()] {
            for p in Player::BOTH {
                assert!(partition_matches_traces(&m, p));
            }
        }
    }

    #[test]
    fn builtin_shapes() {
        let l = builtin_loudspeaker(ratio(1, 4)).unwrap();
        assert_eq!((l.variables.len(), l.observations.len()), (2, 2));
        let m = builtin_messenger(ratio(1, 4)).unwrap();
        assert_eq!((m.variables.len(), m.observations.len()), (5, 4));
        let mut half = builtin_messenger(ratio(1, 2)).unwrap();
        assert_eq!(half.variables[0].bias, ratio(1, 2));
        half.variables[0].bias = ratio(1, 4);
        assert_eq!(half, m);
        assert!(matches!(
            builtin_messenger(ratio(5, 4)),
            Err(SpecError::DeltaOutOfRange(_))
        ));
    }

    #[test]
    fn validation_errors_name_the_culprit() {
        let dup = WorldModelSpec {
            variables: vec![VariableSpec::new("x", ratio(1, 2)), VariableSpec::new("x", ratio(1, 2))],
            observations: vec![],
        };
        assert!(matches!(dup.validate(), Err(SpecError::DuplicateVariable(n)) if n == "x"));

        let forward_gate = WorldModelSpec {
            variables: vec![
                VariableSpec::gated("x", ratio(1, 2), &["y"]),
                VariableSpec::new("y", ratio(1, 2)),
            ],
            observations: vec![],
        };
        assert!(matches!(forward_gate.validate(), Err(SpecError::BadGate { variable, .. }) if variable == "x"));

        let no_x = WorldModelSpec {
            variables: vec![VariableSpec::new("y", ratio(1, 2))],
            observations: vec![],
        };
        assert!(matches!(no_x.validate(), Err(SpecError::MissingStateBit)));

        let bad_bias = WorldModelSpec {
            variables: vec![VariableSpec::new("x", ratio(3, 2))],
            observations: vec![],
        };
        assert!(matches!(bad_bias.validate(), Err(SpecError::BiasOutOfRange { .. })));

        let bad_rule = WorldModelSpec {
            variables: vec![VariableSpec::new("x", ratio(1, 2))],
            observations: vec![ObservationRule::new(&["z"], Player::Zero, &["x"])],
        };
        assert!(matches!(
            bad_rule.validate(),
            Err(SpecError::UnknownRuleVariable { rule: 0, .. })
        ));
    }

    #[test]
    fn json_round_trip_and_decimal_bias() {
        let spec = builtin_messenger(ratio(1, 4)).unwrap();
        assert_eq!(WorldModelSpec::from_json(&spec.to_json()).unwrap(), spec);

        let text = r#"{
            "variables": [
                {"name": "x", "bias": "0.25"},
                {"name": "broadcast", "bias": 0.5, "gate": []}
            ],
            "observations": [
                {"guard": ["broadcast"], "player": 0, "observed": ["x"]},
                {"guard": ["broadcast"], "player": 1, "observed": ["x"]}
            ]
        }"#;
        let parsed = WorldModelSpec::from_json(text).unwrap();
        assert_eq!(parsed, builtin_loudspeaker(ratio(1, 4)).unwrap());

        let bad_player = r#"{"variables":[{"name":"x","bias":"1/2"}],
            "observations":[{"guard":[],"player":2,"observed":["x"]}]}"#;
        assert!(matches!(
            WorldModelSpec::from_json(bad_player),
            Err(SpecError::BadRulePlayer { rule: 0, player: 2 })
        ));
    }

    #[test]
    fn event_predicates() {
        let m = messenger();
        let c = m.parse_event("x=1").unwrap();
        assert_eq!(c.len(), 9);
        assert_eq!(c, m.state_bit_event());
        let both = m.parse_event("x=1 & visit0=1").unwrap();
        assert_eq!(both.len(), 6);
        assert!(m.parse_event("y=1").is_err());
        assert!(m.parse_event("x=2").is_err());
        assert!(m.parse_event("").is_err());
    }

    #[test]
    fn state_text() {
        assert_eq!("1,1,0".parse::<State>().unwrap(), st(&[1, 1, 0]));
        assert_eq!("(1,0)".parse::<State>().unwrap(), st(&[1, 0]));
        assert!("1,2".parse::<State>().is_err());
        let m = loudspeaker();
        assert!(matches!(
            m.state_index(&st(&[1, 1, 1])),
            Err(SpecError::StateArity { .. })
        ));
    }

    #[test]
    fn partition_from_blocks_validates() {
        assert!(Partition::from_blocks(3, vec![vec![0, 2], vec![1]]).is_ok());
        assert_eq!(
            Partition::from_blocks(3, vec![vec![0, 1], vec![1, 2]]),
            Err(PartitionError::Overlap(1))
        );
        assert_eq!(
            Partition::from_blocks(3, vec![vec![0, 1]]),
            Err(PartitionError::Uncovered(2))
        );
        assert_eq!(
            Partition::from_blocks(2, vec![vec![0, 1, 5]]),
            Err(PartitionError::OutOfRange(5))
        );
        assert_eq!(
            Partition::from_blocks(1, vec![vec![0], vec![]]),
            Err(PartitionError::EmptyBlock)
        );
    }
}
