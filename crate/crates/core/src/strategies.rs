//! Coordination strategies for the coordinated-attack game.
//!
//! Every strategy maps `(structure, player, state)` to either a pure action or
//! a probability of playing `A`. The target event `C` (normally `{x = 1}`) is
//! passed explicitly.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use num_traits::{One, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::epistemic::{
    common_p_belief, conditional_belief, evident_ladder, EpistemicError, Event, InformationStructure,
};
use crate::rational::{self, format_ratio, parse_rational, Rational};
use crate::Player;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PayoffError {
    #[error("payoffs must satisfy a > c > max(b, d); got a={a}, b={b}, c={c}, d={d}")]
    Ordering { a: String, b: String, c: String, d: String },
    #[error("expected four comma-separated payoffs a,b,c,d, got `{0}`")]
    Format(String),
    #[error(transparent)]
    Parse(#[from] rational::ParseRationalError),
}

/// `(a, b, c, d)`: coordinated `A` when `x = 1`, mismatched `A`, safe `B`, and
/// coordinated `A` when `x = 0`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PayoffParams {
    #[serde(with = "crate::rational::serde_ratio")]
    a: Rational,
    #[serde(with = "crate::rational::serde_ratio")]
    b: Rational,
    #[serde(with = "crate::rational::serde_ratio")]
    c: Rational,
    #[serde(with = "crate::rational::serde_ratio")]
    d: Rational,
}

impl PayoffParams {
    pub fn new(a: Rational, b: Rational, c: Rational, d: Rational) -> Result<Self, PayoffError> {
        if a > c && c > b && c > d {
            Ok(Self { a, b, c, d })
        } else {
            Err(PayoffError::Ordering {
                a: format_ratio(&a),
                b: format_ratio(&b),
                c: format_ratio(&c),
                d: format_ratio(&d),
            })
        }
    }

    /// `(1.1, 0, 1, 0.4)`, the first payoff condition of the Thomas experiments.
    pub fn thomas() -> Self {
        Self::new(
            rational::ratio(11, 10),
            rational::zero(),
            rational::one(),
            rational::ratio(2, 5),
        )
        .expect("valid payoffs")
    }

    /// `(1, 0, p*, 0)`, whose risk threshold is exactly `p*`.
    pub fn from_risk(p_star: Rational) -> Result<Self, PayoffError> {
        Self::new(rational::one(), rational::zero(), p_star, rational::zero())
    }

    pub fn a(&self) -> &Rational {
        &self.a
    }

    pub fn b(&self) -> &Rational {
        &self.b
    }

    pub fn c(&self) -> &Rational {
        &self.c
    }

    pub fn d(&self) -> &Rational {
        &self.d
    }

    /// `p* = (c − b) / (a − b)`.
    pub fn risk_threshold(&self) -> Rational {
        (&self.c - &self.b) / (&self.a - &self.b)
    }

    /// Expected payoff of `A` against a companion playing `A` with
    /// probability `companion`, in a state where `x = state_bit`.
    pub fn payoff_of_a(&self, state_bit: bool, companion: &Rational) -> Rational {
        let matched = if state_bit { &self.a } else { &self.d };
        companion * matched + (Rational::one() - companion) * &self.b
    }
}

impl FromStr for PayoffParams {
    type Err = PayoffError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(',').collect();
        let [a, b, c, d] = parts.as_slice() else {
            return Err(PayoffError::Format(s.to_string()));
        };
        Self::new(
            parse_rational(a)?,
            parse_rational(b)?,
            parse_rational(c)?,
            parse_rational(d)?,
        )
    }
}

/// `p* = (c − b) / (a − b)`.
pub fn risk_threshold(payoffs: &PayoffParams) -> Rational {
    payoffs.risk_threshold()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Action {
    A,
    B,
}

impl Action {
    pub fn prob_a(self) -> Rational {
        match self {
            Action::A => Rational::one(),
            Action::B => Rational::zero(),
        }
    }

    fn from_indicator(play_a: bool) -> Self {
        if play_a {
            Action::A
        } else {
            Action::B
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Action::A => "A",
            Action::B => "B",
        })
    }
}

/// Probability of playing `A`, always in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct ActionProbability(Rational);

impl ActionProbability {
    pub fn new(prob_a: Rational) -> Option<Self> {
        rational::is_probability(&prob_a).then_some(Self(prob_a))
    }

    pub fn value(&self) -> &Rational {
        &self.0
    }

    pub fn into_inner(self) -> Rational {
        self.0
    }
}

fn prob(value: Rational) -> ActionProbability {
    ActionProbability::new(value).expect("belief-derived values lie in [0, 1]")
}

/// Plays `A` iff the perceived maximal common p-belief strictly exceeds `p*`.
pub fn rational_p_belief_action(
    s: &InformationStructure,
    target: &Event,
    payoffs: &PayoffParams,
    player: Player,
    state: usize,
) -> Result<Action, EpistemicError> {
    let level = common_p_belief(s, target, player, state)?;
    Ok(Action::from_indicator(level > payoffs.risk_threshold()))
}

/// Plays `A` with probability equal to the perceived maximal common p-belief.
pub fn matched_p_belief_prob(
    s: &InformationStructure,
    target: &Event,
    player: Player,
    state: usize,
) -> Result<ActionProbability, EpistemicError> {
    common_p_belief(s, target, player, state).map(prob)
}

/// Level-0 rule of the iterated maximization model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LevelZero {
    /// `A` iff `P_i(x = 1 | ω) > p*`.
    #[default]
    Threshold,
    AlwaysA,
    /// `A` and `B` with probability 1/2 each.
    Uniform,
}

/// Level-k best response against a level-(k−1) companion, memoised per
/// `(player, level, state)`.
pub struct IteratedMaximization<'a> {
    structure: &'a InformationStructure,
    target: &'a Event,
    payoffs: &'a PayoffParams,
    level_zero: LevelZero,
    memo: HashMap<(Player, u32, usize), Rational>,
}

impl<'a> IteratedMaximization<'a> {
    pub fn new(structure: &'a InformationStructure, target: &'a Event, payoffs: &'a PayoffParams) -> Self {
        Self {
            structure,
            target,
            payoffs,
            level_zero: LevelZero::default(),
            memo: HashMap::new(),
        }
    }

    pub fn with_level_zero(mut self, level_zero: LevelZero) -> Self {
        self.level_zero = level_zero;
        self.memo.clear();
        self
    }

    /// `f_i^k(ω)` as a probability of `A`. Only level 0 under
    /// [`LevelZero::Uniform`] is not 0 or 1.
    pub fn prob_a(&mut self, level: u32, player: Player, state: usize) -> Result<Rational, EpistemicError> {
        self.structure.check_state(state)?;
        Ok(self.eval(level, player, state))
    }

    pub fn action(&mut self, level: u32, player: Player, state: usize) -> Result<Action, EpistemicError> {
        Ok(Action::from_indicator(self.prob_a(level, player, state)?.is_one()))
    }

    fn eval(&mut self, level: u32, player: Player, state: usize) -> Rational {
        if let Some(v) = self.memo.get(&(player, level, state)) {
            return v.clone();
        }
        let s = self.structure;
        let value = if level == 0 {
            match self.level_zero {
                LevelZero::Threshold => {
                    let belief = s.belief_in(player, self.target, state);
                    Action::from_indicator(belief > self.payoffs.risk_threshold()).prob_a()
                }
                LevelZero::AlwaysA => Rational::one(),
                LevelZero::Uniform => rational::ratio(1, 2),
            }
        } else {
            let block_mass = s.block_mass(player, state).clone();
            let mut total = Rational::zero();
            for &w in s.block(player, state) {
                let weight = s.measure(w) / &block_mass;
                let companion = self.eval(level - 1, player.other(), w);
                let p_good = s.belief_in(player, self.target, w);
                let p_bad = Rational::one() - &p_good;
                let term = &p_good * &companion * self.payoffs.a()
                    + &p_bad * &companion * self.payoffs.d()
                    + (Rational::one() - &companion) * self.payoffs.b();
                total += weight * term;
            }
            Action::from_indicator(total > *self.payoffs.c()).prob_a()
        };
        self.memo.insert((player, level, state), value.clone());
        value
    }
}

/// Level-k iterated maximization with the threshold level-0 rule.
pub fn iterated_maximization(
    s: &InformationStructure,
    target: &Event,
    payoffs: &PayoffParams,
    level: u32,
    player: Player,
    state: usize,
) -> Result<Action, EpistemicError> {
    IteratedMaximization::new(s, target, payoffs).action(level, player, state)
}

/// Level-k probability matching: `q_i^k(ω) = P_i(x=1|ω) · E[q_{1−i}^{k−1}]`,
/// memoised per `(player, level, state)`.
pub struct IteratedMatching<'a> {
    structure: &'a InformationStructure,
    target: &'a Event,
    memo: HashMap<(Player, u32, usize), Rational>,
}

impl<'a> IteratedMatching<'a> {
    pub fn new(structure: &'a InformationStructure, target: &'a Event) -> Self {
        Self {
            structure,
            target,
            memo: HashMap::new(),
        }
    }

    pub fn prob_a(&mut self, level: u32, player: Player, state: usize) -> Result<ActionProbability, EpistemicError> {
        self.structure.check_state(state)?;
        Ok(prob(self.eval(level, player, state)))
    }

    fn eval(&mut self, level: u32, player: Player, state: usize) -> Rational {
        if let Some(v) = self.memo.get(&(player, level, state)) {
            return v.clone();
        }
        let s = self.structure;
        let belief = s.belief_in(player, self.target, state);
        let value = if level == 0 {
            belief
        } else {
            let block_mass = s.block_mass(player, state).clone();
            let mut expected = Rational::zero();
            for &w in s.block(player, state) {
                expected += s.measure(w) / &block_mass * self.eval(level - 1, player.other(), w);
            }
            belief * expected
        };
        self.memo.insert((player, level, state), value.clone());
        value
    }
}

pub fn iterated_matching(
    s: &InformationStructure,
    target: &Event,
    level: u32,
    player: Player,
    state: usize,
) -> Result<ActionProbability, EpistemicError> {
    IteratedMatching::new(s, target).prob_a(level, player, state)
}

/// `A` iff the player is certain of `C`.
pub fn private_heuristic(
    s: &InformationStructure,
    target: &Event,
    player: Player,
    state: usize,
) -> Result<Action, EpistemicError> {
    let belief = conditional_belief(s, player, target, state)?;
    Ok(Action::from_indicator(belief.is_one()))
}

/// `A` iff the player is certain of `C` and certain that the companion is
/// certain of `C`.
pub fn pair_heuristic(
    s: &InformationStructure,
    target: &Event,
    player: Player,
    state: usize,
) -> Result<Action, EpistemicError> {
    if private_heuristic(s, target, player, state)? == Action::B {
        return Ok(Action::B);
    }
    let companion_knows: Event = (0..s.num_states())
        .filter(|&w| s.belief_in(player.other(), target, w).is_one())
        .collect();
    let belief = conditional_belief(s, player, &companion_knows, state)?;
    Ok(Action::from_indicator(belief.is_one()))
}

/// Best response against a companion who plays the matched p-belief model;
/// exact ties go to `B`.
pub fn cognitive_strategy(
    s: &InformationStructure,
    target: &Event,
    payoffs: &PayoffParams,
    player: Player,
    state: usize,
) -> Result<Action, EpistemicError> {
    s.check_state(state)?;
    let ladder = evident_ladder(s, target)?;
    let block_mass = s.block_mass(player, state);
    let mut utility = Rational::zero();
    for &w in s.block(player, state) {
        let q = ladder.common_p_belief(s, player.other(), w)?;
        utility += s.measure(w) / block_mass * payoffs.payoff_of_a(target.contains(w), &q);
    }
    Ok(Action::from_indicator(utility > *payoffs.c()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{one, ratio, zero};
    use crate::worldmodel::{builtin_loudspeaker, builtin_messenger, State, WorldModel};

    fn loud() -> WorldModel {
        WorldModel::build(builtin_loudspeaker(ratio(1, 4)).unwrap()).unwrap()
    }

    fn messenger() -> WorldModel {
        WorldModel::build(builtin_messenger(ratio(1, 4)).unwrap()).unwrap()
    }

    fn idx(m: &WorldModel, bits: &[u8]) -> usize {
        m.state_index(&State::from_bits(bits)).unwrap()
    }

    #[test]
    fn risk_threshold_examples() {
        assert_eq!(PayoffParams::thomas().risk_threshold(), ratio(10, 11));
        for (n, d) in [(1, 20), (1, 2), (19, 20)] {
            let p = ratio(n, d);
            assert_eq!(PayoffParams::from_risk(p.clone()).unwrap().risk_threshold(), p);
        }
        assert!(PayoffParams::new(one(), zero(), zero(), zero()).is_err());
        assert!(PayoffParams::new(one(), zero(), ratio(1, 2), ratio(1, 2)).is_err());
        assert!(PayoffParams::new(one(), zero(), one(), zero()).is_err());
    }

    #[test]
    fn payoff_text() {
        assert_eq!("1.1,0,1,0.4".parse::<PayoffParams>().unwrap(), PayoffParams::thomas());
        assert!(matches!("1,0,1".parse::<PayoffParams>(), Err(PayoffError::Format(_))));
        assert!(matches!("1,0,q,0".parse::<PayoffParams>(), Err(PayoffError::Parse(_))));
    }

    #[test]
    fn rational_examples() {
        let m = loud();
        let (s, c, pay) = (m.structure(), m.state_bit_event(), PayoffParams::thomas());
        let act = |bits| rational_p_belief_action(s, &c, &pay, Player::Zero, idx(&m, bits)).unwrap();
        assert_eq!(act(&[1, 1]), Action::A);
        assert_eq!(act(&[1, 0]), Action::B);

        let m = messenger();
        let secondary = idx(&m, &[1, 1, 1, 0, 1]);
        let action =
            rational_p_belief_action(m.structure(), &m.state_bit_event(), &pay, Player::One, secondary).unwrap();
        assert_eq!(action, Action::B);
    }

    #[test]
    fn matched_examples() {
        let m = loud();
        let q = matched_p_belief_prob(m.structure(), &m.state_bit_event(), Player::Zero, idx(&m, &[1, 1])).unwrap();
        assert_eq!(q.value(), &one());

        let m = messenger();
        let (s, c) = (m.structure(), m.state_bit_event());
        let private = matched_p_belief_prob(s, &c, Player::Zero, idx(&m, &[1, 1, 0, 1, 0])).unwrap();
        let secondary = matched_p_belief_prob(s, &c, Player::One, idx(&m, &[1, 1, 1, 0, 1])).unwrap();
        let tertiary = matched_p_belief_prob(s, &c, Player::Zero, idx(&m, &[1, 1, 1, 1, 0])).unwrap();
        assert_eq!(private.value(), &ratio(1, 4));
        assert_eq!(secondary, tertiary);
        assert_eq!(secondary.value(), &ratio(1, 2));
    }

    #[test]
    fn iterated_maximization_level_zero() {
        let m = loud();
        let (s, c, pay) = (m.structure(), m.state_bit_event(), PayoffParams::thomas());
        assert_eq!(
            iterated_maximization(s, &c, &pay, 0, Player::Zero, idx(&m, &[1, 1])).unwrap(),
            Action::A
        );
        assert_eq!(
            iterated_maximization(s, &c, &pay, 0, Player::Zero, idx(&m, &[1, 0])).unwrap(),
            Action::B
        );

        let mut always = IteratedMaximization::new(s, &c, &pay).with_level_zero(LevelZero::AlwaysA);
        assert_eq!(always.prob_a(0, Player::Zero, 0).unwrap(), one());
        let mut uniform = IteratedMaximization::new(s, &c, &pay).with_level_zero(LevelZero::Uniform);
        assert_eq!(uniform.prob_a(0, Player::Zero, 0).unwrap(), ratio(1, 2));
        // On the broadcast state both players see x = 1 at a singleton block.
        assert_eq!(uniform.action(1, Player::Zero, idx(&m, &[1, 1])).unwrap(), Action::B);
        assert_eq!(always.action(1, Player::Zero, idx(&m, &[1, 1])).unwrap(), Action::A);
    }

    #[test]
    fn iterated_matching_examples() {
        let m = loud();
        let (s, c) = (m.structure(), m.state_bit_event());
        let w = idx(&m, &[1, 1]);
        assert_eq!(iterated_matching(s, &c, 0, Player::Zero, w).unwrap().value(), &one());
        assert_eq!(iterated_matching(s, &c, 1, Player::Zero, w).unwrap().value(), &one());
        let w = idx(&m, &[1, 0]);
        // q^1 = 1/4 · (3/4 · 1/4 + 1/4 · 1/4) on the silent block.
        assert_eq!(
            iterated_matching(s, &c, 1, Player::Zero, w).unwrap().value(),
            &ratio(1, 16)
        );
    }

    #[test]
    fn heuristics() {
        let m = loud();
        let (s, c) = (m.structure(), m.state_bit_event());
        let w = idx(&m, &[1, 1]);
        assert_eq!(private_heuristic(s, &c, Player::Zero, w).unwrap(), Action::A);
        assert_eq!(pair_heuristic(s, &c, Player::Zero, w).unwrap(), Action::A);

        let m = messenger();
        let (s, c) = (m.structure(), m.state_bit_event());
        let private = idx(&m, &[1, 1, 0, 1, 0]);
        assert_eq!(private_heuristic(s, &c, Player::One, private).unwrap(), Action::B);
        assert_eq!(pair_heuristic(s, &c, Player::One, private).unwrap(), Action::B);
        // Secondary: player 0 knows x but not whether player 1 was visited.
        let secondary = idx(&m, &[1, 1, 1, 0, 1]);
        assert_eq!(private_heuristic(s, &c, Player::Zero, secondary).unwrap(), Action::A);
        assert_eq!(pair_heuristic(s, &c, Player::Zero, secondary).unwrap(), Action::B);
        // Tertiary: player 1 saw x and that player 0 was visited.
        let tertiary = idx(&m, &[1, 1, 1, 1, 0]);
        assert_eq!(pair_heuristic(s, &c, Player::One, tertiary).unwrap(), Action::A);
    }

    #[test]
    fn cognitive_examples() {
        let m = loud();
        let (s, c) = (m.structure(), m.state_bit_event());
        let pay = PayoffParams::thomas();
        assert_eq!(
            cognitive_strategy(s, &c, &pay, Player::Zero, idx(&m, &[1, 1])).unwrap(),
            Action::A
        );
        // Certain that x = 0.
        assert_eq!(
            cognitive_strategy(s, &c, &pay, Player::Zero, idx(&m, &[0, 1])).unwrap(),
            Action::B
        );
    }

    #[test]
    fn cognitive_tie_goes_to_b() {
        let m = loud();
        let (s, c) = (m.structure(), m.state_bit_event());
        let silent = idx(&m, &[1, 0]);
        // Silent block: P(x=1) = 1/4 and the companion matches with q = 1/4,
        // so EU(A) = 1/4 · 1/4 · a = 1/16 when a = 1 and b = d = 0.
        let pay = PayoffParams::new(one(), zero(), ratio(1, 16), zero()).unwrap();
        assert_eq!(
            cognitive_strategy(s, &c, &pay, Player::Zero, silent).unwrap(),
            Action::B
        );
        let pay = PayoffParams::new(one(), zero(), ratio(1, 17), zero()).unwrap();
        assert_eq!(
            cognitive_strategy(s, &c, &pay, Player::Zero, silent).unwrap(),
            Action::A
        );
    }
}
