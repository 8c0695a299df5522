//! Coordinated-attack game semantics and equilibrium verification.

use num_traits::{One, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::epistemic::{EpistemicError, Event, InformationStructure};
use crate::rational::{self, format_ratio, Rational};
use crate::strategies::{Action, PayoffParams};
use crate::worldmodel::WorldModel;
use crate::Player;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PolicyError {
    #[error("policy has {got} entries for player {player}, expected {expected}")]
    Size {
        player: Player,
        got: usize,
        expected: usize,
    },
    #[error("policy entry for player {player} at state {state} is {value}, outside [0, 1]")]
    NotProbability {
        player: Player,
        state: usize,
        value: String,
    },
    #[error("policy for player {player} differs within the information block of state {state}")]
    NotMeasurable { player: Player, state: usize },
}

/// Structure, payoffs and the event `C = {x = 1}`.
#[derive(Debug, Clone)]
pub struct GameInstance {
    structure: InformationStructure,
    payoffs: PayoffParams,
    target: Event,
}

impl GameInstance {
    pub fn new(structure: InformationStructure, payoffs: PayoffParams, target: Event) -> Self {
        Self {
            structure,
            payoffs,
            target,
        }
    }

    pub fn from_model(model: &WorldModel, payoffs: PayoffParams) -> Self {
        Self::new(model.structure().clone(), payoffs, model.state_bit_event())
    }

    pub fn structure(&self) -> &InformationStructure {
        &self.structure
    }

    pub fn payoffs(&self) -> &PayoffParams {
        &self.payoffs
    }

    pub fn target(&self) -> &Event {
        &self.target
    }

    /// Unconditional `μ(x = 1)`.
    pub fn prior(&self) -> Rational {
        self.structure.mass(&self.target)
    }
}

/// Probability of `A` for each player at each state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Policy {
    prob_a: [Vec<Rational>; 2],
}

impl Policy {
    /// Validates ranges and measurability with respect to `structure`.
    pub fn new(structure: &InformationStructure, prob_a: [Vec<Rational>; 2]) -> Result<Self, PolicyError> {
        for player in Player::BOTH {
            let row = &prob_a[player.index()];
            if row.len() != structure.num_states() {
                return Err(PolicyError::Size {
                    player,
                    got: row.len(),
                    expected: structure.num_states(),
                });
            }
            for (state, value) in row.iter().enumerate() {
                if !rational::is_probability(value) {
                    return Err(PolicyError::NotProbability {
                        player,
                        state,
                        value: format_ratio(value),
                    });
                }
                if structure.block(player, state).iter().any(|&w| row[w] != *value) {
                    return Err(PolicyError::NotMeasurable { player, state });
                }
            }
        }
        Ok(Self { prob_a })
    }

    pub fn constant(num_states: usize, prob_a: Rational) -> Self {
        Self {
            prob_a: [vec![prob_a.clone(); num_states], vec![prob_a; num_states]],
        }
    }

    pub fn always_a(num_states: usize) -> Self {
        Self::constant(num_states, Rational::one())
    }

    pub fn always_b(num_states: usize) -> Self {
        Self::constant(num_states, Rational::zero())
    }

    /// Both players follow the rational p-belief strategy.
    pub fn rational_p_belief(game: &GameInstance) -> Result<Self, EpistemicError> {
        let s = game.structure();
        let ladder = crate::epistemic::evident_ladder(s, game.target())?;
        let threshold = game.payoffs().risk_threshold();
        let row = |player: Player| -> Result<Vec<Rational>, EpistemicError> {
            (0..s.num_states())
                .map(|w| {
                    let level = ladder.common_p_belief(s, player, w)?;
                    Ok(if level > threshold { Action::A } else { Action::B }.prob_a())
                })
                .collect()
        };
        Ok(Self {
            prob_a: [row(Player::Zero)?, row(Player::One)?],
        })
    }

    pub fn prob_a(&self, player: Player, state: usize) -> &Rational {
        &self.prob_a[player.index()][state]
    }
}

/// Expected payoff to `player` at `state` when playing `A` with probability
/// `my_prob_a` against `companion`, averaging over `Π_i(ω)`.
pub fn expected_utility(
    game: &GameInstance,
    player: Player,
    state: usize,
    my_prob_a: &Rational,
    companion: &Policy,
) -> Result<Rational, EpistemicError> {
    let s = game.structure();
    s.check_state(state)?;
    let pay = game.payoffs();
    let block_mass = s.block_mass(player, state);
    let my_prob_b = Rational::one() - my_prob_a;
    let mut total = Rational::zero();
    for &w in s.block(player, state) {
        let q = companion.prob_a(player.other(), w);
        let payoff = my_prob_a * pay.payoff_of_a(game.target().contains(w), q) + &my_prob_b * pay.c();
        total += s.measure(w) / block_mass * payoff;
    }
    Ok(total)
}

/// `P_i(x=1|ω) > μ(x=1)` implies `P_i(x=1|ω) = 1`, for every player and state.
pub fn noiseless_check(game: &GameInstance) -> bool {
    let s = game.structure();
    let prior = game.prior();
    Player::BOTH.iter().all(|&p| {
        (0..s.num_states()).all(|w| {
            let belief = s.belief_in(p, game.target(), w);
            belief <= prior || belief.is_one()
        })
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub player: Player,
    pub state: usize,
    pub prescribed: Action,
    /// `EU(other action) − EU(prescribed action)`, strictly positive.
    #[serde(with = "crate::rational::serde_ratio")]
    pub gap: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "status")]
pub enum EquilibriumReport {
    /// The hypotheses fail, so the check says nothing.
    NotApplicable {
        reasons: Vec<String>,
    },
    Checked {
        checked: usize,
        violations: Vec<Violation>,
    },
}

impl EquilibriumReport {
    pub fn passed(&self) -> bool {
        matches!(self, EquilibriumReport::Checked { violations, .. } if violations.is_empty())
    }

    pub fn label(&self) -> &'static str {
        match self {
            EquilibriumReport::NotApplicable { .. } => "N-A",
            EquilibriumReport::Checked { violations, .. } if violations.is_empty() => "PASS",
            EquilibriumReport::Checked { .. } => "FAIL",
        }
    }
}

/// Checks, at every `(player, state)`, that neither pure action beats the
/// rational p-belief prescription against a rational p-belief companion.
/// Pure deviations suffice because utility is linear in the mixing weight.
pub fn verify_equilibrium(game: &GameInstance) -> Result<EquilibriumReport, EpistemicError> {
    let mut reasons = Vec::new();
    if !noiseless_check(game) {
        reasons.push("messages are not noiseless".to_string());
    }
    let threshold = game.payoffs().risk_threshold();
    let prior = game.prior();
    if threshold <= prior {
        reasons.push(format!(
            "risk threshold {} does not exceed the prior {}",
            format_ratio(&threshold),
            format_ratio(&prior)
        ));
    }
    if !reasons.is_empty() {
        return Ok(EquilibriumReport::NotApplicable { reasons });
    }

    let policy = Policy::rational_p_belief(game)?;
    let s = game.structure();
    let mut violations = Vec::new();
    let mut checked = 0;
    for player in Player::BOTH {
        for w in 0..s.num_states() {
            checked += 1;
            let prescribed = if policy.prob_a(player, w).is_one() {
                Action::A
            } else {
                Action::B
            };
            let other = match prescribed {
                Action::A => Action::B,
                Action::B => Action::A,
            };
            let eu_prescribed = expected_utility(game, player, w, &prescribed.prob_a(), &policy)?;
            let eu_other = expected_utility(game, player, w, &other.prob_a(), &policy)?;
            if eu_other > eu_prescribed {
                violations.push(Violation {
                    player,
                    state: w,
                    prescribed,
                    gap: eu_other - eu_prescribed,
                });
            }
        }
    }
    Ok(EquilibriumReport::Checked { checked, violations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{one, ratio, zero};
    use crate::worldmodel::{builtin_loudspeaker, builtin_messenger, Partition, State};

    fn game(spec: crate::WorldModelSpec) -> (WorldModel, GameInstance) {
        let m = WorldModel::build(spec).unwrap();
        let g = GameInstance::from_model(&m, PayoffParams::thomas());
        (m, g)
    }

    #[test]
    fn expected_utility_examples() {
        let (m, g) = game(builtin_loudspeaker(ratio(1, 4)).unwrap());
        let n = m.space().len();
        let w = m.state_index(&State::from_bits(&[1, 1])).unwrap();
        for companion in [Policy::always_a(n), Policy::always_b(n)] {
            assert_eq!(
                expected_utility(&g, Player::Zero, w, &zero(), &companion).unwrap(),
                one()
            );
        }
        assert_eq!(
            expected_utility(&g, Player::Zero, w, &one(), &Policy::always_a(n)).unwrap(),
            ratio(11, 10)
        );
        assert_eq!(
            expected_utility(&g, Player::Zero, w, &one(), &Policy::always_b(n)).unwrap(),
            zero()
        );
    }

    #[test]
    fn always_b_earns_c_everywhere() {
        let (m, g) = game(builtin_messenger(ratio(1, 4)).unwrap());
        let policy = Policy::always_b(m.space().len());
        for p in Player::BOTH {
            for w in 0..m.space().len() {
                assert_eq!(expected_utility(&g, p, w, &zero(), &policy).unwrap(), one());
            }
        }
    }

    #[test]
    fn noiseless_builtins() {
        assert!(noiseless_check(&game(builtin_messenger(ratio(1, 4)).unwrap()).1));
        assert!(noiseless_check(&game(builtin_loudspeaker(ratio(1, 4)).unwrap()).1));
    }

    #[test]
    fn noisy_hint_is_detected() {
        // Three equally likely states, x = 1 only in state 0. Player 0 sees
        // {0, 1} vs {2}: belief 1/2 > prior 1/3 without certainty.
        let third = ratio(1, 3);
        let s = InformationStructure::new(
            vec![third.clone(), third.clone(), third],
            [
                Partition::from_blocks(3, vec![vec![0, 1], vec![2]]).unwrap(),
                Partition::trivial(3),
            ],
        )
        .unwrap();
        let g = GameInstance::new(s, PayoffParams::thomas(), [0].into_iter().collect());
        assert!(!noiseless_check(&g));
        assert!(matches!(
            verify_equilibrium(&g).unwrap(),
            EquilibriumReport::NotApplicable { .. }
        ));
    }

    #[test]
    fn equilibrium_holds_on_builtins() {
        for spec in [
            builtin_messenger(ratio(1, 4)).unwrap(),
            builtin_loudspeaker(ratio(1, 4)).unwrap(),
        ] {
            let (m, g) = game(spec);
            let report = verify_equilibrium(&g).unwrap();
            assert_eq!(
                report,
                EquilibriumReport::Checked {
                    checked: 2 * m.space().len(),
                    violations: vec![]
                }
            );
            assert_eq!(report.label(), "PASS");
        }
    }

    #[test]
    fn high_prior_is_not_applicable() {
        let (_, g) = game(builtin_loudspeaker(ratio(95, 100)).unwrap());
        let report = verify_equilibrium(&g).unwrap();
        assert_eq!(report.label(), "N-A");
    }

    #[test]
    fn policy_validation() {
        let m = WorldModel::build(builtin_loudspeaker(ratio(1, 4)).unwrap()).unwrap();
        let s = m.structure();
        let silent_00 = m.state_index(&State::from_bits(&[0, 0])).unwrap();
        let mut row = vec![zero(); 4];
        row[silent_00] = one();
        assert!(matches!(
            Policy::new(s, [row.clone(), vec![zero(); 4]]),
            Err(PolicyError::NotMeasurable {
                player: Player::Zero,
                ..
            })
        ));
        assert!(matches!(
            Policy::new(s, [vec![ratio(3, 2); 4], vec![zero(); 4]]),
            Err(PolicyError::NotProbability { .. })
        ));
        assert!(matches!(
            Policy::new(s, [vec![zero(); 3], vec![zero(); 4]]),
            Err(PolicyError::Size { .. })
        ));
        assert!(Policy::new(s, [vec![ratio(1, 3); 4], vec![zero(); 4]]).is_ok());
    }
}
