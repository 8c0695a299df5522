//! Exact common p-belief for finite two-player Bayesian games.
//!
//! The crate is organised bottom-up:
//!
//! * [`worldmodel`] turns a declarative generative process into a finite state
//!   space with exact measures and one information partition per player.
//! * [`epistemic`] computes conditional beliefs, p-evident events and the
//!   perceived maximal common p-belief by walking the nested ladder of
//!   maximally evident events.
//! * [`strategies`] and [`game`] implement the coordination strategies and the
//!   coordinated-attack payoff semantics on top of it.
//! * [`experiments`] reproduces the four knowledge-condition predictions and the
//!   human-agent payoff sweep.
//! * [`oracle`] holds deliberately naive reference implementations and random
//!   instance generators used for cross-checking.
//!
//! Every probability is a [`Rational`]; no floating point is involved in any
//! decision.

pub mod epistemic;
pub mod error;
pub mod experiments;
pub mod game;
pub mod oracle;
pub mod rational;
pub mod strategies;
pub mod worldmodel;

pub use epistemic::{Event, EvidentLadder, InformationStructure};
pub use error::Error;
pub use rational::Rational;
pub use worldmodel::{Partition, State, StateSpace, WorldModel, WorldModelSpec};

use std::fmt;
use std::str::FromStr;

/// One of the two players of the game.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Player {
    Zero,
    One,
}

impl Player {
    pub const BOTH: [Player; 2] = [Player::Zero, Player::One];

    pub fn index(self) -> usize {
        match self {
            Player::Zero => 0,
            Player::One => 1,
        }
    }

    pub fn other(self) -> Player {
        match self {
            Player::Zero => Player::One,
            Player::One => Player::Zero,
        }
    }

    pub fn from_index(index: usize) -> Option<Player> {
        match index {
            0 => Some(Player::Zero),
            1 => Some(Player::One),
            _ => None,
        }
    }
}

impl fmt::Display for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.index())
    }
}

impl FromStr for Player {
    type Err = error::Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "0" => Ok(Player::Zero),
            "1" => Ok(Player::One),
            other => Err(error::Error::InvalidPlayer(other.to_string())),
        }
    }
}

impl serde::Serialize for Player {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_u8(self.index() as u8)
    }
}
