//! Game rules: configuration, dealing, settlement and full hands.
//!
//! Each player holds one private card, both bet simultaneously either the
//! high amount `a` or the low amount `b`, and the hand is settled once:
//!
//! * both High: the higher card nets `+a`;
//! * both Low: the higher card nets `+b`;
//! * High against Low: the high bettor nets `+b` whatever the cards;
//! * equal bets on equal cards: stakes are returned and the hand is replayed
//!   from scratch (new cards, new bets).

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::strategy::Strategy;

/// Consecutive replays tolerated before a hand is reported as stuck.
pub const MAX_REPLAYS: u32 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CardModel {
    /// Card values i.i.d. uniform on `[0, 1]`.
    Continuous,
    /// Card values i.i.d. uniform over `cards` equally spaced points
    /// `{0, 1/(cards-1), ..., 1}`, drawn with replacement.
    Discrete { cards: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GameConfig {
    high_bet: f64,
    low_bet: f64,
    card_model: CardModel,
}

impl Default for GameConfig {
    /// `a = 2`, `b = 1`, continuous deck.
    fn default() -> Self {
        Self {
            high_bet: 2.0,
            low_bet: 1.0,
            card_model: CardModel::Continuous,
        }
    }
}

impl GameConfig {
    pub fn new(high_bet: f64, low_bet: f64, card_model: CardModel) -> Result<Self> {
        validate_config(Self {
            high_bet,
            low_bet,
            card_model,
        })
    }

    /// Continuous game with `b = 1` and `a = ratio`.
    pub fn with_ratio(ratio: f64) -> Result<Self> {
        Self::new(ratio, 1.0, CardModel::Continuous)
    }

    pub fn with_card_model(self, card_model: CardModel) -> Result<Self> {
        validate_config(Self { card_model, ..self })
    }

    pub fn high_bet(&self) -> f64 {
        self.high_bet
    }

    pub fn low_bet(&self) -> f64 {
        self.low_bet
    }

    pub fn card_model(&self) -> CardModel {
        self.card_model
    }

    /// The risk parameter `a / b`.
    pub fn ratio(&self) -> f64 {
        self.high_bet / self.low_bet
    }

    pub fn is_continuous(&self) -> bool {
        matches!(self.card_model, CardModel::Continuous)
    }

    pub(crate) fn require_continuous(&self) -> Result<()> {
        if self.is_continuous() {
            Ok(())
        } else {
            Err(Error::ContinuousModelRequired)
        }
    }

    /// `a` as an exact rational (every finite f64 is a dyadic rational).
    pub fn high_bet_exact(&self) -> BigRational {
        exact(self.high_bet)
    }

    pub fn low_bet_exact(&self) -> BigRational {
        exact(self.low_bet)
    }

    pub fn stake(&self, stake: Stake) -> f64 {
        match stake {
            Stake::High => self.high_bet,
            Stake::Low => self.low_bet,
        }
    }

    pub fn stake_exact(&self, stake: Stake) -> BigRational {
        exact(self.stake(stake))
    }
}

pub(crate) fn exact(x: f64) -> BigRational {
    BigRational::from_float(x).unwrap_or_else(|| BigRational::from_integer(BigInt::from(0)))
}

/// Checks the bet and deck invariants: finite `a > b > 0` and at least two
/// cards in a discrete deck.
pub fn validate_config(cfg: GameConfig) -> Result<GameConfig> {
    let GameConfig {
        high_bet: a,
        low_bet: b,
        card_model,
    } = cfg;
    if !a.is_finite() || !b.is_finite() {
        return Err(Error::InvalidConfig(format!(
            "bets must be finite (a = {a}, b = {b})"
        )));
    }
    if b <= 0.0 {
        return Err(Error::InvalidConfig(format!(
            "low bet b must be positive (b = {b})"
        )));
    }
    if a <= b {
        return Err(Error::InvalidConfig(format!(
            "high bet must exceed low bet (a = {a}, b = {b})"
        )));
    }
    if let CardModel::Discrete { cards } = card_model {
        if cards < 2 {
            return Err(Error::InvalidConfig(format!(
                "a discrete deck needs at least 2 cards (got {cards})"
            )));
        }
    }
    Ok(cfg)
}

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct Card(f64);

impl Card {
    pub fn new(value: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&value) {
            Ok(Card(value))
        } else {
            Err(Error::CardOutOfRange(value))
        }
    }

    /// The `index`-th point of an evenly spaced deck of `cards` values.
    pub fn grid(index: u32, cards: u32) -> Self {
        debug_assert!(cards >= 2 && index < cards);
        Card(f64::from(index) / f64::from(cards - 1))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BetAction {
    High,
    Low,
}

/// Which of the two bet amounts changes hands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Stake {
    /// `a`
    High,
    /// `b`
    Low,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Settlement {
    P1Wins(Stake),
    P2Wins(Stake),
    Replay,
}

impl Settlement {
    /// Net transfer to player 1; zero for a replay.
    pub fn payoff_to_p1(self, cfg: &GameConfig) -> f64 {
        match self {
            Settlement::P1Wins(s) => cfg.stake(s),
            Settlement::P2Wins(s) => -cfg.stake(s),
            Settlement::Replay => 0.0,
        }
    }

    pub fn payoff_to_p1_exact(self, cfg: &GameConfig) -> BigRational {
        match self {
            Settlement::P1Wins(s) => cfg.stake_exact(s),
            Settlement::P2Wins(s) => -cfg.stake_exact(s),
            Settlement::Replay => exact(0.0),
        }
    }

    /// The same hand seen from the other seat.
    pub fn swapped(self) -> Settlement {
        match self {
            Settlement::P1Wins(s) => Settlement::P2Wins(s),
            Settlement::P2Wins(s) => Settlement::P1Wins(s),
            Settlement::Replay => Settlement::Replay,
        }
    }
}

pub fn deal<R: Rng + ?Sized>(cfg: &GameConfig, rng: &mut R) -> (Card, Card) {
    let first = draw_card(cfg, rng);
    let second = draw_card(cfg, rng);
    (first, second)
}

fn draw_card<R: Rng + ?Sized>(cfg: &GameConfig, rng: &mut R) -> Card {
    match cfg.card_model {
        // gen::<f64>() is uniform on [0, 1)
        CardModel::Continuous => Card(rng.gen::<f64>()),
        CardModel::Discrete { cards } => Card::grid(rng.gen_range(0..cards), cards),
    }
}

pub fn settle(card1: Card, card2: Card, bet1: BetAction, bet2: BetAction) -> Settlement {
    use BetAction::{High, Low};
    let showdown = |stake| match card1.0.partial_cmp(&card2.0) {
        Some(std::cmp::Ordering::Greater) => Settlement::P1Wins(stake),
        Some(std::cmp::Ordering::Less) => Settlement::P2Wins(stake),
        _ => Settlement::Replay,
    };
    match (bet1, bet2) {
        (High, High) => showdown(Stake::High),
        (Low, Low) => showdown(Stake::Low),
        (High, Low) => Settlement::P1Wins(Stake::Low),
        (Low, High) => Settlement::P2Wins(Stake::Low),
    }
}

/// Result of one settled hand.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HandResult {
    pub payoff: f64,
    pub settlement: Settlement,
    /// Deals that ended in a replay before this one settled.
    pub replays: u32,
}

/// Plays one hand to settlement, replaying on ties.
pub fn play_hand<R: Rng + ?Sized>(
    cfg: &GameConfig,
    s1: &Strategy,
    s2: &Strategy,
    rng: &mut R,
) -> Result<HandResult> {
    play_hand_seated(cfg, s1, s2, rng, false)
}

/// Like [`play_hand`], but with `mirrored` the random draws meant for seat 1
/// go to seat 2 and vice versa. Playing `(s2, s1)` mirrored on the same stream
/// reproduces the `(s1, s2)` hand with the seats exchanged.
pub(crate) fn play_hand_seated<R: Rng + ?Sized>(
    cfg: &GameConfig,
    s1: &Strategy,
    s2: &Strategy,
    rng: &mut R,
    mirrored: bool,
) -> Result<HandResult> {
    for replays in 0..=MAX_REPLAYS {
        let (x, y) = deal(cfg, rng);
        let ux: f64 = rng.gen();
        let uy: f64 = rng.gen();
        let ((c1, u1), (c2, u2)) = if mirrored {
            ((y, uy), (x, ux))
        } else {
            ((x, ux), (y, uy))
        };
        let b1 = s1.action_for_uniform(c1.0, u1);
        let b2 = s2.action_for_uniform(c2.0, u2);
        let settlement = settle(c1, c2, b1, b2);
        if settlement != Settlement::Replay {
            return Ok(HandResult {
                payoff: settlement.payoff_to_p1(cfg),
                settlement,
                replays,
            });
        }
    }
    Err(Error::ReplayLimit(MAX_REPLAYS))
}
