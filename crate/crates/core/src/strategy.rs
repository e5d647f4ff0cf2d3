//! Betting strategies as piecewise-constant high-bet probabilities.
//!
//! A [`Strategy`] partitions `[0, 1]` at strictly increasing interior
//! breakpoints and assigns each interval the probability of betting High
//! with a card in that interval. A card lying exactly on a breakpoint uses
//! the interval to its right.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::engine::BetAction;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawStrategy")]
pub struct Strategy {
    breakpoints: Vec<f64>,
    high_prob: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStrategy {
    breakpoints: Vec<f64>,
    high_prob: Vec<f64>,
}

impl TryFrom<RawStrategy> for Strategy {
    type Error = Error;

    fn try_from(raw: RawStrategy) -> Result<Self> {
        Strategy::new(raw.breakpoints, raw.high_prob)
    }
}

/// One constant interval `[lo, hi)` of a strategy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Piece {
    pub lo: f64,
    pub hi: f64,
    pub high_prob: f64,
}

impl Piece {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

impl Strategy {
    pub fn new(breakpoints: Vec<f64>, high_prob: Vec<f64>) -> Result<Self> {
        if high_prob.len() != breakpoints.len() + 1 {
            return Err(Error::InvalidStrategy(format!(
                "expected {} high_prob entries for {} breakpoints, got {}",
                breakpoints.len() + 1,
                breakpoints.len(),
                high_prob.len()
            )));
        }
        for (i, &x) in breakpoints.iter().enumerate() {
            if !(x > 0.0 && x < 1.0) {
                return Err(Error::InvalidStrategy(format!(
                    "breakpoints[{i}] = {x} is not inside (0, 1)"
                )));
            }
            if i > 0 && x <= breakpoints[i - 1] {
                return Err(Error::InvalidStrategy(format!(
                    "breakpoints[{i}] = {x} does not exceed breakpoints[{}] = {}",
                    i - 1,
                    breakpoints[i - 1]
                )));
            }
        }
        for (i, &p) in high_prob.iter().enumerate() {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidStrategy(format!(
                    "high_prob[{i}] = {p} is not a probability"
                )));
            }
        }
        Ok(Self {
            breakpoints,
            high_prob,
        })
    }

    pub fn constant(high_prob: f64) -> Result<Self> {
        Self::new(Vec::new(), vec![high_prob])
    }

    pub fn always_high() -> Self {
        Self {
            breakpoints: Vec::new(),
            high_prob: vec![1.0],
        }
    }

    pub fn always_low() -> Self {
        Self {
            breakpoints: Vec::new(),
            high_prob: vec![0.0],
        }
    }

    /// Low below `threshold`, High at and above it.
    pub fn deterministic_threshold(threshold: f64) -> Result<Self> {
        Self::threshold_mix(threshold, 0.0)
    }

    /// High with probability `bluff` below `threshold`, always High at and
    /// above it.
    pub fn threshold_mix(threshold: f64, bluff: f64) -> Result<Self> {
        Self::new(vec![threshold], vec![bluff, 1.0])
    }

    /// `probs.len()` equal-width bins over `[0, 1]`.
    pub fn binned(probs: &[f64]) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidStrategy("no bins".into()));
        }
        let k = probs.len();
        let breakpoints = (1..k).map(|i| i as f64 / k as f64).collect();
        Self::new(breakpoints, probs.to_vec())
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn high_probs(&self) -> &[f64] {
        &self.high_prob
    }

    pub fn num_pieces(&self) -> usize {
        self.high_prob.len()
    }

    pub fn pieces(&self) -> impl Iterator<Item = Piece> + '_ {
        self.high_prob.iter().enumerate().map(move |(i, &p)| Piece {
            lo: if i == 0 { 0.0 } else { self.breakpoints[i - 1] },
            hi: self.breakpoints.get(i).copied().unwrap_or(1.0),
            high_prob: p,
        })
    }

    pub fn high_probability(&self, v: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::CardOutOfRange(v));
        }
        Ok(self.prob_at(v))
    }

    pub(crate) fn prob_at(&self, v: f64) -> f64 {
        self.high_prob[self.breakpoints.partition_point(|&x| x <= v)]
    }

    /// Maps a uniform `[0, 1)` draw to an action.
    pub(crate) fn action_for_uniform(&self, v: f64, u: f64) -> BetAction {
        if u < self.prob_at(v) {
            BetAction::High
        } else {
            BetAction::Low
        }
    }

    pub fn sample_action<R: Rng + ?Sized>(&self, v: f64, rng: &mut R) -> Result<BetAction> {
        let h = self.high_probability(v)?;
        Ok(if rng.gen::<f64>() < h {
            BetAction::High
        } else {
            BetAction::Low
        })
    }

    /// Probability of a High bet before the card is seen, `∫ h(v) dv`.
    pub fn mean_high_probability(&self) -> f64 {
        self.pieces().map(|p| p.width() * p.high_prob).sum()
    }

    /// Same function on a finer breakpoint list (must contain ours).
    fn on_grid(&self, grid: &[f64]) -> Strategy {
        let high_prob = std::iter::once(0.0)
            .chain(grid.iter().copied())
            .map(|lo| self.prob_at(lo))
            .collect();
        Strategy {
            breakpoints: grid.to_vec(),
            high_prob,
        }
    }

    /// Drops breakpoints between equal neighbouring pieces.
    pub fn simplified(&self) -> Strategy {
        let mut breakpoints = Vec::with_capacity(self.breakpoints.len());
        let mut high_prob = vec![self.high_prob[0]];
        for (&x, &p) in self.breakpoints.iter().zip(&self.high_prob[1..]) {
            if p != *high_prob.last().unwrap() {
                breakpoints.push(x);
                high_prob.push(p);
            }
        }
        Strategy {
            breakpoints,
            high_prob,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("strategy serializes")
    }

    /// Parses the strategy file format. Syntax errors point at the offending
    /// character; invariant violations point at the end of the object.
    pub fn from_json(text: &str) -> Result<Self> {
        let syntax = |e: serde_json::Error| Error::StrategyParse {
            line: e.line(),
            column: e.column(),
            reason: e.to_string(),
        };
        let mut stream = serde_json::Deserializer::from_str(text).into_iter::<RawStrategy>();
        let raw = match stream.next() {
            Some(r) => r.map_err(syntax)?,
            None => {
                return Err(Error::StrategyParse {
                    line: 1,
                    column: 0,
                    reason: "empty input".into(),
                })
            }
        };
        let end = stream.byte_offset();
        let trailing = text[end..].trim_start();
        if !trailing.is_empty() {
            let (line, column) = line_column(text, text.len() - trailing.len());
            return Err(Error::StrategyParse {
                line,
                column,
                reason: "trailing characters after the strategy object".into(),
            });
        }
        Strategy::try_from(raw).map_err(|e| {
            let (line, column) = line_column(text, end);
            Error::StrategyParse {
                line,
                column,
                reason: match e {
                    Error::InvalidStrategy(msg) => msg,
                    other => other.to_string(),
                },
            }
        })
    }
}

/// 1-based line and column of a byte offset (column counts characters).
fn line_column(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count());
    (line, column)
}

/// Re-expresses both strategies on the union of their breakpoints.
pub fn refine(s1: &Strategy, s2: &Strategy) -> (Strategy, Strategy) {
    let grid = merged_breakpoints(s1.breakpoints(), s2.breakpoints());
    (s1.on_grid(&grid), s2.on_grid(&grid))
}

pub(crate) fn merged_breakpoints(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let next = match (a.get(i), b.get(j)) {
            (Some(&x), Some(&y)) if x < y => {
                i += 1;
                x
            }
            (Some(&x), Some(&y)) if y < x => {
                j += 1;
                y
            }
            (Some(&x), Some(_)) => {
                i += 1;
                j += 1;
                x
            }
            (Some(&x), None) => {
                i += 1;
                x
            }
            (None, Some(&y)) => {
                j += 1;
                y
            }
            (None, None) => unreachable!(),
        };
        out.push(next);
    }
    out
}

/// The strategy families with names, parseable from the inline forms
/// `a-type`, `b-type`, `m-det:T` and `threshold:T:P`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NamedStrategy {
    /// Always High.
    AType,
    /// Always Low.
    BType,
    /// Low below the threshold, High at or above it.
    MDeterministic(f64),
    /// High with the given probability below the threshold, High above.
    ThresholdMix { threshold: f64, bluff: f64 },
}

impl NamedStrategy {
    pub fn to_strategy(self) -> Result<Strategy> {
        match self {
            NamedStrategy::AType => Ok(Strategy::always_high()),
            NamedStrategy::BType => Ok(Strategy::always_low()),
            NamedStrategy::MDeterministic(t) => Strategy::deterministic_threshold(t),
            NamedStrategy::ThresholdMix { threshold, bluff } => {
                Strategy::threshold_mix(threshold, bluff)
            }
        }
    }
}

impl TryFrom<NamedStrategy> for Strategy {
    type Error = Error;

    fn try_from(named: NamedStrategy) -> Result<Self> {
        named.to_strategy()
    }
}

impl fmt::Display for NamedStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NamedStrategy::AType => write!(f, "a-type"),
            NamedStrategy::BType => write!(f, "b-type"),
            NamedStrategy::MDeterministic(t) => write!(f, "m-det:{t:?}"),
            NamedStrategy::ThresholdMix { threshold, bluff } => {
                write!(f, "threshold:{threshold:?}:{bluff:?}")
            }
        }
    }
}

impl FromStr for NamedStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        let num = |text: &str, what: &str| -> Result<f64> {
            text.trim().parse::<f64>().map_err(|_| {
                Error::InvalidStrategy(format!("{what} `{text}` in `{s}` is not a number"))
            })
        };
        let named = match parts.as_slice() {
            ["a-type"] => NamedStrategy::AType,
            ["b-type"] => NamedStrategy::BType,
            ["m-det", t] => NamedStrategy::MDeterministic(num(t, "threshold")?),
            ["threshold", t, p] => NamedStrategy::ThresholdMix {
                threshold: num(t, "threshold")?,
                bluff: num(p, "probability")?,
            },
            _ => {
                return Err(Error::InvalidStrategy(format!(
                    "unknown strategy `{s}`; expected a-type, b-type, m-det:T or threshold:T:P"
                )))
            }
        };
        named.to_strategy()?;
        Ok(named)
    }
}
