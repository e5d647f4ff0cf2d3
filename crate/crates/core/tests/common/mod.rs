//! Shared test support: random strategies and a quadrature oracle that works
//! from `settle` alone, independent of the cell-decomposition code.

#![allow(dead_code)]

use bluffsolve::{settle, BetAction, Card, GameConfig, Strategy};
use rand::Rng;

/// Expected settlement to player 1 for fixed cards, averaging over both
/// players' bet randomization. Ties (Replay) contribute nothing.
pub fn settle_mean(cfg: &GameConfig, v: f64, h1: f64, w: f64, h2: f64) -> f64 {
    let (c1, c2) = (Card::new(v).unwrap(), Card::new(w).unwrap());
    let mut total = 0.0;
    for (b1, p1) in [(BetAction::High, h1), (BetAction::Low, 1.0 - h1)] {
        for (b2, p2) in [(BetAction::High, h2), (BetAction::Low, 1.0 - h2)] {
            total += p1 * p2 * settle(c1, c2, b1, b2).payoff_to_p1(cfg);
        }
    }
    total
}

fn split_points(mut cuts: Vec<f64>) -> Vec<f64> {
    cuts.push(0.0);
    cuts.push(1.0);
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup();
    cuts
}

/// Composite midpoint rule with `m` nodes per subinterval after splitting at
/// every discontinuity in `cuts`.
fn midpoint<F: Fn(f64) -> f64>(cuts: Vec<f64>, m: usize, f: F) -> f64 {
    let grid = split_points(cuts);
    grid.windows(2)
        .map(|ab| {
            let (lo, hi) = (ab[0], ab[1]);
            let h = (hi - lo) / m as f64;
            (0..m).map(|k| f(lo + (k as f64 + 0.5) * h)).sum::<f64>() * h
        })
        .sum()
}

/// Quadrature of the value of `bet` with card `v` against `opponent`.
pub fn quad_action_value(cfg: &GameConfig, opponent: &Strategy, v: f64, bet: BetAction) -> f64 {
    let h1 = match bet {
        BetAction::High => 1.0,
        BetAction::Low => 0.0,
    };
    let mut cuts = opponent.breakpoints().to_vec();
    cuts.push(v);
    midpoint(cuts, 8, |w| {
        settle_mean(cfg, v, h1, w, opponent.high_probability(w).unwrap())
    })
}

/// Nested quadrature of the expected payoff of `s1` against `s2`.
/// The inner integrand is piecewise constant and the outer piecewise linear
/// between split points, so the midpoint rule is exact up to rounding.
pub fn quad_payoff(cfg: &GameConfig, s1: &Strategy, s2: &Strategy) -> f64 {
    let mut cuts = s1.breakpoints().to_vec();
    cuts.extend_from_slice(s2.breakpoints());
    midpoint(cuts, 4, |v| {
        let h = s1.high_probability(v).unwrap();
        h * quad_action_value(cfg, s2, v, BetAction::High)
            + (1.0 - h) * quad_action_value(cfg, s2, v, BetAction::Low)
    })
}

/// Random piecewise strategy with 1 to `max_pieces` pieces. Probabilities are
/// occasionally pinned to 0 or 1.
pub fn random_strategy<R: Rng>(rng: &mut R, max_pieces: usize) -> Strategy {
    let pieces = rng.gen_range(1..=max_pieces);
    let mut cuts: Vec<f64> = (0..pieces - 1).map(|_| rng.gen_range(0.001..0.999)).collect();
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup();
    let probs = (0..=cuts.len()).map(|_| random_prob(rng)).collect();
    Strategy::new(cuts, probs).unwrap()
}

/// Random strategy whose breakpoints lie on the grid `{k / (cards - 1)}`.
pub fn random_grid_strategy<R: Rng>(rng: &mut R, max_pieces: usize, cards: u32) -> Strategy {
    let pieces = rng.gen_range(1..=max_pieces);
    let mut idx: Vec<u32> = (0..pieces - 1).map(|_| rng.gen_range(1..cards - 1)).collect();
    idx.sort_unstable();
    idx.dedup();
    let cuts = idx
        .iter()
        .map(|&k| f64::from(k) / f64::from(cards - 1))
        .collect::<Vec<_>>();
    let probs = (0..=cuts.len()).map(|_| random_prob(rng)).collect();
    Strategy::new(cuts, probs).unwrap()
}

fn random_prob<R: Rng>(rng: &mut R) -> f64 {
    match rng.gen_range(0..6) {
        0 => 0.0,
        1 => 1.0,
        _ => rng.gen::<f64>(),
    }
}

pub fn sigma_star() -> Strategy {
    Strategy::threshold_mix(0.5, 1.0 / 3.0).unwrap()
}
