//! Best responses, exploitability and fictitious play.

use rayon::prelude::*;
use serde::Serialize;

use crate::analytic::{closed_form_equilibrium, conditional_evs, PiecewiseLinear};
use crate::engine::GameConfig;
use crate::error::{Error, Result};
use crate::strategy::Strategy;

/// Advantage magnitudes below this fraction of `a` count as ties (High).
const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BestResponse {
    /// Pure rule: every piece has probability 0 or 1.
    pub action_rule: Strategy,
    pub value: f64,
}

/// Pointwise argmax of the conditional action values against `opponent`.
///
/// The advantage of High over Low is linear on each opponent piece, so the
/// switch points are found by one linear solve per piece.
pub fn best_response(cfg: &GameConfig, opponent: &Strategy) -> Result<BestResponse> {
    let evs = conditional_evs(cfg, opponent)?;
    let advantage = evs.advantage();
    let tol = TIE_TOLERANCE * cfg.high_bet();
    let prefers_high = |d: f64| d >= -tol;

    // (start of interval, bets High?)
    let mut runs: Vec<(f64, bool)> = Vec::new();
    let mut push = |lo: f64, high: bool| match runs.last() {
        Some(&(_, last)) if last == high => {}
        _ => runs.push((lo, high)),
    };
    for seg in advantage.segments() {
        let (d0, d1) = (seg.start, seg.end());
        let (h0, h1) = (prefers_high(d0), prefers_high(d1));
        push(seg.lo, h0);
        if h0 != h1 {
            let root = seg.lo - d0 / seg.slope;
            if root > seg.lo && root < seg.hi {
                push(root, h1);
            }
        }
    }

    let mut breakpoints = Vec::with_capacity(runs.len());
    let mut high_prob = Vec::with_capacity(runs.len());
    let mut value = 0.0;
    for (i, &(lo, high)) in runs.iter().enumerate() {
        let hi = runs.get(i + 1).map_or(1.0, |r| r.0);
        if i > 0 {
            breakpoints.push(lo);
        }
        high_prob.push(if high { 1.0 } else { 0.0 });
        let ev = if high { &evs.ev_high } else { &evs.ev_low };
        value += ev.integral(lo, hi);
    }
    Ok(BestResponse {
        action_rule: Strategy::new(breakpoints, high_prob)?,
        value,
    })
}

/// Best-response value against `s`; zero exactly for equilibrium strategies
/// of this symmetric zero-sum game. Rounding noise below zero is clamped.
pub fn exploitability(cfg: &GameConfig, s: &Strategy) -> Result<f64> {
    Ok(best_response(cfg, s)?.value.max(0.0))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquilibriumResult {
    pub strategy: Strategy,
    pub exploitability: f64,
    pub iterations: u64,
    pub bin_count: usize,
    pub converged: bool,
}

/// Threshold-form reading of a binned strategy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThresholdSummary {
    /// Left edge of the trailing run of bins that (almost) always bet High.
    pub threshold: f64,
    /// Width-weighted mean High probability below `threshold`.
    pub mean_below: f64,
}

impl EquilibriumResult {
    pub fn threshold_summary(&self) -> ThresholdSummary {
        summarize_threshold(&self.strategy, 1e-3)
    }
}

pub fn summarize_threshold(s: &Strategy, slack: f64) -> ThresholdSummary {
    let pieces: Vec<_> = s.pieces().collect();
    let first_high = pieces
        .iter()
        .rposition(|p| p.high_prob < 1.0 - slack)
        .map_or(0, |i| i + 1);
    let threshold = pieces.get(first_high).map_or(1.0, |p| p.lo);
    let below = &pieces[..first_high];
    let mean_below = if threshold > 0.0 {
        below.iter().map(|p| p.high_prob * p.width()).sum::<f64>() / threshold
    } else {
        f64::NAN
    };
    ThresholdSummary {
        threshold,
        mean_below,
    }
}

/// Fictitious play between a strategy restricted to `K` uniform bins and an
/// unrestricted best responder.
///
/// The binned side best-responds bin by bin to the average of the
/// responder's past rules; the responder answers the binned side's running
/// average exactly. That exact answer is also the exploitability of the
/// average, so every round certifies its own progress. The starting point
/// `h ≡ 0.5` seeds the first response and is not part of the average.
#[derive(Debug, Clone)]
pub struct FictitiousPlay {
    cfg: GameConfig,
    bins: usize,
    high_counts: Vec<u64>,
    rounds: u64,
    /// Σ over responder rules of ∫_bin (ev_high − ev_low).
    advantage: Vec<f64>,
    average: Strategy,
    exploitability: f64,
    best: (Strategy, f64, u64),
}

impl FictitiousPlay {
    pub fn new(cfg: &GameConfig, bins: usize) -> Result<Self> {
        cfg.require_continuous()?;
        if bins < 2 {
            return Err(Error::InvalidParameter(format!(
                "fictitious play needs at least 2 bins (got {bins})"
            )));
        }
        let average = Strategy::binned(&vec![0.5; bins])?;
        let mut fp = Self {
            cfg: *cfg,
            bins,
            high_counts: vec![0; bins],
            rounds: 0,
            advantage: vec![0.0; bins],
            average: average.clone(),
            exploitability: f64::INFINITY,
            best: (average, f64::INFINITY, 0),
        };
        fp.respond()?;
        Ok(fp)
    }

    /// Best-responds to the current average, records its exploitability and
    /// folds the response into the binned side's payoff sums.
    fn respond(&mut self) -> Result<()> {
        let br = best_response(&self.cfg, &self.average)?;
        self.exploitability = br.value.max(0.0);
        if self.exploitability < self.best.1 {
            self.best = (self.average.clone(), self.exploitability, self.rounds);
        }
        let advantage = conditional_evs(&self.cfg, &br.action_rule)?.advantage();
        for (acc, x) in self
            .advantage
            .iter_mut()
            .zip(bin_integrals(&advantage, self.bins))
        {
            *acc += x;
        }
        Ok(())
    }

    pub fn step(&mut self) -> Result<()> {
        for (count, adv) in self.high_counts.iter_mut().zip(&self.advantage) {
            if *adv >= 0.0 {
                *count += 1;
            }
        }
        self.rounds += 1;
        let n = self.rounds as f64;
        let probs: Vec<f64> = self.high_counts.iter().map(|&c| c as f64 / n).collect();
        self.average = Strategy::binned(&probs)?;
        self.respond()
    }

    pub fn average(&self) -> &Strategy {
        &self.average
    }

    pub fn exploitability(&self) -> f64 {
        self.exploitability
    }

    pub fn rounds(&self) -> u64 {
        self.rounds
    }

    fn result(&self, epsilon: f64) -> EquilibriumResult {
        let converged = self.exploitability <= epsilon;
        let (strategy, exploitability, iterations) = if converged {
            (self.average.clone(), self.exploitability, self.rounds)
        } else {
            self.best.clone()
        };
        EquilibriumResult {
            strategy,
            exploitability,
            iterations,
            bin_count: self.bins,
            converged,
        }
    }
}

/// `∫ f` over each of `k` uniform bins of `[0, 1]`.
fn bin_integrals(f: &PiecewiseLinear, k: usize) -> Vec<f64> {
    let segs = f.segments();
    let mut out = vec![0.0; k];
    let mut s = 0;
    for (i, slot) in out.iter_mut().enumerate() {
        let lo = i as f64 / k as f64;
        let hi = (i + 1) as f64 / k as f64;
        while s + 1 < segs.len() && segs[s].hi <= lo {
            s += 1;
        }
        let mut j = s;
        while j < segs.len() && segs[j].lo < hi {
            *slot += segs[j].integral(lo, hi);
            j += 1;
        }
    }
    out
}

/// Runs fictitious play until the average is within `epsilon` of an
/// equilibrium or `max_iters` rounds pass. Without convergence the least
/// exploitable average seen is returned with `converged = false`.
pub fn fictitious_play(
    cfg: &GameConfig,
    bins: usize,
    epsilon: f64,
    max_iters: u64,
) -> Result<EquilibriumResult> {
    if epsilon.is_nan() || epsilon <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "epsilon must be positive (got {epsilon})"
        )));
    }
    let mut fp = FictitiousPlay::new(cfg, bins)?;
    while fp.exploitability > epsilon && fp.rounds < max_iters {
        fp.step()?;
    }
    Ok(fp.result(epsilon))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub ratio: f64,
    pub t_star: f64,
    pub p_star: f64,
    /// Exploitability reached by fictitious play (in units of `b`).
    pub exploitability: f64,
    pub iterations: u64,
    pub converged: bool,
}

/// Closed-form equilibrium per ratio (`b = 1`, `a = ratio`) alongside a
/// fictitious-play solve of the same game.
pub fn ratio_sweep(
    ratios: &[f64],
    bins: usize,
    epsilon: f64,
    max_iters: u64,
) -> Result<Vec<SweepRow>> {
    if ratios.is_empty() {
        return Err(Error::InvalidParameter("no ratios to sweep".into()));
    }
    let configs = ratios
        .iter()
        .map(|&r| GameConfig::with_ratio(r))
        .collect::<Result<Vec<_>>>()?;
    configs
        .par_iter()
        .map(|cfg| {
            let eq = closed_form_equilibrium(cfg)?;
            let solved = fictitious_play(cfg, bins, epsilon, max_iters)?;
            Ok(SweepRow {
                ratio: cfg.ratio(),
                t_star: eq.t_star,
                p_star: eq.p_star,
                exploitability: solved.exploitability,
                iterations: solved.iterations,
                converged: solved.converged,
            })
        })
        .collect()
}
