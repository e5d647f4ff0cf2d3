//! Exact expected payoffs for the continuous game.
//!
//! Both strategies are put on a common breakpoint grid. Inside a cell pair
//! the probability of each bet pair is constant, and the card comparison
//! has a known mean: `+1` when player 1's cell lies to the right, `-1` to
//! the left, and `0` when both cards share a cell. Every integral therefore
//! reduces to finite sums of cell widths.

use serde::Serialize;

use crate::engine::GameConfig;
use crate::error::{Error, Result};
use crate::strategy::{refine, NamedStrategy, Strategy};

/// Expected net payoff to player 1, split by bet pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PayoffValue {
    pub value: f64,
    /// Both High.
    pub hh: f64,
    /// Player 1 High, player 2 Low.
    pub hl: f64,
    /// Player 1 Low, player 2 High.
    pub lh: f64,
    /// Both Low.
    pub ll: f64,
}

pub fn expected_payoff(cfg: &GameConfig, s1: &Strategy, s2: &Strategy) -> Result<PayoffValue> {
    cfg.require_continuous()?;
    let (a, b) = (cfg.high_bet(), cfg.low_bet());
    let (r1, r2) = refine(s1, s2);

    let mass = |s: &Strategy, high: bool| -> Vec<f64> {
        s.pieces()
            .map(|p| {
                let h = if high { p.high_prob } else { 1.0 - p.high_prob };
                h * p.width()
            })
            .collect()
    };
    let (h1, l1) = (mass(&r1, true), mass(&r1, false));
    let (h2, l2) = (mass(&r2, true), mass(&r2, false));

    // Σ_i x_i (Σ_{j<i} y_j − Σ_{j>i} y_j)
    let signed = |x: &[f64], y: &[f64]| -> f64 {
        let total: f64 = y.iter().sum();
        let mut below = 0.0;
        let mut acc = 0.0;
        for (xi, yi) in x.iter().zip(y) {
            let above = total - below - yi;
            acc += xi * (below - above);
            below += yi;
        }
        acc
    };
    let sum = |x: &[f64]| -> f64 { x.iter().sum() };

    let hh = a * signed(&h1, &h2);
    let ll = b * signed(&l1, &l2);
    let hl = b * sum(&h1) * sum(&l2);
    let lh = -b * sum(&l1) * sum(&h2);
    // Adding +0.0 turns a negative zero into +0.0 so it prints as 0.0.
    let (hh, hl, lh, ll) = (hh + 0.0, hl + 0.0, lh + 0.0, ll + 0.0);
    Ok(PayoffValue {
        value: hh + hl + lh + ll + 0.0,
        hh,
        hl,
        lh,
        ll,
    })
}

/// One linear piece `start + slope * (v - lo)` on `[lo, hi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Segment {
    pub lo: f64,
    pub hi: f64,
    pub start: f64,
    pub slope: f64,
}

impl Segment {
    pub fn at(&self, v: f64) -> f64 {
        self.start + self.slope * (v - self.lo)
    }

    pub fn end(&self) -> f64 {
        self.at(self.hi)
    }

    /// `∫ f` over `[lo, hi] ∩ [self.lo, self.hi]`.
    pub fn integral(&self, lo: f64, hi: f64) -> f64 {
        let (lo, hi) = (lo.max(self.lo), hi.min(self.hi));
        if hi <= lo {
            return 0.0;
        }
        (hi - lo) * 0.5 * (self.at(lo) + self.at(hi))
    }
}

/// Continuous piecewise-linear function on `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PiecewiseLinear {
    segments: Vec<Segment>,
}

impl PiecewiseLinear {
    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    fn segment_index(&self, v: f64) -> usize {
        self.segments
            .partition_point(|s| s.lo <= v)
            .saturating_sub(1)
    }

    pub fn eval(&self, v: f64) -> f64 {
        self.segments[self.segment_index(v)].at(v)
    }

    pub fn integral(&self, lo: f64, hi: f64) -> f64 {
        let first = self.segment_index(lo);
        self.segments[first..]
            .iter()
            .take_while(|s| s.lo < hi)
            .map(|s| s.integral(lo, hi))
            .sum()
    }

    /// Pointwise difference of two functions on the same knots.
    fn minus(&self, other: &PiecewiseLinear) -> PiecewiseLinear {
        let segments = self
            .segments
            .iter()
            .zip(&other.segments)
            .map(|(x, y)| Segment {
                lo: x.lo,
                hi: x.hi,
                start: x.start - y.start,
                slope: x.slope - y.slope,
            })
            .collect();
        PiecewiseLinear { segments }
    }
}

/// Expected payoff of each action as a function of one's own card, against
/// a fixed opponent.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionalEV {
    pub ev_high: PiecewiseLinear,
    pub ev_low: PiecewiseLinear,
}

impl ConditionalEV {
    /// `ev_high − ev_low`; the value of switching a Low bet to High.
    pub fn advantage(&self) -> PiecewiseLinear {
        self.ev_high.minus(&self.ev_low)
    }
}

pub fn conditional_evs(cfg: &GameConfig, opponent: &Strategy) -> Result<ConditionalEV> {
    cfg.require_continuous()?;
    let (a, b) = (cfg.high_bet(), cfg.low_bet());
    let pieces: Vec<_> = opponent.pieces().collect();
    let total_high: f64 = pieces.iter().map(|p| p.high_prob * p.width()).sum();
    let total_low: f64 = pieces.iter().map(|p| (1.0 - p.high_prob) * p.width()).sum();

    let mut ev_high = Vec::with_capacity(pieces.len());
    let mut ev_low = Vec::with_capacity(pieces.len());
    let (mut below_high, mut below_low) = (0.0, 0.0);
    for p in &pieces {
        let w = p.width();
        let (h, l) = (p.high_prob, 1.0 - p.high_prob);
        let above_high = total_high - below_high - h * w;
        let above_low = total_low - below_low - l * w;

        // Opponent cards outside this piece compare with a fixed sign; inside
        // it, E[sgn(v − w)] runs linearly from −1 at lo to +1 at hi.
        let high_outside = a * (below_high - above_high) + b * (below_low + above_low);
        let low_outside = -b * (below_high + above_high) + b * (below_low - above_low);
        ev_high.push(Segment {
            lo: p.lo,
            hi: p.hi,
            start: high_outside - h * a * w + l * b * w,
            slope: 2.0 * a * h,
        });
        ev_low.push(Segment {
            lo: p.lo,
            hi: p.hi,
            start: low_outside - h * b * w - l * b * w,
            slope: 2.0 * b * l,
        });

        below_high += h * w;
        below_low += l * w;
    }
    Ok(ConditionalEV {
        ev_high: PiecewiseLinear { segments: ev_high },
        ev_low: PiecewiseLinear { segments: ev_low },
    })
}

fn check_ratio(ratio: f64) -> Result<()> {
    if ratio.is_finite() && ratio > 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "bet ratio a/b must be a finite number above 1 (got {ratio})"
        )))
    }
}

/// Threshold at which the marginal card is indifferent, given the
/// opponent's below-threshold High probability `p`:
/// `(ρ − 1)(1 − t) = (ρ + 1) t p`, i.e. `1/t = 1 + 3p` when `ρ = 2`.
pub fn indifference_threshold(p: f64, ratio: f64) -> Result<f64> {
    check_ratio(ratio)?;
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!(
            "p = {p} is not a probability"
        )));
    }
    let t = (ratio - 1.0) / ((ratio - 1.0) + (ratio + 1.0) * p);
    if t > 0.0 && t <= 1.0 {
        Ok(t)
    } else {
        Err(Error::InvalidParameter(format!(
            "threshold {t} for p = {p}, ratio = {ratio} is outside (0, 1]"
        )))
    }
}

/// Below-threshold High probability that makes every weak card indifferent:
/// `ρ p = 1 − p`, so `p = 1 / (ρ + 1)`.
pub fn indifference_bluff(ratio: f64) -> Result<f64> {
    check_ratio(ratio)?;
    Ok(1.0 / (ratio + 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EquilibriumPoint {
    pub t_star: f64,
    pub p_star: f64,
}

impl EquilibriumPoint {
    pub fn strategy(&self) -> Result<Strategy> {
        Strategy::threshold_mix(self.t_star, self.p_star)
    }
}

/// `t* = 1 − b/a`, `p* = b/(a + b)`.
pub fn closed_form_equilibrium(cfg: &GameConfig) -> Result<EquilibriumPoint> {
    cfg.require_continuous()?;
    let ratio = cfg.ratio();
    let p_star = indifference_bluff(ratio)?;
    let t_star = indifference_threshold(p_star, ratio)?;
    Ok(EquilibriumPoint { t_star, p_star })
}

/// Row type's payoff against column type for always-High, always-Low and
/// the deterministic 0.5 threshold.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TaxonomyTable {
    pub labels: [&'static str; 3],
    pub entries: [[PayoffValue; 3]; 3],
}

pub const TAXONOMY_THRESHOLD: f64 = 0.5;

pub fn taxonomy_table(cfg: &GameConfig) -> Result<TaxonomyTable> {
    cfg.require_continuous()?;
    let types = [
        NamedStrategy::AType,
        NamedStrategy::BType,
        NamedStrategy::MDeterministic(TAXONOMY_THRESHOLD),
    ];
    let strategies = types
        .iter()
        .map(|t| t.to_strategy())
        .collect::<Result<Vec<_>>>()?;
    let mut entries = [[PayoffValue {
        value: 0.0,
        hh: 0.0,
        hl: 0.0,
        lh: 0.0,
        ll: 0.0,
    }; 3]; 3];
    for (i, row) in strategies.iter().enumerate() {
        for (j, col) in strategies.iter().enumerate() {
            entries[i][j] = expected_payoff(cfg, row, col)?;
        }
    }
    Ok(TaxonomyTable {
        labels: ["a-type", "b-type", "m-type"],
        entries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::CardModel;

    const THIRD: f64 = 1.0 / 3.0;

    fn cfg() -> GameConfig {
        GameConfig::default()
    }

    #[test]
    fn payoff_examples() {
        let sigma = Strategy::threshold_mix(0.5, THIRD).unwrap();
        assert_eq!(expected_payoff(&cfg(), &sigma, &sigma).unwrap().value, 0.0);
        let ab = expected_payoff(&cfg(), &Strategy::always_high(), &Strategy::always_low()).unwrap();
        assert_eq!(ab.value, 1.0);
        assert_eq!(ab.hl, 1.0);
        let m = Strategy::deterministic_threshold(0.5).unwrap();
        let mb = expected_payoff(&cfg(), &m, &Strategy::always_low()).unwrap();
        assert!((mb.value - 0.25).abs() < 1e-15);
        let ma = expected_payoff(&cfg(), &m, &Strategy::always_high()).unwrap();
        assert!(ma.value.abs() < 1e-15);
        let sum = ma.hh + ma.hl + ma.lh + ma.ll;
        assert!((sum - ma.value).abs() < 1e-15);
    }

    #[test]
    fn discrete_model_rejected() {
        let d = cfg().with_card_model(CardModel::Discrete { cards: 5 }).unwrap();
        let s = Strategy::always_high();
        assert_eq!(
            expected_payoff(&d, &s, &s).unwrap_err(),
            Error::ContinuousModelRequired
        );
        assert!(conditional_evs(&d, &s).is_err());
        assert!(closed_form_equilibrium(&d).is_err());
    }

    #[test]
    fn evs_against_always_high() {
        // ev_high(v) = a(2v − 1), ev_low(v) = −b
        let evs = conditional_evs(&cfg(), &Strategy::always_high()).unwrap();
        for i in 0..=20 {
            let v = i as f64 / 20.0;
            assert!((evs.ev_high.eval(v) - 2.0 * (2.0 * v - 1.0)).abs() < 1e-15);
            assert!((evs.ev_low.eval(v) + 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn evs_indifferent_below_equilibrium_threshold() {
        let sigma = Strategy::threshold_mix(0.5, THIRD).unwrap();
        let d = conditional_evs(&cfg(), &sigma).unwrap().advantage();
        for i in 0..500 {
            let v = i as f64 / 1000.0;
            assert!(d.eval(v).abs() < 1e-15, "v={v} d={}", d.eval(v));
        }
        for i in 501..=1000 {
            assert!(d.eval(i as f64 / 1000.0) > 0.0);
        }
    }

    #[test]
    fn indifference_examples() {
        assert_eq!(indifference_threshold(THIRD, 2.0).unwrap(), 0.5);
        assert_eq!(indifference_threshold(0.0, 2.0).unwrap(), 1.0);
        let t = indifference_threshold(0.25, 3.0).unwrap();
        assert!((t - 2.0 / 3.0).abs() < 1e-15);
        // (ρ − 1)(1 − t) = (ρ + 1) t p
        assert!((2.0 * (1.0 - t) - 4.0 * t * 0.25).abs() < 1e-15);
        assert!(indifference_threshold(1.2, 2.0).is_err());
        assert!(indifference_threshold(0.3, 1.0).is_err());

        assert_eq!(indifference_bluff(2.0).unwrap(), THIRD);
        assert_eq!(indifference_bluff(3.0).unwrap(), 0.25);
        assert!((indifference_bluff(1.0 + 1e-12).unwrap() - 0.5).abs() < 1e-12);
        assert!(indifference_bluff(1.0).is_err());
        assert!(indifference_bluff(0.5).is_err());
        assert!(indifference_bluff(f64::INFINITY).is_err());
    }

    #[test]
    fn closed_form_examples() {
        let e = closed_form_equilibrium(&cfg()).unwrap();
        assert_eq!(e.t_star, 0.5);
        assert_eq!(e.p_star, THIRD);
        for (ratio, t, p) in [(3.0, 2.0 / 3.0, 0.25), (1.5, 1.0 / 3.0, 0.4)] {
            let e = closed_form_equilibrium(&GameConfig::with_ratio(ratio).unwrap()).unwrap();
            assert!((e.t_star - t).abs() < 1e-15, "{ratio}: {}", e.t_star);
            assert!((e.p_star - p).abs() < 1e-15, "{ratio}: {}", e.p_star);
            assert!((e.t_star - (1.0 - 1.0 / ratio)).abs() < 1e-15);
        }
    }

    #[test]
    fn marginal_card_is_indifferent_at_general_ratios() {
        for ratio in [1.25, 1.5, 2.0, 3.0, 7.0] {
            let c = GameConfig::with_ratio(ratio).unwrap();
            let e = closed_form_equilibrium(&c).unwrap();
            let d = conditional_evs(&c, &e.strategy().unwrap()).unwrap().advantage();
            assert!(d.eval(e.t_star).abs() < 1e-14, "{ratio}");
            assert!(d.eval(e.t_star * 0.5).abs() < 1e-14, "{ratio}");
        }
    }

    #[test]
    fn taxonomy_at_default_bets() {
        let t = taxonomy_table(&cfg()).unwrap();
        let v = |i: usize, j: usize| t.entries[i][j].value;
        for i in 0..3 {
            assert_eq!(v(i, i), 0.0);
            for j in 0..3 {
                assert!((v(i, j) + v(j, i)).abs() < 1e-15);
            }
        }
        assert_eq!(v(0, 1), 1.0);
        assert!((v(2, 1) - 0.25).abs() < 1e-15);
        assert!(v(2, 0).abs() < 1e-15);
        assert!((v(1, 2) + 0.25).abs() < 1e-15);
    }

    #[test]
    fn piecewise_integral_matches_segments() {
        let evs = conditional_evs(&cfg(), &Strategy::threshold_mix(0.3, 0.6).unwrap()).unwrap();
        let f = &evs.ev_high;
        let whole: f64 = f.segments().iter().map(|s| s.integral(0.0, 1.0)).sum();
        assert!((f.integral(0.0, 1.0) - whole).abs() < 1e-15);
        assert!((f.integral(0.0, 0.6) + f.integral(0.6, 1.0) - whole).abs() < 1e-15);
    }
}
