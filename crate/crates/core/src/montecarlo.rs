//! Seeded Monte Carlo estimates and exact enumeration of discrete decks.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::engine::{exact, play_hand_seated, CardModel, GameConfig};
use crate::error::{Error, Result};
use crate::strategy::Strategy;

pub const DEFAULT_CHUNK_SIZE: u64 = 1 << 16;

/// Largest deck `brute_force_discrete` will enumerate.
pub const MAX_ENUMERATED_CARDS: u32 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MCEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub hands: u64,
    pub seed: u64,
    /// Fraction of deals that ended in a replay.
    pub replay_rate: f64,
    pub chunk_size: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimulationOptions {
    /// Hands per independent random stream; chunk `c` uses stream `c` of
    /// the ChaCha8 generator keyed by the seed.
    pub chunk_size: u64,
    /// Hand each seat the random draws of the other seat.
    pub mirrored: bool,
}

impl Default for SimulationOptions {
    fn default() -> Self {
        Self {
            chunk_size: DEFAULT_CHUNK_SIZE,
            mirrored: false,
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
    replays: u64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(self, other: Moments) -> Moments {
        if self.n == 0 {
            return other;
        }
        if other.n == 0 {
            return self;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        let (na, nb, nf) = (self.n as f64, other.n as f64, n as f64);
        Moments {
            n,
            mean: self.mean + delta * nb / nf,
            m2: self.m2 + other.m2 + delta * delta * na * nb / nf,
            replays: self.replays + other.replays,
        }
    }
}

pub fn simulate(
    cfg: &GameConfig,
    s1: &Strategy,
    s2: &Strategy,
    hands: u64,
    seed: u64,
) -> Result<MCEstimate> {
    simulate_with(cfg, s1, s2, hands, seed, &SimulationOptions::default())
}

/// Mean net payoff to player 1 over `hands` settled hands. The result is a
/// pure function of the inputs and `opts.chunk_size`, however the chunks are
/// scheduled across threads.
pub fn simulate_with(
    cfg: &GameConfig,
    s1: &Strategy,
    s2: &Strategy,
    hands: u64,
    seed: u64,
    opts: &SimulationOptions,
) -> Result<MCEstimate> {
    if hands == 0 {
        return Err(Error::InvalidParameter("hands must be at least 1".into()));
    }
    if opts.chunk_size == 0 {
        return Err(Error::InvalidParameter("chunk size must be at least 1".into()));
    }
    let chunks = hands.div_ceil(opts.chunk_size);
    let per_chunk = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c);
            let n = opts.chunk_size.min(hands - c * opts.chunk_size);
            let mut m = Moments::default();
            for _ in 0..n {
                let r = play_hand_seated(cfg, s1, s2, &mut rng, opts.mirrored)?;
                m.push(r.payoff);
                m.replays += u64::from(r.replays);
            }
            Ok(m)
        })
        .collect::<Result<Vec<_>>>()?;
    let total = per_chunk
        .into_iter()
        .fold(Moments::default(), Moments::merge);

    let n = total.n as f64;
    let std_error = if total.n > 1 {
        (total.m2 / (n - 1.0)).sqrt() / n.sqrt()
    } else {
        0.0
    };
    Ok(MCEstimate {
        mean: total.mean,
        std_error,
        hands: total.n,
        seed,
        replay_rate: total.replays as f64 / (total.n + total.replays) as f64,
        chunk_size: opts.chunk_size,
    })
}

/// One [`simulate`] per entry of `schedule`; row `i` uses seed `seed + i`.
pub fn convergence_report(
    cfg: &GameConfig,
    s1: &Strategy,
    s2: &Strategy,
    schedule: &[u64],
    seed: u64,
) -> Result<Vec<MCEstimate>> {
    schedule
        .iter()
        .enumerate()
        .map(|(i, &hands)| simulate(cfg, s1, s2, hands, seed.wrapping_add(i as u64)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactDiscreteValue {
    /// Expected net payoff to player 1 per settled hand.
    pub value: BigRational,
    /// Probability that a single deal ends in a replay.
    pub replay_probability: BigRational,
}

impl ExactDiscreteValue {
    pub fn value_f64(&self) -> f64 {
        self.value.to_f64().unwrap_or(f64::NAN)
    }

    pub fn replay_probability_f64(&self) -> f64 {
        self.replay_probability.to_f64().unwrap_or(f64::NAN)
    }
}

/// Maximal runs `[start, end)` of deck indices sharing one High probability.
fn runs(s: &Strategy, cards: u32) -> Vec<(u32, u32, BigRational)> {
    let mut out: Vec<(u32, u32, f64)> = Vec::new();
    for i in 0..cards {
        let h = s.prob_at(f64::from(i) / f64::from(cards - 1));
        match out.last_mut() {
            Some(last) if last.2 == h => last.1 = i + 1,
            _ => out.push((i, i + 1, h)),
        }
    }
    out.into_iter().map(|(s, e, h)| (s, e, exact(h))).collect()
}

/// Exact value of the discrete-deck game: every ordered card pair and every
/// bet pair is weighted by its exact probability, and replays are removed by
/// conditioning on a settled deal.
pub fn brute_force_discrete(
    cfg: &GameConfig,
    s1: &Strategy,
    s2: &Strategy,
) -> Result<ExactDiscreteValue> {
    let CardModel::Discrete { cards } = cfg.card_model() else {
        return Err(Error::DiscreteModelRequired);
    };
    if cards > MAX_ENUMERATED_CARDS {
        return Err(Error::DeckTooLarge(cards, MAX_ENUMERATED_CARDS));
    }
    let a = cfg.high_bet_exact();
    let b = cfg.low_bet_exact();
    let one = BigRational::one();
    let int = |n: i64| BigRational::from_integer(BigInt::from(n));

    let runs1 = runs(s1, cards);
    let runs2 = runs(s2, cards);
    let (settled, replay) = runs1
        .par_iter()
        .map(|(start1, end1, h1)| {
            let l1 = &one - h1;
            let mut settled = BigRational::zero();
            let mut replay = BigRational::zero();
            for (start2, end2, h2) in &runs2 {
                let l2 = &one - h2;
                let len2 = i64::from(end2 - start2);
                let (mut wins, mut ties) = (0i64, 0i64);
                for i in *start1..*end1 {
                    wins += i64::from(i.clamp(*start2, *end2) - start2);
                    ties += i64::from((*start2..*end2).contains(&i));
                }
                let pairs = i64::from(end1 - start1) * len2;
                let losses = pairs - wins - ties;
                let net = int(wins - losses);
                settled += h1 * h2 * &a * &net;
                settled += &l1 * &l2 * &b * &net;
                settled += h1 * &l2 * &b * int(pairs);
                settled -= &l1 * h2 * &b * int(pairs);
                replay += (h1 * h2 + &l1 * &l2) * int(ties);
            }
            (settled, replay)
        })
        .reduce(
            || (BigRational::zero(), BigRational::zero()),
            |x, y| (x.0 + y.0, x.1 + y.1),
        );

    let total = int(i64::from(cards) * i64::from(cards));
    let replay_probability = replay / &total;
    if replay_probability >= one {
        return Err(Error::DegenerateReplay);
    }
    let value = settled / total / (one - &replay_probability);
    Ok(ExactDiscreteValue {
        value,
        replay_probability,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rational(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn deck(cards: u32) -> GameConfig {
        GameConfig::new(2.0, 1.0, CardModel::Discrete { cards }).unwrap()
    }

    #[test]
    fn constant_payoff_has_zero_error() {
        let e = simulate(
            &GameConfig::default(),
            &Strategy::always_high(),
            &Strategy::always_low(),
            10_000,
            17,
        )
        .unwrap();
        assert_eq!(e.mean, 1.0);
        assert_eq!(e.std_error, 0.0);
        assert_eq!(e.hands, 10_000);
        assert_eq!(e.replay_rate, 0.0);
    }

    #[test]
    fn zero_hands_rejected() {
        let s = Strategy::always_high();
        assert!(simulate(&GameConfig::default(), &s, &s, 0, 1).is_err());
    }

    #[test]
    fn chunking_is_deterministic() {
        let cfg = GameConfig::default();
        let s1 = Strategy::threshold_mix(0.4, 0.3).unwrap();
        let s2 = Strategy::threshold_mix(0.6, 0.1).unwrap();
        let opts = SimulationOptions {
            chunk_size: 1000,
            mirrored: false,
        };
        let x = simulate_with(&cfg, &s1, &s2, 25_500, 3, &opts).unwrap();
        let y = simulate_with(&cfg, &s1, &s2, 25_500, 3, &opts).unwrap();
        assert_eq!(x, y);
        assert_eq!(x.hands, 25_500);
        let z = simulate_with(&cfg, &s1, &s2, 25_500, 4, &opts).unwrap();
        assert_ne!(x.mean, z.mean);
    }

    #[test]
    fn brute_force_examples() {
        let hi = Strategy::always_high();
        let lo = Strategy::always_low();
        let r = brute_force_discrete(&deck(2), &hi, &hi).unwrap();
        assert_eq!(r.value, BigRational::zero());
        assert_eq!(r.replay_probability, rational(1, 2));

        let r = brute_force_discrete(&deck(3), &hi, &lo).unwrap();
        assert_eq!(r.value, BigRational::one());
        assert_eq!(r.replay_probability, BigRational::zero());

        let sigma = Strategy::threshold_mix(0.5, 1.0 / 3.0).unwrap();
        let r = brute_force_discrete(&deck(101), &sigma, &sigma).unwrap();
        assert_eq!(r.value, BigRational::zero());
    }

    #[test]
    fn brute_force_requires_small_discrete_deck() {
        let s = Strategy::always_high();
        assert_eq!(
            brute_force_discrete(&GameConfig::default(), &s, &s).unwrap_err(),
            Error::DiscreteModelRequired
        );
        assert!(matches!(
            brute_force_discrete(&deck(10_001), &s, &s),
            Err(Error::DeckTooLarge(10_001, _))
        ));
    }

    #[test]
    fn moments_merge_matches_sequential() {
        let xs: Vec<f64> = (0..100).map(|i| ((i * 37) % 11) as f64 - 3.0).collect();
        let mut all = Moments::default();
        xs.iter().for_each(|&x| all.push(x));
        let (mut a, mut b) = (Moments::default(), Moments::default());
        xs[..40].iter().for_each(|&x| a.push(x));
        xs[40..].iter().for_each(|&x| b.push(x));
        let m = a.merge(b);
        assert!((m.mean - all.mean).abs() < 1e-12);
        assert!((m.m2 - all.m2).abs() < 1e-9);
    }
}
