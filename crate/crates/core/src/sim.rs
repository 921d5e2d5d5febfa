//! Seeded Monte-Carlo simulation of the double-spend race.
//!
//! Each trial draws the honest chain's `z` block times, the attacker's block
//! count over that span, and then settles the remaining deficit either with
//! the catch-up probability (hybrid mode) or by walking the race block by
//! block (full-walk mode).
//!
//! Trial `i` uses its own ChaCha8 stream (key from the seed, stream number
//! `i`), and per-chunk partial sums are combined in chunk order. Results are
//! therefore identical whatever the number of worker threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;

use crate::error::{domain, Error, Result};
use crate::params::{HashSplit, NetworkParams};
use crate::race::catchup_probability;

/// Trials per unit of parallel work.
const CHUNK: u64 = 8192;

/// Means at or above this are sampled by rejection instead of inversion.
const POISSON_INVERSION_LIMIT: f64 = 30.0;

/// Fewest retained trials accepted when conditioning on κ.
pub const MIN_RETAINED: u64 = 1000;

pub const DEFAULT_DEFICIT_CAP: u64 = 100;
pub const DEFAULT_KAPPA_HALF_WIDTH: f64 = 0.05;

/// How the race is settled once the honest chain has `z` blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimMode {
    /// Draw success with the closed-form catch-up probability `(q/p)^d`.
    Hybrid,
    /// Walk the race one block at a time; give up once the attacker has
    /// fallen `deficit_cap` blocks further behind than where the walk began.
    FullWalk { deficit_cap: u64 },
}

/// Restricts a simulation to races whose κ lies in `kappa ± half_width`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KappaWindow {
    pub kappa: f64,
    pub half_width: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub z: u64,
    pub trials: u64,
    pub seed: u64,
    pub mode: SimMode,
    pub window: Option<KappaWindow>,
}

impl SimConfig {
    /// Hybrid mode, no conditioning.
    pub fn new(z: u64, trials: u64, seed: u64) -> Self {
        SimConfig {
            z,
            trials,
            seed,
            mode: SimMode::Hybrid,
            window: None,
        }
    }

    pub fn full_walk(mut self, deficit_cap: u64) -> Self {
        self.mode = SimMode::FullWalk { deficit_cap };
        self
    }

    pub fn conditioned(mut self, kappa: f64, half_width: f64) -> Self {
        self.window = Some(KappaWindow { kappa, half_width });
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.z == 0 {
            return Err(domain("z", 0.0, "simulation requires z >= 1"));
        }
        if self.trials == 0 {
            return Err(domain(
                "trials",
                0.0,
                "simulation requires at least one trial",
            ));
        }
        if let SimMode::FullWalk { deficit_cap } = self.mode {
            if deficit_cap == 0 {
                return Err(domain("deficit_cap", 0.0, "deficit cap must be at least 1"));
            }
        }
        if let Some(w) = self.window {
            if !(w.kappa > 0.0) || !w.kappa.is_finite() {
                return Err(domain("kappa", w.kappa, "kappa must be positive"));
            }
            if !(w.half_width > 0.0) || !w.half_width.is_finite() {
                return Err(domain(
                    "window",
                    w.half_width,
                    "kappa window must be positive",
                ));
            }
        }
        Ok(())
    }
}

/// One simulated race.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RaceSample {
    /// Observed deviation factor `p S_z / (z τ₀)`.
    pub kappa: f64,
    /// Blocks the attacker found while the honest chain mined `z`.
    pub attacker_blocks: u64,
    pub success: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimResult {
    pub successes: u64,
    /// Trials counted, i.e. those retained by the κ window if there is one.
    pub trials: u64,
    pub p_hat: f64,
    pub std_err: f64,
    pub mean_kappa: f64,
    pub mean_attacker_blocks: f64,
}

fn trial_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn exponential<R: Rng + ?Sized>(rate: f64, rng: &mut R) -> f64 {
    // 1 - U lies in (0, 1]
    -(1.0 - rng.random::<f64>()).ln() / rate
}

fn poisson<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    if mean < POISSON_INVERSION_LIMIT {
        let u: f64 = rng.random();
        let mut k = 0u64;
        let mut term = (-mean).exp();
        let mut cdf = term;
        while u > cdf {
            k += 1;
            term *= mean / k as f64;
            cdf += term;
            if term == 0.0 {
                break;
            }
        }
        k
    } else {
        // rand_distr switches to a transformed rejection sampler at large means
        Poisson::new(mean)
            .expect("finite positive mean")
            .sample(rng) as u64
    }
}

/// Simulates one race with `z` honest confirmations.
pub fn sample_race<R: Rng + ?Sized>(
    split: &HashSplit,
    net: &NetworkParams,
    z: u64,
    mode: SimMode,
    rng: &mut R,
) -> RaceSample {
    let honest_time: f64 = (0..z).map(|_| exponential(net.alpha, rng)).sum();
    let attacker_blocks = poisson(net.alpha_prime * honest_time, rng);
    let kappa = split.p() * honest_time / (z as f64 * net.tau0);
    let success = if attacker_blocks >= z {
        true
    } else {
        let deficit = z - attacker_blocks;
        match mode {
            SimMode::Hybrid => rng.random::<f64>() < catchup_probability(split, deficit),
            SimMode::FullWalk { deficit_cap } => walk(split.q(), deficit, deficit_cap, rng),
        }
    };
    RaceSample {
        kappa,
        attacker_blocks,
        success,
    }
}

fn walk<R: Rng + ?Sized>(q: f64, deficit: u64, cap: u64, rng: &mut R) -> bool {
    let give_up = deficit + cap;
    let mut d = deficit;
    loop {
        if rng.random::<f64>() < q {
            d -= 1;
            if d == 0 {
                return true;
            }
        } else {
            d += 1;
            if d >= give_up {
                return false;
            }
        }
    }
}

#[derive(Default, Clone, Copy)]
struct Tally {
    retained: u64,
    successes: u64,
    kappa_sum: f64,
    blocks_sum: u64,
}

fn chunk_ranges(trials: u64) -> impl IndexedParallelIterator<Item = (u64, u64)> {
    let chunks = trials.div_ceil(CHUNK) as usize;
    (0..chunks).into_par_iter().map(move |c| {
        let c = c as u64;
        (c * CHUNK, ((c + 1) * CHUNK).min(trials))
    })
}

/// Runs `config.trials` independent races and reports the success frequency,
/// optionally among the races whose κ falls inside the configured window.
pub fn estimate_success(
    split: &HashSplit,
    net: &NetworkParams,
    config: &SimConfig,
) -> Result<SimResult> {
    config.validate()?;
    let tallies: Vec<Tally> = chunk_ranges(config.trials)
        .map(|(start, end)| {
            let mut t = Tally::default();
            for i in start..end {
                let mut rng = trial_rng(config.seed, i);
                let r = sample_race(split, net, config.z, config.mode, &mut rng);
                if let Some(w) = config.window {
                    if (r.kappa - w.kappa).abs() > w.half_width {
                        continue;
                    }
                }
                t.retained += 1;
                t.successes += r.success as u64;
                t.kappa_sum += r.kappa;
                t.blocks_sum += r.attacker_blocks;
            }
            t
        })
        .collect();

    let mut total = Tally::default();
    for t in &tallies {
        total.retained += t.retained;
        total.successes += t.successes;
        total.kappa_sum += t.kappa_sum;
        total.blocks_sum += t.blocks_sum;
    }

    if config.window.is_some() && total.retained < MIN_RETAINED {
        return Err(Error::Conditioning {
            retained: total.retained,
            trials: config.trials,
            required: MIN_RETAINED,
        });
    }
    if total.retained == 0 {
        return Err(Error::Conditioning {
            retained: 0,
            trials: config.trials,
            required: 1,
        });
    }
    let n = total.retained as f64;
    let p_hat = total.successes as f64 / n;
    Ok(SimResult {
        successes: total.successes,
        trials: total.retained,
        p_hat,
        std_err: (p_hat * (1.0 - p_hat) / n).sqrt(),
        mean_kappa: total.kappa_sum / n,
        mean_attacker_blocks: total.blocks_sum as f64 / n,
    })
}

/// Empirical law of the attacker's block count `X_z`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockHistogram {
    pub counts: Vec<u64>,
    pub trials: u64,
}

impl BlockHistogram {
    pub fn frequency(&self, k: usize) -> f64 {
        self.counts.get(k).copied().unwrap_or(0) as f64 / self.trials as f64
    }

    pub fn mean(&self) -> f64 {
        let weighted: u64 = self
            .counts
            .iter()
            .enumerate()
            .map(|(k, &c)| k as u64 * c)
            .sum();
        weighted as f64 / self.trials as f64
    }

    /// Most frequent count (the smallest one on ties).
    pub fn mode(&self) -> usize {
        let mut best = 0;
        for (k, &c) in self.counts.iter().enumerate() {
            if c > self.counts[best] {
                best = k;
            }
        }
        best
    }
}

/// Histogram of the attacker's block count over `config.trials` races. The κ
/// window, if any, is ignored.
pub fn estimate_negbin(
    split: &HashSplit,
    net: &NetworkParams,
    config: &SimConfig,
) -> Result<BlockHistogram> {
    config.validate()?;
    let parts: Vec<Vec<u64>> = chunk_ranges(config.trials)
        .map(|(start, end)| {
            let mut counts = Vec::new();
            for i in start..end {
                let mut rng = trial_rng(config.seed, i);
                let k = sample_race(split, net, config.z, config.mode, &mut rng).attacker_blocks
                    as usize;
                if k >= counts.len() {
                    counts.resize(k + 1, 0);
                }
                counts[k] += 1;
            }
            counts
        })
        .collect();
    let len = parts.iter().map(Vec::len).max().unwrap_or(0);
    let mut counts = vec![0u64; len];
    for part in parts {
        for (k, c) in part.into_iter().enumerate() {
            counts[k] += c;
        }
    }
    Ok(BlockHistogram {
        counts,
        trials: config.trials,
    })
}
