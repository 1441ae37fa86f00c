use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// A Monte-Carlo success rate with its 95% Wilson interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub successes: usize,
    pub trials: usize,
    pub p: f64,
    pub lo: f64,
    pub hi: f64,
}

impl Estimate {
    pub fn from_counts(successes: usize, trials: usize) -> Self {
        let (lo, hi) = wilson(successes, trials, 1.96);
        let p = if trials == 0 { 0.0 } else { successes as f64 / trials as f64 };
        Self { successes, trials, p, lo, hi }
    }
}

/// Wilson score interval for `successes` out of `trials` at normal quantile `z`.
pub fn wilson(successes: usize, trials: usize, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
    let half = z / (1.0 + z2 / n) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// The generator for one trial: stream `trial` of the master seed.
pub fn trial_rng(master: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(trial);
    rng
}

/// Runs `trials` independent trials in parallel. Results do not depend on thread count.
pub fn success_probability<F, E>(trials: usize, master: u64, trial: F) -> Result<Estimate, E>
where
    F: Fn(&mut ChaCha8Rng, usize) -> Result<bool, E> + Sync,
    E: Send,
{
    let outcomes: Vec<bool> = (0..trials)
        .into_par_iter()
        .map(|t| trial(&mut trial_rng(master, t as u64), t))
        .collect::<Result<_, _>>()?;
    Ok(Estimate::from_counts(outcomes.iter().filter(|&&b| b).count(), trials))
}
