//! Single-site Metropolis chain targeting the canonical Gibbs measure
//! `P_{n,beta,K}(w) ~ exp(-beta H_n(w))` with
//! `H_n(w) = sum_j w_j^2 - (K/n) (sum_j w_j)^2`.
//!
//! Used only as a stochastic cross-check of the exact enumeration.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{domain, Result};
use crate::model::CanonicalParams;

#[derive(Debug, Clone)]
pub struct MetropolisChain {
    params: CanonicalParams,
    spins: Vec<i8>,
    total: i64,
    nonzero: i64,
    rng: ChaCha8Rng,
}

impl MetropolisChain {
    /// Starts from a uniformly random configuration drawn from `seed`.
    pub fn new(n: usize, params: &CanonicalParams, seed: u64) -> Result<Self> {
        if n == 0 {
            return Err(domain("sampler needs n >= 1"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let spins: Vec<i8> = (0..n).map(|_| rng.gen_range(-1..=1)).collect();
        let total = spins.iter().map(|&s| s as i64).sum();
        let nonzero = spins.iter().filter(|&&s| s != 0).count() as i64;
        Ok(Self {
            params: *params,
            spins,
            total,
            nonzero,
            rng,
        })
    }

    pub fn spins(&self) -> &[i8] {
        &self.spins
    }

    pub fn total_spin(&self) -> i64 {
        self.total
    }

    /// Site counts `(#{-1}, #{0}, #{+1})`.
    pub fn occupation(&self) -> [i64; 3] {
        let n = self.spins.len() as i64;
        let plus = (self.nonzero + self.total) / 2;
        [self.nonzero - plus, n - self.nonzero, plus]
    }

    /// Picks a site uniformly, proposes one of the two other spin values
    /// uniformly and accepts with probability `min(1, exp(-beta dH))`.
    pub fn step(&mut self) -> bool {
        let n = self.spins.len();
        let i = self.rng.gen_range(0..n);
        let old = self.spins[i];
        let shift: i8 = if self.rng.gen::<bool>() { 1 } else { 2 };
        let new = (old + 1 + shift).rem_euclid(3) - 1;
        let delta = (new - old) as i64;
        let s_new = self.total + delta;
        let d_quad = (new as i64 * new as i64 - old as i64 * old as i64) as f64;
        let d_inter = (s_new * s_new - self.total * self.total) as f64 * self.params.k / n as f64;
        let d_energy = d_quad - d_inter;
        let accept = d_energy <= 0.0
            || self.rng.gen::<f64>() < (-self.params.beta * d_energy).exp();
        if accept {
            self.spins[i] = new;
            self.total = s_new;
            self.nonzero += (new != 0) as i64 - (old != 0) as i64;
        }
        accept
    }
}

/// Output of [`metropolis_sampler`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SamplerRun {
    pub n: usize,
    pub steps: usize,
    pub burn_in: usize,
    pub seed: u64,
    /// Visit frequencies of `S_n`, indexed by `k + n`.
    pub spin_frequencies: Vec<f64>,
    /// Time-averaged empirical measure `(L_n(-1), L_n(0), L_n(1))`.
    pub empirical_measure: [f64; 3],
    /// `S_n` after every recorded step.
    pub trace: Vec<i32>,
    pub acceptance_rate: f64,
}

impl SamplerRun {
    /// Total variation distance between the visit frequencies and `probs`
    /// (indexed like `spin_frequencies`).
    pub fn total_variation(&self, probs: &[f64]) -> f64 {
        0.5 * self
            .spin_frequencies
            .iter()
            .zip(probs)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
    }
}

/// Burn-in used by [`metropolis_sampler`]: 20 sweeps, capped at a tenth of
/// the run.
pub fn default_burn_in(n: usize, steps: usize) -> usize {
    (20 * n).min(steps / 10)
}

/// Runs `steps` recorded Metropolis steps after [`default_burn_in`].
pub fn metropolis_sampler(
    n: usize,
    params: &CanonicalParams,
    steps: usize,
    seed: u64,
) -> Result<SamplerRun> {
    if steps == 0 {
        return Err(domain("sampler needs steps >= 1"));
    }
    let mut chain = MetropolisChain::new(n, params, seed)?;
    let burn_in = default_burn_in(n, steps);
    for _ in 0..burn_in {
        chain.step();
    }
    let mut counts = vec![0u64; 2 * n + 1];
    let mut trace = Vec::with_capacity(steps);
    let mut occupation = [0u64; 3];
    let mut accepted = 0usize;
    for _ in 0..steps {
        if chain.step() {
            accepted += 1;
        }
        let s = chain.total;
        counts[(s + n as i64) as usize] += 1;
        trace.push(s as i32);
        for (acc, c) in occupation.iter_mut().zip(chain.occupation()) {
            *acc += c as u64;
        }
    }
    let denom = steps as f64;
    let site_steps = denom * n as f64;
    Ok(SamplerRun {
        n,
        steps,
        burn_in,
        seed,
        spin_frequencies: counts.iter().map(|&c| c as f64 / denom).collect(),
        empirical_measure: [
            occupation[0] as f64 / site_steps,
            occupation[1] as f64 / site_steps,
            occupation[2] as f64 / site_steps,
        ],
        trace,
        acceptance_rate: accepted as f64 / denom,
    })
}
