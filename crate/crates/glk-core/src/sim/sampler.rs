//! The seeded synthetic stand-in for Chebotarev draws: a pool of fresh
//! candidate nice primes, uniform cocycle evaluations over their supports,
//! and residue draws for unramified trace data.

use thiserror::Error;

use crate::primes::prime_sieve;
use crate::sim::rng::SimRng;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SamplerError {
    #[error("candidate stream exhausted after {draws} draws (budget {budget})")]
    ExhaustedStream { draws: u32, budget: u32 },
}

#[derive(Debug, Clone)]
pub struct SamplerConfig {
    pub p: u64,
    pub seed: u64,
    /// Candidate nice primes are drawn strictly above this floor, keeping
    /// them disjoint from every stage's pinned-prime range.
    pub prime_floor: u64,
    /// Total draw budget; hitting it signals a mis-configured sampler.
    pub max_draws: u32,
    /// Minimum pool size to sieve for.
    pub pool_target: usize,
}

impl SamplerConfig {
    pub fn new(p: u64, seed: u64, prime_floor: u64) -> Self {
        SamplerConfig {
            p,
            seed,
            prime_floor,
            max_draws: 4096,
            pool_target: 4096,
        }
    }
}

/// One sampled candidate with its cocycle evaluations: the self value
/// `f_t(sigma_t)`, the value at the target prime normalized to 1, and the
/// invariant of the ramified component cupped with the normalized
/// unramified class (always a unit).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CocycleProfile {
    pub label: u64,
    pub self_value: u64,
    pub q_value: u64,
    pub cup_value: u64,
}

#[derive(Debug, Clone)]
pub struct SyntheticChebotarev {
    pub p: u64,
    rng: SimRng,
    pool: Vec<u64>,
    draws: u32,
    budget: u32,
}

impl SyntheticChebotarev {
    pub fn new(config: &SamplerConfig) -> Self {
        let p = config.p;
        // Sieve far enough that the pool comfortably exceeds the target.
        let mut limit = (config.prime_floor.max(100)) * 2 + 10_000;
        let pool = loop {
            let pool: Vec<u64> = prime_sieve(limit)
                .expect("limit >= 2")
                .into_iter()
                .filter(|&q| q > config.prime_floor && q != p && q % p != 1 && q % p != p - 1)
                .collect();
            if pool.len() >= config.pool_target {
                break pool;
            }
            limit *= 2;
        };
        SyntheticChebotarev {
            p,
            rng: SimRng::new(config.seed),
            pool,
            draws: 0,
            budget: config.max_draws,
        }
    }

    fn budget_tick(&mut self) -> Result<(), SamplerError> {
        self.draws += 1;
        if self.draws > self.budget || self.pool.is_empty() {
            return Err(SamplerError::ExhaustedStream {
                draws: self.draws,
                budget: self.budget,
            });
        }
        Ok(())
    }

    /// A fresh candidate nice prime, removed from the pool.
    pub fn draw_nice_prime(&mut self) -> Result<u64, SamplerError> {
        self.budget_tick()?;
        let idx = self.rng.below(self.pool.len() as u64) as usize;
        Ok(self.pool.swap_remove(idx))
    }

    /// A fresh candidate with uniform cocycle data.
    pub fn draw_profile(&mut self) -> Result<CocycleProfile, SamplerError> {
        let label = self.draw_nice_prime()?;
        let self_value = self.rng.below(self.p);
        let cup_value = 1 + self.rng.below(self.p - 1);
        Ok(CocycleProfile {
            label,
            self_value,
            q_value: 1,
            cup_value,
        })
    }

    pub fn draw_fp(&mut self) -> u64 {
        self.rng.below(self.p)
    }

    pub fn draw_unit(&mut self) -> u64 {
        1 + self.rng.below(self.p - 1)
    }

    /// Uniform residue below `modulus`.
    pub fn draw_residue(&mut self, modulus: u128) -> u128 {
        self.rng.below_u128(modulus)
    }

    pub fn draws_made(&self) -> u32 {
        self.draws
    }
}
