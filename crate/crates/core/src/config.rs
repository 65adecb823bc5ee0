use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hierarchy constants and search budgets shared by the pipelines.
///
/// The proofs only need `1/n ≪ γ ≪ β ≪ α`; at desk scale these become
/// plain fractions of `n`. Defaults are tuned for n in the tens.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub alpha: f64,
    pub beta: f64,
    pub beta_bar: f64,
    pub gamma: f64,
    pub eps: f64,
    pub eta: f64,
    pub mu: f64,
    /// Block size for block-wise partitions.
    pub k: usize,
    /// Surplus ratio: allowed colours ≥ `c`·|T| for the surplus embedder.
    pub c: f64,
    /// Attempts per randomized step.
    pub retries: usize,
    pub rng_seed: u64,
    /// Degree slack used when verifying random partitions.
    pub slack: f64,
    /// Node budget of the backtracking tree embedder.
    pub embed_budget: u64,
    /// Node budget of pinned subgraph searches.
    pub search_budget: u64,
    /// Cap on enumerated F-factors per block.
    pub factor_enum_cap: usize,
    /// Use the halving recursion for good partitions instead of direct sampling.
    pub halving: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            alpha: 0.3,
            beta: 0.15,
            beta_bar: 0.1,
            gamma: 0.05,
            eps: 0.1,
            eta: 0.1,
            mu: 0.25,
            k: 4,
            c: 1.0,
            retries: 20,
            rng_seed: 0,
            slack: 0.15,
            embed_budget: 200_000,
            search_budget: 200_000,
            factor_enum_cap: 100_000,
            halving: false,
        }
    }
}

impl PipelineConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            rng_seed: seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let reals = [
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("beta_bar", self.beta_bar),
            ("gamma", self.gamma),
            ("eps", self.eps),
            ("eta", self.eta),
            ("mu", self.mu),
            ("c", self.c),
            ("slack", self.slack),
        ];
        for (name, x) in reals {
            if !x.is_finite() {
                return Err(Error::Precondition(format!("{name} is not finite")));
            }
        }
        if !(0.0 < self.gamma && self.gamma < self.beta && self.beta < self.alpha && self.alpha < 1.0) {
            return Err(Error::Precondition(format!(
                "need 0 < gamma < beta < alpha < 1, got gamma={} beta={} alpha={}",
                self.gamma, self.beta, self.alpha
            )));
        }
        if self.retries == 0 {
            return Err(Error::Precondition("retries must be at least 1".into()));
        }
        if self.k == 0 {
            return Err(Error::Precondition("block size k must be at least 1".into()));
        }
        Ok(())
    }

    /// A generator for one named randomized step. Distinct streams keep steps
    /// independent of each other's consumption.
    pub fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut r = ChaCha8Rng::seed_from_u64(self.rng_seed);
        r.set_stream(stream);
        r
    }
}
