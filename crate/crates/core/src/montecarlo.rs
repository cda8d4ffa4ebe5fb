//! Long-run simulation of the sandpile chain and distance to the exact law.

use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::stable_states;
use crate::model::{dissipativity, AdditionDistribution, Configuration, SandpileModel};
use crate::stabilize::{
    default_fuel, stabilize_in_place, CardSampler, DeckSource, SiteSelectionPolicy,
};

/// Visit counts over all stable states, in lexicographic order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OccupancyReport {
    pub steps: u64,
    pub burn_in: u64,
    pub seeds: Vec<u64>,
    pub states: Vec<Configuration>,
    pub counts: Vec<u64>,
    pub frequencies: Vec<f64>,
}

impl OccupancyReport {
    fn from_counts(
        steps: u64,
        burn_in: u64,
        seeds: Vec<u64>,
        states: Vec<Configuration>,
        counts: Vec<u64>,
    ) -> Self {
        let total: u64 = counts.iter().sum();
        let frequencies = counts
            .iter()
            .map(|&c| {
                if total == 0 {
                    0.0
                } else {
                    c as f64 / total as f64
                }
            })
            .collect();
        Self {
            steps,
            burn_in,
            seeds,
            states,
            counts,
            frequencies,
        }
    }

    /// Sums counts; steps and burn-in add up so counts still total `steps - burn_in`.
    pub fn merge(&self, other: &OccupancyReport) -> Result<OccupancyReport> {
        if self.states != other.states {
            return Err(Error::DimensionMismatch {
                expected: self.states.len(),
                found: other.states.len(),
            });
        }
        let counts = self
            .counts
            .iter()
            .zip(&other.counts)
            .map(|(a, b)| a + b)
            .collect();
        let mut seeds = self.seeds.clone();
        seeds.extend(&other.seeds);
        Ok(Self::from_counts(
            self.steps + other.steps,
            self.burn_in + other.burn_in,
            seeds,
            self.states.clone(),
            counts,
        ))
    }

    pub fn recorded(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Mixed-radix index of a stable configuration in lexicographic order.
fn stable_index(grains: &[i64], thresholds: &[i64]) -> usize {
    grains
        .iter()
        .zip(thresholds)
        .fold(0usize, |acc, (&g, &m)| acc * m as usize + (g - 1) as usize)
}

/// Runs the chain from the maximal configuration.
pub fn simulate(
    model: &SandpileModel,
    mu: &AdditionDistribution,
    steps: u64,
    burn_in: u64,
    seed: u64,
    policy: &SiteSelectionPolicy,
) -> Result<OccupancyReport> {
    simulate_from(
        model,
        mu,
        &model.maximal_configuration(),
        steps,
        burn_in,
        seed,
        policy,
    )
}

/// One set of decks serves the whole run: counters carry over between steps.
pub fn simulate_from(
    model: &SandpileModel,
    mu: &AdditionDistribution,
    start: &Configuration,
    steps: u64,
    burn_in: u64,
    seed: u64,
    policy: &SiteSelectionPolicy,
) -> Result<OccupancyReport> {
    mu.check_for(model)?;
    model.check_configuration(start)?;
    dissipativity(model).into_result()?;
    if steps <= burn_in {
        return Err(Error::InvalidArgument(format!(
            "steps ({steps}) must exceed burn-in ({burn_in})"
        )));
    }
    if !model.is_stable(start) {
        return Err(Error::InvalidArgument(format!(
            "start configuration {start} is not stable"
        )));
    }
    let states = stable_states(model);
    let thresholds = model.thresholds();
    let decks = DeckSource::seeded(model, seed);
    let fuel = default_fuel(model, &model.maximal_configuration());
    let addition = CardSampler::new(mu.weights());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(u64::MAX);

    let mut grains = start.grains().to_vec();
    let mut counters = vec![0u64; model.n_sites()];
    let mut counts = vec![0u64; states.len()];
    for step in 1..=steps {
        let k = addition.pick(rng.next_u64());
        grains[k] += 1;
        stabilize_in_place(
            model,
            &mut grains,
            &mut counters,
            &decks,
            policy,
            fuel,
            None,
        )?;
        if step > burn_in {
            counts[stable_index(&grains, thresholds)] += 1;
        }
    }
    Ok(OccupancyReport::from_counts(
        steps,
        burn_in,
        vec![seed],
        states,
        counts,
    ))
}

/// Independent replicas, one per seed, run in parallel and merged.
pub fn simulate_replicas(
    model: &SandpileModel,
    mu: &AdditionDistribution,
    steps: u64,
    burn_in: u64,
    seeds: &[u64],
    policy: &SiteSelectionPolicy,
) -> Result<OccupancyReport> {
    let reports = seeds
        .par_iter()
        .map(|&s| simulate(model, mu, steps, burn_in, s, policy))
        .collect::<Result<Vec<_>>>()?;
    let mut iter = reports.into_iter();
    let first = iter
        .next()
        .ok_or_else(|| Error::InvalidArgument("at least one replica is required".into()))?;
    iter.try_fold(first, |acc, r| acc.merge(&r))
}

/// `(1/2) Σ |p_i - q_i|`.
pub fn tv_distance(empirical: &[f64], exact: &[f64]) -> Result<f64> {
    if empirical.len() != exact.len() {
        return Err(Error::DimensionMismatch {
            expected: exact.len(),
            found: empirical.len(),
        });
    }
    Ok(0.5
        * empirical
            .iter()
            .zip(exact)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>())
}

pub fn tv_distance_exact(a: &[BigRational], b: &[BigRational]) -> Result<BigRational> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: b.len(),
            found: a.len(),
        });
    }
    let sum = a
        .iter()
        .zip(b)
        .fold(BigRational::zero(), |acc, (x, y)| acc + (x - y).abs());
    Ok(sum / BigRational::from_integer(2.into()))
}

/// Default burn-in: one percent of the steps.
pub fn default_burn_in(steps: u64) -> u64 {
    steps / 100
}
