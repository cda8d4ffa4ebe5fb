#![allow(dead_code)]

use num_rational::BigRational;
use num_traits::One;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stochsand::model::{dissipativity, validate_model, ModelDescription, SandpileModel};
use stochsand::rational::{ratio, Probability};
use stochsand::stabilize::{topple, CounterState, DeckSource};
use stochsand::{AdditionDistribution, Configuration, SiteIndex};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random composition of `total` into `parts` positive integers.
fn composition(rng: &mut ChaCha8Rng, total: i64, parts: usize) -> Vec<i64> {
    let mut cuts: Vec<i64> = (1..total).collect();
    cuts.shuffle(rng);
    let mut cuts: Vec<i64> = cuts.into_iter().take(parts - 1).collect();
    cuts.sort_unstable();
    let mut out = Vec::with_capacity(parts);
    let mut prev = 0;
    for c in cuts.into_iter().chain(std::iter::once(total)) {
        out.push(c - prev);
        prev = c;
    }
    out
}

pub struct ModelShape {
    pub max_sites: usize,
    pub max_cards: usize,
    pub max_loss: i64,
    pub max_gift: i64,
    pub max_den: i64,
    /// Probability that a card keeps every grain inside the site set.
    pub conservative_bias: f64,
}

impl ModelShape {
    /// Desk-scale models used by the exact tests.
    pub fn small() -> Self {
        Self {
            max_sites: 3,
            max_cards: 3,
            max_loss: 2,
            max_gift: 2,
            max_den: 8,
            conservative_bias: 0.4,
        }
    }
}

/// A random valid model; not necessarily dissipative.
pub fn random_model(rng: &mut ChaCha8Rng, shape: &ModelShape) -> SandpileModel {
    let n = rng.random_range(1..=shape.max_sites);
    random_model_with_sites(rng, shape, n)
}

pub fn random_model_with_sites(
    rng: &mut ChaCha8Rng,
    shape: &ModelShape,
    n: usize,
) -> SandpileModel {
    let mut topplings = Vec::with_capacity(n);
    for v in 0..n {
        let wanted = rng.random_range(1..=shape.max_cards);
        let mut cards: Vec<Vec<i64>> = Vec::new();
        let mut attempts = 0;
        while cards.len() < wanted && attempts < 50 {
            attempts += 1;
            let loss = rng.random_range(1..=shape.max_loss);
            let mut delta = vec![0i64; n];
            delta[v] = -loss;
            let conservative = rng.random_bool(shape.conservative_bias);
            let budget = if conservative {
                loss
            } else {
                rng.random_range(0..loss)
            };
            let mut left = budget;
            let others: Vec<usize> = (0..n).filter(|&w| w != v).collect();
            if others.is_empty() {
                // A single site must lose grains to the sink.
                left = 0;
            }
            while left > 0 {
                let w = others[rng.random_range(0..others.len())];
                if delta[w] < shape.max_gift {
                    delta[w] += 1;
                    left -= 1;
                } else if others.iter().all(|&w| delta[w] >= shape.max_gift) {
                    break;
                }
            }
            if !cards.contains(&delta) {
                cards.push(delta);
            }
        }
        let c = cards.len();
        let den = rng.random_range(c as i64..=shape.max_den.max(c as i64));
        let weights = composition(rng, den, c);
        topplings.push(
            cards
                .into_iter()
                .zip(weights)
                .map(|(d, w)| (d, ratio(w, den)))
                .collect(),
        );
    }
    validate_model(&ModelDescription {
        n_sites: n,
        topplings,
    })
    .expect("generator builds valid models")
}

pub fn random_dissipative_model(rng: &mut ChaCha8Rng, shape: &ModelShape) -> SandpileModel {
    loop {
        let m = random_model(rng, shape);
        if dissipativity(&m).satisfied {
            return m;
        }
    }
}

/// A strictly positive addition law with denominator at most `max_den`.
pub fn random_positive_mu(rng: &mut ChaCha8Rng, n: usize, max_den: i64) -> AdditionDistribution {
    let den = rng.random_range(n as i64..=max_den.max(n as i64));
    let w = composition(rng, den, n);
    AdditionDistribution::new(
        w.into_iter()
            .map(|x| Probability::from_ratio(x, den).unwrap())
            .collect(),
    )
    .unwrap()
}

pub fn pr(p: i64, q: i64) -> Probability {
    Probability::from_ratio(p, q).unwrap()
}

pub fn q(p: i64, d: i64) -> BigRational {
    ratio(p, d)
}

pub fn one() -> BigRational {
    BigRational::one()
}

/// Decks drawn card by card from each site's support, ignoring the weights.
pub fn random_explicit_decks(
    rng: &mut ChaCha8Rng,
    model: &SandpileModel,
    len: usize,
) -> DeckSource {
    let decks = model
        .topplings()
        .iter()
        .map(|dist| {
            let support = dist.support();
            (0..len)
                .map(|_| {
                    support[rng.random_range(0..support.len())]
                        .0
                        .delta()
                        .to_vec()
                })
                .collect()
        })
        .collect();
    DeckSource::explicit(model, decks).expect("cards come from the support")
}

/// A configuration with each site between 1 and about twice its threshold.
pub fn random_configuration(rng: &mut ChaCha8Rng, model: &SandpileModel) -> Configuration {
    Configuration::new(
        model
            .thresholds()
            .iter()
            .map(|&m| rng.random_range(1..=2 * m + 2))
            .collect(),
    )
    .unwrap()
}

/// Topples uniformly chosen unstable sites until stable or `limit` topplings.
pub fn random_legal_run(
    rng: &mut ChaCha8Rng,
    model: &SandpileModel,
    start: &CounterState,
    decks: &DeckSource,
    limit: usize,
) -> (Vec<SiteIndex>, CounterState) {
    let mut state = start.clone();
    let mut sequence = Vec::new();
    while sequence.len() < limit {
        let unstable = model.unstable_sites(&state.configuration);
        if unstable.is_empty() {
            break;
        }
        let v = unstable[rng.random_range(0..unstable.len())];
        state = topple(model, &state, v, decks).expect("legal toppling with enough cards");
        sequence.push(v);
    }
    (sequence, state)
}
