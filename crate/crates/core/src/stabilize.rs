//! Deck-coupled topplings and stabilization.
//!
//! Every site owns a deck of toppling cards. A state carries a counter per
//! site recording how many of that site's cards were consumed, so toppling
//! site `v` always applies card `counters[v] + 1` of deck `v` and the
//! outcome of a stabilization depends only on the decks, never on the order
//! in which unstable sites are picked.

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{dissipativity, Configuration, SandpileModel, SiteIndex, TopplingVector};
use crate::rational::Probability;

/// Draws a support index from cumulative thresholds scaled to `2^64`.
#[derive(Debug, Clone)]
pub struct CardSampler {
    // ceil(cumulative_j * 2^64); the last entry is exactly 2^64.
    cutoffs: Vec<u128>,
}

impl CardSampler {
    pub fn new<'a>(probs: impl IntoIterator<Item = &'a Probability>) -> Self {
        let scale = BigInt::from(1u128 << 64);
        let mut cumulative = num_rational::BigRational::from_integer(BigInt::from(0));
        let mut cutoffs = Vec::new();
        for p in probs {
            cumulative += p.value();
            let scaled = &cumulative * num_rational::BigRational::from_integer(scale.clone());
            let cut = scaled
                .ceil()
                .to_integer()
                .to_u128()
                .expect("cutoff fits in u128");
            cutoffs.push(cut);
        }
        Self { cutoffs }
    }

    /// `u / 2^64` lies in `[cum_{j-1}, cum_j)`; zero-probability entries are never hit.
    pub fn pick(&self, u: u64) -> usize {
        let u = u as u128;
        self.cutoffs
            .iter()
            .position(|&c| u < c)
            .unwrap_or(self.cutoffs.len() - 1)
    }
}

/// Per-site decks of toppling cards.
#[derive(Debug, Clone)]
pub enum DeckSource {
    /// Card `i` of site `v` is drawn from `λ_v` by a counter-based generator
    /// keyed on `(seed, v, i)`.
    Seeded {
        seed: u64,
        supports: Vec<Vec<TopplingVector>>,
        samplers: Vec<CardSampler>,
    },
    /// Finite, caller-provided card lists.
    Explicit(Vec<Vec<TopplingVector>>),
}

impl DeckSource {
    pub fn seeded(model: &SandpileModel, seed: u64) -> Self {
        let supports = model
            .topplings()
            .iter()
            .map(|d| d.support().iter().map(|(nu, _)| nu.clone()).collect())
            .collect();
        let samplers = model
            .topplings()
            .iter()
            .map(|d| CardSampler::new(d.support().iter().map(|(_, p)| p)))
            .collect();
        DeckSource::Seeded {
            seed,
            supports,
            samplers,
        }
    }

    /// Every card must be a valid toppling vector of its own site.
    pub fn explicit(model: &SandpileModel, decks: Vec<Vec<Vec<i64>>>) -> Result<Self> {
        if decks.len() != model.n_sites() {
            return Err(Error::DimensionMismatch {
                expected: model.n_sites(),
                found: decks.len(),
            });
        }
        let mut out = Vec::with_capacity(decks.len());
        for (v, cards) in decks.into_iter().enumerate() {
            let site = SiteIndex::from_zero_based(v);
            let mut deck = Vec::with_capacity(cards.len());
            for delta in cards {
                if delta.len() != model.n_sites() {
                    return Err(Error::DimensionMismatch {
                        expected: model.n_sites(),
                        found: delta.len(),
                    });
                }
                deck.push(TopplingVector::new(site, delta)?);
            }
            out.push(deck);
        }
        Ok(DeckSource::Explicit(out))
    }

    /// Card at 1-based `position` of the deck of `site`.
    pub fn card(&self, site: SiteIndex, position: u64) -> Result<&TopplingVector> {
        match self {
            DeckSource::Seeded {
                seed,
                supports,
                samplers,
            } => {
                let u = seeded_word(*seed, site.index() as u64, position - 1);
                Ok(&supports[site.index()][samplers[site.index()].pick(u)])
            }
            DeckSource::Explicit(decks) => decks[site.index()].get((position - 1) as usize).ok_or(
                Error::ExplicitDeckExhausted {
                    site: site.get(),
                    position: position as usize,
                },
            ),
        }
    }

    /// Copies the first `len` cards of each deck into an explicit source.
    pub fn materialize(&self, len: usize) -> Result<DeckSource> {
        let n = match self {
            DeckSource::Seeded { supports, .. } => supports.len(),
            DeckSource::Explicit(d) => d.len(),
        };
        let mut decks = Vec::with_capacity(n);
        for v in 0..n {
            let site = SiteIndex::from_zero_based(v);
            let cards = (1..=len as u64)
                .map(|i| self.card(site, i).cloned())
                .collect::<Result<Vec<_>>>()?;
            decks.push(cards);
        }
        Ok(DeckSource::Explicit(decks))
    }

    pub fn n_sites(&self) -> usize {
        match self {
            DeckSource::Seeded { supports, .. } => supports.len(),
            DeckSource::Explicit(d) => d.len(),
        }
    }
}

fn seeded_word(seed: u64, stream: u64, index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng.set_word_pos(2 * index as u128);
    rng.next_u64()
}

/// A configuration together with the number of cards consumed per site.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CounterState {
    pub configuration: Configuration,
    pub counters: Vec<u64>,
}

impl CounterState {
    pub fn new(configuration: Configuration) -> Self {
        let n = configuration.len();
        Self {
            configuration,
            counters: vec![0; n],
        }
    }

    pub fn with_counters(configuration: Configuration, counters: Vec<u64>) -> Result<Self> {
        if counters.len() != configuration.len() {
            return Err(Error::DimensionMismatch {
                expected: configuration.len(),
                found: counters.len(),
            });
        }
        Ok(Self {
            configuration,
            counters,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "policy", content = "arg", rename_all = "kebab-case")]
pub enum SiteSelectionPolicy {
    SmallestIndex,
    LargestIndex,
    /// Ties go to the smallest index.
    MostGrains,
    /// Cycles through site indices, starting after the last pick.
    RoundRobin,
    SeededRandom(u64),
    /// Follows the given sites, then continues with the smallest unstable
    /// index once the list runs out. A listed site that is not unstable at
    /// its turn is an error.
    ExplicitSequence(Vec<SiteIndex>),
}

impl SiteSelectionPolicy {
    pub fn builtin() -> Vec<SiteSelectionPolicy> {
        vec![
            SiteSelectionPolicy::SmallestIndex,
            SiteSelectionPolicy::LargestIndex,
            SiteSelectionPolicy::MostGrains,
            SiteSelectionPolicy::RoundRobin,
            SiteSelectionPolicy::SeededRandom(0),
        ]
    }

    pub(crate) fn selector(&self) -> Selector<'_> {
        Selector {
            policy: self,
            cursor: 0,
            rng: match self {
                SiteSelectionPolicy::SeededRandom(seed) => Some(ChaCha8Rng::seed_from_u64(*seed)),
                _ => None,
            },
        }
    }
}

pub(crate) struct Selector<'a> {
    policy: &'a SiteSelectionPolicy,
    cursor: usize,
    rng: Option<ChaCha8Rng>,
}

impl Selector<'_> {
    /// `unstable` is nonempty and ascending.
    fn pick(&mut self, grains: &[i64], unstable: &[SiteIndex]) -> Result<SiteIndex> {
        match self.policy {
            SiteSelectionPolicy::SmallestIndex => Ok(unstable[0]),
            SiteSelectionPolicy::LargestIndex => Ok(*unstable.last().unwrap()),
            SiteSelectionPolicy::MostGrains => {
                let mut best = unstable[0];
                for &s in &unstable[1..] {
                    if grains[s.index()] > grains[best.index()] {
                        best = s;
                    }
                }
                Ok(best)
            }
            SiteSelectionPolicy::RoundRobin => {
                let site = unstable
                    .iter()
                    .copied()
                    .find(|s| s.index() >= self.cursor)
                    .unwrap_or(unstable[0]);
                self.cursor = site.index() + 1;
                Ok(site)
            }
            SiteSelectionPolicy::SeededRandom(_) => {
                let rng = self.rng.as_mut().expect("random selector has an rng");
                Ok(unstable[rng.random_range(0..unstable.len())])
            }
            SiteSelectionPolicy::ExplicitSequence(seq) => {
                if let Some(&site) = seq.get(self.cursor) {
                    self.cursor += 1;
                    if unstable.binary_search(&site).is_err() {
                        return Err(Error::SiteNotUnstable { site: site.get() });
                    }
                    Ok(site)
                } else {
                    Ok(unstable[0])
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogEntry {
    pub site: SiteIndex,
    /// 1-based position of the card in the site's deck.
    pub card: u64,
    pub delta: Vec<i64>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TopplingLog {
    pub entries: Vec<LogEntry>,
}

impl TopplingLog {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn sites(&self) -> Vec<SiteIndex> {
        self.entries.iter().map(|e| e.site).collect()
    }
}

/// `10 × (Σ_v max(M_v, η_v) + 1) × (depth + 1)`.
pub fn default_fuel(model: &SandpileModel, config: &Configuration) -> u64 {
    let depth = dissipativity(model).depth as u64;
    let mass: i64 = model
        .thresholds()
        .iter()
        .zip(config.grains())
        .map(|(&m, &g)| m.max(g))
        .sum();
    10 * (mass.max(0) as u64 + 1) * (depth + 1)
}

/// Applies card `counters[v] + 1` of deck `v`. `v` must be unstable.
pub fn topple(
    model: &SandpileModel,
    state: &CounterState,
    site: SiteIndex,
    decks: &DeckSource,
) -> Result<CounterState> {
    if !model.is_unstable_at(&state.configuration, site) {
        return Err(Error::SiteNotUnstable { site: site.get() });
    }
    topple_unchecked(state, site, decks)
}

/// The toppling map without the legality check. Grain counts may leave the
/// positive range; only meant for checking algebraic identities of the map.
pub fn topple_unchecked(
    state: &CounterState,
    site: SiteIndex,
    decks: &DeckSource,
) -> Result<CounterState> {
    let card = decks.card(site, state.counters[site.index()] + 1)?;
    let mut counters = state.counters.clone();
    counters[site.index()] += 1;
    Ok(CounterState {
        configuration: Configuration::from_raw(
            state
                .configuration
                .grains()
                .iter()
                .zip(card.delta())
                .map(|(g, d)| g + d)
                .collect(),
        ),
        counters,
    })
}

/// In-place DS loop shared by the public entry points.
pub(crate) fn stabilize_in_place(
    model: &SandpileModel,
    grains: &mut [i64],
    counters: &mut [u64],
    decks: &DeckSource,
    policy: &SiteSelectionPolicy,
    fuel: u64,
    mut log: Option<&mut TopplingLog>,
) -> Result<u64> {
    let thresholds = model.thresholds();
    let mut selector = policy.selector();
    let mut unstable = Vec::with_capacity(grains.len());
    let mut performed = 0u64;
    loop {
        unstable.clear();
        unstable.extend(
            grains
                .iter()
                .zip(thresholds)
                .enumerate()
                .filter(|(_, (g, m))| g > m)
                .map(|(v, _)| SiteIndex::from_zero_based(v)),
        );
        if unstable.is_empty() {
            return Ok(performed);
        }
        if performed >= fuel {
            return Err(Error::FuelExhausted { fuel });
        }
        let site = selector.pick(grains, &unstable)?;
        let position = counters[site.index()] + 1;
        let card = decks.card(site, position)?;
        for (g, d) in grains.iter_mut().zip(card.delta()) {
            *g += d;
        }
        counters[site.index()] = position;
        performed += 1;
        if let Some(log) = log.as_deref_mut() {
            log.entries.push(LogEntry {
                site,
                card: position,
                delta: card.delta().to_vec(),
            });
        }
    }
}

/// Topples unstable sites chosen by `policy` until the configuration is stable.
pub fn deterministic_stabilize(
    model: &SandpileModel,
    state: &CounterState,
    decks: &DeckSource,
    policy: &SiteSelectionPolicy,
    fuel: u64,
) -> Result<(CounterState, TopplingLog)> {
    model.check_configuration(&state.configuration)?;
    let mut grains = state.configuration.grains().to_vec();
    let mut counters = state.counters.clone();
    let mut log = TopplingLog::default();
    stabilize_in_place(
        model,
        &mut grains,
        &mut counters,
        decks,
        policy,
        fuel,
        Some(&mut log),
    )?;
    Ok((
        CounterState {
            configuration: Configuration::from_raw(grains),
            counters,
        },
        log,
    ))
}

/// One draw of the random stabilization of `config`, using fresh decks derived from `seed`.
pub fn random_stabilize(
    model: &SandpileModel,
    config: &Configuration,
    seed: u64,
) -> Result<Configuration> {
    let decks = DeckSource::seeded(model, seed);
    let fuel = default_fuel(model, config);
    let (state, _) = deterministic_stabilize(
        model,
        &CounterState::new(config.clone()),
        &decks,
        &SiteSelectionPolicy::SmallestIndex,
        fuel,
    )?;
    Ok(state.configuration)
}

/// Whether every site of `sequence` is unstable at its turn.
pub fn is_legal_sequence(
    model: &SandpileModel,
    state: &CounterState,
    decks: &DeckSource,
    sequence: &[SiteIndex],
) -> Result<bool> {
    Ok(apply_legal_sequence(model, state, decks, sequence)?.is_some())
}

/// The state after a legal sequence, or `None` if the sequence is not legal.
pub fn apply_legal_sequence(
    model: &SandpileModel,
    state: &CounterState,
    decks: &DeckSource,
    sequence: &[SiteIndex],
) -> Result<Option<CounterState>> {
    let mut current = state.clone();
    for &site in sequence {
        if site.index() >= model.n_sites() {
            return Err(Error::InvalidSite {
                value: site.get(),
                n_sites: model.n_sites(),
            });
        }
        if !model.is_unstable_at(&current.configuration, site) {
            return Ok(None);
        }
        current = topple_unchecked(&current, site, decks)?;
    }
    Ok(Some(current))
}

/// Adds a grain at `site` to a stable state and stabilizes, keeping the
/// decks and counters so successive steps share one set of decks.
pub fn markov_step(
    model: &SandpileModel,
    state: &CounterState,
    site: SiteIndex,
    decks: &DeckSource,
    policy: &SiteSelectionPolicy,
    fuel: u64,
) -> Result<CounterState> {
    if !model.is_stable(&state.configuration) {
        return Err(Error::InvalidArgument(format!(
            "markov step needs a stable configuration, got {}",
            state.configuration
        )));
    }
    let raised = CounterState {
        configuration: state.configuration.add_grain(site),
        counters: state.counters.clone(),
    };
    Ok(deterministic_stabilize(model, &raised, decks, policy, fuel)?.0)
}
