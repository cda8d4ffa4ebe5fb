//! Sites, toppling distributions, configurations and the dissipativity test.
//!
//! A model over `N` sites stores, for every site `v`, a finite distribution
//! over toppling vectors. The sink is implicit: a toppling vector whose
//! entries sum to `-s` sends `s` grains to the sink.

use std::collections::BTreeSet;
use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{format_rational, Probability};

/// A 1-based site index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SiteIndex(usize);

impl SiteIndex {
    pub fn new(value: usize, n_sites: usize) -> Result<Self> {
        if value == 0 || value > n_sites {
            return Err(Error::InvalidSite { value, n_sites });
        }
        Ok(Self(value))
    }

    pub fn from_zero_based(index: usize) -> Self {
        Self(index + 1)
    }

    /// The 1-based value.
    pub fn get(self) -> usize {
        self.0
    }

    pub fn index(self) -> usize {
        self.0 - 1
    }
}

impl fmt::Display for SiteIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// One possible toppling of `site`: grain deltas for every site.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TopplingVector {
    site: SiteIndex,
    delta: Vec<i64>,
}

impl TopplingVector {
    pub fn new(site: SiteIndex, delta: Vec<i64>) -> Result<Self> {
        check_toppling_vector(site, &delta, 0)?;
        Ok(Self { site, delta })
    }

    pub fn site(&self) -> SiteIndex {
        self.site
    }

    pub fn delta(&self) -> &[i64] {
        &self.delta
    }

    /// Grains lost by the toppling site.
    pub fn loss(&self) -> i64 {
        -self.delta[self.site.index()]
    }

    /// Grains sent to the sink.
    pub fn sink_deficit(&self) -> i64 {
        -self.delta.iter().sum::<i64>()
    }

    /// Sum of the entries restricted to `sites` (0-based membership mask).
    pub fn sum_over(&self, mask: &[bool]) -> i64 {
        self.delta
            .iter()
            .zip(mask)
            .filter(|(_, &m)| m)
            .map(|(d, _)| d)
            .sum()
    }
}

fn check_toppling_vector(site: SiteIndex, delta: &[i64], entry: usize) -> Result<()> {
    let invalid = |reason: &str| Error::InvalidTopplingVector {
        site: site.get(),
        entry,
        delta: delta.to_vec(),
        reason: reason.to_string(),
    };
    if site.index() >= delta.len() {
        return Err(invalid("vector shorter than the site index"));
    }
    if delta[site.index()] >= 0 {
        return Err(invalid("the toppling site must lose at least one grain"));
    }
    if delta
        .iter()
        .enumerate()
        .any(|(w, &d)| w != site.index() && d < 0)
    {
        return Err(invalid("other sites cannot lose grains"));
    }
    if delta.iter().sum::<i64>() > 0 {
        return Err(invalid("entries sum to a positive number"));
    }
    Ok(())
}

/// The finite-support toppling law `λ_v` of one site.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TopplingDistribution {
    site: SiteIndex,
    support: Vec<(TopplingVector, Probability)>,
}

impl TopplingDistribution {
    pub fn site(&self) -> SiteIndex {
        self.site
    }

    pub fn support(&self) -> &[(TopplingVector, Probability)] {
        &self.support
    }

    pub fn threshold(&self) -> i64 {
        self.support
            .iter()
            .map(|(nu, _)| nu.loss())
            .max()
            .unwrap_or(0)
    }
}

/// Unvalidated model input: per site, a list of `(delta, probability)` pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelDescription {
    pub n_sites: usize,
    pub topplings: Vec<Vec<(Vec<i64>, BigRational)>>,
}

/// A validated stochastic sandpile model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SandpileModel {
    n_sites: usize,
    topplings: Vec<TopplingDistribution>,
    thresholds: Vec<i64>,
}

/// Checks every structural constraint and computes the thresholds.
pub fn validate_model(raw: &ModelDescription) -> Result<SandpileModel> {
    let n = raw.n_sites;
    if raw.topplings.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: raw.topplings.len(),
        });
    }
    let mut topplings = Vec::with_capacity(n);
    for (v, cards) in raw.topplings.iter().enumerate() {
        let site = SiteIndex::from_zero_based(v);
        if cards.is_empty() {
            return Err(Error::EmptySupport { site: site.get() });
        }
        let mut support: Vec<(TopplingVector, Probability)> = Vec::with_capacity(cards.len());
        let mut total = BigRational::zero();
        for (entry, (delta, prob)) in cards.iter().enumerate() {
            let entry = entry + 1;
            if delta.len() != n {
                return Err(Error::InvalidTopplingVector {
                    site: site.get(),
                    entry,
                    delta: delta.clone(),
                    reason: format!("length {} differs from n_sites {}", delta.len(), n),
                });
            }
            check_toppling_vector(site, delta, entry)?;
            if !prob.is_positive() || prob > &BigRational::one() {
                return Err(Error::InvalidProbability {
                    context: format!("site {}, entry {}", site.get(), entry),
                    value: format_rational(prob),
                    reason: "support probabilities must lie in (0, 1]".into(),
                });
            }
            if let Some(first) = support.iter().position(|(nu, _)| nu.delta == *delta) {
                return Err(Error::DuplicateSupportVector {
                    site: site.get(),
                    entry,
                    first: first + 1,
                });
            }
            total += prob;
            support.push((
                TopplingVector {
                    site,
                    delta: delta.clone(),
                },
                Probability::new(prob.clone())?,
            ));
        }
        if !total.is_one() {
            return Err(Error::ProbabilitiesDoNotSumToOne {
                context: format!("site {}", site.get()),
                sum: format_rational(&total),
            });
        }
        topplings.push(TopplingDistribution { site, support });
    }
    let thresholds = topplings
        .iter()
        .map(TopplingDistribution::threshold)
        .collect();
    Ok(SandpileModel {
        n_sites: n,
        topplings,
        thresholds,
    })
}

impl SandpileModel {
    pub fn from_description(raw: &ModelDescription) -> Result<Self> {
        validate_model(raw)
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn topplings(&self) -> &[TopplingDistribution] {
        &self.topplings
    }

    pub fn distribution(&self, site: SiteIndex) -> &TopplingDistribution {
        &self.topplings[site.index()]
    }

    pub fn thresholds(&self) -> &[i64] {
        &self.thresholds
    }

    pub fn threshold(&self, site: SiteIndex) -> i64 {
        self.thresholds[site.index()]
    }

    pub fn sites(&self) -> impl Iterator<Item = SiteIndex> {
        (0..self.n_sites).map(SiteIndex::from_zero_based)
    }

    pub fn site(&self, value: usize) -> Result<SiteIndex> {
        SiteIndex::new(value, self.n_sites)
    }

    /// The configuration `(M_1, ..., M_N)`.
    pub fn maximal_configuration(&self) -> Configuration {
        Configuration {
            grains: self.thresholds.clone(),
        }
    }

    pub fn description(&self) -> ModelDescription {
        ModelDescription {
            n_sites: self.n_sites,
            topplings: self
                .topplings
                .iter()
                .map(|d| {
                    d.support
                        .iter()
                        .map(|(nu, p)| (nu.delta.clone(), p.value().clone()))
                        .collect()
                })
                .collect(),
        }
    }

    pub fn is_stable(&self, config: &Configuration) -> bool {
        config
            .grains
            .iter()
            .zip(&self.thresholds)
            .all(|(g, m)| g <= m)
    }

    /// Unstable sites in ascending order.
    pub fn unstable_sites(&self, config: &Configuration) -> Vec<SiteIndex> {
        config
            .grains
            .iter()
            .zip(&self.thresholds)
            .enumerate()
            .filter(|(_, (g, m))| g > m)
            .map(|(v, _)| SiteIndex::from_zero_based(v))
            .collect()
    }

    pub fn is_unstable_at(&self, config: &Configuration, site: SiteIndex) -> bool {
        config.grains[site.index()] > self.thresholds[site.index()]
    }

    pub fn check_configuration(&self, config: &Configuration) -> Result<()> {
        if config.grains.len() != self.n_sites {
            return Err(Error::DimensionMismatch {
                expected: self.n_sites,
                found: config.grains.len(),
            });
        }
        Ok(())
    }

    pub fn uniform_addition(&self) -> AdditionDistribution {
        let n = self.n_sites.max(1) as i64;
        AdditionDistribution {
            weights: (0..self.n_sites)
                .map(|_| Probability::from_ratio(1, n).expect("1/n is a probability"))
                .collect(),
        }
    }
}

pub fn is_stable(model: &SandpileModel, config: &Configuration) -> bool {
    model.is_stable(config)
}

pub fn unstable_sites(model: &SandpileModel, config: &Configuration) -> Vec<SiteIndex> {
    model.unstable_sites(config)
}

/// The grain-addition law `μ` over sites.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<Probability>", into = "Vec<Probability>")]
pub struct AdditionDistribution {
    weights: Vec<Probability>,
}

impl AdditionDistribution {
    pub fn new(weights: Vec<Probability>) -> Result<Self> {
        let total = weights
            .iter()
            .fold(BigRational::zero(), |acc, w| acc + w.value());
        if !total.is_one() {
            return Err(Error::ProbabilitiesDoNotSumToOne {
                context: "addition distribution".into(),
                sum: format_rational(&total),
            });
        }
        Ok(Self { weights })
    }

    pub fn point_mass(n_sites: usize, site: SiteIndex) -> Self {
        Self {
            weights: (0..n_sites)
                .map(|v| {
                    if v == site.index() {
                        Probability::one()
                    } else {
                        Probability::zero()
                    }
                })
                .collect(),
        }
    }

    pub fn weights(&self) -> &[Probability] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Sites with positive weight, ascending.
    pub fn support(&self) -> Vec<SiteIndex> {
        self.weights
            .iter()
            .enumerate()
            .filter(|(_, w)| !w.is_zero())
            .map(|(v, _)| SiteIndex::from_zero_based(v))
            .collect()
    }

    pub fn is_strictly_positive(&self) -> bool {
        self.weights.iter().all(|w| !w.is_zero())
    }

    pub fn check_for(&self, model: &SandpileModel) -> Result<()> {
        if self.weights.len() != model.n_sites() {
            return Err(Error::DimensionMismatch {
                expected: model.n_sites(),
                found: self.weights.len(),
            });
        }
        Ok(())
    }
}

impl TryFrom<Vec<Probability>> for AdditionDistribution {
    type Error = Error;

    fn try_from(weights: Vec<Probability>) -> Result<Self> {
        Self::new(weights)
    }
}

impl From<AdditionDistribution> for Vec<Probability> {
    fn from(mu: AdditionDistribution) -> Self {
        mu.weights
    }
}

/// Grain counts per site, each at least one.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<i64>", into = "Vec<i64>")]
pub struct Configuration {
    grains: Vec<i64>,
}

impl Configuration {
    pub fn new(grains: Vec<i64>) -> Result<Self> {
        if grains.iter().any(|&g| g < 1) {
            return Err(Error::InvalidConfiguration { grains });
        }
        Ok(Self { grains })
    }

    /// No positivity check; only for the unchecked toppling map.
    pub(crate) fn from_raw(grains: Vec<i64>) -> Self {
        Self { grains }
    }

    pub fn grains(&self) -> &[i64] {
        &self.grains
    }

    pub fn into_grains(self) -> Vec<i64> {
        self.grains
    }

    pub fn total(&self) -> i64 {
        self.grains.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.grains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grains.is_empty()
    }

    /// `η + δ^k`.
    pub fn add_grain(&self, site: SiteIndex) -> Configuration {
        let mut grains = self.grains.clone();
        grains[site.index()] += 1;
        Configuration { grains }
    }

    pub(crate) fn apply(&self, delta: &[i64]) -> Configuration {
        Configuration {
            grains: self.grains.iter().zip(delta).map(|(g, d)| g + d).collect(),
        }
    }
}

impl TryFrom<Vec<i64>> for Configuration {
    type Error = Error;

    fn try_from(grains: Vec<i64>) -> Result<Self> {
        Self::new(grains)
    }
}

impl From<Configuration> for Vec<i64> {
    fn from(c: Configuration) -> Self {
        c.grains
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, g) in self.grains.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{g}")?;
        }
        write!(f, ")")
    }
}

pub fn add_grain(config: &Configuration, site: SiteIndex) -> Configuration {
    config.add_grain(site)
}

/// Outcome of the layered peeling of the site set toward the sink.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DissipativityReport {
    pub satisfied: bool,
    pub layers: Vec<BTreeSet<SiteIndex>>,
    pub depth: usize,
    pub witness: Option<BTreeSet<SiteIndex>>,
}

impl DissipativityReport {
    pub fn into_result(self) -> Result<Self> {
        match &self.witness {
            Some(w) if !self.satisfied => Err(Error::NotDissipative {
                witness: w.iter().map(|s| s.get()).collect(),
            }),
            _ => Ok(self),
        }
    }
}

/// True if some site of `mask` can send grains outside of `mask` in one toppling.
pub(crate) fn some_site_escapes(model: &SandpileModel, mask: &[bool], site: SiteIndex) -> bool {
    model.topplings[site.index()]
        .support
        .iter()
        .any(|(nu, _)| nu.sum_over(mask) < 0)
}

/// Peels off layers `G_1, G_2, ...` where `G_{n+1}` holds the sites of the
/// remaining set `H_n` that can lose a grain outside `H_n`. The model is
/// dissipative iff the remaining set ends empty.
pub fn dissipativity(model: &SandpileModel) -> DissipativityReport {
    let n = model.n_sites;
    let mut remaining = vec![true; n];
    let mut layers = Vec::new();
    loop {
        let layer: BTreeSet<SiteIndex> = (0..n)
            .filter(|&v| remaining[v])
            .map(SiteIndex::from_zero_based)
            .filter(|&s| some_site_escapes(model, &remaining, s))
            .collect();
        if layer.is_empty() {
            break;
        }
        for s in &layer {
            remaining[s.index()] = false;
        }
        layers.push(layer);
    }
    let leftover: BTreeSet<SiteIndex> = (0..n)
        .filter(|&v| remaining[v])
        .map(SiteIndex::from_zero_based)
        .collect();
    let satisfied = leftover.is_empty();
    DissipativityReport {
        satisfied,
        depth: layers.len(),
        layers,
        witness: (!satisfied).then_some(leftover),
    }
}
