//! Ready-made models: single-grain routing, Bernoulli multigraph topplings
//! (the abelian sandpile at `p = 1`), and the two-site triangle fixtures.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::binomial;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{validate_model, AdditionDistribution, ModelDescription, SandpileModel};
use crate::rational::{format_rational, Probability};

/// Where a single-grain toppling sends its grain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Destination {
    Sink,
    #[serde(untagged)]
    Site(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Route {
    pub to: Destination,
    pub prob: Probability,
}

/// Every toppling moves exactly one grain, to another site or to the sink.
pub fn single_grain_model(n_sites: usize, routing: &[Vec<Route>]) -> Result<SandpileModel> {
    if routing.len() != n_sites {
        return Err(Error::DimensionMismatch {
            expected: n_sites,
            found: routing.len(),
        });
    }
    let mut topplings = Vec::with_capacity(n_sites);
    for (v, routes) in routing.iter().enumerate() {
        let site = v + 1;
        let invalid = |reason: String| Error::InvalidRouting { site, reason };
        if routes.is_empty() {
            return Err(invalid("no destinations".into()));
        }
        let mut total = BigRational::zero();
        let mut cards: Vec<(Vec<i64>, BigRational)> = Vec::new();
        for route in routes {
            if route.prob.is_zero() {
                return Err(invalid(format!("zero probability for {:?}", route.to)));
            }
            let mut delta = vec![0i64; n_sites];
            delta[v] = -1;
            match route.to {
                Destination::Sink => {}
                Destination::Site(w) if w == site => {
                    return Err(invalid("a site cannot route to itself".into()))
                }
                Destination::Site(w) if w == 0 || w > n_sites => {
                    return Err(invalid(format!("destination {w} out of range")))
                }
                Destination::Site(w) => delta[w - 1] = 1,
            }
            if cards.iter().any(|(d, _)| *d == delta) {
                return Err(invalid(format!("duplicate destination {:?}", route.to)));
            }
            total += route.prob.value();
            cards.push((delta, route.prob.value().clone()));
        }
        if !total.is_one() {
            return Err(invalid(format!(
                "probabilities sum to {}",
                format_rational(&total)
            )));
        }
        topplings.push(cards);
    }
    validate_model(&ModelDescription { n_sites, topplings })
}

/// Path routing `n → n-1 → ... → 1 → sink`, each hop with probability one.
pub fn single_grain_path(n_sites: usize) -> Result<SandpileModel> {
    let routing: Vec<Vec<Route>> = (1..=n_sites)
        .map(|v| {
            vec![Route {
                to: if v == 1 {
                    Destination::Sink
                } else {
                    Destination::Site(v - 1)
                },
                prob: Probability::one(),
            }]
        })
        .collect();
    single_grain_model(n_sites, &routing)
}

/// Edge multiplicities between sites and from each site to the sink.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MultigraphSpec {
    pub n_sites: usize,
    /// Symmetric, zero diagonal.
    pub edge_mult: Vec<Vec<u32>>,
    pub sink_mult: Vec<u32>,
}

impl MultigraphSpec {
    pub fn validate(&self) -> Result<()> {
        let n = self.n_sites;
        let bad = |reason: String| Error::InvalidGraph { reason };
        if self.edge_mult.len() != n || self.edge_mult.iter().any(|r| r.len() != n) {
            return Err(bad(format!("edge_mult must be {n}x{n}")));
        }
        if self.sink_mult.len() != n {
            return Err(bad(format!("sink_mult must have length {n}")));
        }
        for k in 0..n {
            if self.edge_mult[k][k] != 0 {
                return Err(bad(format!(
                    "edge_mult[{k}][{k}] must be 0; sink edges go in sink_mult"
                )));
            }
            for l in 0..k {
                if self.edge_mult[k][l] != self.edge_mult[l][k] {
                    return Err(bad(format!("edge_mult is not symmetric at ({k}, {l})")));
                }
            }
        }
        Ok(())
    }

    fn degree(&self, k: usize) -> u32 {
        self.edge_mult[k].iter().sum::<u32>() + self.sink_mult[k]
    }
}

/// What to do with the outcome in which no edge fires.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NullToppling {
    /// Condition on at least one edge firing.
    #[default]
    Renormalize,
    /// Fail unless the silent outcome has probability zero (`p = 1`).
    Reject,
}

fn binomial_pmf(trials: u32, successes: u32, p: &BigRational) -> BigRational {
    let q = BigRational::one() - p;
    let c = BigRational::from_integer(binomial(BigInt::from(trials), BigInt::from(successes)));
    c * num_traits::pow(p.clone(), successes as usize)
        * num_traits::pow(q, (trials - successes) as usize)
}

/// Each of the `d_{k,ℓ}` edges (and `d_{k,k}` sink edges) independently
/// carries one grain with probability `p` when `k` topples.
pub fn bssm_model(
    graph: &MultigraphSpec,
    p: &Probability,
    null: NullToppling,
) -> Result<SandpileModel> {
    graph.validate()?;
    let p = p.value();
    if !p.is_positive() {
        return Err(Error::InvalidProbability {
            context: "bernoulli parameter".into(),
            value: format_rational(p),
            reason: "p must lie in (0, 1]".into(),
        });
    }
    let n = graph.n_sites;
    let mut topplings = Vec::with_capacity(n);
    for k in 0..n {
        if graph.degree(k) == 0 {
            return Err(Error::InvalidGraph {
                reason: format!("site {} has no edges and can never topple", k + 1),
            });
        }
        // Targets: other sites with edges, then the sink (index n).
        let targets: Vec<(usize, u32)> = (0..n)
            .filter(|&l| l != k && graph.edge_mult[k][l] > 0)
            .map(|l| (l, graph.edge_mult[k][l]))
            .chain((graph.sink_mult[k] > 0).then_some((n, graph.sink_mult[k])))
            .collect();
        let mut outcomes: BTreeMap<Vec<i64>, BigRational> = BTreeMap::new();
        let mut counts = vec![0u32; targets.len()];
        loop {
            let prob = targets
                .iter()
                .zip(&counts)
                .fold(BigRational::one(), |acc, (&(_, d), &x)| {
                    acc * binomial_pmf(d, x, p)
                });
            let mut delta = vec![0i64; n];
            let mut lost = 0i64;
            for (&(l, _), &x) in targets.iter().zip(&counts) {
                if l < n {
                    delta[l] = x as i64;
                }
                lost += x as i64;
            }
            delta[k] = -lost;
            if !prob.is_zero() {
                *outcomes.entry(delta).or_insert_with(BigRational::zero) += prob;
            }
            // Odometer over the binomial counts.
            let mut i = 0;
            while i < counts.len() && counts[i] == targets[i].1 {
                counts[i] = 0;
                i += 1;
            }
            if i == counts.len() {
                break;
            }
            counts[i] += 1;
        }
        let silent = vec![0i64; n];
        let silent_prob = outcomes.remove(&silent).unwrap_or_else(BigRational::zero);
        if !silent_prob.is_zero() && null == NullToppling::Reject {
            return Err(Error::NullTopplingNotRepresentable { site: k + 1 });
        }
        let norm = BigRational::one() - &silent_prob;
        topplings.push(
            outcomes
                .into_iter()
                .map(|(delta, prob)| (delta, prob / &norm))
                .collect(),
        );
    }
    validate_model(&ModelDescription {
        n_sites: n,
        topplings,
    })
}

/// Two sites joined by one edge, each also joined to the sink.
pub fn triangle_graph() -> MultigraphSpec {
    MultigraphSpec {
        n_sites: 2,
        edge_mult: vec![vec![0, 1], vec![1, 0]],
        sink_mult: vec![1, 1],
    }
}

/// The two-site triangle where a toppling sends one grain to the sink
/// (`alpha`), one grain to the other site (`beta`), or one grain to each
/// (`gamma`).
pub fn paper_triangle_ssm(
    alpha: &Probability,
    beta: &Probability,
    gamma: &Probability,
) -> Result<SandpileModel> {
    let total = alpha.value() + beta.value() + gamma.value();
    if !total.is_one() {
        return Err(Error::ProbabilitiesDoNotSumToOne {
            context: "triangle alpha + beta + gamma".into(),
            sum: format_rational(&total),
        });
    }
    if gamma.is_zero() {
        return Err(Error::InvalidArgument(
            "gamma must be positive: the triangle fixture needs the two-grain toppling".into(),
        ));
    }
    let site = |own: usize| -> Vec<(Vec<i64>, BigRational)> {
        let other = 1 - own;
        let vec_with = |lose: i64, give: i64| {
            let mut d = vec![0i64; 2];
            d[own] = -lose;
            d[other] = give;
            d
        };
        [
            (vec_with(1, 0), alpha),
            (vec_with(1, 1), beta),
            (vec_with(2, 1), gamma),
        ]
        .into_iter()
        .filter(|(_, p)| !p.is_zero())
        .map(|(d, p)| (d, p.value().clone()))
        .collect()
    };
    validate_model(&ModelDescription {
        n_sites: 2,
        topplings: vec![site(0), site(1)],
    })
}

/// The deterministic triangle sandpile plus its addition law `(alpha, 1 - alpha)`.
pub fn paper_triangle_asm(alpha: &Probability) -> Result<(SandpileModel, AdditionDistribution)> {
    let model = bssm_model(&triangle_graph(), &Probability::one(), NullToppling::Reject)?;
    Ok((model, triangle_mu(alpha)?))
}

/// `(a, 1 - a)` on the two triangle sites.
pub fn triangle_mu(a: &Probability) -> Result<AdditionDistribution> {
    let b = Probability::new(BigRational::one() - a.value())?;
    AdditionDistribution::new(vec![a.clone(), b])
}
