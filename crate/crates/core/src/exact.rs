//! Exact transition matrices of the sandpile chain.
//!
//! The one-operation-per-step extended chain lives on stable configurations
//! plus the unstable configurations met during stabilization. Its matrix
//! splits into blocks `A` (stable→stable), `B` (stable→unstable),
//! `C` (unstable→stable) and `D` (unstable→unstable), and the chain on
//! stable states is `P = A + B (I - D)^{-1} C`.

use std::collections::{HashMap, VecDeque};

use num_rational::BigRational;
use num_traits::{One, Zero};
use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{rank, solve, RationalMatrix};
use crate::model::{dissipativity, AdditionDistribution, Configuration, SandpileModel, SiteIndex};

pub const DEFAULT_STATE_CAP: usize = 200_000;

/// Which unstable site the extended chain topples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TopplingRule {
    #[default]
    SmallestUnstable,
    LargestUnstable,
}

impl TopplingRule {
    fn pick(self, model: &SandpileModel, config: &Configuration) -> Option<SiteIndex> {
        let unstable = model.unstable_sites(config);
        match self {
            TopplingRule::SmallestUnstable => unstable.first().copied(),
            TopplingRule::LargestUnstable => unstable.last().copied(),
        }
    }
}

/// Dense indices for stable configurations (lexicographic) followed by
/// reachable unstable ones (also lexicographic).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateIndex {
    stable: Vec<Configuration>,
    transient: Vec<Configuration>,
    lookup: HashMap<Configuration, usize>,
}

impl StateIndex {
    pub fn stable(&self) -> &[Configuration] {
        &self.stable
    }

    pub fn transient(&self) -> &[Configuration] {
        &self.transient
    }

    pub fn n_stable(&self) -> usize {
        self.stable.len()
    }

    pub fn n_transient(&self) -> usize {
        self.transient.len()
    }

    pub fn len(&self) -> usize {
        self.stable.len() + self.transient.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Dense index; stable states come first.
    pub fn index_of(&self, config: &Configuration) -> Option<usize> {
        self.lookup.get(config).copied()
    }

    pub fn state(&self, index: usize) -> &Configuration {
        if index < self.stable.len() {
            &self.stable[index]
        } else {
            &self.transient[index - self.stable.len()]
        }
    }

    fn transient_position(&self, config: &Configuration) -> Option<usize> {
        self.index_of(config)
            .and_then(|i| i.checked_sub(self.stable.len()))
    }
}

/// Stable configurations `[1..M_1] × ... × [1..M_N]` in lexicographic order.
pub fn stable_states(model: &SandpileModel) -> Vec<Configuration> {
    let m = model.thresholds();
    let mut out = Vec::new();
    let mut current = vec![1i64; m.len()];
    loop {
        out.push(Configuration::new(current.clone()).expect("grains start at one"));
        let mut pos = m.len();
        loop {
            if pos == 0 {
                return out;
            }
            pos -= 1;
            if current[pos] < m[pos] {
                current[pos] += 1;
                for c in current.iter_mut().skip(pos + 1) {
                    *c = 1;
                }
                break;
            }
        }
    }
}

fn require_dissipative(model: &SandpileModel) -> Result<()> {
    dissipativity(model).into_result().map(|_| ())
}

/// Stable states plus every unstable configuration reachable from
/// `η + δ^k` (η stable, k in `sites`) under `rule`.
pub fn enumerate_states(
    model: &SandpileModel,
    sites: &[SiteIndex],
    rule: TopplingRule,
    cap: usize,
) -> Result<StateIndex> {
    require_dissipative(model)?;
    let stable = stable_states(model);
    if stable.len() > cap {
        return Err(Error::StateSpaceTooLarge { cap });
    }
    let mut seen: HashMap<Configuration, ()> = HashMap::new();
    let mut queue = VecDeque::new();
    for eta in &stable {
        for &k in sites {
            let next = eta.add_grain(k);
            if !model.is_stable(&next) && seen.insert(next.clone(), ()).is_none() {
                queue.push_back(next);
            }
        }
    }
    while let Some(config) = queue.pop_front() {
        if stable.len() + seen.len() > cap {
            return Err(Error::StateSpaceTooLarge { cap });
        }
        let site = rule
            .pick(model, &config)
            .expect("queued states are unstable");
        for (nu, _) in model.distribution(site).support() {
            let next = config.apply(nu.delta());
            if !model.is_stable(&next) && seen.insert(next.clone(), ()).is_none() {
                queue.push_back(next);
            }
        }
    }
    let mut transient: Vec<Configuration> = seen.into_keys().collect();
    transient.sort();
    let lookup = stable
        .iter()
        .chain(&transient)
        .cloned()
        .enumerate()
        .map(|(i, c)| (c, i))
        .collect();
    Ok(StateIndex {
        stable,
        transient,
        lookup,
    })
}

/// The blocks of the extended chain over a fixed [`StateIndex`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtendedChain {
    pub states: StateIndex,
    pub a: RationalMatrix,
    pub b: RationalMatrix,
    pub c: RationalMatrix,
    pub d: RationalMatrix,
}

impl ExtendedChain {
    /// The full matrix `[[A, B], [C, D]]`.
    pub fn full(&self) -> RationalMatrix {
        let s = self.states.n_stable();
        let n = self.states.len();
        let mut p = RationalMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let v = match (i < s, j < s) {
                    (true, true) => self.a.get(i, j),
                    (true, false) => self.b.get(i, j - s),
                    (false, true) => self.c.get(i - s, j),
                    (false, false) => self.d.get(i - s, j - s),
                };
                if !v.is_zero() {
                    p.set(i, j, v.clone());
                }
            }
        }
        p
    }
}

/// Fills the `C` and `D` rows: one toppling of the rule's site from each transient state.
fn toppling_blocks(
    model: &SandpileModel,
    states: &StateIndex,
    rule: TopplingRule,
) -> Result<(RationalMatrix, RationalMatrix)> {
    let s = states.n_stable();
    let t = states.n_transient();
    let mut c = RationalMatrix::zeros(t, s);
    let mut d = RationalMatrix::zeros(t, t);
    for (row, config) in states.transient().iter().enumerate() {
        let site = rule
            .pick(model, config)
            .expect("transient states are unstable");
        for (nu, p) in model.distribution(site).support() {
            let next = config.apply(nu.delta());
            let col = states.index_of(&next).ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "state {next} is missing from the enumeration (was it built with another rule?)"
                ))
            })?;
            if col < s {
                c.add_at(row, col, p.value());
            } else {
                d.add_at(row, col - s, p.value());
            }
        }
    }
    Ok((c, d))
}

pub fn build_extended(
    model: &SandpileModel,
    mu: &AdditionDistribution,
    states: &StateIndex,
    rule: TopplingRule,
) -> Result<ExtendedChain> {
    mu.check_for(model)?;
    require_dissipative(model)?;
    let s = states.n_stable();
    let t = states.n_transient();
    let mut a = RationalMatrix::zeros(s, s);
    let mut b = RationalMatrix::zeros(s, t);
    for (row, eta) in states.stable().iter().enumerate() {
        for k in mu.support() {
            let next = eta.add_grain(k);
            let weight = mu.weights()[k.index()].value();
            match states.index_of(&next) {
                Some(col) if col < s => a.add_at(row, col, weight),
                Some(col) => b.add_at(row, col - s, weight),
                None => {
                    return Err(Error::InvalidArgument(format!(
                        "state {next} is missing from the enumeration; enumerate with every site in supp(mu)"
                    )))
                }
            }
        }
    }
    let (c, d) = toppling_blocks(model, states, rule)?;
    Ok(ExtendedChain {
        states: states.clone(),
        a,
        b,
        c,
        d,
    })
}

/// Enumerates over `supp(μ)` and builds the blocks with the smallest-site rule.
pub fn extended_chain(model: &SandpileModel, mu: &AdditionDistribution) -> Result<ExtendedChain> {
    mu.check_for(model)?;
    let states = enumerate_states(
        model,
        &mu.support(),
        TopplingRule::SmallestUnstable,
        DEFAULT_STATE_CAP,
    )?;
    build_extended(model, mu, &states, TopplingRule::SmallestUnstable)
}

/// Solves `(I - D) X = C` and checks the solution exactly.
fn absorption(c: &RationalMatrix, d: &RationalMatrix) -> Result<RationalMatrix> {
    let i_minus_d = RationalMatrix::identity(d.rows()).sub(d)?;
    let x = solve(&i_minus_d, c)?;
    if &i_minus_d.mul(&x)? != c {
        return Err(Error::SingularMatrix);
    }
    Ok(x)
}

/// `P = A + B (I - D)^{-1} C` over the stable states.
pub fn collapse(chain: &ExtendedChain) -> Result<RationalMatrix> {
    let p = if chain.states.n_transient() == 0 {
        chain.a.clone()
    } else {
        let x = absorption(&chain.c, &chain.d)?;
        chain.a.add(&chain.b.mul(&x)?)?
    };
    debug_assert!(p.is_stochastic());
    Ok(p)
}

/// The stable-state chain for addition law `μ`, with its stable states.
pub fn transition_matrix(
    model: &SandpileModel,
    mu: &AdditionDistribution,
) -> Result<(Vec<Configuration>, RationalMatrix)> {
    let chain = extended_chain(model, mu)?;
    let p = collapse(&chain)?;
    Ok((chain.states.stable().to_vec(), p))
}

/// `P^(k)`: row `η` is the law of the stabilization of `η + δ^k`.
pub fn per_site_matrix(model: &SandpileModel, site: SiteIndex) -> Result<RationalMatrix> {
    per_site_matrix_with_rule(model, site, TopplingRule::SmallestUnstable)
}

pub fn per_site_matrix_with_rule(
    model: &SandpileModel,
    site: SiteIndex,
    rule: TopplingRule,
) -> Result<RationalMatrix> {
    if site.index() >= model.n_sites() {
        return Err(Error::InvalidSite {
            value: site.get(),
            n_sites: model.n_sites(),
        });
    }
    let states = enumerate_states(model, &[site], rule, DEFAULT_STATE_CAP)?;
    let s = states.n_stable();
    let (c, d) = toppling_blocks(model, &states, rule)?;
    let absorbed = if states.n_transient() == 0 {
        RationalMatrix::zeros(0, s)
    } else {
        absorption(&c, &d)?
    };
    let mut p = RationalMatrix::zeros(s, s);
    for (row, eta) in states.stable().iter().enumerate() {
        let next = eta.add_grain(site);
        if let Some(t) = states.transient_position(&next) {
            for col in 0..s {
                p.set(row, col, absorbed.get(t, col).clone());
            }
        } else {
            let col = states.index_of(&next).expect("stable successor is indexed");
            p.set(row, col, BigRational::one());
        }
    }
    Ok(p)
}

pub fn per_site_matrices(model: &SandpileModel) -> Result<Vec<RationalMatrix>> {
    let sites: Vec<SiteIndex> = model.sites().collect();
    sites
        .par_iter()
        .map(|&k| per_site_matrix(model, k))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CommuteOffense {
    pub site_k: SiteIndex,
    pub site_l: SiteIndex,
    pub row: usize,
    pub col: usize,
    #[serde(with = "crate::rational::serde_rational")]
    pub difference: BigRational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CommuteReport {
    pub holds: bool,
    pub pairs_checked: usize,
    pub max_offending: Option<CommuteOffense>,
}

/// Exact check of `P^(k) P^(l) = P^(l) P^(k)` over all site pairs.
pub fn commute_check(model: &SandpileModel) -> Result<CommuteReport> {
    let mats = per_site_matrices(model)?;
    let mut pairs_checked = 0;
    let mut worst: Option<CommuteOffense> = None;
    for k in 0..mats.len() {
        for l in k + 1..mats.len() {
            pairs_checked += 1;
            let kl = mats[k].mul(&mats[l])?;
            let lk = mats[l].mul(&mats[k])?;
            if let Some((row, col, difference)) = kl.max_abs_diff(&lk) {
                if worst.as_ref().is_none_or(|w| difference > w.difference) {
                    worst = Some(CommuteOffense {
                        site_k: SiteIndex::from_zero_based(k),
                        site_l: SiteIndex::from_zero_based(l),
                        row,
                        col,
                        difference,
                    });
                }
            }
        }
    }
    Ok(CommuteReport {
        holds: worst.is_none(),
        pairs_checked,
        max_offending: worst,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChainClass {
    /// Ascending state indices.
    pub states: Vec<usize>,
    pub recurrent: bool,
    /// Only for recurrent classes.
    pub period: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChainDecomposition {
    pub classes: Vec<ChainClass>,
}

impl ChainDecomposition {
    pub fn recurrent(&self) -> impl Iterator<Item = &ChainClass> {
        self.classes.iter().filter(|c| c.recurrent)
    }

    pub fn class_of(&self, state: usize) -> Option<&ChainClass> {
        self.classes
            .iter()
            .find(|c| c.states.binary_search(&state).is_ok())
    }
}

/// Communicating classes of the positive-transition digraph of `p`,
/// closed ones tagged recurrent with their period.
pub fn chain_decomposition(p: &RationalMatrix) -> ChainDecomposition {
    let n = p.rows();
    let mut graph = DiGraph::<(), ()>::with_capacity(n, n * 2);
    let nodes: Vec<_> = (0..n).map(|_| graph.add_node(())).collect();
    for i in 0..n {
        for j in 0..p.cols() {
            if !p.get(i, j).is_zero() {
                graph.add_edge(nodes[i], nodes[j], ());
            }
        }
    }
    let mut classes: Vec<ChainClass> = tarjan_scc(&graph)
        .into_iter()
        .map(|component| {
            let mut states: Vec<usize> = component.into_iter().map(|n| n.index()).collect();
            states.sort_unstable();
            let closed = states.iter().all(|&i| {
                (0..p.cols()).all(|j| p.get(i, j).is_zero() || states.binary_search(&j).is_ok())
            });
            let period = closed.then(|| class_period(p, &states));
            ChainClass {
                states,
                recurrent: closed,
                period,
            }
        })
        .collect();
    classes.sort_by_key(|c| c.states[0]);
    ChainDecomposition { classes }
}

/// gcd over in-class edges `u → v` of `level(u) + 1 - level(v)`, with BFS levels.
fn class_period(p: &RationalMatrix, states: &[usize]) -> u64 {
    let mut level: HashMap<usize, i64> = HashMap::new();
    let mut queue = VecDeque::new();
    level.insert(states[0], 0);
    queue.push_back(states[0]);
    let mut g: u64 = 0;
    while let Some(u) = queue.pop_front() {
        let lu = level[&u];
        for &v in states {
            if p.get(u, v).is_zero() {
                continue;
            }
            match level.get(&v) {
                Some(&lv) => g = num_integer::gcd(g, (lu + 1 - lv).unsigned_abs()),
                None => {
                    level.insert(v, lu + 1);
                    queue.push_back(v);
                }
            }
        }
    }
    g
}

/// Exact stationary law supported on one recurrent class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StationaryVector {
    /// One entry per state of `P`; zero outside the class.
    pub values: Vec<BigRational>,
    pub class: Vec<usize>,
}

impl StationaryVector {
    pub fn on_class(&self) -> Vec<BigRational> {
        self.class.iter().map(|&i| self.values[i].clone()).collect()
    }
}

/// Solves `π P = π`, `Σ π = 1` on `class`.
pub fn stationary(p: &RationalMatrix, class: &[usize]) -> Result<StationaryVector> {
    let n = class.len();
    if n == 0 {
        return Err(Error::SingularSystem {
            reason: "empty class".into(),
        });
    }
    let mut sorted = class.to_vec();
    sorted.sort_unstable();
    for &i in &sorted {
        let inside = sorted
            .iter()
            .fold(BigRational::zero(), |acc, &j| acc + p.get(i, j));
        if !inside.is_one() {
            return Err(Error::SingularSystem {
                reason: format!("state {i} leaks probability out of the class"),
            });
        }
    }
    let restricted = p.submatrix(&sorted, &sorted);
    // Rows of (P_C - I)^T are the balance equations.
    let balance = restricted.sub(&RationalMatrix::identity(n))?.transpose();
    if rank(&balance) != n - 1 {
        return Err(Error::SingularSystem {
            reason: "the class is not irreducible (stationary law is not unique)".into(),
        });
    }
    let mut system = balance.clone();
    for j in 0..n {
        system.set(n - 1, j, BigRational::one());
    }
    let mut rhs = RationalMatrix::zeros(n, 1);
    rhs.set(n - 1, 0, BigRational::one());
    let x = solve(&system, &rhs).map_err(|_| Error::SingularSystem {
        reason: "normalized balance system is singular".into(),
    })?;
    let pi: Vec<BigRational> = (0..n).map(|i| x.get(i, 0).clone()).collect();
    if restricted.left_mul_vec(&pi)? != pi {
        return Err(Error::SingularSystem {
            reason: "solution fails πP = π".into(),
        });
    }
    let mut values = vec![BigRational::zero(); p.rows()];
    for (&i, v) in sorted.iter().zip(pi) {
        values[i] = v;
    }
    Ok(StationaryVector {
        values,
        class: sorted,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassSelector {
    /// The recurrent class containing `(M_1, ..., M_N)`; if that state is
    /// transient, the only recurrent class when there is exactly one.
    Max,
    /// Position in [`ChainDecomposition::recurrent`] order.
    Index(usize),
}

pub fn select_class<'a>(
    decomposition: &'a ChainDecomposition,
    states: &[Configuration],
    max_state: &Configuration,
    selector: ClassSelector,
) -> Result<&'a ChainClass> {
    match selector {
        ClassSelector::Max => {
            let idx = states.iter().position(|s| s == max_state).ok_or_else(|| {
                Error::NoRecurrentClass {
                    reason: format!("maximal state {max_state} is not a stable state"),
                }
            })?;
            let class = decomposition
                .class_of(idx)
                .expect("classes partition states");
            if class.recurrent {
                return Ok(class);
            }
            let mut recurrent = decomposition.recurrent();
            match (recurrent.next(), recurrent.next()) {
                (Some(only), None) => Ok(only),
                _ => Err(Error::NoRecurrentClass {
                    reason: format!(
                        "maximal state {max_state} is transient and the recurrent class is not unique"
                    ),
                }),
            }
        }
        ClassSelector::Index(i) => {
            decomposition
                .recurrent()
                .nth(i)
                .ok_or_else(|| Error::NoRecurrentClass {
                    reason: format!("no recurrent class with index {i}"),
                })
        }
    }
}

/// Stationary law of the chain driven by `μ`, on the selected class.
#[derive(Debug, Clone)]
pub struct StationaryResult {
    pub states: Vec<Configuration>,
    pub matrix: RationalMatrix,
    pub decomposition: ChainDecomposition,
    pub stationary: StationaryVector,
}

impl StationaryResult {
    pub fn class_states(&self) -> Vec<Configuration> {
        self.stationary
            .class
            .iter()
            .map(|&i| self.states[i].clone())
            .collect()
    }
}

pub fn stationary_for(
    model: &SandpileModel,
    mu: &AdditionDistribution,
    selector: ClassSelector,
) -> Result<StationaryResult> {
    let (states, matrix) = transition_matrix(model, mu)?;
    let decomposition = chain_decomposition(&matrix);
    let class = select_class(
        &decomposition,
        &states,
        &model.maximal_configuration(),
        selector,
    )?;
    let stationary = stationary(&matrix, &class.states)?;
    Ok(StationaryResult {
        states,
        matrix,
        decomposition,
        stationary,
    })
}

#[derive(Debug, Clone)]
pub struct MuIndependenceReport {
    pub holds: bool,
    pub class: Vec<Configuration>,
    /// One vector per μ, restricted to `class`.
    pub stationaries: Vec<Vec<BigRational>>,
}

/// Compares the exact stationary laws on the class of the maximal state across `mus`.
pub fn mu_independence(
    model: &SandpileModel,
    mus: &[AdditionDistribution],
) -> Result<MuIndependenceReport> {
    if mus.is_empty() {
        return Err(Error::InvalidArgument(
            "at least one addition distribution is required".into(),
        ));
    }
    let results = mus
        .par_iter()
        .map(|mu| stationary_for(model, mu, ClassSelector::Max))
        .collect::<Result<Vec<_>>>()?;
    let class = results[0].class_states();
    for (i, r) in results.iter().enumerate().skip(1) {
        if r.class_states() != class {
            return Err(Error::RecurrentClassMismatch { first: 0, other: i });
        }
    }
    let stationaries: Vec<Vec<BigRational>> =
        results.iter().map(|r| r.stationary.on_class()).collect();
    let holds = stationaries.iter().all(|s| s == &stationaries[0]);
    Ok(MuIndependenceReport {
        holds,
        class,
        stationaries,
    })
}

/// Finds `perm` with `p[perm[i]][perm[j]] == target[i][j]` for all `i, j`.
/// Exhaustive search with row-wise pruning; meant for small matrices.
pub fn match_by_permutation(p: &RationalMatrix, target: &RationalMatrix) -> Option<Vec<usize>> {
    let n = target.rows();
    if !p.is_square() || !target.is_square() || p.rows() != n {
        return None;
    }
    fn extend(
        p: &RationalMatrix,
        target: &RationalMatrix,
        perm: &mut Vec<usize>,
        used: &mut [bool],
    ) -> bool {
        let i = perm.len();
        let n = target.rows();
        if i == n {
            return true;
        }
        for cand in 0..n {
            if used[cand] {
                continue;
            }
            perm.push(cand);
            let consistent = (0..=i).all(|j| {
                p.get(perm[i], perm[j]) == target.get(i, j)
                    && p.get(perm[j], perm[i]) == target.get(j, i)
            });
            if consistent {
                used[cand] = true;
                if extend(p, target, perm, used) {
                    return true;
                }
                used[cand] = false;
            }
            perm.pop();
        }
        false
    }
    let mut perm = Vec::with_capacity(n);
    let mut used = vec![false; n];
    extend(p, target, &mut perm, &mut used).then_some(perm)
}
