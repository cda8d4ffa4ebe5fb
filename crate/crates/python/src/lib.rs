//! Python bindings. Rationals cross the boundary as `fractions.Fraction`
//! on the way out and as anything whose `str()` is `p/q` or `p` on the way in.

use num_rational::BigRational;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

use stochsand::exact::{
    commute_check as core_commute, mu_independence as core_mu_independence, per_site_matrix,
    stable_states, stationary_for, transition_matrix as core_transition, ClassSelector,
};
use stochsand::io::{model_to_json, parse_model_json};
use stochsand::model::{dissipativity, validate_model, ModelDescription};
use stochsand::montecarlo::{default_burn_in, simulate_replicas, tv_distance as core_tv};
use stochsand::presets;
use stochsand::rational::{format_rational, parse_rational, Probability};
use stochsand::stabilize::{
    default_fuel, deterministic_stabilize, random_stabilize as core_random_stabilize, CounterState,
    DeckSource, SiteSelectionPolicy,
};
use stochsand::{AdditionDistribution, Configuration, RationalMatrix, SandpileModel, SiteIndex};

type Cards<'py> = Vec<(Vec<i64>, Bound<'py, PyAny>)>;

fn err(e: stochsand::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn rational(obj: &Bound<'_, PyAny>) -> PyResult<BigRational> {
    parse_rational(&obj.str()?.to_cow()?).map_err(err)
}

fn probability(obj: &Bound<'_, PyAny>) -> PyResult<Probability> {
    Probability::new(rational(obj)?).map_err(err)
}

fn fraction<'py>(py: Python<'py>, r: &BigRational) -> PyResult<Bound<'py, PyAny>> {
    py.import("fractions")?
        .getattr("Fraction")?
        .call1((format_rational(r),))
}

fn fractions<'py>(py: Python<'py>, v: &[BigRational]) -> PyResult<Bound<'py, PyList>> {
    let items = v
        .iter()
        .map(|r| fraction(py, r))
        .collect::<PyResult<Vec<_>>>()?;
    PyList::new(py, items)
}

fn matrix<'py>(py: Python<'py>, m: &RationalMatrix) -> PyResult<Bound<'py, PyList>> {
    let rows = (0..m.rows())
        .map(|i| fractions(py, m.row(i)))
        .collect::<PyResult<Vec<_>>>()?;
    PyList::new(py, rows)
}

fn grains(states: &[Configuration]) -> Vec<Vec<i64>> {
    states.iter().map(|s| s.grains().to_vec()).collect()
}

fn addition(
    model: &SandpileModel,
    mu: Option<Vec<Bound<'_, PyAny>>>,
) -> PyResult<AdditionDistribution> {
    let mu = match mu {
        None => return Ok(model.uniform_addition()),
        Some(mu) => mu,
    };
    let weights = mu.iter().map(probability).collect::<PyResult<Vec<_>>>()?;
    let mu = AdditionDistribution::new(weights).map_err(err)?;
    mu.check_for(model).map_err(err)?;
    Ok(mu)
}

fn site(model: &SandpileModel, k: usize) -> PyResult<SiteIndex> {
    SiteIndex::new(k, model.n_sites()).map_err(err)
}

fn policy(
    model: &SandpileModel,
    spec: &Bound<'_, PyAny>,
    seed: u64,
) -> PyResult<SiteSelectionPolicy> {
    if let Ok(sites) = spec.extract::<Vec<usize>>() {
        let sites = sites
            .into_iter()
            .map(|v| site(model, v))
            .collect::<PyResult<Vec<_>>>()?;
        return Ok(SiteSelectionPolicy::ExplicitSequence(sites));
    }
    let name: String = spec.extract()?;
    Ok(match name.as_str() {
        "smallest" => SiteSelectionPolicy::SmallestIndex,
        "largest" => SiteSelectionPolicy::LargestIndex,
        "most-grains" => SiteSelectionPolicy::MostGrains,
        "round-robin" => SiteSelectionPolicy::RoundRobin,
        "random" => SiteSelectionPolicy::SeededRandom(seed),
        other => return Err(PyValueError::new_err(format!("unknown policy {other:?}"))),
    })
}

fn configuration(values: Vec<i64>) -> PyResult<Configuration> {
    Configuration::new(values).map_err(err)
}

/// A validated stochastic sandpile model. Sites are numbered from 1.
#[pyclass(name = "Model", frozen, module = "stochsand")]
struct PyModel {
    inner: SandpileModel,
}

#[pymethods]
impl PyModel {
    /// `topplings[v]` lists `(delta, probability)` pairs for site `v + 1`.
    #[new]
    fn new(topplings: Vec<Cards<'_>>) -> PyResult<Self> {
        let topplings = topplings
            .into_iter()
            .map(|cards| {
                cards
                    .into_iter()
                    .map(|(d, p)| Ok((d, rational(&p)?)))
                    .collect::<PyResult<Vec<_>>>()
            })
            .collect::<PyResult<Vec<_>>>()?;
        let inner = validate_model(&ModelDescription {
            n_sites: topplings.len(),
            topplings,
        })
        .map_err(err)?;
        Ok(Self { inner })
    }

    /// Parses a model file; any addition law in the file is ignored.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let (inner, _) = parse_model_json(text).map_err(err)?;
        Ok(Self { inner })
    }

    fn to_json(&self) -> String {
        model_to_json(&self.inner, None)
    }

    #[getter]
    fn n_sites(&self) -> usize {
        self.inner.n_sites()
    }

    #[getter]
    fn thresholds(&self) -> Vec<i64> {
        self.inner.thresholds().to_vec()
    }

    fn topplings<'py>(&self, py: Python<'py>) -> PyResult<Vec<Cards<'py>>> {
        self.inner
            .topplings()
            .iter()
            .map(|d| {
                d.support()
                    .iter()
                    .map(|(nu, p)| Ok((nu.delta().to_vec(), fraction(py, p.value())?)))
                    .collect()
            })
            .collect()
    }

    fn is_stable(&self, config: Vec<i64>) -> PyResult<bool> {
        Ok(self.inner.is_stable(&configuration(config)?))
    }

    fn stable_states(&self) -> Vec<Vec<i64>> {
        grains(&stable_states(&self.inner))
    }

    /// `{"satisfied", "depth", "layers", "witness"}`.
    fn dissipativity<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let report = dissipativity(&self.inner);
        let sites = |set: &std::collections::BTreeSet<SiteIndex>| -> Vec<usize> {
            set.iter().map(|s| s.get()).collect()
        };
        let d = PyDict::new(py);
        d.set_item("satisfied", report.satisfied)?;
        d.set_item("depth", report.depth)?;
        d.set_item(
            "layers",
            report.layers.iter().map(sites).collect::<Vec<_>>(),
        )?;
        d.set_item("witness", report.witness.as_ref().map(sites))?;
        Ok(d)
    }

    fn __repr__(&self) -> String {
        format!(
            "Model(n_sites={}, thresholds={:?})",
            self.inner.n_sites(),
            self.inner.thresholds()
        )
    }
}

#[pyfunction]
fn paper_triangle_ssm(
    alpha: Bound<'_, PyAny>,
    beta: Bound<'_, PyAny>,
    gamma: Bound<'_, PyAny>,
) -> PyResult<PyModel> {
    let inner = presets::paper_triangle_ssm(
        &probability(&alpha)?,
        &probability(&beta)?,
        &probability(&gamma)?,
    )
    .map_err(err)?;
    Ok(PyModel { inner })
}

/// Returns the model and its addition law `[alpha, 1 - alpha]`.
#[pyfunction]
fn paper_triangle_asm<'py>(
    py: Python<'py>,
    alpha: Bound<'py, PyAny>,
) -> PyResult<(PyModel, Bound<'py, PyList>)> {
    let (inner, mu) = presets::paper_triangle_asm(&probability(&alpha)?).map_err(err)?;
    let weights: Vec<BigRational> = mu.weights().iter().map(|w| w.value().clone()).collect();
    Ok((PyModel { inner }, fractions(py, &weights)?))
}

#[pyfunction]
fn single_grain_path(n_sites: usize) -> PyResult<PyModel> {
    Ok(PyModel {
        inner: presets::single_grain_path(n_sites).map_err(err)?,
    })
}

/// Stabilizes with deck-coupled topplings. `decks` lists explicit cards per
/// site; otherwise cards come from `seed`. Returns `(configuration, counters, log)`
/// with log entries `(site, card, delta)`.
#[pyfunction]
#[pyo3(signature = (model, config, counters=None, seed=0, policy=None, decks=None, fuel=None))]
#[allow(clippy::type_complexity, clippy::too_many_arguments)]
fn stabilize(
    model: &PyModel,
    config: Vec<i64>,
    counters: Option<Vec<u64>>,
    seed: u64,
    policy: Option<Bound<'_, PyAny>>,
    decks: Option<Vec<Vec<Vec<i64>>>>,
    fuel: Option<u64>,
) -> PyResult<(Vec<i64>, Vec<u64>, Vec<(usize, u64, Vec<i64>)>)> {
    let m = &model.inner;
    let config = configuration(config)?;
    let state = match counters {
        Some(c) => CounterState::with_counters(config, c).map_err(err)?,
        None => CounterState::new(config),
    };
    let policy = match policy {
        Some(p) => self::policy(m, &p, seed)?,
        None => SiteSelectionPolicy::SmallestIndex,
    };
    let decks = match decks {
        Some(d) => DeckSource::explicit(m, d).map_err(err)?,
        None => DeckSource::seeded(m, seed),
    };
    let fuel = fuel.unwrap_or_else(|| default_fuel(m, &state.configuration));
    let (out, log) = deterministic_stabilize(m, &state, &decks, &policy, fuel).map_err(err)?;
    Ok((
        out.configuration.into_grains(),
        out.counters,
        log.entries
            .into_iter()
            .map(|e| (e.site.get(), e.card, e.delta))
            .collect(),
    ))
}

#[pyfunction]
fn random_stabilize(model: &PyModel, config: Vec<i64>, seed: u64) -> PyResult<Vec<i64>> {
    Ok(
        core_random_stabilize(&model.inner, &configuration(config)?, seed)
            .map_err(err)?
            .into_grains(),
    )
}

/// Collapsed stable-state chain: `(states, matrix)` in lexicographic order.
#[pyfunction]
#[pyo3(signature = (model, mu=None))]
fn transition_matrix<'py>(
    py: Python<'py>,
    model: &PyModel,
    mu: Option<Vec<Bound<'py, PyAny>>>,
) -> PyResult<(Vec<Vec<i64>>, Bound<'py, PyList>)> {
    let mu = addition(&model.inner, mu)?;
    let (states, p) = core_transition(&model.inner, &mu).map_err(err)?;
    Ok((grains(&states), matrix(py, &p)?))
}

/// `P^(k)` on the stable states, `k` counted from 1.
#[pyfunction]
fn site_matrix<'py>(py: Python<'py>, model: &PyModel, k: usize) -> PyResult<Bound<'py, PyList>> {
    let p = per_site_matrix(&model.inner, site(&model.inner, k)?).map_err(err)?;
    matrix(py, &p)
}

/// Stationary law on the recurrent class of the maximal state, or on the
/// `class_index`-th recurrent class.
#[pyfunction]
#[pyo3(signature = (model, mu=None, class_index=None))]
fn stationary<'py>(
    py: Python<'py>,
    model: &PyModel,
    mu: Option<Vec<Bound<'py, PyAny>>>,
    class_index: Option<usize>,
) -> PyResult<Bound<'py, PyDict>> {
    let mu = addition(&model.inner, mu)?;
    let selector = class_index.map_or(ClassSelector::Max, ClassSelector::Index);
    let r = stationary_for(&model.inner, &mu, selector).map_err(err)?;
    let class = r
        .decomposition
        .class_of(r.stationary.class[0])
        .expect("classes partition states");
    let d = PyDict::new(py);
    d.set_item("states", grains(&r.class_states()))?;
    d.set_item("pi", fractions(py, &r.stationary.on_class())?)?;
    d.set_item("period", class.period)?;
    Ok(d)
}

#[pyfunction]
fn commute_check(model: &PyModel) -> PyResult<bool> {
    Ok(core_commute(&model.inner).map_err(err)?.holds)
}

/// `(holds, stationaries)` across the given addition laws.
#[pyfunction]
fn mu_independence<'py>(
    py: Python<'py>,
    model: &PyModel,
    mus: Vec<Vec<Bound<'py, PyAny>>>,
) -> PyResult<(bool, Vec<Bound<'py, PyList>>)> {
    let mus = mus
        .into_iter()
        .map(|mu| addition(&model.inner, Some(mu)))
        .collect::<PyResult<Vec<_>>>()?;
    let report = core_mu_independence(&model.inner, &mus).map_err(err)?;
    let stationaries = report
        .stationaries
        .iter()
        .map(|s| fractions(py, s))
        .collect::<PyResult<Vec<_>>>()?;
    Ok((report.holds, stationaries))
}

/// Occupancy frequencies of the simulated chain over the stable states.
#[pyfunction]
#[pyo3(signature = (model, steps, mu=None, burn_in=None, seed=0, replicas=1))]
fn simulate<'py>(
    py: Python<'py>,
    model: &PyModel,
    steps: u64,
    mu: Option<Vec<Bound<'py, PyAny>>>,
    burn_in: Option<u64>,
    seed: u64,
    replicas: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let mu = addition(&model.inner, mu)?;
    let seeds: Vec<u64> = (0..replicas.max(1)).map(|i| seed.wrapping_add(i)).collect();
    let burn_in = burn_in.unwrap_or_else(|| default_burn_in(steps));
    let report = py
        .detach(|| {
            simulate_replicas(
                &model.inner,
                &mu,
                steps,
                burn_in,
                &seeds,
                &SiteSelectionPolicy::SmallestIndex,
            )
        })
        .map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("states", grains(&report.states))?;
    d.set_item("counts", report.counts)?;
    d.set_item("frequencies", report.frequencies)?;
    Ok(d)
}

#[pyfunction]
fn tv_distance(a: Vec<f64>, b: Vec<f64>) -> PyResult<f64> {
    core_tv(&a, &b).map_err(err)
}

#[pymodule]
#[pyo3(name = "stochsand")]
fn stochsand_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyModel>()?;
    m.add_function(wrap_pyfunction!(paper_triangle_ssm, m)?)?;
    m.add_function(wrap_pyfunction!(paper_triangle_asm, m)?)?;
    m.add_function(wrap_pyfunction!(single_grain_path, m)?)?;
    m.add_function(wrap_pyfunction!(stabilize, m)?)?;
    m.add_function(wrap_pyfunction!(random_stabilize, m)?)?;
    m.add_function(wrap_pyfunction!(transition_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(site_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(stationary, m)?)?;
    m.add_function(wrap_pyfunction!(commute_check, m)?)?;
    m.add_function(wrap_pyfunction!(mu_independence, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(tv_distance, m)?)?;
    Ok(())
}
